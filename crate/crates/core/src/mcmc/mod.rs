//! Worm Monte Carlo for the monomer double-dimer model.

pub mod chain;
pub mod double_dimer;
pub mod kernel;
pub mod moves;
pub mod scan;
pub mod state;
pub mod stats;

pub use moves::{MoveKind, MoveMix, MoveSet, Proposal};
pub use state::{perfect_matching, Op, StateKey, WormState};
pub use stats::{mean_estimate, ratio_estimate, Estimate};
pub use chain::{closed_tv_distance, sample_mdd, Chain, ChainConfig, LoopStats};
pub use double_dimer::sample_double_dimer;
pub use scan::{decay_scan, decay_verdict, monotonicity_check, monotonicity_exact, DecayRow, MonotonicityReport};
