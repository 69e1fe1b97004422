//! Loop models on bipartite graphs: the monomer double-dimer model, its
//! multi-occupancy generalisation and the dual complex spin system.
//!
//! The crate provides exhaustive and Pfaffian oracles, a quadrature verifier
//! for the spin-path correspondence, Fourier-space bounds on reflection
//! positive two-point functions and a worm Monte Carlo sampler.

pub mod error;
pub mod checks;
pub mod exact;
pub mod fourier;
pub mod io;
pub mod lattice;
pub mod mcmc;
pub mod model;
pub mod numeric;
pub mod spin;

pub use error::{Error, Result};
pub use lattice::{dual_modes, positive_cone, Enlarged, FourierMode, Graph, Parity, ReflectionPlane, TorusDims};
pub use model::{
    Color, Loop, MddConfiguration, ModelParams, MultiOccConfiguration, Occupancy, Permutation, WeightFunction,
};
pub use exact::{TwoPointEntry, TwoPointTable};
