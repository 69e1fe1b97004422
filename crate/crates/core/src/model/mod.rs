//! Configuration types, weights and the loop decomposition shared by every
//! model in the crate.

pub mod config;
pub mod multiocc;
pub mod weight;

pub use config::{
    from_permutation, mdd_weight, to_permutation, Color, Loop, MddConfiguration, Occupancy, Permutation, NONE,
};
pub use multiocc::{
    local_time, multiocc_loops, multiocc_weight, reduced_local_time, source_vector, MultiOccConfiguration,
};
pub use weight::{ModelParams, WeightFunction, WeightPreset};
