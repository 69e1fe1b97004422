//! Benchmark fixtures shared by the criterion targets.

use loopforge::mcmc::ChainConfig;
use loopforge::{Graph, ModelParams, WeightFunction};

/// Graphs small enough for the exact oracles.
pub fn oracle_graphs() -> Vec<Graph> {
    vec![Graph::cycle(4).unwrap(), Graph::open_grid(2, 3).unwrap(), Graph::slab_torus(4, 1).unwrap()]
}

/// Short chain for timing sweeps.
pub fn short_chain(rho: f64) -> ChainConfig {
    ChainConfig { rho, sweeps: 2_000, burn_in: 200, seed: 1, ..Default::default() }
}

pub fn spin_point() -> (WeightFunction, ModelParams) {
    (WeightFunction::mdd(), ModelParams { beta: 0.5, ..Default::default() })
}
