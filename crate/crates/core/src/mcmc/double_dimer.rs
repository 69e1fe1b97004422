//! Independent dimer covers at zero monomer activity.
//!
//! At `N = 1` the two colours of the double-dimer model are independent
//! uniform dimer covers. Each colour is sampled by cycle rotations on short
//! cycles and straight non-contractible lines.

use crate::error::{invalid, Result};
use crate::lattice::Graph;
use crate::mcmc::chain::{run_measured, Chain, ChainConfig, LoopStats};
use crate::mcmc::kernel::{closed_reachable, ConnectivityReport};
use crate::mcmc::moves::MoveMix;
use crate::mcmc::state::{perfect_matching, WormState};
use crate::model::MddConfiguration;

fn start(g: &Graph) -> Result<WormState> {
    let d = perfect_matching(g)?;
    WormState::from_config(g, &MddConfiguration { monomers: vec![], blue: d.clone(), red: d })
}

/// Samples the double-dimer model. `cfg.rho` must be 0 and `cfg.n_colors` 1;
/// the move mix is replaced by cycle rotations.
pub fn sample_double_dimer(g: &Graph, cfg: &ChainConfig) -> Result<LoopStats> {
    if cfg.rho != 0.0 {
        return invalid("the double-dimer sampler runs at rho = 0");
    }
    if cfg.n_colors != 1 {
        return invalid("the double-dimer sampler needs N = 1; loop-weighted covers are unsupported");
    }
    let inner = ChainConfig { rho: 1.0, mix: MoveMix::covers_only(), worm_weight: Some(1.0), ..cfg.clone() };
    let mut chain = Chain::new(g, &inner)?.with_state(start(g)?).without_loop_counts();
    chain.burn_in(cfg.burn_in, false);
    let (mut stats, _) = run_measured(g, &inner, chain);
    stats.rho = 0.0;
    stats.cesaro = crate::mcmc::stats::Estimate::exact(0.0);
    Ok(stats)
}

/// Pairs of covers reachable by cycle rotations from a fixed pair.
pub fn cover_connectivity(g: &Graph) -> Result<ConnectivityReport> {
    closed_reachable(g, MoveMix::covers_only(), &start(g)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::covers::cover_edge_sets;
    use crate::exact::mdd_expectations;

    fn cfg(sweeps: usize, seed: u64) -> ChainConfig {
        ChainConfig { rho: 0.0, n_colors: 1, sweeps, burn_in: sweeps / 10, seed, ..Default::default() }
    }

    #[test]
    fn c4_adjacent_connection() {
        let g = Graph::cycle(4).unwrap();
        let s = sample_double_dimer(&g, &cfg(40_000, 2)).unwrap();
        assert!(s.connected[1].z_score(0.75) < 3.0, "{:?}", s.connected[1]);
    }

    #[test]
    fn torus_covers_are_connected() {
        let g = Graph::slab_torus(4, 1).unwrap();
        let r = cover_connectivity(&g).unwrap();
        assert!(r.symmetric);
        assert_eq!(r.n_reachable, 272 * 272);
    }

    #[test]
    fn torus_marginals() {
        let g = Graph::slab_torus(4, 1).unwrap();
        let s = sample_double_dimer(&g, &cfg(100_000, 4)).unwrap();
        let covers = cover_edge_sets(&g).unwrap();
        for e in 0..g.n_edges() {
            let exact = covers.iter().filter(|c| c.contains(&e)).count() as f64 / covers.len() as f64;
            assert!(s.edge_occupation[e].z_score(exact) < 4.0, "edge {e}");
        }
        let ex = mdd_expectations(&g, 0.0, 1).unwrap();
        for x in g.neighbours(g.origin()) {
            assert!(s.connected[x].z_score(ex.connected[x]) < 3.0, "{x}: {:?} vs {}", s.connected[x], ex.connected[x]);
        }
    }

    #[test]
    fn rejects_loop_weights() {
        let g = Graph::cycle(4).unwrap();
        assert!(sample_double_dimer(&g, &ChainConfig { n_colors: 2, ..cfg(1000, 1) }).is_err());
        assert!(sample_double_dimer(&g, &ChainConfig { rho: 1.0, ..cfg(1000, 1) }).is_err());
    }
}
