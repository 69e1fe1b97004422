//! Model invariants as property tests.

use loopforge::exact::{enum_dimer_covers, fkt_count, mdd_expectations, mdd_partition, mdd_states};
use loopforge::fourier::property_sweep;
use loopforge::mcmc::{mean_estimate, sample_mdd, ChainConfig};
use loopforge::model::{from_permutation, mdd_weight, to_permutation};
use loopforge::Graph;
use proptest::prelude::*;

fn small_graphs() -> Vec<Graph> {
    vec![
        Graph::k2(),
        Graph::cycle(4).unwrap(),
        Graph::path(4).unwrap(),
        Graph::open_grid(2, 3).unwrap(),
        Graph::cycle(6).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pfaffian_matches_enumeration(w in 1usize..=5, h in 1usize..=4) {
        prop_assume!(w * h >= 2);
        let g = Graph::open_grid(w, h).unwrap();
        prop_assert_eq!(fkt_count(w, h).unwrap(), enum_dimer_covers(&g).unwrap());
    }

    #[test]
    fn permutation_weights_agree(gi in 0usize..5, rho in 0.1f64..5.0, n in 1u32..4) {
        let g = &small_graphs()[gi];
        prop_assume!(g.is_simple());
        let mut z = 0.0;
        for cfg in mdd_states(g).unwrap() {
            let p = to_permutation(g, &cfg).unwrap();
            prop_assert_eq!(&from_permutation(g, &p).unwrap(), &cfg);
            let w = mdd_weight(g, &cfg, rho, n).unwrap();
            prop_assert!((w - p.weight(rho, n)).abs() <= 1e-12 * w.abs().max(1.0));
            z += w;
        }
        let exact = mdd_partition(g, &rho, &(n as f64)).unwrap();
        prop_assert!((z - exact).abs() <= 1e-9 * exact);
    }

    #[test]
    fn exact_expectations_are_probabilities(gi in 0usize..5, rho in 0.1f64..5.0, n in 1u32..4) {
        let g = &small_graphs()[gi];
        let ex = mdd_expectations(g, rho, n).unwrap();
        let total: f64 = ex.loop_len_dist.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(ex.connected.iter().all(|&c| (-1e-12..=1.0 + 1e-12).contains(&c)));
        prop_assert!(ex.mean_origin_loop >= 0.0 && ex.mean_origin_loop <= g.n_vertices() as f64);
    }

    #[test]
    fn fourier_sweep_has_no_violations(seed in any::<u64>()) {
        let r = property_sweep(&[8, 16, 32], 50, seed).unwrap();
        prop_assert_eq!(r.violations, 0);
        prop_assert!(r.max_sbp_error <= 1e-12);
    }
}

#[test]
fn sampled_errors_shrink_with_run_length() {
    let g = Graph::cycle(4).unwrap();
    let run = |sweeps| {
        let cfg = ChainConfig { sweeps, burn_in: 1_000, seed: 3, ..Default::default() };
        sample_mdd(&g, &cfg).unwrap().0.mean_origin_loop.err
    };
    let (short, long) = (run(20_000), run(320_000));
    // sixteen times the sweeps should roughly quarter the error
    let ratio = short / long;
    assert!((2.5..6.5).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn iid_error_bars_scale() {
    let xs: Vec<f64> = (0..64_000).map(|i| ((i * 7919) % 1000) as f64 / 1000.0).collect();
    let e = mean_estimate(&xs, 64);
    assert!(e.err > 0.0 && (e.value - 0.4995).abs() < 0.01);
}
