//! The acceptance suite: one check per criterion, shared by the acceptance
//! test target and the `verify-all` command.

use std::time::Instant;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::{count_covers, enum_dimer_covers, fkt_count, mdd_expectations, mdd_partition, mdd_states, PathSum, Sector};
use crate::fourier::property_sweep;
use crate::lattice::Graph;
use crate::mcmc::kernel::{check_kernel, reduction_check, ExactCouplings};
use crate::mcmc::{closed_tv_distance, decay_scan, decay_verdict, monotonicity_check, sample_mdd, ChainConfig, MoveMix};
use crate::model::{from_permutation, mdd_weight, to_permutation, ModelParams, Permutation, WeightFunction};
use crate::numeric::{ratio, Scalar};
use crate::spin::quadrature::Quadrature;
use crate::spin::verify::{bridge_grid, twopoint_bounds, Verifier};

/// Largest open grid of the cover-count comparison.
pub const GRID_VERTEX_LIMIT: usize = 20;
/// Relative tolerance of `Z^spin = Z^path`; the other reports carry their own.
pub const BRIDGE_TOL: f64 = 1e-8;
pub const SBP_TOL: f64 = 1e-12;
pub const FOURIER_CASES: usize = 10_000;
pub const TV_TOL: f64 = 0.01;
pub const SIGMA_MAX: f64 = 0.01;
pub const Z_MAX: f64 = 3.0;

/// Verdict of one acceptance criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub failures: Vec<String>,
    pub runtime_secs: f64,
    pub budget_secs: f64,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} | {} | {} | {:.1}s of {:.0}s",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.runtime_secs,
            self.budget_secs
        )
    }
}

struct Tally {
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Tally {
        Tally { failures: Vec::new() }
    }
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }
}

fn finish(id: u32, name: &str, budget: f64, start: Instant, detail: String, t: Tally) -> CheckOutcome {
    let secs = start.elapsed().as_secs_f64();
    let mut failures = t.failures;
    if secs > budget {
        failures.push(format!("runtime {secs:.1}s exceeds {budget:.0}s"));
    }
    CheckOutcome {
        id,
        name: name.into(),
        pass: failures.is_empty(),
        detail,
        failures,
        runtime_secs: secs,
        budget_secs: budget,
    }
}

fn outcome(id: u32, name: &str, budget: f64, start: Instant, r: Result<(String, Tally)>) -> CheckOutcome {
    match r {
        Ok((detail, t)) => finish(id, name, budget, start, detail, t),
        Err(e) => {
            let mut t = Tally::new();
            t.failures.push(format!("error: {e}"));
            finish(id, name, budget, start, "aborted".into(), t)
        }
    }
}

/// Pfaffian and enumeration agree on open grids; the 4x4 torus count is the golden value.
pub fn oracle_agreement() -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(String, Tally)> {
        let mut t = Tally::new();
        let mut grids = 0;
        for w in 1..=GRID_VERTEX_LIMIT {
            for h in (1..=GRID_VERTEX_LIMIT / w).filter(|&h| w * h >= 2) {
                let a = fkt_count(w, h)?;
                let b = enum_dimer_covers(&Graph::open_grid(w, h)?)?;
                t.check(a == b, || format!("grid {w}x{h}: pfaffian {a} vs enumeration {b}"));
                grids += 1;
            }
        }
        let torus = enum_dimer_covers(&Graph::slab_torus(4, 1)?)?;
        let golden = crate::io::golden_value("dimer_covers_torus4x1")? as u128;
        t.check(torus == golden, || format!("4x4 torus: {torus} vs golden {golden}"));
        Ok((format!("{grids} grids agree, 4x4 torus {torus} (golden {golden})"), t))
    };
    outcome(1, "cover counts: Pfaffian vs enumeration", 10.0, start, run())
}

/// Spin integrals against path sums on K2 and C4 across the parameter grid.
pub fn spin_path_bridge() -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(String, Tally)> {
        let mut t = Tally::new();
        let mut n_reports = 0;
        let mut worst: f64 = 0.0;
        for g in [Graph::k2(), Graph::cycle(4)?] {
            for (params, u) in bridge_grid() {
                let v = Verifier::new(&g, &u, params, Quadrature::default_for(g.n_vertices()))?;
                let mut reports = vec![v.partition()];
                reports.extend(v.conversion(&v.default_monomials())?);
                reports.extend(v.local_time()?);
                reports.extend(v.zero_averages()?);
                for r in &reports {
                    n_reports += 1;
                    worst = worst.max(r.abs_err / r.tolerance.max(f64::MIN_POSITIVE));
                    t.check(r.pass, || format!("{} on {} at {}: {} vs {}", r.identity, r.graph, r.params, r.lhs, r.rhs));
                }
                let z = v.partition();
                t.check(z.abs_err <= BRIDGE_TOL, || format!("Z on {} at {}: relative error {:e}", g.name(), z.params, z.abs_err));
            }
        }
        Ok((format!("{n_reports} reports on 24 points x 2 graphs, worst error/tolerance {worst:.2e}"), t))
    };
    outcome(2, "spin-path bridge", 900.0, start, run())
}

/// Exact special cases of the path partition function.
pub fn special_cases() -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(String, Tally)> {
        let mut t = Tally::new();
        let dimer = WeightFunction::dimer();
        let mdd = WeightFunction::mdd();
        let graphs = [Graph::k2(), Graph::cycle(4)?, Graph::path(4)?, Graph::open_grid(2, 3)?];
        let betas = [ratio(1, 4), ratio(1, 2), ratio(1, 1), ratio(2, 1)];
        for g in &graphs {
            let covers = <BigRational as Scalar>::from_u128(enum_dimer_covers(g)?);
            let z: BigRational = PathSum::new(g, &dimer, ModelParams { beta: 1.0, ..Default::default() })?.zpath()?;
            t.check(z == &covers * &covers, || format!("{}: zpath(dimer, 1) = {z} vs |D|^2 = {}", g.name(), &covers * &covers));
            for beta in &betas {
                let bf = Scalar::to_f64(beta);
                let z: BigRational = PathSum::new(g, &mdd, ModelParams { beta: bf, ..Default::default() })?.zpath()?;
                let rho = BigRational::from_integer(1.into()) / beta;
                let rhs = Scalar::powu(beta, g.n_vertices() as u32) * mdd_partition(g, &rho, &<BigRational as Scalar>::from_u128(1))?;
                t.check(z == rhs, || format!("{} beta {beta}: zpath(mdd) = {z} vs {rhs}", g.name()));
            }
        }
        let c4 = Graph::cycle(4)?;
        let ps = PathSum::new(&c4, &dimer, ModelParams { beta: 1.0, ..Default::default() })?;
        let z: BigRational = ps.zpath()?;
        let covers = <BigRational as Scalar>::from_u128(enum_dimer_covers(&c4)?);
        let o = c4.origin();
        for y in (0..4).filter(|&y| c4.parity(y) != c4.parity(o)) {
            let g1 = ps.eval::<BigRational>(&Sector::walk(&c4, o, y))? / &z;
            let cg = <BigRational as Scalar>::from_u128(count_covers(&c4, 1 << o | 1 << y)?) / &covers;
            t.check(g1 == cg, || format!("C4 y={y}: G1 = {g1} vs C_G = {cg}"));
        }
        Ok((format!("{} graphs, {} betas, exact rational equality", graphs.len(), betas.len()), t))
    };
    outcome(3, "exact special cases", 60.0, start, run())
}

/// Two-point bounds for the monomer double-dimer weight at zero field.
pub fn twopoint_bound_check() -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(String, Tally)> {
        let mut t = Tally::new();
        let u = WeightFunction::mdd();
        let (mut g1, mut g1_ok, mut g2, mut g2_ok) = (0, 0, 0, 0);
        for g in [Graph::k2(), Graph::cycle(4)?] {
            for beta in [0.25, 0.5] {
                let params = ModelParams { beta, ..Default::default() };
                for r in twopoint_bounds(&g, &u, &params, Quadrature::default_for(g.n_vertices()))? {
                    let single = r.identity.starts_with("G1");
                    if single {
                        g1 += 1;
                        g1_ok += r.pass as usize;
                    } else {
                        g2 += 1;
                        g2_ok += r.pass as usize;
                    }
                    t.check(r.pass, || format!("{} on {} beta {beta}: {:.4} > {:.4}", r.identity, r.graph, r.lhs, r.rhs));
                }
            }
        }
        Ok((format!("single-walk bound {g1_ok}/{g1}, loop bound {g2_ok}/{g2}"), t))
    };
    outcome(4, "two-point bounds", 120.0, start, run())
}

/// Rotation identities, the neighbour formula and the positivity surrogate on K2.
pub fn rotation_ingredients() -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(String, Tally)> {
        let mut t = Tally::new();
        let g = Graph::k2();
        let u = WeightFunction::mdd();
        let mut n = 0;
        for h in [0.0, 0.02] {
            for r in [1, 2] {
                let params = ModelParams { beta: 0.5, h, r, ..Default::default() };
                let v = Verifier::new(&g, &u, params, Quadrature::default_for(2))?;
                let mut reports = v.rotation_identities()?;
                reports.extend(v.rotation_positivity()?);
                reports.extend(v.neighbour_identity()?);
                for rep in &reports {
                    n += 1;
                    t.check(rep.pass, || format!("{} at h={h} r={r}: {} vs {}", rep.identity, rep.lhs, rep.rhs));
                }
            }
        }
        Ok((format!("{n} reports on K2 at h in {{0, 0.02}}"), t))
    };
    outcome(5, "rotation identities and positivity", 120.0, start, run())
}

/// Randomized Fourier lower bound and summation-by-parts cases.
pub fn fourier_properties() -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(String, Tally)> {
        let mut t = Tally::new();
        let rep = property_sweep(&[8, 16, 32], FOURIER_CASES, 2024)?;
        t.check(rep.violations == 0, || format!("{} violations", rep.violations));
        t.check(rep.inapplicable == 0, || format!("{} cases had unmet hypotheses", rep.inapplicable));
        t.check(rep.max_sbp_error <= SBP_TOL, || format!("summation by parts error {:e}", rep.max_sbp_error));
        Ok((
            format!("{}/{} cases pass, max summation-by-parts error {:.1e}", rep.passed, rep.cases, rep.max_sbp_error),
            t,
        ))
    };
    outcome(6, "Fourier lower bound properties", 30.0, start, run())
}

/// Sampler exactness: distributions, observables, detailed balance and irreducibility.
pub fn sampler_exactness() -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(String, Tally)> {
        let mut t = Tally::new();
        let c4 = Graph::cycle(4)?;
        let mut worst_tv: f64 = 0.0;
        for rho in [0.5, 1.0, 2.0] {
            for n in [1, 2] {
                let cfg = ChainConfig { rho, n_colors: n, sweeps: 1_000_000, burn_in: 10_000, seed: 7, ..Default::default() };
                let tv = closed_tv_distance(&c4, &cfg)?;
                worst_tv = worst_tv.max(tv);
                t.check(tv <= TV_TOL, || format!("C4 rho {rho} N {n}: TV {tv:.4}"));
                let exact = ExactCouplings::new(<BigRational as Scalar>::from_f64(rho), n, ratio(1, 4));
                let k = check_kernel(&c4, MoveMix::default(), &exact)?;
                t.check(k.pass(), || format!("C4 kernel at rho {rho} N {n}: {k:?}"));
            }
        }
        let k2 = check_kernel(&Graph::k2(), MoveMix::default(), &ExactCouplings::new(ratio(1, 1), 2, ratio(1, 2)))?;
        t.check(k2.pass(), || format!("K2 kernel: {k2:?}"));

        let torus = Graph::slab_torus(4, 1)?;
        let red = reduction_check(&torus, MoveMix::default())?;
        t.check(red.pass(), || format!("4x4 torus reduction: {red:?}"));

        let mut n_obs = 0;
        let mut worst_z: f64 = 0.0;
        let mut worst_sigma: f64 = 0.0;
        for n in [1, 2] {
            let ex = mdd_expectations(&torus, 1.0, n)?;
            let cfg = ChainConfig { rho: 1.0, n_colors: n, sweeps: 2_500_000, burn_in: 50_000, seed: 11, ..Default::default() };
            let (s, walk) = sample_mdd(&torus, &cfg)?;
            let mut obs = vec![("mean_origin_loop".to_string(), s.mean_origin_loop, ex.mean_origin_loop)];
            for (eps, e) in &s.tails {
                obs.push((format!("tail {eps}"), *e, ex.tail(*eps)));
            }
            for (len, e) in s.loop_len_dist.iter().enumerate() {
                obs.push((format!("loop length {len}"), *e, ex.loop_len_dist[len]));
            }
            for (x, e) in s.connected.iter().enumerate() {
                obs.push((format!("connected {x}"), *e, ex.connected[x]));
            }
            for e in &walk.entries {
                let est = crate::mcmc::Estimate { value: e.value, err: e.err, converged: true };
                obs.push((format!("walk {}", e.y), est, ex.walk[e.y]));
            }
            for (name, est, exact) in obs {
                n_obs += 1;
                let z = est.z_score(exact);
                worst_z = worst_z.max(if est.err == 0.0 && est.value == exact { 0.0 } else { z });
                worst_sigma = worst_sigma.max(est.err);
                t.check(z <= Z_MAX, || format!("4x4 N={n} {name}: {:.5} +- {:.5} vs {exact:.5}", est.value, est.err));
                t.check(est.err <= SIGMA_MAX, || format!("4x4 N={n} {name}: sigma {:.4}", est.err));
            }
        }
        Ok((
            format!(
                "worst TV {worst_tv:.4}; {n_obs} torus observables, worst z {worst_z:.2}, worst sigma {worst_sigma:.4}; \
                 kernels reversible; {} torus states reduce",
                red.n_states
            ),
            t,
        ))
    };
    outcome(7, "sampler exactness", 300.0, start, run())
}

/// Cesàro sums and loop fractions decay with L.
pub fn decay_trend() -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(String, Tally)> {
        let mut t = Tally::new();
        let cfg = ChainConfig { rho: 1.0, n_colors: 1, sweeps: 110_000, burn_in: 10_000, seed: 5, ..Default::default() };
        let rows = decay_scan(&[8, 16, 32], 1, &cfg)?;
        let v = decay_verdict(&rows);
        t.check(v.cesaro_decreasing, || "Cesàro sums not separated by 3 sigma".into());
        t.check(v.loops_decreasing, || "loop fractions not separated by 3 sigma".into());
        t.check(v.below_envelope, || "values above the fitted envelope".into());
        let detail = rows
            .iter()
            .map(|r| format!("L={} {:.4}+-{:.4} (ref {:.4}), loops {:.4}", r.l, r.cesaro, r.err, r.reference, r.loop_fraction))
            .collect::<Vec<_>>()
            .join("; ");
        Ok((detail, t))
    };
    outcome(8, "decay with L", 1800.0, start, run())
}

/// Walk function ordering along an axis at odd distances.
pub fn monotonicity() -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(String, Tally)> {
        let mut t = Tally::new();
        let g = Graph::slab_torus(8, 1)?;
        let mut parts = Vec::new();
        for rho in [1.0, 4.0] {
            let cfg = ChainConfig { rho, n_colors: 1, sweeps: 210_000, burn_in: 10_000, seed: 13, ..Default::default() };
            let r = monotonicity_check(&g, &cfg)?;
            t.check(r.pass(), || format!("rho {rho}: {r:?}"));
            let (a, b) = (r.values[0].1, r.values[1].1);
            parts.push(format!("rho {rho}: G(x1) {:.4}+-{:.4} >= G(x3) {:.4}+-{:.4}", a.value, a.err, b.value, b.err));
        }
        Ok((parts.join("; "), t))
    };
    outcome(9, "two-point monotonicity", 600.0, start, run())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Configurations and edge-following permutations are in weight-preserving bijection.
pub fn permutation_bijection() -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<(String, Tally)> {
        let mut t = Tally::new();
        let mut counts = Vec::new();
        for g in [Graph::cycle(4)?, Graph::k2()] {
            let states = mdd_states(&g)?;
            for cfg in &states {
                let p = to_permutation(&g, cfg)?;
                t.check(&from_permutation(&g, &p)? == cfg, || format!("{}: {cfg:?} does not round-trip", g.name()));
                for (rho, n) in [(0.5, 1), (2.0, 3), (3.0, 2)] {
                    let a = mdd_weight(&g, cfg, rho, n)?;
                    let b = p.weight(rho, n);
                    t.check(a == b, || format!("{}: weight {a} vs {b}", g.name()));
                }
            }
            let mut valid = 0;
            for image in permutations(g.n_vertices()) {
                let p = Permutation { image };
                if let Ok(cfg) = from_permutation(&g, &p) {
                    valid += 1;
                    t.check(to_permutation(&g, &cfg)? == p, || format!("{}: {p:?} does not round-trip", g.name()));
                }
            }
            t.check(valid == states.len(), || format!("{}: {valid} permutations vs {} configurations", g.name(), states.len()));
            counts.push(format!("{} {}", g.name(), states.len()));
        }
        Ok((format!("bijection on {}", counts.join(", ")), t))
    };
    outcome(10, "permutation bijection", 10.0, start, run())
}

/// Every criterion in order, or the selected ones.
pub fn run_selected(ids: &[u32]) -> Vec<CheckOutcome> {
    let all: [(u32, fn() -> CheckOutcome); 10] = [
        (1, oracle_agreement),
        (2, spin_path_bridge),
        (3, special_cases),
        (4, twopoint_bound_check),
        (5, rotation_ingredients),
        (6, fourier_properties),
        (7, sampler_exactness),
        (8, decay_trend),
        (9, monotonicity),
        (10, permutation_bijection),
    ];
    all.iter().filter(|(id, _)| ids.is_empty() || ids.contains(id)).map(|(_, f)| f()).collect()
}
