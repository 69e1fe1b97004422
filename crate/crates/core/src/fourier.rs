//! Axis Fourier sums of symmetric convex sequences, the torus inner product
//! and Cesàro sums of two-point tables.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exact::TwoPointTable;
use crate::lattice::{FourierMode, Graph};

/// Odd offsets in the window `(-m/2, m/2]`, in increasing order.
pub fn odd_window(m: usize) -> Vec<i64> {
    let m = m as i64;
    (-m..=m).filter(|&y| y.rem_euclid(2) == 1 && -m < 2 * y && 2 * y <= m).collect()
}

/// Values of a torus function along one axis at odd offsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisSequence {
    /// Axis index in `0..3`.
    pub axis: usize,
    /// Side length of the torus along the axis.
    pub period: usize,
    /// Values at the offsets of [`odd_window`], in the same order.
    pub values: Vec<f64>,
}

impl AxisSequence {
    pub fn new(axis: usize, period: usize, values: Vec<f64>) -> Result<AxisSequence> {
        if axis > 2 {
            return invalid("axis must be 0, 1 or 2");
        }
        if period == 0 || period % 2 == 1 && period != 1 {
            return invalid("period must be even or 1");
        }
        let w = odd_window(period);
        if values.len() != w.len() {
            return invalid(format!("expected {} values, got {}", w.len(), values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("values must be finite");
        }
        Ok(AxisSequence { axis, period, values })
    }

    /// Samples `f(y)` at every odd offset of the window.
    pub fn from_fn(axis: usize, period: usize, f: impl Fn(i64) -> f64) -> Result<AxisSequence> {
        Self::new(axis, period, odd_window(period).into_iter().map(f).collect())
    }

    /// Restriction of a per-vertex function on a torus to the odd offsets along `axis` through the origin.
    pub fn from_torus(g: &Graph, axis: usize, values: &[f64]) -> Result<AxisSequence> {
        let dims = g.torus().ok_or_else(|| Error::InvalidArgument("graph is not a torus".into()))?;
        let coords = g.coords().expect("torus has coordinates");
        let o = coords[g.origin()];
        let period = dims.sizes()[axis];
        Self::from_fn(axis, period, |y| {
            let mut c = o;
            c[axis] += y;
            values[g.vertex_at(c).expect("torus vertex")]
        })
    }

    pub fn offsets(&self) -> Vec<i64> {
        odd_window(self.period)
    }

    /// Value at an odd offset, reduced periodically into the window.
    pub fn at(&self, y: i64) -> f64 {
        let m = self.period as i64;
        let mut r = y.rem_euclid(m);
        if 2 * r > m {
            r -= m;
        }
        let i = odd_window(self.period).iter().position(|&w| w == r).expect("odd offset");
        self.values[i]
    }

    /// `sum_y G(y) cos(k y)` over the window.
    pub fn fourier_sum(&self, k: f64) -> f64 {
        self.offsets().iter().zip(&self.values).map(|(&y, &v)| v * (k * y as f64).cos()).sum()
    }

    /// `2G(y) - G(y-2) - G(y+2)` with periodic neighbours.
    pub fn second_difference(&self, y: i64) -> f64 {
        2.0 * self.at(y) - self.at(y - 2) - self.at(y + 2)
    }
}

/// Convexity and monotonicity hypotheses of the lower bound, tested on the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvexityReport {
    /// `G(y) = G(-y)` wherever both offsets lie in the window.
    pub symmetric: bool,
    /// Convexity away from `{±1, ±3}` with periodic neighbours.
    pub convex_periodic: bool,
    /// Convexity away from `{±1, ±3}` at offsets whose neighbours stay inside the window.
    pub convex_interior: bool,
    /// `G(1) >= G(3)`.
    pub first_step_monotone: bool,
    /// No offset is subject to the convexity condition.
    pub vacuous: bool,
}

impl ConvexityReport {
    /// Hypotheses under which the Fourier lower bound is asserted.
    pub fn admissible(&self) -> bool {
        self.symmetric && self.convex_periodic && self.first_step_monotone
    }
}

/// Absolute slack allowed when comparing sequence values.
const HYPOTHESIS_TOL: f64 = 1e-12;

pub fn convexity_check(seq: &AxisSequence) -> ConvexityReport {
    let w = seq.offsets();
    let m = seq.period as i64;
    let tol = HYPOTHESIS_TOL * (1.0 + seq.values.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    let symmetric = w.iter().filter(|y| w.contains(&-**y)).all(|&y| (seq.at(y) - seq.at(-y)).abs() <= tol);
    let tested: Vec<i64> = w.iter().copied().filter(|y| ![1, 3].contains(&y.abs())).collect();
    let convex_periodic = tested.iter().all(|&y| seq.second_difference(y) <= tol);
    let convex_interior = tested
        .iter()
        .filter(|&&y| -m < 2 * (y - 2) && 2 * (y + 2) <= m)
        .all(|&y| seq.second_difference(y) <= tol);
    ConvexityReport {
        symmetric,
        convex_periodic,
        convex_interior,
        first_step_monotone: seq.at(1) >= seq.at(3) - tol,
        vacuous: tested.is_empty(),
    }
}

/// Outcome of the Fourier lower bound at one momentum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FourierBound {
    Evaluated { lhs: f64, rhs: f64, pass: bool },
    Inapplicable(String),
}

/// Tolerance of the lower-bound comparison.
pub const BOUND_TOL: f64 = 1e-10;

/// `sum_y G(y) cos(k y) >= -(G(3) - G(5)) (1 - cos 3k) / (2 sin^2 k)` at the
/// component of `mode` along the sequence axis.
pub fn fourier_lower_bound(seq: &AxisSequence, mode: &FourierMode) -> FourierBound {
    if mode.dims.sizes()[seq.axis] != seq.period {
        return FourierBound::Inapplicable("mode does not match the sequence period".into());
    }
    fourier_lower_bound_at(seq, mode.k()[seq.axis])
}

/// As [`fourier_lower_bound`] for a raw momentum component `k`.
pub fn fourier_lower_bound_at(seq: &AxisSequence, k: f64) -> FourierBound {
    let s = k.sin();
    if s.abs() < 1e-12 {
        return FourierBound::Inapplicable("k is 0 or pi".into());
    }
    if k.cos() < -1e-12 {
        return FourierBound::Inapplicable("k outside the positive cone".into());
    }
    if !convexity_check(seq).admissible() {
        return FourierBound::Inapplicable("hypotheses fail".into());
    }
    let lhs = seq.fourier_sum(k);
    let rhs = -(seq.at(3) - seq.at(5)) * (1.0 - (3.0 * k).cos()) / (2.0 * s * s);
    FourierBound::Evaluated { lhs, rhs, pass: lhs >= rhs - BOUND_TOL }
}

/// Both sides of the summation-by-parts identity
/// `sum_y G(y) cos(k y) = (1 / (4 sin^2 k)) sum_y (2G(y) - G(y-2) - G(y+2)) cos(k y)`,
/// valid for `k = 2 pi n / period` with `sin k != 0`.
pub fn summation_by_parts(seq: &AxisSequence, k: f64) -> Result<(f64, f64)> {
    let s = k.sin();
    if s.abs() < 1e-12 {
        return invalid("summation by parts needs sin k != 0");
    }
    let lhs = seq.fourier_sum(k);
    let rhs: f64 = seq.offsets().iter().map(|&y| seq.second_difference(y) * (k * y as f64).cos()).sum::<f64>() / (4.0 * s * s);
    Ok((lhs, rhs))
}

/// Odd offsets along the three axes through the origin, as vertices.
pub fn axis_sets(g: &Graph) -> Result<[Vec<usize>; 3]> {
    let dims = g.torus().ok_or_else(|| Error::InvalidArgument("graph is not a torus".into()))?;
    let o = g.coords().expect("torus has coordinates")[g.origin()];
    let sizes = dims.sizes();
    Ok([0, 1, 2].map(|a| {
        odd_window(sizes[a])
            .into_iter()
            .map(|y| {
                let mut c = o;
                c[a] += y;
                g.vertex_at(c).expect("torus vertex")
            })
            .collect()
    }))
}

/// `a o b = sum_{x on the odd axes} cos(k . x) a_o b_x + a_o b_o`.
pub fn inner_product(g: &Graph, a: &[f64], b: &[f64], mode: &FourierMode) -> Result<f64> {
    let n = g.n_vertices();
    if a.len() != n || b.len() != n {
        return invalid("vectors must have one entry per vertex");
    }
    let o = g.origin();
    let coords = g.coords().ok_or_else(|| Error::InvalidArgument("graph is not a torus".into()))?;
    let k = mode.k();
    let mut total = a[o] * b[o];
    for set in axis_sets(g)? {
        for x in set {
            let d = [0, 1, 2].map(|i| (coords[x][i] - coords[o][i]) as f64);
            total += (k[0] * d[0] + k[1] * d[1] + k[2] * d[2]).cos() * a[o] * b[x];
        }
    }
    Ok(total)
}

/// Volume average of a two-point table from the origin, with errors added in quadrature.
pub fn cesaro_sum(g: &Graph, table: &TwoPointTable) -> Result<(f64, f64)> {
    let n = g.n_vertices();
    let o = g.origin();
    let mut vals = vec![None; n];
    for e in table.entries.iter().filter(|e| e.x == o) {
        if e.y < n {
            vals[e.y] = Some((e.value, e.err));
        }
    }
    let mut sum = 0.0;
    let mut var = 0.0;
    for (y, v) in vals.into_iter().enumerate() {
        let (v, e) = v.ok_or_else(|| Error::IncompleteTable(format!("no entry for displacement {y}")))?;
        sum += v;
        var += e * e;
    }
    Ok((sum / n as f64, var.sqrt() / n as f64))
}

/// `c sqrt(K / log L)` for each `L`.
pub fn mw_reference_curve(ls: &[f64], k: usize, c: f64) -> Result<Vec<f64>> {
    ls.iter()
        .map(|&l| {
            if l <= 1.0 {
                return invalid("reference curve needs L > 1");
            }
            Ok(c * (k as f64 / l.ln()).sqrt())
        })
        .collect()
}

/// Random sequence satisfying the lower-bound hypotheses on a torus side `period`
/// (a multiple of 4): symmetric, `G(1) >= G(3)`, and nonincreasing
/// nonnegative decrements from `|y| = 3` outwards.
pub fn random_admissible<R: Rng + ?Sized>(rng: &mut R, axis: usize, period: usize) -> Result<AxisSequence> {
    if period < 8 || period % 4 != 0 {
        return invalid("period must be a multiple of 4 and at least 8");
    }
    let levels = period / 4;
    let mut decrements: Vec<f64> = (1..levels - 1).map(|_| rng.random::<f64>()).collect();
    decrements.sort_by(|a, b| b.total_cmp(a));
    let scale = 10f64.powf(rng.random_range(-2.0..1.0));
    let mut g = vec![0.0; levels];
    g[levels - 1] = rng.random_range(-1.0..1.0);
    for j in (1..levels - 1).rev() {
        g[j] = g[j + 1] + scale * decrements[j - 1];
    }
    g[0] = g[1] + scale * rng.random_range(0.0..3.0);
    AxisSequence::from_fn(axis, period, |y| g[((y.abs() - 1) / 2) as usize])
}

/// Momenta `2 pi n / period` with `n` in the window.
pub fn axis_momenta(period: usize) -> Vec<f64> {
    let m = period as i64;
    (-m..=m).filter(|&n| -m < 2 * n && 2 * n <= m).map(|n| 2.0 * PI * n as f64 / m as f64).collect()
}

/// Summary of a randomized sweep over admissible sequences and momenta.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub cases: usize,
    pub passed: usize,
    pub violations: usize,
    /// Cases where the bound did not apply (should be zero for admissible input).
    pub inapplicable: usize,
    /// Largest relative discrepancy of the summation-by-parts identity.
    pub max_sbp_error: f64,
}

/// Draws `cases` pairs of an admissible sequence on a period from `periods`
/// and a momentum with `sin k != 0`, `cos k >= 0`, then evaluates the lower
/// bound and the summation-by-parts identity.
pub fn property_sweep(periods: &[usize], cases: usize, seed: u64) -> Result<SweepReport> {
    if periods.is_empty() {
        return invalid("no periods given");
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SweepReport { cases, passed: 0, violations: 0, inapplicable: 0, max_sbp_error: 0.0 };
    for _ in 0..cases {
        let period = periods[rng.random_range(0..periods.len())];
        let seq = random_admissible(&mut rng, 0, period)?;
        let ks: Vec<f64> = axis_momenta(period).into_iter().filter(|k| k.sin().abs() > 1e-12 && k.cos() >= -1e-12).collect();
        let k = ks[rng.random_range(0..ks.len())];
        match fourier_lower_bound_at(&seq, k) {
            FourierBound::Evaluated { pass: true, .. } => rep.passed += 1,
            FourierBound::Evaluated { pass: false, .. } => rep.violations += 1,
            FourierBound::Inapplicable(_) => rep.inapplicable += 1,
        }
        let (lhs, rhs) = summation_by_parts(&seq, k)?;
        let scale = 1.0 + seq.values.iter().map(|v| v.abs()).sum::<f64>();
        rep.max_sbp_error = rep.max_sbp_error.max((lhs - rhs).abs() / scale);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{dual_modes, TorusDims};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(period: usize, f: impl Fn(i64) -> f64) -> AxisSequence {
        AxisSequence::from_fn(0, period, f).unwrap()
    }

    #[test]
    fn windows() {
        assert_eq!(odd_window(8), vec![-3, -1, 1, 3]);
        assert_eq!(odd_window(6), vec![-1, 1, 3]);
        assert_eq!(odd_window(2), vec![1]);
        assert!(odd_window(1).is_empty());
    }

    #[test]
    fn convexity_examples() {
        let r = convexity_check(&seq(16, |y| 1.0 / y.abs() as f64));
        assert!(r.symmetric && r.convex_periodic && r.convex_interior && r.first_step_monotone);
        let r = convexity_check(&seq(16, |y| y.abs() as f64));
        assert!(r.convex_interior && !r.convex_periodic && !r.first_step_monotone);
        let r = convexity_check(&seq(16, |_| 2.5));
        assert!(r.admissible() && r.convex_interior);
        let r = convexity_check(&seq(4, |_| 1.0));
        assert!(r.vacuous);
    }

    #[test]
    fn constant_sequence_bound() {
        let s = seq(16, |_| 1.0);
        for k in axis_momenta(16) {
            if let FourierBound::Evaluated { lhs, rhs, pass } = fourier_lower_bound_at(&s, k) {
                assert_eq!(rhs, 0.0);
                assert!(lhs >= -1e-12 && pass);
            }
        }
    }

    #[test]
    fn tent_sequence_bound() {
        let s = seq(16, |y| (4 - y.abs()).max(0) as f64);
        let mut evaluated = 0;
        for k in axis_momenta(16) {
            match fourier_lower_bound_at(&s, k) {
                FourierBound::Evaluated { pass, .. } => {
                    assert!(pass);
                    evaluated += 1;
                }
                FourierBound::Inapplicable(_) => assert!(k.sin().abs() < 1e-12 || k.cos() < 0.0),
            }
        }
        assert!(evaluated > 0);
    }

    #[test]
    fn bound_fails_outside_the_cone() {
        let s = seq(16, |y| (4 - y.abs()).max(0) as f64);
        let k = 7.0 * PI / 8.0;
        let lhs = s.fourier_sum(k);
        let rhs = -(s.at(3) - s.at(5)) * (1.0 - (3.0 * k).cos()) / (2.0 * k.sin().powi(2));
        assert!(lhs < rhs - 1.0);
        assert!(matches!(fourier_lower_bound_at(&s, k), FourierBound::Inapplicable(_)));
    }

    #[test]
    fn inner_product_examples() {
        let g = Graph::slab_torus(4, 2).unwrap();
        let n = g.n_vertices();
        let o = g.origin();
        let dims = TorusDims { l: 4, k: 2 };
        let mut e_o = vec![0.0; n];
        e_o[o] = 1.0;
        let x1 = g.vertex_at([1, 0, 0]).unwrap();
        let mut e_1 = vec![0.0; n];
        e_1[x1] = 1.0;
        for m in dual_modes(dims) {
            assert_eq!(inner_product(&g, &e_o, &e_o, &m).unwrap(), 1.0);
            let v = inner_product(&g, &e_o, &e_1, &m).unwrap();
            assert!((v - m.k()[0].cos()).abs() < 1e-12);
        }
        let ones = vec![1.0; n];
        let zero = FourierMode { n: [0, 0, 0], dims };
        let sets = axis_sets(&g).unwrap();
        let count = sets.iter().map(|s| s.len()).sum::<usize>() as f64;
        assert_eq!(inner_product(&g, &ones, &ones, &zero).unwrap(), count + 1.0);
    }

    #[test]
    fn cesaro_examples() {
        let g = Graph::slab_torus(4, 1).unwrap();
        let n = g.n_vertices();
        let o = g.origin();
        let mk = |f: &dyn Fn(usize) -> f64| TwoPointTable {
            kind: "test".into(),
            graph: g.name().into(),
            entries: (0..n).map(|y| crate::exact::TwoPointEntry { x: o, y, value: f(y), err: 0.1 }).collect(),
        };
        let (v, e) = cesaro_sum(&g, &mk(&|_| 1.0)).unwrap();
        assert_eq!(v, 1.0);
        assert!((e - 0.1 * (n as f64).sqrt() / n as f64).abs() < 1e-15);
        let (v, _) = cesaro_sum(&g, &mk(&|y| if y == o { 1.0 } else { 0.0 })).unwrap();
        assert_eq!(v, 1.0 / n as f64);
        let mut t = mk(&|_| 1.0);
        t.entries.pop();
        assert!(matches!(cesaro_sum(&g, &t), Err(Error::IncompleteTable(_))));
    }

    #[test]
    fn reference_curve() {
        let c = mw_reference_curve(&[std::f64::consts::E], 1, 1.0).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-15);
        let a = mw_reference_curve(&[10.0, 100.0, 1000.0], 1, 1.0).unwrap();
        assert!(a[0] > a[1] && a[1] > a[2]);
        let b = mw_reference_curve(&[10.0], 4, 1.0).unwrap();
        assert!((b[0] / a[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn generated_sequences_are_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for period in [8, 16, 32] {
            for _ in 0..200 {
                let s = random_admissible(&mut rng, 0, period).unwrap();
                assert!(convexity_check(&s).admissible(), "{s:?}");
            }
        }
    }

    fn arb_sequence() -> impl Strategy<Value = AxisSequence> {
        prop::sample::select(vec![8usize, 16, 32]).prop_flat_map(|p| {
            prop::collection::vec(-5.0f64..5.0, odd_window(p).len()).prop_map(move |v| AxisSequence::new(0, p, v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn summation_by_parts_is_exact(s in arb_sequence()) {
            for k in axis_momenta(s.period) {
                if k.sin().abs() > 1e-12 {
                    let (l, r) = summation_by_parts(&s, k).unwrap();
                    prop_assert!((l - r).abs() <= 1e-12 * (1.0 + s.values.iter().map(|v| v.abs()).sum::<f64>()));
                }
            }
        }

        #[test]
        fn admissible_sequences_obey_the_bound(seed in any::<u64>(), pi in 0usize..3) {
            let period = [8, 16, 32][pi];
            let s = random_admissible(&mut ChaCha8Rng::seed_from_u64(seed), 0, period).unwrap();
            for k in axis_momenta(period) {
                if let FourierBound::Evaluated { lhs, rhs, pass } = fourier_lower_bound_at(&s, k) {
                    prop_assert!(pass, "k={k} lhs={lhs} rhs={rhs}");
                }
            }
        }

        #[test]
        fn symmetrised_random_sequences_obey_the_bound(s in arb_sequence()) {
            let sym = AxisSequence::from_fn(0, s.period, |y| s.at(y.abs())).unwrap();
            for k in axis_momenta(s.period) {
                if let FourierBound::Evaluated { pass, .. } = fourier_lower_bound_at(&sym, k) {
                    prop_assert!(pass);
                }
            }
        }
    }
}
