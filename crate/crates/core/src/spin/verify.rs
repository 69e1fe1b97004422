//! Checks of the spin-path correspondence: quadrature on one side, exact path
//! sums on the other, reported as machine-readable records.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::exact::{connection_probability, LocalConstraint, PathSum, Sector};
use crate::lattice::Graph;
use crate::model::{Color, ModelParams, WeightFunction};
use crate::spin::observable::{SiteFactor, SpinObservable};
use crate::spin::quadrature::{Quadrature, SpinSystem};

/// Tolerance for identities between expectations.
pub const EXPECTATION_TOL: f64 = 1e-8;
/// Tolerance for quantities that vanish identically.
pub const ZERO_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: String,
    pub graph: String,
    pub params: serde_json::Value,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerificationReport {
    fn equality(identity: String, ctx: &Verifier, lhs: C, rhs: C, tolerance: f64) -> Self {
        let abs_err = (lhs - rhs).norm();
        VerificationReport {
            identity,
            graph: ctx.g.name().into(),
            params: ctx.params_json(),
            lhs: lhs.re,
            rhs: rhs.re,
            abs_err,
            tolerance,
            pass: abs_err <= tolerance,
        }
    }

    /// `lhs <= rhs` up to `tolerance`; `abs_err` is the amount of violation.
    fn inequality(identity: String, ctx: &Verifier, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let abs_err = (lhs - rhs).max(0.0);
        VerificationReport {
            identity,
            graph: ctx.g.name().into(),
            params: ctx.params_json(),
            lhs,
            rhs,
            abs_err,
            tolerance,
            pass: abs_err <= tolerance,
        }
    }
}

/// Pairs a quadrature evaluator with an exact path-sum evaluator at the same couplings.
pub struct Verifier<'a> {
    pub g: &'a Graph,
    pub u: &'a WeightFunction,
    pub params: ModelParams,
    pub sys: SpinSystem<'a>,
    pub paths: PathSum<'a>,
    z_spin: C,
    z_path: f64,
}

impl<'a> Verifier<'a> {
    pub fn new(g: &'a Graph, u: &'a WeightFunction, params: ModelParams, quad: Quadrature) -> Result<Self> {
        let sys = SpinSystem::new(g, u, params, quad)?;
        let paths = PathSum::new(g, u, params)?;
        let z_spin = sys.partition()?;
        let z_path: f64 = paths.zpath()?;
        if z_path <= 0.0 || z_spin.norm() == 0.0 {
            return Err(Error::ZeroPartition(format!("{} with {}", g.name(), u.label())));
        }
        Ok(Verifier { g, u, params, sys, paths, z_spin, z_path })
    }

    fn params_json(&self) -> serde_json::Value {
        json!({
            "beta": self.params.beta,
            "h": self.params.h,
            "r": self.params.r,
            "U": self.u.label(),
            "Q": self.sys.quad.q,
            "certified": self.sys.certified(),
        })
    }

    fn spin(&self, obs: &SpinObservable) -> Result<C> {
        Ok(self.sys.integrate(obs, false)? / self.z_spin)
    }

    fn path(&self, s: &Sector) -> Result<f64> {
        Ok(self.paths.eval::<f64>(s)? / self.z_path)
    }

    /// `Z^spin = Z^path`, relative error.
    pub fn partition(&self) -> VerificationReport {
        let mut r = VerificationReport::equality(
            "partition: Z_spin = Z_path (relative)".into(),
            self,
            self.z_spin / self.z_path,
            C::new(1.0, 0.0),
            EXPECTATION_TOL,
        );
        r.lhs = self.z_spin.re;
        r.rhs = self.z_path;
        r
    }

    /// Spin monomial expectations against constrained path sums.
    pub fn conversion(&self, monomials: &[(Vec<i64>, Vec<i64>)]) -> Result<Vec<VerificationReport>> {
        monomials
            .iter()
            .map(|(u1, u2)| {
                let lhs = self.spin(&SpinObservable::spin_monomial(u1, u2))?;
                let rhs = self.path(&Sector::for_monomial(u1, u2))?;
                let tol = if rhs == 0.0 { ZERO_TOL } else { EXPECTATION_TOL };
                Ok(VerificationReport::equality(format!("conversion u1={u1:?} u2={u2:?}"), self, lhs, C::new(rhs, 0.0), tol))
            })
            .collect()
    }

    /// Local-time indicators: `<prod_{z in A} psi_z> = P(n_z = 0 on A)` and
    /// `<psi_{p,o}> = P(k_o = p)`.
    pub fn local_time(&self) -> Result<Vec<VerificationReport>> {
        let n = self.g.n_vertices();
        let o = self.g.origin();
        let mut sets: Vec<Vec<usize>> = vec![vec![o]];
        if let Some(&y) = self.g.neighbours(o).first() {
            sets.push(vec![o, y]);
        }
        sets.push((0..n).collect());
        let mut out = Vec::new();
        for a in sets {
            let obs = SpinObservable::product(a.iter().map(|&z| (z, SiteFactor::Empty)).collect());
            let mut s = Sector::free(n);
            for &z in &a {
                s.constraint[z] = LocalConstraint::Empty;
            }
            let lhs = self.spin(&obs)?;
            let rhs = self.path(&s)?;
            out.push(VerificationReport::equality(format!("local time: n_z = 0 on {a:?}"), self, lhs, C::new(rhs, 0.0), EXPECTATION_TOL));
        }
        for p in 0..=(self.u.support_max() as u32).min(3) {
            let obs = SpinObservable::product(vec![(o, SiteFactor::ReducedLocalTime(p))]);
            let mut s = Sector::free(n);
            s.constraint[o] = LocalConstraint::ReducedLocalTime(p);
            let lhs = self.spin(&obs)?;
            let rhs = self.path(&s)?;
            out.push(VerificationReport::equality(format!("local time: k_o = {p}"), self, lhs, C::new(rhs, 0.0), EXPECTATION_TOL));
        }
        let obs = SpinObservable::product((0..n).map(|z| (z, SiteFactor::ReducedLocalTime(1))).collect());
        let mut s = Sector::free(n);
        s.constraint = vec![LocalConstraint::ReducedLocalTime(1); n];
        let lhs = self.spin(&obs)?;
        let rhs = self.path(&s)?;
        out.push(VerificationReport::equality("local time: k_z = 1 on V".into(), self, lhs, C::new(rhs, 0.0), EXPECTATION_TOL));
        Ok(out)
    }

    /// Moments that vanish at zero field.
    pub fn zero_averages(&self) -> Result<Vec<VerificationReport>> {
        if self.params.h != 0.0 {
            return Ok(Vec::new());
        }
        let n = self.g.n_vertices();
        let mut out = Vec::new();
        let mut push = |name: String, u1: Vec<i64>, u2: Vec<i64>| -> Result<()> {
            let lhs = self.spin(&SpinObservable::spin_monomial(&u1, &u2))?;
            out.push(VerificationReport::equality(name, self, lhs, C::new(0.0, 0.0), ZERO_TOL));
            Ok(())
        };
        for x in 0..n {
            for colour in 0..2 {
                for pw in [1i64, 2] {
                    for sign in [1i64, -1] {
                        let mut u = [vec![0; n], vec![0; n]];
                        u[colour][x] = sign * pw;
                        let [u1, u2] = u;
                        push(format!("zero average: (S{}_{x})^{}", colour + 1, sign * pw), u1, u2)?;
                    }
                }
            }
        }
        for x in 0..n {
            for y in x + 1..n {
                let same = self.g.parity(x) == self.g.parity(y);
                for colour in 0..2 {
                    for pw in [1i64, 2] {
                        for sign in [1i64, -1] {
                            let mut u = [vec![0; n], vec![0; n]];
                            // Opposite parity: conj(S_x) S_y; equal parity: S_x S_y.
                            u[colour][x] = if same { sign * pw } else { -sign * pw };
                            u[colour][y] = sign * pw;
                            let [u1, u2] = u;
                            push(format!("zero average: pair ({x},{y}) colour {} power {}", colour + 1, sign * pw), u1, u2)?;
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// `m = <cos(r s1_o)>`.
    pub fn magnetisation(&self) -> Result<f64> {
        let o = self.g.origin();
        Ok(self.spin(&SpinObservable::product(vec![(o, SiteFactor::Cos1(self.params.r))]))?.re)
    }

    /// `<cos(r s1_o) cos(r s1_x)> >= 0` at zero field, and every such
    /// expectation real.
    pub fn positive_expectations(&self) -> Result<Vec<VerificationReport>> {
        if self.params.h != 0.0 {
            return Ok(Vec::new());
        }
        let o = self.g.origin();
        let r = self.params.r;
        let mut out = Vec::new();
        for x in 0..self.g.n_vertices() {
            let v = self.spin(&SpinObservable::product(vec![(o, SiteFactor::Cos1(r)), (x, SiteFactor::Cos1(r))]))?;
            out.push(VerificationReport::inequality(format!("<cos cos>(o,{x}) >= 0"), self, -v.re, 0.0, 1e-9));
            out.push(VerificationReport::inequality(
                format!("<cos cos>(o,{x}) is real"),
                self,
                v.im.abs(),
                0.0,
                1e-9 * (1.0 + v.norm()),
            ));
        }
        Ok(out)
    }

    /// Integration by parts: `<A_o B_y> = r m delta_{oy}` and the explicit
    /// form of `<B_o B_y>`.
    pub fn rotation_identities(&self) -> Result<Vec<VerificationReport>> {
        let g = self.g;
        let o = g.origin();
        let p = self.params;
        let r = p.r as f64;
        let m = self.magnetisation()?;
        let b_o = SpinObservable::rotation_generator(g, &p, o);
        let mut out = Vec::new();
        for y in 0..g.n_vertices() {
            let b_y = SpinObservable::rotation_generator(g, &p, y);
            let lhs = self.spin(&SpinObservable::field_sine(o, p.r).mul(&b_y))?;
            let rhs = if y == o { r * m } else { 0.0 };
            out.push(VerificationReport::equality(format!("<A_o B_{y}> = r m delta"), self, lhs, C::new(rhs, 0.0), EXPECTATION_TOL));

            let lhs = self.spin(&b_o.mul(&b_y))?;
            let rhs = if y == o {
                let mut s = C::new(2.0 * p.beta * p.h * r * r * m, 0.0);
                for z in g.neighbours(o) {
                    s += self.spin(&SpinObservable::bond_energy(g, o, z))? * p.beta;
                }
                s
            } else if !g.edges_between(o, y).is_empty() {
                -self.spin(&SpinObservable::bond_energy(g, o, y))? * p.beta
            } else {
                C::new(0.0, 0.0)
            };
            out.push(VerificationReport::equality(format!("<B_o B_{y}> neighbour formula"), self, lhs, rhs, EXPECTATION_TOL));
        }
        Ok(out)
    }

    /// `sum_{y ~ o} cos(k) <B_o B_y> + <B_o B_o> >= 0` for `k` in `{0, pi/2, pi, 3pi/2}`,
    /// the one-axis Fourier surrogate available on a two-site graph.
    pub fn rotation_positivity(&self) -> Result<Vec<VerificationReport>> {
        let g = self.g;
        let o = g.origin();
        let b_o = SpinObservable::rotation_generator(g, &self.params, o);
        let diag = self.spin(&b_o.mul(&b_o))?.re;
        let mut off = 0.0;
        for y in g.neighbours(o) {
            off += self.spin(&b_o.mul(&SpinObservable::rotation_generator(g, &self.params, y)))?.re;
        }
        Ok((0..4)
            .map(|j| {
                let k = j as f64 * PI / 2.0;
                let val = k.cos() * off + diag;
                VerificationReport::inequality(format!("<B o B>(k = {j} pi/2) >= 0"), self, -val, 0.0, 1e-9)
            })
            .collect())
    }

    /// `<S^i_o S^i_z> = (1/beta) E[m^i_{oz}]` on every simple edge at the origin.
    pub fn neighbour_identity(&self) -> Result<Vec<VerificationReport>> {
        let g = self.g;
        let n = g.n_vertices();
        let o = g.origin();
        let mut out = Vec::new();
        for &e in g.incident(o) {
            if g.edges_between(o, g.other_end(e, o)).len() > 1 {
                continue;
            }
            let z = g.other_end(e, o);
            for colour in [Color::Blue, Color::Red] {
                let mut u = [vec![0i64; n], vec![0i64; n]];
                u[colour.idx()][o] = 1;
                u[colour.idx()][z] = 1;
                let lhs = self.spin(&SpinObservable::spin_monomial(&u[0], &u[1]))?;
                let mut s = Sector::free(n);
                s.multiplicity_moment = Some((e, colour, 1));
                let rhs = self.path(&s)? / self.params.beta;
                out.push(VerificationReport::equality(
                    format!("neighbour identity edge {e} {colour:?}"),
                    self,
                    lhs,
                    C::new(rhs, 0.0),
                    EXPECTATION_TOL,
                ));
            }
        }
        Ok(out)
    }

    /// Default conversion monomials: all single-site exponents in
    /// `{-1,0,1}^2`, edge products of either colour, mixed colour edge
    /// products and `(S1_o)^{+-r}`. On two-site graphs every exponent vector
    /// in `{-1,0,1}^4` is used.
    pub fn default_monomials(&self) -> Vec<(Vec<i64>, Vec<i64>)> {
        let g = self.g;
        let n = g.n_vertices();
        let mut out = Vec::new();
        if n == 2 {
            for code in 0..81 {
                let d = [code % 3, (code / 3) % 3, (code / 9) % 3, code / 27].map(|v| v as i64 - 1);
                out.push((vec![d[0], d[1]], vec![d[2], d[3]]));
            }
            return out;
        }
        for x in 0..n {
            for a in -1..=1 {
                for b in -1..=1 {
                    if (a, b) != (0, 0) {
                        let (mut u1, mut u2) = (vec![0; n], vec![0; n]);
                        u1[x] = a;
                        u2[x] = b;
                        out.push((u1, u2));
                    }
                }
            }
        }
        for e in 0..g.n_edges() {
            let [x, y] = g.edge(e);
            for (a, b) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                for kind in 0..3 {
                    let (mut u1, mut u2) = (vec![0; n], vec![0; n]);
                    match kind {
                        0 => (u1[x], u1[y]) = (a, b),
                        1 => (u2[x], u2[y]) = (a, b),
                        _ => (u1[x], u2[y]) = (a, b),
                    }
                    out.push((u1, u2));
                }
            }
        }
        let o = g.origin();
        for s in [1i64, -1] {
            let mut u1 = vec![0; n];
            u1[o] = s * self.params.r as i64;
            out.push((u1, vec![0; n]));
        }
        out
    }

    /// Every check available at these couplings.
    pub fn run_all(&self) -> Result<Vec<VerificationReport>> {
        let mut out = vec![self.partition()];
        out.extend(self.conversion(&self.default_monomials())?);
        out.extend(self.local_time()?);
        out.extend(self.zero_averages()?);
        out.extend(self.positive_expectations()?);
        out.extend(self.rotation_identities()?);
        if self.g.is_simple() {
            out.extend(self.neighbour_identity()?);
        }
        Ok(out)
    }
}

/// `m = <cos(r s1_o)>`.
pub fn magnetisation(g: &Graph, u: &WeightFunction, params: &ModelParams, quad: Quadrature) -> Result<f64> {
    let sys = SpinSystem::new(g, u, *params, quad)?;
    let obs = SpinObservable::product(vec![(g.origin(), SiteFactor::Cos1(params.r))]);
    Ok(sys.expect(&obs)?.re)
}

/// Relative change of `Z^spin` when the grid is refined from `q` to `2q`.
pub fn quadrature_convergence(
    g: &Graph,
    u: &WeightFunction,
    params: &ModelParams,
    q: usize,
) -> Result<VerificationReport> {
    let coarse = SpinSystem::new(g, u, *params, Quadrature::new(q))?;
    let fine = SpinSystem::new(g, u, *params, Quadrature::new(2 * q))?;
    let (a, b) = (coarse.partition()?, fine.partition()?);
    let abs_err = ((a - b) / b).norm();
    Ok(VerificationReport {
        identity: format!("Z_spin stable under Q {q} -> {}", 2 * q),
        graph: g.name().into(),
        params: json!({"beta": params.beta, "h": params.h, "r": params.r, "U": u.label(), "Q": q}),
        lhs: a.re,
        rhs: b.re,
        abs_err,
        tolerance: 1e-9,
        pass: abs_err <= 1e-9,
    })
}

/// The bridge parameter grid: `beta in {0.25, 0.5}`, `h in {0, 0.1}`,
/// `r in {1, 2}` and the three weight presets.
pub fn bridge_grid() -> Vec<(ModelParams, WeightFunction)> {
    let mut out = Vec::new();
    for u in [WeightFunction::mdd(), WeightFunction::dimer(), WeightFunction::truncated_xy(6)] {
        for beta in [0.25, 0.5] {
            for h in [0.0, 0.1] {
                for r in [1, 2] {
                    out.push((ModelParams { beta, h, r, ..Default::default() }, u.clone()));
                }
            }
        }
    }
    out
}

/// Two-point bounds at zero field:
/// `G1(o,y) <= 4 <cos s1_o cos s1_y>` and, at odd distance for fast-decaying
/// weights, `P(o <-> y) <= K_U <cos 2s1_o cos 2s1_y>`.
pub fn twopoint_bounds(
    g: &Graph,
    u: &WeightFunction,
    params: &ModelParams,
    quad: Quadrature,
) -> Result<Vec<VerificationReport>> {
    let p = params.with_h(0.0);
    let v = Verifier::new(g, u, p, quad)?;
    let o = g.origin();
    let mut out = Vec::new();
    for y in 0..g.n_vertices() {
        if y == o {
            continue;
        }
        let opposite = g.parity(o) != g.parity(y);
        if opposite || u.normalized_monotone() {
            let g1 = v.path(&Sector::walk(g, o, y))?;
            let cc = v.spin(&SpinObservable::product(vec![(o, SiteFactor::Cos1(1)), (y, SiteFactor::Cos1(1))]))?.re;
            out.push(VerificationReport::inequality(format!("G1(o,{y}) <= 4 <cos cos>"), &v, g1, 4.0 * cc, EXPECTATION_TOL));
        }
        if let (true, Some(k_u)) = (opposite, u.decay_constant()) {
            let g2 = connection_probability(g, u, &p, o, y)?;
            let cc = v.spin(&SpinObservable::product(vec![(o, SiteFactor::Cos1(2)), (y, SiteFactor::Cos1(2))]))?.re;
            out.push(VerificationReport::inequality(format!("G2(o,{y}) <= K_U <cos2 cos2>"), &v, g2, k_u * cc, EXPECTATION_TOL));
        }
    }
    Ok(out)
}

/// `m(h~/|V|) >= (beta h~ / |V|) sum_x <cos(r s1_o) cos(r s1_x)>_{h=0}`.
pub fn magnetisation_expansion(
    g: &Graph,
    u: &WeightFunction,
    params: &ModelParams,
    htilde: f64,
    quad: Quadrature,
) -> Result<VerificationReport> {
    let n = g.n_vertices() as f64;
    let o = g.origin();
    let r = params.r;
    let at = Verifier::new(g, u, params.with_h(htilde / n), quad)?;
    let m = at.magnetisation()?;
    let zero = Verifier::new(g, u, params.with_h(0.0), quad)?;
    let mut sum = 0.0;
    for x in 0..g.n_vertices() {
        sum += zero.spin(&SpinObservable::product(vec![(o, SiteFactor::Cos1(r)), (x, SiteFactor::Cos1(r))]))?.re;
    }
    let bound = params.beta * htilde / n * sum;
    let mut rep = VerificationReport::inequality(format!("magnetisation expansion h~={htilde}"), &at, -m, -bound, EXPECTATION_TOL);
    if htilde > 0.0 {
        rep.params["slope"] = json!(m / htilde);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_pass(reports: &[VerificationReport]) {
        for r in reports {
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn k2_full_suite() {
        let g = Graph::k2();
        for u in [WeightFunction::mdd(), WeightFunction::truncated_xy(6), WeightFunction::dimer()] {
            for h in [0.0, 0.1] {
                let p = ModelParams { beta: 0.5, h, r: 1, ..Default::default() };
                let v = Verifier::new(&g, &u, p, Quadrature::new(64)).unwrap();
                all_pass(&v.run_all().unwrap());
            }
        }
    }

    #[test]
    fn c4_bridge_points() {
        let g = Graph::cycle(4).unwrap();
        let cases = [
            (WeightFunction::truncated_xy(6), ModelParams { beta: 0.5, h: 0.1, r: 2, ..Default::default() }),
            (WeightFunction::mdd(), ModelParams { beta: 0.25, h: 0.0, r: 1, ..Default::default() }),
        ];
        for (u, p) in cases {
            let v = Verifier::new(&g, &u, p, Quadrature::default_for(4)).unwrap();
            all_pass(&v.run_all().unwrap());
        }
    }

    #[test]
    fn c4_same_parity_conversion() {
        let g = Graph::cycle(4).unwrap();
        let u = WeightFunction::mdd();
        let p = ModelParams { beta: 0.5, ..Default::default() };
        let v = Verifier::new(&g, &u, p, Quadrature::default_for(4)).unwrap();
        let reps = v.conversion(&[(vec![1, 0, -1, 0], vec![0; 4])]).unwrap();
        assert!(reps[0].pass && reps[0].rhs.abs() > 1e-3, "{reps:?}");
    }

    #[test]
    fn k2_local_time_values() {
        let g = Graph::k2();
        let u = WeightFunction::mdd();
        let p = ModelParams { beta: 0.5, ..Default::default() };
        let v = Verifier::new(&g, &u, p, Quadrature::new(64)).unwrap();
        let reps = v.local_time().unwrap();
        assert!((reps[0].rhs - 0.8).abs() < 1e-12);
        assert!((reps.last().unwrap().rhs - 0.2).abs() < 1e-12);
        all_pass(&reps);
    }

    #[test]
    fn magnetisation_is_monotone_in_field() {
        let g = Graph::k2();
        let u = WeightFunction::mdd();
        let q = Quadrature::new(64);
        let m = |h| magnetisation(&g, &u, &ModelParams { beta: 0.5, h, ..Default::default() }, q).unwrap();
        let (m0, m1, m2) = (m(0.0), m(0.1), m(0.2));
        assert!(m0.abs() < 1e-12 && m2 >= m1 && m1 >= 0.0);
    }

    #[test]
    fn magnetisation_expansion_holds() {
        let q4 = Quadrature::default_for(4);
        let r = magnetisation_expansion(&Graph::k2(), &WeightFunction::mdd(), &ModelParams { beta: 0.5, ..Default::default() }, 0.02, Quadrature::new(64)).unwrap();
        assert!(r.pass && r.lhs < r.rhs, "{r:?}");
        let r = magnetisation_expansion(&Graph::cycle(4).unwrap(), &WeightFunction::mdd(), &ModelParams { beta: 0.25, r: 2, ..Default::default() }, 0.02, q4).unwrap();
        assert!(r.pass, "{r:?}");
        let r = magnetisation_expansion(&Graph::k2(), &WeightFunction::mdd(), &ModelParams::default(), 0.0, Quadrature::new(64)).unwrap();
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12);
    }

    #[test]
    fn single_walk_bound_holds_for_mdd() {
        for g in [Graph::k2(), Graph::cycle(4).unwrap()] {
            for beta in [0.25, 0.5] {
                let p = ModelParams { beta, ..Default::default() };
                let reps = twopoint_bounds(&g, &WeightFunction::mdd(), &p, Quadrature::default_for(g.n_vertices())).unwrap();
                all_pass(&reps.into_iter().filter(|r| r.identity.starts_with("G1")).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn loop_bound_counterexample_on_k2() {
        // P(o <-> y) = beta^2/(1+beta^2) while <cos 2s cos 2s> = (beta^2/2 + beta^4/6)/(4(1+beta^2)).
        let p = ModelParams { beta: 0.25, ..Default::default() };
        let reps = twopoint_bounds(&Graph::k2(), &WeightFunction::mdd(), &p, Quadrature::new(64)).unwrap();
        let r = reps.iter().find(|r| r.identity.starts_with("G2")).unwrap();
        let b2 = 0.0625;
        assert!((r.lhs - b2 / (1.0 + b2)).abs() < 1e-12);
        assert!((r.rhs - (b2 / 2.0 + b2 * b2 / 6.0) / (4.0 * (1.0 + b2))).abs() < 1e-10);
        assert!(!r.pass);
    }

    #[test]
    fn refining_the_grid_is_stable() {
        let p = ModelParams { beta: 0.5, h: 0.1, ..Default::default() };
        all_pass(&[quadrature_convergence(&Graph::k2(), &WeightFunction::truncated_xy(6), &p, 32).unwrap()]);
    }

    #[test]
    fn k2_neighbour_value() {
        let g = Graph::k2();
        let u = WeightFunction::mdd();
        let p = ModelParams { beta: 0.5, ..Default::default() };
        let v = Verifier::new(&g, &u, p, Quadrature::new(64)).unwrap();
        let r = &v.neighbour_identity().unwrap()[0];
        assert!((r.lhs - 0.4).abs() < 1e-12 && r.pass);
    }

    #[test]
    fn k2_rotation_positivity() {
        let g = Graph::k2();
        let u = WeightFunction::mdd();
        for h in [0.0, 0.02] {
            let p = ModelParams { beta: 0.5, h, r: 1, ..Default::default() };
            let v = Verifier::new(&g, &u, p, Quadrature::new(64)).unwrap();
            all_pass(&v.rotation_positivity().unwrap());
        }
    }
}
