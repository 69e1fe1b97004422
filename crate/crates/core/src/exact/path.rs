//! Exact sums over multi-occupancy path configurations.
//!
//! Every base edge carries a pair of multiplicities `(b, r)` and every vertex
//! contributes a factor depending only on the totals at that vertex, so the
//! sum is a tensor contraction over edge variables, done by variable
//! elimination. Ghost multiplicities are summed analytically per vertex and
//! matchings contribute `prod n_x!`, cancelling the `1 / n_x!` in the weight.

use crate::error::{Error, Result};
use crate::lattice::Graph;
use crate::model::{multiocc_loops, Color, ModelParams, MultiOccConfiguration, WeightFunction};
use crate::numeric::Scalar;

/// Largest factor table built during elimination.
pub const TABLE_BUDGET: usize = 1 << 25;

/// Restriction on the local time at a vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalConstraint {
    Free,
    /// No dimer of either colour touches the vertex (ghost included).
    Empty,
    /// Reduced local time `n - m_ghost^red` equals the given value.
    ReducedLocalTime(u32),
}

/// Boundary data and insertions defining a constrained path sum.
#[derive(Clone, Debug)]
pub struct Sector {
    /// Source-edge multiplicities `[blue, red]` per vertex.
    pub source: Vec<[u32; 2]>,
    /// Shift added to the argument of `U` at each vertex.
    pub shift: Vec<i64>,
    pub constraint: Vec<LocalConstraint>,
    /// Multiply by `m^p` for this edge and colour; negative powers vanish at `m = 0`.
    pub multiplicity_moment: Option<(usize, Color, i32)>,
}

impl Sector {
    pub fn free(n: usize) -> Sector {
        Sector {
            source: vec![[0, 0]; n],
            shift: vec![0; n],
            constraint: vec![LocalConstraint::Free; n],
            multiplicity_moment: None,
        }
    }

    /// Sector dual to the spin monomial `prod_x (S1_x)^{u1_x} (S2_x)^{u2_x}`,
    /// negative exponents meaning complex conjugates. Balancing frequencies
    /// at each vertex gives blue sources `u1+ + u2-`, red sources `u2+ + u1-`
    /// and `U` evaluated at `k - u1- - u2-`.
    pub fn for_monomial(u1: &[i64], u2: &[i64]) -> Sector {
        let n = u1.len();
        let mut s = Sector::free(n);
        for x in 0..n {
            let (p1, m1) = (u1[x].max(0), (-u1[x]).max(0));
            let (p2, m2) = (u2[x].max(0), (-u2[x]).max(0));
            s.source[x] = [(p1 + m2) as u32, (p2 + m1) as u32];
            s.shift[x] = -(m1 + m2);
        }
        s
    }

    /// Sector of a single walk from `x` to `y` without field: blue sources at
    /// both ends for opposite parities, a blue source at `x` and a red one at
    /// `y` otherwise.
    pub fn walk(g: &Graph, x: usize, y: usize) -> Sector {
        let mut s = Sector::free(g.n_vertices());
        if g.parity(x) != g.parity(y) {
            s.source[x][0] += 1;
            s.source[y][0] += 1;
        } else {
            s.source[x][0] += 1;
            s.source[y][1] += 1;
        }
        s
    }

    fn max_source(&self) -> u32 {
        self.source.iter().flat_map(|s| s.iter().copied()).max().unwrap_or(0)
    }
    fn max_neg_shift(&self) -> u32 {
        self.shift.iter().map(|&s| (-s).max(0) as u32).max().unwrap_or(0)
    }
}

/// Evaluator for constrained path sums on one graph.
#[derive(Clone, Debug)]
pub struct PathSum<'a> {
    pub g: &'a Graph,
    pub u: &'a WeightFunction,
    pub params: ModelParams,
    /// Relative size below which edge and ghost terms are dropped when `h > 0`.
    pub tail_tol: f64,
}

impl<'a> PathSum<'a> {
    pub fn new(g: &'a Graph, u: &'a WeightFunction, params: ModelParams) -> Result<Self> {
        params.validate()?;
        u.validate()?;
        Ok(PathSum { g, u, params, tail_tol: 1e-20 })
    }

    fn bh(&self) -> f64 {
        self.params.beta * self.params.h
    }

    /// Smallest `m` with `x^m / m!` below the tail tolerance.
    fn poisson_cut(&self, x: f64) -> u32 {
        let mut m = 0u32;
        let mut term = 1.0f64;
        while term > self.tail_tol || (m as f64) < x {
            m += 1;
            term *= x / m as f64;
            if m > 200 {
                break;
            }
        }
        m
    }

    /// Per-edge multiplicity caps `(blue, red)`. With `h = 0` the caps follow
    /// from the support of `U` and the sums are exact; with `h > 0` blue
    /// multiplicity is unbounded and is cut where its weight is negligible.
    pub fn caps(&self, s: &Sector) -> (u32, u32) {
        let cap_r = self.u.support_max() as u32 + s.max_neg_shift();
        let exact_b = cap_r + s.max_source();
        if self.params.h == 0.0 {
            return (exact_b, cap_r);
        }
        let q_extra = self.poisson_cut(self.bh());
        let by_ghost = exact_b + self.params.r * q_extra;
        let by_edge = self.poisson_cut(self.params.beta) + s.max_source();
        (by_ghost.min(by_edge.max(exact_b)), cap_r)
    }

    /// Bound on the weight dropped by the caps, `2|E| sum_{m > C} beta^m / m!`
    /// times the maximal remaining edge and field factors.
    pub fn truncation_bound(&self, s: &Sector) -> f64 {
        if self.params.h == 0.0 {
            return 0.0;
        }
        let (cb, _) = self.caps(s);
        let beta = self.params.beta;
        let m_edges = self.g.n_edges() as f64;
        let mut tail = 0.0;
        let mut term = 1.0;
        for m in 1..=cb + 60 {
            term *= beta / m as f64;
            if m > cb {
                tail += term;
            }
        }
        2.0 * m_edges * tail * (beta * (2.0 * m_edges - 1.0)).exp() * (2.0 * self.bh() * self.g.n_vertices() as f64).exp()
    }

    /// `sum_{p - q = j} (bh)^{p+q} / (p! q!)`.
    fn ghost_sum(&self, j: i64) -> f64 {
        let bh = self.bh();
        let q0 = (-j).max(0) as u32;
        let mut total = 0.0;
        for q in q0..q0 + 80 {
            let p = (q as i64 + j) as u32;
            let term = bh.powi((p + q) as i32) / (<f64 as Scalar>::factorial(p) * <f64 as Scalar>::factorial(q));
            total += term;
            if term < 1e-30 * total.max(1e-300) {
                break;
            }
        }
        total
    }

    fn vertex_factor<S: Scalar>(&self, s: &Sector, x: usize, b_tot: u32, r_tot: u32) -> Result<S> {
        match s.constraint[x] {
            LocalConstraint::Empty => {
                return Ok(if b_tot == 0 && r_tot == 0 { self.u.at_scalar(s.shift[x]) } else { S::zero() });
            }
            LocalConstraint::ReducedLocalTime(p) if r_tot != p => return Ok(S::zero()),
            _ => {}
        }
        let uval: S = self.u.at_scalar(r_tot as i64 + s.shift[x]);
        if uval.is_zero() {
            return Ok(S::zero());
        }
        let t = r_tot as i64 - b_tot as i64;
        if self.params.h == 0.0 {
            return Ok(if t == 0 { uval } else { S::zero() });
        }
        if S::is_exact() {
            return Err(Error::InvalidArgument("exact path sums need h = 0".into()));
        }
        let r = self.params.r as i64;
        if t % r != 0 {
            return Ok(S::zero());
        }
        Ok(uval * S::from_f64(self.ghost_sum(t / r)))
    }

    /// Constrained path sum with per-edge caps chosen by [`PathSum::caps`].
    pub fn eval<S: Scalar>(&self, s: &Sector) -> Result<S> {
        let (cb, cr) = self.caps(s);
        self.eval_with_caps(s, cb, cr)
    }

    pub fn eval_with_caps<S: Scalar>(&self, s: &Sector, cb: u32, cr: u32) -> Result<S> {
        let g = self.g;
        let n = g.n_vertices();
        if s.source.len() != n || s.shift.len() != n || s.constraint.len() != n {
            return Err(Error::InvalidArgument("sector does not match graph".into()));
        }
        let d = ((cb + 1) * (cr + 1)) as usize;
        let val = |a: usize| ((a / (cr as usize + 1)) as u32, (a % (cr as usize + 1)) as u32);
        let beta = S::from_f64(self.params.beta);
        let mut factors: Vec<Factor<S>> = Vec::new();

        // Edge weights.
        for e in 0..g.n_edges() {
            let mut data = Vec::with_capacity(d);
            for a in 0..d {
                let (b, r) = val(a);
                let mut w = beta.powu(b) / S::factorial(b) * beta.powu(r) / S::factorial(r);
                if let Some((oe, c, pw)) = s.multiplicity_moment {
                    if oe == e {
                        let m = S::from_u128(if c == Color::Blue { b } else { r } as u128);
                        w = if pw >= 0 {
                            w * m.powu(pw as u32)
                        } else if m.is_zero() {
                            S::zero()
                        } else {
                            w / m.powu(pw.unsigned_abs())
                        };
                    }
                }
                data.push(w);
            }
            factors.push(Factor { vars: vec![e], data });
        }

        // Vertex factors.
        for x in 0..n {
            let inc = g.incident(x).to_vec();
            let deg = inc.len();
            let size = d.checked_pow(deg as u32).filter(|&sz| sz <= TABLE_BUDGET).ok_or_else(|| {
                Error::BudgetExceeded { what: format!("vertex table at {x}"), limit: TABLE_BUDGET as u64 }
            })?;
            let (bmax, rmax) = (deg as u32 * cb + s.source[x][0], deg as u32 * cr + s.source[x][1]);
            let mut table = vec![vec![S::zero(); rmax as usize + 1]; bmax as usize + 1];
            for (bt, row) in table.iter_mut().enumerate() {
                for (rt, cell) in row.iter_mut().enumerate() {
                    *cell = self.vertex_factor(s, x, bt as u32, rt as u32)?;
                }
            }
            let mut data = Vec::with_capacity(size);
            let mut digits = vec![0usize; deg];
            for _ in 0..size {
                let (mut bt, mut rt) = (s.source[x][0], s.source[x][1]);
                for &a in &digits {
                    let (b, r) = val(a);
                    bt += b;
                    rt += r;
                }
                data.push(table[bt as usize][rt as usize].clone());
                for i in (0..deg).rev() {
                    digits[i] += 1;
                    if digits[i] < d {
                        break;
                    }
                    digits[i] = 0;
                }
            }
            factors.push(Factor { vars: inc, data });
        }

        eliminate(factors, g.n_edges(), d)
    }

    /// `Z^path`.
    pub fn zpath<S: Scalar>(&self) -> Result<S> {
        self.eval(&Sector::free(self.g.n_vertices()))
    }

    /// Ratio of a constrained sum to `Z^path`.
    pub fn ratio(&self, s: &Sector) -> Result<f64> {
        let z: f64 = self.zpath()?;
        if z <= 0.0 {
            return Err(Error::ZeroPartition("path partition function is zero".into()));
        }
        Ok(self.eval::<f64>(s)? / z)
    }
}

struct Factor<S> {
    vars: Vec<usize>,
    data: Vec<S>,
}

/// Sums out every variable (all of domain size `d`) and returns the scalar.
fn eliminate<S: Scalar>(mut factors: Vec<Factor<S>>, n_vars: usize, d: usize) -> Result<S> {
    let mut alive: Vec<bool> = vec![true; n_vars];
    for _ in 0..n_vars {
        // Pick the variable with the smallest merged scope.
        let mut best: Option<(usize, Vec<usize>)> = None;
        for v in (0..n_vars).filter(|&v| alive[v]) {
            let mut scope: Vec<usize> =
                factors.iter().filter(|f| f.vars.contains(&v)).flat_map(|f| f.vars.iter().copied()).collect();
            scope.sort_unstable();
            scope.dedup();
            scope.retain(|&w| w != v);
            if best.as_ref().is_none_or(|(_, s)| scope.len() < s.len()) {
                best = Some((v, scope));
            }
        }
        let (v, scope) = best.expect("a live variable");
        alive[v] = false;
        let out_size = d.checked_pow(scope.len() as u32 + 1).filter(|&s| s <= TABLE_BUDGET).ok_or_else(|| {
            Error::BudgetExceeded { what: "elimination scope".into(), limit: TABLE_BUDGET as u64 }
        })? / d;
        let (touch, keep): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.vars.contains(&v));
        factors = keep;

        // Position of each factor variable in the combined assignment [scope.., v].
        let mut combined = scope.clone();
        combined.push(v);
        let strides: Vec<Vec<usize>> = touch
            .iter()
            .map(|f| {
                let mut st = vec![0usize; combined.len()];
                let mut stride = 1;
                for &w in f.vars.iter().rev() {
                    let pos = combined.iter().position(|&c| c == w).unwrap();
                    st[pos] += stride;
                    stride *= d;
                }
                st
            })
            .collect();
        let mut data = vec![S::zero(); out_size];
        let mut digits = vec![0usize; combined.len()];
        for (slot, out) in data.iter_mut().enumerate() {
            let mut rem = slot;
            for i in (0..scope.len()).rev() {
                digits[i] = rem % d;
                rem /= d;
            }
            let mut acc = S::zero();
            'values: for a in 0..d {
                digits[scope.len()] = a;
                let mut prod = S::one();
                for (f, st) in touch.iter().zip(&strides) {
                    let idx: usize = digits.iter().zip(st).map(|(x, s)| x * s).sum();
                    let x = &f.data[idx];
                    if x.is_zero() {
                        continue 'values;
                    }
                    prod = prod * x.clone();
                }
                acc = acc + prod;
            }
            *out = acc;
        }
        factors.push(Factor { vars: scope, data });
    }
    Ok(factors.into_iter().fold(S::one(), |acc, f| acc * f.data[0].clone()))
}

/// Explicit balanced base-edge configurations (`h = 0`, no sources) with
/// `U(k_x) > 0` everywhere, by depth-first search over edges.
pub fn balanced_configurations(g: &Graph, u: &WeightFunction, limit: usize) -> Result<Vec<Vec<[u32; 2]>>> {
    let cap = u.support_max() as u32;
    let n = g.n_vertices();
    let mut last = vec![usize::MAX; n];
    for (e, &[a, b]) in g.edges().iter().enumerate() {
        last[a] = e;
        last[b] = e;
    }
    for x in 0..n {
        if last[x] == usize::MAX && u.at(0) == 0.0 {
            return Ok(Vec::new());
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![[0u32; 2]; g.n_edges()];
    let mut tot = vec![[0u32; 2]; n];
    fn rec(
        g: &Graph,
        u: &WeightFunction,
        cap: u32,
        last: &[usize],
        e: usize,
        cur: &mut Vec<[u32; 2]>,
        tot: &mut Vec<[u32; 2]>,
        out: &mut Vec<Vec<[u32; 2]>>,
        limit: usize,
    ) -> Result<()> {
        if e == g.n_edges() {
            if out.len() >= limit {
                return Err(Error::BudgetExceeded { what: "configuration listing".into(), limit: limit as u64 });
            }
            out.push(cur.clone());
            return Ok(());
        }
        let [a, b] = g.edge(e);
        for mb in 0..=cap {
            for mr in 0..=cap {
                if tot[a][1] + mr > cap || tot[b][1] + mr > cap || tot[a][0] + mb > cap || tot[b][0] + mb > cap {
                    continue;
                }
                cur[e] = [mb, mr];
                for v in [a, b] {
                    tot[v][0] += mb;
                    tot[v][1] += mr;
                }
                let ok = [a, b].iter().all(|&v| last[v] != e || (tot[v][0] == tot[v][1] && u.at(tot[v][1] as i64) > 0.0));
                if ok {
                    rec(g, u, cap, last, e + 1, cur, tot, out, limit)?;
                }
                for v in [a, b] {
                    tot[v][0] -= mb;
                    tot[v][1] -= mr;
                }
            }
        }
        cur[e] = [0, 0];
        Ok(())
    }
    rec(g, u, cap, &last, 0, &mut cur, &mut tot, &mut out, limit)?;
    Ok(out)
}

/// Visits every matching choice of a base configuration (product over
/// vertices of permutations), calling `f` with the full configuration.
pub fn for_each_matching(
    g: &Graph,
    base: &[[u32; 2]],
    limit: u64,
    mut f: impl FnMut(&MultiOccConfiguration) -> Result<()>,
) -> Result<()> {
    let mut w = MultiOccConfiguration::from_base(g, base)?;
    let sizes: Vec<usize> = w.matchings.iter().map(|m| m.len()).collect();
    let total: u64 = sizes.iter().map(|&s| (1..=s as u64).product::<u64>()).product();
    if total > limit {
        return Err(Error::BudgetExceeded { what: "matching enumeration".into(), limit });
    }
    let perms: Vec<Vec<Vec<u32>>> = sizes.iter().map(|&s| permutations(s)).collect();
    let mut idx = vec![0usize; sizes.len()];
    loop {
        for (x, &i) in idx.iter().enumerate() {
            w.matchings[x] = perms[x][i].clone();
        }
        f(&w)?;
        let mut x = 0;
        loop {
            if x == idx.len() {
                return Ok(());
            }
            idx[x] += 1;
            if idx[x] < perms[x].len() {
                break;
            }
            idx[x] = 0;
            x += 1;
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for k in 0..n as u32 {
        let mut next = Vec::new();
        for p in &out {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

/// `Z^path` at `h = 0` by listing configurations and every matching.
pub fn zpath_literal(g: &Graph, u: &WeightFunction, params: &ModelParams) -> Result<f64> {
    let p = params.with_h(0.0);
    let mut total = 0.0;
    for base in balanced_configurations(g, u, 1_000_000)? {
        for_each_matching(g, &base, 1_000_000, |w| {
            total += crate::model::multiocc_weight::<f64>(g, w, &p, u)?;
            Ok(())
        })?;
    }
    Ok(total)
}

/// `P(x <-> y)`: probability that `x` and `y` lie on a common loop at `h = 0`.
pub fn connection_probability(g: &Graph, u: &WeightFunction, params: &ModelParams, x: usize, y: usize) -> Result<f64> {
    let p = params.with_h(0.0);
    let (mut num, mut den) = (0.0, 0.0);
    for base in balanced_configurations(g, u, 1_000_000)? {
        for_each_matching(g, &base, 1_000_000, |w| {
            let wt = crate::model::multiocc_weight::<f64>(g, w, &p, u)?;
            den += wt;
            if multiocc_loops(g, w)?.iter().any(|l| l.contains(&x) && l.contains(&y)) {
                num += wt;
            }
            Ok(())
        })?;
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;
    use num_rational::BigRational;

    fn params(beta: f64) -> ModelParams {
        ModelParams { beta, ..Default::default() }
    }

    #[test]
    fn k2_mdd_partition() {
        let g = Graph::k2();
        let u = WeightFunction::mdd();
        let z: BigRational = PathSum::new(&g, &u, params(0.5)).unwrap().zpath().unwrap();
        assert_eq!(z, ratio(5, 4));
    }

    #[test]
    fn k2_truncated_series() {
        let g = Graph::k2();
        let u = WeightFunction::truncated_xy(4);
        let z: BigRational = PathSum::new(&g, &u, params(1.0)).unwrap().zpath().unwrap();
        let expect = (0..=4u32).fold(ratio(0, 1), |acc, n| {
            let f = <BigRational as Scalar>::factorial(n);
            acc + ratio(1, 1) / (f.clone() * f)
        });
        assert_eq!(z, expect);
    }

    #[test]
    fn elimination_matches_literal_sum() {
        for g in [Graph::k2(), Graph::cycle(4).unwrap(), Graph::path(4).unwrap()] {
            for u in [WeightFunction::mdd(), WeightFunction::dimer(), WeightFunction::truncated_xy(3)] {
                let p = params(0.7);
                let fast: f64 = PathSum::new(&g, &u, p).unwrap().zpath().unwrap();
                let slow = zpath_literal(&g, &u, &p).unwrap();
                assert!((fast - slow).abs() < 1e-12 * fast, "{} {:?}", g.name(), u.preset);
            }
        }
    }

    #[test]
    fn neighbour_expectation_k2() {
        let g = Graph::k2();
        let u = WeightFunction::mdd();
        let ps = PathSum::new(&g, &u, params(0.5)).unwrap();
        let v = ps.ratio(&Sector::for_monomial(&[1, 1], &[0, 0])).unwrap();
        assert!((v - 0.4).abs() < 1e-15);
    }

    #[test]
    fn field_adds_weight() {
        let g = Graph::k2();
        let u = WeightFunction::mdd();
        let p = ModelParams { beta: 0.5, h: 0.1, r: 1, ..Default::default() };
        let ps = PathSum::new(&g, &u, p).unwrap();
        let z: f64 = ps.zpath().unwrap();
        assert!(z > 1.25);
        assert!(ps.eval::<BigRational>(&Sector::free(2)).is_err());
    }
}
