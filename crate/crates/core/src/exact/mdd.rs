//! Exhaustive enumeration of monomer double-dimer configurations.
//!
//! Every quantity is accumulated as an integer polynomial in `(rho, N)`, so
//! the results can be evaluated exactly at rational couplings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::covers::list_covers;
use crate::lattice::Graph;
use crate::model::{MddConfiguration, Occupancy, NONE};
use crate::numeric::Scalar;

/// Largest vertex count for full enumeration.
pub const MDD_BUDGET: usize = 20;

/// Integer polynomial `sum c[k][l] rho^k N^l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Poly2 {
    pub dk: usize,
    pub dl: usize,
    pub coeffs: Vec<u128>,
}

impl Poly2 {
    pub fn zero(dk: usize, dl: usize) -> Poly2 {
        Poly2 { dk, dl, coeffs: vec![0; dk * dl] }
    }
    pub fn add(&mut self, k: usize, l: usize, c: u128) {
        self.coeffs[k * self.dl + l] += c;
    }
    pub fn merge(&mut self, other: &Poly2) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += *b;
        }
    }
    pub fn coeff(&self, k: usize, l: usize) -> u128 {
        self.coeffs[k * self.dl + l]
    }
    pub fn eval<S: Scalar>(&self, rho: &S, n: &S) -> S {
        let mut acc = S::zero();
        for k in 0..self.dk {
            for l in 0..self.dl {
                let c = self.coeff(k, l);
                if c != 0 {
                    acc = acc + S::from_u128(c) * rho.powu(k as u32) * n.powu(l as u32);
                }
            }
        }
        acc
    }
    pub fn eval_f64(&self, rho: f64, n: u32) -> f64 {
        self.eval::<f64>(&rho, &(n as f64))
    }
}

/// Enumeration results at the origin.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MddCounts {
    pub n_vertices: usize,
    pub origin: usize,
    /// Partition function.
    pub z: Poly2,
    /// `origin_loop[len]`: weight of configurations whose origin loop has `len` vertices.
    pub origin_loop: Vec<Poly2>,
    /// `connected[x]`: weight of configurations with `x` on the origin's loop.
    pub connected: Vec<Poly2>,
    /// Number of configurations (all weights one).
    pub n_states: u128,
}

/// Exact expectations at given couplings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MddExpectations {
    pub z: f64,
    pub mean_origin_loop: f64,
    pub connected: Vec<f64>,
    pub loop_len_dist: Vec<f64>,
    pub walk: Vec<f64>,
}

impl MddExpectations {
    /// `P(|L_o| > eps |V|)`.
    pub fn tail(&self, eps: f64) -> f64 {
        let n = self.connected.len() as f64;
        self.loop_len_dist.iter().enumerate().filter(|(len, _)| *len as f64 > eps * n).map(|(_, p)| p).sum()
    }
}

fn check_budget(g: &Graph) -> Result<()> {
    if g.n_vertices() > MDD_BUDGET {
        return Err(Error::BudgetExceeded {
            what: format!("monomer double-dimer enumeration on {} vertices", g.n_vertices()),
            limit: MDD_BUDGET as u64,
        });
    }
    Ok(())
}

/// True when `G - mask` has as many even as odd vertices.
pub(crate) fn balanced(g: &Graph, mask: u64) -> bool {
    let mut diff: i64 = 0;
    for v in 0..g.n_vertices() {
        if mask & (1 << v) == 0 {
            diff += if g.is_even(v) { 1 } else { -1 };
        }
    }
    diff == 0
}

/// Monomer subsets avoiding `forbid` whose complement could be covered.
fn feasible_subsets(g: &Graph, forbid: u64) -> Vec<u64> {
    (0..1u64 << g.n_vertices()).filter(|m| m & forbid == 0 && balanced(g, *m)).collect()
}

/// Traces closed loops of a pair of (possibly partial) covers. Calls `f` with
/// each loop's vertex list and returns the loop count. Vertices with a
/// missing colour lie on an open walk and are skipped.
pub(crate) fn closed_loops(g: &Graph, p: [&[u32]; 2], mut f: impl FnMut(&[usize])) -> usize {
    let n = g.n_vertices();
    let mut seen = vec![false; n];
    let mut buf = Vec::with_capacity(n);
    let mut count = 0;
    for v0 in 0..n {
        if seen[v0] || !g.is_even(v0) || p[0][v0] == NONE || p[1][v0] == NONE {
            continue;
        }
        buf.clear();
        let (mut cur, mut c, mut closed) = (v0, 0usize, true);
        loop {
            let e = p[c][cur];
            if e == NONE {
                closed = false;
                break;
            }
            buf.push(cur);
            cur = g.other_end(e as usize, cur);
            c ^= 1;
            if cur == v0 && c == 0 {
                break;
            }
        }
        for &v in &buf {
            seen[v] = true;
        }
        if closed {
            count += 1;
            f(&buf);
        }
    }
    count
}

#[derive(Clone)]
struct Acc {
    z: Poly2,
    origin_loop: Vec<Poly2>,
    connected: Vec<Poly2>,
    n_states: u128,
}

impl Acc {
    fn new(n: usize) -> Acc {
        let (dk, dl) = (n + 1, n / 2 + 1);
        Acc {
            z: Poly2::zero(dk, dl),
            origin_loop: vec![Poly2::zero(dk, dl); n + 1],
            connected: vec![Poly2::zero(dk, dl); n],
            n_states: 0,
        }
    }
    fn merge(mut self, o: Acc) -> Acc {
        self.z.merge(&o.z);
        for (a, b) in self.origin_loop.iter_mut().zip(&o.origin_loop) {
            a.merge(b);
        }
        for (a, b) in self.connected.iter_mut().zip(&o.connected) {
            a.merge(b);
        }
        self.n_states += o.n_states;
        self
    }
}

/// Enumerates every configuration, tracking the origin's loop.
pub fn mdd_enumerate(g: &Graph) -> Result<MddCounts> {
    check_budget(g)?;
    let n = g.n_vertices();
    let o = g.origin();
    let subsets = feasible_subsets(g, 0);
    let acc = subsets
        .par_iter()
        .map(|&m| -> Result<Acc> {
            let mut acc = Acc::new(n);
            let covers = list_covers(g, m)?;
            let k = m.count_ones() as usize;
            for d1 in &covers {
                for d2 in &covers {
                    let mut origin_loop: Option<Vec<usize>> = None;
                    let l = closed_loops(g, [d1, d2], |lp| {
                        if lp.contains(&o) {
                            origin_loop = Some(lp.to_vec());
                        }
                    });
                    acc.z.add(k, l, 1);
                    acc.n_states += 1;
                    match origin_loop {
                        Some(lp) => {
                            acc.origin_loop[lp.len()].add(k, l, 1);
                            for x in lp {
                                acc.connected[x].add(k, l, 1);
                            }
                        }
                        None => acc.origin_loop[0].add(k, l, 1),
                    }
                }
            }
            Ok(acc)
        })
        .try_reduce(|| Acc::new(n), |a, b| Ok(a.merge(b)))?;
    Ok(MddCounts { n_vertices: n, origin: o, z: acc.z, origin_loop: acc.origin_loop, connected: acc.connected, n_states: acc.n_states })
}

/// Weights of the two-point sets `Omega(o, x)` for every `x`.
///
/// For `x` of opposite parity to `o` the first cover misses both points; for
/// equal parity (including `x = o`) the first cover misses `o` and the second
/// misses `x`. Only closed loops carry the factor `N`.
pub fn mdd_walk_counts(g: &Graph) -> Result<Vec<Poly2>> {
    check_budget(g)?;
    let n = g.n_vertices();
    let o = g.origin();
    (0..n)
        .into_par_iter()
        .map(|x| -> Result<Poly2> {
            let mut poly = Poly2::zero(n + 1, n / 2 + 1);
            let pair = (1u64 << o) | (1u64 << x);
            let (a, b) = if g.parity(o) != g.parity(x) { (pair, 0) } else { (1u64 << o, 1u64 << x) };
            for m in 0..1u64 << n {
                if m & pair != 0 || !balanced(g, m | a) || !balanced(g, m | b) {
                    continue;
                }
                let c1 = list_covers(g, m | a)?;
                if c1.is_empty() {
                    continue;
                }
                let c2 = list_covers(g, m | b)?;
                let k = m.count_ones() as usize;
                for d1 in &c1 {
                    for d2 in &c2 {
                        let l = closed_loops(g, [d1, d2], |_| {});
                        poly.add(k, l, 1);
                    }
                }
            }
            Ok(poly)
        })
        .collect()
}

/// `Z` at couplings `(rho, N)`.
pub fn mdd_partition<S: Scalar>(g: &Graph, rho: &S, n_colors: &S) -> Result<S> {
    Ok(mdd_enumerate(g)?.z.eval(rho, n_colors))
}

/// All exact loop observables at `(rho, N)`.
pub fn mdd_expectations(g: &Graph, rho: f64, n_colors: u32) -> Result<MddExpectations> {
    let counts = mdd_enumerate(g)?;
    let walks = mdd_walk_counts(g)?;
    Ok(expectations_from(&counts, &walks, rho, n_colors)?)
}

pub fn expectations_from(counts: &MddCounts, walks: &[Poly2], rho: f64, n_colors: u32) -> Result<MddExpectations> {
    let z = counts.z.eval_f64(rho, n_colors);
    if z <= 0.0 {
        return Err(Error::ZeroPartition("monomer double-dimer partition function is zero".into()));
    }
    let loop_len_dist: Vec<f64> = counts.origin_loop.iter().map(|p| p.eval_f64(rho, n_colors) / z).collect();
    let mean_origin_loop = loop_len_dist.iter().enumerate().map(|(l, p)| l as f64 * p).sum();
    Ok(MddExpectations {
        z,
        mean_origin_loop,
        connected: counts.connected.iter().map(|p| p.eval_f64(rho, n_colors) / z).collect(),
        loop_len_dist,
        walk: walks.iter().map(|p| p.eval_f64(rho, n_colors) / z).collect(),
    })
}

/// Lists every configuration (for small graphs).
pub fn mdd_states(g: &Graph) -> Result<Vec<MddConfiguration>> {
    check_budget(g)?;
    let mut out = Vec::new();
    for m in feasible_subsets(g, 0) {
        let covers = list_covers(g, m)?;
        for d1 in &covers {
            for d2 in &covers {
                let occ = Occupancy {
                    monomer: (0..g.n_vertices()).map(|v| m & (1 << v) != 0).collect(),
                    partner: [d1.clone(), d2.clone()],
                };
                out.push(occ.to_config(g));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;
    use num_rational::BigRational;

    #[test]
    fn c4_partition() {
        let g = Graph::cycle(4).unwrap();
        let c = mdd_enumerate(&g).unwrap();
        // (2 + rho^2)^2 at N = 1.
        for rho in [0.0, 0.5, 1.0, 3.0] {
            assert!((c.z.eval_f64(rho, 1) - (2.0 + rho * rho).powi(2)).abs() < 1e-12);
        }
        assert_eq!(c.n_states, 9);
        let e = expectations_from(&c, &mdd_walk_counts(&g).unwrap(), 1.0, 1).unwrap();
        assert!((e.mean_origin_loop - 16.0 / 9.0).abs() < 1e-15);
        let e0 = expectations_from(&c, &mdd_walk_counts(&g).unwrap(), 0.0, 1).unwrap();
        assert!((e0.connected[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn k2_walk() {
        let g = Graph::k2();
        let w = mdd_walk_counts(&g).unwrap();
        let c = mdd_enumerate(&g).unwrap();
        let rho = ratio(3, 1);
        let one = ratio(1, 1);
        let val: BigRational = w[1].eval(&rho, &one) / c.z.eval(&rho, &one);
        assert_eq!(val, ratio(1, 10));
    }

    #[test]
    fn states_sum_to_partition() {
        let g = Graph::cycle(4).unwrap();
        let states = mdd_states(&g).unwrap();
        let total: f64 = states.iter().map(|s| crate::model::mdd_weight(&g, s, 2.0, 3).unwrap()).sum();
        assert!((total - mdd_enumerate(&g).unwrap().z.eval_f64(2.0, 3)).abs() < 1e-9);
    }
}
