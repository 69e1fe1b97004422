//! Tensor trapezoid quadrature of the complex spin measure.
//!
//! Each site carries a grid point `(s1, s2)` from a `Q x Q` grid, so a site
//! state is an index in `0..Q^2`. Edge weights factor into a Kronecker product
//! of a blue and a red `Q x Q` matrix, which keeps the contraction at
//! `O(Q^5)` per eliminated site of degree two. The full grid sum is evaluated
//! exactly (up to rounding) by eliminating sites one at a time.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Graph;
use crate::model::{ModelParams, WeightFunction};
use crate::numeric::KahanSum;
use crate::spin::observable::{SiteFactor, SpinObservable};

/// Grid specification: `q` points per angle, shifted by `offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub q: usize,
    pub offset: f64,
}

impl Quadrature {
    pub fn new(q: usize) -> Quadrature {
        Quadrature { q, offset: 0.0 }
    }
    /// Default resolution: 64 points for two sites, 24 up to four sites, 12 beyond.
    pub fn default_for(n_sites: usize) -> Quadrature {
        Quadrature::new(match n_sites {
            0..=2 => 64,
            3..=4 => 24,
            _ => 12,
        })
    }
    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.q as f64 + self.offset
    }
}

/// Coupling strengths above which the grid resolution is not certified.
pub const CERTIFIED_BETA: f64 = 0.75;

/// Largest number of complex multiply-adds allowed per contraction.
pub const WORK_BUDGET: f64 = 4e10;

type Mat = Vec<C>;

#[derive(Clone)]
enum Pair {
    /// `blue (x) red`, each `Q x Q`, rows indexed by the first site.
    Kron(Mat, Mat),
    /// Dense `D x D`.
    Dense(Mat),
}

/// The spin system on a graph at fixed couplings and grid.
pub struct SpinSystem<'a> {
    pub g: &'a Graph,
    pub u: &'a WeightFunction,
    pub params: ModelParams,
    pub quad: Quadrature,
    /// Edge multiplicities between (even, odd) site pairs.
    bonds: BTreeMap<(usize, usize), u32>,
    blue: Mat,
    red: Mat,
}

impl<'a> SpinSystem<'a> {
    pub fn new(g: &'a Graph, u: &'a WeightFunction, params: ModelParams, quad: Quadrature) -> Result<Self> {
        params.validate()?;
        u.validate()?;
        if quad.q < 8 {
            return Err(Error::InvalidArgument("quadrature needs at least 8 points per angle".into()));
        }
        let mut bonds = BTreeMap::new();
        for e in 0..g.n_edges() {
            let x = g.even_end(e);
            let y = g.other_end(e, x);
            *bonds.entry((x, y)).or_insert(0) += 1;
        }
        let q = quad.q;
        let beta = params.beta;
        let mut blue = vec![C::new(0.0, 0.0); q * q];
        let mut red = vec![C::new(0.0, 0.0); q * q];
        for j in 0..q {
            for k in 0..q {
                let d = quad.angle(j) - quad.angle(k);
                blue[j * q + k] = (C::new(0.0, d).exp() * beta).exp();
                red[j * q + k] = (C::new(0.0, -d).exp() * beta).exp();
            }
        }
        Ok(SpinSystem { g, u, params, quad, bonds, blue, red })
    }

    pub fn certified(&self) -> bool {
        self.params.beta <= CERTIFIED_BETA
    }

    fn d(&self) -> usize {
        self.quad.q * self.quad.q
    }

    /// Site vector for a list of factors, including the vertex weight, the
    /// field and the `1/Q^2` grid normalisation.
    pub fn site_vector(&self, x: usize, factors: &[&SiteFactor]) -> Vec<C> {
        let q = self.quad.q;
        let sigma = self.g.parity(x).sign();
        let (beta, h, r) = (self.params.beta, self.params.h, self.params.r as f64);
        let norm = 1.0 / (q * q) as f64;
        let empty = factors.iter().any(|f| matches!(f, SiteFactor::Empty));
        let mode = factors.iter().find_map(|f| match f {
            SiteFactor::ReducedLocalTime(p) => Some(*p),
            _ => None,
        });
        let mut out = Vec::with_capacity(q * q);
        for j1 in 0..q {
            let s1 = self.quad.angle(j1);
            for j2 in 0..q {
                let s2 = self.quad.angle(j2);
                let mut v = if empty {
                    C::new(self.u.at(0), 0.0)
                } else {
                    let weight = match mode {
                        Some(p) => C::new(0.0, -sigma * p as f64 * (s1 - s2)).exp() * self.u.at(p as i64),
                        None => (0..self.u.values.len())
                            .filter(|&n| self.u.values[n] != 0.0)
                            .map(|n| C::new(0.0, -sigma * n as f64 * (s1 - s2)).exp() * self.u.values[n])
                            .sum(),
                    };
                    weight * (2.0 * beta * h * (r * s1).cos()).exp()
                };
                for f in factors {
                    v *= match f {
                        SiteFactor::S1Pow(p) => C::new(0.0, sigma * *p as f64 * s1).exp(),
                        SiteFactor::S2Pow(p) => C::new(0.0, -sigma * *p as f64 * s2).exp(),
                        SiteFactor::Cos1(l) => C::new((*l as f64 * s1).cos(), 0.0),
                        SiteFactor::Sin1(l) => C::new((*l as f64 * s1).sin(), 0.0),
                        SiteFactor::Empty | SiteFactor::ReducedLocalTime(_) => C::new(1.0, 0.0),
                    };
                }
                out.push(v * norm);
            }
        }
        out
    }

    fn bond_pair(&self, mult: u32) -> Pair {
        let pw = |m: &Mat| m.iter().map(|z| z.powu(mult)).collect::<Mat>();
        Pair::Kron(pw(&self.blue), pw(&self.red))
    }

    /// Grid sum of `prod_x site[x] prod_edges w_e`, by site elimination.
    pub fn contract(&self, sites: &[Vec<C>]) -> Result<C> {
        let n = self.g.n_vertices();
        let q = self.quad.q;
        let d = self.d();
        let mut unary: Vec<Vec<C>> = sites.to_vec();
        let mut pairs: BTreeMap<(usize, usize), Pair> = BTreeMap::new();
        for (&(x, y), &m) in &self.bonds {
            let p = self.bond_pair(m);
            if x < y {
                pairs.insert((x, y), p);
            } else {
                pairs.insert((y, x), transpose(&p, q));
            }
        }
        let mut alive = vec![true; n];
        let mut total = C::new(1.0, 0.0);
        let mut work = 0.0f64;
        for _ in 0..n {
            let degree = |v: usize, pairs: &BTreeMap<(usize, usize), Pair>| {
                pairs.keys().filter(|(a, b)| *a == v || *b == v).count()
            };
            let v = (0..n).filter(|&v| alive[v]).min_by_key(|&v| (degree(v, &pairs), v)).unwrap();
            alive[v] = false;
            let nbrs: Vec<(usize, usize)> = pairs.keys().copied().filter(|(a, b)| *a == v || *b == v).collect();
            match nbrs.len() {
                0 => {
                    let mut s = KahanSum::default();
                    let mut si = KahanSum::default();
                    for z in &unary[v] {
                        s.add(z.re);
                        si.add(z.im);
                    }
                    total *= C::new(s.value(), si.value());
                }
                1 => {
                    let key = nbrs[0];
                    let p = pairs.remove(&key).unwrap();
                    let u = if key.0 == v { key.1 } else { key.0 };
                    let p = if key.0 == u { p } else { transpose(&p, q) };
                    work += (2 * q * q * q) as f64;
                    let w = apply(&p, &unary[v], q);
                    for (a, b) in unary[u].iter_mut().zip(w) {
                        *a *= b;
                    }
                }
                2 => {
                    let (k1, k2) = (nbrs[0], nbrs[1]);
                    let p1 = pairs.remove(&k1).unwrap();
                    let p2 = pairs.remove(&k2).unwrap();
                    let u = if k1.0 == v { k1.1 } else { k1.0 };
                    let w = if k2.0 == v { k2.1 } else { k2.0 };
                    let left = if k1.0 == u { p1 } else { transpose(&p1, q) };
                    let right = if k2.0 == v { p2 } else { transpose(&p2, q) };
                    work += if matches!(left, Pair::Dense(_)) && matches!(right, Pair::Dense(_)) {
                        (d * d * d) as f64
                    } else {
                        (2 * d * q * q * q) as f64
                    };
                    if work > WORK_BUDGET {
                        return Err(Error::BudgetExceeded { what: "quadrature contraction".into(), limit: WORK_BUDGET as u64 });
                    }
                    let m = chain(&left, &unary[v], &right, q);
                    let (a, b, m) = if u < w { (u, w, m) } else { (w, u, transpose_dense(&m, d)) };
                    let merged = match pairs.remove(&(a, b)) {
                        Some(existing) => hadamard(&m, &existing, q),
                        None => m,
                    };
                    pairs.insert((a, b), Pair::Dense(merged));
                }
                k => {
                    return Err(Error::BudgetExceeded {
                        what: format!("site elimination with {k} neighbours"),
                        limit: 2,
                    })
                }
            }
        }
        Ok(total)
    }

    /// Direct loop over every grid point; only feasible for tiny systems.
    pub fn contract_brute(&self, sites: &[Vec<C>]) -> Result<C> {
        let n = self.g.n_vertices();
        let d = self.d();
        let q = self.quad.q;
        let points = (d as f64).powi(n as i32);
        if points > 5e8 {
            return Err(Error::BudgetExceeded { what: "direct quadrature".into(), limit: 500_000_000 });
        }
        let bonds: Vec<((usize, usize), u32)> = self.bonds.iter().map(|(k, v)| (*k, *v)).collect();
        let first: Vec<usize> = (0..d).collect();
        let partial: Vec<(f64, f64)> = first
            .par_iter()
            .map(|&a0| {
                let mut state = vec![0usize; n];
                state[0] = a0;
                let (mut re, mut im) = (KahanSum::default(), KahanSum::default());
                loop {
                    let mut v = C::new(1.0, 0.0);
                    for x in 0..n {
                        v *= sites[x][state[x]];
                    }
                    for &((x, y), m) in &bonds {
                        let (ax, ay) = (state[x], state[y]);
                        let b = self.blue[(ax / q) * q + ay / q] * self.red[(ax % q) * q + ay % q];
                        v *= b.powu(m);
                    }
                    re.add(v.re);
                    im.add(v.im);
                    let mut i = n - 1;
                    loop {
                        if i == 0 {
                            return (re.value(), im.value());
                        }
                        state[i] += 1;
                        if state[i] < d {
                            break;
                        }
                        state[i] = 0;
                        i -= 1;
                    }
                }
            })
            .collect();
        let (mut re, mut im) = (KahanSum::default(), KahanSum::default());
        for (a, b) in partial {
            re.add(a);
            im.add(b);
        }
        Ok(C::new(re.value(), im.value()))
    }

    fn sites_for(&self, factors: &[(usize, SiteFactor)]) -> Vec<Vec<C>> {
        (0..self.g.n_vertices())
            .map(|x| {
                let fs: Vec<&SiteFactor> = factors.iter().filter(|(y, _)| *y == x).map(|(_, f)| f).collect();
                self.site_vector(x, &fs)
            })
            .collect()
    }

    /// Unnormalised grid integral of an observable.
    pub fn integrate(&self, obs: &SpinObservable, brute: bool) -> Result<C> {
        let mut acc = C::new(0.0, 0.0);
        for t in &obs.terms {
            let sites = self.sites_for(&t.factors);
            let v = if brute { self.contract_brute(&sites)? } else { self.contract(&sites)? };
            acc += t.coeff * v;
        }
        Ok(acc)
    }

    /// `Z^spin`.
    pub fn partition(&self) -> Result<C> {
        self.integrate(&SpinObservable::one(), false)
    }

    /// `<obs>` under the complex spin measure.
    pub fn expect(&self, obs: &SpinObservable) -> Result<C> {
        let z = self.partition()?;
        if z.norm() == 0.0 {
            return Err(Error::ZeroPartition("spin partition function vanishes".into()));
        }
        Ok(self.integrate(obs, false)? / z)
    }
}

/// `Z^spin` on the default grid.
pub fn spin_partition(g: &Graph, u: &WeightFunction, params: &ModelParams, quad: Quadrature) -> Result<C> {
    SpinSystem::new(g, u, *params, quad)?.partition()
}

/// `<obs>` on the given grid.
pub fn spin_expect(g: &Graph, u: &WeightFunction, params: &ModelParams, obs: &SpinObservable, quad: Quadrature) -> Result<C> {
    SpinSystem::new(g, u, *params, quad)?.expect(obs)
}

fn transpose_q(m: &Mat, q: usize) -> Mat {
    let mut t = vec![C::new(0.0, 0.0); q * q];
    for i in 0..q {
        for j in 0..q {
            t[j * q + i] = m[i * q + j];
        }
    }
    t
}

fn transpose_dense(m: &Mat, d: usize) -> Mat {
    transpose_q(m, d)
}

fn transpose(p: &Pair, q: usize) -> Pair {
    match p {
        Pair::Kron(a, b) => Pair::Kron(transpose_q(a, q), transpose_q(b, q)),
        Pair::Dense(m) => Pair::Dense(transpose_dense(m, q * q)),
    }
}

fn matmul_q(a: &[C], b: &[C], q: usize) -> Mat {
    let mut out = vec![C::new(0.0, 0.0); q * q];
    for i in 0..q {
        for k in 0..q {
            let aik = a[i * q + k];
            for j in 0..q {
                out[i * q + j] += aik * b[k * q + j];
            }
        }
    }
    out
}

/// `w[a] = sum_b P[a][b] phi[b]`.
fn apply(p: &Pair, phi: &[C], q: usize) -> Vec<C> {
    let d = q * q;
    match p {
        Pair::Kron(e1, e2) => {
            // (E1 Phi E2^T) with Phi reshaped to Q x Q.
            let t = matmul_q(e1, phi, q);
            matmul_q(&t, &transpose_q(e2, q), q)
        }
        Pair::Dense(m) => (0..d).map(|a| (0..d).map(|b| m[a * d + b] * phi[b]).sum()).collect(),
    }
}

fn dense_of(p: &Pair, q: usize) -> Mat {
    let d = q * q;
    match p {
        Pair::Dense(m) => m.clone(),
        Pair::Kron(e1, e2) => {
            let mut m = vec![C::new(0.0, 0.0); d * d];
            for i1 in 0..q {
                for i2 in 0..q {
                    for k1 in 0..q {
                        for k2 in 0..q {
                            m[(i1 * q + i2) * d + k1 * q + k2] = e1[i1 * q + k1] * e2[i2 * q + k2];
                        }
                    }
                }
            }
            m
        }
    }
}

/// `M[a][c] = sum_b L[a][b] phi[b] R[b][c]`.
fn chain(left: &Pair, phi: &[C], right: &Pair, q: usize) -> Mat {
    let d = q * q;
    if let (Pair::Kron(..), Pair::Dense(_)) = (left, right) {
        // Work on the transpose so the Kronecker factor sits on the right.
        let m = chain(&transpose(right, q), phi, &transpose(left, q), q);
        return transpose_dense(&m, d);
    }
    let mut x = dense_of(left, q);
    for row in x.chunks_mut(d) {
        for (v, p) in row.iter_mut().zip(phi) {
            *v *= p;
        }
    }
    let mut out = vec![C::new(0.0, 0.0); d * d];
    match right {
        Pair::Kron(e1, e2) => {
            let e2 = e2.clone();
            let e1t = transpose_q(e1, q);
            out.par_chunks_mut(d).zip(x.par_chunks(d)).for_each(|(o, row)| {
                // E1^T R E2 with R the row reshaped to Q x Q.
                let t = matmul_q(&e1t, row, q);
                o.copy_from_slice(&matmul_q(&t, &e2, q));
            });
        }
        Pair::Dense(r) => {
            out.par_chunks_mut(d).zip(x.par_chunks(d)).for_each(|(o, row)| {
                for (b, &xb) in row.iter().enumerate() {
                    if xb == C::new(0.0, 0.0) {
                        continue;
                    }
                    for (oc, rc) in o.iter_mut().zip(&r[b * d..(b + 1) * d]) {
                        *oc += xb * rc;
                    }
                }
            });
        }
    }
    out
}

fn hadamard(m: &Mat, p: &Pair, q: usize) -> Mat {
    let other = dense_of(p, q);
    m.iter().zip(&other).map(|(a, b)| a * b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::PathSum;

    #[test]
    fn k2_partition_matches_path_sum() {
        let g = Graph::k2();
        let u = WeightFunction::mdd();
        let p = ModelParams { beta: 0.5, ..Default::default() };
        let z = spin_partition(&g, &u, &p, Quadrature::new(32)).unwrap();
        assert!((z.re - 1.25).abs() < 1e-12 && z.im.abs() < 1e-12, "{z}");
    }

    #[test]
    fn factorised_equals_direct_sum() {
        let g = Graph::cycle(4).unwrap();
        let u = WeightFunction::truncated_xy(2);
        let p = ModelParams { beta: 0.4, h: 0.1, r: 1, ..Default::default() };
        let sys = SpinSystem::new(&g, &u, p, Quadrature::new(8)).unwrap();
        let obs = SpinObservable::product(vec![(0, SiteFactor::S1Pow(1)), (2, SiteFactor::Cos1(1))]);
        let a = sys.integrate(&obs, false).unwrap();
        let b = sys.integrate(&obs, true).unwrap();
        assert!((a - b).norm() < 1e-13 * b.norm().max(1.0), "{a} {b}");
    }

    #[test]
    fn c4_partition_matches_path_sum() {
        let g = Graph::cycle(4).unwrap();
        let u = WeightFunction::truncated_xy(6);
        let p = ModelParams { beta: 0.5, h: 0.1, r: 2, ..Default::default() };
        let z = spin_partition(&g, &u, &p, Quadrature::new(24)).unwrap();
        let zp: f64 = PathSum::new(&g, &u, p).unwrap().zpath().unwrap();
        assert!((z.re - zp).abs() < 1e-9 * zp, "{z} {zp}");
    }

    #[test]
    fn global_rotation_leaves_partition_unchanged() {
        let g = Graph::cycle(4).unwrap();
        let u = WeightFunction::mdd();
        let p = ModelParams { beta: 0.5, ..Default::default() };
        let a = spin_partition(&g, &u, &p, Quadrature::new(16)).unwrap();
        let b = spin_partition(&g, &u, &p, Quadrature { q: 16, offset: 0.37 }).unwrap();
        assert!((a - b).norm() < 1e-10);
    }
}
