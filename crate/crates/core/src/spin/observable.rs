use num_complex::Complex64;

use crate::lattice::Graph;
use crate::model::ModelParams;

/// A factor attached to one site of a spin monomial.
#[derive(Clone, Debug, PartialEq)]
pub enum SiteFactor {
    /// `(S1_x)^p`; negative powers are complex conjugates.
    S1Pow(i32),
    /// `(S2_x)^p`.
    S2Pow(i32),
    /// `cos(l s1_x)`.
    Cos1(u32),
    /// `sin(l s1_x)`.
    Sin1(u32),
    /// Local-time indicator `n_x = 0`: replaces the site density by `U(0)`.
    Empty,
    /// Reduced local time `k_x = p`: replaces the vertex weight by its `p`-th mode.
    ReducedLocalTime(u32),
}

/// `coeff * prod (site, factor)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: Complex64,
    pub factors: Vec<(usize, SiteFactor)>,
}

/// A finite linear combination of monomials.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SpinObservable {
    pub terms: Vec<Monomial>,
}

impl SpinObservable {
    pub fn one() -> Self {
        SpinObservable { terms: vec![Monomial { coeff: Complex64::new(1.0, 0.0), factors: vec![] }] }
    }

    pub fn product(factors: Vec<(usize, SiteFactor)>) -> Self {
        SpinObservable { terms: vec![Monomial { coeff: Complex64::new(1.0, 0.0), factors }] }
    }

    /// `prod_x (S1_x)^{u1_x} (S2_x)^{u2_x}`.
    pub fn spin_monomial(u1: &[i64], u2: &[i64]) -> Self {
        let mut f = Vec::new();
        for x in 0..u1.len() {
            if u1[x] != 0 {
                f.push((x, SiteFactor::S1Pow(u1[x] as i32)));
            }
            if u2[x] != 0 {
                f.push((x, SiteFactor::S2Pow(u2[x] as i32)));
            }
        }
        Self::product(f)
    }

    pub fn scale(mut self, c: Complex64) -> Self {
        for t in &mut self.terms {
            t.coeff *= c;
        }
        self
    }

    pub fn add(mut self, other: SpinObservable) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn mul(&self, other: &SpinObservable) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().cloned());
                terms.push(Monomial { coeff: a.coeff * b.coeff, factors });
            }
        }
        SpinObservable { terms }
    }

    /// `A_x = sin(r s1_x)`.
    pub fn field_sine(x: usize, r: u32) -> Self {
        Self::product(vec![(x, SiteFactor::Sin1(r))])
    }

    /// Rotation generator `B_x = -beta (d/ds1_x + d/ds2_x) H`:
    /// `-i beta sigma_x sum_{e ~ x} (S1 S1 - S2 S2)_e + 2 beta h r sin(r s1_x)`,
    /// with `sigma_x = +1` on even and `-1` on odd sites and parallel edges
    /// counted separately.
    pub fn rotation_generator(g: &Graph, params: &ModelParams, x: usize) -> Self {
        let sigma = g.parity(x).sign();
        let c = Complex64::new(0.0, -params.beta * sigma);
        let mut obs = SpinObservable::default();
        for &e in g.incident(x) {
            let y = g.other_end(e, x);
            obs.terms.push(Monomial { coeff: c, factors: vec![(x, SiteFactor::S1Pow(1)), (y, SiteFactor::S1Pow(1))] });
            obs.terms.push(Monomial { coeff: -c, factors: vec![(x, SiteFactor::S2Pow(1)), (y, SiteFactor::S2Pow(1))] });
        }
        if params.h != 0.0 {
            obs.terms.push(Monomial {
                coeff: Complex64::new(2.0 * params.beta * params.h * params.r as f64, 0.0),
                factors: vec![(x, SiteFactor::Sin1(params.r))],
            });
        }
        obs
    }

    /// `S1_x S1_y + S2_x S2_y` summed over the edges joining `x` and `y`.
    pub fn bond_energy(g: &Graph, x: usize, y: usize) -> Self {
        let mut obs = SpinObservable::default();
        for _ in g.edges_between(x, y) {
            obs.terms.push(Monomial {
                coeff: Complex64::new(1.0, 0.0),
                factors: vec![(x, SiteFactor::S1Pow(1)), (y, SiteFactor::S1Pow(1))],
            });
            obs.terms.push(Monomial {
                coeff: Complex64::new(1.0, 0.0),
                factors: vec![(x, SiteFactor::S2Pow(1)), (y, SiteFactor::S2Pow(1))],
            });
        }
        obs
    }
}
