use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Enlarged, Graph};
use crate::model::weight::{ModelParams, WeightFunction};
use crate::numeric::Scalar;

/// Multiplicities `[blue, red]` on every edge of the enlarged graph, plus for
/// each base vertex a matching of its blue dimer instances to its red ones.
///
/// Instances at a vertex are listed by increasing enlarged edge id, then by
/// index on the edge; `matchings[x][i] = j` pairs blue instance `i` with red
/// instance `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiOccConfiguration {
    #[serde(with = "sparse_mult")]
    pub mult: Vec<[u32; 2]>,
    pub matchings: Vec<Vec<u32>>,
}

mod sparse_mult {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Sparse {
        len: usize,
        entries: BTreeMap<usize, [u32; 2]>,
    }

    pub fn serialize<S: Serializer>(m: &[[u32; 2]], s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = m.iter().enumerate().filter(|(_, v)| **v != [0, 0]).map(|(e, v)| (e, *v)).collect();
        Sparse { len: m.len(), entries }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<[u32; 2]>, D::Error> {
        let sp = Sparse::deserialize(d)?;
        let mut out = vec![[0, 0]; sp.len];
        for (e, v) in sp.entries {
            if e >= sp.len {
                return Err(serde::de::Error::custom("edge id out of range"));
            }
            out[e] = v;
        }
        Ok(out)
    }
}

impl MultiOccConfiguration {
    /// All multiplicities zero, empty matchings.
    pub fn empty(g: &Graph) -> Self {
        let en = Enlarged::of(g);
        MultiOccConfiguration { mult: vec![[0, 0]; en.n_edges()], matchings: vec![Vec::new(); g.n_vertices()] }
    }

    /// Builds a configuration from base-edge multiplicities with identity matchings.
    pub fn from_base(g: &Graph, base: &[[u32; 2]]) -> Result<Self> {
        let mut w = Self::empty(g);
        if base.len() != g.n_edges() {
            return Err(Error::InvalidConfiguration("base multiplicity length mismatch".into()));
        }
        w.mult[..base.len()].copy_from_slice(base);
        for x in 0..g.n_vertices() {
            let n = colour_total(g, &w.mult, x, 0);
            w.matchings[x] = (0..n).collect();
        }
        Ok(w)
    }

    /// Enlarged edge ids incident to base vertex `x`, in increasing order.
    pub fn incident_enlarged(g: &Graph, x: usize) -> Vec<usize> {
        let en = Enlarged::of(g);
        let mut out: Vec<usize> = g.incident(x).to_vec();
        out.sort_unstable();
        out.push(en.ghost_edge(x));
        out.push(en.source_edge(x));
        out
    }

    /// Checks colour balance at every base vertex, ghost divisibility by `r`
    /// and that each matching is a permutation of the right size.
    pub fn validate(&self, g: &Graph, r: u32) -> Result<()> {
        let en = Enlarged::of(g);
        if self.mult.len() != en.n_edges() || self.matchings.len() != g.n_vertices() {
            return Err(Error::InvalidConfiguration("configuration does not match graph".into()));
        }
        for x in 0..g.n_vertices() {
            let n = local_time(g, self, x)?;
            let [g1, g2] = self.mult[en.ghost_edge(x)];
            if g1 % r != 0 || g2 % r != 0 {
                return Err(Error::InvalidConfiguration(format!("ghost multiplicity at {x} not divisible by r")));
            }
            let m = &self.matchings[x];
            if m.len() != n as usize {
                return Err(Error::InvalidConfiguration(format!("matching at {x} has wrong size")));
            }
            let mut hit = vec![false; m.len()];
            for &j in m {
                if j as usize >= m.len() || hit[j as usize] {
                    return Err(Error::InvalidConfiguration(format!("matching at {x} is not a permutation")));
                }
                hit[j as usize] = true;
            }
        }
        Ok(())
    }
}

fn colour_total(g: &Graph, mult: &[[u32; 2]], x: usize, c: usize) -> u32 {
    MultiOccConfiguration::incident_enlarged(g, x).iter().map(|&e| mult[e][c]).sum()
}

/// Number of dimers of either colour at `x`; fails if the colours disagree.
pub fn local_time(g: &Graph, w: &MultiOccConfiguration, x: usize) -> Result<u32> {
    let (b, r) = (colour_total(g, &w.mult, x, 0), colour_total(g, &w.mult, x, 1));
    if b != r {
        return Err(Error::InvalidConfiguration(format!("vertex {x} has {b} blue and {r} red dimers")));
    }
    Ok(b)
}

/// Local time minus the red ghost multiplicity.
pub fn reduced_local_time(g: &Graph, w: &MultiOccConfiguration, x: usize) -> Result<u32> {
    let en = Enlarged::of(g);
    Ok(local_time(g, w, x)? - w.mult[en.ghost_edge(x)][1])
}

/// Source-edge multiplicities `[blue, red]` per base vertex.
pub fn source_vector(g: &Graph, w: &MultiOccConfiguration) -> Vec<[u32; 2]> {
    let en = Enlarged::of(g);
    (0..g.n_vertices()).map(|x| w.mult[en.source_edge(x)]).collect()
}

/// `nu(m) prod_x U(k_x) / n_x!`, the weight of one configuration with a fixed matching.
pub fn multiocc_weight<S: Scalar>(
    g: &Graph,
    w: &MultiOccConfiguration,
    params: &ModelParams,
    u: &WeightFunction,
) -> Result<S> {
    w.validate(g, params.r)?;
    let en = Enlarged::of(g);
    let beta = S::from_f64(params.beta);
    let bh = S::from_f64(params.beta * params.h);
    let mut acc = S::one();
    for c in 0..2 {
        for e in 0..g.n_edges() {
            let m = w.mult[e][c];
            acc = acc * beta.powu(m) / S::factorial(m);
        }
        for x in 0..g.n_vertices() {
            let m = w.mult[en.ghost_edge(x)][c] / params.r;
            acc = acc * bh.powu(m) / S::factorial(m);
        }
    }
    for x in 0..g.n_vertices() {
        let n = local_time(g, w, x)?;
        let k = reduced_local_time(g, w, x)?;
        acc = acc * u.at_scalar::<S>(k as i64) / S::factorial(n);
    }
    Ok(acc)
}

/// Vertex sets of the loops formed by the base-graph dimers and matchings.
/// Requires no ghost or source dimers.
pub fn multiocc_loops(g: &Graph, w: &MultiOccConfiguration) -> Result<Vec<Vec<usize>>> {
    let en = Enlarged::of(g);
    if (0..g.n_vertices()).any(|x| w.mult[en.ghost_edge(x)] != [0, 0] || w.mult[en.source_edge(x)] != [0, 0]) {
        return Err(Error::InvalidArgument("loop tracing needs a configuration on the base graph".into()));
    }
    // Instance lists per vertex: (edge, index).
    let n = g.n_vertices();
    let mut lists: Vec<[Vec<(usize, u32)>; 2]> = Vec::with_capacity(n);
    for x in 0..n {
        let mut inc = g.incident(x).to_vec();
        inc.sort_unstable();
        let mk = |c: usize| inc.iter().flat_map(|&e| (0..w.mult[e][c]).map(move |k| (e, k))).collect();
        lists.push([mk(0), mk(1)]);
    }
    let inverse: Vec<Vec<u32>> = w
        .matchings
        .iter()
        .map(|m| {
            let mut inv = vec![0; m.len()];
            for (i, &j) in m.iter().enumerate() {
                inv[j as usize] = i as u32;
            }
            inv
        })
        .collect();
    let pos = |x: usize, c: usize, inst: (usize, u32)| lists[x][c].iter().position(|&i| i == inst).unwrap();
    let mut visited = std::collections::HashSet::new();
    let mut loops = Vec::new();
    for x0 in 0..n {
        for &b0 in &lists[x0][0] {
            if g.edge(b0.0)[0] != x0 || visited.contains(&b0) {
                continue;
            }
            let mut verts = Vec::new();
            let (mut x, mut b) = (x0, b0);
            loop {
                visited.insert(b);
                verts.push(x);
                let i = pos(x, 0, b);
                let rinst = lists[x][1][w.matchings[x][i] as usize];
                let y = g.other_end(rinst.0, x);
                verts.push(y);
                let j = pos(y, 1, rinst);
                let b_next = lists[y][0][inverse[y][j] as usize];
                let z = g.other_end(b_next.0, y);
                if b_next == b0 && z == x0 {
                    break;
                }
                x = z;
                b = b_next;
            }
            verts.sort_unstable();
            verts.dedup();
            loops.push(verts);
        }
    }
    Ok(loops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn k2_weights() {
        let g = Graph::k2();
        let p = ModelParams { beta: 2.0, ..Default::default() };
        let w = MultiOccConfiguration::from_base(&g, &[[1, 1]]).unwrap();
        let val: f64 = multiocc_weight(&g, &w, &p, &WeightFunction::mdd()).unwrap();
        assert_eq!(val, 4.0);

        let p = ModelParams { beta: 1.0, ..Default::default() };
        let w = MultiOccConfiguration::from_base(&g, &[[2, 2]]).unwrap();
        let val: BigRational = multiocc_weight(&g, &w, &p, &WeightFunction::truncated_xy(3)).unwrap();
        assert_eq!(val, crate::numeric::ratio(1, 16));
        assert_eq!(local_time(&g, &w, 0).unwrap(), 2);
    }

    #[test]
    fn unbalanced_is_rejected() {
        let g = Graph::k2();
        let w = MultiOccConfiguration::from_base(&g, &[[1, 0]]).unwrap();
        assert!(local_time(&g, &w, 0).is_err());
    }

    #[test]
    fn loops_on_c4() {
        let g = Graph::cycle(4).unwrap();
        let w = MultiOccConfiguration::from_base(&g, &[[1, 0], [0, 1], [1, 0], [0, 1]]).unwrap();
        assert_eq!(multiocc_loops(&g, &w).unwrap(), vec![vec![0, 1, 2, 3]]);
        let w = MultiOccConfiguration::from_base(&g, &[[1, 1], [0, 0], [1, 1], [0, 0]]).unwrap();
        assert_eq!(multiocc_loops(&g, &w).unwrap().len(), 2);
    }

    #[test]
    fn json_round_trip() {
        let g = Graph::cycle(4).unwrap();
        let w = MultiOccConfiguration::from_base(&g, &[[1, 1], [0, 0], [1, 1], [0, 0]]).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        let back: MultiOccConfiguration = serde_json::from_str(&s).unwrap();
        assert_eq!(back, w);
    }
}
