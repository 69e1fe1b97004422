//! Exact oracles: exhaustive enumeration, Pfaffians and path sums.

pub mod covers;
pub mod fkt;
pub mod mdd;
pub mod path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lattice::Graph;
use crate::model::{ModelParams, WeightFunction};

pub use covers::{count_covers, enum_dimer_covers, list_covers, monomer_correlation};
pub use fkt::fkt_count;
pub use mdd::{mdd_enumerate, mdd_expectations, mdd_partition, mdd_states, mdd_walk_counts, MddCounts, MddExpectations, Poly2};
pub use path::{connection_probability, LocalConstraint, PathSum, Sector};

/// One entry of a two-point table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPointEntry {
    pub x: usize,
    pub y: usize,
    pub value: f64,
    pub err: f64,
}

/// Two-point function from a fixed base point, keyed by vertex pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPointTable {
    pub kind: String,
    pub graph: String,
    pub entries: Vec<TwoPointEntry>,
}

impl TwoPointTable {
    pub fn value(&self, x: usize, y: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.x == x && e.y == y).map(|e| e.value)
    }
}

fn table(g: &Graph, kind: &str, values: Vec<f64>) -> TwoPointTable {
    let o = g.origin();
    TwoPointTable {
        kind: kind.into(),
        graph: g.name().into(),
        entries: values.into_iter().enumerate().map(|(y, value)| TwoPointEntry { x: o, y, value, err: 0.0 }).collect(),
    }
}

/// Monomer-monomer correlation from the origin.
pub fn monomer_table(g: &Graph) -> Result<TwoPointTable> {
    let vals = (0..g.n_vertices()).map(|y| monomer_correlation(g, g.origin(), y)).collect::<Result<_>>()?;
    Ok(table(g, "monomer_correlation", vals))
}

/// Walk correlation of the monomer double-dimer model from the origin.
pub fn mdd_walk_table(g: &Graph, rho: f64, n_colors: u32) -> Result<TwoPointTable> {
    let e = mdd_expectations(g, rho, n_colors)?;
    Ok(table(g, "mdd_walk", e.walk))
}

/// Single-walk two-point function `mu(x -> y) / Z^path` at `h = 0`.
pub fn g1_exact(g: &Graph, u: &WeightFunction, params: &ModelParams, x: usize, y: usize) -> Result<f64> {
    let ps = PathSum::new(g, u, params.with_h(0.0))?;
    ps.ratio(&Sector::walk(g, x, y))
}

pub fn g1_table(g: &Graph, u: &WeightFunction, params: &ModelParams) -> Result<TwoPointTable> {
    let vals = (0..g.n_vertices()).map(|y| g1_exact(g, u, params, g.origin(), y)).collect::<Result<_>>()?;
    Ok(table(g, "single_walk", vals))
}

/// Loop-connection two-point function `P(x <-> y)` at `h = 0`.
pub fn g2_exact(g: &Graph, u: &WeightFunction, params: &ModelParams, x: usize, y: usize) -> Result<f64> {
    connection_probability(g, u, params, x, y)
}

pub fn g2_table(g: &Graph, u: &WeightFunction, params: &ModelParams) -> Result<TwoPointTable> {
    let vals = (0..g.n_vertices()).map(|y| g2_exact(g, u, params, g.origin(), y)).collect::<Result<_>>()?;
    Ok(table(g, "loop_connection", vals))
}

/// `Z^path` in floating point.
pub fn zpath_exact(g: &Graph, u: &WeightFunction, params: &ModelParams) -> Result<f64> {
    PathSum::new(g, u, *params)?.zpath()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c4_dimer_walk_equals_monomer_correlation() {
        let g = Graph::cycle(4).unwrap();
        let p = ModelParams { beta: 1.0, ..Default::default() };
        let v = g1_exact(&g, &WeightFunction::dimer(), &p, 0, 1).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert!((monomer_correlation(&g, 0, 1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn single_walk_is_rescaled_mdd_walk() {
        // Each walk uses one dimer fewer than a closed configuration, so the
        // path two-point function at beta equals rho times the walk
        // correlation at rho = 1 / beta.
        let g = Graph::cycle(4).unwrap();
        for beta in [0.5, 2.0] {
            let p = ModelParams { beta, ..Default::default() };
            let rho = 1.0 / beta;
            let w = mdd_walk_table(&g, rho, 1).unwrap();
            for y in 0..4 {
                let lhs = g1_exact(&g, &WeightFunction::mdd(), &p, 0, y).unwrap();
                assert!((lhs - rho * w.value(0, y).unwrap()).abs() < 1e-13, "beta {beta} y {y}");
            }
        }
    }

    #[test]
    fn loop_connection_matches_mdd_enumeration() {
        let g = Graph::cycle(4).unwrap();
        let p = ModelParams { beta: 0.5, ..Default::default() };
        let e = mdd_expectations(&g, 2.0, 1).unwrap();
        for y in 0..4 {
            let v = g2_exact(&g, &WeightFunction::mdd(), &p, 0, y).unwrap();
            assert!((v - e.connected[y]).abs() < 1e-13);
        }
    }
}
