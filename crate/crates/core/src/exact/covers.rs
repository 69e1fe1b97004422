//! Dimer-cover counting and listing by backtracking over vertices in index order.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Graph;
use crate::model::NONE;

/// Largest vertex count for which covers are listed explicitly.
pub const LIST_BUDGET: usize = 24;
/// Largest vertex count for memoised counting (vertex masks are `u64`).
pub const COUNT_BUDGET: usize = 64;

fn check(g: &Graph, limit: usize, what: &str) -> Result<()> {
    if g.n_vertices() > limit {
        return Err(Error::BudgetExceeded { what: format!("{what} on {} vertices", g.n_vertices()), limit: limit as u64 });
    }
    Ok(())
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Counts perfect matchings of `g` with the vertices in `removed` deleted.
/// Parallel edges count separately.
pub fn count_covers(g: &Graph, removed: u64) -> Result<u128> {
    check(g, COUNT_BUDGET, "cover counting")?;
    let mut memo = HashMap::new();
    Ok(count_rec(g, removed & full_mask(g.n_vertices()), &mut memo))
}

fn count_rec(g: &Graph, used: u64, memo: &mut HashMap<u64, u128>) -> u128 {
    let full = full_mask(g.n_vertices());
    if used == full {
        return 1;
    }
    if let Some(&c) = memo.get(&used) {
        return c;
    }
    let v = (!used).trailing_zeros() as usize;
    let mut total = 0;
    for &e in g.incident(v) {
        let w = g.other_end(e, v);
        if used & (1 << w) == 0 {
            total += count_rec(g, used | (1 << v) | (1 << w), memo);
        }
    }
    memo.insert(used, total);
    total
}

/// `|D_G|`, parallelised over the branches at the first vertex.
pub fn enum_dimer_covers(g: &Graph) -> Result<u128> {
    check(g, COUNT_BUDGET, "cover counting")?;
    if g.n_vertices() % 2 == 1 {
        return Ok(0);
    }
    let v = 0;
    let total = g
        .incident(v)
        .par_iter()
        .map(|&e| {
            let w = g.other_end(e, v);
            let mut memo = HashMap::new();
            count_rec(g, (1 << v) | (1 << w), &mut memo)
        })
        .sum();
    Ok(total)
}

/// Lists the covers of `g` minus `removed`, each as a per-vertex partner-edge
/// array (`NONE` on removed vertices).
pub fn list_covers(g: &Graph, removed: u64) -> Result<Vec<Vec<u32>>> {
    check(g, LIST_BUDGET, "cover listing")?;
    let mut out = Vec::new();
    let mut partner = vec![NONE; g.n_vertices()];
    list_rec(g, removed & full_mask(g.n_vertices()), &mut partner, &mut out);
    Ok(out)
}

fn list_rec(g: &Graph, used: u64, partner: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    let full = full_mask(g.n_vertices());
    if used == full {
        out.push(partner.clone());
        return;
    }
    let v = (!used).trailing_zeros() as usize;
    for &e in g.incident(v) {
        let w = g.other_end(e, v);
        if used & (1 << w) == 0 {
            partner[v] = e as u32;
            partner[w] = e as u32;
            list_rec(g, used | (1 << v) | (1 << w), partner, out);
            partner[v] = NONE;
            partner[w] = NONE;
        }
    }
}

/// Edge-id lists of all covers of `g`.
pub fn cover_edge_sets(g: &Graph) -> Result<Vec<Vec<usize>>> {
    Ok(list_covers(g, 0)?
        .into_iter()
        .map(|p| {
            let mut es: Vec<usize> = (0..g.n_vertices()).filter(|&v| g.is_even(v)).map(|v| p[v] as usize).collect();
            es.sort_unstable();
            es
        })
        .collect())
}

/// Monomer-monomer correlation `|D(G - x - y)| / |D(G)|`.
pub fn monomer_correlation(g: &Graph, x: usize, y: usize) -> Result<f64> {
    let all = count_covers(g, 0)?;
    if all == 0 {
        return Err(Error::ZeroPartition(format!("{} has no dimer cover", g.name())));
    }
    if x == y {
        return Ok(0.0);
    }
    Ok(count_covers(g, (1 << x) | (1 << y))? as f64 / all as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        assert_eq!(enum_dimer_covers(&Graph::cycle(4).unwrap()).unwrap(), 2);
        assert_eq!(enum_dimer_covers(&Graph::open_grid(2, 3).unwrap()).unwrap(), 3);
        assert_eq!(enum_dimer_covers(&Graph::path(5).unwrap()).unwrap(), 0);
        assert_eq!(enum_dimer_covers(&Graph::open_grid(4, 4).unwrap()).unwrap(), 36);
    }

    #[test]
    fn listing_matches_counting() {
        for g in [Graph::slab_torus(4, 1).unwrap(), Graph::slab_torus(2, 2).unwrap(), Graph::open_grid(3, 4).unwrap()] {
            assert_eq!(list_covers(&g, 0).unwrap().len() as u128, enum_dimer_covers(&g).unwrap());
        }
    }

    #[test]
    fn c4_monomer_correlation() {
        let g = Graph::cycle(4).unwrap();
        assert_eq!(monomer_correlation(&g, 0, 1).unwrap(), 0.5);
        assert_eq!(monomer_correlation(&g, 0, 2).unwrap(), 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let g = Graph::slab_torus(6, 1).unwrap();
        assert!(matches!(list_covers(&g, 0), Err(Error::BudgetExceeded { .. })));
    }
}
