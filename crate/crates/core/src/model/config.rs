use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Blue = 0,
    Red = 1,
}

impl Color {
    pub const BOTH: [Color; 2] = [Color::Blue, Color::Red];
    pub fn other(self) -> Color {
        match self {
            Color::Blue => Color::Red,
            Color::Red => Color::Blue,
        }
    }
    pub fn idx(self) -> usize {
        self as usize
    }
}

/// Sentinel for "no dimer of this colour".
pub const NONE: u32 = u32::MAX;

/// Monomer set plus a blue and a red dimer set, stored as edge ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MddConfiguration {
    pub monomers: Vec<usize>,
    pub blue: Vec<usize>,
    pub red: Vec<usize>,
}

/// Per-vertex view of a (possibly open) double-dimer configuration.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Occupancy {
    pub monomer: Vec<bool>,
    /// `partner[c][v]` is the edge carrying the colour-`c` dimer at `v`, or `NONE`.
    pub partner: [Vec<u32>; 2],
}

/// A closed loop, traversed from its smallest even vertex along blue first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, Color)>,
}

impl Loop {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

impl Occupancy {
    pub fn empty(n: usize) -> Occupancy {
        Occupancy { monomer: vec![false; n], partner: [vec![NONE; n], vec![NONE; n]] }
    }

    pub fn all_monomers(n: usize) -> Occupancy {
        Occupancy { monomer: vec![true; n], partner: [vec![NONE; n], vec![NONE; n]] }
    }

    /// Places colour-`c` dimers on `edges`, failing on overlaps.
    pub fn place(&mut self, g: &Graph, c: Color, edges: &[usize]) -> Result<()> {
        for &e in edges {
            if e >= g.n_edges() {
                return Err(Error::InvalidConfiguration(format!("edge {e} out of range")));
            }
            for v in g.edge(e) {
                if self.partner[c.idx()][v] != NONE {
                    return Err(Error::InvalidConfiguration(format!(
                        "vertex {v} covered twice by {c:?} dimers"
                    )));
                }
                self.partner[c.idx()][v] = e as u32;
            }
        }
        Ok(())
    }

    /// Validates a closed configuration: every vertex is a monomer or carries
    /// exactly one dimer of each colour.
    pub fn from_config(g: &Graph, cfg: &MddConfiguration) -> Result<Occupancy> {
        let n = g.n_vertices();
        let mut occ = Occupancy::empty(n);
        for &m in &cfg.monomers {
            if m >= n || occ.monomer[m] {
                return Err(Error::InvalidConfiguration(format!("bad monomer {m}")));
            }
            occ.monomer[m] = true;
        }
        occ.place(g, Color::Blue, &cfg.blue)?;
        occ.place(g, Color::Red, &cfg.red)?;
        for v in 0..n {
            let covered = [occ.partner[0][v] != NONE, occ.partner[1][v] != NONE];
            let ok = if occ.monomer[v] { covered == [false, false] } else { covered == [true, true] };
            if !ok {
                return Err(Error::InvalidConfiguration(format!("vertex {v} is not properly covered")));
            }
        }
        Ok(occ)
    }

    pub fn to_config(&self, g: &Graph) -> MddConfiguration {
        let mut cfg = MddConfiguration::default();
        for v in 0..g.n_vertices() {
            if self.monomer[v] {
                cfg.monomers.push(v);
            }
        }
        for c in Color::BOTH {
            let mut es: Vec<usize> = (0..g.n_vertices())
                .filter(|&v| self.partner[c.idx()][v] != NONE && g.is_even(v))
                .map(|v| self.partner[c.idx()][v] as usize)
                .collect();
            es.sort_unstable();
            match c {
                Color::Blue => cfg.blue = es,
                Color::Red => cfg.red = es,
            }
        }
        cfg
    }

    pub fn n_monomers(&self) -> usize {
        self.monomer.iter().filter(|&&m| m).count()
    }

    /// Decomposes the closed loops. Vertices lying on an open walk are skipped.
    pub fn loops(&self, g: &Graph) -> Vec<Loop> {
        let n = g.n_vertices();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for v0 in 0..n {
            if seen[v0] || self.monomer[v0] || !g.is_even(v0) {
                continue;
            }
            if let Some(l) = self.trace_from(g, v0) {
                for &v in &l.vertices {
                    seen[v] = true;
                }
                out.push(l);
            } else {
                seen[v0] = true;
            }
        }
        out
    }

    /// Traces the loop through even vertex `v0`, returning `None` if it is open.
    pub fn trace_from(&self, g: &Graph, v0: usize) -> Option<Loop> {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        let mut cur = v0;
        let mut c = Color::Blue;
        loop {
            let e = self.partner[c.idx()][cur];
            if e == NONE {
                return None;
            }
            vertices.push(cur);
            edges.push((e as usize, c));
            cur = g.other_end(e as usize, cur);
            c = c.other();
            if cur == v0 && c == Color::Blue {
                break;
            }
        }
        Some(Loop { vertices, edges })
    }

    pub fn n_loops(&self, g: &Graph) -> usize {
        self.loops(g).len()
    }

    /// Length of the loop through `v` (0 if `v` is a monomer or on an open walk).
    pub fn loop_length_at(&self, g: &Graph, v: usize) -> usize {
        if self.monomer[v] {
            return 0;
        }
        let start = if g.is_even(v) {
            v
        } else {
            let e = self.partner[0][v];
            if e == NONE {
                return 0;
            }
            g.other_end(e as usize, v)
        };
        self.trace_from(g, start).map_or(0, |l| l.len())
    }
}

impl MddConfiguration {
    pub fn validate(&self, g: &Graph) -> Result<()> {
        Occupancy::from_config(g, self).map(|_| ())
    }
    pub fn loops(&self, g: &Graph) -> Result<Vec<Loop>> {
        Ok(Occupancy::from_config(g, self)?.loops(g))
    }
}

/// `rho^|M| N^{#loops}`.
pub fn mdd_weight(g: &Graph, cfg: &MddConfiguration, rho: f64, n_colors: u32) -> Result<f64> {
    let occ = Occupancy::from_config(g, cfg)?;
    Ok(rho.powi(occ.n_monomers() as i32) * (n_colors as f64).powi(occ.n_loops(g) as i32))
}

/// A permutation of the vertex set whose non-trivial cycles follow edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Permutation {
    pub image: Vec<usize>,
}

impl Permutation {
    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.image.len()).filter(|&x| self.image[x] == x).collect()
    }
    /// Number of cycles of length at least two.
    pub fn n_cycles(&self) -> usize {
        let mut seen = vec![false; self.image.len()];
        let mut count = 0;
        for x in 0..self.image.len() {
            if seen[x] || self.image[x] == x {
                continue;
            }
            count += 1;
            let mut y = x;
            while !seen[y] {
                seen[y] = true;
                y = self.image[y];
            }
        }
        count
    }
    pub fn weight(&self, rho: f64, n_colors: u32) -> f64 {
        rho.powi(self.fixed_points().len() as i32) * (n_colors as f64).powi(self.n_cycles() as i32)
    }
}

fn require_simple(g: &Graph) -> Result<()> {
    if g.is_simple() {
        Ok(())
    } else {
        Err(Error::InvalidArgument("the permutation bijection needs a simple graph".into()))
    }
}

/// Monomers become fixed points; along each loop an even vertex maps across
/// its blue dimer and an odd vertex across its red dimer.
pub fn to_permutation(g: &Graph, cfg: &MddConfiguration) -> Result<Permutation> {
    require_simple(g)?;
    let occ = Occupancy::from_config(g, cfg)?;
    let mut image: Vec<usize> = (0..g.n_vertices()).collect();
    for v in 0..g.n_vertices() {
        if !occ.monomer[v] {
            let c = if g.is_even(v) { Color::Blue } else { Color::Red };
            image[v] = g.other_end(occ.partner[c.idx()][v] as usize, v);
        }
    }
    Ok(Permutation { image })
}

pub fn from_permutation(g: &Graph, p: &Permutation) -> Result<MddConfiguration> {
    require_simple(g)?;
    let n = g.n_vertices();
    if p.image.len() != n {
        return Err(Error::InvalidConfiguration("permutation has wrong length".into()));
    }
    let mut hit = vec![false; n];
    for &y in &p.image {
        if y >= n || hit[y] {
            return Err(Error::InvalidConfiguration("not a permutation".into()));
        }
        hit[y] = true;
    }
    let mut cfg = MddConfiguration::default();
    for x in 0..n {
        let y = p.image[x];
        if y == x {
            cfg.monomers.push(x);
            continue;
        }
        let e = *g
            .edges_between(x, y)
            .first()
            .ok_or_else(|| Error::InvalidConfiguration(format!("{x} -> {y} is not an edge")))?;
        if g.is_even(x) {
            cfg.blue.push(e);
        } else {
            cfg.red.push(e);
        }
    }
    cfg.blue.sort_unstable();
    cfg.red.sort_unstable();
    cfg.validate(g)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c4_examples() {
        let g = Graph::cycle(4).unwrap();
        let two_loops = MddConfiguration { monomers: vec![], blue: vec![0, 2], red: vec![0, 2] };
        let loops = two_loops.loops(&g).unwrap();
        assert_eq!(loops.len(), 2);
        assert!(loops.iter().all(|l| l.len() == 2));
        let one_loop = MddConfiguration { monomers: vec![], blue: vec![0, 2], red: vec![1, 3] };
        assert_eq!(one_loop.loops(&g).unwrap()[0].len(), 4);
        let mixed = MddConfiguration { monomers: vec![0, 1], blue: vec![2], red: vec![2] };
        assert_eq!(mdd_weight(&g, &mixed, 2.0, 3).unwrap(), 12.0);
    }

    #[test]
    fn rejects_bad_covers() {
        let g = Graph::cycle(4).unwrap();
        let cfg = MddConfiguration { monomers: vec![0], blue: vec![0, 2], red: vec![0, 2] };
        assert!(cfg.validate(&g).is_err());
        let cfg = MddConfiguration { monomers: vec![], blue: vec![0], red: vec![0, 2] };
        assert!(cfg.validate(&g).is_err());
    }

    #[test]
    fn permutation_round_trip_k2() {
        let g = Graph::k2();
        let cfg = MddConfiguration { monomers: vec![], blue: vec![0], red: vec![0] };
        let p = to_permutation(&g, &cfg).unwrap();
        assert_eq!(p.image, vec![1, 0]);
        assert_eq!(from_permutation(&g, &p).unwrap(), cfg);
        let multi = Graph::slab_torus(2, 1).unwrap();
        assert!(to_permutation(&multi, &MddConfiguration { monomers: vec![0, 1, 2, 3], ..Default::default() })
            .is_err());
    }
}
