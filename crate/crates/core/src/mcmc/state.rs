//! Extended configuration space of the worm sampler: closed monomer
//! double-dimer configurations plus configurations with one open walk.

use crate::error::{Error, Result};
use crate::lattice::Graph;
use crate::model::{Color, MddConfiguration, Occupancy, NONE};

/// Elementary change to a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    AddDimer(Color, usize),
    RemoveDimer(Color, usize),
    SetMonomer(usize, bool),
}

/// A configuration together with its missing colour slots.
///
/// A slot `(v, c)` is a non-monomer vertex `v` without a colour-`c` dimer.
/// Closed configurations have no slots; an open walk has two, either at two
/// distinct endpoints or both at a single empty vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WormState {
    pub occ: Occupancy,
    slots: Vec<(usize, Color)>,
}

impl WormState {
    pub fn all_monomers(n: usize) -> WormState {
        WormState { occ: Occupancy::all_monomers(n), slots: Vec::new() }
    }

    /// Validates `occ` as a closed or single-walk configuration.
    pub fn from_occupancy(g: &Graph, occ: Occupancy) -> Result<WormState> {
        let n = g.n_vertices();
        if occ.monomer.len() != n || occ.partner.iter().any(|p| p.len() != n) {
            return Err(Error::InvalidConfiguration("occupancy does not match the graph".into()));
        }
        let mut slots = Vec::new();
        for v in 0..n {
            for c in Color::BOTH {
                let e = occ.partner[c.idx()][v];
                if occ.monomer[v] {
                    if e != NONE {
                        return Err(Error::InvalidConfiguration(format!("monomer {v} carries a dimer")));
                    }
                    continue;
                }
                if e == NONE {
                    slots.push((v, c));
                } else {
                    let e = e as usize;
                    if e >= g.n_edges() || !g.edge(e).contains(&v) || occ.partner[c.idx()][g.other_end(e, v)] != e as u32 {
                        return Err(Error::InvalidConfiguration(format!("inconsistent {c:?} dimer at {v}")));
                    }
                }
            }
        }
        if slots.len() != 0 && slots.len() != 2 {
            return Err(Error::InvalidConfiguration(format!("{} missing dimer slots", slots.len())));
        }
        Ok(WormState { occ, slots })
    }

    pub fn from_config(g: &Graph, cfg: &MddConfiguration) -> Result<WormState> {
        WormState::from_occupancy(g, Occupancy::from_config(g, cfg)?)
    }

    pub fn is_closed(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[(usize, Color)] {
        &self.slots
    }

    /// Walk endpoints; equal for an empty vertex.
    pub fn endpoints(&self) -> Option<(usize, usize)> {
        match self.slots.as_slice() {
            [(a, _), (b, _)] => Some((*a, *b)),
            _ => None,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.occ.monomer.len()
    }

    pub fn partner(&self, c: Color, v: usize) -> Option<usize> {
        let e = self.occ.partner[c.idx()][v];
        (e != NONE).then_some(e as usize)
    }

    pub fn is_monomer(&self, v: usize) -> bool {
        self.occ.monomer[v]
    }

    /// Applies `ops` in order and refreshes the slots of the touched vertices.
    pub fn apply(&mut self, g: &Graph, ops: &[Op]) {
        let mut touched: Vec<usize> = Vec::with_capacity(2 * ops.len());
        for &op in ops {
            match op {
                Op::AddDimer(c, e) => {
                    for v in g.edge(e) {
                        debug_assert_eq!(self.occ.partner[c.idx()][v], NONE);
                        self.occ.partner[c.idx()][v] = e as u32;
                        touched.push(v);
                    }
                }
                Op::RemoveDimer(c, e) => {
                    for v in g.edge(e) {
                        debug_assert_eq!(self.occ.partner[c.idx()][v], e as u32);
                        self.occ.partner[c.idx()][v] = NONE;
                        touched.push(v);
                    }
                }
                Op::SetMonomer(v, m) => {
                    self.occ.monomer[v] = m;
                    touched.push(v);
                }
            }
        }
        self.slots.retain(|(v, _)| !touched.contains(v));
        touched.sort_unstable();
        touched.dedup();
        for v in touched {
            if !self.occ.monomer[v] {
                for c in Color::BOTH {
                    if self.occ.partner[c.idx()][v] == NONE {
                        self.slots.push((v, c));
                    }
                }
            }
        }
        self.slots.sort_unstable_by_key(|&(v, c)| (v, c.idx()));
    }

    /// Reverses [`WormState::apply`].
    pub fn undo(&mut self, g: &Graph, ops: &[Op]) {
        let inverse: Vec<Op> = ops
            .iter()
            .rev()
            .map(|&op| match op {
                Op::AddDimer(c, e) => Op::RemoveDimer(c, e),
                Op::RemoveDimer(c, e) => Op::AddDimer(c, e),
                Op::SetMonomer(v, m) => Op::SetMonomer(v, !m),
            })
            .collect();
        self.apply(g, &inverse);
    }

    /// Follows alternating dimers from `v`, starting with colour `c`. Returns
    /// the number of vertices of the closed loop, or `None` on an open walk.
    pub fn closed_loop_len(&self, g: &Graph, v: usize, c: Color) -> Option<usize> {
        let mut cur = v;
        let mut col = c;
        let mut len = 0;
        loop {
            let e = self.partner(col, cur)?;
            len += 1;
            cur = g.other_end(e, cur);
            col = col.other();
            if cur == v && col == c {
                return Some(len);
            }
        }
    }

    /// Vertices of the closed loop through `v` (empty if `v` is a monomer or on the walk).
    pub fn loop_vertices(&self, g: &Graph, v: usize) -> Vec<usize> {
        if self.occ.monomer[v] || self.closed_loop_len(g, v, Color::Blue).is_none() {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut cur = v;
        let mut col = Color::Blue;
        loop {
            out.push(cur);
            let e = self.partner(col, cur).expect("closed loop");
            cur = g.other_end(e, cur);
            col = col.other();
            if cur == v && col == Color::Blue {
                return out;
            }
        }
    }

    /// Number of closed loops, two-step loops included.
    pub fn n_closed_loops(&self, g: &Graph) -> usize {
        let n = self.n_vertices();
        let mut seen = vec![false; n];
        let mut count = 0;
        for v in 0..n {
            if seen[v] {
                continue;
            }
            let vs = self.loop_vertices(g, v);
            if !vs.is_empty() {
                count += 1;
                for u in vs {
                    seen[u] = true;
                }
            }
        }
        count
    }

    /// Bit key: blue edges, red edges, monomers.
    pub fn key(&self, g: &Graph) -> StateKey {
        let m = g.n_edges();
        let n = self.n_vertices();
        let mut k = StateKey::zero(2 * m + n);
        for v in 0..n {
            if self.occ.monomer[v] {
                k.set(2 * m + v);
            }
            for c in Color::BOTH {
                if let Some(e) = self.partner(c, v) {
                    k.set(c.idx() * m + e);
                }
            }
        }
        k
    }

    pub fn from_key(g: &Graph, key: &StateKey) -> Result<WormState> {
        let m = g.n_edges();
        let n = g.n_vertices();
        let mut occ = Occupancy::empty(n);
        for v in 0..n {
            occ.monomer[v] = key.get(2 * m + v);
        }
        for c in Color::BOTH {
            let edges: Vec<usize> = (0..m).filter(|&e| key.get(c.idx() * m + e)).collect();
            occ.place(g, c, &edges)?;
        }
        WormState::from_occupancy(g, occ)
    }
}

/// Packed bit set identifying a configuration.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateKey(pub Vec<u64>);

impl StateKey {
    pub fn zero(bits: usize) -> StateKey {
        StateKey(vec![0; bits.div_ceil(64)])
    }
    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    pub fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }
    pub fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    /// Key after applying `ops` to the configuration with this key.
    pub fn after(&self, g: &Graph, ops: &[Op]) -> StateKey {
        let m = g.n_edges();
        let mut k = self.clone();
        for &op in ops {
            match op {
                Op::AddDimer(c, e) | Op::RemoveDimer(c, e) => k.flip(c.idx() * m + e),
                Op::SetMonomer(v, _) => k.flip(2 * m + v),
            }
        }
        k
    }
}

/// Any perfect matching of `g`, by augmenting paths.
pub fn perfect_matching(g: &Graph) -> Result<Vec<usize>> {
    let n = g.n_vertices();
    let mut mate: Vec<Option<usize>> = vec![None; n];
    fn augment(g: &Graph, v: usize, mate: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &e in g.incident(v) {
            let u = g.other_end(e, v);
            if seen[u] {
                continue;
            }
            seen[u] = true;
            let free = match mate[u] {
                None => true,
                Some(f) => augment(g, g.other_end(f, u), mate, seen),
            };
            if free {
                mate[u] = Some(e);
                mate[v] = Some(e);
                return true;
            }
        }
        false
    }
    for v in (0..n).filter(|&v| g.is_even(v)) {
        let mut seen = vec![false; n];
        if !augment(g, v, &mut mate, &mut seen) {
            return Err(Error::InvalidArgument(format!("{} has no dimer cover", g.name())));
        }
    }
    let mut edges: Vec<usize> = (0..n).filter(|&v| g.is_even(v)).map(|v| mate[v].expect("matched")).collect();
    if edges.len() * 2 != n {
        return Err(Error::InvalidArgument(format!("{} has no dimer cover", g.name())));
    }
    edges.sort_unstable();
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_and_keys() {
        let g = Graph::slab_torus(4, 1).unwrap();
        let d = perfect_matching(&g).unwrap();
        assert_eq!(d.len(), 8);
        let cfg = MddConfiguration { monomers: vec![], blue: d.clone(), red: d };
        let s = WormState::from_config(&g, &cfg).unwrap();
        assert!(s.is_closed());
        let back = WormState::from_key(&g, &s.key(&g)).unwrap();
        assert_eq!(back, s);
        assert!(perfect_matching(&Graph::path(3).unwrap()).is_err());
    }

    #[test]
    fn opening_a_loop_creates_two_slots() {
        let g = Graph::cycle(4).unwrap();
        let mut s = WormState::all_monomers(4);
        let ops = [Op::SetMonomer(0, false), Op::SetMonomer(1, false), Op::AddDimer(Color::Blue, 0), Op::AddDimer(Color::Red, 0)];
        s.apply(&g, &ops);
        assert!(s.is_closed());
        assert_eq!(s.closed_loop_len(&g, 0, Color::Blue), Some(2));
        s.apply(&g, &[Op::RemoveDimer(Color::Red, 0)]);
        assert_eq!(s.slots(), &[(0, Color::Red), (1, Color::Red)]);
        s.undo(&g, &[Op::RemoveDimer(Color::Red, 0)]);
        assert!(s.is_closed());
        s.undo(&g, &ops);
        assert_eq!(s, WormState::all_monomers(4));
    }
}
