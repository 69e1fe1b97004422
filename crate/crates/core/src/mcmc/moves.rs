//! Metropolis-Hastings moves on the extended configuration space.
//!
//! A proposal is driven by a sequence of uniform draws `draw(k) in 0..k`, so
//! the same code samples a move and, by running over every draw sequence,
//! enumerates the exact transition kernel.

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::lattice::Graph;
use crate::mcmc::state::{Op, WormState};
use crate::model::Color;
use crate::numeric::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    /// Two monomers on an edge and a two-step loop on that edge.
    Toggle,
    /// One colour rotated around a 2- or 4-cycle.
    Plaquette,
    /// Colours swapped along a whole loop.
    LoopSwap,
    /// A monomer exchanged with a neighbouring two-step loop.
    Slide,
    /// One colour shifted along a non-contractible line.
    Winding,
    /// A dimer removed from a loop, or a monomer emptied.
    Open,
    /// Inverse of `Open`.
    Close,
    /// A walk endpoint moved across an edge.
    Shift,
    /// A walk endpoint turned into a monomer.
    Retract,
}

impl MoveKind {
    pub const ALL: [MoveKind; 9] = [
        MoveKind::Toggle,
        MoveKind::Plaquette,
        MoveKind::LoopSwap,
        MoveKind::Slide,
        MoveKind::Winding,
        MoveKind::Open,
        MoveKind::Close,
        MoveKind::Shift,
        MoveKind::Retract,
    ];
    /// Moves that keep a closed configuration closed.
    pub const CLOSED: [MoveKind; 5] =
        [MoveKind::Toggle, MoveKind::Plaquette, MoveKind::LoopSwap, MoveKind::Slide, MoveKind::Winding];

    pub fn name(self) -> &'static str {
        match self {
            MoveKind::Toggle => "toggle",
            MoveKind::Plaquette => "plaquette",
            MoveKind::LoopSwap => "loop_swap",
            MoveKind::Slide => "slide",
            MoveKind::Winding => "winding",
            MoveKind::Open => "open",
            MoveKind::Close => "close",
            MoveKind::Shift => "shift",
            MoveKind::Retract => "retract",
        }
    }
}

/// Integer selection weights of the move kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveMix {
    pub toggle: u32,
    pub plaquette: u32,
    pub loop_swap: u32,
    pub slide: u32,
    pub winding: u32,
    pub open: u32,
    pub close: u32,
    pub shift: u32,
    pub retract: u32,
}

impl Default for MoveMix {
    fn default() -> Self {
        MoveMix { toggle: 2, plaquette: 4, loop_swap: 1, slide: 2, winding: 1, open: 1, close: 1, shift: 4, retract: 1 }
    }
}

impl MoveMix {
    /// Closed-sector moves only.
    pub fn closed() -> MoveMix {
        MoveMix { open: 0, close: 0, shift: 0, retract: 0, ..Default::default() }
    }

    /// Cycle rotations only, for independent dimer covers.
    pub fn covers_only() -> MoveMix {
        MoveMix { toggle: 0, plaquette: 4, loop_swap: 0, slide: 0, winding: 1, open: 0, close: 0, shift: 0, retract: 0 }
    }

    pub fn weight(&self, k: MoveKind) -> u32 {
        match k {
            MoveKind::Toggle => self.toggle,
            MoveKind::Plaquette => self.plaquette,
            MoveKind::LoopSwap => self.loop_swap,
            MoveKind::Slide => self.slide,
            MoveKind::Winding => self.winding,
            MoveKind::Open => self.open,
            MoveKind::Close => self.close,
            MoveKind::Shift => self.shift,
            MoveKind::Retract => self.retract,
        }
    }

    pub fn total(&self) -> u32 {
        MoveKind::ALL.iter().map(|&k| self.weight(k)).sum()
    }

    /// Worm moves come in pairs; each needs its partner.
    pub fn validate(&self) -> crate::Result<()> {
        if self.total() == 0 {
            return crate::error::invalid("move mix has zero total weight");
        }
        let pairs = [(self.open, self.close), (self.shift, self.retract)];
        if pairs.iter().any(|&(a, b)| (a == 0) != (b == 0)) || (self.shift > 0) != (self.open > 0) {
            return crate::error::invalid("open, close, shift and retract must be enabled together");
        }
        Ok(())
    }
}

/// Acceptance data of a proposal: the target ratio is
/// `rho^rho_exp N^n_exp C^c_exp`, times the proposal ratio `hastings`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Proposal {
    pub kind: MoveKind,
    pub rho_exp: i32,
    pub n_exp: i32,
    pub c_exp: i32,
    pub hastings: (u64, u64),
}

impl Proposal {
    fn new(kind: MoveKind) -> Proposal {
        Proposal { kind, rho_exp: 0, n_exp: 0, c_exp: 0, hastings: (1, 1) }
    }

    /// Metropolis-Hastings acceptance probability.
    pub fn acceptance(&self, rho: f64, n_colors: f64, worm: f64) -> f64 {
        let r = rho.powi(self.rho_exp) * n_colors.powi(self.n_exp) * worm.powi(self.c_exp) * self.hastings.0 as f64
            / self.hastings.1 as f64;
        r.min(1.0)
    }

    /// Exact acceptance probability.
    pub fn acceptance_exact(&self, rho: &BigRational, n_colors: &BigRational, worm: &BigRational) -> BigRational {
        let pow = |x: &BigRational, e: i32| {
            if e >= 0 {
                Scalar::powu(x, e as u32)
            } else {
                BigRational::one() / Scalar::powu(x, e.unsigned_abs())
            }
        };
        let r = pow(rho, self.rho_exp)
            * pow(n_colors, self.n_exp)
            * pow(worm, self.c_exp)
            * <BigRational as Scalar>::from_u128(self.hastings.0 as u128)
            / <BigRational as Scalar>::from_u128(self.hastings.1 as u128);
        if r > BigRational::one() {
            BigRational::one()
        } else {
            r
        }
    }
}

/// Alternating cycle `v0 e0 v1 e1 ...` of even length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

/// All 2-cycles (parallel edge pairs) and 4-cycles on distinct vertices.
pub fn short_cycles(g: &Graph) -> Vec<Cycle> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for e0 in 0..g.n_edges() {
        let [a, b] = g.edge(e0);
        for e1 in g.edges_between(a, b) {
            if e1 > e0 {
                out.push(Cycle { vertices: vec![a, b], edges: vec![e0, e1] });
            }
        }
    }
    for v0 in 0..g.n_vertices() {
        for &e0 in g.incident(v0) {
            let v1 = g.other_end(e0, v0);
            for &e1 in g.incident(v1) {
                let v2 = g.other_end(e1, v1);
                if v2 == v0 || v2 == v1 {
                    continue;
                }
                for &e2 in g.incident(v2) {
                    let v3 = g.other_end(e2, v2);
                    if v3 == v0 || v3 == v1 || v3 == v2 {
                        continue;
                    }
                    for &e3 in g.incident(v3) {
                        if g.other_end(e3, v3) != v0 {
                            continue;
                        }
                        let mut key = [e0, e1, e2, e3];
                        key.sort_unstable();
                        if seen.insert(key) {
                            out.push(Cycle { vertices: vec![v0, v1, v2, v3], edges: vec![e0, e1, e2, e3] });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Non-contractible cycles of a torus: straight lines of length at least 4
/// along each axis, and staircases alternating steps along two axes of equal
/// size. Shifting a colour along them changes winding sectors.
pub fn winding_lines(g: &Graph) -> Vec<Cycle> {
    let (Some(dims), Some(coords)) = (g.torus(), g.coords()) else {
        return Vec::new();
    };
    let sizes = dims.sizes();
    let walk = |start: usize, steps: &[[i64; 3]]| -> Cycle {
        let mut vertices = Vec::with_capacity(steps.len());
        let mut edges = Vec::with_capacity(steps.len());
        let mut v = start;
        for d in steps {
            let c = coords[v];
            let w = g.vertex_at([c[0] + d[0], c[1] + d[1], c[2] + d[2]]).expect("torus vertex");
            vertices.push(v);
            edges.push(g.edges_between(v, w)[0]);
            v = w;
        }
        Cycle { vertices, edges }
    };
    let unit = |axis: usize, sign: i64| {
        let mut d = [0i64; 3];
        d[axis] = sign;
        d
    };
    let mut out = Vec::new();
    for axis in 0..3 {
        let len = sizes[axis];
        if len < 4 {
            continue;
        }
        let steps = vec![unit(axis, 1); len];
        for start in (0..g.n_vertices()).filter(|&v| coords[v][axis] == 0) {
            out.push(walk(start, &steps));
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for a in 0..3 {
        for b in a + 1..3 {
            if sizes[a] != sizes[b] || sizes[a] < 4 {
                continue;
            }
            for sign in [1, -1] {
                let steps: Vec<[i64; 3]> =
                    (0..2 * sizes[a]).map(|i| if i % 2 == 0 { unit(a, 1) } else { unit(b, sign) }).collect();
                for start in 0..g.n_vertices() {
                    let cyc = walk(start, &steps);
                    let mut key = cyc.edges.clone();
                    key.sort_unstable();
                    if seen.insert(key) {
                        out.push(cyc);
                    }
                }
            }
        }
    }
    out
}

/// Move machinery for one graph.
#[derive(Clone, Debug)]
pub struct MoveSet<'a> {
    pub g: &'a Graph,
    pub mix: MoveMix,
    pub cycles: Vec<Cycle>,
    pub lines: Vec<Cycle>,
    /// Scratch stamps for loop counting.
    stamp: Vec<u32>,
    generation: u32,
    /// Changes of the last proposal.
    pub ops: Vec<Op>,
    /// When false, cycle moves skip the loop count and report `n_exp = 0`.
    pub count_loops: bool,
}

impl<'a> MoveSet<'a> {
    pub fn new(g: &'a Graph, mix: MoveMix) -> MoveSet<'a> {
        MoveSet {
            g,
            mix,
            cycles: short_cycles(g),
            lines: winding_lines(g),
            stamp: vec![0; g.n_vertices()],
            generation: 0,
            ops: Vec::new(),
            count_loops: true,
        }
    }

    /// Draws a move kind by weight and proposes it. On `Some`, the changes are in `self.ops`.
    pub fn propose(&mut self, s: &mut WormState, draw: &mut dyn FnMut(usize) -> usize) -> Option<Proposal> {
        let mut r = draw(self.mix.total() as usize) as u32;
        for k in MoveKind::ALL {
            let w = self.mix.weight(k);
            if r < w {
                return self.propose_kind(s, k, draw);
            }
            r -= w;
        }
        unreachable!("draw out of range")
    }

    fn ratio(&self, num: MoveKind, den: MoveKind) -> (u64, u64) {
        (self.mix.weight(num) as u64, self.mix.weight(den) as u64)
    }

    /// Proposes a move of the given kind; `s` is left unchanged.
    pub fn propose_kind(&mut self, s: &mut WormState, kind: MoveKind, draw: &mut dyn FnMut(usize) -> usize) -> Option<Proposal> {
        self.ops.clear();
        let g = self.g;
        let n = g.n_vertices();
        let mut p = Proposal::new(kind);
        match kind {
            MoveKind::Toggle => {
                if g.n_edges() == 0 {
                    return None;
                }
                let e = draw(g.n_edges());
                let [a, b] = g.edge(e);
                if s.is_monomer(a) && s.is_monomer(b) {
                    self.ops.extend([
                        Op::SetMonomer(a, false),
                        Op::SetMonomer(b, false),
                        Op::AddDimer(Color::Blue, e),
                        Op::AddDimer(Color::Red, e),
                    ]);
                    p.rho_exp = -2;
                    p.n_exp = 1;
                } else if s.partner(Color::Blue, a) == Some(e) && s.partner(Color::Red, a) == Some(e) {
                    self.ops.extend([
                        Op::RemoveDimer(Color::Blue, e),
                        Op::RemoveDimer(Color::Red, e),
                        Op::SetMonomer(a, true),
                        Op::SetMonomer(b, true),
                    ]);
                    p.rho_exp = 2;
                    p.n_exp = -1;
                } else {
                    return None;
                }
            }
            MoveKind::Plaquette | MoveKind::Winding => {
                let list = if kind == MoveKind::Plaquette { &self.cycles } else { &self.lines };
                if list.is_empty() {
                    return None;
                }
                let cyc = list[draw(list.len())].clone();
                let c = Color::BOTH[draw(2)];
                let k = cyc.edges.len();
                // Which alternate edge set carries colour `c` at every cycle vertex.
                let on = |s: &WormState, parity: usize| {
                    (0..k).all(|i| {
                        let e = if i % 2 == parity { cyc.edges[i] } else { cyc.edges[(i + k - 1) % k] };
                        s.partner(c, cyc.vertices[i]) == Some(e)
                    })
                };
                let from = if on(s, 0) {
                    0
                } else if on(s, 1) {
                    1
                } else {
                    return None;
                };
                for i in (0..k).filter(|i| i % 2 == from) {
                    self.ops.push(Op::RemoveDimer(c, cyc.edges[i]));
                }
                for i in (0..k).filter(|i| i % 2 != from) {
                    self.ops.push(Op::AddDimer(c, cyc.edges[i]));
                }
                if !self.count_loops {
                    return Some(p);
                }
                let before = self.loops_through(s, &cyc.vertices);
                let ops = std::mem::take(&mut self.ops);
                s.apply(g, &ops);
                let after = self.loops_through(s, &cyc.vertices);
                s.undo(g, &ops);
                self.ops = ops;
                p.n_exp = after as i32 - before as i32;
            }
            MoveKind::LoopSwap => {
                let v = draw(n);
                if s.is_monomer(v) || s.closed_loop_len(g, v, Color::Blue).is_none() {
                    return None;
                }
                let mut cur = v;
                let mut col = Color::Blue;
                let mut edges = Vec::new();
                loop {
                    let e = s.partner(col, cur).expect("closed loop");
                    edges.push((col, e));
                    cur = g.other_end(e, cur);
                    col = col.other();
                    if cur == v && col == Color::Blue {
                        break;
                    }
                }
                for &(c, e) in &edges {
                    self.ops.push(Op::RemoveDimer(c, e));
                }
                for &(c, e) in &edges {
                    self.ops.push(Op::AddDimer(c.other(), e));
                }
            }
            MoveKind::Slide => {
                let x = draw(n);
                if !s.is_monomer(x) || g.degree(x) == 0 {
                    return None;
                }
                let e = g.incident(x)[draw(g.degree(x))];
                let y = g.other_end(e, x);
                let f = g.incident(y)[draw(g.degree(y))];
                let z = g.other_end(f, y);
                if s.partner(Color::Blue, y) != Some(f) || s.partner(Color::Red, y) != Some(f) {
                    return None;
                }
                self.ops.extend([
                    Op::RemoveDimer(Color::Blue, f),
                    Op::RemoveDimer(Color::Red, f),
                    Op::SetMonomer(z, true),
                    Op::SetMonomer(x, false),
                    Op::AddDimer(Color::Blue, e),
                    Op::AddDimer(Color::Red, e),
                ]);
                p.hastings = (g.degree(x) as u64, g.degree(z) as u64);
            }
            MoveKind::Open => {
                let v = draw(n);
                let c = Color::BOTH[draw(2)];
                if !s.is_closed() {
                    return None;
                }
                let (w_open, w_close) = self.ratio(MoveKind::Open, MoveKind::Close);
                if s.is_monomer(v) {
                    self.ops.push(Op::SetMonomer(v, false));
                    p.rho_exp = -1;
                    p.c_exp = 1;
                    p.hastings = (w_close * n as u64, w_open);
                } else {
                    let e = s.partner(c, v).expect("closed configuration");
                    self.ops.push(Op::RemoveDimer(c, e));
                    p.n_exp = -1;
                    p.c_exp = 1;
                    p.hastings = (w_close * n as u64, w_open * g.degree(v) as u64);
                }
            }
            MoveKind::Close => {
                if s.slots().len() != 2 {
                    return None;
                }
                let (a, c) = s.slots()[draw(2)];
                let (w_close, w_open) = self.ratio(MoveKind::Close, MoveKind::Open);
                let (x, y) = s.endpoints().expect("open");
                if x == y {
                    self.ops.push(Op::SetMonomer(a, true));
                    p.rho_exp = 1;
                    p.c_exp = -1;
                    p.hastings = (w_open, w_close * n as u64);
                } else {
                    let e = g.incident(a)[draw(g.degree(a))];
                    let b = g.other_end(e, a);
                    let other = if a == x { y } else { x };
                    if b != other || s.partner(c, b).is_some() {
                        return None;
                    }
                    self.ops.push(Op::AddDimer(c, e));
                    p.n_exp = 1;
                    p.c_exp = -1;
                    p.hastings = (w_open * g.degree(a) as u64, w_close * n as u64);
                }
            }
            MoveKind::Shift => {
                if s.slots().len() != 2 {
                    return None;
                }
                let (h, c) = s.slots()[draw(2)];
                if g.degree(h) == 0 {
                    return None;
                }
                let e = g.incident(h)[draw(g.degree(h))];
                let z = g.other_end(e, h);
                if s.is_monomer(z) {
                    let (w_shift, w_retract) = self.ratio(MoveKind::Shift, MoveKind::Retract);
                    self.ops.extend([Op::SetMonomer(z, false), Op::AddDimer(c, e)]);
                    p.rho_exp = -1;
                    p.hastings = (w_retract * g.degree(h) as u64, w_shift);
                } else {
                    let f = s.partner(c, z)?;
                    let w = g.other_end(f, z);
                    let on_loop = s.closed_loop_len(g, z, c).is_some();
                    self.ops.extend([Op::RemoveDimer(c, f), Op::AddDimer(c, e)]);
                    p.n_exp = if on_loop { -1 } else { 1 };
                    p.hastings = (g.degree(h) as u64, g.degree(w) as u64);
                }
            }
            MoveKind::Retract => {
                if s.slots().len() != 2 {
                    return None;
                }
                let (h, c) = s.slots()[draw(2)];
                let e = s.partner(c.other(), h)?;
                let z = g.other_end(e, h);
                let (w_retract, w_shift) = self.ratio(MoveKind::Retract, MoveKind::Shift);
                self.ops.extend([Op::RemoveDimer(c.other(), e), Op::SetMonomer(h, true)]);
                p.rho_exp = 1;
                p.hastings = (w_shift, w_retract * g.degree(z) as u64);
            }
        }
        Some(p)
    }

    /// Number of distinct closed loops through any of `vs`.
    fn loops_through(&mut self, s: &WormState, vs: &[usize]) -> usize {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.iter_mut().for_each(|x| *x = 0);
            self.generation = 1;
        }
        let gen = self.generation;
        let g = self.g;
        let mut count = 0;
        for &v in vs {
            if self.stamp[v] == gen || s.is_monomer(v) {
                continue;
            }
            if s.closed_loop_len(g, v, Color::Blue).is_none() {
                continue;
            }
            count += 1;
            let mut cur = v;
            let mut col = Color::Blue;
            loop {
                self.stamp[cur] = gen;
                let e = s.partner(col, cur).expect("closed loop");
                cur = g.other_end(e, cur);
                col = col.other();
                if cur == v && col == Color::Blue {
                    break;
                }
            }
        }
        count
    }
}

/// Runs `f` once for every sequence of draws it can make and passes each
/// result to `sink` together with the draw ranges of that sequence.
pub fn for_each_path<T, F, S>(mut f: F, mut sink: S)
where
    F: FnMut(&mut dyn FnMut(usize) -> usize) -> T,
    S: FnMut(T, &[usize]),
{
    // (value, range) per draw position
    let mut choices: Vec<(usize, usize)> = Vec::new();
    loop {
        let mut pos = 0;
        let out = {
            let mut draw = |k: usize| {
                assert!(k > 0, "empty draw range");
                if pos == choices.len() {
                    choices.push((0, k));
                }
                debug_assert_eq!(choices[pos].1, k);
                pos += 1;
                choices[pos - 1].0
            };
            f(&mut draw)
        };
        choices.truncate(pos);
        let ranges: Vec<usize> = choices.iter().map(|c| c.1).collect();
        sink(out, &ranges);
        while let Some(&(v, k)) = choices.last() {
            if v + 1 < k {
                choices.last_mut().expect("nonempty").0 = v + 1;
                break;
            }
            choices.pop();
        }
        if choices.is_empty() {
            return;
        }
    }
}

/// Probability of a draw sequence with the given ranges.
pub fn path_probability(ranges: &[usize]) -> BigRational {
    let den: u128 = ranges.iter().map(|&k| k as u128).product();
    BigRational::new(1.into(), den.into())
}
