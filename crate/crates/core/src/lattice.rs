//! Finite bipartite graphs: the slab torus, small preset graphs, reflections
//! and the dual momentum lattice.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

/// Side lengths of a slab torus: `l` for the two long axes, `k` for the thin one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusDims {
    pub l: usize,
    pub k: usize,
}

impl TorusDims {
    pub fn sizes(&self) -> [usize; 3] {
        [self.l, self.l, self.k]
    }
    pub fn volume(&self) -> usize {
        self.l * self.l * self.k
    }
}

/// A finite bipartite multigraph with a distinguished even origin.
///
/// Edge ids are indices into `edges`; parallel edges are distinct ids.
#[derive(Clone, Debug)]
pub struct Graph {
    name: String,
    n: usize,
    edges: Vec<[usize; 2]>,
    parity: Vec<Parity>,
    origin: usize,
    coords: Option<Vec<[i64; 3]>>,
    torus: Option<TorusDims>,
    incident: Vec<Vec<usize>>,
}

/// Serialized form of a graph.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GraphJson {
    pub name: String,
    pub vertices: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<[i64; 3]>>,
    pub edges: Vec<[usize; 3]>,
    pub parity: Vec<u8>,
    pub origin: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torus: Option<TorusDims>,
}

fn window_rep(i: usize, size: usize) -> i64 {
    if 2 * i > size {
        i as i64 - size as i64
    } else {
        i as i64
    }
}

impl Graph {
    /// Builds a graph from an edge list, deriving the bipartition by breadth
    /// first search from `origin`. Components not containing the origin are
    /// coloured from their smallest vertex.
    pub fn from_edges(name: &str, n: usize, edges: Vec<[usize; 2]>, origin: usize) -> Result<Graph> {
        if n == 0 {
            return invalid("graph needs at least one vertex");
        }
        if origin >= n {
            return invalid(format!("origin {origin} out of range"));
        }
        let mut incident = vec![Vec::new(); n];
        for (e, &[u, v]) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return invalid(format!("edge {e} has endpoint out of range"));
            }
            if u == v {
                return invalid(format!("edge {e} is a self-loop"));
            }
            incident[u].push(e);
            incident[v].push(e);
        }
        let mut colour: Vec<Option<Parity>> = vec![None; n];
        let starts = std::iter::once(origin).chain(0..n);
        for s in starts {
            if colour[s].is_some() {
                continue;
            }
            colour[s] = Some(Parity::Even);
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                let cu = colour[u].unwrap();
                for &e in &incident[u] {
                    let w = if edges[e][0] == u { edges[e][1] } else { edges[e][0] };
                    match colour[w] {
                        None => {
                            colour[w] = Some(cu.flip());
                            queue.push_back(w);
                        }
                        Some(cw) if cw == cu => {
                            return invalid(format!("graph {name} is not bipartite"));
                        }
                        _ => {}
                    }
                }
            }
        }
        let parity = colour.into_iter().map(|c| c.unwrap()).collect();
        Ok(Graph { name: name.to_string(), n, edges, parity, origin, coords: None, torus: None, incident })
    }

    /// The single edge.
    pub fn k2() -> Graph {
        Graph::from_edges("K2", 2, vec![[0, 1]], 0).unwrap()
    }

    /// Even cycle `0-1-...-(n-1)-0`.
    pub fn cycle(n: usize) -> Result<Graph> {
        if n < 4 || n % 2 == 1 {
            return invalid("cycle length must be even and at least 4");
        }
        let edges = (0..n).map(|i| [i, (i + 1) % n]).collect();
        Graph::from_edges(&format!("C{n}"), n, edges, 0)
    }

    /// Path `0-1-...-(n-1)`.
    pub fn path(n: usize) -> Result<Graph> {
        if n < 2 {
            return invalid("path needs at least two vertices");
        }
        let edges = (0..n - 1).map(|i| [i, i + 1]).collect();
        Graph::from_edges(&format!("P{n}"), n, edges, 0)
    }

    /// Open `w x h` grid; vertex `(x, y)` has id `y * w + x`. Horizontal edges
    /// come first, then vertical ones.
    pub fn open_grid(w: usize, h: usize) -> Result<Graph> {
        if w == 0 || h == 0 || w * h < 2 {
            return invalid("grid needs at least two vertices");
        }
        let mut edges = Vec::new();
        for y in 0..h {
            for x in 0..w - 1 {
                edges.push([y * w + x, y * w + x + 1]);
            }
        }
        for y in 0..h - 1 {
            for x in 0..w {
                edges.push([y * w + x, (y + 1) * w + x]);
            }
        }
        let mut g = Graph::from_edges(&format!("grid{w}x{h}"), w * h, edges, 0)?;
        g.coords = Some((0..w * h).map(|i| [(i % w) as i64, (i / w) as i64, 0]).collect());
        Ok(g)
    }

    /// The slab torus with side `l` in two directions and `k` in the third.
    /// Sides equal to 2 produce pairs of parallel edges.
    pub fn slab_torus(l: usize, k: usize) -> Result<Graph> {
        for (name, s) in [("L", l), ("K", k)] {
            if s == 0 || (s > 1 && s % 2 == 1) {
                return invalid(format!("{name}={s} must be 1 or even"));
            }
        }
        let dims = TorusDims { l, k };
        let sizes = dims.sizes();
        let n = dims.volume();
        if n < 2 {
            return invalid("torus needs at least two vertices");
        }
        let mut coords = Vec::with_capacity(n);
        for i0 in 0..l {
            for i1 in 0..l {
                for i2 in 0..k {
                    coords.push([window_rep(i0, l), window_rep(i1, l), window_rep(i2, k)]);
                }
            }
        }
        let mut edges = Vec::new();
        for v in 0..n {
            for axis in 0..3 {
                if sizes[axis] > 1 {
                    let mut c = coords[v];
                    c[axis] += 1;
                    edges.push([v, torus_index(&sizes, c)]);
                }
            }
        }
        let mut incident = vec![Vec::new(); n];
        for (e, &[u, v]) in edges.iter().enumerate() {
            incident[u].push(e);
            incident[v].push(e);
        }
        let parity = coords
            .iter()
            .map(|c| if (c[0] + c[1] + c[2]).rem_euclid(2) == 0 { Parity::Even } else { Parity::Odd })
            .collect();
        Ok(Graph {
            name: format!("torus{l}x{k}"),
            n,
            edges,
            parity,
            origin: 0,
            coords: Some(coords),
            torus: Some(dims),
            incident,
        })
    }

    /// Looks up a preset by name: `K2`, `C<n>`, `P<n>`, `grid:WxH`, `torus:LxK`.
    pub fn preset(name: &str) -> Result<Graph> {
        let parse_pair = |s: &str| -> Result<(usize, usize)> {
            let (a, b) = s
                .split_once(['x', ','])
                .ok_or_else(|| Error::InvalidArgument(format!("expected AxB, got {s}")))?;
            let a = a.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad size {a}")))?;
            let b = b.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad size {b}")))?;
            Ok((a, b))
        };
        if name == "K2" {
            return Ok(Graph::k2());
        }
        if let Some(rest) = name.strip_prefix("grid:") {
            let (w, h) = parse_pair(rest)?;
            return Graph::open_grid(w, h);
        }
        if let Some(rest) = name.strip_prefix("torus:") {
            let (l, k) = parse_pair(rest)?;
            return Graph::slab_torus(l, k);
        }
        if let Some(rest) = name.strip_prefix('C') {
            if let Ok(n) = rest.parse() {
                return Graph::cycle(n);
            }
        }
        if let Some(rest) = name.strip_prefix('P') {
            if let Ok(n) = rest.parse() {
                return Graph::path(n);
            }
        }
        invalid(format!("unknown graph preset {name}"))
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn n_vertices(&self) -> usize {
        self.n
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }
    /// Endpoint of `e` opposite to `v`.
    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let [a, b] = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }
    pub fn degree(&self, v: usize) -> usize {
        self.incident[v].len()
    }
    pub fn parity(&self, v: usize) -> Parity {
        self.parity[v]
    }
    pub fn is_even(&self, v: usize) -> bool {
        self.parity[v] == Parity::Even
    }
    pub fn origin(&self) -> usize {
        self.origin
    }
    pub fn coords(&self) -> Option<&[[i64; 3]]> {
        self.coords.as_deref()
    }
    pub fn torus(&self) -> Option<TorusDims> {
        self.torus
    }
    /// Endpoint of `e` with even parity.
    pub fn even_end(&self, e: usize) -> usize {
        let [a, b] = self.edges[e];
        if self.is_even(a) {
            a
        } else {
            b
        }
    }
    /// Edge ids joining `u` and `v`.
    pub fn edges_between(&self, u: usize, v: usize) -> Vec<usize> {
        self.incident[u].iter().copied().filter(|&e| self.other_end(e, u) == v).collect()
    }
    /// Distinct neighbours of `v` in increasing order.
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.incident[v].iter().map(|&e| self.other_end(e, v)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
    /// True when no two edges share both endpoints.
    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.edges.iter().all(|&[a, b]| seen.insert((a.min(b), a.max(b))))
    }

    /// Graph distance; `None` when disconnected.
    pub fn distance(&self, u: usize, v: usize) -> Option<usize> {
        if let (Some(dims), Some(c)) = (self.torus, self.coords.as_ref()) {
            let sizes = dims.sizes();
            let mut d = 0;
            for a in 0..3 {
                let s = sizes[a] as i64;
                let diff = (c[u][a] - c[v][a]).rem_euclid(s);
                d += diff.min(s - diff) as usize;
            }
            return Some(d);
        }
        let mut dist = vec![usize::MAX; self.n];
        dist[u] = 0;
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            if x == v {
                return Some(dist[x]);
            }
            for &e in &self.incident[x] {
                let y = self.other_end(e, x);
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        None
    }

    /// Vertex with the given torus coordinates (reduced periodically).
    pub fn vertex_at(&self, c: [i64; 3]) -> Option<usize> {
        self.torus.map(|d| torus_index(&d.sizes(), c))
    }

    /// Translates `v` by the coordinates of `by` (torus only).
    pub fn translate(&self, v: usize, by: usize) -> Option<usize> {
        let c = self.coords.as_ref()?;
        let dims = self.torus?;
        let s = [c[v][0] + c[by][0], c[v][1] + c[by][1], c[v][2] + c[by][2]];
        Some(torus_index(&dims.sizes(), s))
    }

    /// Vertex at displacement `to - from` from the origin (torus only).
    pub fn displacement(&self, from: usize, to: usize) -> Option<usize> {
        let c = self.coords.as_ref()?;
        let dims = self.torus?;
        let s = [c[to][0] - c[from][0], c[to][1] - c[from][1], c[to][2] - c[from][2]];
        Some(torus_index(&dims.sizes(), s))
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            name: self.name.clone(),
            vertices: self.n,
            coords: self.coords.clone(),
            edges: self.edges.iter().enumerate().map(|(e, &[u, v])| [u, v, e]).collect(),
            parity: self.parity.iter().map(|p| u8::from(*p == Parity::Odd)).collect(),
            origin: self.origin,
            torus: self.torus,
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<Graph> {
        let mut edges = vec![[0, 0]; j.edges.len()];
        let mut seen = vec![false; j.edges.len()];
        for &[u, v, id] in &j.edges {
            if id >= edges.len() || seen[id] {
                return invalid(format!("bad or duplicate edge id {id}"));
            }
            seen[id] = true;
            edges[id] = [u, v];
        }
        let mut g = Graph::from_edges(&j.name, j.vertices, edges, j.origin)?;
        if j.parity.len() != j.vertices {
            return invalid("parity list length mismatch");
        }
        for (v, &p) in j.parity.iter().enumerate() {
            let want = if p == 0 { Parity::Even } else { Parity::Odd };
            let connected = g.distance(g.origin, v).is_some();
            if connected && want != g.parity[v] {
                return invalid(format!("parity label of vertex {v} disagrees with the bipartition"));
            }
            g.parity[v] = want;
        }
        g.coords = j.coords.clone();
        g.torus = j.torus;
        Ok(g)
    }
}

fn torus_index(sizes: &[usize; 3], c: [i64; 3]) -> usize {
    let i0 = c[0].rem_euclid(sizes[0] as i64) as usize;
    let i1 = c[1].rem_euclid(sizes[1] as i64) as usize;
    let i2 = c[2].rem_euclid(sizes[2] as i64) as usize;
    (i0 * sizes[1] + i1) * sizes[2] + i2
}

/// Vertex set of the graph enlarged by a ghost and a source vertex, each
/// joined to every base vertex. Ghost edges have ids `|E| + x`, source edges
/// `|E| + |V| + x`.
#[derive(Clone, Copy, Debug)]
pub struct Enlarged {
    pub n: usize,
    pub m: usize,
}

impl Enlarged {
    pub fn of(g: &Graph) -> Enlarged {
        Enlarged { n: g.n_vertices(), m: g.n_edges() }
    }
    pub fn ghost(&self) -> usize {
        self.n
    }
    pub fn source(&self) -> usize {
        self.n + 1
    }
    pub fn ghost_edge(&self, x: usize) -> usize {
        self.m + x
    }
    pub fn source_edge(&self, x: usize) -> usize {
        self.m + self.n + x
    }
    pub fn n_edges(&self) -> usize {
        self.m + 2 * self.n
    }
    /// Classifies an enlarged edge id.
    pub fn kind(&self, e: usize) -> EdgeKind {
        if e < self.m {
            EdgeKind::Base(e)
        } else if e < self.m + self.n {
            EdgeKind::Ghost(e - self.m)
        } else {
            EdgeKind::Source(e - self.m - self.n)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Base(usize),
    Ghost(usize),
    Source(usize),
}

/// Reflection of the torus through the plane `{x_axis = twice_offset / 2}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReflectionPlane {
    pub axis: usize,
    pub twice_offset: i64,
}

impl ReflectionPlane {
    /// Plane through edge midpoints; `twice_offset` must be odd.
    pub fn new(axis: usize, twice_offset: i64) -> Result<ReflectionPlane> {
        if axis > 2 {
            return invalid("axis must be 0, 1 or 2");
        }
        if twice_offset.rem_euclid(2) != 1 {
            return invalid("reflection planes sit at half-integer offsets");
        }
        Ok(ReflectionPlane { axis, twice_offset })
    }

    pub fn reflect(&self, g: &Graph, v: usize) -> Result<usize> {
        let (dims, c) = torus_parts(g)?;
        let mut x = c[v];
        x[self.axis] = self.twice_offset - x[self.axis];
        Ok(torus_index(&dims.sizes(), x))
    }

    /// Image of an edge. Torus edges are generated as `v -> v + e_axis`, so
    /// the image is identified by its lower endpoint and direction.
    pub fn reflect_edge(&self, g: &Graph, e: usize) -> Result<usize> {
        let (dims, c) = torus_parts(g)?;
        let sizes = dims.sizes();
        let from = g.edges[e][0];
        let dir = edge_axis(g, e)?;
        let mut start = c[from];
        start[self.axis] = self.twice_offset - start[self.axis];
        if dir == self.axis {
            start[dir] -= 1;
        }
        let s = torus_index(&sizes, start);
        g.incident[s]
            .iter()
            .copied()
            .find(|&f| g.edges[f][0] == s && edge_axis(g, f).ok() == Some(dir))
            .ok_or_else(|| Error::InvalidArgument("edge image not found".into()))
    }
}

fn torus_parts(g: &Graph) -> Result<(TorusDims, &Vec<[i64; 3]>)> {
    match (g.torus, g.coords.as_ref()) {
        (Some(d), Some(c)) => Ok((d, c)),
        _ => invalid("reflections need a slab torus"),
    }
}

/// Axis along which torus edge `e` points (from its first endpoint).
pub fn edge_axis(g: &Graph, e: usize) -> Result<usize> {
    let (dims, c) = torus_parts(g)?;
    let sizes = dims.sizes();
    let [a, b] = g.edges[e];
    for axis in 0..3 {
        if sizes[axis] > 1 {
            let mut x = c[a];
            x[axis] += 1;
            if torus_index(&sizes, x) == b {
                return Ok(axis);
            }
        }
    }
    invalid("edge does not point along a torus axis")
}

/// A dual momentum `k = 2 pi (n0 / L, n1 / L, n2 / K)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourierMode {
    pub n: [i64; 3],
    pub dims: TorusDims,
}

impl FourierMode {
    pub fn k(&self) -> [f64; 3] {
        let s = self.dims.sizes();
        [0, 1, 2].map(|a| 2.0 * PI * self.n[a] as f64 / s[a] as f64)
    }
    pub fn in_positive_cone(&self) -> bool {
        let s = self.dims.sizes();
        (0..3).all(|a| {
            let (n, m) = (self.n[a], s[a] as i64);
            -m < 4 * n && 4 * n <= m
        })
    }
}

fn half_open_window(size: usize) -> impl Iterator<Item = i64> {
    let m = size as i64;
    (-m..=m).filter(move |&n| -m < 2 * n && 2 * n <= m)
}

/// All `L * L * K` dual momenta with components in `(-pi, pi]`.
pub fn dual_modes(dims: TorusDims) -> Vec<FourierMode> {
    let mut out = Vec::with_capacity(dims.volume());
    for n0 in half_open_window(dims.l) {
        for n1 in half_open_window(dims.l) {
            for n2 in half_open_window(dims.k) {
                out.push(FourierMode { n: [n0, n1, n2], dims });
            }
        }
    }
    out
}

/// Momenta whose components lie in `(-pi/2, pi/2]`.
pub fn positive_cone(dims: TorusDims) -> Vec<FourierMode> {
    dual_modes(dims).into_iter().filter(|m| m.in_positive_cone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_sizes_and_degrees() {
        let g = Graph::slab_torus(4, 1).unwrap();
        assert_eq!(g.n_vertices(), 16);
        assert_eq!(g.n_edges(), 32);
        assert!((0..16).all(|v| g.degree(v) == 4));
        let g = Graph::slab_torus(4, 2).unwrap();
        assert_eq!(g.n_vertices(), 32);
        assert!((0..32).all(|v| g.degree(v) == 6));
        assert!(!g.is_simple());
        assert_eq!(g.edges_between(0, 1).len(), 2);
    }

    #[test]
    fn rejects_odd_sides() {
        assert!(Graph::slab_torus(3, 1).is_err());
        assert!(Graph::slab_torus(4, 3).is_err());
        assert!(Graph::slab_torus(0, 1).is_err());
    }

    #[test]
    fn origin_is_even_and_parity_alternates() {
        let g = Graph::slab_torus(4, 2).unwrap();
        assert_eq!(g.coords().unwrap()[g.origin()], [0, 0, 0]);
        for (e, &[a, b]) in g.edges().iter().enumerate() {
            assert_ne!(g.parity(a), g.parity(b), "edge {e}");
        }
    }

    #[test]
    fn window_coordinates() {
        let g = Graph::slab_torus(4, 1).unwrap();
        let xs: Vec<i64> = g.coords().unwrap().iter().map(|c| c[0]).collect();
        assert!(xs.iter().all(|&x| -2 < x && x <= 2));
    }

    #[test]
    fn preset_shapes() {
        let g = Graph::open_grid(2, 3).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (6, 7));
        let c4 = Graph::preset("C4").unwrap();
        assert_eq!(c4.n_edges(), 4);
        assert_eq!(Graph::preset("P4").unwrap().n_edges(), 3);
        assert!(Graph::preset("C5").is_err());
        assert!(Graph::from_edges("tri", 3, vec![[0, 1], [1, 2], [2, 0]], 0).is_err());
    }

    #[test]
    fn mode_counts() {
        let dims = TorusDims { l: 4, k: 1 };
        assert_eq!(dual_modes(dims).len(), 16);
        let cone = positive_cone(dims);
        assert_eq!(cone.len(), 4);
        assert!(cone.iter().all(|m| (0..=1).contains(&m.n[0]) && (0..=1).contains(&m.n[1])));
        for m in dual_modes(dims) {
            assert!(m.k().iter().all(|&k| -PI < k && k <= PI + 1e-12));
        }
    }

    #[test]
    fn reflection_examples() {
        let g = Graph::slab_torus(4, 1).unwrap();
        let p = ReflectionPlane::new(0, 1).unwrap();
        let v = g.vertex_at([0, 0, 0]).unwrap();
        assert_eq!(p.reflect(&g, v).unwrap(), g.vertex_at([1, 0, 0]).unwrap());
        assert!(ReflectionPlane::new(0, 2).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = Graph::slab_torus(2, 2).unwrap();
        let j = g.to_json();
        let h = Graph::from_json(&j).unwrap();
        assert_eq!(h.to_json(), j);
    }

    #[test]
    fn distances() {
        let g = Graph::slab_torus(8, 1).unwrap();
        let x = g.vertex_at([3, -4, 0]).unwrap();
        assert_eq!(g.distance(g.origin(), x), Some(7));
        let c = Graph::cycle(6).unwrap();
        assert_eq!(c.distance(0, 3), Some(3));
    }
}
