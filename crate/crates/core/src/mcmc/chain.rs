//! Chain driver, measurements and the sampling entry points.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exact::{TwoPointEntry, TwoPointTable};
use crate::lattice::Graph;
use crate::mcmc::moves::{MoveKind, MoveMix, MoveSet};
use crate::mcmc::state::{StateKey, WormState};
use crate::mcmc::stats::{ratio_estimate, Estimate};

/// Parameters of one Markov chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainConfig {
    pub rho: f64,
    pub n_colors: u32,
    /// Total sweeps, burn-in included. A sweep is `|V|` move attempts.
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Stream of the generator; distinct streams give independent chains.
    pub stream: u64,
    pub mix: MoveMix,
    pub bins: usize,
    /// Weight of open configurations. `None` tunes it during burn-in so that
    /// open and closed sectors are visited comparably often.
    pub worm_weight: Option<f64>,
    pub eps_grid: Vec<f64>,
    /// Measure `P(o <-> x)`; costs the squared loop length per sweep.
    pub connectivity: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            rho: 1.0,
            n_colors: 1,
            sweeps: 20_000,
            burn_in: 2_000,
            seed: 1,
            stream: 0,
            mix: MoveMix::default(),
            bins: crate::mcmc::stats::DEFAULT_BINS,
            worm_weight: None,
            eps_grid: vec![1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0],
            connectivity: true,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return invalid("the worm sampler needs 0 < rho < inf; use the double-dimer sampler at rho = 0");
        }
        if self.n_colors == 0 {
            return invalid("N must be positive");
        }
        if self.sweeps <= self.burn_in {
            return invalid("sweeps must exceed burn-in");
        }
        if self.bins < 32 {
            return invalid("at least 32 bins are required");
        }
        if self.sweeps - self.burn_in < self.bins {
            return invalid("fewer measured sweeps than bins");
        }
        if let Some(c) = self.worm_weight {
            if !(c > 0.0 && c.is_finite()) {
                return invalid("worm weight must be positive");
            }
        }
        self.mix.validate()
    }
}

/// Single Metropolis chain on the extended configuration space.
pub struct Chain<'a> {
    g: &'a Graph,
    moves: MoveSet<'a>,
    pub state: WormState,
    rng: ChaCha8Rng,
    rho: f64,
    n_colors: f64,
    pub worm_weight: f64,
    proposed: [u64; 9],
    accepted: [u64; 9],
}

fn kind_index(k: MoveKind) -> usize {
    MoveKind::ALL.iter().position(|&x| x == k).expect("listed kind")
}

impl<'a> Chain<'a> {
    pub fn new(g: &'a Graph, cfg: &ChainConfig) -> Result<Chain<'a>> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(cfg.stream);
        Ok(Chain {
            g,
            moves: MoveSet::new(g, cfg.mix),
            state: WormState::all_monomers(g.n_vertices()),
            rng,
            rho: cfg.rho,
            n_colors: cfg.n_colors as f64,
            worm_weight: cfg.worm_weight.unwrap_or(1.0 / g.n_vertices() as f64),
            proposed: [0; 9],
            accepted: [0; 9],
        })
    }

    /// One move attempt.
    pub fn step(&mut self) {
        let Chain { moves, state, rng, .. } = self;
        let mut draw = |k: usize| rng.random_range(0..k);
        let Some(p) = moves.propose(state, &mut draw) else {
            return;
        };
        let i = kind_index(p.kind);
        self.proposed[i] += 1;
        let a = p.acceptance(self.rho, self.n_colors, self.worm_weight);
        if a >= 1.0 || self.rng.random::<f64>() < a {
            self.accepted[i] += 1;
            self.state.apply(self.g, &self.moves.ops);
        }
    }

    pub(crate) fn with_state(mut self, s: WormState) -> Chain<'a> {
        self.state = s;
        self
    }

    /// Skips loop counting in cycle moves; valid only when `N = 1`.
    pub(crate) fn without_loop_counts(mut self) -> Chain<'a> {
        self.moves.count_loops = false;
        self
    }

    pub fn sweep(&mut self) {
        for _ in 0..self.g.n_vertices() {
            self.step();
        }
    }

    /// Accepted over proposed moves, per kind with at least one proposal.
    pub fn acceptance_rates(&self) -> BTreeMap<String, f64> {
        MoveKind::ALL
            .iter()
            .enumerate()
            .filter(|(i, _)| self.proposed[*i] > 0)
            .map(|(i, k)| (k.name().to_string(), self.accepted[i] as f64 / self.proposed[i] as f64))
            .collect()
    }

    /// Burn-in; with `tune`, rescales the worm weight between rounds so the
    /// open sector holds roughly half of the time.
    pub(crate) fn burn_in(&mut self, sweeps: usize, tune: bool) {
        let rounds = if tune { 4 } else { 1 };
        let per = sweeps / rounds;
        for r in 0..rounds {
            let (mut open, mut closed) = (0u64, 0u64);
            let len = if r + 1 == rounds { sweeps - per * (rounds - 1) } else { per };
            for _ in 0..len {
                for _ in 0..self.g.n_vertices() {
                    self.step();
                    if self.state.is_closed() {
                        closed += 1;
                    } else {
                        open += 1;
                    }
                }
            }
            if tune && self.moves.mix.open > 0 {
                let f = ((closed + 1) as f64 / (open + 1) as f64).clamp(1.0 / 16.0, 16.0);
                self.worm_weight *= f;
            }
        }
    }
}

/// Per-bin accumulator of a vector observable.
struct Binner {
    bin_len: usize,
    max_bins: usize,
    cur: Vec<f64>,
    filled: usize,
    bins: Vec<Vec<f64>>,
}

impl Binner {
    fn new(dim: usize, bin_len: usize, max_bins: usize) -> Binner {
        Binner { bin_len, max_bins, cur: vec![0.0; dim], filled: 0, bins: Vec::new() }
    }
    fn add(&mut self, i: usize, x: f64) {
        self.cur[i] += x;
    }
    fn end_sample(&mut self) {
        self.filled += 1;
        if self.filled == self.bin_len {
            if self.bins.len() < self.max_bins {
                let mean: Vec<f64> = self.cur.iter().map(|x| x / self.bin_len as f64).collect();
                self.bins.push(mean);
            }
            self.cur.iter_mut().for_each(|x| *x = 0.0);
            self.filled = 0;
        }
    }
    fn column(&self, i: usize) -> Vec<f64> {
        self.bins.iter().map(|b| b[i]).collect()
    }
}

/// Sampled loop statistics of the closed sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopStats {
    pub graph: String,
    pub rho: f64,
    pub n_colors: u32,
    pub measured_sweeps: usize,
    pub worm_weight: f64,
    pub closed_fraction: Estimate,
    /// `E|L_o|`, zero when the origin is a monomer.
    pub mean_origin_loop: Estimate,
    /// `E|L_o| / |V|`.
    pub loop_fraction: Estimate,
    /// `(eps, P(|L_o| > eps |V|))`.
    pub tails: Vec<(f64, Estimate)>,
    /// `P(|L_o| = len)` indexed by `len`.
    pub loop_len_dist: Vec<Estimate>,
    /// `P(o <-> x)`; empty when not measured.
    pub connected: Vec<Estimate>,
    pub monomer_density: Estimate,
    /// Probability that an edge carries a dimer of a given colour.
    pub edge_occupation: Vec<Estimate>,
    /// Volume average of the walk two-point function.
    pub cesaro: Estimate,
    pub acceptance: BTreeMap<String, f64>,
    /// Every estimate passed the bin-halving test.
    pub converged: bool,
}

// scalar channels
const CLOSED: usize = 0;
const ORIGIN_LOOP: usize = 1;
const MONOMERS: usize = 2;
const WALK_TOTAL: usize = 3;
const TAILS: usize = 4;

struct Measurer {
    torus: bool,
    n: usize,
    origin: usize,
    eps: Vec<f64>,
    connectivity: bool,
    scalars: Binner,
    lengths: Binner,
    edges: Binner,
    connected: Binner,
    walk: Binner,
    seen: Vec<bool>,
}

impl Measurer {
    fn new(g: &Graph, cfg: &ChainConfig) -> Measurer {
        let n = g.n_vertices();
        let measured = cfg.sweeps - cfg.burn_in;
        let bin_len = measured / cfg.bins;
        Measurer {
            torus: g.torus().is_some() && g.coords().is_some(),
            n,
            origin: g.origin(),
            eps: cfg.eps_grid.clone(),
            connectivity: cfg.connectivity,
            scalars: Binner::new(TAILS + cfg.eps_grid.len(), bin_len, cfg.bins),
            lengths: Binner::new(n + 1, bin_len, cfg.bins),
            edges: Binner::new(g.n_edges(), bin_len, cfg.bins),
            connected: Binner::new(if cfg.connectivity { n } else { 0 }, bin_len, cfg.bins),
            walk: Binner::new(n, bin_len, cfg.bins),
            seen: vec![false; n],
        }
    }

    fn measure(&mut self, g: &Graph, s: &WormState) {
        let n = self.n;
        let nf = n as f64;
        let o = self.origin;
        if s.is_closed() {
            self.scalars.add(CLOSED, 1.0);
            let monomers = s.occ.n_monomers();
            self.scalars.add(MONOMERS, monomers as f64 / nf);
            if self.torus {
                self.lengths.add(0, monomers as f64 / nf);
            } else if s.is_monomer(o) {
                self.lengths.add(0, 1.0);
            }
            for v in (0..n).filter(|&v| g.is_even(v)) {
                for c in crate::model::Color::BOTH {
                    if let Some(e) = s.partner(c, v) {
                        self.edges.add(e, 0.5);
                    }
                }
            }
            self.seen.iter_mut().for_each(|x| *x = false);
            for v in 0..n {
                if self.seen[v] || s.is_monomer(v) {
                    continue;
                }
                let vertices = s.loop_vertices(g, v);
                let len = vertices.len();
                let lf = len as f64;
                for x in &vertices {
                    self.seen[*x] = true;
                }
                if self.torus {
                    self.scalars.add(ORIGIN_LOOP, lf * lf / nf);
                    self.lengths.add(len, lf / nf);
                    for (i, &eps) in self.eps.iter().enumerate() {
                        if lf > eps * nf {
                            self.scalars.add(TAILS + i, lf / nf);
                        }
                    }
                    if self.connectivity {
                        for &a in &vertices {
                            for &b in &vertices {
                                let d = g.displacement(a, b).expect("torus");
                                self.connected.add(d, 1.0 / nf);
                            }
                        }
                    }
                } else if vertices.contains(&o) {
                    self.scalars.add(ORIGIN_LOOP, lf);
                    self.lengths.add(len, 1.0);
                    for (i, &eps) in self.eps.iter().enumerate() {
                        if lf > eps * nf {
                            self.scalars.add(TAILS + i, 1.0);
                        }
                    }
                    if self.connectivity {
                        for &b in &vertices {
                            self.connected.add(b, 1.0);
                        }
                    }
                }
            }
        } else {
            let (a, b) = s.endpoints().expect("open");
            if self.torus {
                self.scalars.add(WALK_TOTAL, 1.0);
                if a == b {
                    self.walk.add(0, 1.0);
                } else {
                    self.walk.add(g.displacement(a, b).expect("torus"), 0.5);
                    self.walk.add(g.displacement(b, a).expect("torus"), 0.5);
                }
            } else if a == b {
                if a == o {
                    self.walk.add(o, 1.0);
                    self.scalars.add(WALK_TOTAL, 1.0);
                }
            } else {
                if a == o {
                    self.walk.add(b, 0.5);
                    self.scalars.add(WALK_TOTAL, 0.5);
                }
                if b == o {
                    self.walk.add(a, 0.5);
                    self.scalars.add(WALK_TOTAL, 0.5);
                }
            }
        }
        self.scalars.end_sample();
        self.lengths.end_sample();
        self.edges.end_sample();
        self.connected.end_sample();
        self.walk.end_sample();
    }
}

fn conditional(b: &Binner, i: usize, closed: &[f64], bins: usize) -> Estimate {
    ratio_estimate(&b.column(i), closed, bins)
}

fn scaled(e: Estimate, f: f64) -> Estimate {
    Estimate { value: e.value * f, err: e.err * f, converged: e.converged }
}

/// Runs a worm chain and returns closed-sector loop statistics together with
/// the walk two-point function from the origin.
pub fn sample_mdd(g: &Graph, cfg: &ChainConfig) -> Result<(LoopStats, TwoPointTable)> {
    let mut chain = Chain::new(g, cfg)?;
    chain.burn_in(cfg.burn_in, cfg.worm_weight.is_none());
    Ok(run_measured(g, cfg, chain))
}

pub(crate) fn run_measured(g: &Graph, cfg: &ChainConfig, mut chain: Chain) -> (LoopStats, TwoPointTable) {
    let mut m = Measurer::new(g, cfg);
    for _ in cfg.burn_in..cfg.sweeps {
        chain.sweep();
        m.measure(g, &chain.state);
    }
    let bins = m.scalars.bins.len();
    let closed = m.scalars.column(CLOSED);
    let ones = vec![1.0; bins];
    let n = g.n_vertices();
    let nf = n as f64;
    let c = chain.worm_weight;
    let anchor = if m.torus { nf } else { 1.0 };
    let mean_origin_loop = conditional(&m.scalars, ORIGIN_LOOP, &closed, bins);
    let tails = cfg.eps_grid.iter().enumerate().map(|(i, &e)| (e, conditional(&m.scalars, TAILS + i, &closed, bins))).collect();
    let loop_len_dist: Vec<Estimate> = (0..=n).map(|l| conditional(&m.lengths, l, &closed, bins)).collect();
    let connected: Vec<Estimate> =
        if cfg.connectivity { (0..n).map(|x| conditional(&m.connected, x, &closed, bins)).collect() } else { Vec::new() };
    let walk: Vec<Estimate> = (0..n).map(|x| scaled(conditional(&m.walk, x, &closed, bins), 1.0 / (c * anchor))).collect();
    let cesaro = scaled(conditional(&m.scalars, WALK_TOTAL, &closed, bins), 1.0 / (c * anchor * nf));
    let mut stats = LoopStats {
        graph: g.name().into(),
        rho: cfg.rho,
        n_colors: cfg.n_colors,
        measured_sweeps: cfg.sweeps - cfg.burn_in,
        worm_weight: c,
        closed_fraction: ratio_estimate(&closed, &ones, bins),
        loop_fraction: scaled(mean_origin_loop, 1.0 / nf),
        mean_origin_loop,
        tails,
        loop_len_dist,
        connected,
        monomer_density: conditional(&m.scalars, MONOMERS, &closed, bins),
        edge_occupation: (0..g.n_edges()).map(|e| conditional(&m.edges, e, &closed, bins)).collect(),
        cesaro,
        acceptance: chain.acceptance_rates(),
        converged: true,
    };
    stats.converged = std::iter::once(&stats.mean_origin_loop)
        .chain(std::iter::once(&stats.cesaro))
        .chain(std::iter::once(&stats.monomer_density))
        .chain(walk.iter())
        .all(|e| e.converged);
    let table = TwoPointTable {
        kind: "mdd_walk".into(),
        graph: g.name().into(),
        entries: walk
            .iter()
            .enumerate()
            .map(|(y, e)| TwoPointEntry { x: g.origin(), y, value: e.value, err: e.err })
            .collect(),
    };
    (stats, table)
}

/// Visit frequencies of closed configurations, recorded after every move
/// attempt once burn-in is over.
pub fn closed_state_frequencies(g: &Graph, cfg: &ChainConfig) -> Result<BTreeMap<StateKey, f64>> {
    let mut chain = Chain::new(g, cfg)?;
    chain.burn_in(cfg.burn_in, cfg.worm_weight.is_none());
    let mut counts: BTreeMap<StateKey, u64> = BTreeMap::new();
    let mut total = 0u64;
    for _ in cfg.burn_in..cfg.sweeps {
        for _ in 0..g.n_vertices() {
            chain.step();
            if chain.state.is_closed() {
                *counts.entry(chain.state.key(g)).or_insert(0) += 1;
                total += 1;
            }
        }
    }
    Ok(counts.into_iter().map(|(k, c)| (k, c as f64 / total as f64)).collect())
}

/// Total-variation distance between the sampled and the exact distribution
/// of closed configurations.
pub fn closed_tv_distance(g: &Graph, cfg: &ChainConfig) -> Result<f64> {
    let states = crate::exact::mdd_states(g)?;
    let mut exact: BTreeMap<StateKey, f64> = BTreeMap::new();
    for s in &states {
        let w = crate::model::mdd_weight(g, s, cfg.rho, cfg.n_colors)?;
        exact.insert(WormState::from_config(g, s)?.key(g), w);
    }
    let z: f64 = exact.values().sum();
    let sampled = closed_state_frequencies(g, cfg)?;
    let mut tv = 0.0;
    for (k, w) in &exact {
        tv += (w / z - sampled.get(k).copied().unwrap_or(0.0)).abs();
    }
    tv += sampled.iter().filter(|(k, _)| !exact.contains_key(*k)).map(|(_, p)| p).sum::<f64>();
    Ok(tv / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::mdd_expectations;

    fn cfg(rho: f64, n: u32, sweeps: usize, seed: u64) -> ChainConfig {
        ChainConfig { rho, n_colors: n, sweeps, burn_in: sweeps / 10, seed, ..Default::default() }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let g = Graph::slab_torus(4, 1).unwrap();
        let c = cfg(1.0, 2, 2_000, 3);
        let a = sample_mdd(&g, &c).unwrap();
        let b = sample_mdd(&g, &c).unwrap();
        assert_eq!(a, b);
        let other = sample_mdd(&g, &ChainConfig { stream: 1, ..c }).unwrap();
        assert_ne!(a.0.mean_origin_loop, other.0.mean_origin_loop);
    }

    #[test]
    fn c4_matches_exact_loop_statistics() {
        let g = Graph::cycle(4).unwrap();
        for (rho, n) in [(1.0, 1), (0.5, 2)] {
            let ex = mdd_expectations(&g, rho, n).unwrap();
            let (s, w) = sample_mdd(&g, &cfg(rho, n, 100_000, 11)).unwrap();
            assert!(s.mean_origin_loop.z_score(ex.mean_origin_loop) < 4.0, "{:?} vs {}", s.mean_origin_loop, ex.mean_origin_loop);
            for x in 0..4 {
                let e = &w.entries[x];
                assert!((e.value - ex.walk[x]).abs() < 4.0 * e.err + 1e-12, "walk {x}: {e:?} vs {}", ex.walk[x]);
                assert!(s.connected[x].z_score(ex.connected[x]) < 4.0);
            }
        }
    }

    #[test]
    fn c4_total_variation() {
        let g = Graph::cycle(4).unwrap();
        let tv = closed_tv_distance(&g, &cfg(1.0, 1, 200_000, 7)).unwrap();
        assert!(tv < 0.01, "{tv}");
    }

    #[test]
    fn rejects_bad_configs() {
        let g = Graph::cycle(4).unwrap();
        assert!(sample_mdd(&g, &ChainConfig { rho: 0.0, ..Default::default() }).is_err());
        assert!(sample_mdd(&g, &ChainConfig { bins: 16, ..Default::default() }).is_err());
        assert!(sample_mdd(&g, &ChainConfig { sweeps: 10, burn_in: 10, ..Default::default() }).is_err());
    }
}
