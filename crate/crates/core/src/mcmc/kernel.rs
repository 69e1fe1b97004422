//! Exact transition kernel of the worm chain on small graphs.
//!
//! Every draw sequence of a proposal is enumerated, so the kernel is known in
//! rational arithmetic and detailed balance can be checked without sampling.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Graph;
use crate::mcmc::moves::{for_each_path, path_probability, MoveMix, MoveSet};
use crate::mcmc::state::{StateKey, WormState};
use crate::model::{Color, Occupancy, NONE};
use crate::numeric::Scalar;

/// Exact couplings of the extended target.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactCouplings {
    pub rho: BigRational,
    pub n_colors: BigRational,
    pub worm: BigRational,
}

impl ExactCouplings {
    pub fn new(rho: BigRational, n_colors: u32, worm: BigRational) -> ExactCouplings {
        ExactCouplings { rho, n_colors: <BigRational as Scalar>::from_u128(n_colors as u128), worm }
    }
}

/// Unnormalised target weight of a state.
pub fn target_weight(g: &Graph, s: &WormState, c: &ExactCouplings) -> BigRational {
    let mut w = Scalar::powu(&c.rho, s.occ.n_monomers() as u32) * Scalar::powu(&c.n_colors, s.n_closed_loops(g) as u32);
    if !s.is_closed() {
        w *= &c.worm;
    }
    w
}

/// Transition probabilities out of `s`, including the holding probability.
pub fn transitions(ms: &mut MoveSet, s: &WormState, c: &ExactCouplings) -> BTreeMap<StateKey, BigRational> {
    let g = ms.g;
    let key = s.key(g);
    let mut out: BTreeMap<StateKey, BigRational> = BTreeMap::new();
    let mut work = s.clone();
    let mut stay = BigRational::zero();
    for_each_path(
        |draw| ms.propose(&mut work, draw).map(|p| (p, ms.ops.clone())),
        |res, ranges| {
            let prob = path_probability(ranges);
            match res {
                Some((p, ops)) => {
                    let a = p.acceptance_exact(&c.rho, &c.n_colors, &c.worm);
                    stay += &prob * (BigRational::one() - &a);
                    *out.entry(key.after(g, &ops)).or_insert_with(BigRational::zero) += prob * a;
                }
                None => stay += prob,
            }
        },
    );
    *out.entry(key).or_insert_with(BigRational::zero) += stay;
    out
}

/// Every closed or single-walk configuration, by brute force over monomer
/// sets and partial matchings of both colours.
pub fn extended_states(g: &Graph) -> Result<Vec<WormState>> {
    let n = g.n_vertices();
    let m = g.n_edges();
    if n > 12 || m > 20 {
        return Err(Error::BudgetExceeded { what: format!("extended state enumeration on {}", g.name()), limit: 12 });
    }
    let matchings: Vec<u64> = (0..1u64 << m)
        .filter(|&set| {
            let mut used = 0u64;
            (0..m).filter(|e| set >> e & 1 == 1).all(|e| {
                let [a, b] = g.edge(e);
                let hit = used & (1 << a | 1 << b) != 0;
                used |= 1 << a | 1 << b;
                !hit
            })
        })
        .collect();
    let covered = |set: u64| -> u64 {
        (0..m).filter(|e| set >> e & 1 == 1).fold(0, |acc, e| {
            let [a, b] = g.edge(e);
            acc | 1 << a | 1 << b
        })
    };
    let mut out = Vec::new();
    for mask in 0..1u64 << n {
        let fits: Vec<u64> = matchings.iter().copied().filter(|&s| covered(s) & mask == 0).collect();
        for &blue in &fits {
            for &red in &fits {
                let mut occ = Occupancy::empty(n);
                for v in 0..n {
                    occ.monomer[v] = mask >> v & 1 == 1;
                }
                for (c, set) in [(Color::Blue, blue), (Color::Red, red)] {
                    let edges: Vec<usize> = (0..m).filter(|e| set >> e & 1 == 1).collect();
                    occ.place(g, c, &edges)?;
                }
                let missing: usize = (0..n)
                    .filter(|&v| !occ.monomer[v])
                    .map(|v| Color::BOTH.iter().filter(|c| occ.partner[c.idx()][v] == NONE).count())
                    .sum();
                if missing == 0 || missing == 2 {
                    out.push(WormState::from_occupancy(g, occ)?);
                }
            }
        }
    }
    Ok(out)
}

/// Result of an exact kernel check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelReport {
    pub graph: String,
    pub n_states: usize,
    pub n_closed: usize,
    /// States reachable from the all-monomer configuration.
    pub n_reachable: usize,
    /// Configurations listed by the independent brute-force enumeration.
    pub n_enumerated: usize,
    pub rows_stochastic: bool,
    pub detailed_balance: bool,
    pub irreducible: bool,
}

impl KernelReport {
    pub fn pass(&self) -> bool {
        self.rows_stochastic && self.detailed_balance && self.irreducible && self.n_reachable == self.n_enumerated
    }
}

/// Builds the exact kernel on the states reachable from the all-monomer
/// configuration and checks stochasticity, detailed balance and that the
/// reachable set is the whole extended space.
pub fn check_kernel(g: &Graph, mix: MoveMix, c: &ExactCouplings) -> Result<KernelReport> {
    mix.validate()?;
    let enumerated = extended_states(g)?;
    let mut ms = MoveSet::new(g, mix);
    let start = WormState::all_monomers(g.n_vertices());
    let mut index: HashMap<StateKey, usize> = HashMap::new();
    let mut states = vec![start.clone()];
    let mut rows: Vec<BTreeMap<StateKey, BigRational>> = Vec::new();
    index.insert(start.key(g), 0);
    let mut i = 0;
    while i < states.len() {
        let row = transitions(&mut ms, &states[i], c);
        for k in row.keys() {
            if !index.contains_key(k) {
                index.insert(k.clone(), states.len());
                states.push(WormState::from_key(g, k)?);
            }
        }
        rows.push(row);
        i += 1;
    }
    let weights: Vec<BigRational> = states.iter().map(|s| target_weight(g, s, c)).collect();
    let rows_stochastic = rows.iter().all(|r| r.values().fold(BigRational::zero(), |a, p| a + p) == BigRational::one());
    let mut detailed_balance = true;
    for (a, row) in rows.iter().enumerate() {
        for (k, p) in row {
            let b = index[k];
            let back = rows[b].get(&states[a].key(g)).cloned().unwrap_or_else(BigRational::zero);
            if &weights[a] * p != &weights[b] * back {
                detailed_balance = false;
            }
        }
    }
    let enumerated_keys: std::collections::HashSet<StateKey> = enumerated.iter().map(|s| s.key(g)).collect();
    let irreducible = enumerated_keys.len() == states.len() && states.iter().all(|s| enumerated_keys.contains(&s.key(g)));
    Ok(KernelReport {
        graph: g.name().into(),
        n_states: states.len(),
        n_closed: states.iter().filter(|s| s.is_closed()).count(),
        n_reachable: states.len(),
        n_enumerated: enumerated.len(),
        rows_stochastic,
        detailed_balance,
        irreducible,
    })
}

/// Exact stationary distribution of the chain over reachable states.
pub fn exact_distribution(g: &Graph, c: &ExactCouplings) -> Result<Vec<(StateKey, f64)>> {
    let states = extended_states(g)?;
    let w: Vec<BigRational> = states.iter().map(|s| target_weight(g, s, c)).collect();
    let z = w.iter().fold(BigRational::zero(), |a, x| a + x);
    Ok(states.iter().zip(&w).map(|(s, x)| (s.key(g), Scalar::to_f64(&(x / &z)))).collect())
}

/// Closed-sector connectivity from the all-monomer configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectivityReport {
    pub graph: String,
    pub n_reachable: usize,
    /// Every proposed move has a proposed inverse.
    pub symmetric: bool,
}

/// Breadth-first search over the moves of `mix` restricted to closed states,
/// starting from `start`. Moves leaving the closed sector are ignored.
pub fn closed_reachable(g: &Graph, mix: MoveMix, start: &WormState) -> Result<ConnectivityReport> {
    let mut ms = MoveSet::new(g, mix);
    ms.count_loops = false;
    let mut index: HashMap<StateKey, u32> = HashMap::new();
    let mut keys: Vec<StateKey> = vec![start.key(g)];
    let mut adj: Vec<Vec<u32>> = Vec::new();
    index.insert(keys[0].clone(), 0);
    let mut queue = VecDeque::from([0u32]);
    let mut scratch: Vec<StateKey> = Vec::new();
    while let Some(i) = queue.pop_front() {
        let key = keys[i as usize].clone();
        let mut s = WormState::from_key(g, &key)?;
        scratch.clear();
        for_each_path(
            |draw| ms.propose(&mut s, draw).map(|_| key.after(g, &ms.ops)),
            |res, _| {
                if let Some(k) = res {
                    scratch.push(k);
                }
            },
        );
        let mut row = Vec::with_capacity(scratch.len());
        for k in scratch.drain(..) {
            if k == key {
                continue;
            }
            let j = match index.get(&k) {
                Some(&j) => j,
                None => {
                    let j = keys.len() as u32;
                    index.insert(k.clone(), j);
                    keys.push(k);
                    queue.push_back(j);
                    j
                }
            };
            row.push(j);
        }
        row.sort_unstable();
        row.dedup();
        if adj.len() <= i as usize {
            adj.resize(i as usize + 1, Vec::new());
        }
        adj[i as usize] = row;
    }
    let symmetric = adj.iter().enumerate().all(|(i, row)| row.iter().all(|&j| adj[j as usize].binary_search(&(i as u32)).is_ok()));
    Ok(ConnectivityReport { graph: g.name().into(), n_reachable: keys.len(), symmetric })
}

/// Outcome of reducing every closed configuration to all monomers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub graph: String,
    pub n_states: usize,
    /// Every state reached the all-monomer configuration.
    pub all_reduced: bool,
    /// Every step used has its inverse among the proposals of the reverse move.
    pub reversible: bool,
    pub max_steps: usize,
}

impl ReductionReport {
    pub fn pass(&self) -> bool {
        self.all_reduced && self.reversible
    }
}

/// Reduces `s` to all monomers with open, retract and close moves. Each step
/// goes through the proposal code with scripted draws; the inverse step is
/// checked by enumerating the reverse move kind. Returns the step count.
fn reduce(ms: &mut MoveSet, mut s: WormState) -> Option<(usize, bool)> {
    use crate::mcmc::moves::MoveKind;
    let g = ms.g;
    let n = g.n_vertices();
    let mut steps = 0;
    let mut reversible = true;
    while (0..n).any(|v| !s.is_monomer(v)) {
        let (kind, draws, reverse) = if s.is_closed() {
            let v = (0..n).find(|&v| !s.is_monomer(v))?;
            (MoveKind::Open, vec![v, 0], MoveKind::Close)
        } else {
            let (a, b) = s.endpoints()?;
            if a == b {
                (MoveKind::Close, vec![0], MoveKind::Open)
            } else {
                (MoveKind::Retract, vec![0], MoveKind::Shift)
            }
        };
        let mut it = draws.into_iter();
        let before = s.key(g);
        ms.propose_kind(&mut s, kind, &mut |k| it.next().filter(|&d| d < k).unwrap_or(0))?;
        let ops = ms.ops.clone();
        s.apply(g, &ops);
        let mut found = false;
        let mut probe = s.clone();
        for_each_path(
            |draw| ms.propose_kind(&mut probe, reverse, draw).map(|_| before.after(g, &[]) == s.key(g).after(g, &ms.ops)),
            |hit, _| found |= hit == Some(true),
        );
        reversible &= found;
        steps += 1;
        if steps > 4 * n + 4 {
            return None;
        }
    }
    Some((steps, reversible))
}

/// Checks that every closed configuration reduces to all monomers through
/// moves whose inverses are proposed, which with the symmetric support makes
/// the chain irreducible on the extended space.
pub fn reduction_check(g: &Graph, mix: MoveMix) -> Result<ReductionReport> {
    mix.validate()?;
    if mix.open == 0 {
        return crate::error::invalid("reduction needs the worm moves");
    }
    let states = crate::exact::mdd_states(g)?;
    let mut ms = MoveSet::new(g, mix);
    ms.count_loops = false;
    let mut all_reduced = true;
    let mut reversible = true;
    let mut max_steps = 0;
    for cfg in &states {
        match reduce(&mut ms, WormState::from_config(g, cfg)?) {
            Some((k, r)) => {
                max_steps = max_steps.max(k);
                reversible &= r;
            }
            None => all_reduced = false,
        }
    }
    Ok(ReductionReport { graph: g.name().into(), n_states: states.len(), all_reduced, reversible, max_steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::mdd_enumerate;
    use crate::numeric::ratio;

    #[test]
    fn c4_kernel_is_reversible_and_irreducible() {
        let g = Graph::cycle(4).unwrap();
        for (rho, n) in [(ratio(1, 2), 1), (ratio(2, 1), 2)] {
            let c = ExactCouplings::new(rho, n, ratio(1, 4));
            let r = check_kernel(&g, MoveMix::default(), &c).unwrap();
            assert!(r.pass(), "{r:?}");
            assert_eq!(r.n_closed as u128, mdd_enumerate(&g).unwrap().n_states);
        }
    }

    #[test]
    fn k2_kernel() {
        let g = Graph::k2();
        let c = ExactCouplings::new(ratio(1, 1), 2, ratio(1, 2));
        let r = check_kernel(&g, MoveMix::default(), &c).unwrap();
        assert!(r.pass(), "{r:?}");
        // all monomers, a two-step loop, one empty vertex (x2), a one-edge walk (x2)
        assert_eq!(r.n_states, 6);
    }

    #[test]
    fn parallel_edges_kernel() {
        let g = Graph::slab_torus(2, 1).unwrap();
        let c = ExactCouplings::new(ratio(3, 2), 2, ratio(1, 3));
        let r = check_kernel(&g, MoveMix::default(), &c).unwrap();
        assert!(r.pass(), "{r:?}");
    }

    #[test]
    fn closed_moves_alone_are_not_ergodic() {
        // two antipodal monomers leave a hexagon with no 4-cycle to grow a loop
        let g = Graph::slab_torus(2, 2).unwrap();
        let r = closed_reachable(&g, MoveMix::closed(), &WormState::all_monomers(g.n_vertices())).unwrap();
        assert!(r.symmetric);
        assert_eq!(r.n_reachable as u128 + 512, mdd_enumerate(&g).unwrap().n_states);
        let red = reduction_check(&g, MoveMix::default()).unwrap();
        assert!(red.pass(), "{red:?}");
    }
}
