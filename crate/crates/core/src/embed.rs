//! Qubit mappings and subgraph-monomorphism search from interaction graphs
//! into the architecture graph.
//!
//! The search is a VF2-style backtracking matcher. Interaction-graph
//! vertices with at least one edge (the "core") are matched in descending
//! degree order (ties by ascending qubit id), candidate sites are tried in
//! row-major order, and isolated qubits are placed after each core match.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::{GridArch, GridPoint};
use crate::graph::Graph;

/// Default cap on the number of embeddings enumerated per subcircuit.
pub const DEFAULT_EMBED_LIMIT: usize = 1000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbedError {
    #[error("qubits {0} and {1} are mapped to the same site {2}")]
    NotInjective(usize, usize, GridPoint),
    #[error("qubit {0} is mapped outside the grid to {1}")]
    OutOfGrid(usize, GridPoint),
    #[error("no candidate embeddings to choose from")]
    NoCandidates,
    #[error("mapping covers {got} qubits, expected {expected}")]
    DomainMismatch { expected: usize, got: usize },
}

/// Injective assignment of program qubits `0..n` to grid sites.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mapping(Vec<GridPoint>);

impl Mapping {
    pub fn new(points: Vec<GridPoint>, arch: &GridArch) -> Result<Self, EmbedError> {
        let mut owner = vec![None; arch.site_count()];
        for (q, &p) in points.iter().enumerate() {
            if !arch.contains(p) {
                return Err(EmbedError::OutOfGrid(q, p));
            }
            let slot = &mut owner[arch.index(p)];
            if let Some(other) = *slot {
                return Err(EmbedError::NotInjective(other, q, p));
            }
            *slot = Some(q);
        }
        Ok(Self(points))
    }

    /// Row-major identity placement: qubit `q` at site index `q`.
    pub fn trivial(n: usize, arch: &GridArch) -> Result<Self, EmbedError> {
        Self::new((0..n).map(|q| arch.point(q)).collect(), arch)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, q: usize) -> GridPoint {
        self.0[q]
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.0
    }

    /// Sum over qubits of the Euclidean distance (grid units) between the two
    /// placements.
    pub fn displacement(&self, other: &Mapping) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a.dist2(b) as f64).sqrt())
            .sum()
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, p) in self.0.iter().enumerate() {
            if q > 0 {
                f.write_str(" ")?;
            }
            write!(f, "q{q}->{p}")?;
        }
        Ok(())
    }
}

/// True iff every interaction-graph edge lands on an architecture edge.
pub fn is_embedding(m: &Mapping, ig: &Graph, arch: &GridArch) -> bool {
    m.len() >= ig.node_count() && ig.edges().all(|(a, b)| arch.connected(m.get(a), m.get(b)))
}

/// Enumerates up to `limit` embeddings of `ig` into `arch`, isolated qubits
/// filled into free sites in row-major order.
pub fn find_embeddings(ig: &Graph, arch: &GridArch, limit: usize) -> Vec<Mapping> {
    find_embeddings_near(ig, arch, limit, None)
}

/// Like [`find_embeddings`], but isolated qubits first try to stay where
/// `prev` put them.
pub fn find_embeddings_near(
    ig: &Graph,
    arch: &GridArch,
    limit: usize,
    prev: Option<&Mapping>,
) -> Vec<Mapping> {
    let mut out = Vec::new();
    if limit == 0 || ig.node_count() > arch.site_count() {
        return out;
    }
    let Some(mut matcher) = Matcher::new(ig, arch) else {
        return out;
    };
    matcher.search(0, &mut |core: &[usize]| {
        out.push(complete(ig, arch, core, prev));
        out.len() < limit
    });
    out
}

pub fn is_embeddable(ig: &Graph, arch: &GridArch) -> bool {
    !find_embeddings(ig, arch, 1).is_empty()
}

/// Picks the candidate closest to `prev` by total displacement; the first
/// candidate wins ties and the case without `prev`.
pub fn choose_embedding(candidates: &[Mapping], prev: Option<&Mapping>) -> Result<Mapping, EmbedError> {
    let first = candidates.first().ok_or(EmbedError::NoCandidates)?;
    let Some(prev) = prev else {
        return Ok(first.clone());
    };
    let mut best = first;
    let mut best_cost = prev.displacement(first);
    for c in &candidates[1..] {
        let cost = prev.displacement(c);
        if cost < best_cost - 1e-9 {
            best = c;
            best_cost = cost;
        }
    }
    Ok(best.clone())
}

/// Places isolated qubits around a matched core. `core[q]` is a site index
/// or `usize::MAX` for unmatched (isolated) qubits.
fn complete(ig: &Graph, arch: &GridArch, core: &[usize], prev: Option<&Mapping>) -> Mapping {
    let mut used = vec![false; arch.site_count()];
    let mut site = core.to_vec();
    for &s in core.iter().filter(|&&s| s != usize::MAX) {
        used[s] = true;
    }
    if let Some(prev) = prev {
        for q in 0..ig.node_count() {
            if site[q] == usize::MAX && q < prev.len() {
                let s = arch.index(prev.get(q));
                if !used[s] {
                    used[s] = true;
                    site[q] = s;
                }
            }
        }
    }
    let mut free = (0..arch.site_count()).filter(|&s| !used[s]);
    for s in site.iter_mut().filter(|s| **s == usize::MAX) {
        *s = free.next().expect("grid has room for every qubit");
    }
    Mapping(site.into_iter().map(|s| arch.point(s)).collect())
}

/// Fixed-width set of site indices.
#[derive(Clone)]
struct SiteSet(Vec<u64>);

impl SiteSet {
    fn empty(sites: usize) -> Self {
        SiteSet(vec![0; sites.div_ceil(64)])
    }

    fn insert(&mut self, s: usize) {
        self.0[s / 64] |= 1 << (s % 64);
    }

    fn remove(&mut self, s: usize) {
        self.0[s / 64] &= !(1 << (s % 64));
    }

    fn intersect(&mut self, other: &SiteSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= b;
        }
    }

    fn union(&mut self, other: &SiteSet) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Members in ascending order.
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    i * 64 + b
                })
            })
        })
    }
}

/// Backtracking matcher with forward checking: every unmatched core vertex
/// keeps the set of sites still open to it, so dead branches are cut as soon
/// as some domain empties. Pruning never reorders the enumeration.
struct Matcher<'a> {
    ig: &'a Graph,
    /// Core vertices in matching order.
    order: Vec<usize>,
    nbr_sets: Vec<SiteSet>,
    site_of: Vec<usize>,
    /// Domains of `order[depth..]` at each depth.
    domains: Vec<Vec<SiteSet>>,
    sites: usize,
}

impl<'a> Matcher<'a> {
    fn new(ig: &'a Graph, arch: &GridArch) -> Option<Self> {
        let target = arch.graph();
        let sites = target.node_count();
        let mut order = ig.non_isolated();
        order.sort_by_key(|&v| (std::cmp::Reverse(ig.degree(v)), v));
        if order.len() > sites {
            return None;
        }
        // Degree-sequence domination is necessary for a monomorphism.
        let mut tdeg: Vec<usize> = (0..sites).map(|s| target.degree(s)).collect();
        tdeg.sort_unstable_by(|a, b| b.cmp(a));
        if order.iter().zip(&tdeg).any(|(&v, &d)| ig.degree(v) > d) {
            return None;
        }
        let nbr_sets: Vec<SiteSet> = (0..sites)
            .map(|s| {
                let mut set = SiteSet::empty(sites);
                for t in target.neighbors(s) {
                    set.insert(t);
                }
                set
            })
            .collect();
        let initial: Vec<SiteSet> = order
            .iter()
            .map(|&v| {
                let mut set = SiteSet::empty(sites);
                for s in (0..sites).filter(|&s| target.degree(s) >= ig.degree(v)) {
                    set.insert(s);
                }
                set
            })
            .collect();
        let mut domains = vec![Vec::new(); order.len() + 1];
        domains[0] = initial;
        Some(Self {
            ig,
            order,
            nbr_sets,
            site_of: vec![usize::MAX; ig.node_count()],
            domains,
            sites,
        })
    }

    /// Depth-first search; `emit` returns `false` to stop. Returns `false`
    /// once stopped.
    fn search(&mut self, depth: usize, emit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if depth == self.order.len() {
            return emit(&self.site_of);
        }
        let v = self.order[depth];
        let candidates: Vec<usize> = self.domains[depth][0].iter().collect();
        for s in candidates {
            if self.narrow(depth, v, s) {
                self.site_of[v] = s;
                let keep_going = self.search(depth + 1, emit);
                self.site_of[v] = usize::MAX;
                if !keep_going {
                    return false;
                }
            }
        }
        true
    }

    /// Builds the domains for `depth + 1` after matching `v` to `s`; false if
    /// some later vertex is left without options.
    fn narrow(&mut self, depth: usize, v: usize, s: usize) -> bool {
        let rest = &self.order[depth + 1..];
        let mut next = Vec::with_capacity(rest.len());
        let mut union = SiteSet::empty(self.sites);
        for (i, &u) in rest.iter().enumerate() {
            let mut d = self.domains[depth][i + 1].clone();
            d.remove(s);
            if self.ig.has_edge(u, v) {
                d.intersect(&self.nbr_sets[s]);
            }
            if d.is_empty() {
                return false;
            }
            union.union(&d);
            next.push(d);
        }
        if union.len() < rest.len() || !has_system_of_distinct_reps(&next, self.sites) {
            return false;
        }
        self.domains[depth + 1] = next;
        true
    }
}

/// Whether every domain can receive its own site (bipartite matching by
/// augmenting paths).
fn has_system_of_distinct_reps(domains: &[SiteSet], sites: usize) -> bool {
    fn augment(v: usize, domains: &[SiteSet], owner: &mut [usize], seen: &mut [bool]) -> bool {
        for s in domains[v].iter() {
            if !seen[s] {
                seen[s] = true;
                if owner[s] == usize::MAX || augment(owner[s], domains, owner, seen) {
                    owner[s] = v;
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![usize::MAX; sites];
    let mut seen = vec![false; sites];
    for v in 0..domains.len() {
        seen.iter_mut().for_each(|x| *x = false);
        if !augment(v, domains, &mut owner, &mut seen) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::Factor;

    fn p(x: usize, y: usize) -> GridPoint {
        GridPoint::new(x, y)
    }

    fn king3() -> GridArch {
        GridArch::new(3, 3.0, Factor::sqrt(2), Factor::sqrt(8)).unwrap()
    }

    fn unit(side: usize) -> GridArch {
        GridArch::new(side, 3.0, Factor::integer(1), Factor::integer(1)).unwrap()
    }

    #[test]
    fn mapping_validation() {
        let arch = unit(2);
        assert!(matches!(
            Mapping::new(vec![p(0, 0), p(0, 0)], &arch),
            Err(EmbedError::NotInjective(0, 1, _))
        ));
        assert!(matches!(
            Mapping::new(vec![p(2, 0)], &arch),
            Err(EmbedError::OutOfGrid(0, _))
        ));
    }

    #[test]
    fn k5_does_not_fit_the_square_lattice() {
        let k5 = Graph::from_edges(5, (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))));
        assert!(find_embeddings(&k5, &unit(3), 10).is_empty());
        let any = Mapping::trivial(5, &unit(3)).unwrap();
        assert!(!is_embedding(&any, &k5, &unit(3)));
    }

    #[test]
    fn edgeless_graph_always_embeds() {
        let g = Graph::new(4);
        let m = Mapping::new(vec![p(2, 2), p(0, 0), p(1, 2), p(2, 0)], &king3()).unwrap();
        assert!(is_embedding(&m, &g, &king3()));
        let found = find_embeddings(&g, &king3(), 5);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0], Mapping::trivial(4, &king3()).unwrap());
    }

    #[test]
    fn path_into_square_has_eight_embeddings() {
        let p4 = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
        let all = find_embeddings(&p4, &unit(2), usize::MAX);
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|m| is_embedding(m, &p4, &unit(2))));
    }

    #[test]
    fn limit_is_respected() {
        let p4 = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
        assert_eq!(find_embeddings(&p4, &unit(2), 3).len(), 3);
        assert!(find_embeddings(&p4, &unit(2), 0).is_empty());
    }

    #[test]
    fn isolated_qubits_keep_previous_sites() {
        let g = Graph::from_edges(3, [(0, 1)]);
        let prev = Mapping::new(vec![p(0, 0), p(1, 0), p(2, 2)], &king3()).unwrap();
        let found = find_embeddings_near(&g, &king3(), 1, Some(&prev));
        assert_eq!(found[0].get(2), p(2, 2));
    }

    #[test]
    fn choose_prefers_previous_mapping() {
        let arch = king3();
        let a = Mapping::new(vec![p(0, 0), p(1, 0)], &arch).unwrap();
        let b = Mapping::new(vec![p(2, 2), p(1, 1)], &arch).unwrap();
        assert_eq!(choose_embedding(&[a.clone(), b.clone()], None).unwrap(), a);
        assert_eq!(choose_embedding(&[a.clone(), b.clone()], Some(&b)).unwrap(), b);
        assert_eq!(choose_embedding(&[], None), Err(EmbedError::NoCandidates));
    }
}
