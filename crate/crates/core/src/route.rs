//! Atom shuttling between two mappings.
//!
//! Every qubit whose site changes contributes one move. Moves are grouped
//! into AOD batches: members of a batch must be pairwise compatible (the
//! x-order and y-order between any two sources equal those between their
//! targets) and may only land on sites that are empty or vacated by another
//! member of the same batch. Batches are greedy maximal independent sets of
//! the conflict graph. When every remaining move is blocked by a cycle, one
//! atom is parked on a spare site first.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arch::{GridArch, GridPoint};
use crate::embed::Mapping;
use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RouteError {
    #[error("mappings cover {0} and {1} qubits")]
    DomainMismatch(usize, usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReplayError {
    #[error("OccupancyViolation: batch {batch}: qubit {qubit} lands on occupied position {at}")]
    OccupancyViolation { batch: usize, qubit: usize, at: Coord },
    #[error("IncompatibleBatch: batch {batch}: moves of qubits {a} and {b} cross")]
    IncompatibleBatch { batch: usize, a: usize, b: usize },
    #[error("SourceMismatch: batch {batch}: qubit {qubit} is not at {expected}")]
    SourceMismatch { batch: usize, qubit: usize, expected: Coord },
    #[error("DuplicateQubit: batch {batch} moves qubit {qubit} twice")]
    DuplicateQubit { batch: usize, qubit: usize },
    #[error("UnknownQubit: batch {batch} moves qubit {qubit}")]
    UnknownQubit { batch: usize, qubit: usize },
    #[error("OffGrid: qubit {qubit} ends at {at}")]
    OffGrid { qubit: usize, at: Coord },
}

/// A position in half-grid units, so parking spots between traps are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    hx: i64,
    hy: i64,
}

impl Coord {
    pub fn from_halves(hx: i64, hy: i64) -> Self {
        Self { hx, hy }
    }

    pub fn x(&self) -> f64 {
        self.hx as f64 / 2.0
    }

    pub fn y(&self) -> f64 {
        self.hy as f64 / 2.0
    }

    /// The trap site at this position, if it is one.
    pub fn grid_point(&self) -> Option<GridPoint> {
        (self.hx >= 0 && self.hy >= 0 && self.hx % 2 == 0 && self.hy % 2 == 0)
            .then(|| GridPoint::new((self.hx / 2) as usize, (self.hy / 2) as usize))
    }

    fn dist2_halves(&self, other: &Coord) -> i64 {
        let (dx, dy) = (self.hx - other.hx, self.hy - other.hy);
        dx * dx + dy * dy
    }

    /// Euclidean distance in grid units.
    pub fn distance(&self, other: &Coord) -> f64 {
        (self.dist2_halves(other) as f64).sqrt() / 2.0
    }
}

impl From<GridPoint> for Coord {
    fn from(p: GridPoint) -> Self {
        Self {
            hx: 2 * p.x as i64,
            hy: 2 * p.y as i64,
        }
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x(), self.y())
    }
}

impl Serialize for Coord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.grid_point() {
            Some(p) => [p.x as f64, p.y as f64].serialize(s),
            None => [self.x(), self.y()].serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y] = <[f64; 2]>::deserialize(d)?;
        let half = |v: f64| {
            let h = v * 2.0;
            if h.fract() == 0.0 && h.abs() < 1e15 {
                Ok(h as i64)
            } else {
                Err(de::Error::custom(format!("coordinate {v} is not a multiple of 1/2")))
            }
        };
        Ok(Self {
            hx: half(x)?,
            hy: half(y)?,
        })
    }
}

/// Relocation of one atom, `(x, y) -> (x', y')` in grid units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    #[serde(rename = "q")]
    pub qubit: usize,
    pub from: Coord,
    pub to: Coord,
}

impl Move {
    pub fn new(qubit: usize, from: impl Into<Coord>, to: impl Into<Coord>) -> Self {
        Self {
            qubit,
            from: from.into(),
            to: to.into(),
        }
    }

    /// Length in grid units.
    pub fn length(&self) -> f64 {
        self.from.distance(&self.to)
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}: {} -> {}", self.qubit, self.from, self.to)
    }
}

/// Two moves can share an AOD stage iff neither axis order flips.
pub fn compatible(m1: &Move, m2: &Move) -> bool {
    m1.from.hx.cmp(&m2.from.hx) == m1.to.hx.cmp(&m2.to.hx) && m1.from.hy.cmp(&m2.from.hy) == m1.to.hy.cmp(&m2.to.hy)
}

/// Vertex `i` is `moves[i]`; edges join incompatible pairs.
pub fn conflict_graph(moves: &[Move]) -> Graph {
    let mut g = Graph::new(moves.len());
    for i in 0..moves.len() {
        for j in i + 1..moves.len() {
            if !compatible(&moves[i], &moves[j]) {
                g.add_edge(i, j);
            }
        }
    }
    g
}

/// One movement stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveBatch {
    pub moves: Vec<Move>,
    /// Longest displacement in the batch, micrometres.
    pub max_distance_um: f64,
}

impl MoveBatch {
    pub fn new(moves: Vec<Move>, spacing_um: f64) -> Self {
        let max_distance_um = longest_um(&moves, spacing_um);
        Self { moves, max_distance_um }
    }
}

pub fn longest_um(moves: &[Move], spacing_um: f64) -> f64 {
    moves.iter().map(Move::length).fold(0.0, f64::max) * spacing_um
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoutePlan {
    #[serde(rename = "stages")]
    pub batches: Vec<MoveBatch>,
    /// SLM/AOD transfer events, two per executed move.
    pub transfers: usize,
    pub total_max_distance_um: f64,
}

impl RoutePlan {
    pub fn move_count(&self) -> usize {
        self.batches.iter().map(|b| b.moves.len()).sum()
    }
}

/// Non-trivial moves from `f` to `f2`, by ascending qubit.
pub fn extract_moves(f: &Mapping, f2: &Mapping) -> Result<Vec<Move>, RouteError> {
    if f.len() != f2.len() {
        return Err(RouteError::DomainMismatch(f.len(), f2.len()));
    }
    Ok((0..f.len())
        .filter(|&q| f.get(q) != f2.get(q))
        .map(|q| Move::new(q, f.get(q), f2.get(q)))
        .collect())
}

/// Plans batches taking every atom from `f` to `f2`.
pub fn route(f: &Mapping, f2: &Mapping, arch: &GridArch) -> Result<RoutePlan, RouteError> {
    if f.len() != f2.len() {
        return Err(RouteError::DomainMismatch(f.len(), f2.len()));
    }
    let n = f.len();
    let mut pos: Vec<Coord> = f.points().iter().map(|&p| p.into()).collect();
    let target: Vec<Coord> = f2.points().iter().map(|&p| p.into()).collect();
    let mut occupant: BTreeMap<Coord, usize> = pos.iter().enumerate().map(|(q, &c)| (c, q)).collect();
    let mut plan = RoutePlan::default();

    // Each iteration retires at least one move or breaks one cycle.
    for _ in 0..=4 * n + 4 {
        let pending: Vec<Move> = (0..n)
            .filter(|&q| pos[q] != target[q])
            .map(|q| Move {
                qubit: q,
                from: pos[q],
                to: target[q],
            })
            .collect();
        if pending.is_empty() {
            break;
        }
        let mut batch = greedy_batch(&pending, &occupant);
        if batch.is_empty() {
            batch = vec![park(&pending, &pos, &target, &occupant, arch)];
        }
        for m in &batch {
            occupant.remove(&m.from);
        }
        for m in &batch {
            occupant.insert(m.to, m.qubit);
            pos[m.qubit] = m.to;
        }
        plan.transfers += 2 * batch.len();
        let b = MoveBatch::new(batch, arch.spacing_um());
        plan.total_max_distance_um += b.max_distance_um;
        plan.batches.push(b);
    }
    assert!(pos == target, "router failed to converge");
    Ok(plan)
}

/// Greedy maximal independent set of the conflict graph among `pending`,
/// restricted to moves whose destination is free or vacated within the batch.
fn greedy_batch(pending: &[Move], occupant: &BTreeMap<Coord, usize>) -> Vec<Move> {
    let conflicts = conflict_graph(pending);
    let mut order: Vec<usize> = (0..pending.len()).collect();
    order.sort_by(|&a, &b| {
        conflicts
            .degree(a)
            .cmp(&conflicts.degree(b))
            .then(pending[a].length().partial_cmp(&pending[b].length()).unwrap_or(Ordering::Equal))
            .then(pending[a].qubit.cmp(&pending[b].qubit))
    });

    let mut chosen = vec![false; pending.len()];
    let mut slot_of = BTreeMap::new();
    for (i, m) in pending.iter().enumerate() {
        slot_of.insert(m.qubit, i);
    }
    let lands_ok = |i: usize, chosen: &[bool]| match occupant.get(&pending[i].to) {
        None => true,
        Some(q) => slot_of.get(q).is_some_and(|&j| chosen[j]),
    };
    let independent = |i: usize, chosen: &[bool]| conflicts.neighbors(i).all(|j| !chosen[j]);

    for &i in &order {
        if independent(i, &chosen) {
            chosen[i] = true;
        }
    }
    loop {
        let mut changed = false;
        loop {
            let drop: Vec<usize> = (0..pending.len()).filter(|&i| chosen[i] && !lands_ok(i, &chosen)).collect();
            if drop.is_empty() {
                break;
            }
            for i in drop {
                chosen[i] = false;
            }
        }
        for &i in &order {
            if !chosen[i] && independent(i, &chosen) && lands_ok(i, &chosen) {
                chosen[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    order.into_iter().filter(|&i| chosen[i]).map(|i| pending[i]).collect()
}

/// Moves the atom of the shortest pending move to the nearest spare site, or
/// half a site off-grid when no spare site exists.
fn park(
    pending: &[Move],
    pos: &[Coord],
    target: &[Coord],
    occupant: &BTreeMap<Coord, usize>,
    arch: &GridArch,
) -> Move {
    let m = pending
        .iter()
        .min_by(|a, b| {
            a.length()
                .partial_cmp(&b.length())
                .unwrap_or(Ordering::Equal)
                .then(a.qubit.cmp(&b.qubit))
        })
        .expect("pending is non-empty");
    let from = pos[m.qubit];
    let spare = arch
        .points()
        .map(Coord::from)
        .filter(|c| !occupant.contains_key(c) && !target.contains(c))
        .min_by_key(|c| (c.dist2_halves(&from), c.hy, c.hx));
    let to = spare.unwrap_or_else(|| {
        [(1, 1), (-1, 1), (1, -1), (-1, -1)]
            .into_iter()
            .map(|(dx, dy)| Coord::from_halves(from.hx + dx, from.hy + dy))
            .find(|c| !occupant.contains_key(c))
            .expect("an off-grid spot next to a trap is always free")
    });
    Move {
        qubit: m.qubit,
        from,
        to,
    }
}

/// Applies `plan` to `start`, checking every batch, and returns the final
/// mapping.
pub fn replay(plan: &RoutePlan, start: &Mapping, arch: &GridArch) -> Result<Mapping, ReplayError> {
    let mut pos: Vec<Coord> = start.points().iter().map(|&p| p.into()).collect();
    for (bi, batch) in plan.batches.iter().enumerate() {
        apply_batch(bi, &batch.moves, &mut pos)?;
    }
    let mut points = Vec::with_capacity(pos.len());
    for (q, c) in pos.iter().enumerate() {
        match c.grid_point().filter(|&p| arch.contains(p)) {
            Some(p) => points.push(p),
            None => return Err(ReplayError::OffGrid { qubit: q, at: *c }),
        }
    }
    Ok(Mapping::new(points, arch).expect("replay keeps positions distinct"))
}

/// Checks one batch against the current positions and applies it.
pub fn apply_batch(batch: usize, moves: &[Move], pos: &mut [Coord]) -> Result<(), ReplayError> {
    let mut in_batch = vec![false; pos.len()];
    for m in moves {
        if m.qubit >= pos.len() {
            return Err(ReplayError::UnknownQubit { batch, qubit: m.qubit });
        }
        if in_batch[m.qubit] {
            return Err(ReplayError::DuplicateQubit { batch, qubit: m.qubit });
        }
        in_batch[m.qubit] = true;
        if pos[m.qubit] != m.from {
            return Err(ReplayError::SourceMismatch {
                batch,
                qubit: m.qubit,
                expected: m.from,
            });
        }
    }
    for (i, a) in moves.iter().enumerate() {
        for b in &moves[i + 1..] {
            if !compatible(a, b) {
                return Err(ReplayError::IncompatibleBatch {
                    batch,
                    a: a.qubit,
                    b: b.qubit,
                });
            }
            if a.to == b.to {
                return Err(ReplayError::OccupancyViolation {
                    batch,
                    qubit: b.qubit,
                    at: b.to,
                });
            }
        }
    }
    for m in moves {
        if let Some(q) = (0..pos.len()).find(|&q| !in_batch[q] && pos[q] == m.to) {
            let _ = q;
            return Err(ReplayError::OccupancyViolation {
                batch,
                qubit: m.qubit,
                at: m.to,
            });
        }
    }
    for m in moves {
        pos[m.qubit] = m.to;
    }
    Ok(())
}
