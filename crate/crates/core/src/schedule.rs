//! Compiled schedules: Rydberg stages per subcircuit, interleaved with the
//! movement stages that carry one embedding to the next.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::{GridArch, GridPoint};
use crate::circuit::CzCircuit;
use crate::divide::{divide_circuit, DivideError, DivideOptions};
use crate::embed::Mapping;
use crate::route::{self, apply_batch, Coord, MoveBatch, ReplayError, RouteError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    /// One CZ per Rydberg stage, in circuit order.
    #[default]
    Serial,
    /// First-fit packing of each layer under the restriction radius.
    Packed,
}

impl FromStr for ExecMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "serial" => Ok(Self::Serial),
            "packed" => Ok(Self::Packed),
            _ => Err(format!("unknown mode `{s}` (expected serial or packed)")),
        }
    }
}

impl fmt::Display for ExecMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Serial => "serial",
            Self::Packed => "packed",
        })
    }
}

/// A CZ gate placed on its two sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedGate {
    pub gate: usize,
    pub qubits: [usize; 2],
    pub points: [GridPoint; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Stage {
    Rydberg { gates: Vec<PlacedGate> },
    #[serde(rename = "move")]
    Movement(MoveBatch),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Counters {
    /// CZ gates.
    pub m: usize,
    /// Rydberg stages.
    pub h: usize,
    /// Atom transfers.
    pub s: usize,
    /// Sum of per-stage maximum move distances, micrometres.
    #[serde(rename = "D")]
    pub d_um: f64,
    /// Movement stages.
    #[serde(rename = "M")]
    pub move_stages: usize,
    /// Subcircuits.
    #[serde(rename = "P")]
    pub parts: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub n: usize,
    pub mode: ExecMode,
    pub initial_mapping: Mapping,
    pub counters: Counters,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CompileOptions {
    pub mode: ExecMode,
    pub divide: DivideOptions,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("gate {gate} on qubits {a},{b} is out of interaction range at {pa} and {pb}")]
    GateOutOfRange {
        gate: usize,
        a: usize,
        b: usize,
        pa: GridPoint,
        pb: GridPoint,
    },
    #[error("layer range {0:?} exceeds the circuit")]
    BadRange(Range<usize>),
    #[error(transparent)]
    Divide(#[from] DivideError),
    #[error(transparent)]
    Route(#[from] RouteError),
}

/// Rydberg stages for the layers `layers` of `c` executed under `f`.
pub fn schedule_gates(
    c: &CzCircuit,
    layers: Range<usize>,
    f: &Mapping,
    arch: &GridArch,
    mode: ExecMode,
) -> Result<Vec<Vec<PlacedGate>>, ScheduleError> {
    if layers.start > layers.end || layers.end > c.depth() || f.len() != c.num_qubits() {
        return Err(ScheduleError::BadRange(layers));
    }
    let mut stages: Vec<Vec<PlacedGate>> = Vec::new();
    for layer in &c.layers()[layers] {
        let first_of_layer = stages.len();
        for &g in layer {
            let gate = c.gates()[g];
            let placed = PlacedGate {
                gate: g,
                qubits: [gate.a, gate.b],
                points: [f.get(gate.a), f.get(gate.b)],
            };
            if !arch.connected(placed.points[0], placed.points[1]) {
                return Err(ScheduleError::GateOutOfRange {
                    gate: g,
                    a: gate.a,
                    b: gate.b,
                    pa: placed.points[0],
                    pb: placed.points[1],
                });
            }
            let slot = match mode {
                ExecMode::Serial => None,
                ExecMode::Packed => stages[first_of_layer..]
                    .iter()
                    .position(|st| st.iter().all(|o| fits_with(&placed, o, arch)))
                    .map(|i| first_of_layer + i),
            };
            match slot {
                Some(i) => stages[i].push(placed),
                None => stages.push(vec![placed]),
            }
        }
    }
    Ok(stages)
}

fn fits_with(a: &PlacedGate, b: &PlacedGate, arch: &GridArch) -> bool {
    let disjoint = a.qubits.iter().all(|q| !b.qubits.contains(q));
    disjoint
        && arch
            .may_run_parallel((a.points[0], a.points[1]), (b.points[0], b.points[1]))
            .unwrap_or(false)
}

/// Divides, embeds, schedules and routes `c` on `arch`.
pub fn compile(c: &CzCircuit, arch: &GridArch, opts: CompileOptions) -> Result<Schedule, ScheduleError> {
    let n = c.num_qubits();
    let division = divide_circuit(c, arch, opts.divide)?;
    let initial_mapping = match division.parts.first() {
        Some(p) => p.embedding.clone(),
        None => Mapping::trivial(n, arch).map_err(|_| DivideError::TooManyQubits {
            n,
            sites: arch.site_count(),
        })?,
    };
    let mut stages = Vec::new();
    let mut counters = Counters {
        m: c.gate_count(),
        parts: division.len(),
        n,
        ..Counters::default()
    };
    for (i, part) in division.parts.iter().enumerate() {
        if i > 0 {
            let plan = route::route(&division.parts[i - 1].embedding, &part.embedding, arch)?;
            counters.s += plan.transfers;
            counters.d_um += plan.total_max_distance_um;
            counters.move_stages += plan.batches.len();
            stages.extend(plan.batches.into_iter().map(Stage::Movement));
        }
        let rydberg = schedule_gates(c, part.layers.clone(), &part.embedding, arch, opts.mode)?;
        counters.h += rydberg.len();
        stages.extend(rydberg.into_iter().map(|gates| Stage::Rydberg { gates }));
    }
    Ok(Schedule {
        n,
        mode: opts.mode,
        initial_mapping,
        counters,
        stages,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    QubitCountMismatch { schedule: usize, circuit: usize },
    InvalidMapping(String),
    /// A gate is missing, duplicated, unknown or on the wrong qubits.
    GateCoverage(String),
    GateOrder { stage: usize, gate: usize, qubit: usize },
    GateOutOfRange { stage: usize, gate: usize },
    ParallelViolation { stage: usize, a: usize, b: usize },
    QubitConflict { stage: usize, a: usize, b: usize },
    PositionMismatch { stage: usize, gate: usize, qubit: usize },
    OccupancyViolation { stage: usize, qubit: usize },
    IncompatibleBatch { stage: usize, a: usize, b: usize },
    MoveSourceMismatch { stage: usize, qubit: usize },
    CounterMismatch { counter: &'static str, reported: String, actual: String },
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Self::QubitCountMismatch { .. } => "QubitCountMismatch",
            Self::InvalidMapping(_) => "InvalidMapping",
            Self::GateCoverage(_) => "GateCoverage",
            Self::GateOrder { .. } => "GateOrder",
            Self::GateOutOfRange { .. } => "GateOutOfRange",
            Self::ParallelViolation { .. } => "ParallelViolation",
            Self::QubitConflict { .. } => "QubitConflict",
            Self::PositionMismatch { .. } => "PositionMismatch",
            Self::OccupancyViolation { .. } => "OccupancyViolation",
            Self::IncompatibleBatch { .. } => "IncompatibleBatch",
            Self::MoveSourceMismatch { .. } => "MoveSourceMismatch",
            Self::CounterMismatch { .. } => "CounterMismatch",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.name())?;
        match self {
            Self::QubitCountMismatch { schedule, circuit } => {
                write!(f, "schedule has {schedule} qubits, circuit has {circuit}")
            }
            Self::InvalidMapping(m) | Self::GateCoverage(m) => f.write_str(m),
            Self::GateOrder { stage, gate, qubit } => {
                write!(f, "stage {stage}: gate {gate} runs out of order on qubit {qubit}")
            }
            Self::GateOutOfRange { stage, gate } => {
                write!(f, "stage {stage}: gate {gate} exceeds the interaction radius")
            }
            Self::ParallelViolation { stage, a, b } => {
                write!(f, "stage {stage}: gates {a} and {b} violate the restriction radius")
            }
            Self::QubitConflict { stage, a, b } => write!(f, "stage {stage}: gates {a} and {b} share a qubit"),
            Self::PositionMismatch { stage, gate, qubit } => {
                write!(f, "stage {stage}: gate {gate} places qubit {qubit} away from its atom")
            }
            Self::OccupancyViolation { stage, qubit } => {
                write!(f, "stage {stage}: qubit {qubit} lands on an occupied position")
            }
            Self::IncompatibleBatch { stage, a, b } => {
                write!(f, "stage {stage}: moves of qubits {a} and {b} cross")
            }
            Self::MoveSourceMismatch { stage, qubit } => {
                write!(f, "stage {stage}: move of qubit {qubit} starts away from its atom")
            }
            Self::CounterMismatch {
                counter,
                reported,
                actual,
            } => write!(f, "{counter} reported {reported}, recomputed {actual}"),
        }
    }
}

/// Replays `sched` against `c` and `arch` and lists every inconsistency.
pub fn verify_schedule(sched: &Schedule, c: &CzCircuit, arch: &GridArch) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = c.num_qubits();
    if sched.n != n || sched.initial_mapping.len() != n {
        out.push(Violation::QubitCountMismatch {
            schedule: sched.n.max(sched.initial_mapping.len()),
            circuit: n,
        });
        return out;
    }
    if let Err(e) = Mapping::new(sched.initial_mapping.points().to_vec(), arch) {
        out.push(Violation::InvalidMapping(format!("initial mapping: {e}")));
        return out;
    }

    let mut on_qubit: Vec<Vec<usize>> = vec![Vec::new(); n];
    for g in c.gates() {
        on_qubit[g.a].push(g.index);
        on_qubit[g.b].push(g.index);
    }
    let mut next = vec![0usize; n];
    let mut done = vec![false; c.gate_count()];
    let mut pos: Vec<Coord> = sched.initial_mapping.points().iter().map(|&p| p.into()).collect();
    let (mut h, mut moves, mut move_stages, mut d_um) = (0usize, 0usize, 0usize, 0.0f64);

    for (si, stage) in sched.stages.iter().enumerate() {
        match stage {
            Stage::Rydberg { gates } => {
                h += 1;
                for pg in gates {
                    check_gate(si, pg, c, arch, &pos, &on_qubit, &mut next, &mut done, &mut out);
                }
                for (i, a) in gates.iter().enumerate() {
                    for b in &gates[i + 1..] {
                        if a.qubits.iter().any(|q| b.qubits.contains(q)) {
                            out.push(Violation::QubitConflict {
                                stage: si,
                                a: a.gate,
                                b: b.gate,
                            });
                        } else if !arch
                            .may_run_parallel((a.points[0], a.points[1]), (b.points[0], b.points[1]))
                            .unwrap_or(false)
                        {
                            out.push(Violation::ParallelViolation {
                                stage: si,
                                a: a.gate,
                                b: b.gate,
                            });
                        }
                    }
                }
            }
            Stage::Movement(batch) => {
                move_stages += 1;
                moves += batch.moves.len();
                d_um += route::longest_um(&batch.moves, arch.spacing_um());
                if batch.moves.iter().any(|m| m.qubit >= n) {
                    out.push(Violation::GateCoverage(format!("stage {si}: move of an unknown qubit")));
                    continue;
                }
                if let Err(e) = apply_batch(si, &batch.moves, &mut pos) {
                    out.push(match e {
                        ReplayError::OccupancyViolation { qubit, .. } => Violation::OccupancyViolation { stage: si, qubit },
                        ReplayError::IncompatibleBatch { a, b, .. } => Violation::IncompatibleBatch { stage: si, a, b },
                        ReplayError::SourceMismatch { qubit, .. } | ReplayError::DuplicateQubit { qubit, .. } => {
                            Violation::MoveSourceMismatch { stage: si, qubit }
                        }
                        other => Violation::GateCoverage(other.to_string()),
                    });
                    for m in &batch.moves {
                        pos[m.qubit] = m.to;
                    }
                }
            }
        }
    }
    let missing: Vec<usize> = (0..done.len()).filter(|&g| !done[g]).collect();
    if !missing.is_empty() {
        out.push(Violation::GateCoverage(format!("gates never executed: {missing:?}")));
    }

    let k = &sched.counters;
    let mut expect = |counter: &'static str, reported: usize, actual: usize| {
        if reported != actual {
            out.push(Violation::CounterMismatch {
                counter,
                reported: reported.to_string(),
                actual: actual.to_string(),
            });
        }
    };
    expect("m", k.m, c.gate_count());
    expect("h", k.h, h);
    expect("s", k.s, 2 * moves);
    expect("M", k.move_stages, move_stages);
    expect("n", k.n, n);
    let parts = divide_circuit(
        c,
        arch,
        DivideOptions {
            embed_limit: 1,
            chain: false,
        },
    )
    .map(|d| d.len());
    if let Ok(p) = parts {
        expect("P", k.parts, p);
    }
    if (k.d_um - d_um).abs() > 1e-6 * (1.0 + d_um) {
        out.push(Violation::CounterMismatch {
            counter: "D",
            reported: k.d_um.to_string(),
            actual: d_um.to_string(),
        });
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn check_gate(
    si: usize,
    pg: &PlacedGate,
    c: &CzCircuit,
    arch: &GridArch,
    pos: &[Coord],
    on_qubit: &[Vec<usize>],
    next: &mut [usize],
    done: &mut [bool],
    out: &mut Vec<Violation>,
) {
    let Some(gate) = c.gates().get(pg.gate) else {
        out.push(Violation::GateCoverage(format!("stage {si}: unknown gate {}", pg.gate)));
        return;
    };
    let same = (pg.qubits == [gate.a, gate.b]) || (pg.qubits == [gate.b, gate.a]);
    if !same {
        out.push(Violation::GateCoverage(format!(
            "stage {si}: gate {} acts on {:?}, circuit has ({}, {})",
            pg.gate, pg.qubits, gate.a, gate.b
        )));
        return;
    }
    if done[pg.gate] {
        out.push(Violation::GateCoverage(format!("stage {si}: gate {} repeated", pg.gate)));
        return;
    }
    done[pg.gate] = true;
    for (&q, &p) in pg.qubits.iter().zip(&pg.points) {
        if pos[q] != Coord::from(p) {
            out.push(Violation::PositionMismatch {
                stage: si,
                gate: pg.gate,
                qubit: q,
            });
        }
        if on_qubit[q].get(next[q]) == Some(&pg.gate) {
            next[q] += 1;
        } else {
            out.push(Violation::GateOrder {
                stage: si,
                gate: pg.gate,
                qubit: q,
            });
            if let Some(i) = on_qubit[q].iter().position(|&g| g == pg.gate) {
                next[q] = next[q].max(i + 1);
            }
        }
    }
    let on_grid = pg.points.iter().all(|&p| arch.contains(p));
    if !on_grid || !arch.connected(pg.points[0], pg.points[1]) {
        out.push(Violation::GateOutOfRange { stage: si, gate: pg.gate });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::Factor;
    use crate::route::Move;

    fn arch(side: usize, r_int: Factor, r_restr: Factor) -> GridArch {
        GridArch::new(side, 3.0, r_int, r_restr).unwrap()
    }

    #[test]
    fn serial_ghz_chain() {
        let c = CzCircuit::new(9, (0..8).map(|i| (i, i + 1))).unwrap();
        let a = arch(3, Factor::integer(2), Factor::integer(4));
        let s = compile(&c, &a, CompileOptions::default()).unwrap();
        assert_eq!(s.counters.h, 8);
        assert_eq!(s.counters.parts, 1);
        assert_eq!(s.counters.move_stages, 0);
        assert!(verify_schedule(&s, &c, &a).is_empty());
    }

    #[test]
    fn empty_circuit_compiles_to_nothing() {
        let c = CzCircuit::new(4, []).unwrap();
        let a = arch(2, Factor::integer(2), Factor::integer(4));
        let s = compile(&c, &a, CompileOptions::default()).unwrap();
        assert!(s.stages.is_empty());
        assert_eq!(
            s.counters,
            Counters {
                n: 4,
                ..Counters::default()
            }
        );
        assert!(verify_schedule(&s, &c, &a).is_empty());
    }

    #[test]
    fn packed_far_gates_share_a_stage() {
        let c = CzCircuit::new(4, [(0, 1), (2, 3)]).unwrap();
        let a = arch(6, Factor::integer(1), Factor::integer(1));
        let f = Mapping::new(
            vec![
                GridPoint::new(0, 0),
                GridPoint::new(1, 0),
                GridPoint::new(4, 4),
                GridPoint::new(5, 4),
            ],
            &a,
        )
        .unwrap();
        let packed = schedule_gates(&c, 0..1, &f, &a, ExecMode::Packed).unwrap();
        assert_eq!(packed.len(), 1);
        let serial = schedule_gates(&c, 0..1, &f, &a, ExecMode::Serial).unwrap();
        assert_eq!(serial.len(), 2);
    }

    #[test]
    fn out_of_range_gate_is_rejected() {
        let c = CzCircuit::new(2, [(0, 1)]).unwrap();
        let a = arch(4, Factor::integer(2), Factor::integer(4));
        let f = Mapping::new(vec![GridPoint::new(0, 0), GridPoint::new(3, 0)], &a).unwrap();
        assert!(matches!(
            schedule_gates(&c, 0..1, &f, &a, ExecMode::Serial),
            Err(ScheduleError::GateOutOfRange { gate: 0, .. })
        ));
    }

    #[test]
    fn verifier_catches_tampering() {
        let c = CzCircuit::new(2, [(0, 1)]).unwrap();
        let a = arch(4, Factor::integer(2), Factor::integer(4));
        let mut s = compile(&c, &a, CompileOptions::default()).unwrap();
        s.initial_mapping = Mapping::new(vec![GridPoint::new(0, 0), GridPoint::new(3, 0)], &a).unwrap();
        s.stages = vec![Stage::Rydberg {
            gates: vec![PlacedGate {
                gate: 0,
                qubits: [0, 1],
                points: [GridPoint::new(0, 0), GridPoint::new(3, 0)],
            }],
        }];
        let v = verify_schedule(&s, &c, &a);
        assert_eq!(v.iter().map(Violation::name).collect::<Vec<_>>(), ["GateOutOfRange"]);

        let mut s = compile(&c, &a, CompileOptions::default()).unwrap();
        s.counters.d_um = 1.0;
        let v = verify_schedule(&s, &c, &a);
        assert_eq!(v.iter().map(Violation::name).collect::<Vec<_>>(), ["CounterMismatch"]);

        let other = CzCircuit::new(2, [(0, 1), (0, 1)]).unwrap();
        let s = compile(&c, &a, CompileOptions::default()).unwrap();
        assert!(verify_schedule(&s, &other, &a)
            .iter()
            .any(|v| v.name() == "GateCoverage"));
    }

    #[test]
    fn movement_stages_are_tracked() {
        let c = CzCircuit::new(2, [(0, 1)]).unwrap();
        let a = arch(3, Factor::integer(1), Factor::integer(2));
        let start = Mapping::new(vec![GridPoint::new(0, 0), GridPoint::new(2, 0)], &a).unwrap();
        let batch = MoveBatch::new(vec![Move::new(1, GridPoint::new(2, 0), GridPoint::new(1, 0))], 3.0);
        let s = Schedule {
            n: 2,
            mode: ExecMode::Serial,
            initial_mapping: start,
            counters: Counters {
                m: 1,
                h: 1,
                s: 2,
                d_um: 3.0,
                move_stages: 1,
                parts: 1,
                n: 2,
            },
            stages: vec![
                Stage::Movement(batch),
                Stage::Rydberg {
                    gates: vec![PlacedGate {
                        gate: 0,
                        qubits: [0, 1],
                        points: [GridPoint::new(0, 0), GridPoint::new(1, 0)],
                    }],
                },
            ],
        };
        assert!(verify_schedule(&s, &c, &a).is_empty());
    }

    #[test]
    fn stage_json_shape() {
        let st = Stage::Movement(MoveBatch::new(
            vec![Move::new(3, GridPoint::new(0, 1), GridPoint::new(1, 0))],
            3.0,
        ));
        let v: serde_json::Value = serde_json::to_value(&st).unwrap();
        assert_eq!(v["type"], "move");
        assert_eq!(v["moves"][0]["q"], 3);
        assert_eq!(v["moves"][0]["to"], serde_json::json!([1.0, 0.0]));
        let back: Stage = serde_json::from_value(v).unwrap();
        assert_eq!(back, st);
    }
}
