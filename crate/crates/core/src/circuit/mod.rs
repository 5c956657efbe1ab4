//! CZ-only circuit representation, ASAP layering and interaction graphs.
//!
//! Layers are indexed from 0 and layer intervals are half-open
//! `Range<usize>` values over layer indices.

mod qasm;

use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

pub use qasm::{parse_qasm, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("gate {index} acts twice on qubit {qubit}")]
    SelfLoop { index: usize, qubit: usize },
    #[error("gate {index} uses qubit {qubit}, but the circuit has {n} qubits")]
    QubitOutOfRange { index: usize, qubit: usize, n: usize },
    #[error("layer interval {start}..{end} is not within 0..{layers}")]
    InvalidInterval {
        start: usize,
        end: usize,
        layers: usize,
    },
    #[error("canonical dump line {line}: {message}")]
    Canonical { line: usize, message: String },
}

/// A two-qubit CZ gate at position `index` of its circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CzGate {
    pub index: usize,
    pub a: usize,
    pub b: usize,
}

impl CzGate {
    pub fn acts_on(&self, q: usize) -> bool {
        self.a == q || self.b == q
    }

    pub fn shares_qubit(&self, other: &CzGate) -> bool {
        self.acts_on(other.a) || self.acts_on(other.b)
    }
}

/// Ordered CZ gates over `n` program qubits together with their ASAP layers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CzCircuit {
    n: usize,
    gates: Vec<CzGate>,
    layers: Vec<Vec<usize>>,
}

impl CzCircuit {
    /// Builds a layered circuit from qubit pairs in program order.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, CircuitError> {
        let mut gates = Vec::new();
        for (index, (a, b)) in pairs.into_iter().enumerate() {
            for q in [a, b] {
                if q >= n {
                    return Err(CircuitError::QubitOutOfRange { index, qubit: q, n });
                }
            }
            if a == b {
                return Err(CircuitError::SelfLoop { index, qubit: a });
            }
            gates.push(CzGate { index, a, b });
        }
        Ok(layer_circuit(Self {
            n,
            gates,
            layers: Vec::new(),
        }))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[CzGate] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Gate indices of every layer, in layer order.
    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Gates of a layer interval in layer order (gate order inside a layer).
    pub fn gates_in(&self, range: Range<usize>) -> Result<Vec<CzGate>, CircuitError> {
        self.check_interval(&range)?;
        Ok(self.layers[range]
            .iter()
            .flatten()
            .map(|&i| self.gates[i])
            .collect())
    }

    /// Interaction graph of the gates in a layer interval. Every qubit of the
    /// circuit is a vertex; qubits untouched by the interval are isolated.
    pub fn interaction_graph(&self, range: Range<usize>) -> Result<Graph, CircuitError> {
        self.check_interval(&range)?;
        let mut g = Graph::new(self.n);
        for layer in &self.layers[range] {
            for &i in layer {
                g.add_edge(self.gates[i].a, self.gates[i].b);
            }
        }
        Ok(g)
    }

    fn check_interval(&self, range: &Range<usize>) -> Result<(), CircuitError> {
        if range.start > range.end || range.end > self.layers.len() {
            return Err(CircuitError::InvalidInterval {
                start: range.start,
                end: range.end,
                layers: self.layers.len(),
            });
        }
        Ok(())
    }

    /// Canonical text dump: `qubits <n>` followed by one `cz <a> <b>` per gate.
    pub fn to_canonical(&self) -> String {
        let mut out = format!("qubits {}\n", self.n);
        for g in &self.gates {
            let _ = writeln!(out, "cz {} {}", g.a, g.b);
        }
        out
    }

    pub fn from_canonical(text: &str) -> Result<Self, CircuitError> {
        let mut n = None;
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| CircuitError::Canonical {
                line: i + 1,
                message: message.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match (fields.as_slice(), n) {
                (["qubits", count], None) => {
                    n = Some(count.parse::<usize>().map_err(|_| err("bad qubit count"))?);
                }
                (["cz", a, b], Some(_)) => {
                    let a = a.parse::<usize>().map_err(|_| err("bad qubit id"))?;
                    let b = b.parse::<usize>().map_err(|_| err("bad qubit id"))?;
                    pairs.push((a, b));
                }
                (_, None) => return Err(err("expected `qubits <n>` header")),
                _ => return Err(err("expected `cz <a> <b>`")),
            }
        }
        let n = n.ok_or(CircuitError::Canonical {
            line: 0,
            message: "missing `qubits <n>` header".into(),
        })?;
        Self::new(n, pairs)
    }
}

/// Recomputes the ASAP layering of `c`. A gate goes into the layer right
/// after the latest layer used by either of its qubits; gates sharing a layer
/// keep their program order.
pub fn layer_circuit(mut c: CzCircuit) -> CzCircuit {
    let mut next_free = vec![0usize; c.n];
    let mut layers: Vec<Vec<usize>> = Vec::new();
    for g in &c.gates {
        let layer = next_free[g.a].max(next_free[g.b]);
        if layer == layers.len() {
            layers.push(Vec::new());
        }
        layers[layer].push(g.index);
        next_free[g.a] = layer + 1;
        next_free[g.b] = layer + 1;
    }
    c.layers = layers;
    c
}
