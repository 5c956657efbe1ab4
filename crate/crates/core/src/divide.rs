//! Greedy layer-granular division of a CZ circuit into subcircuits whose
//! interaction graphs embed in the architecture graph.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::GridArch;
use crate::circuit::CzCircuit;
use crate::embed::{self, is_embedding, Mapping, DEFAULT_EMBED_LIMIT};
use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DivideError {
    #[error("layer {0} cannot be embedded on its own")]
    UnembeddableLayer(usize),
    #[error("{n} qubits do not fit on a grid with {sites} sites")]
    TooManyQubits { n: usize, sites: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivideOptions {
    /// Embeddings enumerated per subcircuit before choosing one.
    pub embed_limit: usize,
    /// Bias each embedding towards the previous subcircuit's embedding.
    pub chain: bool,
}

impl Default for DivideOptions {
    fn default() -> Self {
        Self {
            embed_limit: DEFAULT_EMBED_LIMIT,
            chain: true,
        }
    }
}

/// A run of consecutive layers executed under one embedding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subcircuit {
    pub layers: Range<usize>,
    pub embedding: Mapping,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Division {
    pub parts: Vec<Subcircuit>,
}

impl Division {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// Splits `c` into maximal embeddable layer intervals, left to right.
pub fn divide_circuit(c: &CzCircuit, arch: &GridArch, opts: DivideOptions) -> Result<Division, DivideError> {
    let n = c.num_qubits();
    if n > arch.site_count() {
        return Err(DivideError::TooManyQubits {
            n,
            sites: arch.site_count(),
        });
    }
    let mut parts: Vec<Subcircuit> = Vec::new();
    let mut start = 0;
    let mut graph = Graph::new(n);
    let mut witness: Option<Mapping> = None;

    let close = |range: Range<usize>, graph: &Graph, parts: &mut Vec<Subcircuit>| {
        let prev = if opts.chain {
            parts.last().map(|p| p.embedding.clone())
        } else {
            None
        };
        let candidates = embed::find_embeddings_near(graph, arch, opts.embed_limit.max(1), prev.as_ref());
        let embedding = embed::choose_embedding(&candidates, prev.as_ref())
            .expect("interval was embeddable when it was grown");
        parts.push(Subcircuit {
            layers: range,
            embedding,
        });
    };

    for (i, layer) in c.layers().iter().enumerate() {
        let mut grown = graph.clone();
        let mut fresh = false;
        for &g in layer {
            let gate = c.gates()[g];
            fresh |= grown.add_edge(gate.a, gate.b);
        }
        if !fresh || witness.as_ref().is_some_and(|w| is_embedding(w, &grown, arch)) {
            graph = grown;
            continue;
        }
        if let Some(m) = embed::find_embeddings(&grown, arch, 1).pop() {
            witness = Some(m);
            graph = grown;
            continue;
        }
        if i == start {
            return Err(DivideError::UnembeddableLayer(i));
        }
        close(start..i, &graph, &mut parts);
        start = i;
        graph = c.interaction_graph(i..i + 1).expect("layer index in range");
        witness = embed::find_embeddings(&graph, arch, 1).pop();
        if witness.is_none() {
            return Err(DivideError::UnembeddableLayer(i));
        }
    }
    if c.depth() > 0 {
        close(start..c.depth(), &graph, &mut parts);
    }
    Ok(Division { parts })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DivisionViolation {
    /// Part `i` does not start where part `i - 1` ended (or at layer 0).
    IntervalGap(usize),
    IntervalOverlap(usize),
    EmptyInterval(usize),
    /// The parts do not reach the last layer.
    IncompleteCoverage { covered: usize, layers: usize },
    WrongDomain(usize),
    InvalidEmbedding(usize),
    /// Part `i` could absorb the next layer and stay embeddable.
    NotMaximal(usize),
}

impl fmt::Display for DivisionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::IntervalGap(i) => write!(f, "IntervalGap: part {i} leaves layers uncovered before it"),
            Self::IntervalOverlap(i) => write!(f, "IntervalOverlap: part {i} overlaps its predecessor"),
            Self::EmptyInterval(i) => write!(f, "EmptyInterval: part {i} has no layers"),
            Self::IncompleteCoverage { covered, layers } => {
                write!(f, "IncompleteCoverage: parts cover {covered} of {layers} layers")
            }
            Self::WrongDomain(i) => write!(f, "WrongDomain: embedding of part {i} has the wrong qubit count"),
            Self::InvalidEmbedding(i) => write!(f, "InvalidEmbedding: part {i} is not embedded"),
            Self::NotMaximal(i) => write!(f, "NotMaximal: part {i} could absorb the next layer"),
        }
    }
}

/// Re-checks coverage, order, embedding validity and greedy maximality.
pub fn verify_division(div: &Division, c: &CzCircuit, arch: &GridArch) -> Vec<DivisionViolation> {
    let mut out = Vec::new();
    let mut cursor = 0;
    for (i, part) in div.parts.iter().enumerate() {
        let r = &part.layers;
        if r.start > cursor {
            out.push(DivisionViolation::IntervalGap(i));
        } else if r.start < cursor {
            out.push(DivisionViolation::IntervalOverlap(i));
        }
        if r.is_empty() {
            out.push(DivisionViolation::EmptyInterval(i));
        }
        cursor = cursor.max(r.end);
        if part.embedding.len() != c.num_qubits() {
            out.push(DivisionViolation::WrongDomain(i));
            continue;
        }
        match c.interaction_graph(r.clone()) {
            Ok(ig) if is_embedding(&part.embedding, &ig, arch) => {}
            _ => out.push(DivisionViolation::InvalidEmbedding(i)),
        }
        if i + 1 < div.parts.len() && r.end < c.depth() {
            if let Ok(ig) = c.interaction_graph(r.start..r.end + 1) {
                if embed::is_embeddable(&ig, arch) {
                    out.push(DivisionViolation::NotMaximal(i));
                }
            }
        }
    }
    if cursor != c.depth() {
        out.push(DivisionViolation::IncompleteCoverage {
            covered: cursor,
            layers: c.depth(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::Factor;

    fn arch(side: usize, r_int: Factor) -> GridArch {
        GridArch::new(side, 3.0, r_int, Factor::integer(4).max(r_int)).unwrap()
    }

    #[test]
    fn empty_circuit_has_no_parts() {
        let c = CzCircuit::new(3, []).unwrap();
        let d = divide_circuit(&c, &arch(2, Factor::integer(1)), DivideOptions::default()).unwrap();
        assert!(d.is_empty());
        assert!(verify_division(&d, &c, &arch(2, Factor::integer(1))).is_empty());
    }

    #[test]
    fn embeddable_chain_is_one_part() {
        let c = CzCircuit::new(9, (0..8).map(|i| (i, i + 1))).unwrap();
        let a = arch(3, Factor::integer(1));
        let d = divide_circuit(&c, &a, DivideOptions::default()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.parts[0].layers, 0..8);
        assert!(verify_division(&d, &c, &a).is_empty());
    }

    #[test]
    fn too_many_qubits() {
        let c = CzCircuit::new(5, [(0, 1)]).unwrap();
        assert!(matches!(
            divide_circuit(&c, &arch(2, Factor::integer(1)), DivideOptions::default()),
            Err(DivideError::TooManyQubits { .. })
        ));
    }

    #[test]
    fn triangle_splits_on_the_square_lattice() {
        // A triangle never embeds with nearest-neighbor connectivity.
        let c = CzCircuit::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let a = arch(2, Factor::integer(1));
        let d = divide_circuit(&c, &a, DivideOptions::default()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.parts[1].layers, 2..3);
        assert!(verify_division(&d, &c, &a).is_empty());
    }

    #[test]
    fn detects_broken_divisions() {
        let c = CzCircuit::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let a = arch(2, Factor::integer(1));
        let m = Mapping::new(
            vec![
                a.point(0),
                a.point(1),
                a.point(3),
                a.point(2),
            ],
            &a,
        )
        .unwrap();
        let split = Division {
            parts: vec![
                Subcircuit {
                    layers: 0..1,
                    embedding: m.clone(),
                },
                Subcircuit {
                    layers: 1..3,
                    embedding: m.clone(),
                },
            ],
        };
        assert_eq!(verify_division(&split, &c, &a), vec![DivisionViolation::NotMaximal(0)]);

        let overlapping = Division {
            parts: vec![
                Subcircuit {
                    layers: 0..2,
                    embedding: m.clone(),
                },
                Subcircuit {
                    layers: 1..3,
                    embedding: m,
                },
            ],
        };
        let v = verify_division(&overlapping, &c, &a);
        assert!(v.contains(&DivisionViolation::IntervalOverlap(1)));
    }
}
