//! CZ skeletons of common benchmark circuit families.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::CzCircuit;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Ghz,
    Dj,
    Qft,
    WState,
    Qv,
    TwoLocal,
    ThreeRegular,
    Ising,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Ghz,
        Family::Dj,
        Family::Qft,
        Family::WState,
        Family::Qv,
        Family::TwoLocal,
        Family::ThreeRegular,
        Family::Ising,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ghz => "ghz",
            Self::Dj => "dj",
            Self::Qft => "qft",
            Self::WState => "wstate",
            Self::Qv => "qv",
            Self::TwoLocal => "twolocal",
            Self::ThreeRegular => "3regular",
            Self::Ising => "ising",
        }
    }

    pub fn min_qubits(&self) -> usize {
        match self {
            Self::ThreeRegular => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| GenError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("unknown circuit family `{0}`")]
    UnknownFamily(String),
    #[error("{family} needs at least {min} qubits, got {n}")]
    TooFewQubits { family: Family, n: usize, min: usize },
    #[error("3regular needs an even qubit count, got {0}")]
    OddRegular(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenOptions {
    pub seed: u64,
    /// QV depth (default `n`), Trotter steps for ising (default 5), repetitions
    /// for twolocal (default 3).
    pub depth: Option<usize>,
}

impl Default for GenOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            depth: None,
        }
    }
}

/// Builds the CZ skeleton of `family` on `n` qubits.
pub fn generate(family: Family, n: usize, opts: GenOptions) -> Result<CzCircuit, GenError> {
    let min = family.min_qubits();
    if n < min {
        return Err(GenError::TooFewQubits { family, n, min });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let pairs: Vec<(usize, usize)> = match family {
        Family::Ghz => (0..n - 1).map(|i| (i, i + 1)).collect(),
        Family::Dj => (0..n - 1).map(|i| (i, n - 1)).collect(),
        Family::Qft => qft_pairs(n),
        Family::WState => (0..n - 1).flat_map(|i| [(i, i + 1), (i, i + 1)]).collect(),
        Family::Qv => {
            let mut out = Vec::new();
            let mut perm: Vec<usize> = (0..n).collect();
            for _ in 0..opts.depth.unwrap_or(n) {
                perm.shuffle(&mut rng);
                for pair in perm.chunks_exact(2) {
                    let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                    out.extend([(a, b); 3]);
                }
            }
            out
        }
        Family::TwoLocal => {
            let reps = opts.depth.unwrap_or(3);
            (0..reps)
                .flat_map(|_| (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j))))
                .collect()
        }
        Family::ThreeRegular => {
            if n % 2 == 1 {
                return Err(GenError::OddRegular(n));
            }
            random_cubic_graph(n, &mut rng)
        }
        Family::Ising => {
            let steps = opts.depth.unwrap_or(5);
            let mut out = Vec::new();
            for _ in 0..steps {
                for parity in [0, 1] {
                    for i in (parity..n - 1).step_by(2) {
                        out.extend([(i, i + 1); 2]);
                    }
                }
            }
            out
        }
    };
    Ok(CzCircuit::new(n, pairs).expect("generated gates are valid"))
}

/// Controlled-phase ladder of the QFT, two CZs per controlled phase, grouped
/// into anti-diagonal steps from the last pair down to (0, 1).
fn qft_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for s in (1..=2 * n - 3).rev() {
        let step: Vec<(usize, usize)> = (0..n)
            .rev()
            .filter_map(|i| {
                let j = s.checked_sub(i)?;
                (i < j && j < n).then_some((i, j))
            })
            .collect();
        out.extend(step.iter().copied());
        out.extend(step);
    }
    out
}

/// Uniform-ish random simple 3-regular graph by the pairing model.
fn random_cubic_graph(n: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| [v; 3]).collect();
    loop {
        stubs.shuffle(rng);
        let mut edges = BTreeSet::new();
        let simple = stubs.chunks_exact(2).all(|p| {
            let (a, b) = (p[0].min(p[1]), p[0].max(p[1]));
            a != b && edges.insert((a, b))
        });
        if simple {
            return stubs.chunks_exact(2).map(|p| (p[0].min(p[1]), p[0].max(p[1]))).collect();
        }
    }
}

/// OpenQASM 2 text for a CZ-only circuit.
pub fn to_qasm(c: &CzCircuit) -> String {
    let mut s = format!("OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[{}];\n", c.num_qubits());
    for g in c.gates() {
        s.push_str(&format!("cz q[{}],q[{}];\n", g.a, g.b));
    }
    s
}
