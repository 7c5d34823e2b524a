//! Random circuits with a symmetric (COE) structure and their exact mapping
//! onto complex-weighted classical Ising models.
//!
//! Gate set: `H`, `SX` (sqrt X), `SY` (sqrt Y), `SYT` (its transpose), `T`
//! and `CZ`. Every non-diagonal gate carries amplitude `1/sqrt 2` and a phase
//! `exp(i pi/4 Phi)` with `Phi` affine-bilinear in the neighbouring spins.
//!
//! Qubit `l` is binary digit `l` from the left of a basis-state index, the
//! same convention as the spin [`FockBasis`](crate::hilbert::FockBasis).

mod ising;
mod oracle;

pub use ising::{map_to_ising, partition_function, IsingGraph, SpinNode, MAX_FREE_SPINS};
pub use oracle::{amplitude_oracle, circuit_unitary, verify_mapping, MAX_ORACLE_QUBITS};

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    SX(usize),
    SY(usize),
    SYT(usize),
    T(usize),
    CZ(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::SX(q) | Gate::SY(q) | Gate::SYT(q) | Gate::T(q) => vec![q],
            Gate::CZ(a, b) => vec![a, b],
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, Gate::T(_) | Gate::CZ(..))
    }

    /// The gate implementing this gate's transpose.
    pub fn transposed(&self) -> Gate {
        match *self {
            Gate::SY(q) => Gate::SYT(q),
            Gate::SYT(q) => Gate::SY(q),
            g => g,
        }
    }

    fn mnemonic(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::SX(_) => "SX",
            Gate::SY(_) => "SY",
            Gate::SYT(_) => "SYT",
            Gate::T(_) => "T",
            Gate::CZ(..) => "CZ",
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::CZ(a, b) => write!(f, "CZ {a} {b}"),
            g => write!(f, "{} {}", g.mnemonic(), g.qubits()[0]),
        }
    }
}

/// Gates grouped in layers; gates of one layer act on disjoint qubits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    n_qubits: usize,
    layers: Vec<Vec<Gate>>,
}

impl Circuit {
    pub fn new(n_qubits: usize, layers: Vec<Vec<Gate>>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidParameter("circuit needs at least one qubit".into()));
        }
        for (k, layer) in layers.iter().enumerate() {
            let mut used = vec![false; n_qubits];
            for g in layer {
                for q in g.qubits() {
                    if q >= n_qubits {
                        return Err(Error::InvalidParameter(format!(
                            "layer {k}: qubit {q} out of range for {n_qubits} qubits"
                        )));
                    }
                    if used[q] {
                        return Err(Error::InvalidParameter(format!(
                            "layer {k}: qubit {q} used twice"
                        )));
                    }
                    used[q] = true;
                }
            }
        }
        Ok(Self { n_qubits, layers })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flatten()
    }

    pub fn non_diagonal_count(&self) -> usize {
        self.gates().filter(|g| !g.is_diagonal()).count()
    }

    /// Circuit implementing the transpose: layers reversed, `SY <-> SYT`.
    pub fn transposed(&self) -> Circuit {
        let layers = self
            .layers
            .iter()
            .rev()
            .map(|l| l.iter().map(Gate::transposed).collect())
            .collect();
        Circuit {
            n_qubits: self.n_qubits,
            layers,
        }
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::InvalidParameter("qubit counts differ".into()));
        }
        let mut layers = self.layers.clone();
        layers.extend(other.layers.iter().cloned());
        Ok(Circuit {
            n_qubits: self.n_qubits,
            layers,
        })
    }

    /// Parses the line-per-layer text format. Gates on a line are separated
    /// by whitespace, `;` or `,`; `#` starts a comment; blank lines are
    /// skipped.
    pub fn parse(n_qubits: usize, text: &str) -> Result<Circuit> {
        let mut layers = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ';' || c == ',')
                .filter(|t| !t.is_empty())
                .collect();
            if tokens.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let qubit = |tok: Option<&&str>| -> Result<usize> {
                let tok = tok.ok_or_else(|| err("missing qubit index".into()))?;
                tok.parse()
                    .map_err(|_| err(format!("bad qubit index `{tok}`")))
            };
            let mut layer = Vec::new();
            let mut i = 0;
            while i < tokens.len() {
                let gate = match tokens[i] {
                    "H" => Gate::H(qubit(tokens.get(i + 1))?),
                    "SX" => Gate::SX(qubit(tokens.get(i + 1))?),
                    "SY" => Gate::SY(qubit(tokens.get(i + 1))?),
                    "SYT" => Gate::SYT(qubit(tokens.get(i + 1))?),
                    "T" => Gate::T(qubit(tokens.get(i + 1))?),
                    "CZ" => {
                        let g = Gate::CZ(qubit(tokens.get(i + 1))?, qubit(tokens.get(i + 2))?);
                        i += 1;
                        g
                    }
                    other => return Err(err(format!("unknown gate `{other}`"))),
                };
                if let Gate::CZ(a, b) = gate {
                    if a == b {
                        return Err(err("CZ needs two distinct qubits".into()));
                    }
                }
                layer.push(gate);
                i += 2;
            }
            layers.push(layer);
        }
        Circuit::new(n_qubits, layers).map_err(|e| match e {
            Error::InvalidParameter(m) => Error::Parse { line: 0, message: m },
            e => e,
        })
    }

    /// Text form accepted by [`Circuit::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for layer in &self.layers {
            let line: Vec<String> = layer.iter().map(|g| g.to_string()).collect();
            out.push_str(&line.join("; "));
            out.push('\n');
        }
        out
    }
}

/// `U^T U` for a random circuit `U`: a Hadamard layer followed by
/// `n_layers` layers of random single-qubit gates from `{SX, SY, T}` and CZ
/// gates on alternating nearest-neighbour pairs (pairs starting at even
/// qubits on even layers, odd qubits on odd layers), then the transpose.
pub fn build_coe_circuit(n_qubits: usize, n_layers: usize, seed: u64) -> Result<Circuit> {
    if n_qubits == 0 {
        return Err(Error::InvalidParameter("circuit needs at least one qubit".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = vec![(0..n_qubits).map(Gate::H).collect::<Vec<_>>()];
    for layer_idx in 1..=n_layers {
        let mut layer = Vec::new();
        let mut paired = vec![false; n_qubits];
        let mut q = layer_idx % 2;
        while q + 1 < n_qubits {
            layer.push(Gate::CZ(q, q + 1));
            paired[q] = true;
            paired[q + 1] = true;
            q += 2;
        }
        for (q, &busy) in paired.iter().enumerate() {
            if busy {
                continue;
            }
            layer.push(match rng.random_range(0..3) {
                0 => Gate::SX(q),
                1 => Gate::SY(q),
                _ => Gate::T(q),
            });
        }
        layers.push(layer);
    }
    let forward = Circuit::new(n_qubits, layers)?;
    forward.then(&forward.transposed())
}
