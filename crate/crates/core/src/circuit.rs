//! Gate-level circuit representation.
//!
//! Circuits are restricted to single-qubit gates, `CX`, measurement, reset
//! and barriers. [`GateKind::RemoteCx`] is a composite that only appears
//! between routing and lowering.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CircuitError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    U1(f64),
    U2(f64, f64),
    U3(f64, f64, f64),
    Cx,
    Measure,
    Reset,
    Barrier,
    RemoteCx,
}

impl GateKind {
    /// Number of qubits the gate acts on, `None` for barriers (any width).
    pub fn arity(&self) -> Option<usize> {
        match self {
            GateKind::Cx | GateKind::RemoteCx => Some(2),
            GateKind::Barrier => None,
            _ => Some(1),
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, GateKind::Cx | GateKind::RemoteCx)
    }

    /// Single-qubit unitary (excludes measure, reset and barrier).
    pub fn is_single_qubit_unitary(&self) -> bool {
        !matches!(
            self,
            GateKind::Cx | GateKind::RemoteCx | GateKind::Measure | GateKind::Reset | GateKind::Barrier
        )
    }

    /// Lower-case OpenQASM name of the gate.
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Rx(_) => "rx",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::U1(_) => "u1",
            GateKind::U2(..) => "u2",
            GateKind::U3(..) => "u3",
            GateKind::Cx => "cx",
            GateKind::Measure => "measure",
            GateKind::Reset => "reset",
            GateKind::Barrier => "barrier",
            GateKind::RemoteCx => "remote_cx",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) | GateKind::U1(a) => alloc::vec![a],
            GateKind::U2(a, b) => alloc::vec![a, b],
            GateKind::U3(a, b, c) => alloc::vec![a, b, c],
            _ => Vec::new(),
        }
    }
}

/// Which augmented-graph edge a routed two-qubit gate was placed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Standard,
    Augmented,
}

/// Origin of a gate inserted by a compilation pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// One of the three CXs realising an inserted SWAP.
    Swap,
    /// Interior gate of an expanded remote-CX block. `epr_pair` is the
    /// ancilla pair in block orientation: `.0` neighbours the control.
    RemoteBlock { block: usize, epr_pair: (usize, usize) },
    /// EPR preparation emitted ahead of a remote-CX block in physical mode.
    EprPrep { block: usize, epr_pair: (usize, usize) },
}

impl Provenance {
    pub fn block(&self) -> Option<usize> {
        match *self {
            Provenance::RemoteBlock { block, .. } | Provenance::EprPrep { block, .. } => Some(block),
            Provenance::Swap => None,
        }
    }

    pub fn epr_pair(&self) -> Option<(usize, usize)> {
        match *self {
            Provenance::RemoteBlock { epr_pair, .. } | Provenance::EprPrep { epr_pair, .. } => Some(epr_pair),
            Provenance::Swap => None,
        }
    }
}

/// Classical feed-forward: apply the gate only if `clbit == value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub clbit: usize,
    pub value: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub clbits: Vec<usize>,
    pub condition: Option<Condition>,
    pub edge_kind: Option<EdgeKind>,
    pub provenance: Option<Provenance>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Self {
        Gate { kind, qubits, clbits: Vec::new(), condition: None, edge_kind: None, provenance: None }
    }

    pub fn single(kind: GateKind, q: usize) -> Self {
        Gate::new(kind, alloc::vec![q])
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cx, alloc::vec![control, target])
    }

    pub fn remote_cx(control: usize, target: usize) -> Self {
        Gate::new(GateKind::RemoteCx, alloc::vec![control, target])
    }

    pub fn measure(q: usize, c: usize) -> Self {
        Gate { clbits: alloc::vec![c], ..Gate::single(GateKind::Measure, q) }
    }

    pub fn barrier(qubits: Vec<usize>) -> Self {
        Gate::new(GateKind::Barrier, qubits)
    }

    pub fn with_condition(mut self, clbit: usize, value: bool) -> Self {
        self.condition = Some(Condition { clbit, value });
        self
    }

    pub fn with_edge_kind(mut self, kind: EdgeKind) -> Self {
        self.edge_kind = Some(kind);
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    /// Classical bits read or written by this gate.
    pub fn classical_wires(&self) -> impl Iterator<Item = usize> + '_ {
        self.clbits.iter().copied().chain(self.condition.map(|c| c.clbit))
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        let params = self.kind.params();
        if !params.is_empty() {
            write!(f, "(")?;
            for (i, p) in params.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")?;
        }
        for (i, q) in self.qubits.iter().enumerate() {
            write!(f, "{}q{}", if i == 0 { " " } else { "," }, q)?;
        }
        for c in &self.clbits {
            write!(f, " -> c{c}")?;
        }
        if let Some(cond) = self.condition {
            write!(f, " if c{}=={}", cond.clbit, cond.value as u8)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    pub name: String,
    pub n_qubits: usize,
    pub n_clbits: usize,
    pub gates: Vec<Gate>,
    /// Free-form annotations carried through compilation.
    pub metadata: BTreeMap<String, String>,
}

impl Circuit {
    pub fn new(name: impl Into<String>, n_qubits: usize, n_clbits: usize) -> Self {
        Circuit { name: name.into(), n_qubits, n_clbits, gates: Vec::new(), metadata: BTreeMap::new() }
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Checks indices, arities and qubit distinctness.
    pub fn validate(&self) -> Result<(), CircuitError> {
        for (position, gate) in self.gates.iter().enumerate() {
            if let Some(arity) = gate.kind.arity() {
                if gate.qubits.len() != arity {
                    return Err(CircuitError::Arity {
                        position,
                        gate: gate.kind.name(),
                        expected: arity,
                        found: gate.qubits.len(),
                    });
                }
            }
            for (i, &q) in gate.qubits.iter().enumerate() {
                if q >= self.n_qubits {
                    return Err(CircuitError::QubitOutOfRange { position, qubit: q, n_qubits: self.n_qubits });
                }
                if gate.qubits[..i].contains(&q) {
                    return Err(CircuitError::DuplicateQubit { position, qubit: q });
                }
            }
            for c in gate.classical_wires() {
                if c >= self.n_clbits {
                    return Err(CircuitError::ClbitOutOfRange { position, clbit: c, n_clbits: self.n_clbits });
                }
            }
            if gate.kind == GateKind::Measure && gate.clbits.len() != 1 {
                return Err(CircuitError::Arity {
                    position,
                    gate: "measure",
                    expected: 1,
                    found: gate.clbits.len(),
                });
            }
        }
        Ok(())
    }

    /// Pairs of virtual qubits coupled by two-qubit gates, with multiplicity.
    pub fn interaction_counts(&self) -> BTreeMap<(usize, usize), usize> {
        let mut counts = BTreeMap::new();
        for g in self.gates.iter().filter(|g| g.kind.is_two_qubit()) {
            let (a, b) = (g.qubits[0].min(g.qubits[1]), g.qubits[0].max(g.qubits[1]));
            *counts.entry((a, b)).or_insert(0) += 1;
        }
        counts
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.iter().any(|g| g.kind == GateKind::Measure)
    }
}

/// Per-kind tallies of a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateCounts {
    /// CX gates outside remote-CX blocks (swap CXs included).
    pub standard_cx: usize,
    /// Remote CXs, composite or expanded (one per block).
    pub remote_cx: usize,
    pub single_qubit: usize,
    pub measure: usize,
    pub reset: usize,
}

impl GateCounts {
    /// Standard CXs plus the two local CXs inside every remote block.
    pub fn expanded_cx(&self) -> usize {
        self.standard_cx + 2 * self.remote_cx
    }
}

/// Tallies gates by kind. Gates tagged with remote-block provenance are
/// attributed to their block rather than to `standard_cx`.
pub fn gate_counts(circuit: &Circuit) -> GateCounts {
    let mut counts = GateCounts::default();
    let mut blocks = alloc::collections::BTreeSet::new();
    for g in &circuit.gates {
        if let Some(block) = g.provenance.and_then(|p| p.block()) {
            blocks.insert(block);
        }
        match g.kind {
            GateKind::Cx if g.provenance.and_then(|p| p.block()).is_none() => counts.standard_cx += 1,
            GateKind::Cx => {}
            GateKind::RemoteCx => counts.remote_cx += 1,
            GateKind::Measure => counts.measure += 1,
            GateKind::Reset => counts.reset += 1,
            GateKind::Barrier => {}
            _ => counts.single_qubit += 1,
        }
    }
    counts.remote_cx += blocks.len();
    counts
}
