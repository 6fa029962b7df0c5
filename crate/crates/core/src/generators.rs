//! Benchmark circuit families.

use alloc::format;
use alloc::string::{String, ToString};
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::CircuitError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum BenchmarkSpec {
    Qft { n_qubits: usize },
    Dj { n_qubits: usize },
    External { path: String },
}

impl BenchmarkSpec {
    pub fn name(&self) -> String {
        match self {
            BenchmarkSpec::Qft { n_qubits } => format!("qft_{n_qubits}"),
            BenchmarkSpec::Dj { n_qubits } => format!("dj_{n_qubits}"),
            BenchmarkSpec::External { path } => path.to_string(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            BenchmarkSpec::Qft { .. } => "qft",
            BenchmarkSpec::Dj { .. } => "dj",
            BenchmarkSpec::External { .. } => "external",
        }
    }

    /// Generates the circuit for generated families; `None` for external.
    pub fn generate(&self) -> Option<Result<Circuit, CircuitError>> {
        match *self {
            BenchmarkSpec::Qft { n_qubits } => Some(qft(n_qubits)),
            BenchmarkSpec::Dj { n_qubits } => Some(dj(n_qubits)),
            BenchmarkSpec::External { .. } => None,
        }
    }
}

/// Appends a controlled phase `diag(1, 1, 1, e^{iθ})` up to global phase,
/// using two CXs.
fn controlled_phase(c: &mut Circuit, theta: f64, control: usize, target: usize) {
    c.push(Gate::single(GateKind::Rz(theta / 2.0), control))
        .push(Gate::cx(control, target))
        .push(Gate::single(GateKind::Rz(-theta / 2.0), target))
        .push(Gate::cx(control, target))
        .push(Gate::single(GateKind::Rz(theta / 2.0), target));
}

/// Quantum Fourier transform without the final qubit-reversal swaps.
pub fn qft(n: usize) -> Result<Circuit, CircuitError> {
    if n < 2 {
        return Err(CircuitError::InvalidArgument(format!("qft needs at least 2 qubits, got {n}")));
    }
    let mut c = Circuit::new(format!("qft_{n}"), n, 0);
    for k in 0..n {
        c.push(Gate::single(GateKind::H, k));
        for j in k + 1..n {
            let theta = PI / libm::pow(2.0, (j - k) as f64);
            controlled_phase(&mut c, theta, k, j);
        }
    }
    c.metadata.insert("family".into(), "qft".into());
    c.metadata.insert("bit_reversal".into(), "omitted".into());
    Ok(c)
}

/// Deutsch-Jozsa with the balanced parity oracle on `n - 1` query qubits.
pub fn dj(n: usize) -> Result<Circuit, CircuitError> {
    if n < 2 {
        return Err(CircuitError::InvalidArgument(format!("dj needs at least 2 qubits, got {n}")));
    }
    let oracle = n - 1;
    let mut c = Circuit::new(format!("dj_{n}"), n, 0);
    c.push(Gate::single(GateKind::X, oracle));
    for q in 0..n {
        c.push(Gate::single(GateKind::H, q));
    }
    for q in 0..oracle {
        c.push(Gate::cx(q, oracle));
    }
    for q in 0..oracle {
        c.push(Gate::single(GateKind::H, q));
    }
    c.metadata.insert("family".into(), "dj".into());
    c.metadata.insert("oracle".into(), "balanced_parity".into());
    Ok(c)
}
