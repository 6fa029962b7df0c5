//! Dependency DAG over a circuit's gates and depth metrics.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::CircuitError;

/// Gate dependency graph. Node `i` is `circuit.gates[i]`; a gate depends on
/// the most recent earlier gate sharing any qubit or classical bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitDag {
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

impl CircuitDag {
    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn predecessors(&self, node: usize) -> &[usize] {
        &self.preds[node]
    }

    pub fn successors(&self, node: usize) -> &[usize] {
        &self.succs[node]
    }

    pub fn edge_count(&self) -> usize {
        self.preds.iter().map(Vec::len).sum()
    }

    /// In-degree of every node.
    pub fn in_degrees(&self) -> Vec<usize> {
        self.preds.iter().map(Vec::len).collect()
    }
}

pub fn build_dag(circuit: &Circuit) -> Result<CircuitDag, CircuitError> {
    circuit.validate()?;
    let n = circuit.gates.len();
    let mut last_q: Vec<Option<usize>> = vec![None; circuit.n_qubits];
    let mut last_c: Vec<Option<usize>> = vec![None; circuit.n_clbits];
    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    for (i, gate) in circuit.gates.iter().enumerate() {
        let mut p: Vec<usize> = gate
            .qubits
            .iter()
            .filter_map(|&q| last_q[q])
            .chain(gate.classical_wires().filter_map(|c| last_c[c]))
            .collect();
        p.sort_unstable();
        p.dedup();
        for &j in &p {
            succs[j].push(i);
        }
        preds[i] = p;
        for &q in &gate.qubits {
            last_q[q] = Some(i);
        }
        for c in gate.classical_wires() {
            last_c[c] = Some(i);
        }
    }
    Ok(CircuitDag { preds, succs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthMode {
    #[default]
    AllGates,
    TwoQubitOnly,
}

/// Layers a gate occupies under `mode`. Barriers never count.
pub fn gate_weight(gate: &Gate, mode: DepthMode) -> usize {
    match (gate.kind, mode) {
        (GateKind::Barrier, _) => 0,
        (_, DepthMode::AllGates) => 1,
        (k, DepthMode::TwoQubitOnly) => usize::from(k.is_two_qubit()),
    }
}

/// ASAP finish layer of every gate (1-based; 0 for zero-weight gates with
/// no weighted ancestors).
pub fn asap_layers(circuit: &Circuit, dag: &CircuitDag, mode: DepthMode) -> Vec<usize> {
    let mut finish = vec![0usize; dag.len()];
    for i in 0..dag.len() {
        let ready = dag.predecessors(i).iter().map(|&p| finish[p]).max().unwrap_or(0);
        finish[i] = ready + gate_weight(&circuit.gates[i], mode);
    }
    finish
}

pub fn depth(circuit: &Circuit, mode: DepthMode) -> Result<usize, CircuitError> {
    let dag = build_dag(circuit)?;
    Ok(asap_layers(circuit, &dag, mode).into_iter().max().unwrap_or(0))
}
