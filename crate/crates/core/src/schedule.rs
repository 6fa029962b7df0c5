//! Contention-aware scheduling of lowered circuits and benchmark
//! comparison rows.
//!
//! Every gate takes one layer. Gates of a remote-CX block (preparation
//! included) also hold the block's EPR pair, so two blocks on one pair
//! never overlap in time. The pair is free again on the layer after a
//! block's last gate.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::circuit::{gate_counts, Circuit, Gate, GateKind, Provenance};
use crate::dag::{build_dag, depth, gate_weight, DepthMode};
use crate::device::Device;
use crate::error::{CircuitError, ReportError};

/// Layers during which one block held its EPR pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairInterval {
    /// Index into the device's pair list, if the pair belongs to it.
    pub pair_id: Option<usize>,
    pub epr_pair: (usize, usize),
    pub block_id: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    /// 1-based layer in which each gate runs; barriers report the layer
    /// they close.
    pub layers: Vec<usize>,
    pub makespan: usize,
    pub trace: Vec<PairInterval>,
}

/// ASAP list schedule with EPR pairs as exclusive resources. Blocks
/// contending for a pair get it in circuit order, which is a topological
/// order of the DAG and matches ascending block id.
pub fn schedule(circuit: &Circuit, device: &Device) -> Result<Schedule, CircuitError> {
    schedule_with(circuit, device, true)
}

/// As [`schedule`], optionally without the pair constraint. The
/// unconstrained makespan equals `depth(circuit, AllGates)`.
pub fn schedule_with(circuit: &Circuit, device: &Device, contended: bool) -> Result<Schedule, CircuitError> {
    let dag = build_dag(circuit)?;
    let mut layers = vec![0usize; circuit.gates.len()];
    // Earliest layer each block may use its pair from.
    let mut floor: BTreeMap<usize, usize> = BTreeMap::new();
    let mut open: BTreeMap<usize, PairInterval> = BTreeMap::new();

    for (i, gate) in circuit.gates.iter().enumerate() {
        let mut ready = dag.predecessors(i).iter().map(|&p| layers[p]).max().unwrap_or(0);
        let held = gate.provenance.and_then(|p| Some((p.block()?, p.epr_pair()?)));
        if let Some((block, pair)) = held {
            if !open.contains_key(&block) {
                let prev = open.values().filter(|iv| norm(iv.epr_pair) == norm(pair)).map(|iv| iv.end).max();
                floor.insert(block, prev.unwrap_or(0));
                open.insert(
                    block,
                    PairInterval { pair_id: device.pair_id(pair), epr_pair: pair, block_id: block, start: 0, end: 0 },
                );
            }
            if contended {
                ready = ready.max(floor[&block]);
            }
        }
        layers[i] = ready + gate_weight(gate, DepthMode::AllGates);
        if let Some((block, _)) = held {
            let iv = open.get_mut(&block).expect("opened above");
            iv.start = if iv.start == 0 { layers[i] } else { iv.start.min(layers[i]) };
            iv.end = iv.end.max(layers[i]);
        }
    }
    let makespan = layers.iter().copied().max().unwrap_or(0);
    Ok(Schedule { layers, makespan, trace: open.into_values().collect() })
}

fn norm(p: (usize, usize)) -> (usize, usize) {
    (p.0.min(p.1), p.0.max(p.1))
}

/// Replaces each expanded remote block (preparation included) with a
/// single remote CX on its data qubits, recovering the routed view.
pub fn collapse_blocks(circuit: &Circuit) -> Circuit {
    let mut out = Circuit::new(circuit.name.clone(), circuit.n_qubits, circuit.n_clbits);
    out.metadata = circuit.metadata.clone();
    let mut i = 0;
    while i < circuit.gates.len() {
        let Some(block) = circuit.gates[i].provenance.and_then(|p| p.block()) else {
            out.gates.push(circuit.gates[i].clone());
            i += 1;
            continue;
        };
        let end = circuit.gates[i..]
            .iter()
            .position(|g| g.provenance.and_then(|p| p.block()) != Some(block))
            .map_or(circuit.gates.len(), |k| i + k);
        let mut interior = circuit.gates[i..end]
            .iter()
            .filter(|g| g.kind == GateKind::Cx && matches!(g.provenance, Some(Provenance::RemoteBlock { .. })));
        match (interior.next(), interior.next()) {
            (Some(first), Some(second)) => out.gates.push(Gate::remote_cx(first.qubits[0], second.qubits[1])),
            // Not a recognisable block; keep it expanded.
            _ => out.gates.extend(circuit.gates[i..end].iter().cloned()),
        }
        i = end;
    }
    out
}

/// One benchmark compared across the two compilations. Differences are
/// standard minus remote, so a positive value favours remote gates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub name: String,
    pub family: String,
    pub n_qubits: usize,
    pub side: usize,
    pub epr_pairs: usize,
    pub depth_mode: DepthMode,
    pub original_cx: usize,
    pub original_depth: usize,
    pub remote_standard_cx: usize,
    pub remote_cx: usize,
    pub remote_expanded_cx: usize,
    pub remote_depth: usize,
    pub remote_contended_depth: usize,
    /// Depth with each remote block counted as one gate.
    pub remote_block_depth: usize,
    pub standard_cx: usize,
    pub standard_depth: usize,
    pub cx_difference: i64,
    pub depth_difference: i64,
}

impl ComparisonReport {
    /// True when the difference fields match their operands.
    pub fn is_consistent(&self) -> bool {
        self.cx_difference == self.standard_cx as i64 - self.remote_standard_cx as i64
            && self.depth_difference == self.standard_depth as i64 - self.remote_depth as i64
            && self.remote_expanded_cx == self.remote_standard_cx + 2 * self.remote_cx
    }
}

/// Builds a report row. All three circuits must carry the same name.
/// `remote_schedule` supplies the contended depth, always in all-gates
/// layers; the other depths use `mode`.
pub fn compare(
    original: &Circuit,
    remote: &Circuit,
    remote_schedule: &Schedule,
    standard: &Circuit,
    device: &Device,
    mode: DepthMode,
) -> Result<ComparisonReport, ReportError> {
    for other in [remote, standard] {
        if other.name != original.name {
            return Err(ReportError::Mismatch(original.name.clone(), other.name.clone()));
        }
    }
    let (orig, rem, std_counts) = (gate_counts(original), gate_counts(remote), gate_counts(standard));
    let remote_depth = depth(remote, mode)?;
    let standard_depth = depth(standard, mode)?;
    let standard_cx = std_counts.standard_cx;
    Ok(ComparisonReport {
        name: original.name.clone(),
        family: original.metadata.get("family").cloned().unwrap_or_else(|| "external".into()),
        n_qubits: original.n_qubits,
        side: device.side,
        epr_pairs: device.epr_pairs.len(),
        depth_mode: mode,
        original_cx: orig.standard_cx + orig.remote_cx,
        original_depth: depth(original, mode)?,
        remote_standard_cx: rem.standard_cx,
        remote_cx: rem.remote_cx,
        remote_expanded_cx: rem.expanded_cx(),
        remote_depth,
        remote_contended_depth: remote_schedule.makespan,
        remote_block_depth: depth(&collapse_blocks(remote), mode)?,
        standard_cx,
        standard_depth,
        cx_difference: standard_cx as i64 - rem.standard_cx as i64,
        depth_difference: standard_depth as i64 - remote_depth as i64,
    })
}
