//! Expansion of augmented-edge CXs into EPR-mediated remote-CX blocks.
//!
//! A block for `CX(c, t)` through the pair `(a, b)`, with `a` next to `c`
//! and `b` next to `t`, is
//!
//! ```text
//! CX(c,a); CX(b,t); H(b); measure a -> ma; measure b -> mb;
//! if (ma) X(t); if (mb) Z(c);
//! ```
//!
//! optionally preceded by `reset a; reset b; H(a); CX(a,b)` to prepare the
//! pair. Every inserted gate carries the block id, so counting and
//! scheduling can treat the block as one remote CX.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, EdgeKind, Gate, GateKind, Provenance};
use crate::device::{AugmentedGraph, Device};
use crate::error::LowerError;
use crate::router::RoutedCircuit;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteCxBlock {
    pub block_id: usize,
    pub control: usize,
    pub target: usize,
    /// Ancillas in block orientation: `.0` neighbours the control.
    pub epr_pair: (usize, usize),
    pub pair_id: usize,
    /// Classical bits receiving the two ancilla measurements.
    pub clbits: (usize, usize),
    /// Index of the block's first gate in the lowered circuit.
    pub position: usize,
    /// Number of gates the block occupies, preparation included.
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lowered {
    pub circuit: Circuit,
    pub blocks: Vec<RemoteCxBlock>,
}

/// Gates of one remote-CX block, in emission order.
pub fn remote_cx_block(
    block: usize,
    control: usize,
    target: usize,
    epr_pair: (usize, usize),
    clbits: (usize, usize),
    with_prep: bool,
) -> Vec<Gate> {
    let (a, b) = epr_pair;
    let (ma, mb) = clbits;
    let mut gates = Vec::with_capacity(11);
    if with_prep {
        let prep = Provenance::EprPrep { block, epr_pair };
        gates.extend([
            Gate::single(GateKind::Reset, a),
            Gate::single(GateKind::Reset, b),
            Gate::single(GateKind::H, a),
            Gate::cx(a, b),
        ]
        .into_iter()
        .map(|g| g.with_provenance(prep)));
    }
    let tag = Provenance::RemoteBlock { block, epr_pair };
    gates.extend(
        [
            Gate::cx(control, a),
            Gate::cx(b, target),
            Gate::single(GateKind::H, b),
            Gate::measure(a, ma),
            Gate::measure(b, mb),
            Gate::single(GateKind::X, target).with_condition(ma, true),
            Gate::single(GateKind::Z, control).with_condition(mb, true),
        ]
        .into_iter()
        .map(|g| g.with_provenance(tag)),
    );
    gates
}

/// Orients pair `(a, b)` so that `a` neighbours `control` and `b`
/// neighbours `target`.
fn orient(device: &Device, pair: (usize, usize), control: usize, target: usize) -> Option<(usize, usize)> {
    let (a, b) = pair;
    if device.grid_adjacent(control, a) && device.grid_adjacent(target, b) {
        Some((a, b))
    } else if device.grid_adjacent(control, b) && device.grid_adjacent(target, a) {
        Some((b, a))
    } else {
        None
    }
}

/// Replaces every augmented-tagged CX (and any composite remote CX) with a
/// remote-CX block. Pairs are assigned least-used first, ties to the
/// lowest pair id.
pub fn lower(
    routed: &RoutedCircuit,
    device: &Device,
    graph: &AugmentedGraph,
    with_prep: bool,
) -> Result<Lowered, LowerError> {
    let src = &routed.circuit;
    let mut usage = vec![0usize; device.epr_pairs.len()];
    let mut blocks = Vec::new();
    let mut gates = Vec::with_capacity(src.gates.len());
    let mut n_clbits = src.n_clbits;

    for (position, gate) in src.gates.iter().enumerate() {
        let remote = match gate.kind {
            GateKind::RemoteCx => true,
            GateKind::Cx => gate.edge_kind == Some(EdgeKind::Augmented),
            _ if gate.edge_kind == Some(EdgeKind::Augmented) => return Err(LowerError::NotCx(position)),
            _ => false,
        };
        if !remote {
            gates.push(gate.clone());
            continue;
        }
        let (control, target) = (gate.qubits[0], gate.qubits[1]);
        let no_pair = LowerError::NoServingPair { position, control, target };
        let edge = graph.edge(control, target, EdgeKind::Augmented).ok_or(no_pair.clone())?;
        let (pair_id, epr_pair) = edge
            .serving_pairs
            .iter()
            .filter_map(|&id| orient(device, device.epr_pairs[id], control, target).map(|p| (id, p)))
            .min_by_key(|&(id, _)| (usage[id], id))
            .ok_or(no_pair)?;
        usage[pair_id] += 1;

        let block_id = blocks.len();
        let clbits = (n_clbits, n_clbits + 1);
        n_clbits += 2;
        let expansion = remote_cx_block(block_id, control, target, epr_pair, clbits, with_prep);
        blocks.push(RemoteCxBlock {
            block_id,
            control,
            target,
            epr_pair,
            pair_id,
            clbits,
            position: gates.len(),
            len: expansion.len(),
        });
        gates.extend(expansion);
    }

    let mut circuit = Circuit::new(src.name.clone(), src.n_qubits, n_clbits);
    circuit.metadata = src.metadata.clone();
    circuit.gates = gates;
    Ok(Lowered { circuit, blocks })
}

/// Positions of CXs in a lowered circuit that are neither on a standard
/// edge nor local block gates between grid neighbours. Preparation CXs
/// between the two halves of a pair are exempt.
pub fn check_lowered(circuit: &Circuit, device: &Device, graph: &AugmentedGraph) -> Vec<usize> {
    circuit
        .gates
        .iter()
        .enumerate()
        .filter(|(_, g)| g.kind.is_two_qubit())
        .filter(|(_, g)| {
            let (a, b) = (g.qubits[0], g.qubits[1]);
            let ok = match (g.kind, g.provenance) {
                (GateKind::RemoteCx, _) => false,
                (_, Some(Provenance::EprPrep { .. })) => true,
                (_, Some(Provenance::RemoteBlock { .. })) => device.grid_adjacent(a, b),
                _ => {
                    g.edge_kind != Some(EdgeKind::Augmented)
                        && graph.edge(a, b, EdgeKind::Standard).is_some()
                }
            };
            !ok
        })
        .map(|(i, _)| i)
        .collect()
}

/// Re-attaches block provenance to a lowered circuit that lost it (for
/// instance after a round trip through OpenQASM). Fails if the gates at a
/// block's position are not that block.
pub fn restore_provenance(circuit: &mut Circuit, blocks: &[RemoteCxBlock]) -> Result<(), LowerError> {
    for block in blocks {
        let with_prep = block.len > 7;
        let end = block.position + block.len;
        if end > circuit.gates.len() {
            return Err(LowerError::BlockOutOfRange { block: block.block_id, end, len: circuit.gates.len() });
        }
        let expected =
            remote_cx_block(block.block_id, block.control, block.target, block.epr_pair, block.clbits, with_prep);
        if expected.len() != block.len {
            return Err(LowerError::BlockMismatch { block: block.block_id, position: block.position });
        }
        for (offset, (gate, want)) in circuit.gates[block.position..end].iter_mut().zip(expected).enumerate() {
            let same = gate.kind == want.kind
                && gate.qubits == want.qubits
                && gate.clbits == want.clbits
                && gate.condition == want.condition;
            if !same {
                return Err(LowerError::BlockMismatch { block: block.block_id, position: block.position + offset });
            }
            gate.provenance = want.provenance;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gate_counts;
    use crate::device::{augment, build_grid_device};
    use crate::router::Layout;

    fn routed(gates: Vec<Gate>) -> RoutedCircuit {
        let mut circuit = Circuit::new("r", 25, 0);
        circuit.gates = gates;
        RoutedCircuit {
            circuit,
            initial_layout: Layout::identity(25),
            final_layout: Layout::identity(25),
            swaps: 0,
        }
    }

    #[test]
    fn identity_without_augmented_gates() {
        let device = build_grid_device(17);
        let graph = augment(&device);
        let r = routed(vec![Gate::cx(6, 7).with_edge_kind(EdgeKind::Standard), Gate::single(GateKind::H, 6)]);
        let lowered = lower(&r, &device, &graph, false).unwrap();
        assert_eq!(lowered.circuit, r.circuit);
        assert!(lowered.blocks.is_empty());
    }

    #[test]
    fn single_block_uses_lowest_pair() {
        let device = build_grid_device(17);
        let graph = augment(&device);
        let r = routed(vec![Gate::cx(2, 22).with_edge_kind(EdgeKind::Augmented)]);
        let lowered = lower(&r, &device, &graph, false).unwrap();
        assert_eq!(lowered.blocks.len(), 1);
        assert_eq!(lowered.blocks[0].epr_pair, (1, 21));
        assert_eq!(lowered.circuit.n_clbits, 2);
        let kinds: Vec<&str> = lowered.circuit.gates.iter().map(|g| g.kind.name()).collect();
        assert_eq!(kinds, ["cx", "cx", "h", "measure", "measure", "x", "z"]);
        let counts = gate_counts(&lowered.circuit);
        assert_eq!((counts.standard_cx, counts.remote_cx, counts.measure, counts.single_qubit), (0, 1, 2, 3));
        assert!(check_lowered(&lowered.circuit, &device, &graph).is_empty());
    }

    #[test]
    fn repeated_edge_balances_pairs() {
        let device = build_grid_device(17);
        let graph = augment(&device);
        let cx = Gate::cx(2, 22).with_edge_kind(EdgeKind::Augmented);
        let lowered = lower(&routed(vec![cx.clone(), cx]), &device, &graph, false).unwrap();
        let pairs: Vec<(usize, usize)> = lowered.blocks.iter().map(|b| b.epr_pair).collect();
        assert_eq!(pairs, vec![(1, 21), (3, 23)]);
        assert_eq!(lowered.blocks[1].clbits, (2, 3));
    }

    #[test]
    fn orientation_follows_control() {
        let device = build_grid_device(17);
        let graph = augment(&device);
        let lowered =
            lower(&routed(vec![Gate::cx(22, 2).with_edge_kind(EdgeKind::Augmented)]), &device, &graph, false)
                .unwrap();
        assert_eq!(lowered.blocks[0].epr_pair, (21, 1));
        assert_eq!(lowered.circuit.gates[0], Gate::cx(22, 21).with_provenance(Provenance::RemoteBlock {
            block: 0,
            epr_pair: (21, 1)
        }));
    }

    #[test]
    fn expansion_is_distance_independent() {
        let device = build_grid_device(17);
        let graph = augment(&device);
        let near = lower(&routed(vec![Gate::cx(6, 8).with_edge_kind(EdgeKind::Augmented)]), &device, &graph, true);
        let far = lower(&routed(vec![Gate::cx(2, 22).with_edge_kind(EdgeKind::Augmented)]), &device, &graph, true);
        let kinds = |l: Lowered| l.circuit.gates.iter().map(|g| g.kind.name()).collect::<Vec<_>>();
        let near = kinds(near.unwrap());
        assert_eq!(near.len(), 11);
        assert_eq!(near, kinds(far.unwrap()));
    }

    #[test]
    fn prep_gates_are_not_standard_cx() {
        let device = build_grid_device(17);
        let graph = augment(&device);
        let lowered =
            lower(&routed(vec![Gate::cx(2, 22).with_edge_kind(EdgeKind::Augmented)]), &device, &graph, true)
                .unwrap();
        let counts = gate_counts(&lowered.circuit);
        assert_eq!(counts.standard_cx, 0);
        assert_eq!(counts.remote_cx, 1);
        assert_eq!(counts.reset, 2);
        assert!(check_lowered(&lowered.circuit, &device, &graph).is_empty());
    }

    #[test]
    fn unserved_augmented_tag_is_an_error() {
        let device = build_grid_device(17);
        let graph = augment(&device);
        let r = routed(vec![Gate::cx(6, 12).with_edge_kind(EdgeKind::Augmented)]);
        assert!(matches!(lower(&r, &device, &graph, false), Err(LowerError::NoServingPair { position: 0, .. })));
    }

    #[test]
    fn provenance_can_be_restored() {
        let device = build_grid_device(17);
        let graph = augment(&device);
        let cx = Gate::cx(2, 22).with_edge_kind(EdgeKind::Augmented);
        let lowered = lower(&routed(vec![cx.clone(), cx]), &device, &graph, true).unwrap();
        let mut stripped = lowered.circuit.clone();
        stripped.gates.iter_mut().for_each(|g| g.provenance = None);
        let mut missing = stripped.clone();
        restore_provenance(&mut stripped, &lowered.blocks).unwrap();
        assert_eq!(stripped, lowered.circuit);

        missing.gates.remove(6);
        assert_eq!(
            restore_provenance(&mut missing, &lowered.blocks),
            Err(LowerError::BlockMismatch { block: 0, position: 6 })
        );
    }
}
