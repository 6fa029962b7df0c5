//! Device files: JSON description in, JSON and Graphviz DOT out.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use epr_core::{AugmentedGraph, Device, EdgeKind, Role};
use serde::{Deserialize, Serialize};

/// On-disk device description. Roles are derived from the pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceFile {
    pub side: usize,
    pub epr_pairs: Vec<(usize, usize)>,
    pub fidelity_standard: f64,
    pub fidelity_augmented: f64,
}

impl From<&Device> for DeviceFile {
    fn from(d: &Device) -> Self {
        DeviceFile {
            side: d.side,
            epr_pairs: d.epr_pairs.clone(),
            fidelity_standard: d.fidelity_standard,
            fidelity_augmented: d.fidelity_augmented,
        }
    }
}

impl DeviceFile {
    pub fn into_device(self) -> Result<Device> {
        Ok(Device::new(self.side, self.epr_pairs, self.fidelity_standard, self.fidelity_augmented)?)
    }
}

pub fn parse_device_json(text: &str) -> Result<Device> {
    let file: DeviceFile = serde_json::from_str(text).context("malformed device JSON")?;
    file.into_device()
}

pub fn device_json(device: &Device) -> String {
    serde_json::to_string_pretty(&DeviceFile::from(device)).expect("device serialises")
}

/// Undirected DOT graph: nodes at grid positions, ancillas boxed, standard
/// edges solid, augmented edges dashed and labelled with serving pairs.
pub fn device_dot(device: &Device, graph: &AugmentedGraph) -> String {
    let mut out = String::from("graph device {\n  node [shape=circle];\n");
    for node in 0..device.n_nodes() {
        let (r, c) = (node / device.side, node % device.side);
        let shape = if device.roles[node] == Role::Ancilla { ", shape=box" } else { "" };
        let _ = writeln!(out, "  n{node} [label=\"{node}\", pos=\"{c},{}!\"{shape}];", device.side - 1 - r);
    }
    for (id, &(a, b)) in device.epr_pairs.iter().enumerate() {
        let _ = writeln!(out, "  n{a} -- n{b} [style=dotted, label=\"epr{id}\"];");
    }
    for e in graph.edges() {
        match e.kind {
            EdgeKind::Standard => {
                let _ = writeln!(out, "  n{} -- n{} [weight=\"{}\"];", e.u, e.v, e.weight.as_f64());
            }
            EdgeKind::Augmented => {
                let pairs: Vec<String> = e.serving_pairs.iter().map(|p| format!("epr{p}")).collect();
                let _ = writeln!(
                    out,
                    "  n{} -- n{} [style=dashed, weight=\"{}\", label=\"{}\"];",
                    e.u,
                    e.v,
                    e.weight.as_f64(),
                    pairs.join(",")
                );
            }
        }
    }
    out.push_str("}\n");
    out
}
