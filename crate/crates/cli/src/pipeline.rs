//! End-to-end compilation: remote (augmented grid, EPR-pair blocks) and
//! standard (plain grid of the same side, swaps only).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use epr_core::generators::BenchmarkSpec;
use epr_core::lower::{check_lowered, lower, RemoteCxBlock};
use epr_core::router::{check_routing, initial_layout, mobile_nodes, route, Layout, RouterParams};
use epr_core::schedule::{compare, schedule, ComparisonReport, Schedule};
use epr_core::device::grid_device_with_side;
use epr_core::{augment, weighted_distances, Circuit, DepthMode, Device};
use serde::{Deserialize, Serialize};

use crate::device_io::parse_device_json;
use crate::qasm::parse_qasm_named;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Remote,
    Standard,
    #[default]
    Both,
}

impl Mode {
    pub fn remote(self) -> bool {
        self != Mode::Standard
    }

    pub fn standard(self) -> bool {
        self != Mode::Remote
    }
}

/// Everything that determines a run's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub inputs: Vec<BenchmarkSpec>,
    pub mode: Mode,
    pub router: RouterParams,
    pub fidelity_standard: f64,
    pub fidelity_augmented: f64,
    /// Emit explicit EPR preparation ahead of every remote block.
    pub physical: bool,
    pub depth_mode: DepthMode,
    pub out: PathBuf,
    pub seed: u64,
    pub device_json: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: Vec::new(),
            mode: Mode::Both,
            router: RouterParams::default(),
            fidelity_standard: epr_core::device::DEFAULT_FIDELITY_STANDARD,
            fidelity_augmented: epr_core::device::DEFAULT_FIDELITY_AUGMENTED,
            physical: false,
            depth_mode: DepthMode::AllGates,
            out: PathBuf::from("out"),
            seed: 0,
            device_json: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("standard", self.fidelity_standard), ("augmented", self.fidelity_augmented)] {
            if !(0.0..=1.0).contains(&f) {
                bail!("{name} fidelity {f} outside [0, 1]");
            }
        }
        if self.router.lookahead_weight < 0.0 || !self.router.lookahead_weight.is_finite() {
            bail!("lookahead weight must be a finite non-negative number");
        }
        if self.router.decay < 0.0 || !self.router.decay.is_finite() {
            bail!("decay must be a finite non-negative number");
        }
        for spec in &self.inputs {
            if let BenchmarkSpec::External { path } = spec {
                if !Path::new(path).is_file() {
                    bail!("input `{path}` is not a readable file");
                }
            }
        }
        Ok(())
    }

    /// One-line JSON rendering embedded in every artifact.
    pub fn header(&self) -> String {
        format!("config: {}", serde_json::to_string(self).expect("config serialises"))
    }
}

/// Parses `FAMILY:N` or `FAMILY:A..B` (inclusive).
pub fn parse_gen(text: &str) -> Result<Vec<BenchmarkSpec>> {
    let (family, sizes) = text.split_once(':').with_context(|| format!("expected FAMILY:N, got `{text}`"))?;
    let (lo, hi) = match sizes.split_once("..") {
        Some((a, b)) => (a.parse::<usize>()?, b.trim_start_matches('=').parse::<usize>()?),
        None => {
            let n = sizes.parse::<usize>().with_context(|| format!("bad size in `{text}`"))?;
            (n, n)
        }
    };
    if lo > hi {
        bail!("empty range in `{text}`");
    }
    (lo..=hi)
        .map(|n| match family {
            "qft" => Ok(BenchmarkSpec::Qft { n_qubits: n }),
            "dj" => Ok(BenchmarkSpec::Dj { n_qubits: n }),
            _ => bail!("unknown family `{family}` (expected qft or dj)"),
        })
        .collect()
}

/// Benchmark name used for artifact files: generated name or file stem.
pub fn spec_name(spec: &BenchmarkSpec) -> String {
    match spec {
        BenchmarkSpec::External { path } => {
            Path::new(path).file_stem().map_or_else(|| path.clone(), |s| s.to_string_lossy().into_owned())
        }
        other => other.name(),
    }
}

pub fn load_circuit(spec: &BenchmarkSpec) -> Result<Circuit> {
    let name = spec_name(spec);
    match spec.generate() {
        Some(c) => Ok(c?),
        None => {
            let BenchmarkSpec::External { path } = spec else { unreachable!() };
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            let mut c = parse_qasm_named(&text, &name).with_context(|| format!("parsing {path}"))?;
            c.metadata.insert("family".into(), "external".into());
            Ok(c)
        }
    }
}

/// Smallest border-ancilla grid whose swap-reachable data region holds
/// `n` qubits.
pub fn size_device(n: usize, cfg: &RunConfig) -> Result<Device> {
    let mut side = 2;
    loop {
        let device = grid_device_with_side(side).with_fidelities(cfg.fidelity_standard, cfg.fidelity_augmented)?;
        if mobile_nodes(&augment(&device)).len() >= n {
            return Ok(device);
        }
        side += 1;
    }
}

pub fn remote_device(n: usize, cfg: &RunConfig) -> Result<Device> {
    match &cfg.device_json {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_device_json(&text).with_context(|| format!("loading device {}", path.display()))
        }
        None => size_device(n, cfg),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub device: Device,
    pub circuit: Circuit,
    pub initial_layout: Layout,
    pub final_layout: Layout,
    pub swaps: usize,
    pub blocks: Vec<RemoteCxBlock>,
    pub schedule: Schedule,
}

/// Routes on `device` and, when it has EPR pairs, expands augmented CXs
/// into remote blocks.
pub fn compile_on(circuit: &Circuit, device: &Device, cfg: &RunConfig) -> Result<Compiled> {
    let graph = augment(device);
    let dist = weighted_distances(&graph)?;
    let layout = initial_layout(circuit, &graph, &dist)?;
    let routed = route(circuit, &graph, &dist, layout, cfg.router)?;
    let violations = check_routing(&routed.circuit, &graph);
    if let Some(v) = violations.first() {
        bail!("router produced {} invalid gates, first at {}: {:?}", violations.len(), v.position, v.qubits);
    }
    let lowered = lower(&routed, device, &graph, cfg.physical)?;
    let bad = check_lowered(&lowered.circuit, device, &graph);
    if !bad.is_empty() {
        bail!("lowering produced non-adjacent CXs at {bad:?}");
    }
    let schedule = schedule(&lowered.circuit, device)?;
    Ok(Compiled {
        device: device.clone(),
        circuit: lowered.circuit,
        initial_layout: routed.initial_layout,
        final_layout: routed.final_layout,
        swaps: routed.swaps,
        blocks: lowered.blocks,
        schedule,
    })
}

pub fn compile_remote(circuit: &Circuit, cfg: &RunConfig) -> Result<Compiled> {
    let device = remote_device(circuit.n_qubits, cfg)?;
    compile_on(circuit, &device, cfg).context("remote compilation")
}

/// Baseline: every node of a `side × side` grid is data.
pub fn compile_standard(circuit: &Circuit, side: usize, cfg: &RunConfig) -> Result<Compiled> {
    let device = Device::plain_grid(side).with_fidelities(cfg.fidelity_standard, cfg.fidelity_augmented)?;
    compile_on(circuit, &device, cfg).context("standard compilation")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub remote: Compiled,
    pub standard: Compiled,
    pub report: ComparisonReport,
}

pub fn compile_both(circuit: &Circuit, cfg: &RunConfig) -> Result<Comparison> {
    let remote = compile_remote(circuit, cfg)?;
    let standard = compile_standard(circuit, remote.device.side, cfg)?;
    let report =
        compare(circuit, &remote.circuit, &remote.schedule, &standard.circuit, &remote.device, cfg.depth_mode)?;
    Ok(Comparison { remote, standard, report })
}
