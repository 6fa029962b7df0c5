//! Subcommand implementations. Each writes its artifacts under the
//! configured output directory and returns what the caller should report.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use epr_core::generators::BenchmarkSpec;
use epr_core::lower::{restore_provenance, RemoteCxBlock};
use epr_core::router::Layout;
use epr_core::verify::{check_equivalence, EquivalenceReport, MAX_QUBITS};
use epr_core::{augment, depth, gate_counts, Circuit, DepthMode, SimError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::device_io::device_dot;
use crate::pipeline::{compile_both, compile_remote, compile_standard, load_circuit, spec_name, Compiled, RunConfig};
use crate::qasm::{emit_qasm, parse_qasm_named};
use crate::report::{difference_csv, report_csv, summarise, BenchRow, Outcome, SuiteSummary};

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutFile {
    pub n_physical: usize,
    pub initial: Vec<usize>,
    #[serde(rename = "final")]
    pub final_: Vec<usize>,
}

impl LayoutFile {
    pub fn layouts(&self) -> Result<(Layout, Layout)> {
        Ok((Layout::new(self.initial.clone(), self.n_physical)?, Layout::new(self.final_.clone(), self.n_physical)?))
    }
}

fn metrics(c: &Compiled, mode: DepthMode) -> Result<serde_json::Value> {
    let counts = gate_counts(&c.circuit);
    Ok(json!({
        "side": c.device.side,
        "epr_pairs": c.device.epr_pairs.len(),
        "swaps": c.swaps,
        "counts": counts,
        "expanded_cx": counts.expanded_cx(),
        "depth": depth(&c.circuit, mode)?,
        "depth_all_gates": depth(&c.circuit, DepthMode::AllGates)?,
        "depth_two_qubit": depth(&c.circuit, DepthMode::TwoQubitOnly)?,
        "contended_depth": c.schedule.makespan,
        "pair_trace": c.schedule.trace,
    }))
}

/// Writes QASM, layout and (for remote) block files for one compilation.
fn write_compiled(cfg: &RunConfig, name: &str, kind: &str, c: &Compiled) -> Result<()> {
    let header = [cfg.header()];
    write(&cfg.out.join(format!("{name}.{kind}.qasm")), &emit_qasm(&c.circuit, &header)?)?;
    let layout = LayoutFile {
        n_physical: c.initial_layout.n_physical(),
        initial: c.initial_layout.v2p().to_vec(),
        final_: c.final_layout.v2p().to_vec(),
    };
    write(&cfg.out.join(format!("{name}.{kind}.layout.json")), &to_json(&json!({ "config": cfg, "layout": layout })))?;
    if kind == "remote" {
        write(
            &cfg.out.join(format!("{name}.{kind}.blocks.json")),
            &to_json(&json!({ "config": cfg, "blocks": c.blocks })),
        )?;
    }
    Ok(())
}

/// Compiles every input. Returns the comparison rows written (mode `both`).
pub fn cmd_compile(cfg: &RunConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    if cfg.inputs.is_empty() {
        bail!("no inputs: pass --input or --gen");
    }
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut rows = Vec::new();
    for spec in &cfg.inputs {
        let name = spec_name(spec);
        let circuit = load_circuit(spec)?;
        let mut m = json!({ "config": cfg, "name": name, "n_qubits": circuit.n_qubits });
        if cfg.mode.remote() && cfg.mode.standard() {
            let both = compile_both(&circuit, cfg).with_context(|| format!("compiling {name}"))?;
            write_compiled(cfg, &name, "remote", &both.remote)?;
            write_compiled(cfg, &name, "standard", &both.standard)?;
            m["remote"] = metrics(&both.remote, cfg.depth_mode)?;
            m["standard"] = metrics(&both.standard, cfg.depth_mode)?;
            m["comparison"] = serde_json::to_value(&both.report)?;
            rows.push(BenchRow { name: name.clone(), outcome: Outcome::Ok(both.report) });
        } else if cfg.mode.remote() {
            let remote = compile_remote(&circuit, cfg).with_context(|| format!("compiling {name}"))?;
            write_compiled(cfg, &name, "remote", &remote)?;
            m["remote"] = metrics(&remote, cfg.depth_mode)?;
        } else {
            let side = crate::pipeline::remote_device(circuit.n_qubits, cfg)?.side;
            let standard = compile_standard(&circuit, side, cfg).with_context(|| format!("compiling {name}"))?;
            write_compiled(cfg, &name, "standard", &standard)?;
            m["standard"] = metrics(&standard, cfg.depth_mode)?;
        }
        write(&cfg.out.join(format!("{name}.metrics.json")), &to_json(&m))?;
    }
    if !rows.is_empty() {
        write(&cfg.out.join("comparison.csv"), &report_csv(&cfg.header(), &rows)?)?;
    }
    Ok(rows)
}

/// Runs both compilations for every input, in parallel, and writes the
/// suite report. Failures become rows instead of aborting the suite.
pub fn cmd_bench(cfg: &RunConfig) -> Result<(Vec<BenchRow>, SuiteSummary)> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let rows: Vec<BenchRow> = cfg
        .inputs
        .par_iter()
        .map(|spec| {
            let name = spec_name(spec);
            let outcome = load_circuit(spec)
                .and_then(|c| compile_both(&c, cfg))
                .map(|b| Outcome::Ok(b.report))
                .unwrap_or_else(|e| Outcome::Failed { error: format!("{e:#}") });
            BenchRow { name, outcome }
        })
        .collect();
    let summary = summarise(&rows);
    let header = cfg.header();
    write(&cfg.out.join("report.csv"), &report_csv(&header, &rows)?)?;
    write(&cfg.out.join("differences.csv"), &difference_csv(&header, &rows)?)?;
    write(&cfg.out.join("report.json"), &to_json(&json!({ "config": cfg, "rows": rows, "summary": summary })))?;
    Ok((rows, summary))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotVerifiable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRecord {
    pub name: String,
    pub compilation: String,
    pub verdict: Verdict,
    pub detail: Option<EquivalenceReport>,
    pub message: Option<String>,
}

/// Previously written artifacts to verify instead of compiling afresh.
#[derive(Debug, Clone, Default)]
pub struct VerifyFiles {
    pub compiled: Option<PathBuf>,
    pub layout: Option<PathBuf>,
    pub blocks: Option<PathBuf>,
}

fn read_json_field<T: for<'de> Deserialize<'de>>(path: &Path, field: &str) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let inner = v.get(field).cloned().unwrap_or(v);
    serde_json::from_value(inner).with_context(|| format!("reading `{field}` from {}", path.display()))
}

fn judge(
    name: &str,
    compilation: &str,
    source: &Circuit,
    compiled: &Circuit,
    layouts: (&Layout, &Layout),
    trials: usize,
    seed: u64,
) -> Result<VerifyRecord> {
    let record = |verdict, detail, message| VerifyRecord {
        name: name.to_string(),
        compilation: compilation.to_string(),
        verdict,
        detail,
        message,
    };
    match check_equivalence(source, compiled, layouts.0, layouts.1, trials, seed) {
        Ok(r) => Ok(record(if r.pass { Verdict::Pass } else { Verdict::Fail }, Some(r), None)),
        Err(e @ SimError::TooManyQubits { .. }) => {
            Ok(record(Verdict::NotVerifiable, None, Some(format!("not verifiable at desk scale: {e}"))))
        }
        Err(e) => Err(e.into()),
    }
}

/// Checks compiled circuits against their sources on random inputs.
pub fn cmd_verify(cfg: &RunConfig, files: &VerifyFiles, trials: usize) -> Result<Vec<VerifyRecord>> {
    cfg.validate()?;
    let mut records = Vec::new();
    for spec in &cfg.inputs {
        let name = spec_name(spec);
        let too_big = |compilation: &str, n: usize| VerifyRecord {
            name: name.clone(),
            compilation: compilation.to_string(),
            verdict: Verdict::NotVerifiable,
            detail: None,
            message: Some(format!("not verifiable at desk scale: {n} qubits exceed the limit of {MAX_QUBITS}")),
        };
        if let BenchmarkSpec::Qft { n_qubits } | BenchmarkSpec::Dj { n_qubits } = *spec {
            if n_qubits > MAX_QUBITS {
                records.push(too_big("source", n_qubits));
                continue;
            }
        }
        let source = load_circuit(spec)?;
        if source.n_qubits > MAX_QUBITS {
            records.push(too_big("source", source.n_qubits));
            continue;
        }
        if let Some(path) = &files.compiled {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut compiled = parse_qasm_named(&text, &name).with_context(|| format!("parsing {}", path.display()))?;
            let layout_path = files.layout.as_ref().context("--layout is required with --compiled")?;
            let (initial, fin) = read_json_field::<LayoutFile>(layout_path, "layout")?.layouts()?;
            if let Some(blocks_path) = &files.blocks {
                let blocks: Vec<RemoteCxBlock> = read_json_field(blocks_path, "blocks")?;
                if let Err(e) = restore_provenance(&mut compiled, &blocks) {
                    records.push(VerifyRecord {
                        name: name.clone(),
                        compilation: path.display().to_string(),
                        verdict: Verdict::Fail,
                        detail: None,
                        message: Some(format!("compiled circuit does not match its blocks: {e}")),
                    });
                    continue;
                }
            }
            records.push(judge(&name, &path.display().to_string(), &source, &compiled, (&initial, &fin), trials, cfg.seed)?);
            continue;
        }
        let mut compilations = Vec::new();
        if cfg.mode.remote() {
            compilations.push(("remote", compile_remote(&source, cfg)?));
        }
        if cfg.mode.standard() {
            let side = crate::pipeline::remote_device(source.n_qubits, cfg)?.side;
            compilations.push(("standard", compile_standard(&source, side, cfg)?));
        }
        for (kind, c) in compilations {
            records.push(judge(&name, kind, &source, &c.circuit, (&c.initial_layout, &c.final_layout), trials, cfg.seed)?);
        }
    }
    Ok(records)
}

/// Writes each generated benchmark as QASM.
pub fn cmd_gen(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut written = Vec::new();
    for spec in &cfg.inputs {
        let circuit = load_circuit(spec)?;
        let path = cfg.out.join(format!("{}.qasm", spec_name(spec)));
        write(&path, &emit_qasm(&circuit, &[cfg.header()])?)?;
        written.push(path);
    }
    Ok(written)
}

/// Writes the device (JSON) and its augmented graph (DOT). The device is
/// sized for `qubits`, fixed by `side`, or loaded from `--device-json`.
pub fn cmd_device(cfg: &RunConfig, qubits: Option<usize>, side: Option<usize>) -> Result<Vec<PathBuf>> {
    let device = match (side, &cfg.device_json) {
        (Some(k), None) => epr_core::device::grid_device_with_side(k)
            .with_fidelities(cfg.fidelity_standard, cfg.fidelity_augmented)?,
        (None, _) => crate::pipeline::remote_device(qubits.unwrap_or(1), cfg)?,
        (Some(_), Some(_)) => bail!("--side and --device-json are mutually exclusive"),
    };
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let json_path = cfg.out.join(format!("device_{}.json", device.side));
    let dot_path = cfg.out.join(format!("device_{}.dot", device.side));
    let mut file = serde_json::to_value(crate::device_io::DeviceFile::from(&device))?;
    file["config"] = serde_json::to_value(cfg)?;
    write(&json_path, &to_json(&file))?;
    let dot = device_dot(&device, &augment(&device));
    write(&dot_path, &format!("// {}\n{dot}", cfg.header()))?;
    Ok(vec![json_path, dot_path])
}
