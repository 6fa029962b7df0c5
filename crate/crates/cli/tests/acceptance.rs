//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Failures are reported but only turn into a nonzero exit status when
//! `ACCEPTANCE_STRICT=1` is set, so `cargo test --workspace` still runs the
//! other test targets. Run alone with `cargo test --test acceptance`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use epr_core::device::{grid_device_with_side, Device};
use epr_core::generators::{dj, qft};
use epr_core::lower::{check_lowered, lower, remote_cx_block};
use epr_core::router::{check_routing, initial_layout, route};
use epr_core::schedule::{schedule, schedule_with};
use epr_core::verify::{check_equivalence, random_state, reduced_fidelity, simulate, StateVector};
use epr_core::{augment, depth, weighted_distances, Circuit, DepthMode, EdgeKind, Gate, GateKind, Weight};
use epr_route::pipeline::{compile_both, compile_remote, compile_standard, RunConfig};
use epr_route::qasm::{emit_qasm, parse_qasm, structurally_equal};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tempfile::TempDir;

const BRANCH_PROBABILITY_TOL: f64 = 1e-10;
const BLOCK_FIDELITY: f64 = 1.0 - 1e-12;
const EQUIVALENCE_FIDELITY: f64 = 1.0 - 1e-9;
const EQUIVALENCE_TRIALS: usize = 20;
const TREND_SIZES: [usize; 6] = [10, 12, 14, 16, 18, 20];
const TREND_FRACTION: f64 = 0.8;

type Check = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

fn corpus_files() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../benchmarks");
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .expect("benchmarks directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "qasm"))
        .collect();
    files.sort();
    files
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_remote_block() -> Check {
    let cx = |psi: &StateVector| {
        let mut out = psi.clone();
        out.apply_cx(0, 1);
        out
    };
    let mut worst_fid = 1.0f64;
    let mut worst_prob = 0.0f64;
    for seed in 0..50 {
        let psi = random_state(2, 1000 + seed);
        // Data on qubits 0 (control) and 1 (target), the pair (2, 3) in |00⟩.
        // The simulator prepares |Φ+⟩ on the pair before the block runs.
        let mut amps = psi.amplitudes().to_vec();
        amps.resize(16, amps[0] * 0.0);
        let input = StateVector::from_amplitudes(amps).map_err(|e| e.to_string())?;
        let mut block = Circuit::new("block", 4, 2);
        block.gates = remote_cx_block(0, 0, 1, (2, 3), (0, 1), false);
        let branches = simulate(&block, &input).map_err(|e| e.to_string())?;
        ensure(branches.len() == 4, || format!("seed {seed}: {} branches", branches.len()))?;
        let want = cx(&psi);
        for b in &branches {
            worst_prob = worst_prob.max((b.probability - 0.25).abs());
            let fid = reduced_fidelity(&want, &b.state, &[0, 1]) / b.state.norm_sqr();
            worst_fid = worst_fid.min(fid);
        }
    }
    ensure(worst_prob <= BRANCH_PROBABILITY_TOL, || format!("branch probability off by {worst_prob:e}"))?;
    ensure(worst_fid >= BLOCK_FIDELITY, || format!("min fidelity {worst_fid}"))?;
    Ok(format!("50 states x 4 branches, max |p-0.25| = {worst_prob:.1e}, min fidelity = {worst_fid:.15}"))
}

fn random_circuit(seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(4..=8);
    let len = rng.random_range(10..=40);
    let mut c = Circuit::new(format!("random_{seed}"), n, 0);
    for _ in 0..len {
        let q = rng.random_range(0..n);
        let gate = match rng.random_range(0..8) {
            0 => Gate::single(GateKind::H, q),
            1 => Gate::single(GateKind::T, q),
            2 => Gate::single(GateKind::Sdg, q),
            3 => Gate::single(GateKind::Rz(rng.random_range(-3.2..3.2)), q),
            4 => Gate::single(GateKind::Ry(rng.random_range(-3.2..3.2)), q),
            _ => Gate::cx(q, (q + rng.random_range(1..n)) % n),
        };
        c.push(gate);
    }
    c
}

fn c2_equivalence() -> Check {
    let cfg = RunConfig::default();
    let mut circuits: Vec<Circuit> = (0..50).map(random_circuit).collect();
    for n in 4..=8 {
        circuits.push(qft(n).unwrap());
        circuits.push(dj(n).unwrap());
    }
    let results: Vec<Result<f64, String>> = circuits
        .par_iter()
        .map(|c| {
            let remote = compile_remote(c, &cfg).map_err(|e| format!("{}: {e:#}", c.name))?;
            let standard = compile_standard(c, remote.device.side, &cfg).map_err(|e| format!("{}: {e:#}", c.name))?;
            let mut min = 1.0f64;
            for (kind, compiled) in [("remote", &remote), ("standard", &standard)] {
                let r = check_equivalence(
                    c,
                    &compiled.circuit,
                    &compiled.initial_layout,
                    &compiled.final_layout,
                    EQUIVALENCE_TRIALS,
                    7,
                )
                .map_err(|e| format!("{} {kind}: {e}", c.name))?;
                if !r.pass || r.min_fidelity < EQUIVALENCE_FIDELITY {
                    return Err(format!("{} {kind}: min fidelity {}", c.name, r.min_fidelity));
                }
                min = min.min(r.min_fidelity);
            }
            Ok(min)
        })
        .collect();
    let mut min = 1.0f64;
    for r in results {
        min = min.min(r?);
    }
    Ok(format!("{} circuits x 2 compilations, {EQUIVALENCE_TRIALS} trials each, min fidelity = {min:.12}", circuits.len()))
}

fn routing_violations(c: &Circuit, device: &Device) -> Result<(usize, usize), String> {
    let graph = augment(device);
    let dist = weighted_distances(&graph).map_err(|e| e.to_string())?;
    let layout = initial_layout(c, &graph, &dist).map_err(|e| e.to_string())?;
    let routed = route(c, &graph, &dist, layout, Default::default()).map_err(|e| e.to_string())?;
    let v = check_routing(&routed.circuit, &graph);
    ensure(v.is_empty(), || format!("{}: {} routing violations, first {:?}", c.name, v.len(), v[0]))?;
    let lowered = lower(&routed, device, &graph, false).map_err(|e| e.to_string())?;
    ensure(check_lowered(&lowered.circuit, device, &graph).is_empty(), || format!("{}: lowering check failed", c.name))?;
    // Independent adjacency check on the raw grid.
    let mut two_qubit = 0;
    for (i, g) in lowered.circuit.gates.iter().enumerate() {
        if g.kind == GateKind::RemoteCx {
            return Err(format!("{}: composite gate survived lowering at {i}", c.name));
        }
        if g.kind == GateKind::Cx {
            two_qubit += 1;
            ensure(device.grid_adjacent(g.qubits[0], g.qubits[1]), || {
                format!("{}: CX {:?} at {i} is not grid-adjacent", c.name, g.qubits)
            })?;
        }
    }
    let remote = routed.circuit.gates.iter().filter(|g| g.edge_kind == Some(EdgeKind::Augmented)).count();
    Ok((two_qubit, remote))
}

fn c3_routing_validity() -> Check {
    let cfg = RunConfig::default();
    let mut circuits: Vec<Circuit> = (2..=20).flat_map(|n| [qft(n).unwrap(), dj(n).unwrap()]).collect();
    for path in corpus_files() {
        circuits.push(parse_qasm(&fs::read_to_string(&path).unwrap()).map_err(|e| e.to_string())?);
    }
    let totals: Vec<Result<(usize, usize), String>> = circuits
        .par_iter()
        .map(|c| {
            let device = epr_route::pipeline::size_device(c.n_qubits, &cfg).map_err(|e| e.to_string())?;
            let (a, r) = routing_violations(c, &device)?;
            let (b, _) = routing_violations(c, &Device::plain_grid(device.side))?;
            Ok((a + b, r))
        })
        .collect();
    let (mut cx, mut remote) = (0, 0);
    for t in totals {
        let (a, r) = t?;
        cx += a;
        remote += r;
    }
    Ok(format!(
        "{} circuits on both devices, {cx} lowered CXs and {remote} augmented edges used, 0 violations",
        circuits.len()
    ))
}

fn floyd_warshall(device: &Device) -> Vec<Vec<Weight>> {
    let graph = augment(device);
    let n = graph.n_nodes();
    let mut d = vec![vec![Weight::INFINITE; n]; n];
    for u in graph.data_nodes() {
        d[u][u] = Weight(0);
    }
    for e in graph.edges() {
        d[e.u][e.v] = d[e.u][e.v].min(e.weight);
        d[e.v][e.u] = d[e.v][e.u].min(e.weight);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k].saturating_add(d[k][j]);
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn c4_graph_oracles() -> Check {
    let device = grid_device_with_side(5);
    ensure(device.ancillas() == [1, 3, 5, 9, 15, 19, 21, 23], || format!("ancillas {:?}", device.ancillas()))?;
    let graph = augment(&device);
    let edge = graph.edge(2, 22, EdgeKind::Augmented).ok_or("edge (2,22) missing")?;
    let serving: Vec<(usize, usize)> = edge.serving_pairs.iter().map(|&i| device.epr_pairs[i]).collect();
    ensure(serving == [(1, 21), (3, 23)], || format!("edge (2,22) served by {serving:?}"))?;
    let mut pairs_checked = 0usize;
    for side in 2..=15 {
        let device = grid_device_with_side(side);
        let graph = augment(&device);
        let dist = weighted_distances(&graph).map_err(|e| e.to_string())?;
        let fw = floyd_warshall(&device);
        for u in graph.data_nodes() {
            for v in graph.data_nodes() {
                ensure(dist.weight(u, v) == fw[u][v], || format!("side {side}: d({u},{v}) differs"))?;
                pairs_checked += 1;
            }
        }
    }
    Ok(format!("5x5 facts hold; {pairs_checked} distances match Floyd-Warshall for sides 2..=15"))
}

fn c5_trend() -> Check {
    let cfg = RunConfig::default();
    let rows: Vec<Result<_, String>> = TREND_SIZES
        .par_iter()
        .map(|&n| compile_both(&qft(n).unwrap(), &cfg).map(|b| b.report).map_err(|e| format!("qft_{n}: {e:#}")))
        .collect();
    let rows: Vec<_> = rows.into_iter().collect::<Result<_, _>>()?;
    let wins = rows.iter().filter(|r| r.cx_difference > 0 && r.depth_difference > 0).count();
    let cx_wins = rows.iter().filter(|r| r.cx_difference > 0).count();
    let depth_wins = rows.iter().filter(|r| r.depth_difference > 0).count();
    let chain = rows.windows(3).any(|w| w[0].cx_difference <= w[1].cx_difference && w[1].cx_difference <= w[2].cx_difference);
    let table: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "n={} cx {:+} depth {:+} (block view {} vs {})",
                r.n_qubits, r.cx_difference, r.depth_difference, r.remote_block_depth, r.standard_depth
            )
        })
        .collect();
    let detail = format!(
        "both lower {wins}/{} (cx {cx_wins}, depth {depth_wins}), non-decreasing cx chain: {chain}; {}",
        rows.len(),
        table.join("; ")
    );
    let needed = (TREND_FRACTION * rows.len() as f64).ceil() as usize;
    if wins >= needed && chain {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c6_contention() -> Check {
    let device = Device::new(
        5,
        vec![(1, 21)],
        epr_core::device::DEFAULT_FIDELITY_STANDARD,
        epr_core::device::DEFAULT_FIDELITY_AUGMENTED,
    )
    .map_err(|e| e.to_string())?;
    let mut single = Circuit::new("pair", 25, 2);
    single.gates = remote_cx_block(0, 6, 16, (1, 21), (0, 1), false);
    let mut two = Circuit::new("pair", 25, 4);
    two.gates = remote_cx_block(0, 6, 16, (1, 21), (0, 1), false);
    two.gates.extend(remote_cx_block(1, 8, 18, (1, 21), (2, 3), false));
    let one = schedule(&single, &device).map_err(|e| e.to_string())?.makespan;
    let contended = schedule(&two, &device).map_err(|e| e.to_string())?.makespan;
    let free = schedule_with(&two, &device, false).map_err(|e| e.to_string())?.makespan;
    let plain = depth(&two, DepthMode::AllGates).map_err(|e| e.to_string())?;
    ensure(contended == 2 * one, || format!("contended {contended} vs single {one}"))?;
    ensure(contended != plain && free == plain, || format!("contended {contended}, unconstrained {free}, depth {plain}"))?;
    Ok(format!("single {one}, contended {contended}, unconstrained {free}"))
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn c7_determinism() -> Check {
    let corpus = corpus_files();
    let gf = corpus[0].to_str().unwrap().to_string();
    let invocations: Vec<Vec<String>> = [
        vec!["compile", "--gen", "qft:9", "--gen", "dj:7", "--input", &gf],
        vec!["compile", "--gen", "qft:6", "--physical", "--mode", "remote"],
        vec!["bench", "--gen", "qft:4..10", "--gen", "dj:4..8", "--input", &gf],
        vec!["bench", "--gen", "qft:8", "--depth-mode", "2q"],
    ]
    .iter()
    .map(|a| a.iter().map(|s| s.to_string()).collect())
    .collect();
    let mut files = 0;
    for args in &invocations {
        let runs: Vec<TempDir> = (0..2).map(|_| TempDir::new().unwrap()).collect();
        for dir in &runs {
            let out = Command::new(env!("CARGO_BIN_EXE_epr-route"))
                .args(args)
                .args(["--out", "run"])
                .current_dir(dir.path())
                .output()
                .map_err(|e| e.to_string())?;
            ensure(out.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))?;
        }
        let (a, b) = (snapshot(&runs[0].path().join("run")), snapshot(&runs[1].path().join("run")));
        ensure(!a.is_empty() && a == b, || format!("{args:?}: artifacts differ"))?;
        files += a.len();
    }
    Ok(format!("{} invocations run twice, {files} artifacts byte-identical", invocations.len()))
}

fn c8_round_trip() -> Check {
    let mut texts: Vec<(String, String)> = Vec::new();
    for path in corpus_files() {
        texts.push((path.display().to_string(), fs::read_to_string(&path).unwrap()));
    }
    for n in 2..=20 {
        for c in [qft(n).unwrap(), dj(n).unwrap()] {
            texts.push((c.name.clone(), emit_qasm(&c, &[]).map_err(|e| e.to_string())?));
        }
    }
    // Compiled output carries measurements and classical conditions.
    let cfg = RunConfig { physical: true, ..RunConfig::default() };
    for n in [6, 9] {
        let remote = compile_remote(&qft(n).unwrap(), &cfg).map_err(|e| format!("{e:#}"))?;
        texts.push((format!("qft_{n}.remote"), emit_qasm(&remote.circuit, &[]).map_err(|e| e.to_string())?));
    }
    for (name, text) in &texts {
        let first = parse_qasm(text).map_err(|e| format!("{name}: {e}"))?;
        let emitted = emit_qasm(&first, &[]).map_err(|e| format!("{name}: {e}"))?;
        let second = parse_qasm(&emitted).map_err(|e| format!("{name}: {e}"))?;
        ensure(structurally_equal(&first, &second), || format!("{name}: not a fixpoint"))?;
    }
    Ok(format!("{} files are parse-emit-parse fixpoints", texts.len()))
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "remote-CX block correctness", budget: Some(Duration::from_secs(1)), run: c1_remote_block },
        Criterion { id: 2, name: "end-to-end equivalence", budget: Some(Duration::from_secs(300)), run: c2_equivalence },
        Criterion { id: 3, name: "routing validity", budget: None, run: c3_routing_validity },
        Criterion { id: 4, name: "graph oracles", budget: Some(Duration::from_secs(10)), run: c4_graph_oracles },
        Criterion { id: 5, name: "qft trend", budget: Some(Duration::from_secs(600)), run: c5_trend },
        Criterion { id: 6, name: "contention scheduling", budget: Some(Duration::from_secs(1)), run: c6_contention },
        Criterion { id: 7, name: "determinism", budget: None, run: c7_determinism },
        Criterion { id: 8, name: "QASM round trip", budget: None, run: c8_round_trip },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let result = (c.run)();
        let elapsed = start.elapsed();
        let over = c.budget.filter(|&b| elapsed > b);
        let (verdict, detail) = match (&result, over) {
            (Ok(d), None) => ("PASS", d.clone()),
            (Ok(d), Some(b)) => ("FAIL", format!("over the {b:?} budget; {d}")),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!("{verdict} {} {} [{:.2}s]: {detail}", c.id, c.name, elapsed.as_secs_f64());
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
