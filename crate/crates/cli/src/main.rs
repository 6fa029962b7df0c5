use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use epr_core::generators::BenchmarkSpec;
use epr_core::router::RouterParams;
use epr_core::DepthMode;
use epr_route::commands::{cmd_bench, cmd_compile, cmd_device, cmd_gen, cmd_verify, Verdict, VerifyFiles};
use epr_route::pipeline::{parse_gen, Mode, RunConfig};

const EXIT_FAIL: u8 = 1;
const EXIT_PIPELINE: u8 = 3;
const EXIT_NOT_VERIFIABLE: u8 = 4;

#[derive(Parser)]
#[command(name = "epr-route", version, about = "Route circuits onto grids with EPR-pair remote CX gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile circuits and write QASM, layout, block and metrics files.
    Compile(Common),
    /// Compare remote and standard compilation over a suite.
    Bench(Common),
    /// Check compiled circuits against their sources by simulation.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Compiled QASM to check instead of compiling afresh.
        #[arg(long)]
        compiled: Option<PathBuf>,
        /// Layout JSON written alongside the compiled QASM.
        #[arg(long)]
        layout: Option<PathBuf>,
        /// Block JSON written alongside remote compilations.
        #[arg(long)]
        blocks: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
    /// Write generated benchmarks as QASM.
    Gen(Common),
    /// Write a device description (JSON) and its augmented graph (DOT).
    Device {
        #[command(flatten)]
        common: Common,
        /// Size the device for this many circuit qubits.
        #[arg(long, conflicts_with = "side")]
        qubits: Option<usize>,
        /// Grid side length.
        #[arg(long)]
        side: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Remote,
    Standard,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum DepthArg {
    All,
    #[value(name = "2q")]
    TwoQubit,
}

#[derive(Args)]
struct Common {
    /// OpenQASM 2.0 input file (repeatable).
    #[arg(long)]
    input: Vec<PathBuf>,
    /// Generated benchmark FAMILY:N or FAMILY:A..B (repeatable).
    #[arg(long = "gen", value_name = "FAMILY:N")]
    generate: Vec<String>,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    #[arg(long, default_value_t = epr_core::device::DEFAULT_FIDELITY_STANDARD)]
    fidelity_standard: f64,
    #[arg(long, default_value_t = epr_core::device::DEFAULT_FIDELITY_AUGMENTED)]
    fidelity_augmented: f64,
    #[arg(long, default_value_t = RouterParams::default().lookahead_size)]
    lookahead: usize,
    #[arg(long, default_value_t = RouterParams::default().lookahead_weight)]
    lookahead_weight: f64,
    #[arg(long, default_value_t = RouterParams::default().decay)]
    decay: f64,
    /// Emit explicit EPR preparation before each remote block.
    #[arg(long)]
    physical: bool,
    #[arg(long, value_enum, default_value = "all")]
    depth_mode: DepthArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Use this device instead of sizing one.
    #[arg(long)]
    device_json: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut inputs = Vec::new();
        for g in &self.generate {
            inputs.extend(parse_gen(g)?);
        }
        inputs.extend(self.input.iter().map(|p| BenchmarkSpec::External { path: p.display().to_string() }));
        Ok(RunConfig {
            inputs,
            mode: match self.mode {
                ModeArg::Remote => Mode::Remote,
                ModeArg::Standard => Mode::Standard,
                ModeArg::Both => Mode::Both,
            },
            router: RouterParams {
                lookahead_size: self.lookahead,
                lookahead_weight: self.lookahead_weight,
                decay: self.decay,
            },
            fidelity_standard: self.fidelity_standard,
            fidelity_augmented: self.fidelity_augmented,
            physical: self.physical,
            depth_mode: match self.depth_mode {
                DepthArg::All => DepthMode::AllGates,
                DepthArg::TwoQubit => DepthMode::TwoQubitOnly,
            },
            out: self.out.clone(),
            seed: self.seed,
            device_json: self.device_json.clone(),
        })
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Compile(common) => {
            let cfg = common.config()?;
            let rows = cmd_compile(&cfg)?;
            println!("compiled {} input(s) into {} ({} comparison rows)", cfg.inputs.len(), cfg.out.display(), rows.len());
            Ok(0)
        }
        Command::Bench(common) => {
            let cfg = common.config()?;
            let (_, s) = cmd_bench(&cfg)?;
            println!(
                "{} benchmarks, {} failed; positive cx difference: {}, positive depth difference: {}",
                s.benchmarks, s.failed, s.positive_cx_difference, s.positive_depth_difference
            );
            Ok(0)
        }
        Command::Verify { common, compiled, layout, blocks, trials } => {
            let cfg = common.config()?;
            let records = cmd_verify(&cfg, &VerifyFiles { compiled, layout, blocks }, trials)?;
            for r in &records {
                println!("{}", serde_json::to_string(r)?);
            }
            let code = if records.iter().any(|r| r.verdict == Verdict::Fail) {
                EXIT_FAIL
            } else if records.iter().any(|r| r.verdict == Verdict::NotVerifiable) {
                EXIT_NOT_VERIFIABLE
            } else {
                0
            };
            Ok(code)
        }
        Command::Gen(common) => {
            for p in cmd_gen(&common.config()?)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
        Command::Device { common, qubits, side } => {
            for p in cmd_device(&common.config()?, qubits, side)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_PIPELINE)
        }
    }
}
