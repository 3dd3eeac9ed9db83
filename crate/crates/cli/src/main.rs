mod experiment;
mod plot;
mod target;
mod topology;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use unisynth::exec::with_threads;
use unisynth::optimizer::{synthesize, OptimizerConfig, Status, SynthesisResult, Variant};
use unisynth::params::{
    count_adequate_sequences, effective_parameters_combinatorial, effective_parameters_numeric,
    success_rate_monte_carlo, ClassifyMethod, JacobianMode, RankOptions,
};
use unisynth::{export_qasm, haar_random_unitary, Circuit, ComplexMatrix, Execution, ParamAssignment};

use crate::topology::{build_skeleton, Depth, Topology};

#[derive(Parser)]
#[command(name = "unisynth", version, about = "Synthesize unitaries into CNOT + single-qubit circuits")]
struct Cli {
    /// Master seed (targets, initial angles, Monte-Carlo draws)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for output artifacts
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Worker threads for batch work (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Suppress progress output on stderr
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a skeleton as circuit JSON with zero angles
    Skeleton {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Write here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize one target
    Synth(SynthArgs),
    /// Run a batch experiment from a JSON config
    Experiment {
        config: PathBuf,
    },
    /// Effective-parameter report for a skeleton
    Analyze {
        #[command(flatten)]
        shape: ShapeArgs,
        /// Analyze the skeleton of this circuit JSON instead
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = AnalyzeMethod::Auto)]
        method: AnalyzeMethod,
        /// Cap on 3 x slot count for numeric ranks
        #[arg(long, default_value_t = unisynth::params::DEFAULT_PARAM_BUDGET)]
        budget: usize,
    },
    /// Success probability of random one-CNOT-per-layer skeletons
    Failprob {
        #[arg(long)]
        n: usize,
        /// CNOT count: `14`, `14..16` (inclusive) or `14,15,16`
        #[arg(long)]
        cnots: String,
        /// Exact count by dynamic programming (n = 3 only)
        #[arg(long, conflicts_with = "samples")]
        exact: bool,
        /// Monte-Carlo sample count
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Render trace CSVs as an SVG chart with a log-scaled cost axis
    Plot {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        log_x: bool,
        #[arg(long, default_value = "Convergence")]
        title: String,
    },
}

#[derive(Args, Clone)]
struct ShapeArgs {
    /// Qubit count
    #[arg(long)]
    n: Option<usize>,
    /// auto (full for even n, line for odd n), full, star, line or graph
    #[arg(long, default_value = "auto")]
    topology: String,
    /// Single-qubit layer count l (CNOT layers = l - 1), or auto
    #[arg(long, default_value = "auto")]
    layers: String,
    /// CNOT layer count; overrides --layers
    #[arg(long)]
    cnot_layers: Option<usize>,
    /// Coupling graph JSON {"n_qubits": n, "edges": [[a, b], ...]}
    #[arg(long)]
    graph: Option<PathBuf>,
}

impl ShapeArgs {
    fn build(&self, n: usize) -> Result<unisynth::Skeleton> {
        let topology = Topology::parse(&self.topology, self.graph.as_deref())?;
        build_skeleton(n, &topology, Depth::parse(&self.layers, self.cnot_layers)?)
    }
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Target unitary JSON {"dim", "re", "im"}
    #[arg(long, conflicts_with = "haar_seed")]
    target: Option<PathBuf>,
    /// Haar-random target from this seed (default: --seed)
    #[arg(long)]
    haar_seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = VariantArg::Svd)]
    variant: VariantArg,
    #[arg(long, default_value_t = 1e-8)]
    threshold: f64,
    #[arg(long, default_value_t = 50_000)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 200)]
    plateau_window: usize,
    #[arg(long, default_value_t = 1e-4)]
    plateau_rel: f64,
    #[arg(long, default_value_t = 0.05)]
    learning_rate: f64,
    /// Also write circuit.qasm
    #[arg(long)]
    qasm: bool,
    /// Record real per-sweep timings in trace.csv (not reproducible)
    #[arg(long)]
    wall_clock: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Svd,
    Gradient,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AnalyzeMethod {
    /// Analytic rank within budget, else the combinatorial rules
    Auto,
    /// Finite-difference Jacobian rank
    Numeric,
    /// Analytic tangent rank
    Analytic,
    Combinatorial,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs;
    match with_threads(jobs, || run(&cli)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<u8> {
    let out_dir = cli.output_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Skeleton { shape, out } => {
            let n = shape.n.context("--n is required")?;
            let s = shape.build(n)?;
            if !cli.quiet {
                eprintln!(
                    "{} qubits, {} CNOT layers, {} CNOTs, {} slots",
                    s.n_qubits(),
                    s.cnot_layers().len(),
                    s.cnot_count(),
                    s.slot_count()
                );
            }
            let params = ParamAssignment::zeros(&s);
            let text = Circuit::new(s, params)?.to_json() + "\n";
            match out {
                Some(p) => write(p, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Synth(args) => cmd_synth(args, seed, &out_dir, cli.quiet),
        Command::Experiment { config } => {
            let cfg = experiment::ExperimentConfig::load(config)?;
            let cfg = experiment::ExperimentConfig { master_seed: cli.seed.unwrap_or(cfg.master_seed), ..cfg };
            let dir = cli.output_dir.clone().unwrap_or_else(|| cfg.output_dir.clone());
            let cfg = cfg.resolve()?;
            let records = experiment::run(&cfg, Execution::Parallel);
            let summary = experiment::write_outputs(&dir, &cfg, &records)?;
            if !cli.quiet {
                eprintln!("{} trials written to {}", records.len(), dir.display());
            }
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(0)
        }
        Command::Analyze { shape, circuit, method, budget } => {
            let s = match circuit {
                Some(p) => {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    Circuit::from_json(&text)?.skeleton
                }
                None => shape.build(shape.n.context("--n or --circuit is required")?)?,
            };
            let numeric = |mode| {
                effective_parameters_numeric(
                    &s,
                    &RankOptions { mode, budget: *budget, execution: Execution::Parallel, ..RankOptions::default() },
                )
            };
            let report = match method {
                AnalyzeMethod::Numeric => numeric(JacobianMode::FiniteDifference)?,
                AnalyzeMethod::Analytic => numeric(JacobianMode::Analytic)?,
                AnalyzeMethod::Combinatorial => effective_parameters_combinatorial(&s)?,
                AnalyzeMethod::Auto => match numeric(JacobianMode::Analytic) {
                    Err(unisynth::Error::BudgetExceeded { .. }) => effective_parameters_combinatorial(&s)
                        .context("skeleton exceeds the numeric budget and is not sequential")?,
                    other => other?,
                },
            };
            if !cli.quiet {
                eprintln!(
                    "nominal {} effective {} required {} -> {}",
                    report.nominal,
                    report.effective,
                    report.required,
                    if report.adequate { "adequate" } else { "underparameterized" }
                );
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(0)
        }
        Command::Failprob { n, cnots, exact, samples } => {
            cmd_failprob(*n, cnots, *exact, *samples, seed, cli.output_dir.as_deref(), cli.quiet)
        }
        Command::Plot { traces, out, log_x, title } => {
            let series = traces.iter().map(|p| plot::read_trace(p)).collect::<Result<Vec<_>>>()?;
            let svg = plot::render(&series, *log_x, title)?;
            let path = out.clone().unwrap_or_else(|| out_dir.join("plot.svg"));
            write(&path, &svg)?;
            if !cli.quiet {
                eprintln!("wrote {}", path.display());
            }
            Ok(0)
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn exit_code(status: Status) -> u8 {
    match status {
        Status::Converged => 0,
        Status::Plateaued => 2,
        Status::SweepBudgetExhausted => 3,
    }
}

fn cmd_synth(args: &SynthArgs, seed: u64, out_dir: &Path, quiet: bool) -> Result<u8> {
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
    let clock = Instant::now();
    let (target, target_desc) = match &args.target {
        Some(p) => (target::load_target(p)?, json!({ "file": p })),
        None => {
            let hs = args.haar_seed.unwrap_or(seed);
            let n = args.shape.n.context("--n is required for Haar targets")?;
            (haar_random_unitary(n, &mut ChaCha8Rng::seed_from_u64(hs)), json!({ "haar_seed": hs }))
        }
    };
    let n = target.n_qubits().context("target dimension is not a power of two")?;
    if let Some(flag) = args.shape.n {
        if flag != n {
            bail!("--n {flag} does not match the {}-dimensional target", target.dim());
        }
    }
    let skeleton = args.shape.build(n)?;
    let config = OptimizerConfig {
        convergence_threshold: args.threshold,
        plateau_window: args.plateau_window,
        plateau_rel_improvement: args.plateau_rel,
        max_sweeps: args.max_sweeps,
        variant: match args.variant {
            VariantArg::Svd => Variant::SvdSweep,
            VariantArg::Gradient => Variant::EulerGradient,
        },
        learning_rate: args.learning_rate,
        rng_seed: seed,
    };
    if !quiet {
        eprintln!(
            "n={n}: {} CNOT layers, {} slots, {:?}",
            skeleton.cnot_layers().len(),
            skeleton.slot_count(),
            config.variant
        );
    }
    let result = synthesize(&target, &skeleton, &config)?;
    write_synth_outputs(out_dir, &target, &skeleton, &config, &target_desc, &result, args)?;
    let meta = json!({
        "started_unix_seconds": started,
        "elapsed_seconds": clock.elapsed().as_secs_f64(),
        "sweep_wall_seconds": result.trace.iter().map(|p| p.wall_seconds).collect::<Vec<_>>(),
    });
    write(&out_dir.join("run_meta.json"), &(serde_json::to_string_pretty(&meta)? + "\n"))?;
    if !quiet {
        eprintln!("{:?} after {} sweeps, cost {:e}", result.status, result.sweeps_used, result.final_cost);
    }
    Ok(exit_code(result.status))
}

fn write_synth_outputs(
    dir: &Path,
    target: &ComplexMatrix,
    skeleton: &unisynth::Skeleton,
    config: &OptimizerConfig,
    target_desc: &serde_json::Value,
    result: &SynthesisResult,
    args: &SynthArgs,
) -> Result<()> {
    let circuit = Circuit::new(skeleton.clone(), result.params.clone())?;
    let summary = json!({
        "status": result.status,
        "final_cost": result.final_cost,
        "sweeps_used": result.sweeps_used,
        "seed": result.seed,
        "target": target_desc,
        "n_qubits": skeleton.n_qubits(),
        "s_layers": skeleton.s_layer_count(),
        "cnot_layers": skeleton.cnot_layers().len(),
        "cnot_count": skeleton.cnot_count(),
        "optimizer": config,
        "params": result.params,
    });
    let text = serde_json::to_string_pretty(&summary)? + "\n";
    write(&dir.join("result.json"), &text)?;
    print!("{text}");

    let mut csv = String::from("sweep,cost,wall_seconds\n");
    for p in &result.trace {
        let wall = if args.wall_clock { p.wall_seconds } else { 0.0 };
        csv.push_str(&format!("{},{:e},{}\n", p.sweep, p.cost, wall));
    }
    write(&dir.join("trace.csv"), &csv)?;
    write(&dir.join("circuit.json"), &(circuit.to_json() + "\n"))?;
    write(&dir.join("target.json"), &(serde_json::to_string(&target::TargetFile::from_matrix(target))? + "\n"))?;
    if args.qasm {
        write(&dir.join("circuit.qasm"), &export_qasm(skeleton, &result.params)?)?;
    }
    Ok(())
}

fn parse_cnots(spec: &str) -> Result<Vec<usize>> {
    let spec = spec.trim();
    let parse = |s: &str| s.trim().parse::<usize>().with_context(|| format!("bad CNOT count {s:?}"));
    if let Some((a, b)) = spec.split_once("..") {
        let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
        if a > b {
            bail!("empty CNOT range {spec}");
        }
        return Ok((a..=b).collect());
    }
    spec.split(',').map(parse).collect()
}

fn cmd_failprob(
    n: usize,
    cnots: &str,
    exact: bool,
    samples: Option<usize>,
    seed: u64,
    out_dir: Option<&Path>,
    quiet: bool,
) -> Result<u8> {
    let counts = parse_cnots(cnots)?;
    let mut csv = String::from("n,n_cnots,adequate,total,rate,std_error,method\n");
    let mut table = String::new();
    if exact {
        if n != 3 {
            bail!("--exact counting is only available for n = 3; use --samples K for n = {n}");
        }
        table.push_str(&format!("{:>6} {:>16} {:>20} {:>10}\n", "cnots", "adequate", "total", "rate"));
        for &k in &counts {
            let c = count_adequate_sequences(k)?;
            table.push_str(&format!("{:>6} {:>16} {:>20} {:>9.4}%\n", k, c.adequate, c.total, 100.0 * c.rate));
            csv.push_str(&format!("{n},{k},{},{},{},0,exact\n", c.adequate, c.total, c.rate));
        }
    } else {
        let samples = samples.context("pass --exact (n = 3) or --samples K")?;
        table.push_str(&format!("{:>6} {:>10} {:>10} {:>10} {:>10}\n", "cnots", "adequate", "samples", "rate", "std_err"));
        for &k in &counts {
            let e = success_rate_monte_carlo(n, k, samples, seed, ClassifyMethod::Auto, Execution::Parallel)?;
            table.push_str(&format!(
                "{:>6} {:>10} {:>10} {:>9.3}% {:>9.3}%\n",
                k,
                e.successes,
                e.samples,
                100.0 * e.rate,
                100.0 * e.std_error
            ));
            csv.push_str(&format!("{n},{k},{},{},{},{},{:?}\n", e.successes, e.samples, e.rate, e.std_error, e.method));
        }
    }
    print!("{table}");
    if let Some(dir) = out_dir {
        write(&dir.join("failprob.csv"), &csv)?;
        if !quiet {
            eprintln!("wrote {}", dir.join("failprob.csv").display());
        }
    }
    Ok(0)
}
