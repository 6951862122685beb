//! `gemmbench` command-line interface.
//!
//! Exit codes: 0 success, 1 domain error (bad metadata, missing point,
//! IO), 2 usage error, 3 `run`/`replay` completed but at least one
//! repetition failed validation.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gemmbench::core::explore::{DEFAULT_LWS_ORDERS, DEFAULT_LWS_TOTALS, DEFAULT_ORDERS};
use gemmbench::core::{
    config, ExperimentPoint, Flavour, LaunchConfig, PowerSensor, ShapeHeuristic, TileShape, Variant,
};
use gemmbench::engine::Dispatch;
use gemmbench::environment;
use gemmbench::explorer::{explore_order, explore_tiles, Target};
use gemmbench::harness::{run_point, RunOptions};
use gemmbench::registry::Registry;
use gemmbench::report::{self, format_sci, Table};
use gemmbench::repository::Repository;
use gemmbench::sensors::SensorConfig;
use gemmbench::settings::Settings;

/// Writes to stdout; a closed pipe (e.g. `| head`) ends the process quietly.
fn write_stdout(args: std::fmt::Arguments<'_>) {
    use std::io::Write;
    if let Err(e) = std::io::stdout().lock().write_fmt(args) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing output: {e}");
        std::process::exit(EXIT_DOMAIN.into());
    }
}

macro_rules! out {
    ($($t:tt)*) => { write_stdout(format_args!($($t)*)) };
}

macro_rules! outln {
    () => { write_stdout(format_args!("\n")) };
    ($($t:tt)*) => { write_stdout(format_args!("{}\n", format_args!($($t)*))) };
}

const EXIT_DOMAIN: u8 = 1;
const EXIT_MISMATCH: u8 = 3;
const DEFAULT_REPO: &str = "gemmbench-repo";

#[derive(Parser)]
#[command(name = "gemmbench", version, about = "GEMM benchmarking and autotuning harness")]
struct Cli {
    /// JSON file with defaults (seed, alpha, beta, repetitions, epsilon, repo, dataset, sensor, sweep lists).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Directory of kernel metadata files; replaces the bundled registry.
    #[arg(long, global = true, value_name = "DIR")]
    dataset: Option<PathBuf>,
    /// Experiment repository directory.
    #[arg(long, global = true, env = "GEMMBENCH_REPO", value_name = "DIR")]
    repo: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the registry grouped by flavour.
    List,
    /// Run one experiment point.
    Run {
        #[arg(long)]
        kernel: String,
        #[arg(short = 'n', long = "order")]
        n: usize,
        /// Work-group shape `J,I`.
        #[arg(long, value_name = "J,I")]
        lws: Option<TileShape>,
        /// Store the point under this experiment id.
        #[arg(long)]
        experiment: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the matrix order for every kernel of a flavour.
    ExploreOrder {
        #[arg(long, default_value = "SGEMM_NT")]
        flavour: Flavour,
        /// Restrict the sweep to these kernel names.
        #[arg(long, value_delimiter = ',')]
        kernels: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<usize>>,
        #[arg(long, value_name = "J,I")]
        lws: Option<TileShape>,
        /// Experiment id; defaults to `<FLAVOUR>-explore-f-n`.
        #[arg(long)]
        experiment: Option<String>,
        #[command(flatten)]
        sweep: SweepFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep work-group shapes for one kernel.
    ExploreLws {
        #[arg(long, default_value = "SGEMM_NT_4x1_barrier")]
        kernel: String,
        #[arg(long, value_delimiter = ',')]
        orders: Option<Vec<usize>>,
        /// Work-items per work-group.
        #[arg(long, value_delimiter = ',')]
        totals: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value_t = Heuristic::Exhaustive)]
        heuristic: Heuristic,
        /// Experiment id; defaults to `<FLAVOUR>-explore-n-lws`.
        #[arg(long)]
        experiment: Option<String>,
        #[command(flatten)]
        sweep: SweepFlags,
        #[command(flatten)]
        common: Common,
    },
    /// Re-execute a stored point and append the result as a replay.
    Replay {
        #[arg(long)]
        experiment: String,
        #[arg(long)]
        point: String,
        /// Sensor configuration: inline JSON or a file.
        #[arg(long, value_name = "CFG")]
        sensor: Option<String>,
        #[arg(long)]
        sequential: bool,
        #[arg(long)]
        json: bool,
    },
    /// Render a stored experiment.
    Report {
        #[arg(long)]
        experiment: String,
        #[arg(long, value_enum, default_value_t = TableKind::Perf)]
        table: TableKind,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    beta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Sensor configuration: inline JSON or a file.
    #[arg(long, value_name = "CFG")]
    sensor: Option<String>,
    /// Platform index, recorded in the environment map.
    #[arg(short = 'p')]
    platform: Option<u32>,
    /// Device index, recorded in the environment map.
    #[arg(short = 'd')]
    device: Option<u32>,
    /// One untimed run before the repetitions.
    #[arg(long)]
    warmup: bool,
    /// Dispatch bands on the calling thread only.
    #[arg(long)]
    sequential: bool,
    /// Print the full point record as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepFlags {
    /// Store points that already exist as replays.
    #[arg(long)]
    append: bool,
    /// Do not persist the sweep.
    #[arg(long)]
    no_store: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Heuristic {
    Exhaustive,
    PreferSlim,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableKind {
    Perf,
    Energy,
    Validation,
    Chart,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Md,
}

/// Accepts the single-dash `-lws J,I` spelling.
fn normalize_args(args: impl Iterator<Item = String>) -> Vec<String> {
    args.map(|a| match a.strip_prefix("-lws") {
        Some(rest) if rest.is_empty() || rest.starts_with('=') => format!("--lws{rest}"),
        _ => a,
    })
    .collect()
}

struct Session {
    settings: Settings,
    registry: Registry,
    repo: Repository,
}

fn load_context(cli: &Cli) -> Result<Session> {
    let settings = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    let registry = match cli.dataset.as_ref().or(settings.dataset.as_ref()) {
        Some(dir) => Registry::from_dir(dir)?,
        None => Registry::bundled(),
    };
    let root = cli.repo.clone().or_else(|| settings.repo.clone()).unwrap_or_else(|| DEFAULT_REPO.into());
    Ok(Session { settings, registry, repo: Repository::new(root) })
}

fn sensor_config(flag: Option<&str>, settings: &Settings) -> Result<Option<SensorConfig>> {
    let Some(value) = flag else {
        return Ok(settings.sensor.clone());
    };
    let text = if value.trim_start().starts_with('{') {
        value.to_string()
    } else {
        std::fs::read_to_string(Path::new(value)).with_context(|| format!("reading sensor config {value}"))?
    };
    Ok(Some(serde_json::from_str(&text).context("parsing sensor config")?))
}

fn build_sensor(cfg: Option<SensorConfig>) -> Result<Option<Box<dyn PowerSensor + Send>>> {
    cfg.map(|c| c.build()).transpose().map_err(Into::into)
}

fn options(common_env: &[(&str, Option<u32>)], sequential: bool) -> RunOptions {
    let mut environment = environment::capture();
    for (key, value) in common_env {
        if let Some(v) = value {
            environment.insert((*key).to_string(), v.to_string());
        }
    }
    RunOptions { dispatch: if sequential { Dispatch::Sequential } else { Dispatch::Parallel }, environment }
}

impl Common {
    fn apply(&self, mut cfg: LaunchConfig, s: &Settings) -> LaunchConfig {
        cfg.repetitions = self.reps.or(s.repetitions).unwrap_or(config::DEFAULT_REPETITIONS);
        cfg.seed = self.seed.or(s.seed).unwrap_or(config::DEFAULT_SEED);
        cfg.alpha = self.alpha.or(s.alpha).unwrap_or(config::DEFAULT_ALPHA);
        cfg.beta = self.beta.or(s.beta).unwrap_or(config::DEFAULT_BETA);
        cfg.epsilon = self.epsilon.or(s.epsilon).unwrap_or(config::DEFAULT_EPSILON);
        cfg.warmup = self.warmup;
        cfg
    }

    fn run_options(&self) -> RunOptions {
        options(&[("platform", self.platform), ("device", self.device)], self.sequential)
    }
}

fn print_point(p: &ExperimentPoint, json: bool) {
    if json {
        outln!("{}", serde_json::to_string_pretty(p).expect("records serialize"));
        return;
    }
    let c = &p.config;
    let replay = p.replay.map(|k| format!(" (replay {k})")).unwrap_or_default();
    outln!("point {}{replay}: {} n={} lws={} seed={}", p.point_id, c.kernel.name, c.n, c.tile, c.seed);
    if let Some(reason) = &p.skipped {
        outln!("  skipped: {reason}");
        return;
    }
    let g: Vec<String> = p.gflops_per_rep.iter().map(|g| format!("{g:.3}")).collect();
    outln!("  gflops/s: {}", g.join(" "));
    outln!(
        "  mean {}  std {}",
        p.mean.map(|m| format!("{m:.5}")).unwrap_or_default(),
        p.std.map(|s| format!("{s:.6}")).unwrap_or_else(|| "-".into())
    );
    let v: Vec<String> =
        p.validations.iter().map(|v| format!("{} {}", format_sci(v.max_abs_diff), u8::from(v.matched))).collect();
    outln!("  validation (eps {}): {}", c.epsilon, v.join(", "));
    for (rep, estimates) in p.energy.iter().enumerate() {
        let e: Vec<String> = estimates.iter().map(|e| format!("{} {:.6} J", e.channel, e.joules)).collect();
        outln!("  energy rep {rep}: {}", e.join(", "));
    }
    for err in &p.sensor_errors {
        outln!("  sensor: {err}");
    }
}

fn validation_exit(p: &ExperimentPoint) -> ExitCode {
    if p.all_matched() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_MISMATCH)
    }
}

fn print_table(t: &Table, format: Format) -> Result<()> {
    match format {
        Format::Csv => out!("{}", report::export_csv(t)?),
        Format::Md => out!("{}", report::export_markdown(t)),
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitCode> {
    let ctx = load_context(&cli)?;
    let s = &ctx.settings;
    match cli.command {
        Command::List => {
            for flavour in ctx.registry.flavours() {
                outln!("{flavour}");
                for spec in ctx.registry.lookup(flavour) {
                    let variant = Variant::from_key(&spec.source_id)
                        .map(|v| format!("{v:?}").to_lowercase())
                        .unwrap_or_else(|| "unknown".into());
                    outln!("  {:<24} {:<28} {}x{} {variant}", spec.name, spec.source_id, spec.d_j, spec.d_i);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { kernel, n, lws, experiment, common } => {
            let Some(spec) = ctx.registry.get(&kernel) else {
                bail!("kernel `{kernel}` is not in the registry (see `gemmbench list`)");
            };
            let mut cfg = common.apply(LaunchConfig::new(spec.clone(), n), s);
            cfg.tile = lws.unwrap_or(config::DEFAULT_TILE);
            let mut sensor = build_sensor(sensor_config(common.sensor.as_deref(), s)?)?;
            let opts = common.run_options();
            let mut point = run_point(&cfg, &ctx.registry, sensor.as_deref_mut().map(|x| x as _), &opts)?;
            if let Some(exp) = experiment {
                let stored = ctx.repo.store_point(&exp, &point, false)?;
                point.replay = stored.replay;
                eprintln!("stored {}", stored.path.display());
            }
            print_point(&point, common.json);
            Ok(validation_exit(&point))
        }
        Command::ExploreOrder { flavour, kernels, orders, lws, experiment, sweep, common } => {
            let mut specs: Vec<_> = ctx.registry.lookup(flavour).into_iter().cloned().collect();
            if !kernels.is_empty() {
                for k in &kernels {
                    if !specs.iter().any(|s| &s.name == k) {
                        bail!("kernel `{k}` is not a {flavour} kernel in the registry");
                    }
                }
                specs.retain(|s| kernels.contains(&s.name));
            }
            let Some(first) = specs.first() else {
                bail!("no {flavour} kernels in the registry");
            };
            let orders = orders.or_else(|| s.orders.clone()).unwrap_or_else(|| DEFAULT_ORDERS.to_vec());
            let mut base = common.apply(LaunchConfig::new(first.clone(), 1), s);
            base.tile = lws.unwrap_or(config::DEFAULT_TILE);
            let mut sensor = build_sensor(sensor_config(common.sensor.as_deref(), s)?)?;
            let opts = common.run_options();
            let exp = experiment.unwrap_or_else(|| format!("{flavour}-explore-f-n"));
            let target = Target { repo: &ctx.repo, experiment_id: &exp, append: sweep.append };
            let target = (!sweep.no_store).then_some(&target);
            let points = explore_order(
                &specs,
                &orders,
                &base,
                &ctx.registry,
                sensor.as_deref_mut().map(|x| x as _),
                &opts,
                target,
            )?;
            for p in &points {
                print_point(p, common.json);
            }
            if target.is_some() {
                eprintln!("stored {} points in {}", points.len(), ctx.repo.root().join(&exp).display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ExploreLws { kernel, orders, totals, heuristic, experiment, sweep, common } => {
            let Some(spec) = ctx.registry.get(&kernel) else {
                bail!("kernel `{kernel}` is not in the registry (see `gemmbench list`)");
            };
            let orders = orders.or_else(|| s.lws_orders.clone()).unwrap_or_else(|| DEFAULT_LWS_ORDERS.to_vec());
            let totals = totals.or_else(|| s.totals.clone()).unwrap_or_else(|| DEFAULT_LWS_TOTALS.to_vec());
            let heuristic = match heuristic {
                Heuristic::Exhaustive => ShapeHeuristic::Exhaustive,
                Heuristic::PreferSlim => ShapeHeuristic::PreferSlim,
            };
            let base = common.apply(LaunchConfig::new(spec.clone(), 1), s);
            let mut sensor = build_sensor(sensor_config(common.sensor.as_deref(), s)?)?;
            let opts = common.run_options();
            let exp = experiment.unwrap_or_else(|| format!("{}-explore-n-lws", spec.flavour()));
            let target = Target { repo: &ctx.repo, experiment_id: &exp, append: sweep.append };
            let target = (!sweep.no_store).then_some(&target);
            let result = explore_tiles(
                spec,
                &orders,
                &totals,
                heuristic,
                &base,
                &ctx.registry,
                sensor.as_deref_mut().map(|x| x as _),
                &opts,
                target,
            )?;
            for p in &result.points {
                print_point(p, common.json);
            }
            outln!("winners:");
            for w in &result.winners {
                outln!("  order {:>5} total {:>4}: ({}) mean {:.5}", w.order, w.total, w.shape, w.mean);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { experiment, point, sensor, sequential, json } => {
            let mut sensor = build_sensor(sensor_config(sensor.as_deref(), s)?)?;
            let opts = options(&[], sequential);
            let p =
                ctx.repo.replay(&experiment, &point, &ctx.registry, sensor.as_deref_mut().map(|x| x as _), &opts)?;
            print_point(&p, json);
            Ok(validation_exit(&p))
        }
        Command::Report { experiment, table, format } => {
            let entry = ctx.repo.load_experiment(&experiment)?;
            let t = match table {
                TableKind::Perf => report::render_order_table(&entry.points)?,
                TableKind::Energy => report::render_energy_table(&entry.points)?,
                TableKind::Validation => report::render_validation_table(&entry.points)?,
                TableKind::Chart => report::render_chart_data(&entry.points)?,
            };
            print_table(&t, format)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse_from(normalize_args(std::env::args()));
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_DOMAIN)
        }
    }
}
