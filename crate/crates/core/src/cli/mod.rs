//! The `granular-gates` command line.
//!
//! Every command reads an optional JSON config (flags win), writes plain-text
//! outputs into `--out-dir` and records a `<command>.manifest.json` there.
//! A manifest can be passed back as `--config` to repeat the run.
//!
//! Exit codes: 0 success, 1 runtime or physics failure, 2 usage or config
//! error.

pub mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

pub use config::{load_config, ConfigError, RandomSearchConfig, RunConfig, RunManifest};

use crate::error::Error;
use crate::evolve::{nsga2_run, random_search, write_front_csv, Objective};
use crate::gate::GateEvaluator;
use crate::lattice::{build_lattice, Genome};
use crate::mechanics::fire_relax;
use crate::spectrum::eigenfrequencies;

pub const WORKERS_ENV: &str = "GRANULAR_GATES_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "granular-gates", version, about = "Granular metamaterial logic gates")]
pub struct Cli {
    /// Evaluation threads [default: available parallelism]
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// JSON config or run manifest
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long, short, default_value = "output")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args, Clone)]
pub struct GenomeArgs {
    /// Stiff ('1') / soft ('0') string, bottom row first
    #[arg(long, short)]
    pub genome: Option<Genome>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Relax a packing with FIRE and report the final state
    Relax {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        genome: GenomeArgs,
    },
    /// Eigenfrequencies and band gap of a relaxed packing
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        genome: GenomeArgs,
    },
    /// Output amplitudes and gains for the four input cases
    TruthTable {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        genome: GenomeArgs,
        /// Drive frequency [default: the AND frequency]
        #[arg(long)]
        omega: Option<f64>,
        /// Also write the output time series
        #[arg(long)]
        series: bool,
    },
    /// Carry and sum amplitudes under two-tone drive
    HalfAdder {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        genome: GenomeArgs,
        #[arg(long)]
        series: bool,
    },
    /// AND-ness and XOR-ness of uniformly random genomes
    RandomSearch {
        #[command(flatten)]
        common: Common,
        #[arg(long, short)]
        samples: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// NSGA-II search for dual AND/XOR genomes
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        population: Option<usize>,
        #[arg(long)]
        generations: Option<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Relax { .. } => "relax",
            Command::Spectrum { .. } => "spectrum",
            Command::TruthTable { .. } => "truth-table",
            Command::HalfAdder { .. } => "half-adder",
            Command::RandomSearch { .. } => "random-search",
            Command::Evolve { .. } => "evolve",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Relax { common, .. }
            | Command::Spectrum { common, .. }
            | Command::TruthTable { common, .. }
            | Command::HalfAdder { common, .. }
            | Command::RandomSearch { common, .. }
            | Command::Evolve { common, .. } => common,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Model(Error::InvalidConfig(_)) => 2,
            CliError::Model(Error::GenomeLength { .. } | Error::GenomeChar(_)) => 2,
            CliError::Model(_) | CliError::Io { .. } => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Entry point for the binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Resolves flags over the config file, as recorded in the manifest.
pub fn resolve_config(command: &Command) -> CliResult<RunConfig> {
    let common = command.common();
    let mut config = match &common.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = Some(seed);
    }
    if config.seed.is_none() {
        config.seed = Some(rand::random());
    }
    match command {
        Command::Relax { genome, .. } | Command::Spectrum { genome, .. } | Command::HalfAdder { genome, .. } => {
            if let Some(g) = &genome.genome {
                config.genome = Some(g.clone());
            }
        }
        Command::TruthTable { genome, omega, .. } => {
            if let Some(g) = &genome.genome {
                config.genome = Some(g.clone());
            }
            if omega.is_some() {
                config.omega = *omega;
            }
        }
        Command::RandomSearch { samples, bins, .. } => {
            if let Some(n) = samples {
                config.random_search.samples = *n;
            }
            if let Some(b) = bins {
                config.random_search.bins = *b;
            }
        }
        Command::Evolve { population, generations, .. } => {
            if let Some(p) = population {
                config.evolution.population_size = *p;
            }
            if let Some(g) = generations {
                config.evolution.generations = *g;
            }
        }
    }
    config.evolution.seed = config.seed.expect("seed resolved");
    Ok(config)
}

fn worker_count(cli: &Cli) -> CliResult<usize> {
    match cli.workers {
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let workers = worker_count(cli)?;
    let config = resolve_config(&cli.command)?;
    let out_dir = cli.command.common().out_dir.clone();
    fs::create_dir_all(&out_dir).map_err(|source| CliError::Io {
        path: out_dir.clone(),
        source,
    })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))?;
    let started = now();
    info!("{} with {workers} worker(s), seed {}", cli.command.name(), config.seed.unwrap());
    let mut out = Outputs::new(&out_dir);
    pool.install(|| execute(&cli.command, &config, &mut out))?;
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        seed: config.seed.unwrap(),
        config,
        version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: now(),
        outputs: out.written.clone(),
    };
    out.json(&format!("{}.manifest.json", manifest.command), &manifest)?;
    Ok(())
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_owned(),
            written: Vec::new(),
        }
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> CliResult<()> {
        let path = self.dir.join(name);
        let io = |source| CliError::Io {
            path: path.clone(),
            source,
        };
        let mut w = BufWriter::new(File::create(&path).map_err(io)?);
        body(&mut w).and_then(|_| w.flush()).map_err(io)?;
        info!("wrote {}", path.display());
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }
}

#[derive(Serialize)]
struct RelaxReport<'a> {
    genome: &'a Genome,
    iterations: usize,
    max_force: f64,
    initial_energy: f64,
    final_energy: f64,
    positions: Vec<[f64; 2]>,
}

fn execute(command: &Command, config: &RunConfig, out: &mut Outputs) -> CliResult<()> {
    let evaluator = || {
        GateEvaluator::new(
            config.material.clone(),
            config.gate.clone(),
            config.sim.clone(),
            config.relax.clone(),
        )
    };
    match command {
        Command::Relax { .. } => {
            let genome = config.genome();
            let packing = build_lattice(&config.material)?.with_genome(&genome, &config.material)?;
            let (relaxed, report) = fire_relax(&packing, &config.relax)?;
            info!("relaxed in {} iterations, max force {:e}", report.iterations, report.max_force);
            out.json(
                "relax.json",
                &RelaxReport {
                    genome: &genome,
                    iterations: report.iterations,
                    max_force: report.max_force,
                    initial_energy: report.initial_energy,
                    final_energy: report.final_energy,
                    positions: relaxed.positions.iter().map(|p| [p.x, p.y]).collect(),
                },
            )
        }
        Command::Spectrum { .. } => {
            let genome = config.genome();
            let packing = build_lattice(&config.material)?.with_genome(&genome, &config.material)?;
            let (relaxed, _) = fire_relax(&packing, &config.relax)?;
            let spectrum = eigenfrequencies(&relaxed)?;
            out.json("spectrum.json", &spectrum)?;
            out.write("spectrum.csv", |w| spectrum.write_csv(w))
        }
        Command::TruthTable { series, .. } => {
            let ev = evaluator()?;
            let omega = config.omega.unwrap_or(config.gate.omega_and);
            let table = ev.truth_table(&config.genome(), omega, *series)?;
            out.json("truth_table.json", &table)?;
            if *series {
                out.write("truth_table_series.csv", |w| table.write_series_csv(w))?;
            }
            Ok(())
        }
        Command::HalfAdder { series, .. } => {
            let ev = evaluator()?;
            let result = ev.half_adder(&config.genome(), *series)?;
            out.json("half_adder.json", &result)?;
            if *series {
                out.write("half_adder_series.csv", |w| {
                    write!(w, "t")?;
                    for c in &result.cases {
                        write!(w, ",case_{}", c.case)?;
                    }
                    writeln!(w)?;
                    let n = result.cases.iter().map(|c| c.series.as_ref().map_or(0, Vec::len)).min().unwrap_or(0);
                    for k in 0..n {
                        write!(w, "{}", k as f64 * result.dt)?;
                        for c in &result.cases {
                            write!(w, ",{}", c.series.as_ref().unwrap()[k])?;
                        }
                        writeln!(w)?;
                    }
                    Ok(())
                })?;
            }
            Ok(())
        }
        Command::RandomSearch { .. } => {
            let ev = evaluator()?;
            let rs = &config.random_search;
            info!("evaluating {} random genomes", rs.samples);
            let result = random_search(rs.samples, ev.genome_len(), &ev, config.seed.unwrap())?;
            info!(
                "AND-ness mean {:.4} [{:.4}, {:.4}], XOR-ness mean {:.4} [{:.4}, {:.4}], {} failed",
                result.and_ness.mean,
                result.and_ness.min,
                result.and_ness.max,
                result.xor_ness.mean,
                result.xor_ness.min,
                result.xor_ness.max,
                result.failures
            );
            out.json("random_search.json", &result)?;
            out.write("random_samples.csv", |w| result.write_samples_csv(w))?;
            for (objective, name) in [(Objective::AndNess, "and_ness"), (Objective::XorNess, "xor_ness")] {
                let h = result.histogram(objective, rs.bins)?;
                out.write(&format!("histogram_{name}.csv"), |w| h.write_csv(w))?;
            }
            Ok(())
        }
        Command::Evolve { .. } => {
            let ev = evaluator()?;
            let path = out.dir.join("run_log.jsonl");
            let io = |source| CliError::Io {
                path: path.clone(),
                source,
            };
            let mut log = BufWriter::new(File::create(&path).map_err(io)?);
            let total = config.evolution.generations;
            let result = nsga2_run(&config.evolution, ev.genome_len(), &ev, |record| {
                let line = serde_json::to_string(record).expect("records serialize");
                writeln!(log, "{line}")
                    .and_then(|_| log.flush())
                    .map_err(|e| Error::InvalidConfig(format!("cannot write run log: {e}")))?;
                info!(
                    "generation {}/{total}: max AND-ness {:.4}, max XOR-ness {:.4}, front {}",
                    record.generation,
                    record.max_and_ness,
                    record.max_xor_ness,
                    record.front.len()
                );
                Ok(())
            });
            drop(log);
            out.written.push(path);
            let result = result?;
            out.write("pareto_front.csv", |w| write_front_csv(&result.front, w))
        }
    }
}
