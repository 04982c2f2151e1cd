use std::path::{Path, PathBuf};
use std::process::ExitCode;

use akpz_harness::config::{parse_config, Kind, RunConfig};
use akpz_harness::{experiments, report};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "akpz", version, about = "Simulation, hierarchy and closure experiments for the cut-off AKPZ equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an ensemble and check stationarity.
    Simulate(RunArgs),
    /// Estimate D(t) and its Laplace transform.
    Diffusivity(RunArgs),
    /// Estimate the height variance V(t).
    Variance(RunArgs),
    /// Solve the truncated resolvent hierarchy.
    Hierarchy(RunArgs),
    /// Evolve the mode-coupling closure and fit the exponent.
    Mct(RunArgs),
    /// Run the acceptance suite.
    Check(CheckArgs),
    /// Print the acceptance dashboard of a results directory.
    Report {
        /// Results directory written by `check`.
        dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config, or a manifest.json to replay.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CheckArgs {
    /// Optional TOML config with a [check] section.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Only run these criteria.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn prepare(mut cfg: RunConfig, c: &Common, kind: Kind) -> Result<(RunConfig, PathBuf), String> {
    if cfg.kind != kind {
        return Err(format!("config is for `{}`, not `{}`", cfg.kind.name(), kind.name()));
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if c.jobs.is_some() {
        cfg.jobs = c.jobs;
    }
    if c.out.is_some() {
        cfg.out = c.out.clone();
    }
    cfg.validate().map_err(|e| e.to_string())?;
    let out = cfg.out.clone().unwrap_or_else(|| Path::new("results").join(kind.name()));
    Ok((cfg, out))
}

fn execute(cfg: RunConfig, out: &Path) -> Result<bool, String> {
    eprint!("{}", cfg.echo());
    let m = experiments::run(&cfg, out).map_err(|e| e.to_string())?;
    for f in &m.outputs {
        println!("wrote {}", out.join(&f.name).display());
    }
    let mut ok = true;
    for t in &m.tolerances {
        println!("{} {} measured {:e} tolerance {:e}", if t.passed { "ok  " } else { "FAIL" }, t.name, t.measured, t.tolerance);
        ok &= t.passed;
    }
    if cfg.kind == Kind::Check {
        match report::load(out) {
            Ok(r) => print!("{}", report::render(&r)),
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Report { dir } => match report::load(&dir) {
            Ok(r) => {
                print!("{}", report::render(&r));
                let failing: Vec<String> = r.failing().iter().map(|c| format!("{} ({})", c.id, c.name)).collect();
                if failing.is_empty() {
                    Ok(true)
                } else {
                    Err(format!("failing criteria: {}", failing.join(", ")))
                }
            }
            Err(e) => Err(e.to_string()),
        },
        Command::Check(a) => {
            let cfg = match &a.config {
                Some(p) => parse_config(p).map_err(|e| e.to_string()),
                None => Ok(RunConfig::new(Kind::Check)),
            };
            cfg.and_then(|mut cfg| {
                if !a.only.is_empty() {
                    cfg.check.get_or_insert_with(Default::default).only = a.only.clone();
                }
                let (cfg, out) = prepare(cfg, &a.common, Kind::Check)?;
                execute(cfg, &out)
            })
        }
        Command::Simulate(a) => run(a, Kind::Simulate),
        Command::Diffusivity(a) => run(a, Kind::Diffusivity),
        Command::Variance(a) => run(a, Kind::Variance),
        Command::Hierarchy(a) => run(a, Kind::Hierarchy),
        Command::Mct(a) => run(a, Kind::Mct),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some tolerances failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(a: RunArgs, kind: Kind) -> Result<bool, String> {
    let cfg = parse_config(&a.config).map_err(|e| e.to_string())?;
    let (cfg, out) = prepare(cfg, &a.common, kind)?;
    execute(cfg, &out)
}
