use clap::{Args, Parser, Subcommand};
use minmax_hierarchy_cli::catalog;
use minmax_hierarchy_cli::config::{DomainKind, S3Check, Start};
use minmax_hierarchy_cli::{run_groups, summary, ConfigError, ExperimentConfig, Kind, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

/// Min-max hierarchy experiments.
#[derive(Parser)]
#[command(name = "minmax", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment group, or every group.
    Run {
        /// eigen, s3, flow, dist or all; defaults to the config's `experiment`.
        kind: Option<String>,
        #[command(flatten)]
        flags: Flags,
    },
    /// Eigenvalue hierarchy widths.
    Eigen(Flags),
    /// Widths, envelope, indices and degrees on S³.
    S3(Flags),
    /// Flows, σ-width continuation and variation checks.
    Flow(Flags),
    /// Varifold, F-distance and flat-norm checks.
    Dist(Flags),
    /// List the experiment groups.
    List,
    /// Describe one experiment group.
    Describe { name: String },
}

#[derive(Args, Default)]
struct Flags {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Main grid: eigen nodes per side, the s3 index grid, the flow grid or the dist flat-norm grid; `all` sets the s3 and flow grids.
    #[arg(long)]
    grid: Option<usize>,
    /// Comma-separated σ schedule.
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    /// Primary tolerance of the selected groups.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    levels: Option<usize>,
    /// circle, torus or icosphere.
    #[arg(long)]
    domain: Option<String>,
    /// Domain size: nodes per side, or icosphere subdivisions.
    #[arg(long)]
    n: Option<usize>,
    /// S³ subset: widths, envelope, index, degrees or all.
    #[arg(long)]
    check: Option<String>,
    /// Flow start: clifford, geodesic or both.
    #[arg(long)]
    start: Option<String>,
}

fn invalid(field: &str, message: String) -> ConfigError {
    ConfigError::Invalid { field: field.into(), message }
}

fn configure(kind: Option<Kind>, flags: Flags) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &flags.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(k) = kind {
        cfg.experiment = k;
    }
    let domain = match flags.domain.as_deref() {
        None => None,
        Some("circle") => Some(DomainKind::Circle),
        Some("torus") => Some(DomainKind::Torus),
        Some("icosphere") => Some(DomainKind::Icosphere),
        Some(d) => return Err(invalid("--domain", format!("unknown domain `{d}`"))),
    };
    let check = match flags.check.as_deref() {
        None => None,
        Some(c) => Some(S3Check::parse(c).ok_or_else(|| invalid("--check", format!("unknown check `{c}`")))?),
    };
    let start = match flags.start.as_deref() {
        None => None,
        Some(s) => Some(Start::parse(s).ok_or_else(|| invalid("--start", format!("unknown start `{s}`")))?),
    };
    let mut o = Overrides { out: flags.out, seed: flags.seed, sigma: flags.sigma, tol: flags.tol, levels: flags.levels, domain, n: flags.n, check, start, grid: None };
    if cfg.experiment == Kind::Eigen && o.n.is_none() {
        o.n = flags.grid;
    } else {
        o.grid = flags.grid;
    }
    cfg.apply(&o)?;
    Ok(cfg)
}

fn execute(cfg: &ExperimentConfig) -> ExitCode {
    let outcome = run_groups(cfg);
    match outcome.write(&cfg.out, cfg.seed) {
        Ok(report) => {
            print!("{}", summary(&report));
            println!("wrote {}", cfg.out.join("report.json").display());
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: cannot write to {}: {e}", cfg.out.display());
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = match cli.command {
        Command::List => {
            print!("{}", catalog::list());
            return ExitCode::SUCCESS;
        }
        Command::Describe { name } => {
            return match catalog::describe(&name) {
                Some(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                None => {
                    eprintln!("error: unknown experiment `{name}`; try `minmax list`");
                    ExitCode::from(2)
                }
            };
        }
        Command::Run { kind, flags } => match kind.as_deref().map(|k| (k, Kind::parse(k))) {
            None => (None, flags),
            Some((_, Some(k))) => (Some(k), flags),
            Some((k, None)) => {
                eprintln!("error: unknown experiment `{k}`; try `minmax list`");
                return ExitCode::from(2);
            }
        },
        Command::Eigen(f) => (Some(Kind::Eigen), f),
        Command::S3(f) => (Some(Kind::S3), f),
        Command::Flow(f) => (Some(Kind::Flow), f),
        Command::Dist(f) => (Some(Kind::Dist), f),
    };
    match configure(kind, flags) {
        Ok(cfg) => execute(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
