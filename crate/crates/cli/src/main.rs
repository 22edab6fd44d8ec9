//! `kplane`: experiment runner and verification harness.
//!
//! Exit codes: 0 pass, 1 check or pipeline failure, 2 usage or config error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{run, RunError};
use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "kplane", version, about = "k-plane transforms, Riesz potentials and inversion")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the acceptance checks and print a table; nonzero exit on any failure.
    Verify(Opts),
    /// Riesz potential of a catalog field at points.
    Riesz(Opts),
    /// Line-integral sinogram of a planar field.
    Radon(Opts),
    /// Recover a field from its transform (`--route hoelder|limit|laplacian`).
    Invert(Opts),
    /// Hölder-route inversion across decay exponents around k.
    Explore(Opts),
}

/// Every flag is also a config-file key (with `_` for `-`); flags win.
#[derive(Args, Default)]
struct Opts {
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `n` or `n,k`.
    #[arg(long)]
    dim: Option<String>,
    /// Catalog name: gaussian, cap[:eps], logmod, algebraic:p.
    #[arg(long)]
    field: Option<String>,
    /// Order, real or `a+bi`.
    #[arg(long)]
    alpha: Option<String>,
    /// Comma-separated orders approaching -k from above (limit route).
    #[arg(long)]
    s: Option<String>,
    /// `origin`, `lattice3`, or `x,y;x,y;...`.
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    grid_h: Option<String>,
    #[arg(long)]
    grid_half: Option<String>,
    #[arg(long)]
    route: Option<String>,
    /// `ANGLESxOFFSETS`.
    #[arg(long)]
    sinogram: Option<String>,
    /// Largest sinogram offset.
    #[arg(long)]
    extent: Option<String>,
    /// Comma-separated decay exponents (explore).
    #[arg(long)]
    decays: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    taylor_order: Option<String>,
    #[arg(long)]
    truncation: Option<String>,
    #[arg(long)]
    tolerance: Option<String>,
    #[arg(long)]
    rule_order: Option<String>,
    /// Output CSV; defaults to a file in $KPLANE_OUT_DIR (or the current directory).
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl Opts {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let all = [
            ("dim", &self.dim),
            ("field", &self.field),
            ("alpha", &self.alpha),
            ("s", &self.s),
            ("points", &self.points),
            ("grid_h", &self.grid_h),
            ("grid_half", &self.grid_half),
            ("route", &self.route),
            ("sinogram", &self.sinogram),
            ("extent", &self.extent),
            ("decays", &self.decays),
            ("rho", &self.rho),
            ("taylor_order", &self.taylor_order),
            ("truncation", &self.truncation),
            ("tolerance", &self.tolerance),
            ("rule_order", &self.rule_order),
            ("out", &self.out),
            ("seed", &self.seed),
        ];
        all.into_iter().filter_map(|(k, v)| v.as_deref().map(|v| (k, v))).collect()
    }
}

fn build(command: &str, opts: &Opts) -> Result<RunConfig, RunError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source: path.display().to_string(),
            key: "config".into(),
            message: e.to_string(),
        })?;
        cfg.apply_text(&text, &path.display().to_string())?;
    }
    // dim first, so that field names are checked in the right dimension
    let mut pairs = opts.pairs();
    pairs.sort_by_key(|(k, _)| *k != "dim");
    for (k, v) in pairs {
        cfg.apply(k, v, &format!("--{}", k.replace('_', "-")))?;
    }
    cfg.apply("command", command, "subcommand")?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, opts) = match &cli.command {
        Cmd::Verify(o) => ("verify", o),
        Cmd::Riesz(o) => ("riesz", o),
        Cmd::Radon(o) => ("radon", o),
        Cmd::Invert(o) => ("invert", o),
        Cmd::Explore(o) => ("explore", o),
    };
    let result = build(name, opts).and_then(|cfg| run(&cfg));
    match result {
        Ok(outcome) => {
            println!("wrote {}", outcome.artifact.display());
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("some checks failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
