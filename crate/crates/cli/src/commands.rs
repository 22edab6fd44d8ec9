use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;

use kplane::fields::{algebraic, by_name};
use kplane::inversion::{default_s_sequence, fmt17, invert_hoelder, invert_laplacian, invert_limit, GridSpec, InversionReport};
use kplane::radon::{sinogram, PlaneQuadrature};
use kplane::riesz::riesz;
use kplane::verify::run_all;

use crate::config::{Command, ConfigError, Route, RunConfig};

pub const OUT_DIR_VAR: &str = "KPLANE_OUT_DIR";

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Pipeline(kplane::Error),
    Io(io::Error),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Pipeline(e) => write!(f, "{} error: {e}", e.class()),
            RunError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<kplane::Error> for RunError {
    fn from(e: kplane::Error) -> Self {
        RunError::Pipeline(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e)
    }
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

/// Result of a successful run: whether every check passed, and the CSV written.
#[derive(Debug)]
pub struct Outcome {
    pub passed: bool,
    pub artifact: PathBuf,
}

fn usage(key: &str, message: impl Into<String>) -> RunError {
    RunError::Config(ConfigError {
        source: "config".into(),
        key: key.into(),
        message: message.into(),
    })
}

fn output_path(cfg: &RunConfig, stem: &str) -> io::Result<PathBuf> {
    if let Some(p) = &cfg.out {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        return Ok(p.clone());
    }
    let dir = PathBuf::from(std::env::var(OUT_DIR_VAR).unwrap_or_else(|_| ".".into()));
    fs::create_dir_all(&dir)?;
    let safe: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
        .collect();
    Ok(dir.join(format!("{safe}.csv")))
}

fn coord_header(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// Runs the command and writes the effective configuration next to the CSV
/// (`<artifact>.cfg`), which reproduces the run byte for byte.
pub fn run(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let outcome = match cfg.command {
        Command::Verify => verify(cfg),
        Command::Riesz => riesz_cmd(cfg),
        Command::Radon => radon(cfg),
        Command::Invert => invert(cfg),
        Command::Explore => explore(cfg),
    }?;
    let mut saved = cfg.clone();
    saved.out = Some(outcome.artifact.clone());
    let mut cfg_path = outcome.artifact.clone().into_os_string();
    cfg_path.push(".cfg");
    fs::write(cfg_path, saved.to_text())?;
    Ok(outcome)
}

fn verify(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let dim = match cfg.k {
        Some(_) => Some(cfg.dimension()?),
        None => None,
    };
    let outcomes = run_all(dim);
    let path = output_path(cfg, "verify")?;
    let mut w = BufWriter::new(fs::File::create(&path)?);
    writeln!(w, "criterion,title,anchor,check,measured,bound,passed")?;
    let mut all = true;
    for o in &outcomes {
        let tag = if o.passed() { "PASS" } else { "FAIL" };
        println!("{:>2} {tag} {} [{}]", o.id, o.title, o.anchor);
        for c in &o.checks {
            println!("        {} {c}", if c.passed() { "ok " } else { "BAD" });
            let bound = match c.bound {
                kplane::verify::Bound::Below(b) => format!("< {b:e}"),
                kplane::verify::Bound::Above(b) => format!("> {b}"),
                kplane::verify::Bound::Within(lo, hi) => format!("in [{lo}; {hi}]"),
            };
            writeln!(
                w,
                "{},{},{},\"{}\",{},{bound},{}",
                o.id,
                o.title,
                o.anchor.replace(',', ";"),
                c.name.replace('"', "'"),
                fmt17(c.measured),
                c.passed()
            )?;
        }
        if let Some(e) = &o.error {
            println!("        error: {e}");
            writeln!(w, "{},{},{},\"error: {}\",NaN,,false", o.id, o.title, o.anchor.replace(',', ";"), e.replace('"', "'"))?;
        }
        all &= o.passed();
    }
    w.flush()?;
    Ok(Outcome {
        passed: all,
        artifact: path,
    })
}

fn riesz_cmd(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let field = by_name(&cfg.field, cfg.n)?;
    let points = cfg.point_list()?;
    let (c, rule) = (cfg.continuation(), cfg.rule()?);
    c.validate()?;
    let values = points
        .par_iter()
        .map(|x| riesz(&field, cfg.alpha, x, &c, &rule))
        .collect::<kplane::Result<Vec<_>>>()?;
    let path = output_path(cfg, &format!("riesz_{}", cfg.field))?;
    let mut w = BufWriter::new(fs::File::create(&path)?);
    let mut header = coord_header(cfg.n);
    header.extend(["alpha_re", "alpha_im", "re", "im"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    for (x, v) in points.iter().zip(&values) {
        let mut row: Vec<String> = x.iter().map(|&c| fmt17(c)).collect();
        row.extend([cfg.alpha.re, cfg.alpha.im, v.re, v.im].map(fmt17));
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(Outcome {
        passed: true,
        artifact: path,
    })
}

fn radon(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let dim = cfg.dimension()?;
    if (dim.n(), dim.k()) != (2, 1) {
        return Err(usage("dim", "sinogram export covers lines in the plane (dim = 2,1)"));
    }
    let field = by_name(&cfg.field, 2)?;
    let (angles, offsets) = cfg.sinogram;
    let rows = sinogram(&field, angles, offsets, cfg.extent, &PlaneQuadrature::default())?;
    let path = output_path(cfg, &format!("radon_{}", cfg.field))?;
    let mut w = BufWriter::new(fs::File::create(&path)?);
    writeln!(w, "angle,offset0,offset1,value")?;
    for r in &rows {
        writeln!(w, "{},{},{},{}", fmt17(r.angle), fmt17(r.offset[0]), fmt17(r.offset[1]), fmt17(r.value))?;
    }
    w.flush()?;
    Ok(Outcome {
        passed: true,
        artifact: path,
    })
}

fn invert(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let dim = cfg.dimension()?;
    let field = by_name(&cfg.field, cfg.n)?;
    let points = cfg.point_list()?;
    let (c, rule) = (cfg.continuation(), cfg.rule()?);
    c.validate()?;
    let report: InversionReport = match cfg.route {
        Route::Hoelder => invert_hoelder(&field, dim, &points, &c, &rule)?,
        Route::Limit => {
            let s = cfg.s_sequence.clone().unwrap_or_else(|| default_s_sequence(dim.k()));
            invert_limit(&field, dim, &points, &s, &c, &rule)?
        }
        Route::Laplacian => {
            let grid = GridSpec::centered(&points[0], cfg.grid_half, cfg.grid_h)?;
            invert_laplacian(&field, dim, &grid, &c, &rule)?
        }
    };
    let path = output_path(cfg, &format!("invert_{}_{}", cfg.route.name(), cfg.field))?;
    let mut w = BufWriter::new(fs::File::create(&path)?);
    report.write_csv(&mut w)?;
    w.flush()?;
    println!("{} points, max abs error {:.3e}", report.len(), report.max_abs_error());
    Ok(Outcome {
        passed: true,
        artifact: path,
    })
}

/// Hölder-route inversion of algebraic fields whose decay straddles `k`,
/// the edge of the class the inversion is stated for.
fn explore(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let dim = cfg.dimension()?;
    let k = dim.k() as f64;
    let decays = cfg
        .decays
        .clone()
        .unwrap_or_else(|| vec![k - 0.5, k - 0.25, k, k + 0.25, k + 0.5, k + 1.0]);
    let points = cfg.point_list()?;
    let (c, rule) = (cfg.continuation(), cfg.rule()?);
    c.validate()?;
    let path = output_path(cfg, "explore_class_boundary")?;
    let mut w = BufWriter::new(fs::File::create(&path)?);
    let mut header = vec!["decay".to_string()];
    header.extend(coord_header(cfg.n));
    header.extend(["recovered", "reference", "abs_error", "status"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    for &p in &decays {
        let field = algebraic(cfg.n, p)?;
        let res = invert_hoelder(&field, dim, &points, &c, &rule);
        for (i, x) in points.iter().enumerate() {
            let mut row = vec![fmt17(p)];
            row.extend(x.iter().map(|&v| fmt17(v)));
            match &res {
                Ok(r) => {
                    row.extend([r.recovered[i], r.reference[i], r.abs_error[i]].map(fmt17));
                    row.push("ok".into());
                }
                Err(e) => {
                    row.extend(["NaN".to_string(), fmt17(field.eval(x)), "NaN".to_string()]);
                    row.push(e.class().into());
                }
            }
            writeln!(w, "{}", row.join(","))?;
        }
        match &res {
            Ok(r) => println!("decay {p}: max abs error {:.3e}", r.max_abs_error()),
            Err(e) => println!("decay {p}: {} ({e})", e.class()),
        }
    }
    w.flush()?;
    Ok(Outcome {
        passed: true,
        artifact: path,
    })
}
