//! Run configuration: flat `key = value` lines, one key per line, `#` comments.
//! Command-line flags are applied on top with the same keys.

use std::fmt;
use std::path::PathBuf;

use kplane::alphaline::ContinuationConfig;
use kplane::spherical::SphereRule;
use kplane::{Complex64, Dimension};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Verify,
    Riesz,
    Radon,
    Invert,
    Explore,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Riesz => "riesz",
            Command::Radon => "radon",
            Command::Invert => "invert",
            Command::Explore => "explore",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Hoelder,
    Limit,
    Laplacian,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Hoelder => "hoelder",
            Route::Limit => "limit",
            Route::Laplacian => "laplacian",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    /// Plane dimension; `None` for commands that do not involve planes.
    pub k: Option<usize>,
    pub field: String,
    pub alpha: Complex64,
    pub s_sequence: Option<Vec<f64>>,
    /// `origin`, `lattice3`, or `x,y;x,y;...`.
    pub points: String,
    pub grid_h: f64,
    pub grid_half: usize,
    pub route: Route,
    pub sinogram: (usize, usize),
    pub extent: f64,
    pub decays: Option<Vec<f64>>,
    pub rho: f64,
    pub taylor_order: Option<usize>,
    pub truncation: f64,
    pub tolerance: f64,
    pub rule_order: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let c = ContinuationConfig::default();
        Self {
            command: Command::Verify,
            n: 2,
            k: None,
            field: "gaussian".into(),
            alpha: Complex64::new(1.0, 0.0),
            s_sequence: None,
            points: "origin".into(),
            grid_h: 0.05,
            grid_half: 1,
            route: Route::Hoelder,
            sinogram: (64, 64),
            extent: 3.0,
            decays: None,
            rho: c.rho,
            taylor_order: c.taylor_order,
            truncation: c.truncation,
            tolerance: c.tolerance,
            rule_order: None,
            out: None,
            seed: 0,
        }
    }
}

/// A rejected key or value, with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}): {}", self.source, self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

pub const KEYS: [&str; 19] = [
    "command", "dim", "field", "alpha", "s", "points", "grid_h", "grid_half", "route", "sinogram", "extent",
    "decays", "rho", "taylor_order", "truncation", "tolerance", "rule_order", "out", "seed",
];

fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.trim().parse().map_err(|_| format!("cannot parse `{v}` as a number"))
}

fn list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(num).collect()
}

fn optional<T: std::str::FromStr>(v: &str) -> Result<Option<T>, String> {
    match v.trim() {
        "auto" | "" => Ok(None),
        s => num(s).map(Some),
    }
}

pub fn parse_complex(v: &str) -> Result<Complex64, String> {
    let s = v.trim().replace(' ', "");
    if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is not an exponent sign
        let bytes = body.as_bytes();
        let at = (1..bytes.len())
            .rev()
            .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
        return match at {
            Some(i) => Ok(Complex64::new(num(&body[..i])?, num(&body[i..])?)),
            None => Ok(Complex64::new(0.0, num(body)?)),
        };
    }
    Ok(Complex64::new(num(&s)?, 0.0))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Sets one key; `source` names the origin for diagnostics.
    pub fn apply(&mut self, key: &str, value: &str, source: &str) -> Result<(), ConfigError> {
        let key = key.trim().replace('-', "_");
        let v = value.trim();
        let res: Result<(), String> = (|| {
            match key.as_str() {
                "command" => {
                    self.command = match v {
                        "verify" => Command::Verify,
                        "riesz" => Command::Riesz,
                        "radon" => Command::Radon,
                        "invert" => Command::Invert,
                        "explore" => Command::Explore,
                        _ => return Err(format!("unknown command `{v}`")),
                    }
                }
                "dim" => {
                    let parts: Vec<&str> = v.split(',').collect();
                    match parts.as_slice() {
                        [n] => {
                            self.n = num(n)?;
                            self.k = None;
                        }
                        [n, k] => {
                            let (n, k) = (num(n)?, num(k)?);
                            Dimension::new(n, k).map_err(|e| e.to_string())?;
                            self.n = n;
                            self.k = Some(k);
                        }
                        _ => return Err("expected `n` or `n,k`".into()),
                    }
                    if self.n == 0 {
                        return Err("dimension must be positive".into());
                    }
                }
                "field" => {
                    kplane::fields::by_name(v, self.n.max(1)).map_err(|e| e.to_string())?;
                    self.field = v.to_string();
                }
                "alpha" => self.alpha = parse_complex(v)?,
                "s" => self.s_sequence = if v == "auto" { None } else { Some(list(v)?) },
                "points" => {
                    if !matches!(v, "origin" | "lattice3") {
                        for p in v.split(';') {
                            list(p)?;
                        }
                    }
                    self.points = v.to_string();
                }
                "grid_h" => self.grid_h = num(v)?,
                "grid_half" => self.grid_half = num(v)?,
                "route" => {
                    self.route = match v {
                        "hoelder" => Route::Hoelder,
                        "limit" => Route::Limit,
                        "laplacian" => Route::Laplacian,
                        _ => return Err(format!("unknown route `{v}` (hoelder, limit, laplacian)")),
                    }
                }
                "sinogram" => {
                    let (a, b) = v.split_once('x').ok_or("expected `ANGLESxOFFSETS`, e.g. 64x64")?;
                    self.sinogram = (num(a)?, num(b)?);
                }
                "extent" => self.extent = num(v)?,
                "decays" => self.decays = if v == "auto" { None } else { Some(list(v)?) },
                "rho" => self.rho = num(v)?,
                "taylor_order" => self.taylor_order = optional(v)?,
                "truncation" => self.truncation = num(v)?,
                "tolerance" => self.tolerance = num(v)?,
                "rule_order" => self.rule_order = optional(v)?,
                "out" => self.out = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
                "seed" => self.seed = num(v)?,
                _ => return Err(format!("unknown key (known: {})", KEYS.join(", "))),
            }
            Ok(())
        })();
        res.map_err(|message| ConfigError {
            source: source.to_string(),
            key,
            message,
        })
    }

    /// Applies the lines of a config file.
    pub fn apply_text(&mut self, text: &str, name: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let source = format!("{name}:{}", i + 1);
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError {
                source: source.clone(),
                key: line.to_string(),
                message: "expected `key = value`".into(),
            })?;
            self.apply(k, v, &source)?;
        }
        Ok(())
    }

    #[cfg(test)]
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        c.apply_text(text, "config")?;
        Ok(c)
    }

    /// The config as text; [`RunConfig::parse`] reads it back unchanged.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        put("command", self.command.name().into());
        put(
            "dim",
            match self.k {
                Some(k) => format!("{},{k}", self.n),
                None => self.n.to_string(),
            },
        );
        put("field", self.field.clone());
        put(
            "alpha",
            if self.alpha.im == 0.0 {
                format!("{:?}", self.alpha.re)
            } else {
                format!("{:?}{:+?}i", self.alpha.re, self.alpha.im)
            },
        );
        put("s", self.s_sequence.as_deref().map_or("auto".into(), fmt_list));
        put("points", self.points.clone());
        put("grid_h", format!("{:?}", self.grid_h));
        put("grid_half", self.grid_half.to_string());
        put("route", self.route.name().into());
        put("sinogram", format!("{}x{}", self.sinogram.0, self.sinogram.1));
        put("extent", format!("{:?}", self.extent));
        put("decays", self.decays.as_deref().map_or("auto".into(), fmt_list));
        put("rho", format!("{:?}", self.rho));
        put("taylor_order", self.taylor_order.map_or("auto".into(), |t| t.to_string()));
        put("truncation", format!("{:?}", self.truncation));
        put("tolerance", format!("{:?}", self.tolerance));
        put("rule_order", self.rule_order.map_or("auto".into(), |t| t.to_string()));
        put("out", self.out.as_ref().map_or(String::new(), |p| p.display().to_string()));
        put("seed", self.seed.to_string());
        out
    }

    pub fn continuation(&self) -> ContinuationConfig {
        ContinuationConfig {
            rho: self.rho,
            taylor_order: self.taylor_order,
            truncation: self.truncation,
            tolerance: self.tolerance,
            ..ContinuationConfig::default()
        }
    }

    pub fn rule(&self) -> kplane::Result<SphereRule> {
        match self.rule_order {
            Some(o) => SphereRule::new(self.n, o),
            None => Ok(SphereRule::default_for(self.n)),
        }
    }

    pub fn dimension(&self) -> Result<Dimension, ConfigError> {
        let k = self.k.ok_or_else(|| ConfigError {
            source: "config".into(),
            key: "dim".into(),
            message: format!("`{}` needs `n,k`", self.command.name()),
        })?;
        Dimension::new(self.n, k).map_err(|e| ConfigError {
            source: "config".into(),
            key: "dim".into(),
            message: e.to_string(),
        })
    }

    pub fn point_list(&self) -> Result<Vec<Vec<f64>>, ConfigError> {
        let err = |message: String| ConfigError {
            source: "config".into(),
            key: "points".into(),
            message,
        };
        let pts = match self.points.as_str() {
            "origin" => vec![vec![0.0; self.n]],
            "lattice3" => {
                let total = 3usize.pow(self.n as u32);
                (0..total)
                    .map(|mut i| {
                        let mut p = vec![0.0; self.n];
                        for d in (0..self.n).rev() {
                            p[d] = -1.0 + (i % 3) as f64;
                            i /= 3;
                        }
                        p
                    })
                    .collect()
            }
            s => s.split(';').map(list).collect::<Result<Vec<_>, _>>().map_err(err)?,
        };
        if let Some(p) = pts.iter().find(|p| p.len() != self.n) {
            return Err(err(format!("point {p:?} is not in R^{}", self.n)));
        }
        Ok(pts)
    }
}
