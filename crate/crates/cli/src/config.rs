use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::Args;
use imhyp_core::lattice_spectrum::{BoundaryCondition, PeriodicScaling};
use imhyp_core::reaction_field::Param;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Every run parameter. A JSON config file supplies any subset of these keys;
/// command-line flags of the same name (with `-` for `_`) override it.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Box dimension (1, 2 or 3).
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Side lengths, comma separated (default pi on every axis).
    #[arg(long, global = true, allow_negative_numbers = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sides: Option<Vec<f64>>,
    /// dirichlet, neumann or periodic.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bc: Option<String>,
    /// Periodic frequency convention: unit (l/a) or standard (2l/a).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodic_scaling: Option<String>,
    /// Laplacian eigenvalue cutoff.
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    /// Largest number of lattice points an enumeration may visit.
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    /// Seed for sampled checks.
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, allow_negative_numbers = true, env = "IMHYP_THREADS")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// CSV side output for commands that produce tables.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Include wall-clock time in the report (breaks byte reproducibility).
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub timing: bool,

    /// Jump condition exponent in [0, 1).
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Lipschitz constant of the nonlinearity.
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lip: Option<f64>,
    /// Constant in front of the jump threshold.
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cconst: Option<f64>,
    /// Diffusion coefficient.
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// Upper end of the three-square audit.
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<u64>,

    /// Reaction field: cubic-scalar, prop34, prop35 or a JSON file.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    /// Point `x,y` for the delta command.
    #[arg(long, global = true, allow_negative_numbers = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    /// Search rectangle `xmin,ymin,xmax,ymax`.
    #[arg(long, global = true, allow_negative_numbers = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<Vec<f64>>,
    /// Tolerance of the command (matching, dedup or root finding).
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Height of the invariant rectangle, e.g. `sqrt(6)` or `2.4`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,

    /// Scalar reaction slopes, one equilibrium each (overrides --field).
    #[arg(long, global = true, allow_negative_numbers = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slopes: Option<Vec<f64>>,
    /// Per-equilibrium flag: the unstable subspace is known to be in E_-.
    #[arg(long, global = true, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_minus: Option<Vec<bool>>,
    /// Real parts within this of 0 count as non-hyperbolic.
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_tol: Option<f64>,
    /// Narrowest gap accepted as a certificate interval.
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_min: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope1: Option<f64>,
    /// Upper bound on consecutive eigenvalue gaps.
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_bound: Option<f64>,

    /// Multiplier: cos-x1 or a JSON file.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<String>,
    /// Window half-width.
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Smallest gap width scanned.
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
}

pub const KNOWN_KEYS: &[&str] = &[
    "dim",
    "sides",
    "bc",
    "periodic_scaling",
    "cutoff",
    "budget",
    "seed",
    "threads",
    "output",
    "csv",
    "timing",
    "theta",
    "lip",
    "cconst",
    "nu",
    "limit",
    "field",
    "point",
    "region",
    "tol",
    "c",
    "slopes",
    "e_minus",
    "zero_tol",
    "gap_min",
    "slope0",
    "slope1",
    "gap_bound",
    "multiplier",
    "k",
    "rho",
    "lambda_max",
];

/// One problem with a configuration, tied to the key that causes it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub key: String,
    pub message: String,
}

impl Diagnostic {
    fn new(key: &str, message: impl Into<String>) -> Self {
        Self {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

fn suggestion(key: &str) -> Option<&'static str> {
    KNOWN_KEYS
        .iter()
        .map(|k| (strsim::jaro_winkler(key, k), *k))
        .filter(|(score, _)| *score >= 0.75)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, k)| k)
}

/// Diagnostics for a raw JSON configuration; empty iff it can be run.
pub fn validate(value: &Value) -> Vec<Diagnostic> {
    let Some(obj) = value.as_object() else {
        return vec![Diagnostic::new("config", "configuration must be a JSON object")];
    };
    let mut out = Vec::new();
    let mut known = Map::new();
    for (key, v) in obj {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            let message = match suggestion(key) {
                Some(s) => format!("unknown key `{key}` (did you mean `{s}`?)"),
                None => format!("unknown key `{key}`"),
            };
            out.push(Diagnostic::new(key, message));
            continue;
        }
        // One key at a time, so type errors name their key.
        let single = Value::Object(Map::from_iter([(key.clone(), v.clone())]));
        match serde_json::from_value::<RunConfig>(single) {
            Ok(_) => {
                known.insert(key.clone(), v.clone());
            }
            Err(e) => out.push(Diagnostic::new(key, format!("invalid value: {e}"))),
        }
    }
    if let Ok(cfg) = serde_json::from_value::<RunConfig>(Value::Object(known)) {
        out.extend(cfg.diagnostics());
    }
    out
}

impl RunConfig {
    /// Range and consistency checks on already well-typed values.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut positive = |key: &str, v: Option<f64>| {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    out.push(Diagnostic::new(key, format!("{key} must be positive")));
                }
            }
        };
        positive("cutoff", self.cutoff);
        positive("lip", self.lip);
        positive("cconst", self.cconst);
        positive("nu", self.nu);
        positive("tol", self.tol);
        positive("zero_tol", self.zero_tol);
        positive("gap_min", self.gap_min);
        positive("gap_bound", self.gap_bound);
        positive("k", self.k);
        positive("rho", self.rho);

        if let Some(t) = self.theta {
            if !(0.0..1.0).contains(&t) {
                out.push(Diagnostic::new("theta", "theta must lie in [0, 1)"));
            }
        }
        if let Some(l) = self.lambda_max {
            if !(l >= 0.0 && l.is_finite()) {
                out.push(Diagnostic::new("lambda_max", "lambda_max must be non-negative"));
            }
        }
        for (key, v) in [("budget", self.budget), ("limit", self.limit)] {
            if v == Some(0) {
                out.push(Diagnostic::new(key, format!("{key} must be positive")));
            }
        }
        if self.threads == Some(0) {
            out.push(Diagnostic::new("threads", "threads must be positive"));
        }
        if let Some(d) = self.dim {
            if !(1..=3).contains(&d) {
                out.push(Diagnostic::new("dim", "dim must be 1, 2 or 3"));
            }
        }
        if let Some(s) = &self.sides {
            if s.is_empty() || s.len() > 3 {
                out.push(Diagnostic::new("sides", "sides needs 1 to 3 entries"));
            }
            if s.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                out.push(Diagnostic::new("sides", "sides must be positive"));
            }
            if let Some(d) = self.dim {
                if d != s.len() {
                    out.push(Diagnostic::new("sides", format!("{} sides given for dim {d}", s.len())));
                }
            }
        }
        if let Some(bc) = &self.bc {
            if let Err(e) = bc.parse::<BoundaryCondition>() {
                out.push(Diagnostic::new("bc", e));
            }
        }
        if let Some(p) = &self.periodic_scaling {
            if let Err(e) = p.parse::<PeriodicScaling>() {
                out.push(Diagnostic::new("periodic_scaling", e));
            }
        }
        if let Some(p) = &self.point {
            if p.len() != 2 || p.iter().any(|x| !x.is_finite()) {
                out.push(Diagnostic::new("point", "point needs two finite coordinates x,y"));
            }
        }
        if let Some(r) = &self.region {
            if r.len() != 4 || !(r[0] < r[2] && r[1] < r[3]) {
                out.push(Diagnostic::new(
                    "region",
                    "region needs xmin,ymin,xmax,ymax with min < max",
                ));
            }
        }
        if let Some(c) = &self.c {
            if let Err(e) = c.parse::<Param>() {
                out.push(Diagnostic::new("c", e.to_string()));
            }
        }
        if let Some(s) = &self.slopes {
            if s.is_empty() || s.iter().any(|x| !x.is_finite()) {
                out.push(Diagnostic::new(
                    "slopes",
                    "slopes must be a nonempty list of finite numbers",
                ));
            }
        }
        out
    }

    /// `self` with every key set in `overrides` replaced.
    pub fn overlay(&self, overrides: &RunConfig) -> RunConfig {
        let mut base = serde_json::to_value(self).expect("config serializes");
        let top = serde_json::to_value(overrides).expect("config serializes");
        if let (Value::Object(b), Value::Object(t)) = (&mut base, top) {
            b.extend(t);
        }
        serde_json::from_value(base).expect("overlay of two valid configs is valid")
    }

    /// Loads a config file and applies command-line overrides.
    pub fn load(file: Option<&Path>, overrides: &RunConfig) -> Result<RunConfig, Vec<Diagnostic>> {
        let base = match file {
            None => RunConfig::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    vec![Diagnostic::new(
                        "config",
                        format!("cannot read {}: {e}", path.display()),
                    )]
                })?;
                let value: Value = serde_json::from_str(&text).map_err(|e| {
                    vec![Diagnostic::new(
                        "config",
                        format!("{} is not valid JSON: {e}", path.display()),
                    )]
                })?;
                let diags = validate(&value);
                if !diags.is_empty() {
                    return Err(diags);
                }
                serde_json::from_value(value).map_err(|e| vec![Diagnostic::new("config", e.to_string())])?
            }
        };
        let merged = base.overlay(overrides);
        let diags = merged.diagnostics();
        if diags.is_empty() {
            Ok(merged)
        } else {
            Err(diags)
        }
    }

    /// Keys that are set, for reporting which settings a command ignores.
    pub fn set_keys(&self) -> BTreeSet<String> {
        match serde_json::to_value(self) {
            Ok(Value::Object(m)) => m.keys().cloned().collect(),
            _ => BTreeSet::new(),
        }
    }
}
