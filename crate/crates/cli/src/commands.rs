use std::f64::consts::PI;
use std::path::Path;

use clap::Subcommand;
use imhyp_core::lattice_spectrum::{
    enumerate_spectrum_with_budget, gap_stats, jump_condition_scan, three_square_gap_audit, weyl_fit,
    BoundaryCondition, BoxDomain, JumpQuery, PeriodicScaling, Spectrum, DEFAULT_LATTICE_BUDGET,
};
use imhyp_core::reaction_field::{
    delta_of, dissipativity_radius, fixed_points, invariant_region_check, lemma33_check, prop34_field, prop35_field,
    solve_prop34, verify_prop35, write_delta_csv, Param, PlanarField, Region, DEFAULT_DEDUP_TOL, DEFAULT_LEMMA33_TOL,
};
use imhyp_core::spatial_averaging::{sap_scan, write_sap_csv, Multiplier};
use imhyp_core::stationary_spectrum::{
    anhim_common_gamma_with, count_profile, lemma41_threshold, nhim_common_dims, parity_report, unstable_index,
    CertificateResult, Linearization, DEFAULT_GAP_MIN, DEFAULT_ZERO_TOL,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Diagnostic, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Laplacian eigenvalues with multiplicities and gap statistics.
    Spectrum,
    /// Largest gap, histogram and running supremum.
    Gaps,
    /// Best ratio of the spectral jump condition.
    Jump,
    /// Integers up to --limit that are not sums of three squares.
    GaussAudit,
    /// Fitted growth exponent of the counting function.
    Weyl,
    /// All fixed points of a planar field in a region.
    FixedPoints,
    /// Jacobian, eigenvalues and delta at one fixed point.
    Delta,
    /// Search for four fixed points with delta = 0, 1, 2, 3.
    Lemma33,
    /// Solve for the coupled cubic constant a* and run its checklist.
    Prop34,
    /// Check the closed-form delta table of the uncoupled cubic field.
    Prop35Verify,
    /// Absorbing-ball radius and sampled sign check.
    Dissipativity,
    /// Invariance of the rectangle [0,1] x [0,c].
    Region,
    /// Unstable index at each equilibrium.
    Index,
    /// Parity of unstable-index differences.
    Parity,
    /// Mode-count step functions.
    Profile,
    /// Manifold dimensions realizable at every equilibrium.
    NhimDims,
    /// Common spectral cut across equilibria.
    Anhim,
    /// Diffusion threshold below which no manifold exists.
    Lemma41,
    /// Windowed multiplication norms over spectral gaps.
    SapScan,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Gaps => "gaps",
            Command::Jump => "jump",
            Command::GaussAudit => "gauss-audit",
            Command::Weyl => "weyl",
            Command::FixedPoints => "fixed-points",
            Command::Delta => "delta",
            Command::Lemma33 => "lemma33",
            Command::Prop34 => "prop34",
            Command::Prop35Verify => "prop35-verify",
            Command::Dissipativity => "dissipativity",
            Command::Region => "region",
            Command::Index => "index",
            Command::Parity => "parity",
            Command::Profile => "profile",
            Command::NhimDims => "nhim-dims",
            Command::Anhim => "anhim",
            Command::Lemma41 => "lemma41",
            Command::SapScan => "sap-scan",
        }
    }
}

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub result: Value,
    pub verdict: String,
    /// False when a checked hypothesis fails; the report is still written.
    pub hypothesis_met: bool,
    pub csv: Option<Vec<u8>>,
}

impl Outcome {
    fn new(result: impl Serialize, verdict: impl Into<String>) -> Result<Self, CliError> {
        Ok(Self {
            result: serde_json::to_value(result)?,
            verdict: verdict.into(),
            hypothesis_met: true,
            csv: None,
        })
    }

    fn hypothesis(mut self, met: bool) -> Self {
        self.hypothesis_met = met;
        self
    }

    fn with_csv(mut self, bytes: Vec<u8>) -> Self {
        self.csv = Some(bytes);
        self
    }
}

fn config_error(key: &str, message: impl Into<String>) -> CliError {
    CliError::Config(vec![Diagnostic {
        key: key.into(),
        message: message.into(),
    }])
}

fn domain(cfg: &RunConfig) -> Result<BoxDomain, CliError> {
    let bc: BoundaryCondition = cfg
        .bc
        .as_deref()
        .unwrap_or("neumann")
        .parse()
        .map_err(|e: String| config_error("bc", e))?;
    let scaling: PeriodicScaling = cfg
        .periodic_scaling
        .as_deref()
        .unwrap_or("unit")
        .parse()
        .map_err(|e: String| config_error("periodic_scaling", e))?;
    let sides = match (&cfg.sides, cfg.dim) {
        (Some(s), _) => s.clone(),
        (None, d) => vec![PI; d.unwrap_or(3)],
    };
    Ok(BoxDomain::new(sides, bc)?.with_periodic_scaling(scaling))
}

fn cutoff(cfg: &RunConfig, default: f64) -> f64 {
    cfg.cutoff.unwrap_or(default)
}

fn spectrum(cfg: &RunConfig, default_cutoff: f64) -> Result<(BoxDomain, Spectrum), CliError> {
    let d = domain(cfg)?;
    let s = enumerate_spectrum_with_budget(
        &d,
        cutoff(cfg, default_cutoff),
        cfg.budget.unwrap_or(DEFAULT_LATTICE_BUDGET),
    )?;
    Ok((d, s))
}

fn region(cfg: &RunConfig) -> Result<Region, CliError> {
    Ok(match &cfg.region {
        Some(r) => Region::new([r[0], r[1]], [r[2], r[3]])?,
        None => Region::square(4.0)?,
    })
}

/// Resolves `--field` for the planar commands.
fn planar_field(cfg: &RunConfig, default: &str) -> Result<PlanarField, CliError> {
    let name = cfg.field.as_deref().unwrap_or(default);
    match name {
        "prop35" => Ok(prop35_field()),
        "prop34" => Ok(prop34_field(solve_prop34(1e-12)?.a_star)?),
        "cubic-scalar" => Err(config_error(
            "field",
            "cubic-scalar is a scalar reaction; this command needs a planar field",
        )),
        path => read_json_file("field", path, PlanarField::from_json),
    }
}

fn read_json_file<T>(key: &str, path: &str, parse: impl Fn(&str) -> imhyp_core::Result<T>) -> Result<T, CliError> {
    let text = std::fs::read_to_string(Path::new(path))
        .map_err(|e| config_error(key, format!("`{path}` is not a preset and cannot be read: {e}")))?;
    parse(&text).map_err(|e| config_error(key, format!("{path}: {e}")))
}

/// Equilibria for the stationary-spectrum commands.
fn linearizations(cfg: &RunConfig) -> Result<Vec<Linearization>, CliError> {
    let d = domain(cfg)?;
    let nu = cfg.nu.unwrap_or(1.0);
    let mut lins = if let Some(slopes) = &cfg.slopes {
        slopes
            .iter()
            .enumerate()
            .map(|(i, &s)| Linearization::scalar(d.clone(), nu, s, format!("s{i}")))
            .collect::<imhyp_core::Result<Vec<_>>>()?
    } else if cfg.field.as_deref().unwrap_or("cubic-scalar") == "cubic-scalar" {
        // f(u) = u - u^3 at u = 0, 1, -1
        [(1.0, "u=0"), (-2.0, "u=1"), (-2.0, "u=-1")]
            .into_iter()
            .map(|(s, l)| Linearization::scalar(d.clone(), nu, s, l))
            .collect::<imhyp_core::Result<Vec<_>>>()?
    } else {
        let field = planar_field(cfg, "prop35")?;
        let named = field.named_fixed_points();
        let points: Vec<(String, [f64; 2])> = if named.is_empty() {
            fixed_points(&field, &region(cfg)?, DEFAULT_DEDUP_TOL)?
                .into_iter()
                .enumerate()
                .map(|(i, p)| (p.label.unwrap_or_else(|| format!("q{i}")), p.point))
                .collect()
        } else {
            named.into_iter().map(|p| (p.label, p.point)).collect()
        };
        points
            .into_iter()
            .map(|(label, p)| Linearization::planar(d.clone(), nu, field.jacobian(p), label))
            .collect::<imhyp_core::Result<Vec<_>>>()?
    };
    if let Some(flags) = &cfg.e_minus {
        if flags.len() != lins.len() {
            return Err(config_error(
                "e_minus",
                format!("{} flags given for {} equilibria", flags.len(), lins.len()),
            ));
        }
        lins = lins.into_iter().zip(flags).map(|(l, &f)| l.with_e_minus(f)).collect();
    }
    Ok(lins)
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> imhyp_core::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Spectrum => {
            let (d, s) = spectrum(cfg, 100.0)?;
            let gaps = if s.len() >= 2 { Some(gap_stats(&s)?) } else { None };
            let verdict = format!(
                "{} distinct eigenvalues ({} with multiplicity) up to {}",
                s.len(),
                s.total_multiplicity(),
                s.cutoff()
            );
            let table = csv_bytes(|b| s.write_csv(b))?;
            Outcome::new(
                json!({"domain": d, "cutoff": s.cutoff(), "distinct": s.len(),
                       "total_multiplicity": s.total_multiplicity(), "gaps": gaps}),
                verdict,
            )
            .map(|o| o.with_csv(table))
        }
        Command::Gaps => {
            let (_, s) = spectrum(cfg, 1000.0)?;
            let g = gap_stats(&s)?;
            let verdict = format!("max gap {} at ({}, {})", g.max_gap, g.witness.0, g.witness.1);
            Outcome::new(g, verdict)
        }
        Command::Jump => {
            let (_, s) = spectrum(cfg, 1000.0)?;
            let q = JumpQuery::new(
                cfg.theta.unwrap_or(0.0),
                cfg.lip.unwrap_or(1.0),
                cfg.cconst.unwrap_or(1.0),
                cfg.nu.unwrap_or(1.0),
            )?;
            let r = jump_condition_scan(&s, &q)?;
            let verdict = format!(
                "best ratio {} {} threshold {}",
                r.best_ratio,
                if r.satisfied { "exceeds" } else { "does not exceed" },
                r.threshold
            );
            Outcome::new(json!({"query": q, "report": r}), verdict)
        }
        Command::GaussAudit => {
            let a = three_square_gap_audit(cfg.limit.unwrap_or(1_000_000))?;
            let verdict = format!("max gap {} at {:?} up to {}", a.max_gap, a.max_gap_witness, a.limit);
            let table = csv_bytes(|b| {
                let mut w = csv::Writer::from_writer(b);
                w.write_record(["excluded"])?;
                for n in &a.excluded {
                    w.write_record([n.to_string()])?;
                }
                w.flush()?;
                Ok(())
            })?;
            // the excluded list goes to the CSV; the report keeps its size
            Outcome::new(
                json!({"limit": a.limit, "excluded_count": a.excluded.len(), "max_gap": a.max_gap,
                       "max_gap_witness": a.max_gap_witness, "max_excluded_run": a.max_excluded_run}),
                verdict,
            )
            .map(|o| o.with_csv(table))
        }
        Command::Weyl => {
            let (d, s) = spectrum(cfg, 1e4)?;
            let fit = weyl_fit(&s, d.dim())?;
            let verdict = format!("exponent {} (expected {})", fit.exponent, fit.expected);
            Outcome::new(fit, verdict)
        }
        Command::FixedPoints => {
            let field = planar_field(cfg, "prop35")?;
            let pts = fixed_points(&field, &region(cfg)?, cfg.tol.unwrap_or(DEFAULT_DEDUP_TOL))?;
            let table = csv_bytes(|b| write_delta_csv(&pts, b))?;
            let verdict = format!("{} fixed points", pts.len());
            Outcome::new(json!({"field": field, "fixed_points": pts}), verdict).map(|o| o.with_csv(table))
        }
        Command::Delta => {
            let field = planar_field(cfg, "prop35")?;
            let p = cfg
                .point
                .as_ref()
                .ok_or_else(|| config_error("point", "delta needs --point x,y"))?;
            let a = delta_of(&field, [p[0], p[1]])?;
            let verdict = format!("delta = {}", a.delta);
            Outcome::new(a, verdict)
        }
        Command::Lemma33 => {
            let field = planar_field(cfg, "prop35")?;
            let r = lemma33_check(&field, &region(cfg)?, cfg.tol.unwrap_or(DEFAULT_LEMMA33_TOL))?;
            let verdict = r.conclusion.clone();
            let met = r.verdict;
            Outcome::new(r, verdict).map(|o| o.hypothesis(met))
        }
        Command::Prop34 => {
            let c = solve_prop34(cfg.tol.unwrap_or(1e-10))?;
            let met = c.checklist.all_pass();
            let verdict = format!(
                "a* = {} with |phi(a*) - 2| = {:e}; checklist {}",
                c.a_star,
                c.phi_residual,
                if met { "all true" } else { "has failures" }
            );
            Outcome::new(c, verdict).map(|o| o.hypothesis(met))
        }
        Command::Prop35Verify => {
            let field = planar_field(cfg, "prop35")?;
            let r = verify_prop35(&field)?;
            let met = r.verdict;
            let verdict = if met {
                "delta(p_i) = i at all four points"
            } else {
                "delta table does not match"
            };
            Outcome::new(r, verdict).map(|o| o.hypothesis(met))
        }
        Command::Dissipativity => {
            let field = planar_field(cfg, "prop35")?;
            let r = dissipativity_radius(&field, cfg.seed.unwrap_or(0))?;
            let verdict = format!(
                "r0^2 = {}, sampled sign check {}",
                r.r0_sq,
                if r.verified { "passed" } else { "failed" }
            );
            let met = r.verified;
            Outcome::new(r, verdict).map(|o| o.hypothesis(met))
        }
        Command::Region => {
            let field = planar_field(cfg, "prop34")?;
            let c: Param = cfg.c.as_deref().unwrap_or("sqrt(6)").parse()?;
            let r = invariant_region_check(&field, &c)?;
            let verdict = format!(
                "[0,1] x [0,{}] is {}invariant",
                c.value(),
                if r.holds { "" } else { "not " }
            );
            let met = r.holds;
            Outcome::new(r, verdict).map(|o| o.hypothesis(met))
        }
        Command::Index => {
            let lins = linearizations(cfg)?;
            let zero_tol = cfg.zero_tol.unwrap_or(DEFAULT_ZERO_TOL);
            let idx = lins
                .iter()
                .map(|l| unstable_index(l, cutoff(cfg, 200.0), zero_tol))
                .collect::<imhyp_core::Result<Vec<_>>>()?;
            let verdict = idx
                .iter()
                .map(|i| format!("l({}) = {}", i.label, i.l))
                .collect::<Vec<_>>()
                .join(", ");
            Outcome::new(idx, verdict)
        }
        Command::Parity => {
            let lins = linearizations(cfg)?;
            let r = parity_report(&lins, cutoff(cfg, 200.0), cfg.zero_tol.unwrap_or(DEFAULT_ZERO_TOL))?;
            let verdict = format!("{} pairs examined", r.pairs.len());
            Outcome::new(r, verdict)
        }
        Command::Profile => {
            let lins = linearizations(cfg)?;
            let profiles = lins
                .iter()
                .map(|l| count_profile(l, cutoff(cfg, 200.0)))
                .collect::<imhyp_core::Result<Vec<_>>>()?;
            let verdict = format!("{} profiles", profiles.len());
            Outcome::new(profiles, verdict)
        }
        Command::NhimDims => {
            let lins = linearizations(cfg)?;
            let r = nhim_common_dims(&lins, cutoff(cfg, 200.0), cfg.gap_min.unwrap_or(DEFAULT_GAP_MIN))?;
            let verdict = if r.empty {
                format!("no dimension up to {} is realizable at every equilibrium", r.bound)
            } else {
                format!("common dimensions {:?}", r.common)
            };
            Outcome::new(r, verdict)
        }
        Command::Anhim => {
            let lins = linearizations(cfg)?;
            let c = anhim_common_gamma_with(&lins, cutoff(cfg, 1000.0), cfg.gap_min.unwrap_or(DEFAULT_GAP_MIN))?;
            let verdict = match &c.result {
                CertificateResult::Empty => "empty: no common cut, valid up to cutoff".to_string(),
                CertificateResult::Witness(w) => {
                    format!("witness: gamma in ({}, {}) with {} modes", w.gamma_lo, w.gamma_hi, w.n)
                }
            };
            Outcome::new(c, verdict)
        }
        Command::Lemma41 => {
            let t = lemma41_threshold(
                cfg.slope0.unwrap_or(1.0),
                cfg.slope1.unwrap_or(-2.0),
                cfg.gap_bound.unwrap_or(3.0),
            )?;
            let verdict = format!("nu* = {}", t.nu_star);
            Outcome::new(t, verdict)
        }
        Command::SapScan => {
            let d = domain(cfg)?;
            let h = match cfg.multiplier.as_deref().unwrap_or("cos-x1") {
                "cos-x1" => {
                    let mut f = vec![0u32; d.dim()];
                    f[0] = 1;
                    Multiplier::from_terms(d, &[(&f, 1.0)])?
                }
                path => read_json_file("multiplier", path, Multiplier::from_json)?,
            };
            let reports = sap_scan(
                &h,
                cfg.k.unwrap_or(5.0),
                cfg.rho.unwrap_or(1.0),
                cfg.lambda_max.unwrap_or(200.0),
            )?;
            let verdict = match reports.first() {
                Some(r) => format!(
                    "best eps_eff {} at lambda {} over {} gaps",
                    r.eps_eff,
                    r.lambda,
                    reports.len()
                ),
                None => "no gap of width >= rho".to_string(),
            };
            let table = csv_bytes(|b| write_sap_csv(&reports, b))?;
            Outcome::new(json!({"multiplier": h, "windows": reports}), verdict).map(|o| o.with_csv(table))
        }
    }
}
