//! JSON run configuration. Every section is optional; missing values take
//! the defaults below, with model constants defaulting to the reference set.

use std::path::PathBuf;

use polarity_core::nondim::{nondimensionalize, DimensionalParams};
use polarity_core::scan::ScanSpec;
use polarity_core::sim::{Model, SimConfig};
use polarity_core::{CytoDiffusion, KineticParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Equilibrium,
    Stability,
    Dispersion,
    GrowthCurve,
    Scan,
    Simulate,
    Nondim,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityOptions {
    /// Highest degree reported; the model's cutoff when absent.
    pub l_max: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionOptions {
    pub degrees: Vec<usize>,
    pub omega_min: f64,
    pub omega_max: f64,
    pub count: usize,
}

impl Default for DispersionOptions {
    fn default() -> Self {
        DispersionOptions { degrees: vec![1, 2, 3], omega_min: 1e-3, omega_max: 1e3, count: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthCurveOptions {
    pub mu_max: f64,
    pub count: usize,
}

impl Default for GrowthCurveOptions {
    fn default() -> Self {
        GrowthCurveOptions { mu_max: 20.0, count: 400 }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    params: Option<KineticParams>,
    dimensional: Option<DimensionalParams>,
    model: Option<Model>,
    sim: Option<Value>,
    scan: Option<ScanSpec>,
    stability: StabilityOptions,
    dispersion: DispersionOptions,
    growth_curve: GrowthCurveOptions,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: KineticParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimensional: Option<DimensionalParams>,
    pub model: Model,
    /// `sim.params` always mirrors `params` and `sim.seed` mirrors `seed`.
    pub sim: SimConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
    pub stability: StabilityOptions,
    pub dispersion: DispersionOptions,
    pub growth_curve: GrowthCurveOptions,
    pub seed: u64,
    pub output_dir: PathBuf,
}

fn parse_error(e: serde_path_to_error::Error<serde_json::Error>, prefix: &str) -> CliError {
    let path = e.path().to_string();
    let inner = e.into_inner();
    let field = match (prefix, path.as_str()) {
        (_, ".") => prefix.trim_end_matches('.').to_string(),
        ("", p) => p.to_string(),
        (pre, p) => format!("{pre}{p}"),
    };
    if field.is_empty() {
        CliError::Parse(inner.to_string())
    } else {
        CliError::Parse(format!("{field}: {inner}"))
    }
}

/// Parses a JSON document; defaults are filled, nothing is validated yet.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| parse_error(e, ""))?;
    let mut problems = Vec::new();
    if raw.params.is_some() && raw.dimensional.is_some() {
        problems.push("params: give either params or dimensional, not both".to_string());
    }
    let params = match (&raw.dimensional, raw.params) {
        (Some(dp), _) => nondimensionalize(dp).map_err(CliError::Model)?,
        (None, Some(p)) => p,
        (None, None) => KineticParams::default(),
    };
    let sim_sets_model = raw.sim.as_ref().is_some_and(|v| v.get("model").is_some());
    let mut sim = match raw.sim {
        Some(v) => {
            if v.get("params").is_some() {
                problems.push("sim.params: set model constants in the top-level params section".to_string());
            }
            if v.get("seed").is_some() {
                problems.push("sim.seed: set the seed at the top level".to_string());
            }
            let mut v = v;
            if let Some(obj) = v.as_object_mut() {
                obj.remove("params");
                obj.remove("seed");
            }
            serde_path_to_error::deserialize::<_, SimConfig>(v).map_err(|e| parse_error(e, "sim."))?
        }
        None => SimConfig::default(),
    };
    if !problems.is_empty() {
        return Err(CliError::Validation(problems));
    }
    let seed = raw.seed.unwrap_or(0);
    sim.params = params;
    sim.seed = seed;
    if let (Some(m), false) = (raw.model, sim_sets_model) {
        sim.model = m;
    }
    Ok(RunConfig {
        params,
        dimensional: raw.dimensional,
        model: raw.model.unwrap_or(Model::Full),
        sim,
        scan: raw.scan,
        stability: raw.stability,
        dispersion: raw.dispersion,
        growth_curve: raw.growth_curve,
        seed,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
    })
}

impl RunConfig {
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.sim.seed = seed;
    }

    /// Every violated invariant relevant to `command`.
    pub fn violations(&self, command: Command) -> Vec<String> {
        let mut out: Vec<String> = self.params.violations().into_iter().map(|v| format!("params.{v}")).collect();
        let needs_finite_d =
            self.model == Model::Full && matches!(command, Command::Stability | Command::Dispersion | Command::Scan);
        if needs_finite_d && self.params.cyto_diffusion == CytoDiffusion::Infinite {
            out.push("params.D: the full model needs a finite D; use \"model\": \"reduced\" for D = inf".into());
        }
        match command {
            Command::Stability => {
                if let Some(l) = self.stability.l_max {
                    if !(1..=polarity_core::specfun::MAX_ORDER).contains(&l) {
                        out.push(format!("stability.l_max: must be in 1..={}", polarity_core::specfun::MAX_ORDER));
                    }
                }
            }
            Command::Dispersion => {
                let d = &self.dispersion;
                if d.degrees.is_empty() {
                    out.push("dispersion.degrees: must not be empty".into());
                }
                if d.degrees.iter().any(|&l| l > polarity_core::specfun::MAX_ORDER) {
                    out.push(format!("dispersion.degrees: at most {}", polarity_core::specfun::MAX_ORDER));
                }
                if !(d.omega_min > 0.0 && d.omega_min < d.omega_max && d.omega_max.is_finite()) {
                    out.push("dispersion: need 0 < omega_min < omega_max".into());
                }
                if d.count < 2 {
                    out.push("dispersion.count: must be at least 2".into());
                }
            }
            Command::GrowthCurve => {
                let g = &self.growth_curve;
                if !(g.mu_max > 0.0 && g.mu_max.is_finite()) {
                    out.push("growth_curve.mu_max: must be positive".into());
                }
                if g.count < 2 {
                    out.push("growth_curve.count: must be at least 2".into());
                }
            }
            Command::Scan => match &self.scan {
                Some(s) => out.extend(s.violations()),
                None => out.push("scan: the scan subcommand needs a scan section".into()),
            },
            Command::Simulate => {
                let params = self.params.violations();
                for v in self.sim.violations() {
                    if !params.contains(&v) {
                        out.push(format!("sim.{v}"));
                    }
                }
            }
            Command::Nondim => {
                if self.dimensional.is_none() {
                    out.push("dimensional: the nondim subcommand needs a dimensional section".into());
                }
            }
            Command::Equilibrium => {}
        }
        out
    }

    pub fn validate(&self, command: Command) -> Result<(), CliError> {
        let v = self.violations(command);
        if v.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(v))
        }
    }
}
