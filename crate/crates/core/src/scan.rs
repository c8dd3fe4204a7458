//! One-parameter stability maps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{
    find_equilibria, primary_equilibrium, stability_value_s, CytoDiffusion, Equilibrium, EquilibriumSearch,
    KineticParams,
};
use crate::linstab::{worst_verdict, FullSystem, InstabilityCase, ReducedSystem, SpectrumSpec, Verdict};
use crate::par::Execution;
use crate::sim::Model;

/// Degrees reported per scan row.
pub const SCAN_L_MAX: usize = 10;

/// Parameter names accepted by [`set_param`], as spelled in configs.
pub const PARAM_NAMES: [&str; 11] = ["a1", "a2", "a3", "a4", "a5", "a6", "a_m6", "gamma", "d", "D", "V_init"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub param: String,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    #[serde(default = "default_spacing")]
    pub scale: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Linear
}

impl ScanSpec {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !PARAM_NAMES.contains(&self.param.as_str()) {
            out.push(format!("scan.param: unknown parameter \"{}\"", self.param));
        }
        if self.count < 2 {
            out.push("scan.count: must be at least 2".into());
        }
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            out.push("scan: empty range, need finite lower < upper".into());
        }
        if self.scale == Spacing::Log && !(self.lower > 0.0) {
            out.push("scan.lower: log spacing needs a positive lower bound".into());
        }
        out
    }

    /// Scan points, endpoints included.
    pub fn points(&self) -> Result<Vec<f64>> {
        let v = self.violations();
        if !v.is_empty() {
            return Err(Error::InvalidConfig(v.join("; ")));
        }
        let last = (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|k| {
                let s = k as f64 / last;
                match self.scale {
                    Spacing::Linear => self.lower + s * (self.upper - self.lower),
                    Spacing::Log => {
                        let (a, b) = (self.lower.log10(), self.upper.log10());
                        10f64.powf(a + s * (b - a))
                    }
                }
            })
            .collect())
    }
}

pub fn set_param(p: &mut KineticParams, name: &str, value: f64) -> Result<()> {
    let slot = match name {
        "a1" => &mut p.a1,
        "a2" => &mut p.a2,
        "a3" => &mut p.a3,
        "a4" => &mut p.a4,
        "a5" => &mut p.a5,
        "a6" => &mut p.a6,
        "a_m6" => &mut p.a_m6,
        "gamma" => &mut p.gamma,
        "d" => &mut p.d,
        "V_init" => &mut p.v_init,
        "D" => {
            p.cyto_diffusion = CytoDiffusion::Finite(value);
            return Ok(());
        }
        other => return Err(Error::InvalidConfig(format!("unknown parameter \"{other}\""))),
    };
    *slot = value;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub index: usize,
    pub value: f64,
    pub equilibrium_found: bool,
    pub s: Option<f64>,
    /// Verdicts for `l = 1..=SCAN_L_MAX`; empty on error.
    pub verdicts: Vec<Verdict>,
    pub verdict: Option<Verdict>,
    pub case: Option<InstabilityCase>,
    pub error: Option<String>,
}

fn equilibrium(p: &KineticParams) -> Result<Option<Equilibrium>> {
    p.validate()?;
    Ok(primary_equilibrium(&find_equilibria(p, &EquilibriumSearch::default())?))
}

fn evaluate(eq: &Equilibrium, p: &KineticParams, model: Model) -> Result<(f64, Vec<Verdict>, InstabilityCase)> {
    let s = stability_value_s(&eq.jac);
    match model {
        Model::Full => {
            let sys = FullSystem::new(eq, p)?;
            let reports = sys.sweep(SCAN_L_MAX, Execution::Sequential)?;
            let verdicts = reports.iter().map(|r| r.verdict).collect();
            Ok((s, verdicts, sys.classify_case().case))
        }
        Model::Reduced => {
            let sys = ReducedSystem::new(eq, p);
            let spec = SpectrumSpec::unit_sphere(SCAN_L_MAX);
            let verdicts = sys.mode_reports(&spec)?.iter().map(|r| r.verdict).collect();
            Ok((s, verdicts, sys.classify_case_reduced(&spec).case))
        }
    }
}

/// Evaluates every scan point independently; failures land in the row.
pub fn stability_map(base: &KineticParams, spec: &ScanSpec, model: Model, exec: Execution) -> Result<Vec<ScanRow>> {
    let points: Vec<(usize, f64)> = spec.points()?.into_iter().enumerate().collect();
    Ok(exec.map(&points, |&(index, value)| {
        let mut p = *base;
        let found = set_param(&mut p, &spec.param, value).and_then(|_| equilibrium(&p));
        let equilibrium_found = matches!(found, Ok(Some(_)));
        let outcome = found.and_then(|eq| match eq {
            Some(eq) => evaluate(&eq, &p, model),
            None => Err(Error::Domain { value, domain: "no equilibrium with u + v < 1" }),
        });
        match outcome {
            Ok((s, verdicts, case)) => ScanRow {
                index,
                value,
                equilibrium_found,
                s: Some(s),
                verdict: Some(worst_verdict(verdicts.iter().copied())),
                verdicts,
                case: Some(case),
                error: None,
            },
            Err(e) => ScanRow {
                index,
                value,
                equilibrium_found,
                s: None,
                verdicts: Vec::new(),
                verdict: None,
                case: None,
                error: Some(e.to_string()),
            },
        }
    }))
}
