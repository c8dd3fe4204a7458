use polarity_core::kinetics::{
    find_equilibria, primary_equilibrium, stability_value_s, Equilibrium, EquilibriumSearch,
};
use polarity_core::linstab::{aggregate_verdict, worst_verdict, FullSystem, ReducedSystem, SpectrumSpec};
use polarity_core::nondim::nondimensionalize;
use polarity_core::scan::{stability_map, SCAN_L_MAX};
use polarity_core::sim::{self, run_simulation, spot_count, Model};
use polarity_core::{Execution, KineticParams};
use serde_json::{json, Value};

use crate::config::{Command, RunConfig};
use crate::error::CliError;

/// Files to emit, in order, plus a JSON summary of the result.
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    pub result: Value,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let to_io = |e: csv::Error| CliError::io("<csv buffer>", std::io::Error::other(e));
    w.write_record(header).map_err(to_io)?;
    for row in rows {
        w.write_record(&row).map_err(to_io)?;
    }
    w.into_inner().map_err(|e| CliError::io("<csv buffer>", e.into_error()))
}

fn primary(p: &KineticParams) -> Result<Equilibrium, CliError> {
    primary_equilibrium(&find_equilibria(p, &EquilibriumSearch::default())?).ok_or(CliError::NoEquilibrium)
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Artifacts, CliError> {
    cfg.validate(command)?;
    match command {
        Command::Equilibrium => equilibrium(cfg),
        Command::Stability => match cfg.model {
            Model::Full => stability_full(cfg),
            Model::Reduced => stability_reduced(cfg),
        },
        Command::Dispersion => dispersion(cfg),
        Command::GrowthCurve => growth_curve(cfg),
        Command::Scan => scan(cfg),
        Command::Simulate => simulate(cfg),
        Command::Nondim => nondim(cfg),
    }
}

fn equilibrium(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let list = find_equilibria(&cfg.params, &EquilibriumSearch::default())?;
    let rows = list.iter().enumerate().map(|(k, eq)| {
        let signs = eq.sign_conditions();
        let class = if signs.strict() {
            "strict"
        } else if signs.weak() {
            "weak"
        } else {
            "violated"
        };
        vec![
            k.to_string(),
            num(eq.u),
            num(eq.v),
            num(eq.cyto),
            num(eq.residual_f),
            num(eq.residual_q),
            num(stability_value_s(&eq.jac)),
            class.to_string(),
            eq.kink_warning.to_string(),
        ]
    });
    let header = ["index", "u", "v", "V", "residual_f", "residual_q", "S", "sign_conditions", "kink_warning"];
    let csv = csv_bytes(&header, rows)?;
    let primary = primary_equilibrium(&list);
    let result = json!({
        "count": list.len(),
        "primary": primary.map(|e| json!({"u": e.u, "v": e.v, "V": e.cyto, "S": stability_value_s(&e.jac)})),
    });
    Ok(Artifacts { files: vec![("equilibria.csv".into(), csv)], result })
}

fn stability_full(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let eq = primary(&cfg.params)?;
    let sys = FullSystem::new(&eq, &cfg.params)?;
    let homogeneous = sys.homogeneous_stability()?;
    let l_cut = cfg.stability.l_max.unwrap_or_else(|| sys.stability_cutoff());
    let reports = sys.sweep(l_cut, Execution::Parallel)?;
    let rows = reports
        .iter()
        .map(|r| vec![r.l.to_string(), num(r.g_at_zero), opt(r.root_omega), r.verdict.to_string(), r.case.to_string()]);
    let csv = csv_bytes(&["l", "G0", "root_omega", "verdict", "case"], rows)?;
    let cases = sys.classify_case();
    let fastest = reports.iter().filter_map(|r| r.root_omega.map(|w| (r.l, w))).max_by(|a, b| a.1.total_cmp(&b.1));
    let result = json!({
        "model": "full",
        "equilibrium": {"u": eq.u, "v": eq.v, "V": eq.cyto},
        "S": homogeneous.s,
        "homogeneous": homogeneous.verdict.to_string(),
        "verdict": aggregate_verdict(&reports).to_string(),
        "case": cases.case.to_string(),
        "lambda_minus": cases.band.lambda_minus,
        "lambda_plus": cases.band.lambda_plus,
        "l_cut": l_cut,
        "fastest_mode": fastest.map(|(l, w)| json!({"l": l, "omega": w})),
    });
    Ok(Artifacts { files: vec![("stability.csv".into(), csv)], result })
}

fn stability_reduced(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let eq = primary(&cfg.params)?;
    let sys = ReducedSystem::new(&eq, &cfg.params);
    let l_cut = cfg.stability.l_max.unwrap_or_else(|| sys.stability_cutoff());
    let spec = SpectrumSpec::unit_sphere(l_cut);
    let ode = sys.ode_stability(&spec)?;
    let reports = sys.mode_reports(&spec)?;
    let rows = reports.iter().map(|r| {
        vec![
            r.index.to_string(),
            num(r.mu),
            num(r.e_coeff),
            opt(r.root_omega),
            r.verdict.to_string(),
            r.case.to_string(),
        ]
    });
    let csv = csv_bytes(&["l", "mu", "e", "root_omega", "verdict", "case"], rows)?;
    let result = json!({
        "model": "reduced",
        "equilibrium": {"u": eq.u, "v": eq.v, "V": eq.cyto},
        "S": stability_value_s(&eq.jac),
        "ode": ode.verdict.to_string(),
        "verdict": worst_verdict(reports.iter().map(|r| r.verdict)).to_string(),
        "case": sys.classify_case_reduced(&spec).case.to_string(),
        "l_cut": l_cut,
        "equal_diffusion_shift": sys.equal_diffusion_shift(),
    });
    Ok(Artifacts { files: vec![("stability.csv".into(), csv)], result })
}

fn dispersion(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let d = &cfg.dispersion;
    let eq = primary(&cfg.params)?;
    let (lo, hi) = (d.omega_min.ln(), d.omega_max.ln());
    let last = d.count - 1;
    let omegas: Vec<f64> = (0..d.count)
        .map(|k| match k {
            0 => d.omega_min,
            k if k == last => d.omega_max,
            k => (lo + (hi - lo) * k as f64 / last as f64).exp(),
        })
        .collect();
    let mut rows = Vec::with_capacity(d.degrees.len() * omegas.len());
    match cfg.model {
        Model::Full => {
            let sys = FullSystem::new(&eq, &cfg.params)?;
            for &l in &d.degrees {
                for &w in &omegas {
                    rows.push(vec![l.to_string(), num(w), num(sys.dispersion_g(l, w)?)]);
                }
            }
        }
        Model::Reduced => {
            let sys = ReducedSystem::new(&eq, &cfg.params);
            for &l in &d.degrees {
                let roots = sys.quadratic_dispersion_roots((l * (l + 1)) as f64);
                for &w in &omegas {
                    rows.push(vec![l.to_string(), num(w), num(w * w + roots.b * w + roots.c)]);
                }
            }
        }
    }
    let csv = csv_bytes(&["l", "omega", "G"], rows)?;
    let result = json!({"model": cfg.model, "degrees": d.degrees, "points": omegas.len()});
    Ok(Artifacts { files: vec![("dispersion.csv".into(), csv)], result })
}

fn growth_curve(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let g = &cfg.growth_curve;
    let eq = primary(&cfg.params)?;
    let sys = ReducedSystem::new(&eq, &cfg.params);
    let grid: Vec<f64> = (1..=g.count).map(|k| g.mu_max * k as f64 / g.count as f64).collect();
    let curve = sys.growth_rate_curve(&grid);
    let rows = curve.iter().map(|p| vec![num(p.mu), opt(p.omega_plus), opt(p.s)]);
    let csv = csv_bytes(&["mu", "omega_plus", "s"], rows)?;
    let peak = curve.iter().filter_map(|p| p.omega_plus.map(|w| (p.mu, w))).max_by(|a, b| a.1.total_cmp(&b.1));
    let result = json!({
        "peak": peak.map(|(mu, w)| json!({"mu": mu, "omega_plus": w})),
        "equal_diffusion_shift": sys.equal_diffusion_shift(),
    });
    Ok(Artifacts { files: vec![("growth_curve.csv".into(), csv)], result })
}

fn scan(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let spec = cfg.scan.as_ref().ok_or_else(|| CliError::Validation(vec!["scan: missing".into()]))?;
    let rows = stability_map(&cfg.params, spec, cfg.model, Execution::Parallel)?;
    let mut header: Vec<String> = vec!["index".into(), spec.param.clone(), "equilibrium_found".into(), "S".into()];
    header.extend((1..=SCAN_L_MAX).map(|l| format!("verdict_l{l}")));
    header.extend(["verdict", "case", "error"].map(String::from));
    let records = rows.iter().map(|r| {
        let mut rec = vec![r.index.to_string(), num(r.value), r.equilibrium_found.to_string(), opt(r.s)];
        if r.verdicts.is_empty() {
            rec.extend(std::iter::repeat_n(String::new(), SCAN_L_MAX));
        } else {
            rec.extend(r.verdicts.iter().map(|v| v.to_string()));
        }
        rec.push(r.verdict.map(|v| v.to_string()).unwrap_or_default());
        rec.push(r.case.map(|c| c.to_string()).unwrap_or_default());
        rec.push(r.error.clone().unwrap_or_default());
        rec
    });
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let csv = csv_bytes(&header_refs, records)?;
    let result = json!({
        "param": spec.param,
        "points": rows.len(),
        "errors": rows.iter().filter(|r| r.error.is_some()).count(),
        "verdicts": rows.iter().map(|r| r.verdict.map(|v| v.to_string())).collect::<Vec<_>>(),
    });
    Ok(Artifacts { files: vec![("scan.csv".into(), csv)], result })
}

fn simulate(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let rec = run_simulation(&cfg.sim)?;
    let mut snapshots = Vec::new();
    sim::write_snapshots_csv(&rec, &mut snapshots).map_err(|e| CliError::io("snapshots.csv", e))?;
    let mut diagnostics = Vec::new();
    sim::write_diagnostics_csv(&rec, &mut diagnostics).map_err(|e| CliError::io("diagnostics.csv", e))?;
    let u = &rec.final_u;
    let (lo, hi) = u.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let result = json!({
        "model": rec.model,
        "dt_used": rec.dt,
        "retried": rec.retried,
        "V0": rec.v0,
        "mass_drift": rec.mass_drift(),
        "final_u_min": lo,
        "final_u_max": hi,
        "final_spot_count": spot_count(u, 0.5 * (lo + hi)),
        "max_negative_cells": rec.negative_cells.iter().max(),
    });
    Ok(Artifacts { files: vec![("snapshots.csv".into(), snapshots), ("diagnostics.csv".into(), diagnostics)], result })
}

fn nondim(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let dp = cfg.dimensional.as_ref().ok_or_else(|| CliError::Validation(vec!["dimensional: missing".into()]))?;
    let params = nondimensionalize(dp)?;
    let mut text = serde_json::to_vec_pretty(&params).map_err(|e| CliError::io("nondim.json", e.into()))?;
    text.push(b'\n');
    let result = serde_json::to_value(params).map_err(|e| CliError::io("nondim.json", e.into()))?;
    Ok(Artifacts { files: vec![("nondim.json".into(), text)], result })
}
