//! Axisymmetric nonlinear simulation of the reduced and the full model on the
//! unit sphere / unit ball.
//!
//! Random initial data draw `2 N_theta` numbers from [`crate::rng::SplitMix64`]
//! seeded with `seed`: the first `N_theta` are `u_0` per cell, the rest `v_0`,
//! all uniform on `[0, ic_amplitude)`.

pub mod bulk;
pub mod grid;
pub mod step;

use std::io::{self, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{find_equilibria, primary_equilibrium, EquilibriumSearch, KineticParams};
use crate::par::Execution;
use crate::rng::seeded_uniform;

pub use grid::{laplace_beltrami_axisym, legendre_amplitudes, surface_integral, BulkGrid, SurfaceGrid};
pub use step::{step_full, step_reduced, Model, SimState, Stepper};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    /// i.i.d. uniform on `[0, ic_amplitude)` per cell.
    Random,
    /// Constant `u_0 = v_0 = ic_amplitude / 2`.
    Deterministic,
    /// The primary equilibrium plus `amplitude P_l(cos theta)` in `u`.
    Mode { l: usize, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub model: Model,
    #[serde(rename = "N_theta")]
    pub n_theta: usize,
    #[serde(rename = "N_r")]
    pub n_r: usize,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub ic_amplitude: f64,
    pub initial: InitialCondition,
    pub snapshot_stride: usize,
    pub diagnostic_stride: usize,
    /// Highest Legendre degree recorded.
    pub l_diag: usize,
    pub params: KineticParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            model: Model::Reduced,
            n_theta: 128,
            n_r: 64,
            dt: 1e-4,
            t_end: 5.0,
            seed: 0,
            ic_amplitude: 2e-4,
            initial: InitialCondition::Random,
            snapshot_stride: 5000,
            diagnostic_stride: 100,
            l_diag: 8,
            params: KineticParams::default(),
        }
    }
}

/// Explicit-Euler stability bound: `dt * rate` must stay below this.
pub const EXPLICIT_BOUND: f64 = 2.0;

impl SimConfig {
    /// Gershgorin estimate of the stiffest explicitly treated rate.
    ///
    /// `|f_u| + |f_v| + |q_u| + |q_v|` is bounded on `u, v in [0, 1]`,
    /// `V <= V_init`; the full model adds the Robin feedback
    /// `1.5 gamma a6 / w_{N-1}` into the outer shell.
    pub fn explicit_rate(&self) -> f64 {
        let p = &self.params;
        let f_u = (p.a3 - p.a1).abs() / p.a2 + p.a4 / p.a5;
        let f_v = p.a1.max(p.a1 + (p.a3 - p.a1) / (p.a2 + 1.0));
        let q = 2.0 * p.a6 * p.v_init + p.a_m6;
        let reaction = p.gamma * (f_u + f_v + q);
        match self.model {
            Model::Reduced => reaction,
            Model::Full => {
                let dr = 1.0 / self.n_r.max(1) as f64;
                let outer = (1.0 - (1.0 - dr).powi(3)) / 3.0;
                reaction.max(1.5 * p.gamma * p.a6 / outer)
            }
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self.params.violations();
        if self.n_theta < grid::MIN_CELLS {
            out.push(format!("N_theta: must be at least {}", grid::MIN_CELLS));
        }
        if self.model == Model::Full {
            if self.n_r < grid::MIN_CELLS {
                out.push(format!("N_r: must be at least {}", grid::MIN_CELLS));
            }
            if self.params.cyto_diffusion.finite().is_none() {
                out.push("D: the full model needs a finite value".into());
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            out.push("dt: must be positive".into());
        } else if self.dt * self.explicit_rate() > EXPLICIT_BOUND {
            out.push(format!(
                "dt: {} exceeds the explicit stability bound {:.3e}",
                self.dt,
                EXPLICIT_BOUND / self.explicit_rate()
            ));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            out.push("t_end: must be positive".into());
        }
        if !(self.ic_amplitude >= 0.0 && self.ic_amplitude.is_finite()) {
            out.push("ic_amplitude: must be nonnegative".into());
        }
        if self.snapshot_stride == 0 {
            out.push("snapshot_stride: must be at least 1".into());
        }
        if self.diagnostic_stride == 0 {
            out.push("diagnostic_stride: must be at least 1".into());
        }
        if let InitialCondition::Mode { l, amplitude } = self.initial {
            if l > crate::specfun::MAX_ORDER || !amplitude.is_finite() {
                out.push("initial: mode degree or amplitude out of range".into());
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub v_trace: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRecord {
    pub model: Model,
    pub theta: Vec<f64>,
    pub dt: f64,
    /// Set when the NaN guard tripped and the run was repeated at `dt / 2`.
    pub retried: bool,
    /// Cytosol at `t = 0` (uniform); the mass-budget value for the reduced model.
    pub v0: f64,
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    pub u_min: Vec<f64>,
    pub u_max: Vec<f64>,
    pub v_min: Vec<f64>,
    pub v_max: Vec<f64>,
    pub negative_cells: Vec<usize>,
    /// `a_l(u)` for `l = 0..=l_diag` at each recorded time.
    pub legendre_amplitudes: Vec<Vec<f64>>,
    /// Amplitudes of the homogeneous reference state, subtracted by
    /// [`measure_growth_rate`]; zero when no reference is known.
    pub baseline: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub final_u: Vec<f64>,
    pub final_v: Vec<f64>,
}

impl SimRecord {
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.mass[0];
        self.mass.iter().map(|m| ((m - m0) / m0).abs()).fold(0.0, f64::max)
    }
}

fn initial_state(cfg: &SimConfig, surface: &SurfaceGrid) -> Result<(SimState, f64, Vec<f64>)> {
    let n = surface.n;
    let p = &cfg.params;
    let amp = cfg.ic_amplitude;
    let (u, v, cyto, reference) = match cfg.initial {
        InitialCondition::Random => {
            let draws = seeded_uniform(cfg.seed, 2 * n, amp);
            let (u, v) = draws.split_at(n);
            // expected means amp / 2 each
            (u.to_vec(), v.to_vec(), p.v_init - 3.0 * amp, None)
        }
        InitialCondition::Deterministic => {
            let mean = 0.5 * amp;
            (vec![mean; n], vec![mean; n], p.v_init - 3.0 * (mean + mean), None)
        }
        InitialCondition::Mode { l, amplitude } => {
            let eqs = find_equilibria(p, &EquilibriumSearch::default())?;
            let eq = primary_equilibrium(&eqs)
                .ok_or_else(|| Error::InvalidConfig("no homogeneous equilibrium for the mode perturbation".into()))?;
            let shape = grid::legendre_field(l, surface);
            let u = shape.iter().map(|s| eq.u + amplitude * s).collect();
            (u, vec![eq.v; n], eq.cyto, Some(eq.u))
        }
    };
    let bulk = (cfg.model == Model::Full).then(|| DMatrix::from_element(cfg.n_r, n, cyto));
    let baseline = match reference {
        Some(u_ref) => legendre_amplitudes(&vec![u_ref; n], surface, cfg.l_diag),
        None => vec![0.0; cfg.l_diag + 1],
    };
    let v0 = match cfg.model {
        Model::Full => cyto,
        Model::Reduced => step::nonlocal_cytosol(&u, &v, surface, p.v_init),
    };
    Ok((SimState { u, v, bulk }, v0, baseline))
}

fn extrema(w: &[f64]) -> (f64, f64) {
    w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

fn simulate(cfg: &SimConfig, dt: f64) -> Result<SimRecord> {
    let mut stepper = Stepper::new(cfg.model, cfg.params, cfg.n_theta, cfg.n_r, dt)?;
    let (mut state, v0, baseline) = initial_state(cfg, &stepper.surface)?;
    let steps = (cfg.t_end / dt).round().max(1.0) as usize;
    let mut rec = SimRecord {
        model: cfg.model,
        theta: stepper.surface.theta.clone(),
        dt,
        retried: false,
        v0,
        times: Vec::new(),
        mass: Vec::new(),
        u_min: Vec::new(),
        u_max: Vec::new(),
        v_min: Vec::new(),
        v_max: Vec::new(),
        negative_cells: Vec::new(),
        legendre_amplitudes: Vec::new(),
        baseline,
        snapshots: Vec::new(),
        final_u: Vec::new(),
        final_v: Vec::new(),
    };
    // the snapshot/diagnostic strides count steps of the configured dt
    let scale = (cfg.dt / dt).round().max(1.0) as usize;
    for k in 0..=steps {
        if k > 0 {
            stepper.step(&mut state)?;
            if !state.is_finite() {
                return Err(Error::NumericalBlowup {
                    t: k as f64 * dt,
                    step: k,
                    dt,
                    detail: format!("u range {:?}, v range {:?}", extrema(&state.u), extrema(&state.v)),
                });
            }
        }
        let t = k as f64 * dt;
        if k % (cfg.diagnostic_stride * scale) == 0 || k == steps {
            let (u_lo, u_hi) = extrema(&state.u);
            let (v_lo, v_hi) = extrema(&state.v);
            rec.times.push(t);
            rec.mass.push(stepper.mass(&state));
            rec.u_min.push(u_lo);
            rec.u_max.push(u_hi);
            rec.v_min.push(v_lo);
            rec.v_max.push(v_hi);
            rec.negative_cells.push(state.u.iter().chain(&state.v).filter(|x| **x < 0.0).count());
            rec.legendre_amplitudes.push(legendre_amplitudes(&state.u, &stepper.surface, cfg.l_diag));
        }
        if k % (cfg.snapshot_stride * scale) == 0 || k == steps {
            rec.snapshots.push(Snapshot {
                t,
                u: state.u.clone(),
                v: state.v.clone(),
                v_trace: state.bulk.as_ref().map(step::bulk_trace),
            });
        }
    }
    rec.final_u = state.u;
    rec.final_v = state.v;
    Ok(rec)
}

/// Runs to `t_end`; on a non-finite state the run is repeated once at `dt / 2`.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimRecord> {
    cfg.validate()?;
    match simulate(cfg, cfg.dt) {
        Err(Error::NumericalBlowup { .. }) => {
            let mut rec = simulate(cfg, 0.5 * cfg.dt)?;
            rec.retried = true;
            Ok(rec)
        }
        other => other,
    }
}

/// Independent runs, one per seed, in seed order.
pub fn run_ensemble(cfg: &SimConfig, seeds: &[u64], exec: Execution) -> Vec<Result<SimRecord>> {
    exec.map(seeds, |&seed| run_simulation(&SimConfig { seed, ..cfg.clone() }))
}

/// Least-squares slope of `log |a_l(t) - baseline_l|` over `t in [t0, t1]`.
pub fn measure_growth_rate(record: &SimRecord, l: usize, window: (f64, f64)) -> Result<f64> {
    let (t0, t1) = window;
    let base = record.baseline.get(l).copied().unwrap_or(0.0);
    let points: Vec<(f64, f64)> = record
        .times
        .iter()
        .zip(&record.legendre_amplitudes)
        .filter(|(t, _)| **t >= t0 && **t <= t1)
        .map(|(t, a)| a.get(l).map(|x| (*t, x - base)))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Window(format!("degree {l} was not recorded")))?;
    if points.len() < 3 {
        return Err(Error::Window(format!("{} samples in [{t0}, {t1}]", points.len())));
    }
    let sign = points[0].1.signum();
    if points.iter().any(|(_, a)| !(sign * a > 0.0)) {
        return Err(Error::Window(format!("amplitude of degree {l} changes sign or vanishes in [{t0}, {t1}]")));
    }
    let n = points.len() as f64;
    let (mt, my) = points.iter().fold((0.0, 0.0), |(st, sy), (t, a)| (st + t / n, sy + (sign * a).ln() / n));
    let (num, den) = points.iter().fold((0.0, 0.0), |(num, den), (t, a)| {
        let dt = t - mt;
        (num + dt * ((sign * a).ln() - my), den + dt * dt)
    });
    Ok(num / den)
}

/// Number of maximal index runs with `w_j > level`. The poles are distinct
/// points, so runs never wrap around.
pub fn spot_count(w: &[f64], level: f64) -> usize {
    let mut count = 0;
    let mut inside = false;
    for &x in w {
        let above = x > level;
        if above && !inside {
            count += 1;
        }
        inside = above;
    }
    count
}

/// `(max - min) / |max|`.
pub fn relative_variation(w: &[f64]) -> f64 {
    let (lo, hi) = extrema(w);
    (hi - lo) / hi.abs()
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_snapshots_csv(record: &SimRecord, out: &mut impl Write) -> io::Result<()> {
    let with_trace = record.snapshots.first().is_some_and(|s| s.v_trace.is_some());
    writeln!(out, "{}", if with_trace { "t,theta,u,v,V_trace" } else { "t,theta,u,v" })?;
    for s in &record.snapshots {
        for j in 0..s.u.len() {
            write!(out, "{},{},{},{}", fmt17(s.t), fmt17(record.theta[j]), fmt17(s.u[j]), fmt17(s.v[j]))?;
            if let Some(tr) = &s.v_trace {
                write!(out, ",{}", fmt17(tr[j]))?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn write_diagnostics_csv(record: &SimRecord, out: &mut impl Write) -> io::Result<()> {
    let l_count = record.legendre_amplitudes.first().map_or(0, Vec::len);
    let mut header = String::from("t,mass,u_min,u_max,v_min,v_max");
    for l in 0..l_count {
        header.push_str(&format!(",a{l}"));
    }
    writeln!(out, "{header}")?;
    for k in 0..record.times.len() {
        let row = [record.times[k], record.mass[k], record.u_min[k], record.u_max[k], record.v_min[k], record.v_max[k]];
        let mut line: Vec<String> = row.iter().map(|x| fmt17(*x)).collect();
        line.extend(record.legendre_amplitudes[k].iter().map(|x| fmt17(*x)));
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
