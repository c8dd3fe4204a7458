//! The non-local reduction `D -> inf`.
//!
//! The cytosol is a spatial constant fixed by the total mass, which leaves a
//! two-component surface system. Its modes with Laplace-Beltrami eigenvalue
//! `mu > 0` grow at the roots of
//!
//! ```text
//! w^2 + w ((d+1) mu + gamma (f_v - f_u - q_v)) + e(mu) = 0
//! ```
//!
//! so a mode is unstable exactly when `e(mu) < 0`.

use serde::{Deserialize, Serialize};

use super::full::FullSystem;
use super::{band_quadratic, classify, mode_cutoff, CaseReport, InstabilityCase, Verdict};
use crate::error::{Error, Result};
use crate::kinetics::{verify_sign_conditions, Equilibrium, Jacobian, KineticParams, SPHERE_C_AREA};
use crate::par::Execution;
use crate::specfun::MAX_ORDER;

/// Laplace-Beltrami spectrum (nonzero part) and the product `c |Gamma|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub eigenvalues: Vec<f64>,
    pub c_times_area: f64,
}

impl SpectrumSpec {
    pub fn new(eigenvalues: Vec<f64>, c_times_area: f64) -> Result<SpectrumSpec> {
        if eigenvalues.is_empty() || !(eigenvalues[0] > 0.0) {
            return Err(Error::InvalidConfig("spectrum must be non-empty and positive".into()));
        }
        if eigenvalues.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig("spectrum must be strictly increasing".into()));
        }
        if !(c_times_area > 0.0 && c_times_area.is_finite()) {
            return Err(Error::InvalidConfig(format!("c_times_area = {c_times_area} must be positive")));
        }
        Ok(SpectrumSpec { eigenvalues, c_times_area })
    }

    /// `mu = l(l+1)` for `l = 1..=l_max` and `c |Gamma| = 3`.
    pub fn unit_sphere(l_max: usize) -> SpectrumSpec {
        SpectrumSpec { eigenvalues: super::sphere_eigenvalues(l_max.max(1)), c_times_area: SPHERE_C_AREA }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeStability {
    pub verdict: Verdict,
    /// `f_u - f_v + q_v - c|Gamma| q_V`; must be negative.
    pub trace: f64,
    /// `f_u (q_v - c|Gamma| q_V) - f_v (q_u - c|Gamma| q_V)`; must be positive.
    pub det: f64,
    pub f_u_lt_f_v: bool,
    /// The determinant condition already forces the trace condition.
    pub trace_implied: bool,
}

/// Roots of `w^2 + b w + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticRoots {
    pub b: f64,
    pub c: f64,
    pub discriminant: f64,
    /// Real parts, larger first.
    pub re: [f64; 2],
    /// Imaginary part magnitude; zero for real roots.
    pub im: f64,
    pub positive_root: Option<f64>,
}

impl QuadraticRoots {
    pub fn solve(b: f64, c: f64) -> QuadraticRoots {
        let discriminant = b * b - 4.0 * c;
        if discriminant >= 0.0 {
            let sq = discriminant.sqrt();
            let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
            let (r1, r2) = if q != 0.0 { (q, c / q) } else { (0.0, 0.0) };
            let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
            QuadraticRoots { b, c, discriminant, re: [hi, lo], im: 0.0, positive_root: (hi > 0.0).then_some(hi) }
        } else {
            let re = -0.5 * b;
            QuadraticRoots { b, c, discriminant, re: [re, re], im: 0.5 * (-discriminant).sqrt(), positive_root: None }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub mu: f64,
    pub omega_plus: Option<f64>,
    /// `omega_+ + mu`, reported for `d = 1`.
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedModeReport {
    pub index: usize,
    pub mu: f64,
    pub e_coeff: f64,
    pub root_omega: Option<f64>,
    pub verdict: Verdict,
    pub case: InstabilityCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub diffusion: f64,
    pub root_full: Option<f64>,
    pub root_reduced: f64,
    /// `|root_full - root_reduced| / root_reduced`.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedSystem {
    pub jac: Jacobian,
    pub gamma: f64,
    pub d: f64,
}

impl ReducedSystem {
    pub fn new(eq: &Equilibrium, p: &KineticParams) -> ReducedSystem {
        ReducedSystem { jac: eq.jac, gamma: p.gamma, d: p.d }
    }

    pub fn ode_stability(&self, spec: &SpectrumSpec) -> Result<OdeStability> {
        let signs = verify_sign_conditions(&self.jac);
        if !signs.strict() {
            return Err(Error::SignConditionViolation(signs.describe_strict_failures()));
        }
        let j = &self.jac;
        let cv = spec.c_times_area * j.q_cyto;
        let trace = j.f_u - j.f_v + j.q_v - cv;
        let det = j.f_u * (j.q_v - cv) - j.f_v * (j.q_u - cv);
        let scale = (j.f_u * (j.q_v - cv)).abs() + (j.f_v * (j.q_u - cv)).abs();
        let verdict = if det.abs() <= 1e-12 * scale {
            Verdict::Degenerate
        } else if trace < 0.0 && det > 0.0 {
            Verdict::Stable
        } else {
            Verdict::Unstable
        };
        Ok(OdeStability { verdict, trace, det, f_u_lt_f_v: j.f_u < j.f_v, trace_implied: !(det > 0.0) || trace < 0.0 })
    }

    pub fn quadratic_dispersion_roots(&self, mu: f64) -> QuadraticRoots {
        let j = &self.jac;
        let b = (self.d + 1.0) * mu + self.gamma * (-j.f_u + j.f_v - j.q_v);
        QuadraticRoots::solve(b, band_quadratic(j, self.d, self.gamma, mu))
    }

    /// Exact instability classification over the spectrum.
    pub fn classify_case_reduced(&self, spec: &SpectrumSpec) -> CaseReport {
        classify(&self.jac, self.d, self.gamma, &spec.eigenvalues)
    }

    /// Unstable iff some spectrum element lies in the instability band; not
    /// applicable when the ODE reduction is itself unstable.
    pub fn verdict(&self, spec: &SpectrumSpec) -> Result<Verdict> {
        if self.ode_stability(spec)?.verdict != Verdict::Stable {
            return Ok(Verdict::NotApplicable);
        }
        Ok(match self.classify_case_reduced(spec).case {
            InstabilityCase::None => Verdict::Stable,
            _ => Verdict::Unstable,
        })
    }

    pub fn mode_reports(&self, spec: &SpectrumSpec) -> Result<Vec<ReducedModeReport>> {
        let ode = self.ode_stability(spec)?.verdict;
        let cases = self.classify_case_reduced(spec);
        Ok(spec
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(k, &mu)| {
                let roots = self.quadratic_dispersion_roots(mu);
                let verdict = if ode != Verdict::Stable {
                    Verdict::NotApplicable
                } else if roots.c < 0.0 {
                    Verdict::Unstable
                } else {
                    Verdict::Stable
                };
                let case = if cases.admissible_mu.contains(&mu) { cases.case } else { InstabilityCase::None };
                ReducedModeReport { index: k + 1, mu, e_coeff: roots.c, root_omega: roots.positive_root, verdict, case }
            })
            .collect())
    }

    /// Degree cutoff for mode reports, as [`mode_cutoff`] up to [`MAX_ORDER`].
    pub fn stability_cutoff(&self) -> usize {
        mode_cutoff(&self.jac, self.d, self.gamma, MAX_ORDER)
    }

    pub fn growth_rate_curve(&self, mu_grid: &[f64]) -> Vec<GrowthPoint> {
        mu_grid
            .iter()
            .map(|&mu| {
                let omega_plus = self.quadratic_dispersion_roots(mu).positive_root;
                let s = if self.d == 1.0 { omega_plus.map(|w| w + mu) } else { None };
                GrowthPoint { mu, omega_plus, s }
            })
            .collect()
    }

    /// Root of the shifted quadratic `s^2 + gamma K s + gamma^2 det`,
    /// `K = f_v - f_u - q_v`, which equals `omega_+(mu) + mu` when `d = 1`.
    pub fn equal_diffusion_shift(&self) -> Option<f64> {
        let j = &self.jac;
        let k = j.f_v - j.f_u - j.q_v;
        QuadraticRoots::solve(self.gamma * k, self.gamma * self.gamma * j.det()).positive_root
    }
}

/// Full-system root at `mu = l(l+1)` for each `D`, next to the reduced root.
pub fn full_vs_reduced_consistency(
    eq: &Equilibrium,
    p: &KineticParams,
    l: usize,
    diffusions: &[f64],
    exec: Execution,
) -> Result<Vec<ConsistencyRow>> {
    let reduced = ReducedSystem::new(eq, p);
    let mu = (l * (l + 1)) as f64;
    let root_reduced = reduced
        .quadratic_dispersion_roots(mu)
        .positive_root
        .ok_or_else(|| Error::InvalidConfig(format!("mode l = {l} is not unstable in the reduced model")))?;
    exec.map(diffusions, |&diffusion| {
        let sys = FullSystem::from_jacobian(eq.jac, p.gamma, p.d, diffusion);
        let root_full = sys.mode_instability(l)?.root_omega;
        let gap = root_full.map(|w| (w - root_reduced).abs() / root_reduced);
        Ok(ConsistencyRow { diffusion, root_full, root_reduced, gap })
    })
    .into_iter()
    .collect()
}
