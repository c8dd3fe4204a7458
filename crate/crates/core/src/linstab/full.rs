//! Coupled bulk-surface system on the unit ball.
//!
//! A perturbation proportional to `exp(omega t) Y_lm` with real growth rate
//! `omega >= 0` exists iff `G_l(omega) = 0`, where
//!
//! ```text
//! G_l(w) = gamma q_V P(w) + kappa(w) P(w) + kappa(w) (-gamma q_v (mu + w) + gamma^2 det)
//! P(w)   = w^2 + ((d+1) mu + (f_v - f_u) gamma) w + d mu^2 + gamma mu (f_v - d f_u)
//! ```
//!
//! with `mu = l(l+1)` and `kappa = kappa_{D,l}` from [`crate::specfun::kappa`].

use serde::{Deserialize, Serialize};

use super::{
    band_quadratic, classify, mode_cutoff, sphere_eigenvalues, worst_verdict, CaseReport, InstabilityCase, Verdict,
};
use crate::error::{Error, Result};
use crate::kinetics::{stability_value_s, Equilibrium, Jacobian, KineticParams};
use crate::par::Execution;
use crate::specfun::{self, MAX_ORDER};

/// Relative width at which root bisection stops.
pub const ROOT_REL_TOL: f64 = 1e-12;
const BRACKET_FACTOR: f64 = 4.0;
const OMEGA_CEILING: f64 = 1e100;
const SCAN_POINTS: usize = 512;
const SCAN_LOWER: f64 = 1e-8;
const DEGENERATE_S_TOL: f64 = 1e-12;
const DEGENERATE_BRANCH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousStability {
    pub verdict: Verdict,
    pub s: f64,
    /// Necessary for stability.
    pub f_v_gt_f_u: bool,
}

/// The special solutions with vanishing bulk amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegenerateBranch {
    /// `None` when `q_v = 0`.
    pub residual: Option<f64>,
    /// `None` when `q_u = 0`.
    pub omega: Option<f64>,
    pub active: bool,
    pub degenerate_jacobian: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub l: usize,
    pub g_at_zero: f64,
    pub root_omega: Option<f64>,
    pub verdict: Verdict,
    /// Whether `l` is admissible for the active instability case.
    pub case: InstabilityCase,
    pub lambda_minus: Option<f64>,
    pub lambda_plus: Option<f64>,
    pub q_disc: Option<f64>,
    pub e_coeff: f64,
    pub degenerate_branch: DegenerateBranch,
}

/// Linearization of the full model about one equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullSystem {
    pub jac: Jacobian,
    pub gamma: f64,
    pub d: f64,
    /// Finite cytosolic diffusion ratio `D`.
    pub diffusion: f64,
    pub l_max: usize,
}

impl FullSystem {
    pub fn new(eq: &Equilibrium, p: &KineticParams) -> Result<FullSystem> {
        let diffusion = p.cyto_diffusion.finite().ok_or(Error::InfiniteDiffusion)?;
        Ok(Self::from_jacobian(eq.jac, p.gamma, p.d, diffusion))
    }

    pub fn from_jacobian(jac: Jacobian, gamma: f64, d: f64, diffusion: f64) -> FullSystem {
        FullSystem { jac, gamma, d, diffusion, l_max: MAX_ORDER }
    }

    fn mu(l: usize) -> f64 {
        (l * (l + 1)) as f64
    }

    /// `G_l(omega)`.
    pub fn dispersion_g(&self, l: usize, omega: f64) -> Result<f64> {
        let j = &self.jac;
        let (g, d, mu) = (self.gamma, self.d, Self::mu(l));
        let kappa = specfun::kappa(self.diffusion, l, omega)?;
        let quad = omega * omega
            + ((d + 1.0) * mu + (-j.f_u + j.f_v) * g) * omega
            + d * mu * mu
            + g * mu * (-d * j.f_u + j.f_v);
        Ok(g * j.q_cyto * quad + kappa * quad + kappa * (-g * j.q_v * (mu + omega) + g * g * j.det()))
    }

    /// `G_0(omega) / omega` for `omega > 0`.
    pub fn dispersion_g0_tilde(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(Error::Domain { value: omega, domain: "omega > 0" });
        }
        let j = &self.jac;
        let g = self.gamma;
        let tk = specfun::tilde_kappa((omega / self.diffusion).sqrt());
        Ok(tk * (omega * omega + g * omega * (j.f_v - j.f_u - j.q_v) + g * g * j.det())
            + g * j.q_cyto * omega
            + g * g * j.q_cyto * (j.f_v - j.f_u))
    }

    pub fn homogeneous_stability(&self) -> Result<HomogeneousStability> {
        let signs = crate::kinetics::verify_sign_conditions(&self.jac);
        if !signs.strict() {
            return Err(Error::SignConditionViolation(signs.describe_strict_failures()));
        }
        let j = &self.jac;
        let s = stability_value_s(j);
        let scale = j.det().abs() / 3.0 + j.q_cyto * (j.f_v.abs() + j.f_u.abs());
        let verdict = if s.abs() <= DEGENERATE_S_TOL * scale {
            Verdict::Degenerate
        } else if s > 0.0 {
            Verdict::Stable
        } else {
            Verdict::Unstable
        };
        Ok(HomogeneousStability { verdict, s, f_v_gt_f_u: j.f_v > j.f_u })
    }

    /// Determinant of the constant-perturbation system
    /// `f_u u + f_v v = 0`, `q_u u + q_v v + q_V V = 0`, `4 pi (u + v) + 4 pi V / 3 = 0`.
    pub fn constant_perturbation_det(&self) -> f64 {
        let j = &self.jac;
        let four_pi = 4.0 * std::f64::consts::PI;
        let m = [[j.f_u, j.f_v, 0.0], [j.q_u, j.q_v, j.q_cyto], [four_pi, four_pi, four_pi / 3.0]];
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn coefficient_e(&self, l: usize) -> f64 {
        band_quadratic(&self.jac, self.d, self.gamma, Self::mu(l))
    }

    pub fn classify_case(&self) -> CaseReport {
        classify(&self.jac, self.d, self.gamma, &sphere_eigenvalues(self.l_max))
    }

    pub fn degenerate_branch(&self, l: usize) -> DegenerateBranch {
        let j = &self.jac;
        let (g, d, mu) = (self.gamma, self.d, Self::mu(l));
        let minor = -j.f_u * j.q_v + j.f_v * j.q_u;
        let residual = (j.q_v != 0.0).then(|| (d - 1.0) * mu * j.q_u - g * minor * (j.q_u - j.q_v) / j.q_v);
        let omega = (j.q_u != 0.0).then(|| -(g * minor + d * mu * j.q_u) / j.q_u);
        let active = match residual {
            Some(r) => {
                let scale = ((d - 1.0) * mu * j.q_u).abs() + (g * minor * (j.q_u - j.q_v) / j.q_v).abs();
                r.abs() <= DEGENERATE_BRANCH_TOL * scale
            }
            None => false,
        };
        DegenerateBranch { residual, omega, active, degenerate_jacobian: residual.is_none() || omega.is_none() }
    }

    fn initial_omega_hi(&self) -> f64 {
        (self.gamma * self.gamma * self.jac.det().abs()).max(1.0)
    }

    fn base_report(&self, l: usize, g_at_zero: f64, cases: &CaseReport) -> DispersionReport {
        let mu = Self::mu(l);
        let case = if cases.admissible_mu.contains(&mu) { cases.case } else { InstabilityCase::None };
        DispersionReport {
            l,
            g_at_zero,
            root_omega: None,
            verdict: Verdict::Inconclusive,
            case,
            lambda_minus: cases.band.lambda_minus,
            lambda_plus: cases.band.lambda_plus,
            q_disc: Some(cases.band.q_disc),
            e_coeff: self.coefficient_e(l),
            degenerate_branch: self.degenerate_branch(l),
        }
    }

    fn mode_report_with(&self, l: usize, cases: &CaseReport, homogeneous: Verdict) -> Result<DispersionReport> {
        if l == 0 {
            return Err(Error::Domain { value: 0.0, domain: "l >= 1" });
        }
        let g = |w: f64| self.dispersion_g(l, w);
        let g0 = g(0.0)?;
        let mut report = self.base_report(l, g0, cases);
        if homogeneous != Verdict::Stable {
            report.verdict = Verdict::NotApplicable;
            return Ok(report);
        }
        let (root, necessary) = find_growth_rate(g, g0, self.initial_omega_hi(), l, self.d == 1.0)?;
        report.root_omega = root;
        report.verdict = match (root, necessary) {
            (Some(_), _) => Verdict::Unstable,
            (None, true) => Verdict::Stable,
            (None, false) => Verdict::Inconclusive,
        };
        Ok(report)
    }

    /// Per-mode verdict and root for `l >= 1`.
    pub fn mode_instability(&self, l: usize) -> Result<DispersionReport> {
        let homogeneous = self.homogeneous_stability()?.verdict;
        self.mode_report_with(l, &self.classify_case(), homogeneous)
    }

    /// See [`mode_cutoff`].
    pub fn stability_cutoff(&self) -> usize {
        mode_cutoff(&self.jac, self.d, self.gamma, self.l_max)
    }

    /// Reports for `l = 1..=l_cut`.
    pub fn sweep(&self, l_cut: usize, exec: Execution) -> Result<Vec<DispersionReport>> {
        let homogeneous = self.homogeneous_stability()?.verdict;
        let cases = self.classify_case();
        let degrees: Vec<usize> = (1..=l_cut.min(self.l_max)).collect();
        exec.map(&degrees, |&l| self.mode_report_with(l, &cases, homogeneous)).into_iter().collect()
    }

    /// `gamma q_V (w^2 + (f_v - f_u) gamma w) + kappa (w^2 + (f_v - f_u - q_v) gamma w + gamma^2 det)`.
    pub fn zero_lateral_dispersion(&self, l: usize, omega: f64) -> Result<f64> {
        let j = &self.jac;
        let g = self.gamma;
        let kappa = specfun::kappa(self.diffusion, l, omega)?;
        Ok(g * j.q_cyto * (omega * omega + (j.f_v - j.f_u) * g * omega)
            + kappa * (omega * omega + (j.f_v - j.f_u - j.q_v) * g * omega + g * g * j.det()))
    }

    /// Root finder for [`Self::zero_lateral_dispersion`]. When `det >= 0` and
    /// `f_v > f_u` every term is positive for `omega > 0`, so the mode is stable.
    pub fn zero_lateral_instability(&self, l: usize) -> Result<DispersionReport> {
        if l == 0 {
            return Err(Error::Domain { value: 0.0, domain: "l >= 1" });
        }
        let homogeneous = self.homogeneous_stability()?.verdict;
        let g = |w: f64| self.zero_lateral_dispersion(l, w);
        let g0 = g(0.0)?;
        let mut report = self.base_report(l, g0, &self.classify_case());
        if homogeneous != Verdict::Stable {
            report.verdict = Verdict::NotApplicable;
            return Ok(report);
        }
        let positive_terms = self.jac.det() >= 0.0 && self.jac.f_v > self.jac.f_u;
        let (root, necessary) = find_growth_rate(g, g0, self.initial_omega_hi(), l, positive_terms)?;
        report.root_omega = root;
        report.verdict = match (root, necessary) {
            (Some(_), _) => Verdict::Unstable,
            (None, true) => Verdict::Stable,
            (None, false) => Verdict::Inconclusive,
        };
        Ok(report)
    }
}

/// Worst verdict over a sweep.
pub fn aggregate_verdict(reports: &[DispersionReport]) -> Verdict {
    worst_verdict(reports.iter().map(|r| r.verdict))
}

/// Positive root of `g`, and whether its absence is conclusive.
///
/// With `g(0) < 0` the root is bracketed by expanding `omega_hi` by
/// [`BRACKET_FACTOR`]. Otherwise, unless `conclusive` says no root can exist,
/// `g` is scanned on a log grid for a negative dip and the upper crossing is
/// returned.
fn find_growth_rate(
    g: impl Fn(f64) -> Result<f64>,
    g0: f64,
    omega_hi0: f64,
    l: usize,
    conclusive: bool,
) -> Result<(Option<f64>, bool)> {
    let mut hi = omega_hi0;
    let mut g_hi = g(hi)?;
    while !(g_hi > 0.0) {
        hi *= BRACKET_FACTOR;
        if hi > OMEGA_CEILING || !g_hi.is_finite() {
            return Err(Error::BracketFailure { l, omega_hi: hi });
        }
        g_hi = g(hi)?;
    }
    if g0 < 0.0 {
        return Ok((Some(bisect_root(&g, 0.0, hi)?), true));
    }
    if conclusive {
        return Ok((None, true));
    }
    let ratio = (hi / SCAN_LOWER).ln() / (SCAN_POINTS - 1) as f64;
    let mut last_negative = None;
    for k in 0..SCAN_POINTS {
        let w = SCAN_LOWER * (ratio * k as f64).exp();
        if g(w)? < 0.0 {
            last_negative = Some(w);
        }
    }
    match last_negative {
        Some(w) => Ok((Some(bisect_root(&g, w, hi)?), false)),
        None => Ok((None, false)),
    }
}

/// Bisection on `[lo, hi]` with `g(lo) < 0 < g(hi)`.
fn bisect_root(g: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    for _ in 0..2000 {
        if hi - lo <= ROOT_REL_TOL * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
