//! Linear stability of homogeneous steady states.
//!
//! [`full`] treats the coupled bulk-surface system on the unit ball through
//! the dispersion function `G_l(omega)`; [`reduced`] treats the non-local
//! limit `D -> inf` on a surface described by its Laplace-Beltrami spectrum.
//! Both share the instability band `lambda_- < mu / gamma < lambda_+` on
//! which the quadratic
//!
//! ```text
//! e(mu) = d mu^2 + gamma mu (-d f_u + f_v - q_v) + gamma^2 (f_u q_v - f_v q_u)
//! ```
//!
//! is negative.

pub mod full;
pub mod reduced;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::kinetics::Jacobian;

pub use full::{aggregate_verdict, DegenerateBranch, DispersionReport, FullSystem, HomogeneousStability};
pub use reduced::{
    full_vs_reduced_consistency, ConsistencyRow, GrowthPoint, OdeStability, QuadraticRoots, ReducedModeReport,
    ReducedSystem, SpectrumSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
    Degenerate,
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Degenerate => "degenerate",
            Verdict::NotApplicable => "not_applicable",
        };
        f.write_str(s)
    }
}

/// The two diffusive-instability mechanisms.
/// `Unstable` over `NotApplicable` over `Degenerate` over `Inconclusive` over
/// `Stable`; an empty sequence is `Stable`.
pub fn worst_verdict(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let rank = |v: &Verdict| match v {
        Verdict::Stable => 0,
        Verdict::Inconclusive => 1,
        Verdict::Degenerate => 2,
        Verdict::NotApplicable => 3,
        Verdict::Unstable => 4,
    };
    verdicts.into_iter().max_by_key(rank).unwrap_or(Verdict::Stable)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstabilityCase {
    /// Turing-type mechanism in `(u, v)`; needs `f_u q_v - f_v q_u >= 0`.
    Case1,
    /// Driven by the bulk/membrane diffusion disparity; needs `f_u q_v - f_v q_u < 0`.
    Case2,
    None,
}

impl fmt::Display for InstabilityCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InstabilityCase::Case1 => "case1",
            InstabilityCase::Case2 => "case2",
            InstabilityCase::None => "none",
        };
        f.write_str(s)
    }
}

/// Roots `lambda_+-` of `e(gamma lambda) / gamma^2 = d lambda^2 - B lambda + det`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaBand {
    /// `B = d f_u - f_v + q_v`.
    pub b: f64,
    /// `Q = B^2 - 4 d (f_u q_v - f_v q_u)`.
    pub q_disc: f64,
    pub lambda_minus: Option<f64>,
    pub lambda_plus: Option<f64>,
}

impl LambdaBand {
    pub fn new(jac: &Jacobian, d: f64) -> LambdaBand {
        let b = d * jac.f_u - jac.f_v + jac.q_v;
        let det = jac.det();
        let q_disc = b * b - 4.0 * d * det;
        let (lambda_minus, lambda_plus) = if d > 0.0 {
            if q_disc >= 0.0 {
                let root = q_disc.sqrt();
                (Some((b - root) / (2.0 * d)), Some((b + root) / (2.0 * d)))
            } else {
                (None, None)
            }
        } else if b < 0.0 {
            // linear in lambda: negative below det / B
            (None, Some(det / b))
        } else if b > 0.0 {
            (Some(det / b), Some(f64::INFINITY))
        } else {
            (None, None)
        };
        LambdaBand { b, q_disc, lambda_minus, lambda_plus }
    }

    /// Whether `x = mu / gamma` lies strictly inside the band.
    pub fn contains(&self, x: f64) -> bool {
        match self.lambda_plus {
            Some(hi) => x < hi && self.lambda_minus.is_none_or(|lo| lo < x),
            None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: InstabilityCase,
    pub band: LambdaBand,
    /// `f_u q_v - f_v q_u`.
    pub det: f64,
    /// Spectrum elements (or `l(l+1)` values) inside the band for the active case.
    pub admissible_mu: Vec<f64>,
}

/// Case 1 / Case 2 classification over a list of positive eigenvalues `mu`.
pub fn classify(jac: &Jacobian, d: f64, gamma: f64, mus: &[f64]) -> CaseReport {
    let band = LambdaBand::new(jac, d);
    let det = jac.det();
    let in_band: Vec<f64> = mus.iter().copied().filter(|&mu| band.contains(mu / gamma)).collect();
    let case = if det >= 0.0 {
        if band.b > 0.0 && band.q_disc > 0.0 && !in_band.is_empty() {
            InstabilityCase::Case1
        } else {
            InstabilityCase::None
        }
    } else if !in_band.is_empty() {
        InstabilityCase::Case2
    } else {
        InstabilityCase::None
    };
    let admissible_mu = if case == InstabilityCase::None { Vec::new() } else { in_band };
    CaseReport { case, band, det, admissible_mu }
}

/// `e(mu)`.
pub fn band_quadratic(jac: &Jacobian, d: f64, gamma: f64, mu: f64) -> f64 {
    d * mu * mu + gamma * mu * (-d * jac.f_u + jac.f_v - jac.q_v) + gamma * gamma * jac.det()
}

/// Smallest degree past which `e(l(l+1)) > 0` and increasing, doubled and
/// capped at `l_max`.
pub fn mode_cutoff(jac: &Jacobian, d: f64, gamma: f64, l_max: usize) -> usize {
    let vertex = if d > 0.0 { -gamma * (-d * jac.f_u + jac.f_v - jac.q_v) / (2.0 * d) } else { f64::NEG_INFINITY };
    let l_e = (1..=l_max)
        .find(|&l| {
            let mu = (l * (l + 1)) as f64;
            band_quadratic(jac, d, gamma, mu) > 0.0 && mu >= vertex
        })
        .unwrap_or(l_max);
    (2 * l_e).clamp(1, l_max)
}

/// Sphere eigenvalues `l(l+1)` for `l = 1..=l_max`.
pub fn sphere_eigenvalues(l_max: usize) -> Vec<f64> {
    (1..=l_max).map(|l| (l * (l + 1)) as f64).collect()
}
