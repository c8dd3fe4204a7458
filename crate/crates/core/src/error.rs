use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("order l = {l} exceeds the supported cap {cap}")]
    InvalidOrder { l: usize, cap: usize },

    #[error("argument r = {r} exceeds the overflow-safe threshold {limit}; use the Bessel ratio instead")]
    OverflowRisk { r: f64, limit: f64 },

    #[error("continued fraction did not converge after {iterations} iterations (l = {l}, r = {r})")]
    NoConvergence { l: usize, r: f64, iterations: usize },

    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid equilibrium search range u_max = {0}")]
    InvalidSearchRange(f64),

    #[error("strict sign conditions violated: {0}")]
    SignConditionViolation(String),

    #[error("the full-system dispersion relation needs a finite cytosolic diffusion coefficient")]
    InfiniteDiffusion,

    #[error("could not bracket a root of the dispersion function for l = {l}: omega_hi = {omega_hi}")]
    BracketFailure { l: usize, omega_hi: f64 },

    #[error("non-positive dimensional quantity `{0}`")]
    UnitViolation(&'static str),

    #[error("bulk linear solve missed its tolerance: relative residual {residual:e} after {iterations} solve(s)")]
    LinearSolveFailure { residual: f64, iterations: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite state at t = {t} (step {step}, dt = {dt}); {detail}")]
    NumericalBlowup { t: f64, step: usize, dt: f64, detail: String },

    #[error("growth-rate window error: {0}")]
    Window(String),
}
