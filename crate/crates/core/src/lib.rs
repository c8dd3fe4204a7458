//! Bulk-surface GTPase polarity model: kinetics, equilibria, linear stability
//! of the full and the non-local reduced system, and axisymmetric simulation.

// NaN must fail range checks, so `!(x > 0.0)` is intentional throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kinetics;
pub mod linstab;
pub mod nondim;
pub mod par;
pub mod rng;
pub mod scan;
pub mod sim;
pub mod specfun;

pub use error::{Error, Result};
pub use kinetics::{CytoDiffusion, Equilibrium, Jacobian, KineticParams};
pub use par::Execution;
