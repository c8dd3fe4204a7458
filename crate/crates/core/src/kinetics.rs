//! Constitutive laws of the GTPase cycle, their Jacobian, and the homogeneous
//! steady states on the unit sphere.
//!
//! ```text
//! f(u, v)    = (a1 + (a3 - a1) u / (a2 + u)) v - a4 u / (a5 + u)
//! q(u, v, V) = a6 V (1 - (u + v))_+ - a_{-6} v
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio of cytosolic to lateral membrane diffusion, `D`.
///
/// Serialized as a number, or as the string `"inf"` for the non-local limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CytoDiffusion {
    Finite(f64),
    Infinite,
}

impl Serialize for CytoDiffusion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CytoDiffusion::Finite(d) => s.serialize_f64(*d),
            CytoDiffusion::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for CytoDiffusion {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(x) => Ok(CytoDiffusion::Finite(x)),
            Raw::Tag(t) => match t.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "infinite" => Ok(CytoDiffusion::Infinite),
                other => Err(serde::de::Error::custom(format!("D: expected a number or \"inf\", got \"{other}\""))),
            },
        }
    }
}

impl CytoDiffusion {
    pub fn finite(self) -> Option<f64> {
        match self {
            CytoDiffusion::Finite(d) => Some(d),
            CytoDiffusion::Infinite => None,
        }
    }
}

/// Nondimensional model constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KineticParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
    pub a6: f64,
    pub a_m6: f64,
    pub gamma: f64,
    /// Lateral diffusion ratio `d_v / d_u`.
    pub d: f64,
    #[serde(rename = "D")]
    pub cyto_diffusion: CytoDiffusion,
    #[serde(rename = "V_init")]
    pub v_init: f64,
}

impl Default for KineticParams {
    /// Reference constants with `D = 100`.
    fn default() -> Self {
        KineticParams {
            a1: 0.02,
            a2: 20.0,
            a3: 160.0,
            a4: 1.0,
            a5: 0.5,
            a6: 0.36,
            a_m6: 5.0,
            gamma: 400.0,
            d: 1.0,
            cyto_diffusion: CytoDiffusion::Finite(100.0),
            v_init: 5.1,
        }
    }
}

impl KineticParams {
    /// Constants of the rich-dynamics regime.
    pub fn rich_dynamics() -> Self {
        KineticParams { gamma: 2000.0, a1: 0.001, a_m6: 10.3757, v_init: 10.1, ..Self::default() }
    }

    pub fn with_diffusion(mut self, d: CytoDiffusion) -> Self {
        self.cyto_diffusion = d;
        self
    }

    /// Every violated invariant, as `field: message`.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let positive = [
            ("a1", self.a1),
            ("a2", self.a2),
            ("a3", self.a3),
            ("a4", self.a4),
            ("a5", self.a5),
            ("a6", self.a6),
            ("a_m6", self.a_m6),
            ("gamma", self.gamma),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                out.push(format!("{name}: must be a finite positive number, got {value}"));
            }
        }
        if !(self.d >= 0.0 && self.d.is_finite()) {
            out.push(format!("d: must be a finite nonnegative number, got {}", self.d));
        }
        if let CytoDiffusion::Finite(dd) = self.cyto_diffusion {
            if !(dd > 0.0 && dd.is_finite()) {
                out.push(format!("D: must be positive or \"inf\", got {dd}"));
            }
        }
        if !(self.v_init >= 0.0 && self.v_init.is_finite()) {
            out.push(format!("V_init: must be a finite nonnegative number, got {}", self.v_init));
        }
        if self.a1 >= self.a3 {
            out.push(format!("a1: must be smaller than a3 ({} >= {})", self.a1, self.a3));
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

/// Activation minus inactivation on the membrane.
pub fn f_react(u: f64, v: f64, p: &KineticParams) -> f64 {
    (p.a1 + (p.a3 - p.a1) * u / (p.a2 + u)) * v - p.a4 * u / (p.a5 + u)
}

/// Attachment minus detachment flux.
pub fn q_sorp(u: f64, v: f64, cyto: f64, p: &KineticParams) -> f64 {
    p.a6 * cyto * (1.0 - (u + v)).max(0.0) - p.a_m6 * v
}

/// Partial derivatives of `f` and `q` at a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian {
    pub f_u: f64,
    pub f_v: f64,
    pub q_u: f64,
    pub q_v: f64,
    /// `dq/dV`.
    pub q_cyto: f64,
}

impl Jacobian {
    /// `f_u q_v - f_v q_u`.
    pub fn det(&self) -> f64 {
        self.f_u * self.q_v - self.f_v * self.q_u
    }

    pub fn scaled(&self, factor: f64) -> Jacobian {
        Jacobian {
            f_u: self.f_u * factor,
            f_v: self.f_v * factor,
            q_u: self.q_u * factor,
            q_v: self.q_v * factor,
            q_cyto: self.q_cyto * factor,
        }
    }
}

const KINK_BAND: f64 = 1e-12;

/// True when `u + v` sits on the saturation kink of `q`.
pub fn on_kink(u: f64, v: f64) -> bool {
    (u + v - 1.0).abs() < KINK_BAND
}

/// Analytic Jacobian. Uses the unclamped branch of `q` for `u + v <= 1`
/// (including the kink itself, see [`on_kink`]) and the clamped branch beyond.
pub fn jacobian(u: f64, v: f64, cyto: f64, p: &KineticParams) -> Jacobian {
    let f_u = (p.a3 - p.a1) * p.a2 / (p.a2 + u).powi(2) * v - p.a4 * p.a5 / (p.a5 + u).powi(2);
    let f_v = p.a1 + (p.a3 - p.a1) * u / (p.a2 + u);
    let clamped = u + v > 1.0 && !on_kink(u, v);
    let (q_u, q_v, q_cyto) = if clamped {
        (0.0, -p.a_m6, 0.0)
    } else {
        let attach = -p.a6 * cyto;
        (attach, attach - p.a_m6, p.a6 * (1.0 - u - v))
    };
    Jacobian { f_u, f_v, q_u, q_v, q_cyto }
}

/// A spatially homogeneous steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub u: f64,
    pub v: f64,
    pub cyto: f64,
    pub jac: Jacobian,
    pub residual_f: f64,
    pub residual_q: f64,
    pub kink_warning: bool,
}

impl Equilibrium {
    pub fn at(u: f64, v: f64, cyto: f64, p: &KineticParams) -> Equilibrium {
        Equilibrium {
            u,
            v,
            cyto,
            jac: jacobian(u, v, cyto, p),
            residual_f: f_react(u, v, p),
            residual_q: q_sorp(u, v, cyto, p),
            kink_warning: on_kink(u, v),
        }
    }

    /// A state carrying only a prescribed Jacobian, for linear-theory studies.
    pub fn synthetic(jac: Jacobian) -> Equilibrium {
        Equilibrium { u: 0.0, v: 0.0, cyto: 0.0, jac, residual_f: 0.0, residual_q: 0.0, kink_warning: false }
    }

    pub fn sign_conditions(&self) -> SignConditions {
        verify_sign_conditions(&self.jac)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignConditions {
    pub f_v_nonneg: bool,
    pub q_v_nonpos: bool,
    pub q_v_le_q_u: bool,
    pub q_cyto_nonneg: bool,
    pub f_v_pos: bool,
    pub q_v_neg: bool,
    pub q_cyto_pos: bool,
}

impl SignConditions {
    pub fn weak(&self) -> bool {
        self.f_v_nonneg && self.q_v_nonpos && self.q_v_le_q_u && self.q_cyto_nonneg
    }

    /// Weak conditions plus the strict inequalities on `f_v`, `q_v`, `q_V`.
    pub fn strict(&self) -> bool {
        self.weak() && self.f_v_pos && self.q_v_neg && self.q_cyto_pos
    }

    pub(crate) fn describe_strict_failures(&self) -> String {
        let checks = [
            (self.f_v_nonneg, "f_v >= 0"),
            (self.q_v_nonpos, "q_v <= 0"),
            (self.q_v_le_q_u, "q_v <= q_u"),
            (self.q_cyto_nonneg, "q_V >= 0"),
            (self.f_v_pos, "f_v > 0"),
            (self.q_v_neg, "q_v < 0"),
            (self.q_cyto_pos, "q_V > 0"),
        ];
        checks.iter().filter(|(ok, _)| !ok).map(|(_, name)| *name).collect::<Vec<_>>().join(", ")
    }
}

pub fn verify_sign_conditions(jac: &Jacobian) -> SignConditions {
    SignConditions {
        f_v_nonneg: jac.f_v >= 0.0,
        q_v_nonpos: jac.q_v <= 0.0,
        q_v_le_q_u: jac.q_v <= jac.q_u,
        q_cyto_nonneg: jac.q_cyto >= 0.0,
        f_v_pos: jac.f_v > 0.0,
        q_v_neg: jac.q_v < 0.0,
        q_cyto_pos: jac.q_cyto > 0.0,
    }
}

/// `S = (f_u q_v - f_v q_u)/3 + q_V (f_v - f_u)`; homogeneous stability iff `S > 0`.
pub fn stability_value_s(jac: &Jacobian) -> f64 {
    jac.det() / 3.0 + jac.q_cyto * (jac.f_v - jac.f_u)
}

/// `c |Gamma|` on the unit sphere: `4 pi / (4 pi / 3)`.
pub const SPHERE_C_AREA: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSearch {
    pub u_max: f64,
    pub grid_points: usize,
    pub merge_tol: f64,
}

impl Default for EquilibriumSearch {
    fn default() -> Self {
        EquilibriumSearch { u_max: 1.0, grid_points: 10_000, merge_tol: 1e-8 }
    }
}

/// `v` on the nullcline `f(u, v) = 0`.
pub fn nullcline_v(u: f64, p: &KineticParams) -> f64 {
    p.a4 * u / ((p.a5 + u) * (p.a1 + (p.a3 - p.a1) * u / (p.a2 + u)))
}

fn mass_residual(u: f64, p: &KineticParams) -> f64 {
    let v = nullcline_v(u, p);
    q_sorp(u, v, p.v_init - SPHERE_C_AREA * (u + v), p)
}

/// Homogeneous steady states with `u in [0, u_max]` under the unit-sphere mass budget
/// `V* = V_init - 3 (u* + v*)`, sorted by `u*`. An empty list means none was found.
pub fn find_equilibria(p: &KineticParams, search: &EquilibriumSearch) -> Result<Vec<Equilibrium>> {
    if !(search.u_max > 0.0 && search.u_max.is_finite()) {
        return Err(Error::InvalidSearchRange(search.u_max));
    }
    let n = search.grid_points.max(2);
    let grid: Vec<f64> = (0..=n).map(|i| search.u_max * i as f64 / n as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&u| mass_residual(u, p)).collect();

    let mut roots = Vec::new();
    for i in 0..n {
        let (a, b) = (grid[i], grid[i + 1]);
        let (ga, gb) = (values[i], values[i + 1]);
        if ga == 0.0 {
            roots.push(a);
        } else if ga * gb < 0.0 {
            roots.push(bisect(|u| mass_residual(u, p), a, b, ga));
        }
    }
    if values[n] == 0.0 {
        roots.push(grid[n]);
    }

    let mut merged: Vec<f64> = Vec::new();
    for root in roots {
        if merged.last().is_none_or(|&last| (root - last).abs() > search.merge_tol) {
            merged.push(root);
        }
    }
    Ok(merged
        .into_iter()
        .filter_map(|u| {
            let v = nullcline_v(u, p);
            let cyto = p.v_init - SPHERE_C_AREA * (u + v);
            (cyto >= 0.0 && v >= 0.0).then(|| Equilibrium::at(u, v, cyto, p))
        })
        .collect())
}

/// Bisection down to adjacent floating-point numbers.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut g_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    if g(hi).abs() < g_lo.abs() {
        hi
    } else {
        lo
    }
}

/// The first equilibrium satisfying the strict sign conditions, else the first one.
pub fn primary_equilibrium(list: &[Equilibrium]) -> Option<Equilibrium> {
    list.iter().find(|e| e.sign_conditions().strict()).or_else(|| list.first()).copied()
}
