//! Conversion between the dimensional GTPase model (SI units) and
//! [`KineticParams`].
//!
//! Lengths are measured against the unit length `I = 1 m`, and the cell radius
//! `R` fixes `gamma = (R / I)^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetics::{CytoDiffusion, KineticParams};

/// The unit length, in metres.
pub const UNIT_LENGTH: f64 = 1.0;

/// Dimensional constants. Field names on the wire carry their SI unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionalParams {
    #[serde(rename = "k1_m2_per_mol_s")]
    pub k1: f64,
    #[serde(rename = "k2_m2_per_mol_s")]
    pub k2: f64,
    #[serde(rename = "k3_mol_per_m2_s")]
    pub k3: f64,
    #[serde(rename = "k4_mol_per_m2")]
    pub k4: f64,
    #[serde(rename = "K5_m2_per_mol")]
    pub k5: f64,
    #[serde(rename = "g0_mol_per_m2")]
    pub g0: f64,
    #[serde(rename = "b6_m2_per_mol_s")]
    pub b6: f64,
    #[serde(rename = "b_m6_per_s")]
    pub b_m6: f64,
    #[serde(rename = "D_m2_per_s")]
    pub d_cyto: f64,
    #[serde(rename = "du_m2_per_s")]
    pub du: f64,
    #[serde(rename = "dv_m2_per_s")]
    pub dv: f64,
    #[serde(rename = "c_max_mol_per_m2")]
    pub c_max: f64,
    #[serde(rename = "R_m")]
    pub radius: f64,
    #[serde(rename = "vol_B_m3")]
    pub vol_b: f64,
    #[serde(rename = "area_Gamma_m2")]
    pub area_gamma: f64,
    /// Reference cytosolic concentration; maps to `V_init = R V_ref / c_max`.
    /// When absent the nondimensional default is kept.
    #[serde(rename = "V_ref_mol_per_m3", default, skip_serializing_if = "Option::is_none")]
    pub v_ref: Option<f64>,
}

impl DimensionalParams {
    fn check(&self) -> Result<()> {
        let fields = [
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("k4", self.k4),
            ("K5", self.k5),
            ("g0", self.g0),
            ("b6", self.b6),
            ("b_m6", self.b_m6),
            ("D", self.d_cyto),
            ("du", self.du),
            ("dv", self.dv),
            ("c_max", self.c_max),
            ("R", self.radius),
            ("vol_B", self.vol_b),
            ("area_Gamma", self.area_gamma),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::UnitViolation(name));
            }
        }
        if let Some(v) = self.v_ref {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::UnitViolation("V_ref"));
            }
        }
        Ok(())
    }
}

pub fn nondimensionalize(dp: &DimensionalParams) -> Result<KineticParams> {
    dp.check()?;
    let l2 = UNIT_LENGTH * UNIT_LENGTH;
    let a1 = l2 * dp.k1 * dp.g0 / dp.du;
    Ok(KineticParams {
        a1,
        a2: 1.0 / (dp.k5 * dp.c_max),
        a3: dp.k2 / dp.k1 * a1,
        a4: l2 * dp.k3 / (dp.du * dp.c_max),
        a5: dp.k4 / dp.c_max,
        a6: l2 * dp.b6 * dp.c_max * dp.vol_b / (dp.du * dp.area_gamma * dp.radius),
        a_m6: l2 * dp.b_m6 / dp.du,
        gamma: (dp.radius / UNIT_LENGTH).powi(2),
        d: dp.dv / dp.du,
        cyto_diffusion: CytoDiffusion::Finite(dp.d_cyto / dp.du),
        v_init: match dp.v_ref {
            Some(v) => dp.radius * v / dp.c_max,
            None => KineticParams::default().v_init,
        },
    })
}

/// Scales left free by the nondimensional groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchors {
    pub du: f64,
    pub c_max: f64,
    pub vol_b: f64,
    pub area_gamma: f64,
    /// Only the product `k1 g0` is identified; `k1` splits it.
    pub k1: f64,
}

/// Inverse of [`nondimensionalize`] given the anchor scales. The radius is
/// recovered as `R = sqrt(gamma) I`.
pub fn redimensionalize(p: &KineticParams, anchors: &Anchors) -> Result<DimensionalParams> {
    let a = anchors;
    for (name, value) in
        [("du", a.du), ("c_max", a.c_max), ("vol_B", a.vol_b), ("area_Gamma", a.area_gamma), ("k1", a.k1)]
    {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::UnitViolation(name));
        }
    }
    let d_ratio = p.cyto_diffusion.finite().ok_or(Error::UnitViolation("D"))?;
    let l2 = UNIT_LENGTH * UNIT_LENGTH;
    let radius = p.gamma.sqrt() * UNIT_LENGTH;
    let dp = DimensionalParams {
        k1: a.k1,
        k2: a.k1 * p.a3 / p.a1,
        k3: p.a4 * a.du * a.c_max / l2,
        k4: p.a5 * a.c_max,
        k5: 1.0 / (p.a2 * a.c_max),
        g0: p.a1 * a.du / (l2 * a.k1),
        b6: p.a6 * a.du * a.area_gamma * radius / (l2 * a.c_max * a.vol_b),
        b_m6: p.a_m6 * a.du / l2,
        d_cyto: d_ratio * a.du,
        du: a.du,
        dv: p.d * a.du,
        c_max: a.c_max,
        radius,
        vol_b: a.vol_b,
        area_gamma: a.area_gamma,
        v_ref: Some(p.v_init * a.c_max / radius),
    };
    dp.check()?;
    Ok(dp)
}
