//! IMEX Euler steps: reactions, the non-local cytosol and the Robin flux at
//! the old time level, all diffusion backward Euler.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::bulk::BulkSolver;
use super::grid::{BulkGrid, SurfaceDiffusion, SurfaceGrid};
use crate::error::{Error, Result};
use crate::kinetics::{f_react, q_sorp, KineticParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// `D -> inf`: the cytosol is the mass-budget constant.
    Reduced,
    /// Bulk diffusion in the unit ball with Robin coupling.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// `n_r x n_theta`, full model only.
    pub bulk: Option<DMatrix<f64>>,
}

impl SimState {
    pub fn is_finite(&self) -> bool {
        let surface = self.u.iter().chain(&self.v).all(|x| x.is_finite());
        surface && self.bulk.as_ref().is_none_or(|b| b.iter().all(|x| x.is_finite()))
    }
}

/// Mass-budget cytosol `V_init - (3 / 4 pi) int_Gamma (u + v)` on the unit sphere.
pub fn nonlocal_cytosol(u: &[f64], v: &[f64], grid: &SurfaceGrid, v_init: f64) -> f64 {
    let s: f64 = grid.area.iter().zip(u.iter().zip(v)).map(|(a, (x, y))| a * (x + y)).sum();
    v_init - 1.5 * s
}

/// `V` extrapolated linearly from the two outermost shells to `r = 1`.
pub fn bulk_trace(bulk: &DMatrix<f64>) -> Vec<f64> {
    let n = bulk.nrows();
    (0..bulk.ncols()).map(|j| 1.5 * bulk[(n - 1, j)] - 0.5 * bulk[(n - 2, j)]).collect()
}

/// Reusable stepping machinery for one grid, parameter set and `dt`.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub model: Model,
    pub params: KineticParams,
    pub dt: f64,
    pub surface: SurfaceGrid,
    pub bulk_grid: Option<BulkGrid>,
    diffuse_u: SurfaceDiffusion,
    diffuse_v: SurfaceDiffusion,
    bulk_solver: Option<BulkSolver>,
    rhs: DMatrix<f64>,
    next: DMatrix<f64>,
}

impl Stepper {
    pub fn new(model: Model, params: KineticParams, n_theta: usize, n_r: usize, dt: f64) -> Result<Stepper> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt = {dt} must be positive")));
        }
        let surface = SurfaceGrid::new(n_theta)?;
        let diffuse_u = SurfaceDiffusion::new(&surface, dt)?;
        let diffuse_v = SurfaceDiffusion::new(&surface, dt * params.d)?;
        let (bulk_grid, bulk_solver) = match model {
            Model::Reduced => (None, None),
            Model::Full => {
                let diffusion = params.cyto_diffusion.finite().ok_or(Error::InfiniteDiffusion)?;
                let grid = BulkGrid::new(n_r)?;
                let solver = BulkSolver::new(&grid, &surface, diffusion, dt)?;
                (Some(grid), Some(solver))
            }
        };
        let (rows, cols) = if model == Model::Full { (n_r, n_theta) } else { (0, 0) };
        Ok(Stepper {
            model,
            params,
            dt,
            surface,
            bulk_grid,
            diffuse_u,
            diffuse_v,
            bulk_solver,
            rhs: DMatrix::zeros(rows, cols),
            next: DMatrix::zeros(rows, cols),
        })
    }

    /// Cytosol seen by the membrane: the non-local constant or the bulk trace.
    pub fn membrane_cytosol(&self, state: &SimState) -> Vec<f64> {
        match &state.bulk {
            Some(b) => bulk_trace(b),
            None => vec![nonlocal_cytosol(&state.u, &state.v, &self.surface, self.params.v_init); self.surface.n],
        }
    }

    /// `int_B V + int_Gamma (u + v)`.
    pub fn mass(&self, state: &SimState) -> f64 {
        let two_pi = 2.0 * std::f64::consts::PI;
        let a = &self.surface.area;
        let surface: f64 = a.iter().zip(state.u.iter().zip(&state.v)).map(|(a, (x, y))| a * (x + y)).sum();
        let bulk = match (&state.bulk, &self.bulk_grid) {
            (Some(b), Some(g)) => {
                let mut s = 0.0;
                for j in 0..b.ncols() {
                    let col: f64 = (0..b.nrows()).map(|i| g.weight[i] * b[(i, j)]).sum();
                    s += a[j] * col;
                }
                s
            }
            _ => nonlocal_cytosol(&state.u, &state.v, &self.surface, self.params.v_init) * 2.0 / 3.0,
        };
        two_pi * (surface + bulk)
    }

    pub fn step(&mut self, state: &mut SimState) -> Result<()> {
        let p = self.params;
        let scale = self.dt * p.gamma;
        let cyto = self.membrane_cytosol(state);
        let n = self.surface.n;
        let mut flux = vec![0.0; n];
        for j in 0..n {
            let (u, v) = (state.u[j], state.v[j]);
            let f = f_react(u, v, &p);
            let q = q_sorp(u, v, cyto[j], &p);
            flux[j] = q;
            state.u[j] = u + scale * f;
            state.v[j] = v + scale * (q - f);
        }
        self.diffuse_u.apply(&mut state.u);
        self.diffuse_v.apply(&mut state.v);

        if let (Some(bulk), Some(solver), Some(grid)) =
            (state.bulk.as_mut(), self.bulk_solver.as_mut(), &self.bulk_grid)
        {
            let (n_r, dt) = (grid.n, self.dt);
            let a = &self.surface.area;
            for j in 0..n {
                for i in 0..n_r {
                    self.rhs[(i, j)] = grid.weight[i] * a[j] / dt * bulk[(i, j)];
                }
                self.rhs[(n_r - 1, j)] -= p.gamma * flux[j] * a[j];
            }
            solver.solve(&self.rhs, &mut self.next)?;
            std::mem::swap(bulk, &mut self.next);
        }
        Ok(())
    }
}

/// One reduced-model step on fresh operators.
pub fn step_reduced(u: &[f64], v: &[f64], p: &KineticParams, dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut stepper = Stepper::new(Model::Reduced, *p, u.len(), 0, dt)?;
    let mut state = SimState { u: u.to_vec(), v: v.to_vec(), bulk: None };
    stepper.step(&mut state)?;
    Ok((state.u, state.v))
}

/// One full-model step on fresh operators; `bulk` is `n_r x n_theta`.
pub fn step_full(
    u: &[f64],
    v: &[f64],
    bulk: &DMatrix<f64>,
    p: &KineticParams,
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>, DMatrix<f64>)> {
    let mut stepper = Stepper::new(Model::Full, *p, u.len(), bulk.nrows(), dt)?;
    let mut state = SimState { u: u.to_vec(), v: v.to_vec(), bulk: Some(bulk.clone()) };
    stepper.step(&mut state)?;
    Ok((state.u, state.v, state.bulk.expect("full model keeps its bulk field")))
}
