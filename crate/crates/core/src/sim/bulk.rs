//! Backward-Euler bulk diffusion on the axisymmetric unit ball.
//!
//! With cell volumes `w_i a_j` the finite-volume system is
//!
//! ```text
//! (W/dt + D K_r) X M + D dr X K_theta = R
//! ```
//!
//! because the angular face area of shell `i` over its centre radius is
//! exactly `dr`. The operator separates: with the generalized eigenpairs
//! `K_theta phi_k = lambda_k M phi_k` the system splits into one tridiagonal
//! radial solve per angular mode. This is a direct solver; the residual is
//! still checked against the contract tolerance after every solve.

use nalgebra::{DMatrix, SymmetricEigen};

use super::grid::{BulkGrid, SurfaceGrid, Tridiagonal};
use crate::error::{Error, Result};

/// Relative residual the solve must reach.
pub const SOLVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct BulkSolver {
    n_r: usize,
    n_t: usize,
    dt: f64,
    diffusion: f64,
    dr: f64,
    weight: Vec<f64>,
    face: Vec<f64>,
    area: Vec<f64>,
    edge: Vec<f64>,
    phi: DMatrix<f64>,
    phi_t: DMatrix<f64>,
    radial: Vec<Tridiagonal>,
    hat: DMatrix<f64>,
}

impl BulkSolver {
    pub fn new(bulk: &BulkGrid, surface: &SurfaceGrid, diffusion: f64, dt: f64) -> Result<BulkSolver> {
        if !(diffusion > 0.0 && diffusion.is_finite()) {
            return Err(Error::InfiniteDiffusion);
        }
        let (n_r, n_t) = (bulk.n, surface.n);
        let a = &surface.area;
        let e = &surface.edge;
        let sym = DMatrix::from_fn(n_t, n_t, |i, j| {
            if i == j {
                (e[i] + e[i + 1]) / a[i]
            } else if j == i + 1 {
                -e[j] / (a[i] * a[j]).sqrt()
            } else if i == j + 1 {
                -e[i] / (a[i] * a[j]).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(sym);
        let phi = DMatrix::from_fn(n_t, n_t, |j, k| eig.eigenvectors[(j, k)] / a[j].sqrt());
        let phi_t = phi.transpose();

        let sub: Vec<f64> = (0..n_r).map(|i| -diffusion * bulk.face[i]).collect();
        let sup: Vec<f64> = (0..n_r).map(|i| -diffusion * bulk.face[i + 1]).collect();
        let radial = eig
            .eigenvalues
            .iter()
            .map(|&lambda| {
                let shift = diffusion * bulk.dr * lambda.max(0.0);
                let diag: Vec<f64> = (0..n_r)
                    .map(|i| bulk.weight[i] / dt + diffusion * (bulk.face[i] + bulk.face[i + 1]) + shift)
                    .collect();
                Tridiagonal::factor(&sub, &diag, &sup)
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(BulkSolver {
            n_r,
            n_t,
            dt,
            diffusion,
            dr: bulk.dr,
            weight: bulk.weight.clone(),
            face: bulk.face.clone(),
            area: surface.area.clone(),
            edge: surface.edge.clone(),
            phi,
            phi_t,
            radial,
            hat: DMatrix::zeros(n_r, n_t),
        })
    }

    /// `y = A x` for the system matrix.
    pub fn apply(&self, x: &DMatrix<f64>, y: &mut DMatrix<f64>) {
        let (nr, nt, dfn) = (self.n_r, self.n_t, self.diffusion);
        for j in 0..nt {
            for i in 0..nr {
                let c = x[(i, j)];
                let mut acc = self.weight[i] * self.area[j] / self.dt * c;
                let mut radial = 0.0;
                if i > 0 {
                    radial += self.face[i] * (c - x[(i - 1, j)]);
                }
                if i + 1 < nr {
                    radial += self.face[i + 1] * (c - x[(i + 1, j)]);
                }
                let mut angular = 0.0;
                if j > 0 {
                    angular += self.edge[j] * (c - x[(i, j - 1)]);
                }
                if j + 1 < nt {
                    angular += self.edge[j + 1] * (c - x[(i, j + 1)]);
                }
                acc += dfn * (self.area[j] * radial + self.dr * angular);
                y[(i, j)] = acc;
            }
        }
    }

    /// Solves `A x = rhs`.
    pub fn solve(&mut self, rhs: &DMatrix<f64>, x: &mut DMatrix<f64>) -> Result<()> {
        rhs.mul_to(&self.phi, &mut self.hat);
        let n_r = self.n_r;
        let data = self.hat.as_mut_slice();
        for (k, lu) in self.radial.iter().enumerate() {
            lu.solve(&mut data[k * n_r..(k + 1) * n_r]);
        }
        self.hat.mul_to(&self.phi_t, x);

        let mut check = std::mem::take(&mut self.hat);
        self.apply(x, &mut check);
        let residual = (&check - rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
        if !(residual <= SOLVE_TOL) {
            return Err(Error::LinearSolveFailure { residual, iterations: 1 });
        }
        self.hat = check;
        Ok(())
    }
}
