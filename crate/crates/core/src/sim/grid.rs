//! Axisymmetric cell-centred grids on the unit sphere and unit ball, and the
//! conservative surface operators built on them.
//!
//! Surface cell `j` spans `[j, j+1] dtheta`; its area is
//! `2 pi (cos theta_{j-1/2} - cos theta_{j+1/2})`, so cell areas sum to `4 pi`
//! to rounding. Face conductances `sin theta_{j+1/2} / dtheta` vanish at both
//! poles, which closes the flux form without special pole cells.

use crate::error::{Error, Result};
use crate::specfun::legendre_unchecked;

pub const MIN_CELLS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub n: usize,
    pub dtheta: f64,
    /// Cell centres `(j + 1/2) dtheta`.
    pub theta: Vec<f64>,
    pub cos_theta: Vec<f64>,
    /// Cell areas divided by `2 pi`; they sum to 2.
    pub area: Vec<f64>,
    /// `n + 1` face conductances `sin theta_{j-1/2} / dtheta`, zero at the poles.
    pub edge: Vec<f64>,
}

impl SurfaceGrid {
    pub fn new(n: usize) -> Result<SurfaceGrid> {
        if n < MIN_CELLS {
            return Err(Error::InvalidConfig(format!("N_theta = {n} is below {MIN_CELLS}")));
        }
        let dtheta = std::f64::consts::PI / n as f64;
        let theta: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * dtheta).collect();
        let cos_theta = theta.iter().map(|t| t.cos()).collect();
        let face = |k: usize| k as f64 * dtheta;
        // 2 sin(theta_j) sin(dtheta / 2) avoids cancelling cosines
        let half = (0.5 * dtheta).sin();
        let area = theta.iter().map(|t| 2.0 * t.sin() * half).collect();
        let mut edge: Vec<f64> = (0..=n).map(|k| face(k).sin() / dtheta).collect();
        edge[0] = 0.0;
        edge[n] = 0.0;
        Ok(SurfaceGrid { n, dtheta, theta, cos_theta, area, edge })
    }

    pub fn total_area(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.area.iter().sum::<f64>()
    }
}

/// Radial shells of the unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BulkGrid {
    pub n: usize,
    pub dr: f64,
    pub r: Vec<f64>,
    /// `(r_{i+1/2}^3 - r_{i-1/2}^3) / 3`; shell volume over `2 pi` and a surface cell area.
    pub weight: Vec<f64>,
    /// `n + 1` radial face conductances `r_{i-1/2}^2 / dr`; both ends zero.
    pub face: Vec<f64>,
}

impl BulkGrid {
    pub fn new(n: usize) -> Result<BulkGrid> {
        if n < MIN_CELLS {
            return Err(Error::InvalidConfig(format!("N_r = {n} is below {MIN_CELLS}")));
        }
        let dr = 1.0 / n as f64;
        let r = (0..n).map(|i| (i as f64 + 0.5) * dr).collect();
        let weight = (0..n)
            .map(|i| {
                let (lo, hi) = (i as f64 * dr, (i + 1) as f64 * dr);
                (hi.powi(3) - lo.powi(3)) / 3.0
            })
            .collect();
        let mut face: Vec<f64> = (0..=n).map(|i| (i as f64 * dr).powi(2) / dr).collect();
        face[n] = 0.0;
        Ok(BulkGrid { n, dr, r, weight, face })
    }
}

/// `coeff * Delta_Gamma w` in flux form.
pub fn laplace_beltrami_axisym(w: &[f64], coeff: f64, grid: &SurfaceGrid) -> Vec<f64> {
    let n = grid.n;
    (0..n)
        .map(|j| {
            let up = if j + 1 < n { grid.edge[j + 1] * (w[j + 1] - w[j]) } else { 0.0 };
            let down = if j > 0 { grid.edge[j] * (w[j] - w[j - 1]) } else { 0.0 };
            coeff * (up - down) / grid.area[j]
        })
        .collect()
}

/// `int_Gamma w dsigma`.
pub fn surface_integral(w: &[f64], grid: &SurfaceGrid) -> f64 {
    2.0 * std::f64::consts::PI * w.iter().zip(&grid.area).map(|(x, a)| x * a).sum::<f64>()
}

/// `(2l+1)/2 int_0^pi w P_l(cos theta) sin theta dtheta` for `l = 0..=l_max`.
pub fn legendre_amplitudes(w: &[f64], grid: &SurfaceGrid, l_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; l_max + 1];
    for ((&x, &a), &wj) in grid.cos_theta.iter().zip(&grid.area).zip(w) {
        let weight = wj * a;
        let (mut p_prev, mut p) = (1.0, x);
        out[0] += weight;
        for (l, slot) in out.iter_mut().enumerate().skip(1) {
            if l > 1 {
                let lf = l as f64;
                let next = ((2.0 * lf - 1.0) * x * p - (lf - 1.0) * p_prev) / lf;
                p_prev = p;
                p = next;
            }
            *slot += weight * p;
        }
    }
    for (l, a) in out.iter_mut().enumerate() {
        *a *= (2 * l + 1) as f64 / 2.0;
    }
    out
}

/// `P_l(cos theta_j)` on the grid.
pub fn legendre_field(l: usize, grid: &SurfaceGrid) -> Vec<f64> {
    grid.cos_theta.iter().map(|&x| legendre_unchecked(l, x)).collect()
}

/// LU factors of a tridiagonal matrix without pivoting (used on diagonally
/// dominant systems only).
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    lower: Vec<f64>,
    inv_pivot: Vec<f64>,
    upper: Vec<f64>,
}

impl Tridiagonal {
    /// `sub[i]` couples row `i` to `i-1` (`sub[0]` unused), `sup[i]` row `i` to `i+1`.
    pub fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<Tridiagonal> {
        let n = diag.len();
        let mut lower = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut pivot = diag[0];
        for i in 0..n {
            if i > 0 {
                lower[i] = sub[i] * inv_pivot[i - 1];
                pivot = diag[i] - lower[i] * sup[i - 1];
            }
            if !(pivot.abs() > 0.0) || !pivot.is_finite() {
                return Err(Error::InvalidConfig(format!("singular tridiagonal pivot at row {i}")));
            }
            inv_pivot[i] = 1.0 / pivot;
        }
        Ok(Tridiagonal { lower, inv_pivot, upper: sup.to_vec() })
    }

    /// Solves in place.
    pub fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        for i in 1..n {
            x[i] -= self.lower[i] * x[i - 1];
        }
        x[n - 1] *= self.inv_pivot[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.upper[i] * x[i + 1]) * self.inv_pivot[i];
        }
    }

    /// Same as [`Self::solve`] on a strided view `x[offset + k * stride]`.
    pub fn solve_strided(&self, x: &mut [f64], offset: usize, stride: usize) {
        let n = self.inv_pivot.len();
        let at = |k: usize| offset + k * stride;
        for i in 1..n {
            x[at(i)] -= self.lower[i] * x[at(i - 1)];
        }
        x[at(n - 1)] *= self.inv_pivot[n - 1];
        for i in (0..n - 1).rev() {
            x[at(i)] = (x[at(i)] - self.upper[i] * x[at(i + 1)]) * self.inv_pivot[i];
        }
    }
}

/// Backward-Euler surface diffusion: solves `(I - tau Delta_Gamma) w_new = w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDiffusion {
    lu: Tridiagonal,
    area: Vec<f64>,
}

impl SurfaceDiffusion {
    pub fn new(grid: &SurfaceGrid, tau: f64) -> Result<SurfaceDiffusion> {
        let n = grid.n;
        let sub: Vec<f64> = (0..n).map(|j| -tau * grid.edge[j]).collect();
        let sup: Vec<f64> = (0..n).map(|j| -tau * grid.edge[j + 1]).collect();
        let diag: Vec<f64> = (0..n).map(|j| grid.area[j] + tau * (grid.edge[j] + grid.edge[j + 1])).collect();
        Ok(SurfaceDiffusion { lu: Tridiagonal::factor(&sub, &diag, &sup)?, area: grid.area.clone() })
    }

    pub fn apply(&self, w: &mut [f64]) {
        for (x, a) in w.iter_mut().zip(&self.area) {
            *x *= a;
        }
        self.lu.solve(w);
    }
}
