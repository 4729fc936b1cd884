//! Truncated mixed Fourier lattice on the torus `S¹ₓ × S¹ᵧ` and its spatial sampling grid.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Square window of retained frequencies `ξ ∈ [−nx, nx]`, `η ∈ [−ny, ny]` carrying `rank`
/// vector components, together with the number of spatial samples per circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub n_base_modes: usize,
    pub n_fiber_modes: usize,
    pub n_base_points: usize,
    pub n_fiber_points: usize,
    pub rank: usize,
}

impl FrequencyGrid {
    /// Grid with the minimal non-aliasing sampling `2·modes + 1` on each circle.
    pub fn new(nx: usize, ny: usize, rank: usize) -> Self {
        FrequencyGrid {
            n_base_modes: nx,
            n_fiber_modes: ny,
            n_base_points: 2 * nx + 1,
            n_fiber_points: 2 * ny + 1,
            rank: rank.max(1),
        }
    }

    /// Grid with explicit sample counts; rejects aliasing sample counts.
    pub fn with_points(nx: usize, ny: usize, px: usize, py: usize, rank: usize) -> Result<Self> {
        if px < 2 * nx + 1 || py < 2 * ny + 1 {
            return Err(Error::Dimension(format!(
                "sample counts ({px},{py}) alias modes ({nx},{ny})"
            )));
        }
        if rank == 0 {
            return Err(Error::Dimension("rank must be at least 1".into()));
        }
        Ok(FrequencyGrid { n_base_modes: nx, n_fiber_modes: ny, n_base_points: px, n_fiber_points: py, rank })
    }

    pub fn nx(&self) -> i64 {
        self.n_base_modes as i64
    }

    pub fn ny(&self) -> i64 {
        self.n_fiber_modes as i64
    }

    /// Same window with a different number of components.
    pub fn with_rank(&self, rank: usize) -> Self {
        FrequencyGrid { rank, ..*self }
    }

    /// Same component count, window enlarged by `(mx, my)` modes and minimal sampling.
    pub fn enlarged(&self, mx: usize, my: usize) -> Self {
        FrequencyGrid::new(self.n_base_modes + mx, self.n_fiber_modes + my, self.rank)
    }

    pub fn base_len(&self) -> usize {
        2 * self.n_base_modes + 1
    }

    pub fn fiber_len(&self) -> usize {
        2 * self.n_fiber_modes + 1
    }

    /// Number of retained scalar modes `(2Nx+1)(2Ny+1)`.
    pub fn n_modes(&self) -> usize {
        self.base_len() * self.fiber_len()
    }

    /// Total dimension `rank·(2Nx+1)·(2Ny+1)`.
    pub fn dim(&self) -> usize {
        self.n_modes() * self.rank
    }

    pub fn contains(&self, xi: i64, eta: i64) -> bool {
        xi.abs() <= self.nx() && eta.abs() <= self.ny()
    }

    /// Scalar mode index of `(ξ, η)`; the caller guarantees containment.
    pub fn mode_index(&self, xi: i64, eta: i64) -> usize {
        ((xi + self.nx()) as usize) * self.fiber_len() + (eta + self.ny()) as usize
    }

    /// Linear index of component `c` of mode `(ξ, η)`.
    pub fn index(&self, xi: i64, eta: i64, c: usize) -> usize {
        self.mode_index(xi, eta) * self.rank + c
    }

    pub fn try_index(&self, xi: i64, eta: i64, c: usize) -> Option<usize> {
        if self.contains(xi, eta) && c < self.rank {
            Some(self.index(xi, eta, c))
        } else {
            None
        }
    }

    /// Inverse of [`FrequencyGrid::index`]: `(ξ, η, c)`.
    pub fn mode_of(&self, idx: usize) -> (i64, i64, usize) {
        let c = idx % self.rank;
        let m = idx / self.rank;
        let xi = (m / self.fiber_len()) as i64 - self.nx();
        let eta = (m % self.fiber_len()) as i64 - self.ny();
        (xi, eta, c)
    }

    /// All retained modes in index order.
    pub fn modes(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        let (nx, ny) = (self.nx(), self.ny());
        (-nx..=nx).flat_map(move |xi| (-ny..=ny).map(move |eta| (xi, eta)))
    }

    /// Spatial sample points `x_j = 2πj/Pₓ`.
    pub fn base_points(&self) -> Vec<f64> {
        circle_points(self.n_base_points)
    }

    /// Spatial sample points `y_j = 2πj/P_y`.
    pub fn fiber_points(&self) -> Vec<f64> {
        circle_points(self.n_fiber_points)
    }

    /// Max-norm `max(|ξ|, |η|)` of the mode carried by linear index `idx`.
    pub fn shell_of(&self, idx: usize) -> i64 {
        let (xi, eta, _) = self.mode_of(idx);
        xi.abs().max(eta.abs())
    }

    /// Fiber-only grid (`Nx = 0`) with the same fiber window and rank.
    pub fn fiber_grid(&self) -> FrequencyGrid {
        FrequencyGrid::new(0, self.n_fiber_modes, self.rank)
    }
}

/// Equispaced points `2πj/p`, `j = 0..p`.
pub fn circle_points(p: usize) -> Vec<f64> {
    (0..p).map(|j| 2.0 * std::f64::consts::PI * j as f64 / p as f64).collect()
}

/// Normalized 1-D Fourier coefficients `ĉ(k) = (1/p) Σ_j f(x_j) e^{−ikx_j}` for `|k| ≤ kmax`,
/// returned in order `k = −kmax..=kmax`. Requires `p ≥ 2·kmax + 1`.
pub fn fourier_coefficients_1d(samples: &[Complex64], kmax: usize) -> Vec<Complex64> {
    let p = samples.len();
    assert!(p > 2 * kmax, "fourier_coefficients_1d: {p} samples alias {kmax} modes");
    let mut buf = samples.to_vec();
    if p > 1 {
        let mut planner = FftPlanner::<f64>::new();
        planner.plan_fft_forward(p).process(&mut buf);
    }
    let scale = 1.0 / p as f64;
    (-(kmax as i64)..=kmax as i64)
        .map(|k| buf[k.rem_euclid(p as i64) as usize] * scale)
        .collect()
}

/// Forward transform of spatial samples on the product grid to retained mixed Fourier
/// coefficients. Sample layout: `((jx·P_y) + jy)·rank + c`; output uses the grid's linear index.
pub fn forward_transform(grid: &FrequencyGrid, samples: &[Complex64]) -> Result<Vec<Complex64>> {
    let (px, py, r) = (grid.n_base_points, grid.n_fiber_points, grid.rank);
    if samples.len() != px * py * r {
        return Err(Error::Dimension(format!(
            "forward_transform: expected {} samples, got {}",
            px * py * r,
            samples.len()
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fx = planner.plan_fft_forward(px);
    let fy = planner.plan_fft_forward(py);
    let mut out = vec![Complex64::new(0.0, 0.0); grid.dim()];
    let scale = 1.0 / (px * py) as f64;
    for c in 0..r {
        let mut plane: Vec<Complex64> = (0..px * py).map(|j| samples[j * r + c]).collect();
        for row in plane.chunks_mut(py) {
            fy.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); px];
        for jy in 0..py {
            for jx in 0..px {
                col[jx] = plane[jx * py + jy];
            }
            fx.process(&mut col);
            for jx in 0..px {
                plane[jx * py + jy] = col[jx];
            }
        }
        for (xi, eta) in grid.modes() {
            let kx = xi.rem_euclid(px as i64) as usize;
            let ky = eta.rem_euclid(py as i64) as usize;
            out[grid.index(xi, eta, c)] = plane[kx * py + ky] * scale;
        }
    }
    Ok(out)
}

/// Inverse of [`forward_transform`]: synthesizes `Σ ĉ(ξ,η) e^{i(xξ+yη)}` on the sample grid.
pub fn inverse_transform(grid: &FrequencyGrid, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let (px, py, r) = (grid.n_base_points, grid.n_fiber_points, grid.rank);
    if coeffs.len() != grid.dim() {
        return Err(Error::Dimension(format!(
            "inverse_transform: expected {} coefficients, got {}",
            grid.dim(),
            coeffs.len()
        )));
    }
    let mut planner = FftPlanner::<f64>::new();
    let fx = planner.plan_fft_inverse(px);
    let fy = planner.plan_fft_inverse(py);
    let mut out = vec![Complex64::new(0.0, 0.0); px * py * r];
    for c in 0..r {
        let mut plane = vec![Complex64::new(0.0, 0.0); px * py];
        for (xi, eta) in grid.modes() {
            let kx = xi.rem_euclid(px as i64) as usize;
            let ky = eta.rem_euclid(py as i64) as usize;
            plane[kx * py + ky] = coeffs[grid.index(xi, eta, c)];
        }
        for row in plane.chunks_mut(py) {
            fy.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); px];
        for jy in 0..py {
            for jx in 0..px {
                col[jx] = plane[jx * py + jy];
            }
            fx.process(&mut col);
            for jx in 0..px {
                plane[jx * py + jy] = col[jx];
            }
        }
        for j in 0..px * py {
            out[j * r + c] = plane[j];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn index_round_trip() {
        let g = FrequencyGrid::new(3, 2, 2);
        for i in 0..g.dim() {
            let (xi, eta, comp) = g.mode_of(i);
            assert_eq!(g.index(xi, eta, comp), i);
        }
        assert_eq!(g.dim(), 2 * 7 * 5);
    }

    #[test]
    fn constant_maps_to_zero_mode() {
        let g = FrequencyGrid::new(3, 4, 1);
        let samples = vec![c(1.0, 0.0); g.n_base_points * g.n_fiber_points];
        let coef = forward_transform(&g, &samples).unwrap();
        for (i, v) in coef.iter().enumerate() {
            let expect = if i == g.index(0, 0, 0) { 1.0 } else { 0.0 };
            assert!((v - c(expect, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn pure_mode() {
        let g = FrequencyGrid::new(3, 4, 1);
        let (xs, ys) = (g.base_points(), g.fiber_points());
        let mut samples = Vec::new();
        for &x in &xs {
            for &y in &ys {
                samples.push(Complex64::from_polar(1.0, x + 2.0 * y));
            }
        }
        let coef = forward_transform(&g, &samples).unwrap();
        assert!((coef[g.index(1, 2, 0)] - c(1.0, 0.0)).norm() < 1e-13);
        let total: f64 = coef.iter().map(|v| v.norm_sqr()).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let g = FrequencyGrid::new(2, 2, 1);
        assert!(forward_transform(&g, &[c(1.0, 0.0); 3]).is_err());
        assert!(FrequencyGrid::with_points(3, 3, 6, 7, 1).is_err());
    }
}
