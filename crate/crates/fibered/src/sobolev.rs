//! Sobolev weights as Fourier multipliers on the mixed lattice.

use crate::grid::FrequencyGrid;
use serde::{Deserialize, Serialize};

/// Offset `λ₀` of the fiber-only weight `(ξ² + η² + λ₀)^{s/2}`.
pub const FIBER_WEIGHT_OFFSET: f64 = 1.0;

/// Weight `w_s(ξ,η) = (1 + ξ² + η²)^{s/2}` of the space `H^s(T²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevWeight {
    pub s: f64,
}

impl SobolevWeight {
    pub fn new(s: f64) -> Self {
        SobolevWeight { s }
    }

    /// Full weight `(1 + ξ² + η²)^{s/2}`.
    pub fn full(&self, xi: f64, eta: f64) -> f64 {
        if self.s == 0.0 {
            return 1.0;
        }
        (1.0 + xi * xi + eta * eta).powf(self.s / 2.0)
    }

    /// Fiber-adapted weight `(ξ² + η² + λ₀)^{s/2}`, the symbol of `(Δ_Y + ξ² + λ₀)^{s/2}`.
    pub fn fiber(&self, xi: f64, eta: f64) -> f64 {
        if self.s == 0.0 {
            return 1.0;
        }
        (xi * xi + eta * eta + FIBER_WEIGHT_OFFSET).powf(self.s / 2.0)
    }

    /// Full weight evaluated on every linear index of `grid`.
    pub fn diagonal(&self, grid: &FrequencyGrid) -> Vec<f64> {
        (0..grid.dim())
            .map(|i| {
                let (xi, eta, _) = grid.mode_of(i);
                self.full(xi as f64, eta as f64)
            })
            .collect()
    }
}

/// Symbol of the fiber Laplacian `Δ_Y` at `η`.
pub fn fiber_laplacian(eta: f64) -> f64 {
    eta * eta
}

/// Symbol of the boundary Laplacian `Δ_{∂M}` at `(ξ, η)`.
pub fn boundary_laplacian(xi: f64, eta: f64) -> f64 {
    xi * xi + eta * eta
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_are_reciprocal() {
        for &(xi, eta) in &[(0.0, 0.0), (3.0, -2.0), (10.0, 7.0)] {
            for &s in &[-2.0, -0.5, 1.0, 2.0] {
                let p = SobolevWeight::new(s);
                let m = SobolevWeight::new(-s);
                assert!((p.full(xi, eta) * m.full(xi, eta) - 1.0).abs() < 1e-14);
                assert!((p.fiber(xi, eta) * m.fiber(xi, eta) - 1.0).abs() < 1e-14);
            }
            assert_eq!(SobolevWeight::new(0.0).full(xi, eta), 1.0);
        }
    }
}
