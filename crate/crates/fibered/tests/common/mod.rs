//! Independent oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use fibered::{Complex64, FrequencyGrid};
use nalgebra::DMatrix;
use std::f64::consts::PI;

pub fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Dense matrix from a closure over (target mode, source mode).
pub fn assemble(g: &FrequencyGrid, entry: impl Fn((i64, i64), (i64, i64)) -> Complex64) -> DMatrix<Complex64> {
    let (nx, ny) = (g.nx() as i64, g.ny() as i64);
    let mut m = DMatrix::zeros(g.dim(), g.dim());
    for sx in -nx..=nx {
        for sy in -ny..=ny {
            for tx in -nx..=nx {
                for ty in -ny..=ny {
                    let v = entry((tx, ty), (sx, sy));
                    if v != c(0.0) {
                        m[(g.index(tx, ty, 0), g.index(sx, sy, 0))] = v;
                    }
                }
            }
        }
    }
    m
}

pub fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(Bu)(x, ·) = (0.8 cos x Π₊ + 0.5 Π₋) u(x, ·)`: `cos x` couples `ξ ↔ ξ ± 1` with weight 0.4.
pub fn family1_oracle(g: &FrequencyGrid) -> DMatrix<Complex64> {
    assemble(g, |(tx, ty), (sx, sy)| {
        if ty != sy {
            return c(0.0);
        }
        if sy >= 0 {
            c(if (tx - sx).abs() == 1 { 0.4 } else { 0.0 })
        } else {
            c(if tx == sx { 0.5 } else { 0.0 })
        }
    })
}

/// `a = (2 + cos x)/3 · h(ξ, η)`, `h = (1 + ξ/|ζ|)/2`, `h(0, 0) = 1` (value at `ξ = +1`).
pub fn smooth1_oracle(g: &FrequencyGrid) -> DMatrix<Complex64> {
    let h = |xi: i64, eta: i64| {
        if xi == 0 && eta == 0 {
            1.0
        } else {
            let (a, b) = (xi as f64, eta as f64);
            (1.0 + a / (a * a + b * b).sqrt()) / 2.0
        }
    };
    assemble(g, |(tx, ty), (sx, sy)| {
        if ty != sy {
            return c(0.0);
        }
        match tx - sx {
            0 => c(2.0 / 3.0 * h(sx, sy)),
            1 | -1 => c(h(sx, sy) / 6.0),
            _ => c(0.0),
        }
    })
}

/// Dense block `[[s, T*], [T, −s]] + iτ` for the shift `e_η ↦ e_{η+n}` on `η ≥ 0` (identity on
/// `η < 0`), truncated from `[−f, f]` into `[−f, f + n]`.
pub fn oracle_matrix(n: i64, s: f64, tau: f64, f: i64) -> DMatrix<Complex64> {
    let src: Vec<i64> = (-f..=f).collect();
    let dst: Vec<i64> = (-f..=f + n).collect();
    let (a, b) = (src.len(), dst.len());
    let mut m = DMatrix::<Complex64>::zeros(a + b, a + b);
    for (j, &e) in src.iter().enumerate() {
        let t = if e < 0 { e } else { e + n };
        if e >= 0 && t < 0 {
            continue;
        }
        if let Some(i) = dst.iter().position(|&d| d == t) {
            m[(a + i, j)] = Complex64::new(1.0, 0.0);
            m[(j, a + i)] = Complex64::new(1.0, 0.0);
        }
    }
    for i in 0..a {
        m[(i, i)] = Complex64::new(s, tau);
    }
    for i in 0..b {
        m[(a + i, a + i)] = Complex64::new(-s, tau);
    }
    m
}

/// Clockwise winding of the determinant over 512 samples of the unit circle.
pub fn oracle_winding(n: i64, w: i64, f: i64) -> i64 {
    let k = 512;
    let mut total = 0.0;
    let mut prev: Option<f64> = None;
    for j in 0..=k {
        let th = 2.0 * PI * j as f64 / k as f64;
        let s = match w {
            1 => th.cos(),
            -1 => -th.cos(),
            _ => th.cos().abs(),
        };
        let arg = oracle_matrix(n, s, th.sin(), f).determinant().arg();
        if let Some(p) = prev {
            let mut d = arg - p;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            total += d;
        }
        prev = Some(arg);
    }
    -(total / (2.0 * PI)).round() as i64
}

/// Index of the truncated shift from its singular values.
pub fn oracle_fiber_index(n: i64, f: i64) -> i64 {
    let m = oracle_matrix(n, 0.0, 0.0, f);
    let a = (2 * f + 1) as usize;
    let t = m.view((a, 0), (m.nrows() - a, a)).clone_owned();
    let rank = t.singular_values().iter().filter(|&&s| s > 0.5).count() as i64;
    (a as i64 - rank) - (t.nrows() as i64 - rank)
}

/// Pre-registered indices of the elliptic corpus (symbol name, index), frozen from the dense
/// exact-compression oracle in `fredholm_oracles.rs` at N = 8, 12, 16.
pub const ORACLE_INDEX: [(&str, i64); 5] =
    [("identity", 0), ("const:0.7", 0), ("shifted_aps", 0), ("unit_winding", 0), ("winding_compact", -1)];


/// Index of the `example3` problem, frozen from the oracle below at N = 6, 8, 10.
pub const EXAMPLE3_INDEX: i64 = 1;

/// Positive eigenvector of `[[η, ξ], [ξ, −η]]` for `(ξ, η) ≠ 0`.
pub fn ex3_positive(xi: f64, eta: f64) -> [f64; 2] {
    let r = (xi * xi + eta * eta).sqrt();
    if eta + r > 0.5 * r {
        [eta + r, xi]
    } else {
        [xi, r - eta]
    }
}

/// Mode-wise kernel/cokernel count of the `example3` boundary compression.
pub fn ex3_oracle(n: i64) -> (i64, i64) {
    let (mut ker, mut coker) = (0, 0);
    for xi in -n..=n {
        for eta in -n..=n {
            if xi == 0 && eta == 0 {
                // A = 0: every constant is bounded; Π₊ ⊕ Π₋ at η = 0 keeps the first component,
                // so the map C² → C has rank 1.
                ker += 1;
                continue;
            }
            let v = ex3_positive(xi as f64, eta as f64);
            // Im P is e₁ for η ≥ 0 and e₂ for η < 0; the map L₊ → Im P is the matching entry.
            let entry = if eta >= 0 { v[0] } else { v[1] };
            if entry.abs() < 1e-12 {
                ker += 1;
                coker += 1;
            }
        }
    }
    (ker, coker)
}
