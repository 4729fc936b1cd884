//! Quantization `σ̂ = â_M + (a_X − ã̂_M)^` of compatible pairs on truncated Fourier windows.
//!
//! Every quantized operator here is a Galerkin matrix: the column of source mode `(ξ, η)` is
//! the list of spatial Fourier coefficients of `(x, y) ↦ s(x, y, ξ, η)` for the relevant column
//! symbol `s`, coefficient `(kx, ky)` landing on target mode `(ξ + kx, η + ky)`.  Targets
//! outside the target window are dropped, so rectangular assemblies (target window larger than
//! source window) reproduce the exact infinite-matrix entries on the retained modes.

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::operator::{MatrixFreeOperator, QuantizedOperator, SparseMatrix};
use crate::sobolev::SobolevWeight;
use crate::symbols::{sgn, Bandwidth, CompatibleSymbol, EtaConvention, Mat, OperatorSymbol, PointFn, PrincipalSymbol};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// Tolerance on the compatibility defect accepted by [`quantize`].
pub const COMPATIBILITY_TOL: f64 = 1e-8;

/// Column symbol: `(x, y, ξ, η) ↦ rank×rank` matrix for the source mode `(ξ, η)`.
type ColumnFn<'a> = dyn Fn(f64, f64, f64, f64) -> Mat + Sync + 'a;

/// Twiddle table `e^{−ik·2πj/p}/p` for `j < p`, `|k| ≤ kmax`.
struct Dft {
    p: usize,
    table: Vec<Complex64>,
}

impl Dft {
    fn new(p: usize, kmax: usize) -> Self {
        let mut table = Vec::with_capacity(p * (2 * kmax + 1));
        for k in -(kmax as i64)..=kmax as i64 {
            for j in 0..p {
                let ph = -2.0 * PI * ((k * j as i64).rem_euclid(p as i64)) as f64 / p as f64;
                table.push(Complex64::from_polar(1.0 / p as f64, ph));
            }
        }
        Dft { p, table }
    }

    fn w(&self, k: usize, j: usize) -> Complex64 {
        self.table[k * self.p + j]
    }
}

/// Sample count and coefficient range in one direction: known bandwidth `b` needs `2b+1`
/// samples; otherwise every coefficient that can connect the two windows is resolved.
fn resolution(band: Option<usize>, n_src: usize, n_dst: usize) -> (usize, usize) {
    let reach = n_src + n_dst;
    match band {
        Some(b) => (2 * b + 1, b.min(reach)),
        None => (2 * reach + 1, reach),
    }
}

/// Galerkin assembly of a column symbol between two windows.
fn assemble(col: &ColumnFn, band: Bandwidth, src: &FrequencyGrid, dst: &FrequencyGrid, tag: &str) -> Result<QuantizedOperator> {
    if src.rank != dst.rank {
        return Err(Error::Rank(src.rank, dst.rank));
    }
    let r = src.rank;
    let (px, kx) = resolution(band.x, src.n_base_modes, dst.n_base_modes);
    let (py, ky) = resolution(band.y, src.n_fiber_modes, dst.n_fiber_modes);
    let (dx, dy) = (Dft::new(px, kx), Dft::new(py, ky));
    let xs: Vec<f64> = (0..px).map(|j| 2.0 * PI * j as f64 / px as f64).collect();
    let ys: Vec<f64> = (0..py).map(|j| 2.0 * PI * j as f64 / py as f64).collect();
    let modes: Vec<(i64, i64)> = src.modes().collect();
    let per_mode: Vec<Vec<Vec<(usize, Complex64)>>> = modes
        .par_iter()
        .map(|&(xi, eta)| {
            // samples[jx][jy] is an r×r block.
            let samples: Vec<Vec<Mat>> =
                xs.iter().map(|&x| ys.iter().map(|&y| col(x, y, xi as f64, eta as f64)).collect()).collect();
            // Stage 1: transform in y.
            let stage: Vec<Vec<Mat>> = samples
                .iter()
                .map(|row| {
                    (0..2 * ky + 1)
                        .map(|k| {
                            let mut acc = DMatrix::zeros(r, r);
                            for (j, s) in row.iter().enumerate() {
                                acc += s * dy.w(k, j);
                            }
                            acc
                        })
                        .collect()
                })
                .collect();
            let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); r];
            for a in 0..2 * kx + 1 {
                let tx = xi + a as i64 - kx as i64;
                if tx.abs() > dst.nx() {
                    continue;
                }
                for b in 0..2 * ky + 1 {
                    let ty = eta + b as i64 - ky as i64;
                    if ty.abs() > dst.ny() {
                        continue;
                    }
                    let mut blk = DMatrix::<Complex64>::zeros(r, r);
                    for (j, st) in stage.iter().enumerate() {
                        blk += &st[b] * dx.w(a, j);
                    }
                    for rr in 0..r {
                        for cc in 0..r {
                            let v = blk[(rr, cc)];
                            if v != Complex64::new(0.0, 0.0) {
                                cols[cc].push((dst.index(tx, ty, rr), v));
                            }
                        }
                    }
                }
            }
            cols
        })
        .collect();
    let columns: Vec<Vec<(usize, Complex64)>> = per_mode.into_iter().flatten().collect();
    Ok(QuantizedOperator::new(*src, *dst, SparseMatrix::from_columns(dst.dim(), columns), tag))
}

/// `â_M`: Kohn–Nirenberg quantization of the principal symbol, with the lattice convention of
/// [`PrincipalSymbol::lattice_value`] on `η = 0`.
pub fn quantize_principal(a: &PrincipalSymbol, src: &FrequencyGrid, dst: &FrequencyGrid, conv: EtaConvention) -> Result<QuantizedOperator> {
    let col = |x: f64, y: f64, xi: f64, eta: f64| a.lattice_value(x, y, xi, eta, conv);
    assemble(&col, a.band, src, dst, "principal")
}

/// `ã̂_M(x, ξ)`: the fiber quantization of the directional limit, i.e. the fiber operator of
/// multiplication by `ã_M(x, y, ξ, sign η)` (`sign 0` from `conv`), window `[−ns,ns] → [−nt,nt]`.
pub fn quantize_fiber_limit(a: &PrincipalSymbol, x: f64, xi: f64, ns: usize, nt: usize, conv: EtaConvention) -> Mat {
    let limit = a.limit.clone();
    let xs = sgn(xi);
    let full: crate::symbols::FiberFn = Arc::new(move |x, _xi, y, eta| limit(x, y, xs, conv.eta_sign(eta)));
    OperatorSymbol::new(a.rank, full.clone(), full, 0, a.band).fiber_matrix(x, xs, ns, nt)
}

/// Base quantization of an operator-valued family given by fiber matrices
/// `(x, sign ξ) ↦ F(x, ξ)` from the source fiber window to the target fiber window
/// (components interleaved).  The block `ξ' ← ξ` is the `x`-Fourier coefficient of
/// `x ↦ F(x, ξ)` at `ξ' − ξ`; `ξ = 0` uses `ξ = +1`.
pub fn quantize_operator_symbol(
    family: &(dyn Fn(f64, f64) -> Mat + Sync),
    x_band: Option<usize>,
    src: &FrequencyGrid,
    dst: &FrequencyGrid,
) -> Result<QuantizedOperator> {
    if src.rank != dst.rank {
        return Err(Error::Rank(src.rank, dst.rank));
    }
    let r = src.rank;
    let (fs, ft) = (src.fiber_len() * r, dst.fiber_len() * r);
    let (px, kx) = resolution(x_band, src.n_base_modes, dst.n_base_modes);
    let dx = Dft::new(px, kx);
    let xs: Vec<f64> = (0..px).map(|j| 2.0 * PI * j as f64 / px as f64).collect();
    // Only two ξ-values occur (degree-0 homogeneity): transform both once.
    let coefs: Vec<Vec<Mat>> = [-1.0, 1.0]
        .par_iter()
        .map(|&xi| {
            let samples: Vec<Mat> = xs.iter().map(|&x| family(x, xi)).collect();
            for s in &samples {
                assert_eq!(s.shape(), (ft, fs), "fiber family has the wrong window");
            }
            (0..2 * kx + 1)
                .map(|a| {
                    let mut acc = DMatrix::zeros(ft, fs);
                    for (j, s) in samples.iter().enumerate() {
                        acc += s * dx.w(a, j);
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let columns: Vec<Vec<(usize, Complex64)>> = (0..src.dim())
        .into_par_iter()
        .map(|j| {
            let (xi, eta, c) = src.mode_of(j);
            let which = if xi < 0 { 0 } else { 1 };
            let fcol = ((eta + src.ny()) as usize) * r + c;
            let mut out = Vec::new();
            for a in 0..2 * kx + 1 {
                let tx = xi + a as i64 - kx as i64;
                if tx.abs() > dst.nx() {
                    continue;
                }
                let m = &coefs[which][a];
                for frow in 0..ft {
                    let v = m[(frow, fcol)];
                    if v != Complex64::new(0.0, 0.0) {
                        let ty = (frow / r) as i64 - dst.ny();
                        out.push((dst.index(tx, ty, frow % r), v));
                    }
                }
            }
            out
        })
        .collect();
    Ok(QuantizedOperator::new(*src, *dst, SparseMatrix::from_columns(dst.dim(), columns), "operator-symbol"))
}

/// Quantization of the corrected operator symbol `q_X = a_X − ã̂_M` through its full symbol
/// `q(x, ξ; y, η) − ã_M(x, y, ξ, sign η)`.
pub fn quantize_correction(sym: &CompatibleSymbol, src: &FrequencyGrid, dst: &FrequencyGrid, conv: EtaConvention) -> Result<QuantizedOperator> {
    let q = &sym.operator;
    let lim = &sym.principal.limit;
    let col = |x: f64, y: f64, xi: f64, eta: f64| {
        let xs = sgn(xi);
        (q.full)(x, xs, y, eta) - lim(x, y, xs, conv.eta_sign(eta))
    };
    let band = q.band.max(sym.principal.band);
    assemble(&col, band, src, dst, "correction")
}

/// `σ̂` between two windows with an explicit `η = 0` convention.
pub fn quantize_between(sym: &CompatibleSymbol, src: &FrequencyGrid, dst: &FrequencyGrid, conv: EtaConvention) -> Result<QuantizedOperator> {
    if sym.rank != src.rank {
        return Err(Error::Rank(sym.rank, src.rank));
    }
    sym.require_compatible(COMPATIBILITY_TOL)?;
    let a = quantize_principal(&sym.principal, src, dst, conv)?;
    let b = quantize_correction(sym, src, dst, conv)?;
    Ok(a.add(&b)?.with_tag(sym.name.clone()))
}

/// `σ̂ = â_M + (a_X − ã̂_M)^` on a square window.
pub fn quantize(sym: &CompatibleSymbol, grid: &FrequencyGrid) -> Result<QuantizedOperator> {
    quantize_between(sym, grid, grid, EtaConvention::Plus)
}

/// Spectral norm of the change of `σ̂` when the `η = 0` convention is taken from `η̂ = −1`
/// instead of `+1` (in both the principal quantization and the fiber limit).
pub fn convention_independence_test(sym: &CompatibleSymbol, grid: &FrequencyGrid) -> Result<f64> {
    let a = quantize_between(sym, grid, grid, EtaConvention::Plus)?;
    let b = quantize_between(sym, grid, grid, EtaConvention::Minus)?;
    a.sub(&b)?.norm()
}

/// Matrix-free realization of `σ̂` by spatial synthesis: `u ↦ P_dst F[(x,y) ↦ Σ e^{i(xξ+yη)}
/// T(x,y,ξ,η) û(ξ,η)]` with the total column symbol `T = a_M + a_X − ã_M`, evaluated on an
/// oversampled spatial grid.  Independent of the column-wise assembly; intended for small grids.
pub fn matrix_free(sym: &CompatibleSymbol, grid: &FrequencyGrid) -> MatrixFreeOperator {
    let g = *grid;
    let band = sym.band();
    let bx = band.x.unwrap_or(2 * g.n_base_modes);
    let by = band.y.unwrap_or(2 * g.n_fiber_modes);
    let px = 2 * g.n_base_modes + bx + g.n_base_modes + 1;
    let py = 2 * g.n_fiber_modes + by + g.n_fiber_modes + 1;
    let s = sym.clone();
    let r = g.rank;
    let apply = move |u: &[Complex64]| -> Vec<Complex64> {
        let xs: Vec<f64> = (0..px).map(|j| 2.0 * PI * j as f64 / px as f64).collect();
        let ys: Vec<f64> = (0..py).map(|j| 2.0 * PI * j as f64 / py as f64).collect();
        let field: Vec<Vec<Complex64>> = xs
            .par_iter()
            .map(|&x| {
                let mut acc = vec![Complex64::new(0.0, 0.0); py * r];
                for (jy, &y) in ys.iter().enumerate() {
                    for (xi, eta) in g.modes() {
                        let base = g.index(xi, eta, 0);
                        if (0..r).all(|c| u[base + c] == Complex64::new(0.0, 0.0)) {
                            continue;
                        }
                        let (xf, ef) = (xi as f64, eta as f64);
                        let xsg = sgn(xf);
                        let t = s.principal.lattice_value(x, y, xf, ef, EtaConvention::Plus) + (s.operator.full)(x, xsg, y, ef)
                            - (s.principal.limit)(x, y, xsg, EtaConvention::Plus.eta_sign(ef));
                        let ph = Complex64::from_polar(1.0, xf * x + ef * y);
                        for a in 0..r {
                            for c in 0..r {
                                acc[jy * r + a] += t[(a, c)] * ph * u[base + c];
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        let samples: Vec<Complex64> = field.into_iter().flatten().collect();
        let fine = FrequencyGrid::with_points(g.n_base_modes, g.n_fiber_modes, px, py, r).expect("oversampled grid");
        crate::grid::forward_transform(&fine, &samples).expect("sample layout")
    };
    MatrixFreeOperator { src: g, dst: g, apply: Arc::new(apply), tag: format!("{}:matrix-free", sym.name) }
}

// ---------------------------------------------------------------------------------------------
// Sobolev boundedness
// ---------------------------------------------------------------------------------------------

/// Per-grid data of a boundedness check.
#[derive(Debug, Clone, Serialize)]
pub struct SobolevLadderStep {
    pub n: usize,
    /// `Σ_k sup_ξ ‖W_{s−d}(ξ) Q̂_k(ξ) W_{−s}(ξ)‖` over `x`-frequencies `k`.
    pub coefficient_bound: f64,
    /// `sup_k (1+k²)^{n_smooth} sup_ξ ‖W_{s−d}(ξ) Q̂_k(ξ) W_{−s}(ξ)‖`.
    pub smoothed_sup: f64,
    /// `‖σ̂‖_{H^s → H^{s−d}}` of the base-quantized family on the grid.
    pub operator_norm: f64,
    /// `operator_norm / coefficient_bound(first grid)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SobolevBoundReport {
    pub s: f64,
    pub d: i32,
    pub n_smooth: u32,
    pub steps: Vec<SobolevLadderStep>,
    /// Largest over smallest ratio along the ladder.
    pub ratio_spread: f64,
    /// Largest over first coefficient bound along the ladder.
    pub bound_growth: f64,
    pub bounded: bool,
}

/// Relative variation tolerated by [`sobolev_bound_check`].
pub const BOUND_STABILITY: f64 = 0.10;

/// Empirical boundedness test for a fiber family `q_X` of declared order `d` as a map
/// `H^s → H^{s−d}`: the coefficient bound (weights frozen at the source base frequency, as in
/// the Peetre-inequality argument) and the operator norm are tracked along a grid ladder; the
/// family counts as bounded when both stay within [`BOUND_STABILITY`] of their first values.
pub fn sobolev_bound_check(q: &OperatorSymbol, s: f64, d: i32, n_smooth: u32, ladder: &[usize]) -> Result<SobolevBoundReport> {
    if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Range("ladder must be non-empty and strictly increasing".into()));
    }
    let r = q.rank;
    let mut steps = Vec::new();
    for &n in ladder {
        let grid = FrequencyGrid::new(n, n, r);
        let fam = |x: f64, xi: f64| q.fiber_matrix(x, xi, n, n);
        let op = quantize_operator_symbol(&fam, q.band.x, &grid, &grid)?;
        let operator_norm = op.sobolev_norm(s, s - d as f64)?;
        // x-coefficients of the fiber family for both signs of ξ.
        let (px, kx) = resolution(q.band.x, n, n);
        let xs: Vec<f64> = (0..px).map(|j| 2.0 * PI * j as f64 / px as f64).collect();
        let mut per_k = vec![0.0f64; 2 * kx + 1];
        for sign in [-1.0, 1.0] {
            let samples: Vec<Mat> = xs.iter().map(|&x| fam(x, sign)).collect();
            let coefs = crate::symbols::dft_coefficients(&samples, kx);
            let xis: Vec<i64> = if sign < 0.0 { (-(n as i64)..0).collect() } else { (0..=n as i64).collect() };
            for (k, c) in coefs.iter().enumerate() {
                if c.norm() == 0.0 {
                    continue;
                }
                for &xi in &xis {
                    let mut m = c.clone();
                    let dim = m.nrows();
                    for i in 0..dim {
                        for j in 0..dim {
                            let (ei, ej) = ((i / r) as f64 - n as f64, (j / r) as f64 - n as f64);
                            m[(i, j)] *= SobolevWeight::new(s - d as f64).fiber(xi as f64, ei) * SobolevWeight::new(-s).fiber(xi as f64, ej);
                        }
                    }
                    let nm = linalg::dense_singular_values(&m).first().copied().unwrap_or(0.0);
                    per_k[k] = per_k[k].max(nm);
                }
            }
        }
        let coefficient_bound: f64 = per_k.iter().sum();
        let smoothed_sup = per_k
            .iter()
            .enumerate()
            .map(|(k, v)| (1.0 + ((k as f64 - kx as f64).powi(2))).powi(n_smooth as i32) * v)
            .fold(0.0, f64::max);
        steps.push(SobolevLadderStep { n, coefficient_bound, smoothed_sup, operator_norm, ratio: 0.0 });
    }
    let c0 = steps[0].coefficient_bound;
    for st in steps.iter_mut() {
        st.ratio = if c0 > 0.0 { st.operator_norm / c0 } else { 0.0 };
    }
    let (rmin, rmax) = steps.iter().fold((f64::INFINITY, 0.0f64), |(a, b), st| (a.min(st.ratio), b.max(st.ratio)));
    let ratio_spread = if rmax == 0.0 { 1.0 } else { rmax / rmin.max(1e-300) };
    let bound_growth = if c0 == 0.0 { 1.0 } else { steps.iter().map(|st| st.coefficient_bound).fold(0.0, f64::max) / c0 };
    let bounded = ratio_spread <= 1.0 + BOUND_STABILITY && bound_growth <= 1.0 + BOUND_STABILITY;
    Ok(SobolevBoundReport { s, d, n_smooth, steps, ratio_spread, bound_growth, bounded })
}

/// `‖σ̂‖_{H^s→H^s}` across a grid ladder.
pub fn sobolev_norm_ladder(sym: &CompatibleSymbol, s: f64, ladder: &[usize]) -> Result<Vec<f64>> {
    ladder
        .iter()
        .map(|&n| quantize(sym, &FrequencyGrid::new(n, n, sym.rank))?.sobolev_norm(s, s))
        .collect()
}

/// Principal symbol `(x, y, ξ, η) ↦ f` built from a scalar closure.
pub fn scalar_point_fn(f: impl Fn(f64, f64, f64, f64) -> Complex64 + Send + Sync + 'static) -> PointFn {
    Arc::new(move |x, y, xi, eta| DMatrix::from_element(1, 1, f(x, y, xi, eta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{cplx, scalar, FiberFn};

    #[test]
    fn identity_quantizes_to_identity() {
        let g = FrequencyGrid::new(3, 4, 2);
        let q = quantize(&CompatibleSymbol::identity(2), &g).unwrap();
        assert_eq!(q.matrix, SparseMatrix::identity(g.dim()));
    }

    #[test]
    fn modulation_is_translation() {
        let g = FrequencyGrid::new(3, 3, 1);
        let f = scalar_point_fn(|_, y, _, _| Complex64::from_polar(1.0, y));
        let s = CompatibleSymbol::smooth("eiy", 1, f.clone(), f, Bandwidth::new(Some(0), Some(1)));
        let q = quantize(&s, &g).unwrap();
        for (xi, eta) in g.modes() {
            let col = g.index(xi, eta, 0);
            let entries: Vec<_> = q.matrix.column(col).collect();
            if eta < 3 {
                assert_eq!(entries.len(), 1);
                assert_eq!(entries[0].0, g.index(xi, eta + 1, 0));
                assert!((entries[0].1 - cplx(1.0)).norm() < 1e-14);
            } else {
                assert!(entries.is_empty());
            }
        }
    }

    #[test]
    fn multiplier_is_diagonal() {
        let g = FrequencyGrid::new(4, 4, 1);
        let f = scalar_point_fn(|_, _, xi, eta| cplx(xi * xi / (xi * xi + eta * eta)));
        let l = scalar_point_fn(|_, _, _, _| cplx(1.0));
        let p = PrincipalSymbol::new(1, f, l, Bandwidth::CONSTANT, 8);
        let q = quantize_principal(&p, &g, &g, EtaConvention::Plus).unwrap();
        for (xi, eta) in g.modes() {
            let i = g.index(xi, eta, 0);
            let expect = if eta == 0 { 1.0 } else { (xi * xi) as f64 / (xi * xi + eta * eta) as f64 };
            assert!((q.matrix.get(i, i) - cplx(expect)).norm() < 1e-14);
        }
        assert_eq!(q.matrix.nnz(), g.modes().filter(|&(xi, eta)| eta == 0 || xi != 0).count());
    }

    #[test]
    fn fiber_limit_of_indicator() {
        let l = scalar_point_fn(|_, _, _, eh| cplx(if eh > 0.0 { 1.0 } else { 0.0 }));
        let p = PrincipalSymbol::new(1, l.clone(), l, Bandwidth::CONSTANT, 8);
        let m = quantize_fiber_limit(&p, 0.0, 1.0, 3, 3, EtaConvention::Plus);
        for (k, eta) in (-3..=3).enumerate() {
            assert_eq!(m[(k, k)], cplx(if eta >= 0 { 1.0 } else { 0.0 }));
        }
    }

    #[test]
    fn operator_symbol_modulation() {
        let g = FrequencyGrid::new(3, 2, 1);
        let f = DMatrix::from_fn(5, 5, |i, j| cplx((i + 2 * j) as f64));
        let fam = |x: f64, _xi: f64| f.clone() * Complex64::from_polar(1.0, x);
        let q = quantize_operator_symbol(&fam, Some(1), &g, &g).unwrap();
        for j in 0..g.dim() {
            let (xi, eta, _) = g.mode_of(j);
            for (i, v) in q.matrix.column(j).filter(|e| e.1.norm() > 1e-12) {
                let (a, b, _) = g.mode_of(i);
                assert_eq!(a, xi + 1);
                assert!((v - f[((b + 2) as usize, (eta + 2) as usize)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn aps_correction_vanishes() {
        let g = FrequencyGrid::new(3, 3, 1);
        let full: FiberFn = Arc::new(|_, _, _, eta| scalar(cplx(if eta >= 0.0 { 1.0 } else { 0.0 })));
        let pr: FiberFn = Arc::new(|_, _, _, eh| scalar(cplx(if eh > 0.0 { 1.0 } else { 0.0 })));
        let s = CompatibleSymbol::family("aps", 1, full, pr, 0, Bandwidth::CONSTANT);
        let c = quantize_correction(&s, &g, &g, EtaConvention::Plus).unwrap();
        assert_eq!(c.matrix.nnz(), 0);
        assert!(convention_independence_test(&s, &g).unwrap() <= 1e-10);
    }

    #[test]
    fn matrix_free_agrees_with_assembly() {
        let g = FrequencyGrid::new(3, 3, 1);
        let f = scalar_point_fn(|x, y, xi, eta| cplx(1.0 + 0.3 * x.cos()) * Complex64::new(xi, eta * y.sin()) / (xi * xi + eta * eta).sqrt());
        let l = scalar_point_fn(|x, _, xi, _| cplx((1.0 + 0.3 * x.cos()) * xi.signum()));
        let s = CompatibleSymbol::smooth("t", 1, f, l, Bandwidth::new(Some(1), Some(1)));
        let a = quantize(&s, &g).unwrap();
        let mf = matrix_free(&s, &g);
        let u = linalg::start_vector(g.dim(), 3);
        let (v1, v2) = (a.apply(&u), mf.apply(&u));
        let err: f64 = v1.iter().zip(&v2).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        let nrm: f64 = v1.iter().map(|p| p.norm_sqr()).sum::<f64>().sqrt();
        assert!(err <= 1e-10 * nrm, "{err}");
    }
}
