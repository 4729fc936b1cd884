//! Statements modulo compact operators, made finite: composition residuals and their decay in
//! high-frequency shells, essential norms, and Fredholm properties read off truncations.

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg::{self, NullSpaces};
use crate::operator::{high_frequency_compression, QuantizedOperator, SparseMatrix};
use crate::quantize::{quantize, quantize_between};
use crate::symbols::{
    circle_samples, ellipticity_check, symbol_mul, symbol_norm, Bandwidth, CompatibleSymbol, EllipticityReport, EtaConvention,
    ANGULAR_SAMPLES, PRODUCT_TRUNCATION,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Values at or below this are treated as exact zeros in decay fits.
pub const EXACT_ZERO: f64 = 1e-13;

/// Singular-value threshold separating near-kernel vectors.
pub const KERNEL_THRESHOLD: f64 = 1e-6;

/// Seed of the fixed finite-rank perturbation.
pub const PERTURBATION_SEED: u64 = 20_251_014;

/// A sequence of shell values with its log-log fit.
#[derive(Debug, Clone, Serialize)]
pub struct DecayCurve {
    pub points: Vec<(usize, f64)>,
    /// Least-squares slope of `log value` against `log K` over the nonzero values
    /// (`None` when every value is an exact zero).
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
}

impl DecayCurve {
    pub fn new(points: Vec<(usize, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Range("shell indices must increase strictly".into()));
        }
        if points.iter().any(|p| !(p.1 >= 0.0)) {
            return Err(Error::Range("shell values must be non-negative".into()));
        }
        let nz: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > EXACT_ZERO).map(|p| ((p.0 as f64).ln(), p.1.ln())).collect();
        let (slope, intercept) = if nz.len() >= 2 {
            let n = nz.len() as f64;
            let mx = nz.iter().map(|p| p.0).sum::<f64>() / n;
            let my = nz.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = nz.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = nz.iter().map(|p| (p.0 - mx).powi(2)).sum();
            let s = sxy / sxx;
            (Some(s), Some(my - s * mx))
        } else {
            (None, None)
        };
        Ok(DecayCurve { points, slope, intercept })
    }

    /// Every value is an exact zero.
    pub fn is_exact(&self) -> bool {
        self.points.iter().all(|p| p.1 <= EXACT_ZERO)
    }

    /// Values strictly decrease (exact zeros count as already decayed).
    pub fn strictly_decreasing(&self) -> bool {
        self.is_exact() || self.points.windows(2).all(|w| w[1].1 < w[0].1 || w[1].1 <= EXACT_ZERO)
    }
}

/// A compatible pair that is a projection: `p·p = p` at both levels.
#[derive(Debug, Clone)]
pub struct ProjectionSymbol {
    pub symbol: CompatibleSymbol,
}

/// Fiber window used for operator-level idempotence and restriction checks.
pub const PROJECTION_FIBER_WINDOW: usize = 12;

impl ProjectionSymbol {
    /// Accepts `p` after checking idempotence on samples: principal level to `1e−10`, truncated
    /// fiber matrices to `1e−8`.
    pub fn new(p: CompatibleSymbol) -> Result<Self> {
        let (pd, od) = idempotence_defect(&p, PROJECTION_FIBER_WINDOW);
        if pd > 1e-10 || od > 1e-8 {
            return Err(Error::Range(format!("{} is not a projection (principal {pd:.2e}, operator {od:.2e})", p.name)));
        }
        Ok(ProjectionSymbol { symbol: p })
    }
}

/// `(max ‖a² − a‖ over principal samples, max ‖F² − F‖ over fiber matrices)`.
pub fn idempotence_defect(p: &CompatibleSymbol, ny: usize) -> (f64, f64) {
    let pts = circle_samples(ANGULAR_SAMPLES);
    let mut pd: f64 = 0.0;
    for &x in &pts {
        for &y in &pts {
            for &(xi, eta) in &crate::symbols::sphere_directions() {
                let a = (p.principal.eval)(x, y, xi, eta);
                pd = pd.max((&a * &a - &a).norm());
            }
        }
    }
    let mut od: f64 = 0.0;
    for &x in &pts {
        for xi in [-1.0, 1.0] {
            let f = p.operator.fiber_matrix(x, xi, ny, ny);
            od = od.max((&f * &f - &f).norm());
        }
    }
    (pd, od)
}

fn intermediate_margin(b: Bandwidth) -> (usize, usize) {
    (b.x.unwrap_or(PRODUCT_TRUNCATION), b.y.unwrap_or(PRODUCT_TRUNCATION))
}

/// `R = Â·B̂ − (ab)^` on `grid` with its high-frequency shell norms.
///
/// The product is formed through an intermediate window enlarged by the bandwidth of `b`, so
/// `Â·B̂` is the exact compression of the composition of the untruncated operators and `R`
/// carries no window-edge artifacts.
pub fn composition_residual(a: &CompatibleSymbol, b: &CompatibleSymbol, grid: &FrequencyGrid, shells: &[usize]) -> Result<DecayCurve> {
    let r = composition_residual_operator(a, b, grid)?;
    let points = shells
        .iter()
        .map(|&k| Ok((k, high_frequency_compression(&r, k)?.norm()?)))
        .collect::<Result<Vec<_>>>()?;
    DecayCurve::new(points)
}

/// The residual operator `Â(N ← N+m)·B̂(N+m ← N) − (ab)^(N ← N)`.
pub fn composition_residual_operator(a: &CompatibleSymbol, b: &CompatibleSymbol, grid: &FrequencyGrid) -> Result<QuantizedOperator> {
    if a.rank != b.rank || a.rank != grid.rank {
        return Err(Error::Rank(a.rank, b.rank));
    }
    let (mx, my) = intermediate_margin(b.band());
    let mid = grid.enlarged(mx, my);
    let qb = quantize_between(b, grid, &mid, EtaConvention::Plus)?;
    let qa = quantize_between(a, &mid, grid, EtaConvention::Plus)?;
    let ab = symbol_mul(a, b)?;
    let qab = quantize(&ab, grid)?;
    Ok(qa.compose(&qb)?.sub(&qab)?.with_tag(format!("R[{},{}]", a.name, b.name)))
}

/// Essential-norm estimate of a quantized operator.
#[derive(Debug, Clone, Serialize)]
pub struct EssentialNormReport {
    /// `(K, ‖P_{≥K} A P_{≥K}‖)`.
    pub shells: Vec<(usize, f64)>,
    /// Two-point Richardson value from the last two shells (`2c(2K) − c(K)` for doubling shells).
    pub estimate: f64,
}

/// Shell compression norms and their two-point Richardson extrapolation (assumes an `O(1/K)`
/// approach, which is the discretization error of degree-0 symbols sampled at frequency `K`).
pub fn essential_norm_estimate(op: &QuantizedOperator, shells: &[usize]) -> Result<EssentialNormReport> {
    if shells.is_empty() {
        return Err(Error::Range("at least one shell required".into()));
    }
    let vals = shells
        .iter()
        .map(|&k| Ok((k, high_frequency_compression(op, k)?.norm()?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EssentialNormReport { estimate: richardson(&vals), shells: vals })
}

/// A finite-rank operator `Σ s_i u_i v_iᴴ` on one window, kept in factored form.
#[derive(Debug, Clone)]
pub struct FiniteRank {
    pub grid: FrequencyGrid,
    pub terms: Vec<(f64, Vec<Complex64>, Vec<Complex64>)>,
}

impl FiniteRank {
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = linalg::zeros(self.grid.dim());
        for (s, u, v) in &self.terms {
            let c: Complex64 = v.iter().zip(x).map(|(a, b)| a.conj() * b).sum::<Complex64>() * *s;
            out.iter_mut().zip(u).for_each(|(o, ui)| *o += ui * c);
        }
        out
    }

    pub fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut out = linalg::zeros(self.grid.dim());
        for (s, u, v) in &self.terms {
            let c: Complex64 = u.iter().zip(y).map(|(a, b)| a.conj() * b).sum::<Complex64>() * *s;
            out.iter_mut().zip(v).for_each(|(o, vi)| *o += vi * c);
        }
        out
    }

    /// Dense realization (small windows only).
    pub fn to_operator(&self) -> QuantizedOperator {
        let n = self.grid.dim();
        let mut d = DMatrix::zeros(n, n);
        for (s, u, v) in &self.terms {
            for i in 0..n {
                for j in 0..n {
                    d[(i, j)] += u[i] * v[j].conj() * *s;
                }
            }
        }
        QuantizedOperator::new(self.grid, self.grid, SparseMatrix::from_dense(&d), "finite-rank")
    }
}

/// The fixed rank-5 perturbation: seeded random unit vectors with smooth (exponentially
/// decaying in the mode shell) coefficients and weights in `[0.5, 1]`.
pub fn rank_five_perturbation(grid: &FrequencyGrid, seed: u64) -> FiniteRank {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.dim();
    let vector = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| {
                let decay = (-(grid.shell_of(i) as f64) / 2.0).exp();
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * decay
            })
            .collect();
        let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= nrm);
        v
    };
    let terms = (0..5)
        .map(|_| {
            let s = rng.gen_range(0.5..1.0);
            let u = vector(&mut rng);
            let v = vector(&mut rng);
            (s, u, v)
        })
        .collect();
    FiniteRank { grid: *grid, terms }
}

/// [`essential_norm_estimate`] for `op + F` with `F` finite rank, matrix-free.
pub fn essential_norm_estimate_perturbed(op: &QuantizedOperator, f: &FiniteRank, shells: &[usize]) -> Result<EssentialNormReport> {
    if shells.is_empty() {
        return Err(Error::Range("at least one shell required".into()));
    }
    if op.src != f.grid || op.dst != f.grid {
        return Err(Error::Dimension("perturbation lives on a different window".into()));
    }
    let g = op.src;
    let vals = shells
        .iter()
        .map(|&k| {
            let comp = high_frequency_compression(op, k)?;
            let mask: Vec<bool> = (0..g.dim()).map(|i| g.shell_of(i) >= k as i64).collect();
            let cut = |mut v: Vec<Complex64>| {
                v.iter_mut().zip(&mask).for_each(|(z, &m)| if !m { *z = Complex64::new(0.0, 0.0) });
                v
            };
            let fwd = |v: &[Complex64]| {
                let a = comp.matrix.matvec(v);
                let b = cut(f.apply(&cut(v.to_vec())));
                a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>()
            };
            let h = |v: &[Complex64]| {
                let w = fwd(v);
                let a = comp.matrix.matvec_adjoint(&w);
                let b = cut(f.apply_adjoint(&cut(w)));
                a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>()
            };
            let lam = linalg::lanczos_top_eigenvalue(g.dim(), &h, linalg::NORM_TOL * linalg::NORM_TOL.sqrt())?;
            Ok((k, lam.sqrt()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EssentialNormReport { estimate: richardson(&vals), shells: vals })
}

fn richardson(vals: &[(usize, f64)]) -> f64 {
    if vals.len() >= 2 {
        let (k1, c1) = vals[vals.len() - 2];
        let (k2, c2) = vals[vals.len() - 1];
        // c(K) ≈ c∞ + α/K  ⇒  c∞ = (k2 c2 − k1 c1)/(k2 − k1).
        (k2 as f64 * c2 - k1 as f64 * c1) / (k2 as f64 - k1 as f64)
    } else {
        vals[0].1
    }
}

/// Outcome of a Fredholm analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FredholmStatus {
    Fredholm,
    NotFredholm,
    Inconclusive,
}

/// Kernel data on one grid of a ladder.
#[derive(Debug, Clone, Serialize)]
pub struct FredholmStep {
    pub n: usize,
    /// Near-kernel vectors localized in low modes.
    pub dim_ker: usize,
    pub dim_coker: usize,
    /// All near-kernel vectors, window-edge artifacts included.
    pub raw_ker: usize,
    pub raw_coker: usize,
    pub min_regular_singular_value: f64,
    pub min_singular_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FredholmReport {
    pub symbol: String,
    pub ellipticity: EllipticityReport,
    pub steps: Vec<FredholmStep>,
    pub stabilized: bool,
    pub index: Option<i64>,
    /// `min σ(first grid) / min σ(last grid)`.
    pub min_singular_decay: f64,
    pub status: FredholmStatus,
}

/// A near-kernel vector is attributed to the operator (rather than to the truncation) when at
/// least half of its mass sits in modes with `max(|ξ|,|η|) ≤ N/2`.
pub fn is_localized(v: &[(usize, Complex64)], grid: &FrequencyGrid) -> bool {
    let total = linalg::mass(v, |_| true);
    let half = (grid.n_base_modes.max(grid.n_fiber_modes) / 2) as i64;
    let low = linalg::mass(v, |i| grid.shell_of(i) <= half);
    total > 0.0 && low >= 0.5 * total
}

fn count_localized(ns: &NullSpaces, src: &FrequencyGrid, dst: &FrequencyGrid) -> (usize, usize) {
    (
        ns.kernel.iter().filter(|v| is_localized(v, src)).count(),
        ns.cokernel.iter().filter(|v| is_localized(v, dst)).count(),
    )
}

/// Grid `N` of a Fredholm ladder: square windows, or `N_y = 0` / `N_x = 0` degenerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LadderShape {
    Square,
    BaseOnly,
    FiberOnly,
}

impl LadderShape {
    pub fn grid(self, n: usize, rank: usize) -> FrequencyGrid {
        match self {
            LadderShape::Square => FrequencyGrid::new(n, n, rank),
            LadderShape::BaseOnly => FrequencyGrid::new(n, 0, rank),
            LadderShape::FiberOnly => FrequencyGrid::new(0, n, rank),
        }
    }
}

fn finish_report(symbol: String, ellipticity: EllipticityReport, steps: Vec<FredholmStep>) -> FredholmReport {
    let tail = &steps[steps.len().saturating_sub(3)..];
    let stabilized = steps.len() >= 3 && tail.iter().all(|s| s.dim_ker == tail[0].dim_ker && s.dim_coker == tail[0].dim_coker);
    let first = steps.first().map(|s| s.min_singular_value).unwrap_or(f64::NAN);
    let last = steps.last().map(|s| s.min_singular_value).unwrap_or(f64::NAN);
    let decay = if last > 0.0 { first / last } else { f64::INFINITY };
    let (status, index) = if !ellipticity.elliptic {
        (FredholmStatus::NotFredholm, None)
    } else if stabilized {
        let s = steps.last().unwrap();
        (FredholmStatus::Fredholm, Some(s.dim_ker as i64 - s.dim_coker as i64))
    } else {
        (FredholmStatus::Inconclusive, None)
    };
    FredholmReport { symbol, ellipticity, steps, stabilized, index, min_singular_decay: decay, status }
}

/// Fredholm check of `σ̂` along a ladder of square grids.
pub fn fredholm_check(sym: &CompatibleSymbol, ladder: &[usize]) -> Result<FredholmReport> {
    fredholm_check_shaped(sym, ladder, LadderShape::Square)
}

/// Fredholm check along a ladder of the given shape.
pub fn fredholm_check_shaped(sym: &CompatibleSymbol, ladder: &[usize], shape: LadderShape) -> Result<FredholmReport> {
    if ladder.is_empty() {
        return Err(Error::Range("empty ladder".into()));
    }
    let fiber_n = match shape {
        LadderShape::BaseOnly => 0,
        _ => *ladder.last().unwrap(),
    };
    let ellipticity = if shape == LadderShape::BaseOnly {
        // π = id: only the η = 0 line exists; ellipticity is that of the operator part.
        let mut e = ellipticity_check(sym, 0);
        e.elliptic = e.operator_margin > 1e-10;
        e
    } else {
        ellipticity_check(sym, fiber_n.min(16))
    };
    let steps = ladder
        .iter()
        .map(|&n| {
            let g = shape.grid(n, sym.rank);
            let q = quantize(sym, &g)?;
            let ns = linalg::null_spaces(&q.matrix, KERNEL_THRESHOLD)?;
            let (k, c) = count_localized(&ns, &g, &g);
            Ok(FredholmStep {
                n,
                dim_ker: k,
                dim_coker: c,
                raw_ker: ns.kernel.len(),
                raw_coker: ns.cokernel.len(),
                min_regular_singular_value: ns.min_regular_singular_value,
                min_singular_value: ns.min_singular_value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish_report(sym.name.clone(), ellipticity, steps))
}

/// Margins of the two conditions for `D: Im P₁ → Im P₂`.
#[derive(Debug, Clone, Serialize)]
pub struct SubspaceConditions {
    /// Min singular value of `σ_M(D)` restricted to `Im σ_M(P₁) → Im σ_M(P₂)` over samples
    /// (0 when the ranges have different dimensions).
    pub principal_margin: f64,
    /// Same for the fiber-truncated operator symbols at `ξ = ±1`.
    pub operator_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubspaceFredholmReport {
    pub conditions: SubspaceConditions,
    pub steps: Vec<FredholmStep>,
    pub stabilized: bool,
    pub index: Option<i64>,
    pub status: FredholmStatus,
}

/// `U₂ᴴ D U₁` for orthonormal range bases of two projections.
fn restricted_min_sv(d: &DMatrix<Complex64>, p1: &DMatrix<Complex64>, p2: &DMatrix<Complex64>) -> f64 {
    let u1 = linalg::projection_range(p1);
    let u2 = linalg::projection_range(p2);
    if u1.ncols() != u2.ncols() {
        return 0.0;
    }
    if u1.ncols() == 0 {
        return f64::INFINITY;
    }
    linalg::min_singular_value(&(u2.adjoint() * d * u1))
}

/// Largest grid dimension handled by the dense range extraction.
pub const SUBSPACE_DENSE_LIMIT: usize = 2500;

/// Fredholm check of `P̂₂ D̂ P̂₁ : Im P̂₁ → Im P̂₂` along a ladder.
pub fn subspace_fredholm_check(
    d: &CompatibleSymbol,
    p1: &ProjectionSymbol,
    p2: &ProjectionSymbol,
    ladder: &[usize],
    shape: LadderShape,
) -> Result<SubspaceFredholmReport> {
    if ladder.is_empty() {
        return Err(Error::Range("empty ladder".into()));
    }
    let (p1s, p2s) = (&p1.symbol, &p2.symbol);
    if d.rank != p1s.rank || d.rank != p2s.rank {
        return Err(Error::Rank(d.rank, p1s.rank));
    }
    // Condition 1 on S*M∖π*S*X.
    let pts = circle_samples(ANGULAR_SAMPLES);
    let mut principal_margin = f64::INFINITY;
    if shape != LadderShape::BaseOnly {
        for &x in &pts {
            for &y in &pts {
                for &(xi, eta) in &crate::symbols::sphere_directions() {
                    if shape == LadderShape::FiberOnly && xi != 0.0 {
                        continue;
                    }
                    let m = restricted_min_sv(&(d.principal.eval)(x, y, xi, eta), &(p1s.principal.eval)(x, y, xi, eta), &(p2s.principal.eval)(x, y, xi, eta));
                    principal_margin = principal_margin.min(m);
                }
            }
        }
    }
    // Condition 2 on S*X (absent when the base is a point).
    let mut operator_margin = f64::INFINITY;
    if shape != LadderShape::FiberOnly {
        let ny = if shape == LadderShape::BaseOnly { 0 } else { PROJECTION_FIBER_WINDOW };
        for &x in &pts {
            for xi in [-1.0, 1.0] {
                let f = |s: &CompatibleSymbol| s.operator.fiber_matrix(x, xi, ny, ny);
                operator_margin = operator_margin.min(restricted_min_sv(&f(d), &f(p1s), &f(p2s)));
            }
        }
    }
    let conditions = SubspaceConditions { principal_margin, operator_margin };
    let steps = ladder
        .iter()
        .map(|&n| {
            let g = shape.grid(n, d.rank);
            if g.dim() > SUBSPACE_DENSE_LIMIT {
                return Err(Error::Unsupported(format!("subspace check on a grid of dimension {}", g.dim())));
            }
            let dd = quantize(d, &g)?.to_dense();
            let v1 = linalg::projection_range(&quantize(p1s, &g)?.to_dense());
            let v2 = linalg::projection_range(&quantize(p2s, &g)?.to_dense());
            let m = v2.adjoint() * &dd * &v1;
            let ns = linalg::null_spaces(&SparseMatrix::from_dense(&m), KERNEL_THRESHOLD)?;
            // Localize in physical coordinates.
            let lift = |basis: &DMatrix<Complex64>, v: &[(usize, Complex64)]| -> Vec<(usize, Complex64)> {
                (0..basis.nrows())
                    .map(|i| (i, v.iter().map(|&(j, c)| basis[(i, j)] * c).sum()))
                    .collect()
            };
            let k = ns.kernel.iter().filter(|v| is_localized(&lift(&v1, v), &g)).count();
            let c = ns.cokernel.iter().filter(|v| is_localized(&lift(&v2, v), &g)).count();
            Ok(FredholmStep {
                n,
                dim_ker: k,
                dim_coker: c,
                raw_ker: ns.kernel.len(),
                raw_coker: ns.cokernel.len(),
                min_regular_singular_value: ns.min_regular_singular_value,
                min_singular_value: ns.min_singular_value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let margins_ok = conditions.principal_margin > 1e-10 && conditions.operator_margin > 1e-10;
    let tail = &steps[steps.len().saturating_sub(3)..];
    let stabilized = steps.len() >= 3 && tail.iter().all(|s| s.dim_ker == tail[0].dim_ker && s.dim_coker == tail[0].dim_coker);
    let (status, index) = if !margins_ok {
        (FredholmStatus::NotFredholm, None)
    } else if stabilized {
        let s = steps.last().unwrap();
        (FredholmStatus::Fredholm, Some(s.dim_ker as i64 - s.dim_coker as i64))
    } else {
        (FredholmStatus::Inconclusive, None)
    };
    Ok(SubspaceFredholmReport { conditions, steps, stabilized, index, status })
}

/// Essential norm of `σ̂` compared with the symbol norm.
#[derive(Debug, Clone, Serialize)]
pub struct EssNormComparison {
    pub symbol: String,
    pub symbol_norm: f64,
    pub estimate: EssentialNormReport,
    pub perturbed: EssentialNormReport,
    pub relative_error: f64,
    pub perturbation_shift: f64,
}

/// Quantize on `(n, n)`, estimate the essential norm on `shells`, repeat with the fixed rank-5
/// perturbation added.
pub fn ess_norm_comparison(sym: &CompatibleSymbol, n: usize, shells: &[usize]) -> Result<EssNormComparison> {
    let g = FrequencyGrid::new(n, n, sym.rank);
    let q = quantize(sym, &g)?;
    let sn = symbol_norm(sym, n.min(16));
    let est = essential_norm_estimate(&q, shells)?;
    let pert = essential_norm_estimate_perturbed(&q, &rank_five_perturbation(&g, PERTURBATION_SEED), shells)?;
    let relative_error = (est.estimate - sn).abs() / sn.max(1e-300);
    let perturbation_shift = (pert.estimate - est.estimate).abs() / est.estimate.abs().max(1e-300);
    Ok(EssNormComparison { symbol: sym.name.clone(), symbol_norm: sn, estimate: est, perturbed: pert, relative_error, perturbation_shift })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    #[test]
    fn decay_curve_fit() {
        let c = DecayCurve::new(vec![(4, 0.25), (8, 0.125), (16, 0.0625)]).unwrap();
        assert!((c.slope.unwrap() + 1.0).abs() < 1e-12);
        assert!(DecayCurve::new(vec![(4, 0.0), (8, 0.0)]).unwrap().is_exact());
        assert!(DecayCurve::new(vec![(8, 1.0), (4, 0.5)]).is_err());
    }

    #[test]
    fn identity_composition_is_exact() {
        let id = CompatibleSymbol::identity(1);
        let c = composition_residual(&id, &id, &FrequencyGrid::new(8, 8, 1), &[2, 4]).unwrap();
        assert!(c.is_exact());
    }

    #[test]
    fn identity_essential_norm() {
        let g = FrequencyGrid::new(8, 8, 1);
        let r = essential_norm_estimate(&QuantizedOperator::identity(&g), &[2, 4]).unwrap();
        assert!((r.estimate - 1.0).abs() < 1e-9);
    }

    #[test]
    fn winding_index() {
        let r = fredholm_check(&builtins::winding(1), &[8, 12, 16]).unwrap();
        assert_eq!(r.status, FredholmStatus::Fredholm);
        assert_eq!(r.index, Some(-1));
    }

    #[test]
    fn toeplitz_over_a_point() {
        let p = ProjectionSymbol::new(builtins::aps()).unwrap();
        let r = subspace_fredholm_check(&builtins::fiber_shift(), &p, &p, &[8, 12, 16], LadderShape::FiberOnly).unwrap();
        assert_eq!(r.index, Some(-1), "{r:?}");
        assert!(ProjectionSymbol::new(builtins::family1()).is_err());
    }
}
