//! Boundary value problems on the half-cylinder `[0, ∞) × T²` for first-order model operators
//! `D = ∂_t + Â` with constant coefficients, boundary conditions in the range of a projection,
//! and the two worked Hirzebruch-type examples.
//!
//! Everything is mode-diagonal: on the boundary mode `(ξ, η)` the problem is the ODE system
//! `u' + A(ξ, η)u = f`, `P B u(0) = g`. Bounded solutions of the homogeneous system start in
//! `L₊ = Im Q`, `Q` the spectral projection of `A` onto `Re λ > 0` (the Calderón projection).
//! Modes where `A` has eigenvalues on the imaginary axis (only `(0,0)` for the corpus) are kept
//! out of `Q` and accounted for explicitly.

use crate::builtins;
use crate::calkin::ProjectionSymbol;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::linalg;
use crate::symbols::{cplx, sgn, sphere_directions, Bandwidth, CompatibleSymbol, EtaConvention, FiberFn, Mat, OperatorSymbol, PointFn, PrincipalSymbol, SymbolKind};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Eigenvalues with `|Re λ|` below this are treated as lying on the imaginary axis.
pub const IMAGINARY_AXIS_TOL: f64 = 1e-10;

/// Singular values below this count as rank deficiency of per-mode boundary maps.
pub const RANK_TOL: f64 = 1e-8;

/// Normal-coordinate reporting grid `t_k = 5·2^k/2^32`, `k = 0..=32`.
pub fn t_grid() -> Vec<f64> {
    (0..=32).map(|k| 5.0 * 2f64.powi(k) / 2f64.powi(32)).collect()
}

/// `D = ∂_t + Â` with a constant-coefficient tangential symbol `A(ξ, η)`.
#[derive(Clone)]
pub struct ModelOperator {
    pub name: String,
    pub rank: usize,
    /// Order in `t` (only 1 is supported).
    pub order: usize,
    pub block: Arc<dyn Fn(f64, f64) -> Mat + Send + Sync>,
}

impl std::fmt::Debug for ModelOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelOperator").field("name", &self.name).field("rank", &self.rank).finish()
    }
}

impl ModelOperator {
    pub fn new(name: &str, rank: usize, block: impl Fn(f64, f64) -> Mat + Send + Sync + 'static) -> Self {
        ModelOperator { name: name.into(), rank, order: 1, block: Arc::new(block) }
    }

    pub fn at(&self, xi: f64, eta: f64) -> Mat {
        (self.block)(xi, eta)
    }

    /// `min |Re λ(A(ξ,η))|` over sampled unit covectors: positive iff `D` is elliptic there.
    pub fn ellipticity_margin(&self) -> f64 {
        sphere_directions().iter().map(|&(xi, eta)| eigenvalues(&self.at(xi, eta)).iter().map(|l| l.re.abs()).fold(f64::INFINITY, f64::min)).fold(f64::INFINITY, f64::min)
    }
}

/// Eigenvalues of a square complex matrix (Schur form).
pub fn eigenvalues(a: &Mat) -> Vec<Complex64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    a.clone().schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
}

/// Matrix sign function by the scaled Newton iteration `X ← (X + X⁻¹)/2`.
pub fn matrix_sign(a: &Mat) -> Result<Mat> {
    let n = a.nrows();
    let id = DMatrix::<Complex64>::identity(n, n);
    let scale = a.norm();
    if scale == 0.0 {
        return Err(Error::Singular("sign of the zero matrix".into()));
    }
    let mut x = a / cplx(scale);
    for _ in 0..100 {
        let inv = x.clone().try_inverse().ok_or_else(|| Error::Singular("eigenvalue on the imaginary axis".into()))?;
        let next = (&x + inv) * cplx(0.5);
        let done = (&next - &x).norm() <= 1e-15 * next.norm().max(1.0);
        x = next;
        if done && (&x * &x - &id).norm() < 1e-12 {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence("matrix sign iteration".into()))
}

/// Per-mode spectral data of `A`.
#[derive(Debug, Clone)]
pub struct ModeSplitting {
    pub xi: i64,
    pub eta: i64,
    /// Calderón projection onto `Re λ > 0` along `Re λ < 0` (zero for zero modes).
    pub q: Mat,
    /// Orthonormal basis of the space of bounded homogeneous solutions' initial values:
    /// `Im Q` for ordinary modes, `Im Q ⊕ {Re λ = 0 eigenvectors}` for zero modes.
    pub bounded: Mat,
    pub zero_mode: bool,
}

/// Calderón projections of a model operator on every mode of a boundary grid.
#[derive(Debug, Clone)]
pub struct CalderonData {
    pub grid: FrequencyGrid,
    pub modes: Vec<ModeSplitting>,
    /// Modes with eigenvalues on the imaginary axis.
    pub zero_modes: Vec<(i64, i64)>,
}

impl CalderonData {
    pub fn mode(&self, xi: i64, eta: i64) -> &ModeSplitting {
        &self.modes[self.grid.mode_index(xi, eta)]
    }

    /// Block-diagonal `Q̂` on the grid.
    pub fn operator(&self) -> crate::operator::QuantizedOperator {
        let r = self.grid.rank;
        let cols: Vec<Vec<(usize, Complex64)>> = (0..self.grid.dim())
            .map(|j| {
                let (xi, eta, c) = self.grid.mode_of(j);
                let m = self.mode(xi, eta);
                (0..r).map(|a| (self.grid.index(xi, eta, a), m.q[(a, c)])).collect()
            })
            .collect();
        crate::operator::QuantizedOperator::new(self.grid, self.grid, crate::operator::SparseMatrix::from_columns(self.grid.dim(), cols), "calderon")
    }
}

/// Spectral projection of `A` onto `Re λ > 0` (`(I + sign A)/2`).
pub fn calderon_at(a: &Mat) -> Result<Mat> {
    let n = a.nrows();
    Ok((DMatrix::identity(n, n) + matrix_sign(a)?) * cplx(0.5))
}

/// Splitting on one mode, with bookkeeping of imaginary-axis eigenvalues.
pub fn split_mode(d: &ModelOperator, xi: i64, eta: i64) -> Result<ModeSplitting> {
    let a = d.at(xi as f64, eta as f64);
    let r = d.rank;
    let ev = eigenvalues(&a);
    let on_axis: Vec<Complex64> = ev.iter().copied().filter(|l| l.re.abs() < IMAGINARY_AXIS_TOL).collect();
    if on_axis.is_empty() {
        let q = calderon_at(&a)?;
        let bounded = idempotent_range(&q);
        return Ok(ModeSplitting { xi, eta, q, bounded, zero_mode: false });
    }
    // Zero mode: the decaying part (if any) plus eigenvectors on the imaginary axis.
    let mut cols: Vec<DVector<Complex64>> = Vec::new();
    let pos: Vec<Complex64> = ev.iter().copied().filter(|l| l.re > IMAGINARY_AXIS_TOL).collect();
    let mut distinct: Vec<Complex64> = Vec::new();
    for l in pos.iter().chain(on_axis.iter()) {
        if distinct.iter().all(|d| (d - l).norm() > 1e-8) {
            distinct.push(*l);
        }
    }
    for l in &distinct {
        let shifted = &a - DMatrix::identity(r, r) * *l;
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("right singular vectors");
        for (k, s) in svd.singular_values.iter().enumerate() {
            if *s < 1e-8 * a.norm().max(1.0) {
                cols.push(vt.row(k).adjoint());
            }
        }
    }
    let raw = DMatrix::from_fn(r, cols.len(), |i, j| cols[j][i]);
    let bounded = if raw.ncols() == 0 { raw } else { linalg::range_basis(&raw, 1e-10) };
    Ok(ModeSplitting { xi, eta, q: DMatrix::zeros(r, r), bounded, zero_mode: true })
}

/// Orthonormal basis of the range of a (possibly oblique) idempotent: its rank is the rounded
/// trace, and the range is spanned by the leading left singular vectors.
pub fn idempotent_range(q: &Mat) -> Mat {
    let rank = q.trace().re.round().max(0.0) as usize;
    if rank == 0 {
        return DMatrix::zeros(q.nrows(), 0);
    }
    let svd = q.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    DMatrix::from_fn(q.nrows(), rank, |i, j| u[(i, order[j])])
}

/// Calderón data on every mode of `grid`.
pub fn calderon_projection(d: &ModelOperator, grid: &FrequencyGrid) -> Result<CalderonData> {
    if grid.rank != d.rank {
        return Err(Error::Rank(grid.rank, d.rank));
    }
    let g = grid.with_rank(d.rank);
    let modes: Vec<(i64, i64)> = g.modes().collect();
    let modes = modes.par_iter().map(|&(xi, eta)| split_mode(d, xi, eta)).collect::<Result<Vec<_>>>()?;
    let zero_modes = modes.iter().filter(|m| m.zero_mode).map(|m| (m.xi, m.eta)).collect();
    Ok(CalderonData { grid: g, modes, zero_modes })
}

/// Projection onto `Re λ < 0`, built independently from `−A` (so `Q + Q′ = I` is a check).
pub fn complementary_calderon(d: &ModelOperator, xi: f64, eta: f64) -> Result<Mat> {
    calderon_at(&(-d.at(xi, eta)))
}

/// A boundary problem `D u = f`, `P B u|_{t=0} = g ∈ Im P`.
#[derive(Debug, Clone)]
pub struct BoundaryProblem {
    pub name: String,
    pub model: ModelOperator,
    pub b: CompatibleSymbol,
    pub p: ProjectionSymbol,
}

/// Order of the boundary jet `j` (the trace).
pub const JET_ORDER: usize = 0;

impl BoundaryProblem {
    pub fn new(name: &str, model: ModelOperator, b: CompatibleSymbol, p: ProjectionSymbol) -> Result<Self> {
        if model.order != 1 {
            return Err(Error::Unsupported(format!("model operators of order {} (only order 1)", model.order)));
        }
        if b.rank != model.rank || p.symbol.rank != model.rank {
            return Err(Error::Rank(b.rank, model.rank));
        }
        for s in [&b, &p.symbol] {
            if s.band() != Bandwidth::CONSTANT {
                return Err(Error::Unsupported(format!("{}: boundary operators must have constant coefficients (mode-diagonal)", s.name)));
            }
        }
        Ok(BoundaryProblem { name: name.into(), model, b, p })
    }
}

/// Per-mode matrix of a constant-coefficient compatible pair: the column symbol used by the
/// quantization at `(ξ, η)`.
pub fn mode_matrix(s: &CompatibleSymbol, xi: i64, eta: i64) -> Mat {
    let (xf, ef) = (xi as f64, eta as f64);
    let xs = sgn(xf);
    let conv = EtaConvention::Plus;
    s.principal.lattice_value(0.0, 0.0, xf, ef, conv) + (s.operator.full)(0.0, xs, 0.0, ef) - (s.principal.limit)(0.0, 0.0, xs, conv.eta_sign(ef))
}

/// `U₂ᴴ M U₁` between two orthonormal bases; min singular value (0 on dimension mismatch).
fn restricted_margin(m: &Mat, u1: &Mat, u2: &Mat) -> f64 {
    if u1.ncols() != u2.ncols() {
        return 0.0;
    }
    if u1.ncols() == 0 {
        return f64::INFINITY;
    }
    linalg::min_singular_value(&(u2.adjoint() * m * u1))
}

/// Margins of the two ellipticity conditions of a boundary problem.
#[derive(Debug, Clone, Serialize)]
pub struct BvpEllipticityReport {
    /// Condition 1: `σ(B): Im σ(Q) → Im σ(P)` over sampled `S*∂M∖π*S*X`.
    pub principal_margin: f64,
    /// Condition 2: `σ_X(B): Im σ_X(Q) → Im σ_X(P)` on fiber windows at `ξ = ±1`
    /// (`+∞` when vacuous).
    pub operator_margin: f64,
    /// Minimal restricted-map singular value over the nonzero modes of the grid.
    pub mode_margin: f64,
    pub zero_modes: Vec<(i64, i64)>,
    /// Degenerate grid `N_y = 0` (fiber a point): classical check, condition 2 vacuous.
    pub classical: bool,
    pub fredholm: bool,
}

/// Both conditions plus a per-mode sweep on `grid`.
pub fn bvp_ellipticity_check(bvp: &BoundaryProblem, grid: &FrequencyGrid) -> Result<BvpEllipticityReport> {
    let classical = grid.n_fiber_modes == 0;
    let (b, p) = (&bvp.b, &bvp.p.symbol);
    let range = idempotent_range;
    let principal_margin = if classical {
        // π = id: the only covectors are (±1, 0); the symbols act by their horizontal values.
        [-1i64, 1]
            .iter()
            .map(|&xi| {
                let q = calderon_at(&bvp.model.at(xi as f64, 0.0))?;
                Ok(restricted_margin(&mode_matrix(b, xi, 0), &idempotent_range(&q), &range(&mode_matrix(p, xi, 0))))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    } else {
        let mut m = f64::INFINITY;
        for &(xi, eta) in &sphere_directions() {
            if eta == 0.0 {
                continue;
            }
            let q = calderon_at(&bvp.model.at(xi, eta))?;
            let pb = (b.principal.eval)(0.0, 0.0, xi, eta);
            let pp = (p.principal.eval)(0.0, 0.0, xi, eta);
            m = m.min(restricted_margin(&pb, &idempotent_range(&q), &range(&pp)));
        }
        m
    };
    let operator_margin = if classical {
        f64::INFINITY
    } else {
        let ny = grid.n_fiber_modes;
        let r = bvp.model.rank;
        let mut m = f64::INFINITY;
        for xi in [-1.0, 1.0] {
            // σ_X(Q)(ξ) = lim_{λ→∞} Q(λξ, η) = Q(ξ, 0), acting by multiplication on every fiber mode.
            let q0 = calderon_at(&bvp.model.at(xi, 0.0))?;
            let u0 = idempotent_range(&q0);
            let k = u0.ncols();
            let dim = (2 * ny + 1) * r;
            let uq = DMatrix::from_fn(dim, (2 * ny + 1) * k, |i, j| if i / r == j / k.max(1) { u0[(i % r, j % k.max(1))] } else { cplx(0.0) });
            let bx = b.operator.fiber_matrix(0.0, xi, ny, ny);
            let px = p.operator.fiber_matrix(0.0, xi, ny, ny);
            m = m.min(restricted_margin(&bx, &uq, &range(&px)));
        }
        m
    };
    let cd = calderon_projection(&bvp.model, &grid.with_rank(bvp.model.rank))?;
    let mode_margin = cd
        .modes
        .par_iter()
        .filter(|s| !s.zero_mode)
        .map(|s| restricted_margin(&mode_matrix(b, s.xi, s.eta), &s.bounded, &range(&mode_matrix(p, s.xi, s.eta))))
        .reduce(|| f64::INFINITY, f64::min);
    let fredholm = principal_margin > RANK_TOL && operator_margin > RANK_TOL;
    Ok(BvpEllipticityReport { principal_margin, operator_margin, mode_margin, zero_modes: cd.zero_modes, classical, fredholm })
}

/// Kernel/cokernel counts of the boundary compression on one grid.
#[derive(Debug, Clone, Serialize)]
pub struct BvpIndexStep {
    pub nx: usize,
    pub ny: usize,
    /// Counts over modes without imaginary-axis eigenvalues.
    pub dim_ker: usize,
    pub dim_coker: usize,
    /// Contributions of the zero modes (bounded, non-decaying solutions included).
    pub zero_mode_ker: usize,
    pub zero_mode_coker: usize,
    /// Index with the zero-mode bookkeeping.
    pub index: i64,
    /// Index if zero modes were treated like ordinary modes with `Q = 0` (strict decay only).
    pub index_strict_decay: i64,
    pub min_singular_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BvpIndexReport {
    pub problem: String,
    pub steps: Vec<BvpIndexStep>,
    pub stabilized: bool,
    pub index: Option<i64>,
}

fn mode_counts(m: &Mat, u1: &Mat, u2: &Mat) -> (usize, usize, f64) {
    let (k1, k2) = (u1.ncols(), u2.ncols());
    if k1 == 0 || k2 == 0 {
        return (k1, k2, if k1 == k2 { f64::INFINITY } else { 0.0 });
    }
    let c = u2.adjoint() * m * u1;
    let sv = linalg::dense_singular_values(&c);
    let rank = sv.iter().filter(|&&s| s > RANK_TOL).count();
    let smin = if k1 == k2 { sv.last().copied().unwrap_or(0.0) } else { 0.0 };
    (k1 - rank, k2 - rank, smin)
}

/// Index of `P B|: Im Q̂ → Im P̂` on one grid.
pub fn bvp_index_on(bvp: &BoundaryProblem, grid: &FrequencyGrid) -> Result<BvpIndexStep> {
    let cd = calderon_projection(&bvp.model, &grid.with_rank(bvp.model.rank))?;
    let range = idempotent_range;
    let per: Vec<(bool, usize, usize, usize, f64)> = cd
        .modes
        .par_iter()
        .map(|s| {
            let bm = mode_matrix(&bvp.b, s.xi, s.eta);
            let up = range(&mode_matrix(&bvp.p.symbol, s.xi, s.eta));
            let (k, c, smin) = mode_counts(&bm, &s.bounded, &up);
            // Strict decay: only Im Q counts (zero for zero modes).
            let strict_c = if s.zero_mode { up.ncols() } else { c };
            (s.zero_mode, k, c, strict_c, smin)
        })
        .collect();
    let mut st = BvpIndexStep {
        nx: grid.n_base_modes,
        ny: grid.n_fiber_modes,
        dim_ker: 0,
        dim_coker: 0,
        zero_mode_ker: 0,
        zero_mode_coker: 0,
        index: 0,
        index_strict_decay: 0,
        min_singular_value: f64::INFINITY,
    };
    let mut strict = 0i64;
    for (zero, k, c, sc, smin) in per {
        if zero {
            st.zero_mode_ker += k;
            st.zero_mode_coker += c;
            strict -= sc as i64;
        } else {
            st.dim_ker += k;
            st.dim_coker += c;
            st.min_singular_value = st.min_singular_value.min(smin);
            strict += k as i64 - c as i64;
        }
    }
    st.index = (st.dim_ker + st.zero_mode_ker) as i64 - (st.dim_coker + st.zero_mode_coker) as i64;
    st.index_strict_decay = strict;
    Ok(st)
}

/// Index along a ladder of `(n, n)` grids (or `(n, 0)` when `classical`).
pub fn bvp_index(bvp: &BoundaryProblem, ladder: &[usize], classical: bool) -> Result<BvpIndexReport> {
    let steps = ladder
        .iter()
        .map(|&n| bvp_index_on(bvp, &FrequencyGrid::new(n, if classical { 0 } else { n }, bvp.model.rank)))
        .collect::<Result<Vec<_>>>()?;
    let tail = &steps[steps.len().saturating_sub(3)..];
    let stabilized = steps.len() >= 2 && tail.iter().all(|s| s.index == tail[0].index && s.dim_ker == tail[0].dim_ker && s.dim_coker == tail[0].dim_coker);
    let index = if stabilized { Some(tail[0].index) } else { None };
    Ok(BvpIndexReport { problem: bvp.name.clone(), steps, stabilized, index })
}

/// Interior data `f(t) = Σ_k e^{−μ_k t} c_k` with coefficient vectors over the grid.
#[derive(Debug, Clone)]
pub struct InteriorData {
    pub terms: Vec<(f64, Vec<Complex64>)>,
}

/// Per-mode solution `u(t) = Σ_k e^{−μ_k t} v_k + e^{−At} w`.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub xi: i64,
    pub eta: i64,
    pub particular: Vec<(f64, DVector<Complex64>)>,
    pub w: DVector<Complex64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BvpResiduals {
    /// `sup_{t,mode} ‖Du − f‖ / sup ‖f‖` on the reporting grid.
    pub equation: f64,
    /// `‖P B u(0) − g‖ / ‖g‖`.
    pub boundary: f64,
    /// Modes `(ξ, η, dim)` where the homogeneous problem has bounded solutions with zero
    /// boundary data; the minimal-norm solution is returned there.
    pub kernel: Vec<(i64, i64, usize)>,
    /// Modes where `g` cannot be matched in general (least-squares solution used).
    pub cokernel: Vec<(i64, i64, usize)>,
}

#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub grid: FrequencyGrid,
    pub modes: Vec<ModeSolution>,
    pub residuals: BvpResiduals,
    model: ModelOperator,
}

impl BvpSolution {
    /// `u(t)` on mode `(ξ, η)`.
    pub fn value(&self, xi: i64, eta: i64, t: f64) -> DVector<Complex64> {
        let s = &self.modes[self.grid.mode_index(xi, eta)];
        let a = self.model.at(xi as f64, eta as f64);
        let mut u = (a * cplx(-t)).exp() * &s.w;
        for (mu, v) in &s.particular {
            u += v * cplx((-mu * t).exp());
        }
        u
    }
}

fn mode_slice(v: &[Complex64], grid: &FrequencyGrid, xi: i64, eta: i64) -> DVector<Complex64> {
    DVector::from_iterator(grid.rank, (0..grid.rank).map(|c| v[grid.index(xi, eta, c)]))
}

/// Solves the problem mode by mode; `g` must lie in `Im P̂`.
pub fn bvp_solve(bvp: &BoundaryProblem, grid: &FrequencyGrid, f: &InteriorData, g: &[Complex64]) -> Result<BvpSolution> {
    let grid = grid.with_rank(bvp.model.rank);
    if g.len() != grid.dim() || f.terms.iter().any(|(_, c)| c.len() != grid.dim()) {
        return Err(Error::Dimension("data do not match the grid".into()));
    }
    if f.terms.iter().any(|(mu, _)| !(*mu > 0.0)) {
        return Err(Error::Range("interior data must decay (μ > 0)".into()));
    }
    let cd = calderon_projection(&bvp.model, &grid)?;
    let r = grid.rank;
    let tg = t_grid();
    let results: Vec<(ModeSolution, f64, f64, f64, f64, usize, usize)> = cd
        .modes
        .par_iter()
        .map(|s| {
            let a = bvp.model.at(s.xi as f64, s.eta as f64);
            let mut particular = Vec::new();
            for (mu, c) in &f.terms {
                let cm = mode_slice(c, &grid, s.xi, s.eta);
                let shifted = &a - DMatrix::identity(r, r) * cplx(*mu);
                let v = shifted.clone().lu().solve(&cm).ok_or_else(|| Error::Singular(format!("μ = {mu} is an eigenvalue of A at mode ({}, {})", s.xi, s.eta)))?;
                particular.push((*mu, v));
            }
            // Equation residual on the t-grid (the homogeneous part solves Du = 0 exactly).
            let (mut eq, mut fmax): (f64, f64) = (0.0, 0.0);
            for &t in &tg {
                let mut res = DVector::<Complex64>::zeros(r);
                let mut fv = DVector::<Complex64>::zeros(r);
                for ((mu, v), (_, c)) in particular.iter().zip(&f.terms) {
                    let e = cplx((-mu * t).exp());
                    let cm = mode_slice(c, &grid, s.xi, s.eta);
                    res += (&a * v - v * cplx(*mu) - &cm) * e;
                    fv += cm * e;
                }
                eq = eq.max(res.norm());
                fmax = fmax.max(fv.norm());
            }
            // Boundary condition: P B (u_p(0) + U z) = g with w = U z.
            let bm = mode_matrix(&bvp.b, s.xi, s.eta);
            let pm = mode_matrix(&bvp.p.symbol, s.xi, s.eta);
            let gm = mode_slice(g, &grid, s.xi, s.eta);
            let up0: DVector<Complex64> = particular.iter().fold(DVector::zeros(r), |acc, (_, v)| acc + v);
            let pb = &pm * &bm;
            let rhs = &gm - &pb * &up0;
            let u = &s.bounded;
            let up = idempotent_range(&pm);
            // Kernel/cokernel of the boundary map U_Pᴴ P B: span(bounded) → Im P on this mode.
            let (ker, coker, _) = mode_counts(&pb, u, &up);
            let w = if u.ncols() == 0 {
                DVector::zeros(r)
            } else {
                let z = (&pb * u).svd(true, true).solve(&rhs, RANK_TOL).map_err(|e| Error::Singular(e.to_string()))?;
                u * z
            };
            let bres = (&pb * (&up0 + &w) - &gm).norm();
            Ok((ModeSolution { xi: s.xi, eta: s.eta, particular, w }, eq, fmax, bres, gm.norm(), ker, coker))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut eq, mut fmax, mut b2, mut g2) = (0.0f64, 0.0f64, 0.0, 0.0);
    let (mut kernel, mut cokernel) = (Vec::new(), Vec::new());
    let mut modes = Vec::with_capacity(results.len());
    for (m, e, fm, br, gn, k, c) in results {
        if k > 0 {
            kernel.push((m.xi, m.eta, k));
        }
        if c > 0 {
            cokernel.push((m.xi, m.eta, c));
        }
        eq = eq.max(e);
        fmax = fmax.max(fm);
        b2 += br * br;
        g2 += gn * gn;
        modes.push(m);
    }
    let residuals = BvpResiduals {
        equation: if fmax > 0.0 { eq / fmax } else { eq },
        boundary: if g2 > 0.0 { (b2 / g2).sqrt() } else { b2.sqrt() },
        kernel,
        cokernel,
    };
    Ok(BvpSolution { grid, modes, residuals, model: bvp.model.clone() })
}

/// Seeded smooth random data: three decay rates, coefficients decaying in the mode shell, and
/// `g` projected into `Im P̂`.
pub fn random_data(bvp: &BoundaryProblem, grid: &FrequencyGrid, seed: u64) -> (InteriorData, Vec<Complex64>) {
    let grid = grid.with_rank(bvp.model.rank);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vec = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        (0..grid.dim())
            .map(|i| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (-(grid.shell_of(i) as f64) / 4.0).exp())
            .collect()
    };
    // Rates whose squares are neither integers nor ≡ 1/4 mod 1, so they avoid the eigenvalues
    // ±|ζ| of the corpus models (including the half-shifted fiber operator).
    let terms = [0.7, 1.3, 2.7].iter().map(|&mu| (mu, vec(&mut rng))).collect();
    let raw = vec(&mut rng);
    let mut g = vec![cplx(0.0); grid.dim()];
    for (xi, eta) in grid.modes() {
        let pm = mode_matrix(&bvp.p.symbol, xi, eta);
        let v = &pm * mode_slice(&raw, &grid, xi, eta);
        for c in 0..grid.rank {
            g[grid.index(xi, eta, c)] = v[c];
        }
    }
    (InteriorData { terms }, g)
}

// ---------------------------------------------------------------------------------------------
// Spectral projections and examples
// ---------------------------------------------------------------------------------------------

/// Nonnegative spectral projection of a self-adjoint constant-coefficient fiber operator with
/// real symbol `d(η)`: the multiplier `1_{d(η) ≥ 0}`, principal part `1_{d(tη̂) > 0}` for large
/// `t`. Errors on near-ties `0 < |d(η)| ≤ 1e−10` on the checked window.
pub fn aps_projection(name: &str, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<ProjectionSymbol> {
    let d = Arc::new(d);
    for eta in -64..=64 {
        let v = d(eta as f64);
        if v != 0.0 && v.abs() <= 1e-10 {
            return Err(Error::Range(format!("{name}: eigenvalue {v:e} at η = {eta} is a near-tie with 0")));
        }
    }
    let d1 = d.clone();
    let full: FiberFn = Arc::new(move |_, _, _, eta| DMatrix::from_element(1, 1, cplx(if d1(eta) >= 0.0 { 1.0 } else { 0.0 })));
    let d2 = d.clone();
    let principal: FiberFn = Arc::new(move |_, _, _, eh| DMatrix::from_element(1, 1, cplx(if d2(eh * 1e8) > 0.0 { 1.0 } else { 0.0 })));
    ProjectionSymbol::new(CompatibleSymbol::family(name, 1, full, principal, 0, Bandwidth::CONSTANT))
}

/// The `example3` problem: `D = ∂_t + [[D_Y, D_X*], [D_X, −D_Y]]` with `D_Y = −i∂_y`, `D_X = −i∂_x`, and
/// `Π₊u|_{t=0} = g₁`, `Π₋v|_{t=0} = g₂`.
pub fn example3_problem() -> Result<BoundaryProblem> {
    let model = ModelOperator::new("example3", 2, builtins::hirzebruch_block);
    let p = ProjectionSymbol::new(builtins::hirzebruch_boundary())?;
    BoundaryProblem::new("example3", model, builtins::hirzebruch_boundary(), p)
}

/// Fiber weight of the `example4` boundary operator `D_Y*(Δ_Y + 1)^{−κ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Example4Variant {
    /// `D_Y = ∂_y` and weight `(Δ_Y+1)^{−1}`: the per-mode entry is `−iη/(η²+1)`.
    AsStated,
    /// Diagnostic variant (not the stated problem): `D_Y = ∂_y + ½` (invertible on `S¹`) and
    /// weight `(Δ_Y+1)^{−1/2}`, entry `−i(η+½)/((η+½)²+1)^{1/2}` of order 0.
    HalfWeight,
}

/// The `example4` problem: `D = ∂_t + [[D_X, D_Y*], [D_Y, −D_X]]`, `u|_{t=0} + D_Y*(Δ_Y+1)^{−1} v|_{t=0} = g`.
///
/// Only the untwisted fiber operator (`n = 0`) gives a constant-coefficient problem; twisted
/// families are analyzed through the obstruction invariant instead.
pub fn example4_problem(n: i64, variant: Example4Variant) -> Result<BoundaryProblem> {
    if n != 0 {
        return Err(Error::Unsupported(format!(
            "example4 with twist n = {n}: the twisted fiber family is not mode-diagonal and its obstruction (n·w) does not vanish; see the obstruction module"
        )));
    }
    let shift = if variant == Example4Variant::HalfWeight { 0.5 } else { 0.0 };
    let model = ModelOperator::new("example4", 2, move |xi, eta| {
        let dy = Complex64::new(0.0, eta + shift);
        DMatrix::from_row_slice(2, 2, &[cplx(xi), dy.conj(), dy, cplx(-xi)])
    });
    let entry = move |eta: f64| -> Complex64 {
        let e = eta + shift;
        match variant {
            Example4Variant::AsStated => Complex64::new(0.0, -e) / (e * e + 1.0),
            Example4Variant::HalfWeight => Complex64::new(0.0, -e) / (e * e + 1.0).sqrt(),
        }
    };
    let bmat = move |k: Complex64| DMatrix::from_row_slice(2, 2, &[cplx(1.0), k, cplx(0.0), cplx(0.0)]);
    // Principal parts: the weighted entry has order −1 (vanishes) or 0 (tends to −i sign η).
    let principal_entry = move |eh: f64| -> Complex64 {
        match variant {
            Example4Variant::AsStated => cplx(0.0),
            Example4Variant::HalfWeight => Complex64::new(0.0, -sgn(eh)),
        }
    };
    let pe: PointFn = Arc::new(move |_, _, _, eta| bmat(principal_entry(eta)));
    let limit: PointFn = Arc::new(move |_, _, _, eh| bmat(principal_entry(eh)));
    let full: FiberFn = Arc::new(move |_, _, _, eta| bmat(entry(eta)));
    let oprin: FiberFn = Arc::new(move |_, _, _, eh| bmat(principal_entry(eh)));
    let order = if variant == Example4Variant::AsStated { -1 } else { 0 };
    let b = CompatibleSymbol::new(
        "example4_boundary",
        PrincipalSymbol::new(2, pe, limit, Bandwidth::CONSTANT, usize::MAX),
        OperatorSymbol::new(2, full, oprin, order, Bandwidth::CONSTANT),
        SymbolKind::FiberFamily,
    )?;
    let diag: PointFn = Arc::new(|_, _, _, _| DMatrix::from_row_slice(2, 2, &[cplx(1.0), cplx(0.0), cplx(0.0), cplx(0.0)]));
    let p = ProjectionSymbol::new(CompatibleSymbol::smooth("first_component", 2, diag.clone(), diag, Bandwidth::CONSTANT))?;
    BoundaryProblem::new(&format!("example4:{n}"), model, b, p)
}

/// Scalar model `∂_t + |ζ|` with full trace condition: `u = e^{−|ζ|t} g` on every nonzero mode.
pub fn scalar_trace_problem() -> Result<BoundaryProblem> {
    let model = ModelOperator::new("scalar", 1, |xi, eta| DMatrix::from_element(1, 1, cplx((xi * xi + eta * eta).sqrt())));
    let id = CompatibleSymbol::identity(1);
    BoundaryProblem::new("scalar_trace", model, id.clone(), ProjectionSymbol::new(id)?)
}
