//! The boundary obstruction for a base circle: families of truncated fiber operators over the
//! ball bundle `{ξ² + τ² ≤ 1}`, invertible on the sphere, and their determinant winding.
//!
//! A family is built from a fiber model that supplies the reflection `2Q̂ − 1` of a Calderón
//! projection, with fiber frequencies rescaled by `ρ = 1 − ξ² − τ²`, and
//!
//! `D(x, ξ, τ) = (2Q̂(ξ, τ) − 1)(|ξ| + ρ) + iτ`.
//!
//! On the sphere (`ρ = 0`) the fiber argument collapses to `η ρ = 0`, so the matrix is built from
//! the horizontal values only. The winding of `det D` along the sphere loop
//! `(ξ, τ) = (cos θ, sin θ)` is the integer invariant; it is reported with the clockwise
//! orientation, so that the twisted model gives `n·w`.

use crate::boundary::{calderon_at, ModelOperator};
use crate::error::{Error, Result};
use crate::calkin::ProjectionSymbol;
use crate::linalg;
use crate::symbols::{cplx, sgn, symbol_add, symbol_mul, symbol_scale, Bandwidth, CompatibleSymbol, EtaConvention, Mat};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

/// Default number of samples on the sphere loop.
pub const LOOP_SAMPLES: usize = 256;

/// Largest admissible phase change between adjacent loop samples before refinement.
pub const MAX_PHASE_STEP: f64 = PI / 2.0;

/// Sphere invertibility below this is a construction error.
pub const SPHERE_MARGIN_MIN: f64 = 1e-8;

/// Source of the truncated fiber operators of an obstruction family.
pub trait FiberModel: Send + Sync {
    fn name(&self) -> String;
    /// `2Q̂ − 1` at base point `x`, base covector `ξ`, fiber frequencies scaled by `ρ`, on the
    /// fiber truncation `[−f, f]`.
    fn reflection(&self, x: f64, xi: f64, rho: f64, f: usize) -> Result<Mat>;
    /// The difference-construction representative `(2σ(Q) − 1)|ζ|` (without `iτ`).
    fn difference_symbol(&self, x: f64, xi: f64, f: usize) -> Result<Mat>;
}

fn block_diag(blocks: &[Mat]) -> Mat {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let m: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(n, m);
    let (mut i, mut j) = (0, 0);
    for b in blocks {
        out.view_mut((i, j), (b.nrows(), b.ncols())).copy_from(b);
        i += b.nrows();
        j += b.ncols();
    }
    out
}

/// Direction used on the horizontal covector `η = 0` (and at the origin): `(sgn ξ, 0)`.
fn horizontal(xi: f64, eta: f64) -> (f64, f64) {
    if eta == 0.0 {
        (sgn(xi), 0.0)
    } else {
        (xi, eta)
    }
}

/// Mode-diagonal families from a constant-coefficient model operator: `Q` is the Calderón
/// projection of `A(ξ, ρη)` on every fiber mode.
impl FiberModel for ModelOperator {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn reflection(&self, _x: f64, xi: f64, rho: f64, f: usize) -> Result<Mat> {
        let r = self.rank;
        let blocks = (-(f as i64)..=f as i64)
            .map(|eta| {
                let (a, b) = horizontal(xi, rho * eta as f64);
                Ok(calderon_at(&self.at(a, b))? * cplx(2.0) - DMatrix::identity(r, r))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(block_diag(&blocks))
    }

    fn difference_symbol(&self, _x: f64, xi: f64, f: usize) -> Result<Mat> {
        let r = self.rank;
        let blocks = (-(f as i64)..=f as i64)
            .map(|eta| {
                let e = eta as f64;
                let size = (xi * xi + e * e).sqrt();
                if size == 0.0 {
                    return Ok(DMatrix::zeros(r, r));
                }
                let (a, b) = horizontal(xi, e);
                Ok((calderon_at(&self.at(a, b))? * cplx(2.0) - DMatrix::identity(r, r)) * cplx(size))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(block_diag(&blocks))
    }
}

/// Twisted model: fiber operator `T_n` (compression of multiplication by `e^{iny}` to the
/// modes `η ≥ 0`, identity on `η < 0`; index `−n`) against the base symbol `σ_w(ξ)` of
/// degree `w` (`ξ`, `|ξ|`, `−ξ` for `w = 1, 0, −1`), in the block form
/// `[[σ_w, ρ T_n*], [ρ T_n, −σ_w]]`.
///
/// `T_n` is truncated rectangularly from `[−f, f]` to `[−f, f + n]` so that the truncation keeps
/// its index; `Q̂` is only an almost-projection on the defect modes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TwistedModel {
    pub n: i64,
    pub w: i64,
}

impl TwistedModel {
    pub fn new(n: i64, w: i64) -> Result<Self> {
        if !(-1..=1).contains(&w) {
            return Err(Error::Range(format!("base degree w = {w} (must be −1, 0 or 1)")));
        }
        Ok(TwistedModel { n, w })
    }

    /// Base symbol of degree `w`.
    pub fn base_symbol(&self, xi: f64) -> f64 {
        match self.w {
            1 => xi,
            -1 => -xi,
            _ => xi.abs(),
        }
    }

    /// Rectangular truncation of `T_n`: `(2f + 1 + n) × (2f + 1)`.
    pub fn toeplitz(&self, f: usize) -> Mat {
        let fi = f as i64;
        let hi = fi + self.n;
        let rows = (hi + fi + 1).max(0) as usize;
        let mut t = DMatrix::zeros(rows, 2 * f + 1);
        for (j, eta) in (-fi..=fi).enumerate() {
            let target = if eta < 0 { eta } else { eta + self.n };
            if eta >= 0 && target < 0 {
                continue;
            }
            if (-fi..=hi).contains(&target) {
                t[((target + fi) as usize, j)] = cplx(1.0);
            }
        }
        t
    }

    fn blocks(&self, s: f64, off: f64, f: usize) -> Mat {
        let t = self.toeplitz(f);
        let (b, a) = (t.nrows(), t.ncols());
        let mut m = DMatrix::zeros(a + b, a + b);
        for i in 0..a {
            m[(i, i)] = cplx(s);
        }
        for i in 0..b {
            m[(a + i, a + i)] = cplx(-s);
        }
        m.view_mut((0, a), (a, b)).copy_from(&(t.adjoint() * cplx(off)));
        m.view_mut((a, 0), (b, a)).copy_from(&(t * cplx(off)));
        m
    }
}

impl FiberModel for TwistedModel {
    fn name(&self) -> String {
        format!("twisted(n={},w={})", self.n, self.w)
    }

    fn reflection(&self, _x: f64, xi: f64, rho: f64, f: usize) -> Result<Mat> {
        let s = self.base_symbol(xi);
        let r = (s * s + rho * rho).sqrt();
        if r == 0.0 {
            return Ok(self.blocks(0.0, 0.0, f));
        }
        Ok(self.blocks(s / r, rho / r, f))
    }

    fn difference_symbol(&self, _x: f64, xi: f64, f: usize) -> Result<Mat> {
        Ok(self.blocks(self.base_symbol(xi), 1.0, f))
    }
}

/// Families defined by a constant-coefficient projection-valued compatible symbol `q`: on the
/// sphere the operator symbol `q_X(sgn ξ)` acts on the fiber window, inside the ball the
/// principal symbol at `(ξ, ρη)`.
#[derive(Debug, Clone)]
pub struct SymbolModel {
    pub q: CompatibleSymbol,
}

impl SymbolModel {
    pub fn new(q: CompatibleSymbol) -> Result<Self> {
        if q.band() != Bandwidth::CONSTANT {
            return Err(Error::Unsupported(format!("{}: obstruction families need constant coefficients", q.name)));
        }
        Ok(SymbolModel { q })
    }

    fn principal(&self, xi: f64, eta: f64) -> Mat {
        self.q.principal.lattice_value(0.0, 0.0, xi, eta, EtaConvention::Plus)
    }
}

impl FiberModel for SymbolModel {
    fn name(&self) -> String {
        self.q.name.clone()
    }

    fn reflection(&self, x: f64, xi: f64, rho: f64, f: usize) -> Result<Mat> {
        let r = self.q.rank;
        if rho <= 1e-14 {
            let m = self.q.operator.fiber_matrix(x, sgn(xi), f, f);
            let n = m.nrows();
            return Ok(m * cplx(2.0) - DMatrix::identity(n, n));
        }
        let blocks: Vec<Mat> = (-(f as i64)..=f as i64).map(|eta| self.principal(xi, rho * eta as f64) * cplx(2.0) - DMatrix::identity(r, r)).collect();
        Ok(block_diag(&blocks))
    }

    fn difference_symbol(&self, _x: f64, xi: f64, f: usize) -> Result<Mat> {
        let r = self.q.rank;
        let blocks: Vec<Mat> = (-(f as i64)..=f as i64)
            .map(|eta| {
                let e = eta as f64;
                let size = (xi * xi + e * e).sqrt();
                (self.principal(xi, e) * cplx(2.0) - DMatrix::identity(r, r)) * cplx(size)
            })
            .collect();
        Ok(block_diag(&blocks))
    }
}

/// Direct sum of fiber models (block-diagonal families).
pub struct DirectSum(pub Vec<Arc<dyn FiberModel>>);

impl FiberModel for DirectSum {
    fn name(&self) -> String {
        self.0.iter().map(|m| m.name()).collect::<Vec<_>>().join("⊕")
    }

    fn reflection(&self, x: f64, xi: f64, rho: f64, f: usize) -> Result<Mat> {
        Ok(block_diag(&self.0.iter().map(|m| m.reflection(x, xi, rho, f)).collect::<Result<Vec<_>>>()?))
    }

    fn difference_symbol(&self, x: f64, xi: f64, f: usize) -> Result<Mat> {
        Ok(block_diag(&self.0.iter().map(|m| m.difference_symbol(x, xi, f)).collect::<Result<Vec<_>>>()?))
    }
}

/// Which representative of the obstruction class is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Representative {
    /// `(2Q̂ − 1)(|ξ| + ρ) + iτ` with rescaled fiber argument.
    Rescaled,
    /// `(2σ(Q) − 1)|ζ| + iτ` (difference construction).
    Difference,
}

/// A family of truncated fiber operators over the ball bundle.
#[derive(Clone)]
pub struct ObstructionFamily {
    pub model: Arc<dyn FiberModel>,
    pub representative: Representative,
    /// Fiber truncation `[−f, f]`.
    pub truncation: usize,
    /// Base samples used by the ball sweep and the base loop.
    pub base_points: usize,
    /// Minimal singular value over the sampled sphere loop.
    pub sphere_margin: f64,
}

impl std::fmt::Debug for ObstructionFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ObstructionFamily")
            .field("model", &self.model.name())
            .field("representative", &self.representative)
            .field("truncation", &self.truncation)
            .field("sphere_margin", &self.sphere_margin)
            .finish()
    }
}

/// One parameter sample of the ball bundle.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BallSample {
    pub x: f64,
    pub xi: f64,
    pub tau: f64,
    pub on_sphere: bool,
}

impl ObstructionFamily {
    /// `D(x, ξ, τ)` on fiber truncation `f`.
    pub fn matrix_at(&self, x: f64, xi: f64, tau: f64, f: usize) -> Result<Mat> {
        let m = match self.representative {
            Representative::Rescaled => {
                let rho = (1.0 - xi * xi - tau * tau).max(0.0);
                self.model.reflection(x, xi, rho, f)? * cplx(xi.abs() + rho)
            }
            Representative::Difference => self.model.difference_symbol(x, xi, f)?,
        };
        let n = m.nrows();
        Ok(m + DMatrix::identity(n, n) * Complex64::new(0.0, tau))
    }

    pub fn matrix(&self, x: f64, xi: f64, tau: f64) -> Result<Mat> {
        self.matrix_at(x, xi, tau, self.truncation)
    }

    /// Polar samples of the ball at every base point (radii 0, ¼, …, 1; 32 angles).
    pub fn ball_samples(&self) -> Vec<BallSample> {
        let mut out = Vec::new();
        for i in 0..self.base_points {
            let x = 2.0 * PI * i as f64 / self.base_points as f64;
            out.push(BallSample { x, xi: 0.0, tau: 0.0, on_sphere: false });
            for k in 1..=4 {
                let r = k as f64 / 4.0;
                for j in 0..32 {
                    let th = 2.0 * PI * j as f64 / 32.0;
                    out.push(BallSample { x, xi: r * th.cos(), tau: r * th.sin(), on_sphere: k == 4 });
                }
            }
        }
        out
    }

    /// Minimal singular value of `D` over the ball samples.
    pub fn ball_margin(&self) -> Result<f64> {
        let s = self.ball_samples();
        let v = s.par_iter().map(|p| Ok(linalg::min_singular_value(&self.matrix(p.x, p.xi, p.tau)?))).collect::<Result<Vec<f64>>>()?;
        Ok(v.into_iter().fold(f64::INFINITY, f64::min))
    }
}

fn loop_margin(model: &Arc<dyn FiberModel>, rep: Representative, f: usize, k: usize) -> Result<f64> {
    let fam = ObstructionFamily { model: model.clone(), representative: rep, truncation: f, base_points: 1, sphere_margin: 0.0 };
    let v = (0..k)
        .into_par_iter()
        .map(|j| {
            let th = 2.0 * PI * j as f64 / k as f64;
            Ok(linalg::min_singular_value(&fam.matrix(0.0, th.cos(), th.sin())?))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(v.into_iter().fold(f64::INFINITY, f64::min))
}

/// Assembles a family and checks invertibility on the sphere.
pub fn obstruction_family(model: Arc<dyn FiberModel>, truncation: usize, representative: Representative) -> Result<ObstructionFamily> {
    let sphere_margin = loop_margin(&model, representative, truncation, LOOP_SAMPLES)?;
    if !(sphere_margin >= SPHERE_MARGIN_MIN) {
        return Err(Error::Singular(format!("{}: family not invertible on the sphere (margin {sphere_margin:.3e})", model.name())));
    }
    Ok(ObstructionFamily { model, representative, truncation, base_points: 4, sphere_margin })
}

/// Determinant winding along one loop.
#[derive(Debug, Clone, Serialize)]
pub struct LoopWinding {
    pub truncation: usize,
    pub samples: usize,
    /// Counter-clockwise winding of `det D` (increasing `θ`).
    pub winding_ccw: i64,
    pub max_phase_step: f64,
    /// Unwrapped phase `arg det D(θ_k)` relative to `θ = 0`, `k = 0..=samples`.
    pub phases: Vec<f64>,
}

fn wrap(d: f64) -> f64 {
    (d + PI).rem_euclid(2.0 * PI) - PI
}

/// Winding of `k ↦ det M(k)` over `k = 0..=samples` (the last sample closes the loop).
pub fn determinant_winding(samples: usize, m: &(dyn Fn(usize) -> Result<Mat> + Sync)) -> Result<(i64, f64, Vec<f64>)> {
    let z = (0..=samples).into_par_iter().map(|k| Ok(m(k)?.lu().determinant())).collect::<Result<Vec<Complex64>>>()?;
    if let Some(bad) = z.iter().position(|d| d.norm() == 0.0 || !d.norm().is_finite()) {
        return Err(Error::Singular(format!("determinant vanishes at loop sample {bad}")));
    }
    let mut phases = vec![0.0];
    let mut max_step: f64 = 0.0;
    for w in z.windows(2) {
        let d = wrap(w[1].arg() - w[0].arg());
        max_step = max_step.max(d.abs());
        phases.push(phases.last().unwrap() + d);
    }
    let total = *phases.last().unwrap() / (2.0 * PI);
    Ok((total.round() as i64, max_step, phases))
}

/// Sphere-loop winding, refining the loop until adjacent phase steps are below
/// [`MAX_PHASE_STEP`].
pub fn sphere_loop_winding(model: &Arc<dyn FiberModel>, rep: Representative, f: usize, samples: usize) -> Result<LoopWinding> {
    let fam = ObstructionFamily { model: model.clone(), representative: rep, truncation: f, base_points: 1, sphere_margin: 0.0 };
    let mut k = samples.max(8);
    loop {
        let m = |j: usize| {
            let th = 2.0 * PI * j as f64 / k as f64;
            fam.matrix(0.0, th.cos(), th.sin())
        };
        let (w, step, phases) = determinant_winding(k, &m)?;
        if step <= MAX_PHASE_STEP {
            return Ok(LoopWinding { truncation: f, samples: k, winding_ccw: w, max_phase_step: step, phases });
        }
        if k >= 16 * samples.max(8) {
            return Err(Error::NoConvergence(format!("phase step {step:.3} > π/2 after refinement to {k} samples")));
        }
        k *= 2;
    }
}

/// Integer invariant with its certificates.
#[derive(Debug, Clone, Serialize)]
pub struct ObstructionReport {
    pub model: String,
    pub representative: Representative,
    /// Clockwise sphere-loop winding (equal to `n·w` for the twisted model).
    pub invariant: i64,
    /// The same winding with counter-clockwise orientation.
    pub winding_ccw: i64,
    /// Loops computed: base, fiber truncation + 8, loop refinement ×2.
    pub loops: Vec<LoopWinding>,
    /// Winding of `det D(x, 1, 0)` as `x` sweeps the base circle.
    pub base_loop_winding: i64,
    pub sphere_margin: f64,
    /// All loops agree.
    pub stable: bool,
    pub vanishes: bool,
}

/// Sphere-loop winding at truncation `f`, `f + 8`, and with twice the samples.
pub fn obstruction_invariant(family: &ObstructionFamily) -> Result<ObstructionReport> {
    let f = family.truncation;
    let runs = [(f, LOOP_SAMPLES), (f + 8, LOOP_SAMPLES), (f, 2 * LOOP_SAMPLES)];
    let loops = runs.par_iter().map(|&(t, k)| sphere_loop_winding(&family.model, family.representative, t, k)).collect::<Result<Vec<_>>>()?;
    let stable = loops.iter().all(|l| l.winding_ccw == loops[0].winding_ccw);
    let p = family.base_points.max(64);
    let base = |j: usize| family.matrix(2.0 * PI * j as f64 / p as f64, 1.0, 0.0);
    let (base_loop_winding, _, _) = determinant_winding(p, &base)?;
    let ccw = loops[0].winding_ccw;
    Ok(ObstructionReport {
        model: family.model.name(),
        representative: family.representative,
        invariant: -ccw,
        winding_ccw: ccw,
        loops,
        base_loop_winding,
        sphere_margin: family.sphere_margin,
        stable,
        vanishes: stable && ccw == 0,
    })
}

// ---------------------------------------------------------------------------------------------
// Homotopies
// ---------------------------------------------------------------------------------------------

/// `q_φ = Q cos²φ + P sin²φ + 2 P B Q sin φ cos φ` at both symbol levels.
pub fn build_symbol_homotopy(q: &ProjectionSymbol, p: &ProjectionSymbol, b: &CompatibleSymbol, phi: f64) -> Result<CompatibleSymbol> {
    // Snap the trigonometric weights so that the endpoints are exact.
    let snap = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
    let (c, s) = (snap(phi.cos()), snap(phi.sin()));
    let pbq = symbol_mul(&symbol_mul(&p.symbol, b)?, &q.symbol)?;
    let sum = symbol_add(&symbol_scale(&q.symbol, cplx(c * c)), &symbol_scale(&p.symbol, cplx(s * s)))?;
    Ok(symbol_add(&sum, &symbol_scale(&pbq, cplx(2.0 * s * c)))?.renamed(format!("homotopy(φ={phi:.4})")))
}

#[derive(Debug, Clone, Serialize)]
pub struct HomotopyStep {
    pub phi: f64,
    pub invariant: i64,
    pub stable: bool,
    pub sphere_margin: f64,
    pub ball_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomotopyReport {
    pub steps: Vec<HomotopyStep>,
    /// The invariant is the same at every sample.
    pub constant: bool,
    /// Minimal ball margin at `φ = π/2` is positive.
    pub invertible_at_end: bool,
    /// First `φ` where the sphere margin collapsed, if any.
    pub collapse: Option<f64>,
}

/// `φ_k = (π/2)·k/(samples − 1)`.
pub fn phi_samples(samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    (0..n).map(|k| PI / 2.0 * k as f64 / (n - 1) as f64).collect()
}

/// The family `D_φ` for each `φ`: sphere invertibility along the path, the invariant at each
/// sample, and full invertibility over the ball at the end point.
pub fn homotopy_family(q: &ProjectionSymbol, p: &ProjectionSymbol, b: &CompatibleSymbol, truncation: usize, phis: &[f64]) -> Result<HomotopyReport> {
    let mut steps = Vec::new();
    let mut collapse = None;
    for &phi in phis {
        let model: Arc<dyn FiberModel> = Arc::new(SymbolModel::new(build_symbol_homotopy(q, p, b, phi)?)?);
        let margin = loop_margin(&model, Representative::Rescaled, truncation, LOOP_SAMPLES)?;
        if margin < SPHERE_MARGIN_MIN {
            collapse.get_or_insert(phi);
            steps.push(HomotopyStep { phi, invariant: 0, stable: false, sphere_margin: margin, ball_margin: 0.0 });
            continue;
        }
        let fam = ObstructionFamily { model, representative: Representative::Rescaled, truncation, base_points: 4, sphere_margin: margin };
        let rep = obstruction_invariant(&fam)?;
        steps.push(HomotopyStep { phi, invariant: rep.invariant, stable: rep.stable, sphere_margin: margin, ball_margin: fam.ball_margin()? });
    }
    let constant = collapse.is_none() && steps.iter().all(|s| s.stable && s.invariant == steps[0].invariant);
    let invertible_at_end = steps.last().is_some_and(|s| (s.phi - PI / 2.0).abs() < 1e-12 && s.ball_margin > SPHERE_MARGIN_MIN);
    Ok(HomotopyReport { steps, constant, invertible_at_end, collapse })
}

/// Obstruction family of the `example3` model operator.
pub fn example3_family(truncation: usize, rep: Representative) -> Result<ObstructionFamily> {
    let model = crate::boundary::example3_problem()?.model;
    obstruction_family(Arc::new(model), truncation, rep)
}

/// Obstruction family of the twisted `example4` model.
pub fn example4_family(n: i64, w: i64, truncation: usize, rep: Representative) -> Result<ObstructionFamily> {
    obstruction_family(Arc::new(TwistedModel::new(n, w)?), truncation, rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toeplitz_truncation_keeps_index() {
        for n in -2i64..=2 {
            let t = TwistedModel::new(n, 1).unwrap().toeplitz(5);
            let sv = linalg::dense_singular_values(&t);
            let rank = sv.iter().filter(|&&s| s > 0.5).count() as i64;
            let index = (t.ncols() as i64 - rank) - (t.nrows() as i64 - rank);
            assert_eq!(index, -n);
        }
    }

    #[test]
    fn winding_of_scalar_loop() {
        let m = |k: usize| {
            let th = 2.0 * PI * k as f64 / 64.0;
            Ok(DMatrix::from_element(1, 1, Complex64::from_polar(1.0, -2.0 * th)))
        };
        assert_eq!(determinant_winding(64, &m).unwrap().0, -2);
    }

    #[test]
    fn sphere_matrix_at_unit_xi_is_reflection() {
        let fam = example3_family(3, Representative::Rescaled).unwrap();
        let m = fam.matrix(0.0, 1.0, 0.0).unwrap();
        // Built from Q(1, 0) = ½[[1,1],[1,1]] on every fiber mode: 2Q − 1 = [[0,1],[1,0]].
        for k in 0..7 {
            assert!((m[(2 * k, 2 * k + 1)] - cplx(1.0)).norm() < 1e-12);
            assert!(m[(2 * k, 2 * k)].norm() < 1e-12);
        }
        let top = fam.matrix(0.0, 0.0, 1.0).unwrap();
        assert!((top - DMatrix::identity(14, 14) * Complex64::i()).norm() < 1e-12);
    }

    #[test]
    fn constant_family_has_zero_invariant() {
        let m = |_: usize| Ok(DMatrix::identity(5, 5) * Complex64::i());
        let (w, step, _) = determinant_winding(LOOP_SAMPLES, &m).unwrap();
        assert_eq!((w, step), (0, 0.0));
    }
}
