//! Symbols of the fibered calculus: principal symbols with directional limits at the
//! horizontal covectors, operator-valued symbols over `T*S¹ₓ`, and their compatible pairs.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

pub type Mat = DMatrix<Complex64>;

/// `(x, y, ξ, η) ↦ matrix`.
pub type PointFn = Arc<dyn Fn(f64, f64, f64, f64) -> Mat + Send + Sync>;

/// Number of sample points per angular variable in symbol checks.
pub const ANGULAR_SAMPLES: usize = 17;

/// Dyadic exponents `t = 2^{-k}` used for limit checks.
pub const DYADIC_LEVELS: u32 = 12;

pub fn cplx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn scalar(v: Complex64) -> Mat {
    DMatrix::from_element(1, 1, v)
}

/// Sign with the convention `sign(0) = +1`.
pub fn sgn(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Known trigonometric bandwidth of a symbol in the spatial variables; `None` means the
/// dependence is not band-limited (or unknown) and full-resolution sampling is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bandwidth {
    pub x: Option<usize>,
    pub y: Option<usize>,
}

impl Bandwidth {
    pub const CONSTANT: Bandwidth = Bandwidth { x: Some(0), y: Some(0) };
    pub const UNKNOWN: Bandwidth = Bandwidth { x: None, y: None };

    pub fn new(x: Option<usize>, y: Option<usize>) -> Self {
        Bandwidth { x, y }
    }

    /// Bandwidth of a sum.
    pub fn max(self, o: Bandwidth) -> Bandwidth {
        let m = |a: Option<usize>, b: Option<usize>| Some(a?.max(b?));
        Bandwidth { x: m(self.x, o.x), y: m(self.y, o.y) }
    }

    /// Bandwidth of a pointwise product.
    pub fn sum(self, o: Bandwidth) -> Bandwidth {
        let s = |a: Option<usize>, b: Option<usize>| Some(a? + b?);
        Bandwidth { x: s(self.x, o.x), y: s(self.y, o.y) }
    }
}

/// Structural type of a compatible pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SymbolKind {
    /// Smooth on `T*M∖0` up to `η = 0`; the operator part is multiplication by `a(x,y,ξ,0)`.
    Smooth,
    /// A family of fiber operators depending on `x` only (its principal part ignores `ξ`).
    FiberFamily,
    /// Finite sums of products of the two previous kinds.
    Sigma0,
    /// Anything else.
    General,
}

/// Degree-0 principal symbol `a_M` with its directional limit `ã_M` at `η → 0`.
#[derive(Clone)]
pub struct PrincipalSymbol {
    pub rank: usize,
    /// `(x, y, ξ, η) ↦ a_M`, meaningful for `η ≠ 0`.
    pub eval: PointFn,
    /// `(x, y, ξ, η̂) ↦ ã_M`, `η̂ ∈ {−1, +1}`.
    pub limit: PointFn,
    pub band: Bandwidth,
    /// Number of derivatives available in the rescaled variable `t = |η|/|ξ|`.
    pub smoothness: usize,
}

/// Which directional limit replaces the value on the horizontal covectors `η = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EtaConvention {
    Plus,
    Minus,
}

impl EtaConvention {
    pub fn sign(self) -> f64 {
        match self {
            EtaConvention::Plus => 1.0,
            EtaConvention::Minus => -1.0,
        }
    }

    /// `sign(η)` for `η ≠ 0`, the convention sign at `η = 0`.
    pub fn eta_sign(self, eta: f64) -> f64 {
        if eta == 0.0 {
            self.sign()
        } else {
            sgn(eta)
        }
    }
}

impl PrincipalSymbol {
    pub fn new(rank: usize, eval: PointFn, limit: PointFn, band: Bandwidth, smoothness: usize) -> Self {
        PrincipalSymbol { rank, eval, limit, band, smoothness }
    }

    /// Value used on lattice covectors: `eval` for `η ≠ 0`; at `η = 0` the directional limit
    /// selected by `conv`, and at `(0,0)` the limit at `ξ = +1`.
    pub fn lattice_value(&self, x: f64, y: f64, xi: f64, eta: f64, conv: EtaConvention) -> Mat {
        if eta != 0.0 {
            (self.eval)(x, y, xi, eta)
        } else {
            (self.limit)(x, y, sgn(xi), conv.sign())
        }
    }

    /// Richardson check of the directional limit: returns `max |eval(ξ, tη̂) − ã|`
    /// extrapolated to `t = 0`, over the standard sample set.
    pub fn limit_defect(&self) -> f64 {
        let pts = circle_samples(ANGULAR_SAMPLES);
        let mut worst: f64 = 0.0;
        for &x in &pts {
            for &y in &pts {
                for xi in [-1.0, 1.0] {
                    for eh in [-1.0, 1.0] {
                        let lim = (self.limit)(x, y, xi, eh);
                        let t1 = 2f64.powi(-(DYADIC_LEVELS as i32));
                        let a1 = (self.eval)(x, y, xi, eh * t1);
                        let a2 = (self.eval)(x, y, xi, eh * 2.0 * t1);
                        // First-order Richardson step: 2a(t) − a(2t) = a(0) + O(t²).
                        let extrap = a1 * cplx(2.0) - a2;
                        worst = worst.max((extrap - lim).norm());
                    }
                }
            }
        }
        worst
    }

    /// `max |eval(tξ,tη) − eval(ξ,η)|` over sampled points and `t ∈ {1/3, 2, 7}`.
    pub fn homogeneity_defect(&self) -> f64 {
        let pts = circle_samples(5);
        let mut worst: f64 = 0.0;
        for &x in &pts {
            for &y in &pts {
                for th in circle_samples(ANGULAR_SAMPLES) {
                    let (xi, eta) = (th.cos(), th.sin());
                    if eta.abs() < 1e-9 {
                        continue;
                    }
                    let base = (self.eval)(x, y, xi, eta);
                    for t in [1.0 / 3.0, 2.0, 7.0] {
                        worst = worst.max(((self.eval)(x, y, t * xi, t * eta) - &base).norm());
                    }
                }
            }
        }
        worst
    }
}

/// `(x, ξ, y, η) ↦ matrix`: the full symbol of a fiber operator family.
pub type FiberFn = Arc<dyn Fn(f64, f64, f64, f64) -> Mat + Send + Sync>;

/// Operator-valued symbol `a_X`: for every `(x, ξ)` a classical fiber ψDO of order `≤ 0`,
/// given by its full (left) symbol `q(x, ξ; y, η)`. Degree-0 homogeneity in `ξ` means only
/// `sign ξ` enters.
#[derive(Clone)]
pub struct OperatorSymbol {
    pub rank: usize,
    /// `(x, ξ, y, η) ↦ q`, evaluated at integer `η`.
    pub full: FiberFn,
    /// Fiber principal part `(x, ξ, y, η̂) ↦ σ(a_X)`, `η̂ ∈ {−1,+1}`.
    pub principal: FiberFn,
    /// Fiber order `d ≤ 0`.
    pub order: i32,
    pub band: Bandwidth,
}

impl OperatorSymbol {
    pub fn new(rank: usize, full: FiberFn, principal: FiberFn, order: i32, band: Bandwidth) -> Self {
        OperatorSymbol { rank, full, principal, order, band }
    }

    /// Fiber multiplication family by `m(x, y, ξ, η̂)`, taken at `η̂ = sign η`.
    pub fn from_limit(rank: usize, limit: PointFn, band: Bandwidth, conv: EtaConvention) -> Self {
        let l1 = limit.clone();
        let full: FiberFn = Arc::new(move |x, xi, y, eta| l1(x, y, sgn(xi), conv.eta_sign(eta)));
        let principal: FiberFn = Arc::new(move |x, xi, y, eh| limit(x, y, sgn(xi), sgn(eh)));
        OperatorSymbol { rank, full, principal, order: 0, band }
    }

    /// Fourier coefficients `q̂_k(x, ξ; η) = (1/2π)∫ q(x,ξ;y,η) e^{−iky} dy` for `|k| ≤ kmax`.
    pub fn y_coefficients(&self, x: f64, xi: f64, eta: f64, kmax: usize) -> Vec<Mat> {
        let (p, kin) = match self.band.y {
            Some(b) => (2 * b + 1, b.min(kmax)),
            None => (4 * kmax + 1, kmax),
        };
        let samples: Vec<Mat> = circle_samples(p).iter().map(|&y| (self.full)(x, xi, y, eta)).collect();
        pad_coefficients(dft_coefficients(&samples, kin), kmax)
    }

    /// Fiber matrix of `a_X(x, ξ)` from the source window `[−ns, ns]` to the target window
    /// `[−nt, nt]`, components interleaved (`(η + n)·rank + c`).
    pub fn fiber_matrix(&self, x: f64, xi: f64, ns: usize, nt: usize) -> Mat {
        let r = self.rank;
        let mut m = DMatrix::zeros((2 * nt + 1) * r, (2 * ns + 1) * r);
        let kmax = match self.band.y {
            Some(b) => b.min(ns + nt),
            None => ns + nt,
        };
        for eta in -(ns as i64)..=ns as i64 {
            let coefs = self.y_coefficients(x, xi, eta as f64, kmax);
            for (kk, c) in coefs.iter().enumerate() {
                let k = kk as i64 - kmax as i64;
                let tgt = eta + k;
                if tgt.abs() > nt as i64 {
                    continue;
                }
                for a in 0..r {
                    for b in 0..r {
                        m[(((tgt + nt as i64) as usize) * r + a, ((eta + ns as i64) as usize) * r + b)] = c[(a, b)];
                    }
                }
            }
        }
        m
    }

    /// Richardson check of the fiber principal part: `q(x,ξ;y,tη̂)` against `σ(a_X)` for
    /// `t = 2^k`, extrapolated assuming an `O(1/t)` remainder.
    pub fn principal_defect(&self) -> f64 {
        let pts = circle_samples(ANGULAR_SAMPLES);
        let t = 2f64.powi(DYADIC_LEVELS as i32);
        let mut worst: f64 = 0.0;
        for &x in &pts {
            for &y in &pts {
                for xi in [-1.0, 1.0] {
                    for eh in [-1.0, 1.0] {
                        let a1 = (self.full)(x, xi, y, eh * t);
                        let a2 = (self.full)(x, xi, y, eh * 2.0 * t);
                        let extrap = a2 * cplx(2.0) - a1;
                        worst = worst.max((extrap - (self.principal)(x, xi, y, eh)).norm());
                    }
                }
            }
        }
        worst
    }
}

/// A compatible pair `(a_M, a_X)`.
#[derive(Clone)]
pub struct CompatibleSymbol {
    pub name: String,
    pub rank: usize,
    pub principal: PrincipalSymbol,
    pub operator: OperatorSymbol,
    pub kind: SymbolKind,
}

impl std::fmt::Debug for CompatibleSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompatibleSymbol").field("name", &self.name).field("rank", &self.rank).field("kind", &self.kind).finish()
    }
}

/// Worst-point report of a compatibility check.
#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityReport {
    pub max_deviation: f64,
    /// `(x, y, ξ, η̂)` of the worst deviation.
    pub worst_point: [f64; 4],
    pub tolerance: f64,
    pub passed: bool,
}

impl CompatibleSymbol {
    pub fn new(name: impl Into<String>, principal: PrincipalSymbol, operator: OperatorSymbol, kind: SymbolKind) -> Result<Self> {
        if principal.rank != operator.rank {
            return Err(Error::Rank(principal.rank, operator.rank));
        }
        Ok(CompatibleSymbol { name: name.into(), rank: principal.rank, principal, operator, kind })
    }

    /// Example-2 pair: a symbol smooth up to `η = 0`, given with its horizontal values
    /// `(x, y, ξ, η̂) ↦ a(x, y, ξ, 0^±)`; the operator part multiplies by them.
    pub fn smooth(name: &str, rank: usize, eval: PointFn, limit: PointFn, band: Bandwidth) -> Self {
        let op = OperatorSymbol::from_limit(rank, limit.clone(), band, EtaConvention::Plus);
        let p = PrincipalSymbol::new(rank, eval, limit, band, usize::MAX);
        CompatibleSymbol { name: name.into(), rank, principal: p, operator: op, kind: SymbolKind::Smooth }
    }

    /// Example-1 pair from a fiber family `B_x` given by its full symbol `q(x; y, η)` and
    /// fiber principal symbol `σ(B)(x, y, η̂)` (both independent of `ξ`).
    pub fn family(name: &str, rank: usize, full: FiberFn, principal: FiberFn, order: i32, band: Bandwidth) -> Self {
        let pe = principal.clone();
        let pl = principal.clone();
        let eval: PointFn = Arc::new(move |x, y, _xi, eta| pe(x, 1.0, y, sgn(eta)));
        let limit: PointFn = Arc::new(move |x, y, _xi, eh| pl(x, 1.0, y, eh));
        let p = PrincipalSymbol::new(rank, eval, limit, band, usize::MAX);
        let op = OperatorSymbol::new(rank, full, principal, order, band);
        CompatibleSymbol { name: name.into(), rank, principal: p, operator: op, kind: SymbolKind::FiberFamily }
    }

    pub fn identity(rank: usize) -> Self {
        let id: PointFn = Arc::new(move |_, _, _, _| DMatrix::identity(rank, rank));
        let mut s = CompatibleSymbol::smooth("identity", rank, id.clone(), id, Bandwidth::CONSTANT);
        s.kind = SymbolKind::Smooth;
        s
    }

    pub fn constant(c: Complex64, rank: usize) -> Self {
        let f: PointFn = Arc::new(move |_, _, _, _| DMatrix::identity(rank, rank) * c);
        CompatibleSymbol::smooth(&format!("const:{}", c.re), rank, f.clone(), f, Bandwidth::CONSTANT)
    }

    pub fn zero(rank: usize) -> Self {
        CompatibleSymbol::constant(cplx(0.0), rank).renamed("zero")
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn band(&self) -> Bandwidth {
        self.principal.band.max(self.operator.band)
    }

    /// `max ‖σ(a_X) − ã_M‖` over `x, y` on 17-point grids, `ξ, η̂ ∈ {−1, +1}`.
    pub fn check_compatibility(&self, tol: f64) -> CompatibilityReport {
        let pts = circle_samples(ANGULAR_SAMPLES);
        let mut worst = (0.0, [0.0; 4]);
        for &x in &pts {
            for &y in &pts {
                for xi in [-1.0, 1.0] {
                    for eh in [-1.0, 1.0] {
                        let d = ((self.operator.principal)(x, xi, y, eh) - (self.principal.limit)(x, y, xi, eh)).norm();
                        if d > worst.0 {
                            worst = (d, [x, y, xi, eh]);
                        }
                    }
                }
            }
        }
        CompatibilityReport { max_deviation: worst.0, worst_point: worst.1, tolerance: tol, passed: worst.0 <= tol }
    }

    pub fn require_compatible(&self, tol: f64) -> Result<()> {
        let r = self.check_compatibility(tol);
        if r.passed {
            Ok(())
        } else {
            Err(Error::Incompatible { deviation: r.max_deviation, point: format!("{:?}", r.worst_point) })
        }
    }
}

/// `p` equispaced points on the circle.
pub fn circle_samples(p: usize) -> Vec<f64> {
    (0..p).map(|j| 2.0 * PI * j as f64 / p as f64).collect()
}

/// Direct DFT of equispaced matrix samples: `c_k = (1/p) Σ_j f_j e^{−2πijk/p}`, `|k| ≤ kmax`.
pub fn dft_coefficients(samples: &[Mat], kmax: usize) -> Vec<Mat> {
    let p = samples.len();
    let (r, c) = samples[0].shape();
    (-(kmax as i64)..=kmax as i64)
        .map(|k| {
            let mut acc = DMatrix::zeros(r, c);
            for (j, s) in samples.iter().enumerate() {
                let ph = Complex64::from_polar(1.0 / p as f64, -2.0 * PI * (k * j as i64).rem_euclid(p as i64) as f64 / p as f64);
                acc += s * ph;
            }
            acc
        })
        .collect()
}

/// Extends a centered coefficient list `|k| ≤ kin` by zeros to `|k| ≤ kmax`.
pub fn pad_coefficients(c: Vec<Mat>, kmax: usize) -> Vec<Mat> {
    let kin = (c.len() - 1) / 2;
    if kin >= kmax {
        return c;
    }
    let (r, cc) = c[0].shape();
    let pad = kmax - kin;
    let mut out: Vec<Mat> = (0..pad).map(|_| DMatrix::zeros(r, cc)).collect();
    out.extend(c);
    out.extend((0..pad).map(|_| DMatrix::zeros(r, cc)));
    out
}

// ---------------------------------------------------------------------------------------------
// Componentwise algebra
// ---------------------------------------------------------------------------------------------

fn check_ranks(a: &CompatibleSymbol, b: &CompatibleSymbol) -> Result<()> {
    if a.rank != b.rank {
        return Err(Error::Rank(a.rank, b.rank));
    }
    Ok(())
}

fn combined_kind(a: SymbolKind, b: SymbolKind) -> SymbolKind {
    use SymbolKind::*;
    match (a, b) {
        (Smooth, Smooth) => Smooth,
        (FiberFamily, FiberFamily) => FiberFamily,
        (General, _) | (_, General) => General,
        _ => Sigma0,
    }
}

/// Componentwise sum.
pub fn symbol_add(a: &CompatibleSymbol, b: &CompatibleSymbol) -> Result<CompatibleSymbol> {
    check_ranks(a, b)?;
    let (ae, be) = (a.principal.eval.clone(), b.principal.eval.clone());
    let (al, bl) = (a.principal.limit.clone(), b.principal.limit.clone());
    let (af, bf) = (a.operator.full.clone(), b.operator.full.clone());
    let (ap, bp) = (a.operator.principal.clone(), b.operator.principal.clone());
    let p = PrincipalSymbol::new(
        a.rank,
        Arc::new(move |x, y, xi, eta| ae(x, y, xi, eta) + be(x, y, xi, eta)),
        Arc::new(move |x, y, xi, eh| al(x, y, xi, eh) + bl(x, y, xi, eh)),
        a.principal.band.max(b.principal.band),
        a.principal.smoothness.min(b.principal.smoothness),
    );
    let o = OperatorSymbol::new(
        a.rank,
        Arc::new(move |x, xi, y, eta| af(x, xi, y, eta) + bf(x, xi, y, eta)),
        Arc::new(move |x, xi, y, eh| ap(x, xi, y, eh) + bp(x, xi, y, eh)),
        a.operator.order.max(b.operator.order),
        a.operator.band.max(b.operator.band),
    );
    CompatibleSymbol::new(format!("({}+{})", a.name, b.name), p, o, combined_kind(a.kind, b.kind))
}

/// Scalar multiple.
pub fn symbol_scale(a: &CompatibleSymbol, c: Complex64) -> CompatibleSymbol {
    let (ae, al, af, ap) = (a.principal.eval.clone(), a.principal.limit.clone(), a.operator.full.clone(), a.operator.principal.clone());
    let mut out = a.clone();
    out.principal.eval = Arc::new(move |x, y, xi, eta| ae(x, y, xi, eta) * c);
    out.principal.limit = Arc::new(move |x, y, xi, eh| al(x, y, xi, eh) * c);
    out.operator.full = Arc::new(move |x, xi, y, eta| af(x, xi, y, eta) * c);
    out.operator.principal = Arc::new(move |x, xi, y, eh| ap(x, xi, y, eh) * c);
    out.name = format!("{}*{}", c, a.name);
    out
}

/// Number of fiber Fourier coefficients kept in a product when the right factor's fiber
/// bandwidth is unknown.
pub const PRODUCT_TRUNCATION: usize = 16;

/// Componentwise product: principal parts multiply pointwise; fiber operators compose through
/// the exact lattice Kohn–Nirenberg product
/// `r(y, η) = Σ_j p(y, η + j) q̂_j(η) e^{ijy}`,
/// which is finite when the right factor has a known fiber bandwidth (otherwise truncated at
/// [`PRODUCT_TRUNCATION`] coefficients).
pub fn symbol_mul(a: &CompatibleSymbol, b: &CompatibleSymbol) -> Result<CompatibleSymbol> {
    check_ranks(a, b)?;
    let (ae, be) = (a.principal.eval.clone(), b.principal.eval.clone());
    let (al, bl) = (a.principal.limit.clone(), b.principal.limit.clone());
    let (ap, bp) = (a.operator.principal.clone(), b.operator.principal.clone());
    let p = PrincipalSymbol::new(
        a.rank,
        Arc::new(move |x, y, xi, eta| ae(x, y, xi, eta) * be(x, y, xi, eta)),
        Arc::new(move |x, y, xi, eh| al(x, y, xi, eh) * bl(x, y, xi, eh)),
        a.principal.band.sum(b.principal.band),
        a.principal.smoothness.min(b.principal.smoothness),
    );
    let full = fiber_product(&a.operator, &b.operator);
    let o = OperatorSymbol::new(
        a.rank,
        full,
        Arc::new(move |x, xi, y, eh| ap(x, xi, y, eh) * bp(x, xi, y, eh)),
        a.operator.order + b.operator.order.min(0),
        a.operator.band.sum(b.operator.band),
    );
    CompatibleSymbol::new(format!("({}*{})", a.name, b.name), p, o, combined_kind(a.kind, b.kind))
}

/// Full symbol of the fiberwise composition `Op(p)∘Op(q)`.
pub fn fiber_product(p: &OperatorSymbol, q: &OperatorSymbol) -> FiberFn {
    let pf = p.full.clone();
    let q = q.clone();
    let j = q.band.y.unwrap_or(PRODUCT_TRUNCATION);
    if j == 0 {
        let qf = q.full.clone();
        return Arc::new(move |x, xi, y, eta| pf(x, xi, y, eta) * qf(x, xi, y, eta));
    }
    Arc::new(move |x, xi, y, eta| {
        let qc = q.y_coefficients(x, xi, eta, j);
        let mut acc = DMatrix::zeros(q.rank, q.rank);
        for (kk, c) in qc.iter().enumerate() {
            let k = kk as i64 - j as i64;
            let ph = Complex64::from_polar(1.0, k as f64 * y);
            acc += pf(x, xi, y, eta + k as f64) * c * ph;
        }
        acc
    })
}

/// Componentwise adjoint: pointwise conjugate transpose of the principal part and the fiber
/// adjoint `r̂_j(η) = q̂_{−j}(η + j)*` of the operator part.
pub fn symbol_adjoint(a: &CompatibleSymbol) -> CompatibleSymbol {
    let (ae, al, ap) = (a.principal.eval.clone(), a.principal.limit.clone(), a.operator.principal.clone());
    let mut out = a.clone();
    out.principal.eval = Arc::new(move |x, y, xi, eta| ae(x, y, xi, eta).adjoint());
    out.principal.limit = Arc::new(move |x, y, xi, eh| al(x, y, xi, eh).adjoint());
    out.operator.principal = Arc::new(move |x, xi, y, eh| ap(x, xi, y, eh).adjoint());
    let q = a.operator.clone();
    let j = q.band.y.unwrap_or(PRODUCT_TRUNCATION);
    out.operator.full = if j == 0 {
        let qf = q.full.clone();
        Arc::new(move |x, xi, y, eta| qf(x, xi, y, eta).adjoint())
    } else {
        Arc::new(move |x, xi, y, eta| {
            let mut acc = DMatrix::zeros(q.rank, q.rank);
            for k in -(j as i64)..=j as i64 {
                let c = &q.y_coefficients(x, xi, eta + k as f64, j)[(j as i64 - k) as usize];
                acc += c.adjoint() * Complex64::from_polar(1.0, k as f64 * y);
            }
            acc
        })
    };
    out.name = format!("{}^*", a.name);
    out
}

/// Fiber window used to invert operator parts numerically.
pub const INVERSION_WINDOW: usize = 24;

/// Inverse pair: pointwise inverse of the principal part; for smooth pairs the operator part is
/// the multiplication by the inverse, otherwise the fiber operators are inverted on a
/// [`INVERSION_WINDOW`] truncation (columns outside it fall back to the principal inverse).
pub fn symbol_invert(a: &CompatibleSymbol) -> Result<CompatibleSymbol> {
    // Ellipticity is a precondition; a cheap sweep locates a witness if it fails.
    let rep = ellipticity_check(a, INVERSION_WINDOW.min(8));
    if !(rep.principal_margin > 1e-12 && rep.operator_margin > 1e-12) {
        return Err(Error::Singular(format!(
            "{} is not elliptic (principal margin {:.3e}, operator margin {:.3e}, witness {:?})",
            a.name, rep.principal_margin, rep.operator_margin, rep.witness
        )));
    }
    let inv = |m: Mat| -> Mat { m.try_inverse().unwrap_or_else(|| DMatrix::from_element(1, 1, cplx(f64::NAN))) };
    let (ae, al, ap) = (a.principal.eval.clone(), a.principal.limit.clone(), a.operator.principal.clone());
    let p = PrincipalSymbol::new(
        a.rank,
        Arc::new(move |x, y, xi, eta| inv(ae(x, y, xi, eta))),
        Arc::new(move |x, y, xi, eh| inv(al(x, y, xi, eh))),
        Bandwidth::UNKNOWN,
        a.principal.smoothness,
    );
    let oprin: FiberFn = Arc::new(move |x, xi, y, eh| inv(ap(x, xi, y, eh)));
    let full: FiberFn = if a.kind == SymbolKind::Smooth {
        let l = p.limit.clone();
        Arc::new(move |x, xi, y, eta| l(x, y, sgn(xi), sgn(eta)))
    } else {
        inverse_fiber_symbol(&a.operator, oprin.clone(), INVERSION_WINDOW)
    };
    let o = OperatorSymbol::new(a.rank, full, oprin, 0, Bandwidth::new(None, None));
    CompatibleSymbol::new(format!("{}^-1", a.name), p, o, if a.kind == SymbolKind::Smooth { SymbolKind::Smooth } else { SymbolKind::General })
}

/// Fiber full symbol of `Op(q)^{-1}`, read off the columns of the inverse truncated fiber
/// matrix; memoized per `(x, sign ξ)`.
fn inverse_fiber_symbol(q: &OperatorSymbol, outside: FiberFn, window: usize) -> FiberFn {
    let q = q.clone();
    let cache: Arc<Mutex<HashMap<(u64, bool), Arc<Mat>>>> = Arc::new(Mutex::new(HashMap::new()));
    let r = q.rank;
    Arc::new(move |x, xi, y, eta| {
        if eta.abs() > window as f64 || eta.fract() != 0.0 {
            return outside(x, xi, y, sgn(eta));
        }
        let key = (x.to_bits(), xi >= 0.0);
        let g = {
            let hit = cache.lock().unwrap().get(&key).cloned();
            match hit {
                Some(g) => g,
                None => {
                    let m = q.fiber_matrix(x, sgn(xi), window, window);
                    let g = Arc::new(m.try_inverse().unwrap_or_else(|| DMatrix::from_element((2 * window + 1) * r, (2 * window + 1) * r, cplx(f64::NAN))));
                    cache.lock().unwrap().insert(key, g.clone());
                    g
                }
            }
        };
        let src = (eta as i64 + window as i64) as usize;
        let mut acc = DMatrix::zeros(r, r);
        for tgt in 0..(2 * window + 1) {
            let k = tgt as f64 - src as f64;
            let ph = Complex64::from_polar(1.0, k * y);
            let blk = g.view((tgt * r, src * r), (r, r));
            acc += blk * ph;
        }
        acc
    })
}

// ---------------------------------------------------------------------------------------------
// Ellipticity and seminorms
// ---------------------------------------------------------------------------------------------

/// Margins of the two ellipticity conditions.
#[derive(Debug, Clone, Serialize)]
pub struct EllipticityReport {
    /// Minimal singular value of `a_M` over sampled `S*M∖π*S*X`.
    pub principal_margin: f64,
    /// Minimal singular value of the fiber-truncated `a_X(x, ±1)` over sampled `x`.
    pub operator_margin: f64,
    /// Point realizing the smaller margin `(x, y, ξ, η)` (`y = NaN` for operator-level).
    pub witness: [f64; 4],
    pub elliptic: bool,
}

/// Covector directions used for principal-level sweeps: the angular grid plus dyadically
/// near-horizontal directions `(±1, ±2^{-k})`.
pub fn sphere_directions() -> Vec<(f64, f64)> {
    let mut dirs: Vec<(f64, f64)> = (0..2 * ANGULAR_SAMPLES)
        .map(|k| {
            let th = PI * (k as f64 + 0.5) / ANGULAR_SAMPLES as f64;
            (th.cos(), th.sin())
        })
        .collect();
    for k in 0..=DYADIC_LEVELS {
        let t = 2f64.powi(-(k as i32));
        for xi in [-1.0, 1.0] {
            for s in [-1.0, 1.0] {
                dirs.push((xi, s * t));
            }
        }
    }
    dirs.push((0.0, 1.0));
    dirs.push((0.0, -1.0));
    dirs
}

fn min_sv(m: &Mat) -> f64 {
    crate::linalg::dense_singular_values(m).last().copied().unwrap_or(0.0)
}

fn max_sv(m: &Mat) -> f64 {
    crate::linalg::dense_singular_values(m).first().copied().unwrap_or(0.0)
}

/// Both ellipticity margins; the operator-level one uses fiber window `[−ny, ny]`.
pub fn ellipticity_check(a: &CompatibleSymbol, ny: usize) -> EllipticityReport {
    use rayon::prelude::*;
    let pts = circle_samples(ANGULAR_SAMPLES);
    let dirs = sphere_directions();
    let (pm, pw) = pts
        .par_iter()
        .map(|&x| {
            let mut best = (f64::INFINITY, [0.0; 4]);
            for &y in &pts {
                for &(xi, eta) in &dirs {
                    let s = min_sv(&(a.principal.eval)(x, y, xi, eta));
                    if s < best.0 {
                        best = (s, [x, y, xi, eta]);
                    }
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, [0.0; 4]), |u, v| if u.0 <= v.0 { u } else { v });
    let (om, ow) = pts
        .par_iter()
        .flat_map(|&x| [(x, -1.0), (x, 1.0)])
        .map(|(x, xi)| (min_sv(&a.operator.fiber_matrix(x, xi, ny, ny)), [x, f64::NAN, xi, f64::NAN]))
        .reduce(|| (f64::INFINITY, [0.0; 4]), |u, v| if u.0 <= v.0 { u } else { v });
    let witness = if pm <= om { pw } else { ow };
    EllipticityReport { principal_margin: pm, operator_margin: om, witness, elliptic: pm > 1e-10 && om > 1e-10 }
}

/// Sup of `|a_M|` (largest singular value) over sampled `S*M∖π*S*X` and of the fiber-truncated
/// norms `‖a_X(x, ±1)‖`: the right-hand side of the essential-norm formula.
pub fn symbol_norm(a: &CompatibleSymbol, ny: usize) -> f64 {
    use rayon::prelude::*;
    let pts = circle_samples(ANGULAR_SAMPLES);
    let dirs = sphere_directions();
    let pm = pts
        .par_iter()
        .map(|&x| {
            let mut best: f64 = 0.0;
            for &y in &pts {
                for &(xi, eta) in &dirs {
                    best = best.max(max_sv(&(a.principal.eval)(x, y, xi, eta)));
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    let om = pts
        .par_iter()
        .flat_map(|&x| [(x, -1.0), (x, 1.0)])
        .map(|(x, xi)| max_sv(&a.operator.fiber_matrix(x, xi, ny, ny)))
        .reduce(|| 0.0, f64::max);
    pm.max(om)
}

/// The two seminorm families on operator symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiberSeminorm {
    /// `sup |∂_x^α (q − Σ_{k<j} q_{−k})|` over samples: the homogeneous-component seminorm,
    /// realized with `α ≤ 2` central differences and `j ≤ 1` (`q_0` = principal part).
    Homogeneous { alpha: usize, j: usize },
    /// `sup_{x,ξ} ‖(Δ_Y+ξ²+λ₀)^{(s+N)/2} (Op(q) − Σ_{k<N} Op(q_{−k})) (Δ_Y+ξ²+λ₀)^{-s/2}‖`
    /// on fiber window `ny`; `N = 0` uses `q` itself, `N = 1` removes the principal part.
    OperatorNorm { s: f64, n: usize, ny: usize },
}

/// Finite-grid evaluation of a fiber seminorm.
pub fn fiber_seminorm(q: &OperatorSymbol, kind: FiberSeminorm) -> f64 {
    let pts = circle_samples(ANGULAR_SAMPLES);
    match kind {
        FiberSeminorm::Homogeneous { alpha, j } => {
            let h = 1e-3;
            let mut worst: f64 = 0.0;
            for &x in &pts {
                for &y in &pts {
                    for xi in [-1.0, 1.0] {
                        for eta in [-8.0, -3.0, -1.0, 1.0, 3.0, 8.0] {
                            let f = |xx: f64| {
                                let v = (q.full)(xx, xi, y, eta);
                                if j >= 1 { v - (q.principal)(xx, xi, y, sgn(eta)) } else { v }
                            };
                            let d = match alpha {
                                0 => f(x),
                                1 => (f(x + h) - f(x - h)) / cplx(2.0 * h),
                                _ => (f(x + h) - f(x) * cplx(2.0) + f(x - h)) / cplx(h * h),
                            };
                            worst = worst.max(d.norm());
                        }
                    }
                }
            }
            worst
        }
        FiberSeminorm::OperatorNorm { s, n, ny } => {
            let r = q.rank;
            let mut worst: f64 = 0.0;
            for &x in &pts {
                for xi in [-1.0, 1.0] {
                    let mut m = q.fiber_matrix(x, xi, ny, ny);
                    if n >= 1 {
                        let pr = OperatorSymbol::new(r, q.principal.clone(), q.principal.clone(), 0, Bandwidth::new(None, q.band.y));
                        let p2 = OperatorSymbol {
                            full: {
                                let pp = pr.principal.clone();
                                Arc::new(move |x, xi, y, eta| pp(x, xi, y, sgn(eta)))
                            },
                            ..pr
                        };
                        m -= p2.fiber_matrix(x, xi, ny, ny);
                    }
                    let w = |eta: i64, p: f64| crate::sobolev::SobolevWeight::new(p).fiber(xi, eta as f64);
                    let dim = (2 * ny + 1) * r;
                    for i in 0..dim {
                        for jj in 0..dim {
                            let (ei, ej) = ((i / r) as i64 - ny as i64, (jj / r) as i64 - ny as i64);
                            m[(i, jj)] *= w(ei, s + n as f64) * w(ej, -s);
                        }
                    }
                    worst = worst.max(max_sv(&m));
                }
            }
            worst
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn aps() -> CompatibleSymbol {
        let full: FiberFn = Arc::new(|_, _, _, eta| scalar(cplx(if eta >= 0.0 { 1.0 } else { 0.0 })));
        let pr: FiberFn = Arc::new(|_, _, _, eh| scalar(cplx(if eh > 0.0 { 1.0 } else { 0.0 })));
        CompatibleSymbol::family("aps", 1, full, pr, 0, Bandwidth::CONSTANT)
    }

    #[test]
    fn identity_is_compatible_and_elliptic() {
        let id = CompatibleSymbol::identity(1);
        assert_eq!(id.check_compatibility(1e-12).max_deviation, 0.0);
        let e = ellipticity_check(&id, 4);
        assert!((e.principal_margin - 1.0).abs() < 1e-12 && (e.operator_margin - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aps_family_compatible_and_idempotent() {
        let p = aps();
        assert_eq!(p.check_compatibility(0.0).max_deviation, 0.0);
        let pp = symbol_mul(&p, &p).unwrap();
        for eta in -5..=5 {
            let d = (pp.operator.full)(0.3, 1.0, 0.7, eta as f64) - (p.operator.full)(0.3, 1.0, 0.7, eta as f64);
            assert!(d.norm() < 1e-14);
            let d = (pp.principal.eval)(0.3, 0.7, 1.0, eta as f64 + 0.5) - (p.principal.eval)(0.3, 0.7, 1.0, eta as f64 + 0.5);
            assert!(d.norm() < 1e-14);
        }
    }

    #[test]
    fn incompatible_pair_is_reported() {
        let eval: PointFn = Arc::new(|_, _, xi, eta| scalar(cplx(xi * xi / (xi * xi + eta * eta))));
        let limit: PointFn = Arc::new(|_, _, _, _| scalar(cplx(1.0)));
        let p = PrincipalSymbol::new(1, eval, limit, Bandwidth::CONSTANT, 4);
        // Declared limit 1 is right for this a_M; the mismatch is against an operator part
        // whose principal symbol is 0.
        let zero: FiberFn = Arc::new(|_, _, _, _| scalar(cplx(0.0)));
        let o = OperatorSymbol::new(1, zero.clone(), zero, 0, Bandwidth::CONSTANT);
        let s = CompatibleSymbol::new("bad", p, o, SymbolKind::General).unwrap();
        let rep = s.check_compatibility(1e-8);
        assert!(!rep.passed);
        assert!((rep.max_deviation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shifted_aps_margins() {
        let s = symbol_add(&CompatibleSymbol::constant(cplx(2.0), 1), &aps()).unwrap();
        let e = ellipticity_check(&s, 6);
        assert!(e.principal_margin >= 1.0 && e.operator_margin >= 1.0);
        assert!((symbol_norm(&aps(), 6) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adjoint_of_shift_family() {
        // q = e^{iy}: Op(q) shifts η → η+1; its adjoint shifts back.
        let full: FiberFn = Arc::new(|_, _, y, _| scalar(Complex64::from_polar(1.0, y)));
        let s = CompatibleSymbol::family("shift", 1, full.clone(), full, 0, Bandwidth::new(Some(0), Some(1)));
        let a = symbol_adjoint(&s);
        let m = a.operator.fiber_matrix(0.0, 1.0, 3, 3);
        for j in 1..7 {
            assert!((m[(j - 1, j)] - cplx(1.0)).norm() < 1e-13);
        }
        let prod = symbol_mul(&a, &s).unwrap();
        let m = prod.operator.fiber_matrix(0.0, 1.0, 3, 3);
        assert!((m - DMatrix::<Complex64>::identity(7, 7)).norm() < 1e-12);
    }

    #[test]
    fn inverse_of_elliptic_scalar() {
        let eval: PointFn = Arc::new(|_, _, xi, eta| scalar(Complex64::new(xi, eta) / (xi * xi + eta * eta).sqrt()));
        let limit: PointFn = Arc::new(|_, _, xi, _| scalar(cplx(sgn(xi))));
        let s = CompatibleSymbol::smooth("w", 1, eval, limit, Bandwidth::CONSTANT);
        let inv = symbol_invert(&s).unwrap();
        let one = symbol_mul(&s, &inv).unwrap();
        for &(xi, eta) in &sphere_directions() {
            assert!(((one.principal.eval)(0.1, 0.2, xi, eta) - scalar(cplx(1.0))).norm() < 1e-12);
        }
        assert!(symbol_invert(&CompatibleSymbol::zero(1)).is_err());
    }
}
