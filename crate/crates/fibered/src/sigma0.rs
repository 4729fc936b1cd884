//! Constructive approximation of compatible pairs by finite sums of products of smooth symbols
//! (multiplication type) and fiber operator families.
//!
//! For a scalar symbol `σ` the construction is:
//! 1. away from `η = 0` (`t' = |η|/|ζ| > 2ε`) keep `χ(t')σ`, which is smooth;
//! 2. near `η = 0` separate the rescaled symbol `σ(x, y, ξ', t η̂)`, `ξ', η̂ ∈ {±1}`, as
//!    `Σ_j a_j(x, ξ', t) b_j(y, η̂)` by a truncated SVD of its samples;
//! 3. replace each `a_j` by its Taylor polynomial in `t = |η|/|ξ|` of order `N'` (coefficients
//!    from a Chebyshev-node polynomial fit);
//! 4. write odd powers as `(|η|/|ξ|)^k = sign(η)^k (η/|ξ|)^k`: the sign goes to the fiber
//!    factor (the partition of unity of the two-point sphere `{±1}`), `(η/|ξ|)^k` is smooth.
//!
//! Every emitted term is `(smooth factor) · (fiber family)`, both compatible by construction.

use crate::error::{Error, Result};
use crate::symbols::{
    circle_samples, cplx, sgn, symbol_add, symbol_mul, Bandwidth, CompatibleSymbol, EtaConvention, FiberFn, Mat, PointFn,
    SymbolKind, DYADIC_LEVELS,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// Parameters of the construction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Sigma0Params {
    /// Chopping threshold `ε_χ`: `χ(t') = 0` for `t' < ε_χ`, `1` for `t' > 2ε_χ`.
    pub eps_chi: f64,
    /// Taylor order `N'` in `t = |η|/|ξ|`.
    pub taylor_order: usize,
    /// Maximal SVD rank.
    pub max_rank: usize,
    /// Singular values below `svd_tol · s₁` are dropped.
    pub svd_tol: f64,
    /// Degree of the Chebyshev-node polynomial fit in `t`.
    pub fit_degree: usize,
}

impl Default for Sigma0Params {
    fn default() -> Self {
        Sigma0Params { eps_chi: 0.1, taylor_order: 4, max_rank: 4, svd_tol: 1e-12, fit_degree: 14 }
    }
}

/// Which generating family a factor belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FactorType {
    /// Smooth symbol acting by multiplication on `π*T*X`.
    Smooth,
    /// Family of fiber operators.
    FiberFamily,
}

/// One product `smooth · family`.
#[derive(Debug, Clone)]
pub struct Sigma0Term {
    pub smooth: CompatibleSymbol,
    pub family: CompatibleSymbol,
    /// Human-readable tag, e.g. `"chi*sigma"`, `"a[1,3]*b[1]"`.
    pub tag: String,
}

impl Sigma0Term {
    pub fn symbol(&self) -> Result<CompatibleSymbol> {
        symbol_mul(&self.smooth, &self.family)
    }

    pub fn factor_types(&self) -> (FactorType, FactorType) {
        (FactorType::Smooth, FactorType::FiberFamily)
    }
}

/// A finite sum of [`Sigma0Term`]s.
#[derive(Debug, Clone)]
pub struct Sigma0Sum {
    pub rank: usize,
    pub terms: Vec<Sigma0Term>,
}

impl Sigma0Sum {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The sum as a compatible pair.
    pub fn symbol(&self) -> Result<CompatibleSymbol> {
        let mut it = self.terms.iter();
        let first = it.next().ok_or_else(|| Error::Range("empty sum".into()))?.symbol()?;
        let mut acc = it.try_fold(first, |acc, t| symbol_add(&acc, &t.symbol()?))?;
        acc.kind = SymbolKind::Sigma0;
        Ok(acc.renamed("sigma0-sum"))
    }

    /// Principal value of the sum.
    pub fn principal(&self, x: f64, y: f64, xi: f64, eta: f64) -> Mat {
        let mut acc = DMatrix::zeros(self.rank, self.rank);
        for t in &self.terms {
            acc += (t.smooth.principal.eval)(x, y, xi, eta) * (t.family.principal.eval)(x, y, xi, eta);
        }
        acc
    }
}

/// Achieved accuracy of an approximation.
#[derive(Debug, Clone, Serialize)]
pub struct Sigma0Report {
    pub n_terms: usize,
    pub svd_rank: usize,
    pub singular_values: Vec<f64>,
    /// Sup error of the principal part on the validation grid.
    pub principal_error: f64,
    /// Sup error of the fiber-truncated operator parts.
    pub operator_error: f64,
    pub requested: f64,
    pub reached: bool,
    pub params: Sigma0Params,
}

/// Smooth step: 0 for `t ≤ a`, 1 for `t ≥ 2a`.
pub fn chopping(t: f64, a: f64) -> f64 {
    let s = (t - a) / a;
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let psi = |u: f64| (-1.0 / u).exp();
    psi(s) / (psi(s) + psi(1.0 - s))
}

fn angle(xi: f64, eta: f64) -> f64 {
    let n = (xi * xi + eta * eta).sqrt();
    if n == 0.0 { 1.0 } else { eta.abs() / n }
}

/// Trigonometric interpolant through `p` (odd) equispaced samples.
#[derive(Debug, Clone)]
struct TrigInterp {
    coefs: Vec<Complex64>,
}

impl TrigInterp {
    fn new(samples: &[Complex64]) -> Self {
        let p = samples.len();
        let h = (p - 1) / 2;
        let coefs = (0..p)
            .map(|a| {
                let k = a as f64 - h as f64;
                samples.iter().enumerate().map(|(j, v)| v * Complex64::from_polar(1.0, -k * 2.0 * PI * j as f64 / p as f64)).sum::<Complex64>()
                    / p as f64
            })
            .collect();
        TrigInterp { coefs }
    }

    fn eval(&self, y: f64) -> Complex64 {
        let h = (self.coefs.len() - 1) / 2;
        self.coefs.iter().enumerate().map(|(a, c)| c * Complex64::from_polar(1.0, (a as f64 - h as f64) * y)).sum()
    }

    fn band(&self) -> usize {
        (self.coefs.len() - 1) / 2
    }
}

/// Separated data shared by the emitted terms.
struct Separation {
    sigma: PointFn,
    ys: Vec<f64>,
    /// `V_j(m, η̂)`, column layout `m·2 + (η̂ > 0)`.
    v: DMatrix<Complex64>,
    rank: usize,
    nodes: Vec<f64>,
    t_max: f64,
    order: usize,
    /// `(x bits, ξ' > 0) ↦ c[j][k]` (Taylor coefficients of `a_j` in `t`).
    cache: Mutex<HashMap<(u64, bool), Arc<Vec<Vec<Complex64>>>>>,
}

impl Separation {
    fn col(m: usize, eh: f64) -> usize {
        2 * m + usize::from(eh > 0.0)
    }

    fn taylor(&self, x: f64, xs: f64) -> Arc<Vec<Vec<Complex64>>> {
        let key = (x.to_bits(), xs > 0.0);
        if let Some(c) = self.cache.lock().unwrap().get(&key) {
            return c.clone();
        }
        let d = self.nodes.len();
        // a_j at the Chebyshev nodes: projection of the sampled row onto V_j.
        let mut vals = DMatrix::<Complex64>::zeros(d, self.rank);
        for (c, &t) in self.nodes.iter().enumerate() {
            for (m, &y) in self.ys.iter().enumerate() {
                for eh in [-1.0, 1.0] {
                    let s = (self.sigma)(x, y, xs, t * eh)[(0, 0)];
                    for j in 0..self.rank {
                        vals[(c, j)] += s * self.v[(Self::col(m, eh), j)];
                    }
                }
            }
        }
        // Interpolating polynomial in u = t / t_max, then monomial coefficients in t.
        let vander = DMatrix::from_fn(d, d, |r, k| cplx((self.nodes[r] / self.t_max).powi(k as i32)));
        let lu = vander.lu();
        let out: Vec<Vec<Complex64>> = (0..self.rank)
            .map(|j| {
                let rhs = DVector::from_iterator(d, (0..d).map(|r| vals[(r, j)]));
                let c = lu.solve(&rhs).expect("Chebyshev Vandermonde is invertible");
                (0..=self.order).map(|k| if k < d { c[k] / self.t_max.powi(k as i32) } else { cplx(0.0) }).collect()
            })
            .collect();
        let out = Arc::new(out);
        self.cache.lock().unwrap().insert(key, out.clone());
        out
    }
}

/// Approximates a scalar pair by a [`Sigma0Sum`]; `eps` is the target sup error (the report
/// carries the achieved error either way).
pub fn approximate_sigma0(sym: &CompatibleSymbol, eps: f64, params: &Sigma0Params) -> Result<(Sigma0Sum, Sigma0Report)> {
    if sym.rank != 1 {
        return Err(Error::Unsupported("Σ₀ approximation of matrix-valued symbols".into()));
    }
    if params.eps_chi <= 0.0 || params.eps_chi >= 0.25 {
        return Err(Error::Range("chopping threshold must lie in (0, 1/4)".into()));
    }
    let identity = CompatibleSymbol::identity(1);
    let mut terms = Vec::new();
    let mut singular_values = Vec::new();
    let mut svd_rank = 0;
    match sym.kind {
        SymbolKind::Smooth => terms.push(Sigma0Term { smooth: sym.clone(), family: identity, tag: "smooth".into() }),
        SymbolKind::FiberFamily => terms.push(Sigma0Term { smooth: identity, family: sym.clone(), tag: "family".into() }),
        _ => {
            if sym.principal.smoothness < params.taylor_order + 1 {
                return Err(Error::Range(format!(
                    "{} declares smoothness {} in t, Taylor order {} needs {}",
                    sym.name,
                    sym.principal.smoothness,
                    params.taylor_order,
                    params.taylor_order + 1
                )));
            }
            let (t, sv, r) = separated_terms(sym, params)?;
            terms = t;
            singular_values = sv;
            svd_rank = r;
        }
    }
    let sum = Sigma0Sum { rank: 1, terms };
    let (pe, oe) = approximation_error(sym, &sum)?;
    let report = Sigma0Report {
        n_terms: sum.len(),
        svd_rank,
        singular_values,
        principal_error: pe,
        operator_error: oe,
        requested: eps,
        reached: pe <= eps && oe <= eps,
        params: *params,
    };
    Ok((sum, report))
}

fn separated_terms(sym: &CompatibleSymbol, params: &Sigma0Params) -> Result<(Vec<Sigma0Term>, Vec<f64>, usize)> {
    let eps = params.eps_chi;
    let sigma = sym.principal.eval.clone();
    // Rescaled range covering t' ≤ 2ε with margin: t = t'/√(1−t'²) ≤ 4ε.
    let t_max = 4.0 * eps;
    let d = params.fit_degree + 1;
    let nodes: Vec<f64> = (0..d).map(|c| t_max * (1.0 + (PI * (2 * c + 1) as f64 / (2 * d) as f64).cos()) / 2.0).collect();
    let py = match sym.principal.band.y {
        Some(b) => 2 * b + 1,
        None => 17,
    };
    let ys = circle_samples(py);
    let xs = circle_samples(17);
    // Sample matrix: rows (x, ξ', node), columns (y_m, η̂).
    let mut rows: Vec<(f64, f64, f64)> = Vec::with_capacity(xs.len() * 2 * d);
    for &x in &xs {
        for xi in [-1.0, 1.0] {
            rows.extend(nodes.iter().map(|&t| (x, xi, t)));
        }
    }
    let s = DMatrix::from_fn(rows.len(), 2 * py, |r, c| {
        let (x, xi, t) = rows[r];
        let (m, eh) = (c / 2, if c % 2 == 1 { 1.0 } else { -1.0 });
        sigma(x, ys[m], xi, t * eh)[(0, 0)]
    });
    let svd = s.svd(false, true);
    let vt = svd.v_t.ok_or_else(|| Error::NoConvergence("SVD".into()))?;
    // nalgebra does not sort singular values.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let rank = sv.iter().take(params.max_rank).filter(|&&v| v > params.svd_tol * sv[0]).count();
    let v = DMatrix::from_fn(2 * py, rank, |r, j| vt[(order[j], r)].conj());
    let sep = Arc::new(Separation { sigma: sigma.clone(), ys: ys.clone(), v, rank, nodes, t_max, order: params.taylor_order, cache: Mutex::new(HashMap::new()) });

    let mut terms = Vec::new();
    // χ σ: smooth, vanishing near η = 0.
    {
        let sg = sigma.clone();
        let eval: PointFn = Arc::new(move |x, y, xi, eta| sg(x, y, xi, eta) * cplx(chopping(angle(xi, eta), eps)));
        let zero: PointFn = Arc::new(|_, _, _, _| DMatrix::from_element(1, 1, cplx(0.0)));
        let smooth = CompatibleSymbol::smooth("chi*sigma", 1, eval, zero, sym.principal.band);
        terms.push(Sigma0Term { smooth, family: CompatibleSymbol::identity(1), tag: "chi*sigma".into() });
    }
    for j in 0..rank {
        // b_j(y, η̂) = conj V_j interpolated in y.
        let interp: Arc<[TrigInterp; 2]> = Arc::new([-1.0, 1.0].map(|eh| {
            let samples: Vec<Complex64> = (0..py).map(|m| sep.v[(Separation::col(m, eh), j)].conj()).collect();
            TrigInterp::new(&samples)
        }));
        let band_y = interp[0].band();
        for k in 0..=params.taylor_order {
            let sp = sep.clone();
            let eval: PointFn = Arc::new(move |x, _y, xi, eta| {
                let chi = chopping(angle(xi, eta), eps);
                if chi >= 1.0 || xi == 0.0 {
                    return DMatrix::from_element(1, 1, cplx(0.0));
                }
                let c = sp.taylor(x, sgn(xi))[j][k];
                DMatrix::from_element(1, 1, c * (1.0 - chi) * (eta / xi.abs()).powi(k as i32))
            });
            let sp = sep.clone();
            let limit: PointFn = Arc::new(move |x, _y, xi, _eh| {
                let c = if k == 0 { sp.taylor(x, sgn(xi))[j][0] } else { cplx(0.0) };
                DMatrix::from_element(1, 1, c)
            });
            let smooth = CompatibleSymbol::smooth(&format!("a[{j},{k}]"), 1, eval, limit, Bandwidth::new(sym.principal.band.x, Some(0)));
            let parity = if k % 2 == 1 { -1.0 } else { 1.0 };
            let b = interp.clone();
            let fb = move |y: f64, eh: f64| -> Mat {
                let side = if eh > 0.0 { 1.0 } else { parity };
                DMatrix::from_element(1, 1, b[usize::from(eh > 0.0)].eval(y) * side)
            };
            let fb2 = fb.clone();
            let full: FiberFn = Arc::new(move |_x, _xi, y, eta| fb(y, EtaConvention::Plus.eta_sign(eta)));
            let principal: FiberFn = Arc::new(move |_x, _xi, y, eh| fb2(y, sgn(eh)));
            let family = CompatibleSymbol::family(&format!("b[{j}]^({k})"), 1, full, principal, 0, Bandwidth::new(Some(0), Some(band_y)));
            terms.push(Sigma0Term { smooth, family, tag: format!("a[{j},{k}]*b[{j}]") });
        }
    }
    // Operator parts that are not multiplication by the limit: one exact correction per ξ-side.
    if operator_correction_size(sym) > 1e-13 {
        for side in [-1.0, 1.0] {
            let eval: PointFn = Arc::new(move |_, _, xi, eta| {
                let on = if sgn(xi) == side { 1.0 } else { 0.0 };
                DMatrix::from_element(1, 1, cplx(on * (1.0 - chopping(angle(xi, eta), eps))))
            });
            let limit: PointFn = Arc::new(move |_, _, xi, _| DMatrix::from_element(1, 1, cplx(if sgn(xi) == side { 1.0 } else { 0.0 })));
            let smooth = CompatibleSymbol::smooth("side", 1, eval, limit, Bandwidth::CONSTANT);
            let (q, lim) = (sym.operator.full.clone(), sym.principal.limit.clone());
            let full: FiberFn = Arc::new(move |x, _xi, y, eta| q(x, side, y, eta) - lim(x, y, side, EtaConvention::Plus.eta_sign(eta)));
            let zero: FiberFn = Arc::new(|_, _, _, _| DMatrix::from_element(1, 1, cplx(0.0)));
            let family = CompatibleSymbol::family("correction", 1, full, zero, -1, sym.band());
            terms.push(Sigma0Term { smooth, family, tag: format!("correction[{side:+}]") });
        }
    }
    Ok((terms, sv, rank))
}

/// Fiber window for operator-part errors.
const OPERATOR_WINDOW: usize = 8;

fn operator_correction_size(sym: &CompatibleSymbol) -> f64 {
    let lim = sym.principal.limit.clone();
    let mult = crate::symbols::OperatorSymbol::from_limit(1, lim, sym.principal.band, EtaConvention::Plus);
    let mut worst: f64 = 0.0;
    for &x in &circle_samples(7) {
        for xi in [-1.0, 1.0] {
            let d = sym.operator.fiber_matrix(x, xi, OPERATOR_WINDOW, OPERATOR_WINDOW) - mult.fiber_matrix(x, xi, OPERATOR_WINDOW, OPERATOR_WINDOW);
            worst = worst.max(d.norm());
        }
    }
    worst
}

/// Validation directions: a finer angular grid, dyadic near-horizontal directions, and a dense
/// sweep through the chopping region.
fn validation_directions() -> Vec<(f64, f64)> {
    let mut dirs: Vec<(f64, f64)> = (0..62).map(|k| PI * (k as f64 + 0.25) / 31.0).map(|th| (th.cos(), th.sin())).collect();
    for k in 0..=DYADIC_LEVELS {
        let t = 2f64.powi(-(k as i32));
        for xi in [-1.0, 1.0] {
            for s in [-1.0, 1.0] {
                dirs.push((xi, s * t));
            }
        }
    }
    for q in 1..=40 {
        let tp = 0.6 * q as f64 / 40.0;
        let t = tp / (1.0 - tp * tp).sqrt();
        for xi in [-1.0, 1.0] {
            for s in [-1.0, 1.0] {
                dirs.push((xi, s * t));
            }
        }
    }
    dirs
}

/// `(principal sup error, operator-part sup error)` of `sum` against `sym`.
pub fn approximation_error(sym: &CompatibleSymbol, sum: &Sigma0Sum) -> Result<(f64, f64)> {
    use rayon::prelude::*;
    let xs: Vec<f64> = (0..23).map(|j| 2.0 * PI * (j as f64 + 0.37) / 23.0).collect();
    let ys: Vec<f64> = (0..23).map(|j| 2.0 * PI * (j as f64 + 0.61) / 23.0).collect();
    let dirs = validation_directions();
    let pe = xs
        .par_iter()
        .map(|&x| {
            let mut w: f64 = 0.0;
            for &y in &ys {
                for &(xi, eta) in &dirs {
                    w = w.max(((sym.principal.eval)(x, y, xi, eta) - sum.principal(x, y, xi, eta)).norm());
                }
            }
            w
        })
        .reduce(|| 0.0, f64::max);
    let total = sum.symbol()?;
    let oe = xs
        .par_iter()
        .step_by(3)
        .map(|&x| {
            let mut w: f64 = 0.0;
            for xi in [-1.0, 1.0] {
                let d = sym.operator.fiber_matrix(x, xi, OPERATOR_WINDOW, OPERATOR_WINDOW)
                    - total.operator.fiber_matrix(x, xi, OPERATOR_WINDOW, OPERATOR_WINDOW);
                w = w.max(crate::linalg::dense_singular_values(&d).first().copied().unwrap_or(0.0));
            }
            w
        })
        .reduce(|| 0.0, f64::max);
    Ok((pe, oe))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    #[test]
    fn chopping_function() {
        assert_eq!(chopping(0.05, 0.1), 0.0);
        assert_eq!(chopping(0.25, 0.1), 1.0);
        assert!((chopping(0.15, 0.1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn generators_are_single_terms() {
        let p = Sigma0Params::default();
        for s in [builtins::smooth1(), builtins::family1()] {
            let (sum, rep) = approximate_sigma0(&s, 1e-12, &p).unwrap();
            assert_eq!(sum.len(), 1);
            assert!(rep.principal_error == 0.0 && rep.operator_error < 1e-14, "{rep:?}");
        }
    }

    #[test]
    fn trig_interpolation_is_exact_on_band() {
        let s: Vec<Complex64> = circle_samples(5).iter().map(|&y| Complex64::new(1.0 + y.cos(), y.sin())).collect();
        let t = TrigInterp::new(&s);
        assert!((t.eval(0.3) - Complex64::new(1.0 + 0.3f64.cos(), 0.3f64.sin())).norm() < 1e-14);
    }
}
