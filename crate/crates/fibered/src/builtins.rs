//! Registered symbols: the test corpus and the names usable from configuration files.
//!
//! Conventions shared by the fiber families: `Π₊` is the fiber projection onto `η ≥ 0`,
//! `Π₋ = 1 − Π₊`, `P₀` the rank-one projection onto the fiber mode `η = 0`.

use crate::error::{Error, Result};
use crate::symbols::{cplx, sgn, Bandwidth, CompatibleSymbol, FiberFn, Mat, OperatorSymbol, PointFn, PrincipalSymbol, SymbolKind};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::sync::Arc;

fn s1(v: Complex64) -> Mat {
    DMatrix::from_element(1, 1, v)
}

fn ind(b: bool) -> f64 {
    if b { 1.0 } else { 0.0 }
}

fn norm(xi: f64, eta: f64) -> f64 {
    (xi * xi + eta * eta).sqrt()
}

/// Scalar fiber family `x ↦ q(x; y, η)` with fiber principal symbol `σ(x, y, η̂)`.
fn scalar_family(
    name: &str,
    full: impl Fn(f64, f64, f64) -> Complex64 + Send + Sync + 'static,
    principal: impl Fn(f64, f64, f64) -> Complex64 + Send + Sync + 'static,
    band: Bandwidth,
) -> CompatibleSymbol {
    let f: FiberFn = Arc::new(move |x, _xi, y, eta| s1(full(x, y, eta)));
    let p: FiberFn = Arc::new(move |x, _xi, y, eh| s1(principal(x, y, eh)));
    CompatibleSymbol::family(name, 1, f, p, 0, band)
}

/// Scalar smooth pair: `a(x, y, ξ, η)` and its horizontal values `a(x, y, ξ, 0^{η̂})`.
fn scalar_smooth(
    name: &str,
    eval: impl Fn(f64, f64, f64, f64) -> Complex64 + Send + Sync + 'static,
    limit: impl Fn(f64, f64, f64, f64) -> Complex64 + Send + Sync + 'static,
    band: Bandwidth,
) -> CompatibleSymbol {
    let e: PointFn = Arc::new(move |x, y, xi, eta| s1(eval(x, y, xi, eta)));
    let l: PointFn = Arc::new(move |x, y, xi, eh| s1(limit(x, y, xi, eh)));
    CompatibleSymbol::smooth(name, 1, e, l, band)
}

/// APS-type fiber projection `Π₊` (principal symbol `1_{η>0}`).
pub fn aps() -> CompatibleSymbol {
    scalar_family("aps", |_, _, eta| cplx(ind(eta >= 0.0)), |_, _, eh| cplx(ind(eh > 0.0)), Bandwidth::CONSTANT)
}

/// `2 + Π₊`: an elliptic, non-smooth fiber family.
pub fn shifted_aps() -> CompatibleSymbol {
    scalar_family("shifted_aps", |_, _, eta| cplx(2.0 + ind(eta >= 0.0)), |_, _, eh| cplx(2.0 + ind(eh > 0.0)), Bandwidth::CONSTANT)
}

/// Multiplication by `e^{iy}` (fiber translation by one mode).
pub fn fiber_shift() -> CompatibleSymbol {
    let e = |_x: f64, y: f64, _: f64, _: f64| Complex64::from_polar(1.0, y);
    scalar_smooth("fiber_shift", e, e, Bandwidth::new(Some(0), Some(1)))
}

/// `(2 + cos x)/3 · (1 + ξ/|ζ|)/2`: smooth up to `η = 0`, Example-2 type.
pub fn smooth1() -> CompatibleSymbol {
    scalar_smooth(
        "smooth1",
        |x, _, xi, eta| cplx((2.0 + x.cos()) / 3.0 * (1.0 + xi / norm(xi, eta)) / 2.0),
        |x, _, xi, _| cplx((2.0 + x.cos()) / 3.0 * (1.0 + sgn(xi)) / 2.0),
        Bandwidth::new(Some(1), Some(0)),
    )
}

/// `0.8 cos x · Π₊ + 0.5 Π₋`: a base-dependent fiber family, Example-1 type.
pub fn family1() -> CompatibleSymbol {
    let f = |x: f64, pos: bool| cplx(if pos { 0.8 * x.cos() } else { 0.5 });
    scalar_family("family1", move |x, _, eta| f(x, eta >= 0.0), move |x, _, eh| f(x, eh > 0.0), Bandwidth::new(Some(1), Some(0)))
}

/// Elliptic scalar pair with winding: `a_M = (ξ + iη)/|ζ|`, `a_X = sign ξ`.
pub fn unit_winding() -> CompatibleSymbol {
    scalar_smooth(
        "unit_winding",
        |_, _, xi, eta| Complex64::new(xi, eta) / norm(xi, eta),
        |_, _, xi, _| cplx(sgn(xi)),
        Bandwidth::CONSTANT,
    )
}

/// `(1, I + 1_{ξ≥0}(e^{inx} − 1)P₀)`: principal symbol 1, operator part twisting the zero
/// fiber mode by `e^{inx}` on the positive half of `S*X`. Fredholm of index `−n`.
pub fn winding(n: i64) -> CompatibleSymbol {
    let one: PointFn = Arc::new(|_, _, _, _| s1(cplx(1.0)));
    let p = PrincipalSymbol::new(1, one.clone(), one, Bandwidth::CONSTANT, usize::MAX);
    let full: FiberFn = Arc::new(move |x, xi, _y, eta| {
        if xi >= 0.0 && eta == 0.0 {
            s1(Complex64::from_polar(1.0, n as f64 * x))
        } else {
            s1(cplx(1.0))
        }
    });
    let principal: FiberFn = Arc::new(|_, _, _, _| s1(cplx(1.0)));
    let band = Bandwidth::new(Some(n.unsigned_abs() as usize), Some(0));
    let op = OperatorSymbol::new(1, full, principal, 0, band);
    CompatibleSymbol { name: format!("winding({n})"), rank: 1, principal: p, operator: op, kind: SymbolKind::General }
}

/// The smooth base factor of the mixed symbol.
pub fn mixed_modulation(x: f64, y: f64) -> f64 {
    (1.0 + 0.5 * x.cos() * y.cos()) / 1.5
}

/// `a_M = (ξ² + |η| ξ m(x,y))/(ξ² + η²)`, `m = (1 + ½ cos x cos y)/1.5`, `a_X = I`: genuinely
/// mixed (neither smooth across `η = 0` in the rescaled variable beyond first order, nor a fiber
/// family), bandwidth `(1, 1)`.
pub fn mixed() -> CompatibleSymbol {
    let eval: PointFn = Arc::new(|x, y, xi, eta| {
        let d = xi * xi + eta * eta;
        if d == 0.0 {
            return s1(cplx(1.0));
        }
        s1(cplx((xi * xi + eta.abs() * xi * mixed_modulation(x, y)) / d))
    });
    let one: PointFn = Arc::new(|_, _, _, _| s1(cplx(1.0)));
    let band = Bandwidth::new(Some(1), Some(1));
    let p = PrincipalSymbol::new(1, eval, one.clone(), band, usize::MAX);
    let op = OperatorSymbol::from_limit(1, one, Bandwidth::CONSTANT, crate::symbols::EtaConvention::Plus);
    CompatibleSymbol { name: "mixed".into(), rank: 1, principal: p, operator: op, kind: SymbolKind::General }
}

/// `(0, 0.7 P₀)`: the operator part alone carries the norm.
pub fn rank_one() -> CompatibleSymbol {
    let zero: PointFn = Arc::new(|_, _, _, _| s1(cplx(0.0)));
    let p = PrincipalSymbol::new(1, zero.clone(), zero, Bandwidth::CONSTANT, usize::MAX);
    let full: FiberFn = Arc::new(|_, _, _, eta| s1(cplx(if eta == 0.0 { 0.7 } else { 0.0 })));
    let principal: FiberFn = Arc::new(|_, _, _, _| s1(cplx(0.0)));
    let op = OperatorSymbol::new(1, full, principal, 0, Bandwidth::CONSTANT);
    CompatibleSymbol { name: "rank_one".into(), rank: 1, principal: p, operator: op, kind: SymbolKind::FiberFamily }
}

/// `((1 − cos x)² + (1 − η/|ζ|)²)/2`: vanishes (to second order) exactly at `x = 0` in the
/// direction `(0, 1)`, so it is not elliptic while its operator part (`η → 0` limits ≥ ½) is
/// invertible. The double zero makes the truncated minimal singular value decay like `N⁻²`.
pub fn degenerate() -> CompatibleSymbol {
    scalar_smooth(
        "degenerate",
        |x, _, xi, eta| cplx(((1.0 - x.cos()).powi(2) + (1.0 - eta / norm(xi, eta)).powi(2)) / 2.0),
        |x, _, _, _| cplx(((1.0 - x.cos()).powi(2) + 1.0) / 2.0),
        Bandwidth::new(Some(2), Some(0)),
    )
}

/// The first-order boundary block `A(ξ, η) = [[η, ξ], [ξ, −η]]` of the Hirzebruch-type model.
pub fn hirzebruch_block(xi: f64, eta: f64) -> Mat {
    DMatrix::from_row_slice(2, 2, &[cplx(eta), cplx(xi), cplx(xi), cplx(-eta)])
}

/// Calderón-type projection `(I + A/|ζ|)/2` of the Hirzebruch-type model (rank 2, smooth).
pub fn hirzebruch_calderon() -> CompatibleSymbol {
    let eval: PointFn = Arc::new(|_, _, xi, eta| {
        let n = norm(xi, eta);
        if n == 0.0 {
            return (DMatrix::identity(2, 2) + hirzebruch_block(1.0, 0.0)) * cplx(0.5);
        }
        (DMatrix::identity(2, 2) + hirzebruch_block(xi, eta) * cplx(1.0 / n)) * cplx(0.5)
    });
    let limit: PointFn = Arc::new(|_, _, xi, _| (DMatrix::identity(2, 2) + hirzebruch_block(sgn(xi), 0.0)) * cplx(0.5));
    CompatibleSymbol::smooth("hirzebruch_calderon", 2, eval, limit, Bandwidth::CONSTANT)
}

/// Boundary projection `diag(Π₊, Π₋)` of the Hirzebruch-type model.
pub fn hirzebruch_boundary() -> CompatibleSymbol {
    let d = |p: bool| DMatrix::from_row_slice(2, 2, &[cplx(ind(p)), cplx(0.0), cplx(0.0), cplx(ind(!p))]);
    let full: FiberFn = Arc::new(move |_, _, _, eta| d(eta >= 0.0));
    let principal: FiberFn = Arc::new(move |_, _, _, eh| d(eh > 0.0));
    CompatibleSymbol::family("hirzebruch_boundary", 2, full, principal, 0, Bandwidth::CONSTANT)
}

/// Description line of a registered symbol.
#[derive(Debug, Clone, Serialize)]
pub struct BuiltinInfo {
    pub name: &'static str,
    pub rank: usize,
    pub description: &'static str,
}

/// Every registered name (parameterized names shown with their argument).
pub fn list_builtins() -> Vec<BuiltinInfo> {
    let b = |name, rank, description| BuiltinInfo { name, rank, description };
    vec![
        b("identity", 1, "identity pair (1, I)"),
        b("const:<c>", 1, "constant multiple of the identity"),
        b("aps", 1, "fiber projection onto eta >= 0"),
        b("aps_projection", 1, "alias of aps"),
        b("shifted_aps", 1, "2 + aps, elliptic fiber family"),
        b("fiber_shift", 1, "multiplication by exp(iy)"),
        b("smooth1", 1, "(2+cos x)/3 (1+xi/|zeta|)/2, smooth across eta = 0"),
        b("family1", 1, "0.8 cos x P+ + 0.5 P-, base-dependent fiber family"),
        b("unit_winding", 1, "(xi+i eta)/|zeta| with operator part sign(xi)"),
        b("winding(<n>)", 1, "(1, I + 1[xi>=0](exp(inx)-1)P0), index -n"),
        b("winding_compact", 1, "alias of winding(1)"),
        b("mixed", 1, "(xi^2+|eta| xi m(x,y))/(xi^2+eta^2), generic mixed symbol"),
        b("rank_one", 1, "(0, 0.7 P0)"),
        b("degenerate", 1, "non-elliptic witness vanishing at one covector"),
        b("hirzebruch_calderon", 2, "Calderon projection (I + A/|zeta|)/2 of the 2x2 boundary model"),
        b("hirzebruch_boundary", 2, "boundary projection diag(P+, P-)"),
    ]
}

/// Look up a registered symbol by name.
pub fn builtin(name: &str) -> Result<CompatibleSymbol> {
    let name = name.trim();
    if let Some(c) = name.strip_prefix("const:") {
        let v: f64 = c.trim().parse().map_err(|_| Error::Parse(format!("bad constant '{c}'")))?;
        return Ok(CompatibleSymbol::constant(cplx(v), 1));
    }
    if let Some(rest) = name.strip_prefix("winding(") {
        let n: i64 = rest
            .strip_suffix(')')
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad winding argument in '{name}'")))?;
        return Ok(winding(n));
    }
    Ok(match name {
        "identity" => CompatibleSymbol::identity(1),
        "aps" => aps(),
        "aps_projection" => aps().renamed("aps_projection"),
        "shifted_aps" => shifted_aps(),
        "fiber_shift" => fiber_shift(),
        "smooth1" => smooth1(),
        "family1" => family1(),
        "unit_winding" => unit_winding(),
        "winding_compact" => winding(1).renamed("winding_compact"),
        "mixed" => mixed(),
        "rank_one" => rank_one(),
        "degenerate" => degenerate(),
        "hirzebruch_calderon" => hirzebruch_calderon(),
        "hirzebruch_boundary" => hirzebruch_boundary(),
        other => return Err(Error::Parse(format!("unknown builtin '{other}'"))),
    })
}

/// The eight scalar symbols used by the corpus-wide checks.
pub fn corpus() -> Vec<CompatibleSymbol> {
    ["identity", "const:0.7", "aps", "smooth1", "family1", "unit_winding", "winding_compact", "mixed"]
        .iter()
        .map(|n| builtin(n).expect("corpus names are registered"))
        .collect()
}

/// Elliptic members of the corpus together with extra elliptic symbols.
pub fn elliptic_corpus() -> Vec<CompatibleSymbol> {
    ["identity", "const:0.7", "shifted_aps", "unit_winding", "winding_compact"]
        .iter()
        .map(|n| builtin(n).expect("corpus names are registered"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{ellipticity_check, symbol_norm};

    #[test]
    fn every_builtin_is_compatible() {
        for info in list_builtins() {
            let name = info.name.replace("<c>", "0.3").replace("<n>", "-2");
            let s = builtin(&name).unwrap();
            assert_eq!(s.rank, info.rank, "{name}");
            assert!(s.check_compatibility(1e-12).passed, "{name}");
        }
        assert!(builtin("nonsense").is_err());
        assert!(builtin("winding(x)").is_err());
    }

    #[test]
    fn corpus_norms_and_ellipticity() {
        assert!((symbol_norm(&rank_one(), 4) - 0.7).abs() < 1e-12);
        assert!((symbol_norm(&family1(), 4) - 0.8).abs() < 1e-12);
        assert!((symbol_norm(&aps(), 4) - 1.0).abs() < 1e-12);
        for s in elliptic_corpus() {
            assert!(ellipticity_check(&s, 6).elliptic, "{}", s.name);
        }
        assert!(!ellipticity_check(&degenerate(), 6).elliptic);
    }
}
