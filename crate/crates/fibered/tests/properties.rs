//! Property-based invariants of the calculus.

use fibered::boundary::{calderon_at, complementary_calderon, example3_problem};
use fibered::calkin::DecayCurve;
use fibered::grid::{forward_transform, inverse_transform};
use fibered::obstruction::{obstruction_family, obstruction_invariant, DirectSum, FiberModel, Representative, TwistedModel};
use fibered::quantize::quantize;
use fibered::symbols::{symbol_add, symbol_adjoint, symbol_mul, symbol_scale};
use fibered::{builtins, Complex64, FrequencyGrid};
use nalgebra::DMatrix;
use proptest::prelude::*;
use std::sync::Arc;

const CORPUS: [&str; 8] = ["identity", "const:0.7", "aps", "smooth1", "family1", "unit_winding", "winding_compact", "mixed"];

fn dense_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    /// Quantization is linear.
    #[test]
    fn quantization_is_linear(i in 0..8usize, j in 0..8usize, re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let (a, b) = (builtins::builtin(CORPUS[i]).unwrap(), builtins::builtin(CORPUS[j]).unwrap());
        let c = Complex64::new(re, im);
        let g = FrequencyGrid::new(5, 5, 1);
        let lhs = quantize(&symbol_add(&symbol_scale(&a, c), &b).unwrap(), &g).unwrap().to_dense();
        let rhs = quantize(&a, &g).unwrap().to_dense() * c + quantize(&b, &g).unwrap().to_dense();
        prop_assert!(dense_diff(&lhs, &rhs) <= 1e-12);
    }

    /// The symbol adjoint is an involution at both levels.
    #[test]
    fn adjoint_is_an_involution(i in 0..8usize, x in 0.0..6.28f64, y in 0.0..6.28f64, t in 0.0..6.28f64, eta in -3.0..3.0f64) {
        let a = builtins::builtin(CORPUS[i]).unwrap();
        let aa = symbol_adjoint(&symbol_adjoint(&a));
        let (xi, e) = (t.cos(), t.sin());
        let d = ((aa.principal.eval)(x, y, xi, e) - (a.principal.eval)(x, y, xi, e)).norm();
        prop_assert!(d <= 1e-12);
        for xs in [-1.0, 1.0] {
            let d = ((aa.operator.full)(x, xs, y, eta) - (a.operator.full)(x, xs, y, eta)).norm();
            prop_assert!(d <= 1e-12);
        }
    }

    /// Principal symbols multiply pointwise.
    #[test]
    fn product_is_pointwise_on_the_principal_level(i in 0..8usize, j in 0..8usize, x in 0.0..6.28f64, y in 0.0..6.28f64, t in 0.1..3.0f64) {
        let (a, b) = (builtins::builtin(CORPUS[i]).unwrap(), builtins::builtin(CORPUS[j]).unwrap());
        let ab = symbol_mul(&a, &b).unwrap();
        let (xi, eta) = (t.cos(), t.sin());
        let expect = (a.principal.eval)(x, y, xi, eta) * (b.principal.eval)(x, y, xi, eta);
        prop_assert!(((ab.principal.eval)(x, y, xi, eta) - expect).norm() <= 1e-12);
    }

    /// The Calderón projection and its complement are idempotents summing to the identity.
    #[test]
    fn calderon_projections_are_complementary(xi in -20i64..20, eta in -20i64..20) {
        prop_assume!(xi != 0 || eta != 0);
        let d = example3_problem().unwrap().model;
        let q = calderon_at(&d.at(xi as f64, eta as f64)).unwrap();
        let qc = complementary_calderon(&d, xi as f64, eta as f64).unwrap();
        let id = DMatrix::<Complex64>::identity(2, 2);
        prop_assert!(dense_diff(&(&q + &qc), &id) <= 1e-10);
        prop_assert!(dense_diff(&(&q * &q), &q) <= 1e-10);
    }

    /// Linear index and mode decomposition are inverse bijections.
    #[test]
    fn grid_index_roundtrip(nx in 0usize..6, ny in 0usize..6, rank in 1usize..3, seed in 0usize..1000) {
        let g = FrequencyGrid::new(nx, ny, rank);
        let idx = seed % g.dim();
        let (xi, eta, c) = g.mode_of(idx);
        prop_assert_eq!(g.index(xi, eta, c), idx);
        prop_assert!(g.contains(xi, eta));
    }

    /// Spatial sampling inverts band-limited coefficient synthesis.
    #[test]
    fn transforms_roundtrip(nx in 0usize..5, ny in 0usize..5, coeffs in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 121)) {
        let g = FrequencyGrid::new(nx, ny, 1);
        let c: Vec<Complex64> = coeffs.iter().take(g.dim()).map(|&(a, b)| Complex64::new(a, b)).collect();
        let back = forward_transform(&g, &inverse_transform(&g, &c).unwrap()).unwrap();
        let err = c.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12);
    }

    /// A pure power law is fitted exactly.
    #[test]
    fn decay_fit_recovers_power_law(p in -3.0..-0.1f64, c in 0.01..100.0f64) {
        let pts: Vec<(usize, f64)> = [4usize, 8, 16, 32].iter().map(|&k| (k, c * (k as f64).powf(p))).collect();
        let curve = DecayCurve::new(pts).unwrap();
        prop_assert!((curve.slope.unwrap() - p).abs() <= 1e-9);
        prop_assert!(curve.strictly_decreasing());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    /// The obstruction is additive under direct sums of twisted models.
    #[test]
    fn obstruction_is_additive(n1 in -1i64..=1, w1 in -1i64..=1, n2 in -1i64..=1, w2 in -1i64..=1) {
        let a: Arc<dyn FiberModel> = Arc::new(TwistedModel::new(n1, w1).unwrap());
        let b: Arc<dyn FiberModel> = Arc::new(TwistedModel::new(n2, w2).unwrap());
        let fam = obstruction_family(Arc::new(DirectSum(vec![a, b])), 3, Representative::Rescaled).unwrap();
        prop_assert_eq!(obstruction_invariant(&fam).unwrap().invariant, n1 * w1 + n2 * w2);
    }
}
