//! Obstruction invariants against an independent brute-force winding oracle.

use fibered::boundary::{example3_problem, example4_problem, Example4Variant};
use fibered::builtins;
use fibered::calkin::ProjectionSymbol;
use fibered::obstruction::*;
use std::f64::consts::PI;
use std::sync::Arc;

mod common;
use common::*;

#[test]
fn twisted_model_matches_oracle_and_product_formula() {
    for n in -1..=1 {
        for w in -1..=1 {
            let oracle = oracle_winding(n, w, 3);
            // Product formula: −ind(D_Y)·w with ind(D_Y) = −n.
            assert_eq!(oracle, -oracle_fiber_index(n, 3) * w, "oracle (n={n}, w={w})");
            assert_eq!(oracle, n * w);
            for rep in [Representative::Rescaled, Representative::Difference] {
                let rep = obstruction_invariant(&example4_family(n, w, 6, rep).unwrap()).unwrap();
                assert!(rep.stable);
                assert_eq!(rep.invariant, oracle, "(n={n}, w={w}, {:?})", rep.representative);
                assert_eq!(rep.winding_ccw, -rep.invariant);
                assert!(rep.loops.iter().all(|l| l.samples >= LOOP_SAMPLES));
            }
        }
    }
}

#[test]
fn example3_invariant_vanishes() {
    for rep in [Representative::Rescaled, Representative::Difference] {
        let r = obstruction_invariant(&example3_family(8, rep).unwrap()).unwrap();
        assert!(r.stable && r.vanishes);
        assert_eq!(r.base_loop_winding, 0);
    }
    let fam = example3_family(8, Representative::Rescaled).unwrap();
    // Interior point ξ = τ = 0.
    let m = fam.matrix(0.0, 0.0, 0.0).unwrap();
    assert!(m.singular_values().min() > 0.5);
}

#[test]
fn fredholm_problems_have_vanishing_obstruction() {
    let half = example4_problem(0, Example4Variant::HalfWeight).unwrap();
    for model in [example3_problem().unwrap().model, half.model] {
        let fam = obstruction_family(Arc::new(model), 6, Representative::Rescaled).unwrap();
        assert_eq!(obstruction_invariant(&fam).unwrap().invariant, 0);
    }
}

#[test]
fn winding_is_additive_under_direct_sums() {
    let a: Arc<dyn FiberModel> = Arc::new(TwistedModel::new(1, 1).unwrap());
    let b: Arc<dyn FiberModel> = Arc::new(TwistedModel::new(-1, 1).unwrap());
    let c: Arc<dyn FiberModel> = Arc::new(TwistedModel::new(1, -1).unwrap());
    let sum = obstruction_family(Arc::new(DirectSum(vec![a.clone(), c.clone()])), 4, Representative::Rescaled).unwrap();
    assert_eq!(obstruction_invariant(&sum).unwrap().invariant, 1 + (-1));
    let sum = obstruction_family(Arc::new(DirectSum(vec![a.clone(), a, b])), 4, Representative::Rescaled).unwrap();
    assert_eq!(obstruction_invariant(&sum).unwrap().invariant, 1 + 1 - 1);
}

fn example3_data() -> (ProjectionSymbol, ProjectionSymbol, fibered::CompatibleSymbol) {
    let q = ProjectionSymbol::new(builtins::hirzebruch_calderon()).unwrap();
    let p = ProjectionSymbol::new(builtins::hirzebruch_boundary()).unwrap();
    (q, p, builtins::hirzebruch_boundary())
}

#[test]
fn homotopy_endpoints_are_exact() {
    let (q, p, b) = example3_data();
    let h0 = build_symbol_homotopy(&q, &p, &b, 0.0).unwrap();
    let h1 = build_symbol_homotopy(&q, &p, &b, PI / 2.0).unwrap();
    for &(xi, eta) in &[(0.3, 0.8), (-1.0, 0.25), (0.6, -0.6)] {
        assert_eq!((h0.principal.eval)(0.0, 0.0, xi, eta), (q.symbol.principal.eval)(0.0, 0.0, xi, eta));
        assert_eq!((h1.principal.eval)(0.0, 0.0, xi, eta), (p.symbol.principal.eval)(0.0, 0.0, xi, eta));
    }
    for eta in [-3.0, 0.0, 2.0] {
        for xs in [-1.0, 1.0] {
            assert_eq!((h0.operator.full)(0.0, xs, 0.0, eta), (q.symbol.operator.full)(0.0, xs, 0.0, eta));
            assert_eq!((h1.operator.full)(0.0, xs, 0.0, eta), (p.symbol.operator.full)(0.0, xs, 0.0, eta));
        }
    }
    let mid = build_symbol_homotopy(&q, &p, &b, PI / 4.0).unwrap();
    assert!(mid.check_compatibility(1e-8).max_deviation <= 1e-8);
}

#[test]
fn homotopy_start_recovers_calderon_family() {
    let (q, p, b) = example3_data();
    let direct = example3_family(4, Representative::Rescaled).unwrap();
    let model: Arc<dyn FiberModel> = Arc::new(SymbolModel::new(build_symbol_homotopy(&q, &p, &b, 0.0).unwrap()).unwrap());
    let via = obstruction_family(model, 4, Representative::Rescaled).unwrap();
    for s in direct.ball_samples() {
        let d = direct.matrix(s.x, s.xi, s.tau).unwrap() - via.matrix(s.x, s.xi, s.tau).unwrap();
        assert!(d.norm() <= 1e-10, "at {s:?}");
    }
}

#[test]
fn example3_homotopy_keeps_invariant() {
    let (q, p, b) = example3_data();
    let rep = homotopy_family(&q, &p, &b, 6, &phi_samples(9)).unwrap();
    assert_eq!(rep.steps.len(), 9);
    assert!(rep.constant && rep.collapse.is_none());
    assert!(rep.steps.iter().all(|s| s.invariant == 0));
    assert!(rep.invertible_at_end);
}
