//! Boundary problems against closed-form per-mode oracles.
//!
//! The oracles use explicit eigenvectors of the 2×2 tangential blocks and count ranks of the
//! scalar restricted maps by hand; they share no code with the solver beyond the grid shape.

use fibered::boundary::*;
use fibered::FrequencyGrid;
use num_complex::Complex64;

mod common;
use common::*;

#[test]
fn example3_oracle_is_stable() {
    for n in [6, 8, 10] {
        let (k, c) = ex3_oracle(n);
        assert_eq!(k - c, EXAMPLE3_INDEX, "oracle at N = {n}");
    }
}

#[test]
fn example3_index_matches_oracle() {
    let bvp = example3_problem().unwrap();
    let rep = bvp_index(&bvp, &[6, 8, 10], false).unwrap();
    assert!(rep.stabilized);
    assert_eq!(rep.index, Some(EXAMPLE3_INDEX));
    for s in &rep.steps {
        let (k, c) = ex3_oracle(s.nx as i64);
        assert_eq!(((s.dim_ker + s.zero_mode_ker) as i64, (s.dim_coker + s.zero_mode_coker) as i64), (k, c));
        // Without the zero-mode bookkeeping the constant mode would be lost entirely.
        assert_eq!(s.index_strict_decay, -1);
    }
}

#[test]
fn example3_calderon_matches_displayed_matrix() {
    let d = example3_problem().unwrap().model;
    let grid = FrequencyGrid::new(5, 5, 2);
    let cd = calderon_projection(&d, &grid).unwrap();
    assert_eq!(cd.zero_modes, vec![(0, 0)]);
    for m in cd.modes.iter().filter(|m| !m.zero_mode) {
        let (xi, eta) = (m.xi as f64, m.eta as f64);
        let r = (xi * xi + eta * eta).sqrt();
        let (sy, sx) = (eta / r, xi / r);
        let expect = [[(1.0 + sy) / 2.0, sx / 2.0], [sx / 2.0, (1.0 - sy) / 2.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.q[(i, j)] - Complex64::new(expect[i][j], 0.0)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn example3_margins_and_solution() {
    let bvp = example3_problem().unwrap();
    let grid = FrequencyGrid::new(16, 16, 2);
    let rep = bvp_ellipticity_check(&bvp, &grid).unwrap();
    assert!(rep.fredholm);
    // Closed form: on η = 0 the restricted map picks one entry of (1, ±1)/√2.
    assert!((rep.operator_margin - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(rep.principal_margin > 0.7);
    let (f, g) = random_data(&bvp, &grid, 11);
    let sol = bvp_solve(&bvp, &grid, &f, &g).unwrap();
    assert!(sol.residuals.equation <= 1e-8 && sol.residuals.boundary <= 1e-8, "{:?}", sol.residuals);
    assert_eq!(sol.residuals.kernel, vec![(0, 0, 1)]);
}

#[test]
fn zero_data_gives_zero_solution() {
    let bvp = example3_problem().unwrap();
    let grid = FrequencyGrid::new(4, 4, 2);
    let f = InteriorData { terms: vec![(1.3, vec![Complex64::new(0.0, 0.0); grid.dim()])] };
    let sol = bvp_solve(&bvp, &grid, &f, &vec![Complex64::new(0.0, 0.0); grid.dim()]).unwrap();
    for m in &sol.modes {
        assert!(m.w.norm() == 0.0);
    }
}

#[test]
fn scalar_trace_solution_is_explicit_exponential() {
    let bvp = scalar_trace_problem().unwrap();
    let grid = FrequencyGrid::new(6, 6, 1);
    let f = InteriorData { terms: vec![] };
    let g: Vec<Complex64> = (0..grid.dim()).map(|i| Complex64::new(1.0 + i as f64, -0.5)).collect();
    let sol = bvp_solve(&bvp, &grid, &f, &g).unwrap();
    for (xi, eta) in [(1, 0), (-3, 4), (6, -6)] {
        let lam = ((xi * xi + eta * eta) as f64).sqrt();
        for t in t_grid() {
            let u = sol.value(xi, eta, t)[0];
            let expect = g[grid.index(xi, eta, 0)] * (-lam * t).exp();
            assert!((u - expect).norm() <= 1e-10 * expect.norm().max(1e-300));
        }
    }
    assert!(bvp_index(&bvp, &[4, 6, 8], false).unwrap().index == Some(0));
}

#[test]
fn zero_boundary_operator_is_not_fredholm() {
    let mut bvp = example3_problem().unwrap();
    bvp.b = fibered::CompatibleSymbol::zero(2);
    let rep = bvp_ellipticity_check(&bvp, &FrequencyGrid::new(6, 6, 2)).unwrap();
    assert_eq!((rep.principal_margin, rep.operator_margin), (0.0, 0.0));
    assert!(!rep.fredholm);
}

#[test]
fn dirichlet_type_condition_fails_on_rank_count() {
    let mut bvp = example3_problem().unwrap();
    bvp.b = fibered::CompatibleSymbol::identity(2);
    bvp.p = fibered::calkin::ProjectionSymbol::new(fibered::CompatibleSymbol::identity(2)).unwrap();
    let rep = bvp_ellipticity_check(&bvp, &FrequencyGrid::new(6, 6, 2)).unwrap();
    assert_eq!(rep.principal_margin, 0.0);
    assert!(!rep.fredholm);
}

/// The `example4` problem as stated: on `(ξ < 0, η = 0)` the bounded solutions live in the second
/// component and the boundary row `[1, −iη/(η²+1)]` kills them, once per base mode.
#[test]
fn example4_per_mode_oracle() {
    let bvp = example4_problem(0, Example4Variant::AsStated).unwrap();
    for n in [6usize, 8, 10] {
        let st = bvp_index_on(&bvp, &FrequencyGrid::new(n, n, 2)).unwrap();
        // Closed form: the restricted map on mode (ξ, η) is ξ + |ζ| + η²/(η²+1), zero iff ξ < 0, η = 0.
        assert_eq!((st.dim_ker, st.dim_coker), (n, n));
    }
    let rep = bvp_ellipticity_check(&bvp, &FrequencyGrid::new(16, 16, 2)).unwrap();
    assert_eq!(rep.operator_margin, 0.0);
    assert!(!rep.fredholm);
    let idx = bvp_index(&bvp, &[6, 8, 10], false).unwrap();
    assert!(!idx.stabilized);
    assert!(example4_problem(1, Example4Variant::AsStated).is_err());
}

/// With an order-zero weight and an invertible fiber operator both conditions hold.
#[test]
fn example4_half_weight_variant_is_fredholm() {
    let bvp = example4_problem(0, Example4Variant::HalfWeight).unwrap();
    let rep = bvp_ellipticity_check(&bvp, &FrequencyGrid::new(16, 16, 2)).unwrap();
    assert!(rep.fredholm && rep.zero_modes.is_empty());
    assert_eq!(bvp_index(&bvp, &[6, 8, 10], false).unwrap().index, Some(0));
}

/// Fiber a point: only condition 1 on the horizontal covectors (the Lopatinskii check).
#[test]
fn classical_degeneration() {
    let bvp = example3_problem().unwrap();
    let rep = bvp_ellipticity_check(&bvp, &FrequencyGrid::new(12, 0, 2)).unwrap();
    assert!(rep.classical && rep.operator_margin.is_infinite());
    // Lopatinskii determinant: L₊(±1) = (1, ±1)/√2, boundary condition keeps the first entry.
    assert!((rep.principal_margin - 0.5f64.sqrt()).abs() < 1e-12);
    assert!(rep.fredholm);
    let mut dirichlet = bvp.clone();
    dirichlet.b = fibered::CompatibleSymbol::identity(2);
    dirichlet.p = fibered::calkin::ProjectionSymbol::new(fibered::CompatibleSymbol::identity(2)).unwrap();
    assert!(!bvp_ellipticity_check(&dirichlet, &FrequencyGrid::new(12, 0, 2)).unwrap().fredholm);
}

#[test]
fn t_grid_spans_five_units() {
    let t = t_grid();
    assert_eq!(t.len(), 33);
    assert_eq!(*t.last().unwrap(), 5.0);
    assert!((t[0] - 5.0 / 2f64.powi(32)).abs() < 1e-24);
}
