//! Index of the elliptic corpus from dense kernel counting on exact compressions.
//!
//! The oracle never looks at square truncations: `σ̂` is assembled on a window enlarged by the
//! symbol's bandwidth, so its columns over the small window are the exact images of those
//! modes. The kernel of that rectangular block is the genuine kernel, and the kernel of the
//! same block of `σ̂*` is the genuine cokernel; no window-edge artifacts can appear.

use fibered::builtins;
use fibered::calkin::{fredholm_check, fredholm_check_shaped, subspace_fredholm_check, FredholmStatus, LadderShape, ProjectionSymbol};
use fibered::quantize::quantize;
use fibered::CompatibleSymbol;
use nalgebra::DMatrix;

mod common;
use common::ORACLE_INDEX;

const SIGMA_TOL: f64 = 1e-6;

fn null_dim(m: &DMatrix<fibered::Complex64>) -> usize {
    let s = m.clone().svd(false, false).singular_values;
    m.ncols() - s.iter().filter(|&&v| v > SIGMA_TOL).count()
}

/// `(dim ker, dim coker)` of `σ̂` from the window `(n, n)`.
fn oracle_counts(sym: &CompatibleSymbol, n: usize, shape: LadderShape) -> (usize, usize) {
    let band = sym.band();
    let small = shape.grid(n, sym.rank);
    let (mx, my) = (band.x.unwrap_or(4), band.y.unwrap_or(4));
    let (mx, my) = match shape {
        LadderShape::Square => (mx, my),
        LadderShape::BaseOnly => (mx, 0),
        LadderShape::FiberOnly => (0, my),
    };
    let big = small.enlarged(mx, my);
    let full = quantize(sym, &big).unwrap().to_dense();
    let cols: Vec<usize> = small
        .modes()
        .flat_map(|(xi, eta)| (0..sym.rank).map(move |c| (xi, eta, c)))
        .map(|(xi, eta, c)| big.index(xi, eta, c))
        .collect();
    let ker = null_dim(&full.select_columns(&cols));
    let coker = null_dim(&full.adjoint().select_columns(&cols));
    (ker, coker)
}

/// Oracle index, computed on the three windows concurrently.
fn oracle_index(sym: &CompatibleSymbol) -> i64 {
    let idx: Vec<i64> = std::thread::scope(|sc| {
        let jobs: Vec<_> = [8, 12, 16]
            .iter()
            .map(|&n| {
                sc.spawn(move || {
                    let (k, c) = oracle_counts(sym, n, LadderShape::Square);
                    k as i64 - c as i64
                })
            })
            .collect();
        jobs.into_iter().map(|j| j.join().unwrap()).collect()
    });
    assert!(idx.windows(2).all(|w| w[0] == w[1]), "{}: oracle not stable {idx:?}", sym.name);
    idx[0]
}

#[test]
fn oracle_reproduces_registered_indices() {
    for (name, expected) in ORACLE_INDEX {
        let sym = builtins::builtin(name).unwrap();
        assert_eq!(oracle_index(&sym), expected, "{name}");
    }
}

#[test]
fn fredholm_check_agrees_with_oracle_on_small_ladder() {
    for (name, expected) in ORACLE_INDEX {
        let r = fredholm_check(&builtins::builtin(name).unwrap(), &[8, 12, 16]).unwrap();
        assert_eq!(r.status, FredholmStatus::Fredholm, "{name}");
        assert_eq!(r.index, Some(expected), "{name}");
    }
}

#[test]
fn winding_n_has_index_minus_n() {
    for n in [-2, -1, 2] {
        let sym = builtins::winding(n);
        assert_eq!(oracle_index(&sym), -n);
        assert_eq!(fredholm_check(&sym, &[8, 12, 16]).unwrap().index, Some(-n));
    }
}

#[test]
fn fiber_only_shift_is_toeplitz_of_index_minus_one() {
    // Over a point the shift Π₊ e^{iy} Π₊ + Π₋ compresses to a unilateral shift.
    let sym = fibered::symbols::symbol_add(
        &fibered::symbols::symbol_mul(&builtins::aps(), &fibered::symbols::symbol_mul(&builtins::fiber_shift(), &builtins::aps()).unwrap()).unwrap(),
        &fibered::symbols::symbol_add(&CompatibleSymbol::identity(1), &fibered::symbols::symbol_scale(&builtins::aps(), fibered::Complex64::new(-1.0, 0.0))).unwrap(),
    )
    .unwrap();
    let (k, c) = oracle_counts(&sym, 12, LadderShape::FiberOnly);
    assert_eq!((k, c), (0, 1));
    // As an operator on the whole fiber it is not elliptic (Π₋ part is fine, but the Π₊ part has
    // a cokernel and compresses to a Toeplitz operator); its index lives in the subspace Im Π₊.
    let r = fredholm_check_shaped(&sym, &[8, 12, 16], LadderShape::FiberOnly).unwrap();
    assert_eq!(r.steps.iter().map(|s| (s.dim_ker, s.dim_coker)).collect::<Vec<_>>(), vec![(0, 1); 3]);
    let p = ProjectionSymbol::new(builtins::aps()).unwrap();
    let r = subspace_fredholm_check(&builtins::fiber_shift(), &p, &p, &[8, 12, 16], LadderShape::FiberOnly).unwrap();
    assert_eq!(r.index, Some(-1));
}
