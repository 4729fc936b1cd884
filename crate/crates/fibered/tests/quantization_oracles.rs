//! Quantization against operators assembled entry by entry from closed-form Fourier
//! coefficients, at the full `(16, 16)` window.

use fibered::builtins;
use fibered::quantize::{convention_independence_test, quantize};
use fibered::FrequencyGrid;

mod common;
use common::*;

#[test]
fn fiber_family_is_the_family_of_fiber_operators() {
    let g = FrequencyGrid::new(16, 16, 1);
    let q = quantize(&builtins::family1(), &g).unwrap().to_dense();
    let d = max_diff(&q, &family1_oracle(&g));
    assert!(d <= 1e-12, "{d}");
}

#[test]
fn smooth_symbol_is_its_kohn_nirenberg_quantization() {
    let g = FrequencyGrid::new(16, 16, 1);
    let q = quantize(&builtins::smooth1(), &g).unwrap().to_dense();
    let d = max_diff(&q, &smooth1_oracle(&g));
    assert!(d <= 1e-12, "{d}");
}

#[test]
fn fiber_shift_translates_fiber_modes() {
    let g = FrequencyGrid::new(16, 16, 1);
    let oracle = assemble(&g, |(tx, ty), (sx, sy)| c(if tx == sx && ty == sy + 1 { 1.0 } else { 0.0 }));
    let q = quantize(&builtins::fiber_shift(), &g).unwrap().to_dense();
    assert!(max_diff(&q, &oracle) <= 1e-12);
}

#[test]
fn winding_twists_the_zero_mode_half_line() {
    // Column (ξ, 0) with ξ ≥ 0 goes to (ξ + n, 0); everything else is the identity.
    let n = 2;
    let g = FrequencyGrid::new(8, 4, 1);
    let oracle = assemble(&g, |(tx, ty), (sx, sy)| {
        let hit = if sy == 0 && sx >= 0 { tx == sx + n && ty == 0 } else { tx == sx && ty == sy };
        c(if hit { 1.0 } else { 0.0 })
    });
    let q = quantize(&builtins::winding(n), &g).unwrap().to_dense();
    assert!(max_diff(&q, &oracle) <= 1e-12);
}

#[test]
fn horizontal_convention_is_invisible_for_the_corpus() {
    let g = FrequencyGrid::new(16, 16, 1);
    for s in builtins::corpus() {
        let d = convention_independence_test(&s, &g).unwrap();
        assert!(d <= 1e-10, "{}: {d}", s.name);
    }
}
