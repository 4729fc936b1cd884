//! Boundedness on Sobolev scales: `‖σ̂‖_{H^s→H^s}` along a grid ladder, and a fiber family of
//! too-small declared order that the bound check flags.

use fibered::builtins;
use fibered::quantize::{sobolev_bound_check, sobolev_norm_ladder};

fn main() -> anyhow::Result<()> {
    let ladder = [4, 8, 16];
    for name in ["aps", "family1", "winding_compact"] {
        let sym = builtins::builtin(name)?;
        for s in [-2.0, 0.0, 2.0] {
            let norms = sobolev_norm_ladder(&sym, s, &ladder)?;
            println!("{name:>16} s={s:+}: {norms:.4?}");
        }
    }
    // P₀ is smoothing in the fiber but not of order −1 on the boundary.
    let witness = builtins::rank_one().operator;
    let r = sobolev_bound_check(&witness, 0.0, -1, 2, &ladder)?;
    println!("P₀ declared order −1: bounded = {}, bound growth {:.2}", r.bounded, r.bound_growth);
    let r = sobolev_bound_check(&witness, 0.0, 0, 2, &ladder)?;
    println!("P₀ declared order 0: bounded = {}", r.bounded);
    Ok(())
}
