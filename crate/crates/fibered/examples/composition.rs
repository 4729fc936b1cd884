//! Composition modulo compacts: the residual `Â B̂ − (ab)^` decays on high-frequency shells
//! (it vanishes identically when the right factor is a Fourier multiplier).

use fibered::calkin::composition_residual;
use fibered::{builtins, FrequencyGrid};

fn main() -> anyhow::Result<()> {
    let grid = FrequencyGrid::new(32, 32, 1);
    let shells = [4, 8, 16];
    for (a, b) in [("aps", "smooth1"), ("smooth1", "family1"), ("unit_winding", "family1"), ("mixed", "smooth1")] {
        let curve = composition_residual(&builtins::builtin(a)?, &builtins::builtin(b)?, &grid, &shells)?;
        let pts: Vec<String> = curve.points.iter().map(|(k, v)| format!("K={k}: {v:.2e}")).collect();
        match curve.slope {
            Some(s) => println!("{a} ∘ {b}: {} (slope {s:.2})", pts.join(", ")),
            None => println!("{a} ∘ {b}: exact"),
        }
    }
    Ok(())
}
