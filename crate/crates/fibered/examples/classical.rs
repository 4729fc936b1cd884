//! Degenerations of the fibration: with one-point fibers the boundary problem is a classical
//! one (Lopatinskii check only); with a one-point base the shift is a Toeplitz operator.

use fibered::boundary::{bvp_ellipticity_check, bvp_index, example3_problem};
use fibered::builtins;
use fibered::calkin::{subspace_fredholm_check, LadderShape, ProjectionSymbol};
use fibered::FrequencyGrid;

fn main() -> anyhow::Result<()> {
    let bvp = example3_problem()?;
    let ell = bvp_ellipticity_check(&bvp, &FrequencyGrid::new(12, 0, bvp.model.rank))?;
    let idx = bvp_index(&bvp, &[8, 12, 16], true)?;
    println!("N_y = 0: classical {}, margin {:.4}, index {:?}", ell.classical, ell.principal_margin, idx.index);
    let p = ProjectionSymbol::new(builtins::aps())?;
    let r = subspace_fredholm_check(&builtins::fiber_shift(), &p, &p, &[8, 12, 16], LadderShape::FiberOnly)?;
    println!("N_x = 0: Toeplitz index {:?}", r.index);
    Ok(())
}
