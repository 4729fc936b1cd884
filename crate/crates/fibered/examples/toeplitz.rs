//! Operators in subspaces: over a one-point base the fiber shift between APS ranges is a
//! Toeplitz operator of index −1. Over the circle the same operator symbol is a Toeplitz
//! family at `ξ = ±1`, which is not invertible, so the check reports it as not Fredholm.

use fibered::builtins;
use fibered::calkin::{subspace_fredholm_check, LadderShape, ProjectionSymbol};

fn main() -> anyhow::Result<()> {
    let p = ProjectionSymbol::new(builtins::aps())?;
    for shape in [LadderShape::FiberOnly, LadderShape::Square] {
        let r = subspace_fredholm_check(&builtins::fiber_shift(), &p, &p, &[6, 8, 10], shape)?;
        println!(
            "{shape:?}: margins {:.3}/{:.3}, {:?}, index {:?}",
            r.conditions.principal_margin, r.conditions.operator_margin, r.status, r.index
        );
    }
    Ok(())
}
