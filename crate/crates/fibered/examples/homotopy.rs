//! Homotopy from the Calderón projection to the boundary projection: the obstruction stays
//! constant and the family is invertible on the whole ball at the far end.

use fibered::builtins;
use fibered::calkin::ProjectionSymbol;
use fibered::obstruction::{homotopy_family, phi_samples};

fn main() -> anyhow::Result<()> {
    let q = ProjectionSymbol::new(builtins::hirzebruch_calderon())?;
    let p = ProjectionSymbol::new(builtins::hirzebruch_boundary())?;
    let rep = homotopy_family(&q, &p, &builtins::hirzebruch_boundary(), 6, &phi_samples(5))?;
    for s in &rep.steps {
        println!("φ = {:.3}: invariant {}, sphere margin {:.3}, ball margin {:.3}", s.phi, s.invariant, s.sphere_margin, s.ball_margin);
    }
    println!("constant {}, invertible at φ = π/2: {}", rep.constant, rep.invertible_at_end);
    Ok(())
}
