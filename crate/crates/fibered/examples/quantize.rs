//! Quantize a symbol on a window, check that the horizontal convention is invisible, and
//! round-trip the operator through its JSON form.

use fibered::quantize::{convention_independence_test, quantize};
use fibered::{builtins, io, FrequencyGrid};

fn main() -> anyhow::Result<()> {
    let grid = FrequencyGrid::new(12, 12, 1);
    for name in ["smooth1", "family1", "winding_compact"] {
        let sym = builtins::builtin(name)?;
        let op = quantize(&sym, &grid)?;
        let delta = convention_independence_test(&sym, &grid)?;
        println!("{name:>16}: dim {}, nnz {}, ‖σ̂‖ = {:.4}, convention swap {delta:.1e}", grid.dim(), op.matrix.nnz(), op.norm()?);
    }
    let op = quantize(&builtins::family1(), &grid)?;
    let mut buf = Vec::new();
    io::write_operator(&op, &mut buf)?;
    let back = io::read_operator(buf.as_slice())?;
    println!("JSON round trip: {} bytes, max entry change {:.1e}", buf.len(), back.sub(&op)?.matrix.max_abs());
    Ok(())
}
