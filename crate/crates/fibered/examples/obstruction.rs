//! Boundary obstruction: determinant winding of the rescaled Calderón family on the sphere
//! loop, for the twisted models (`n·w`) and for the first worked example (0).

use fibered::obstruction::{example3_family, example4_family, obstruction_invariant, Representative};

fn main() -> anyhow::Result<()> {
    let r = obstruction_invariant(&example3_family(6, Representative::Rescaled)?)?;
    println!("example 3: invariant {}, sphere margin {:.3}, stable {}", r.invariant, r.sphere_margin, r.stable);
    for n in -1..=1 {
        let row: Vec<String> = (-1..=1)
            .map(|w| {
                obstruction_invariant(&example4_family(n, w, 6, Representative::Difference)?)
                    .map(|r| format!("w={w:+}: {:+}", r.invariant))
            })
            .collect::<Result<_, _>>()?;
        println!("n={n:+}: {}", row.join("  "));
    }
    Ok(())
}
