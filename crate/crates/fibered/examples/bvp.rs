//! Boundary problem on the half-cylinder: ellipticity margins, index ladder and a solve with
//! seeded random data for the 2×2 model with the APS-type boundary projection.

use fibered::boundary::{bvp_ellipticity_check, bvp_index, bvp_solve, example3_problem, random_data};
use fibered::FrequencyGrid;

fn main() -> anyhow::Result<()> {
    let bvp = example3_problem()?;
    let grid = FrequencyGrid::new(8, 8, bvp.model.rank);
    let ell = bvp_ellipticity_check(&bvp, &grid)?;
    println!("margins: principal {:.3}, operator {:.3}; zero modes {:?}", ell.principal_margin, ell.operator_margin, ell.zero_modes);
    let idx = bvp_index(&bvp, &[4, 6, 8], false)?;
    for s in &idx.steps {
        println!("  N={}: ker {} coker {} index {} (strictly decaying count {})", s.nx, s.dim_ker, s.dim_coker, s.index, s.index_strict_decay);
    }
    println!("index {:?}, stabilized {}", idx.index, idx.stabilized);
    let (f, g) = random_data(&bvp, &grid, 7);
    let sol = bvp_solve(&bvp, &grid, &f, &g)?;
    println!("residuals: equation {:.1e}, boundary {:.1e}", sol.residuals.equation, sol.residuals.boundary);
    let u: Vec<String> = sol.value(1, 2, 1.0).iter().map(|z| format!("{z:.4}")).collect();
    println!("u(t=1) on mode (1, 2): [{}]", u.join(", "));
    Ok(())
}
