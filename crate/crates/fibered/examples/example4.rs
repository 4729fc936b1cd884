//! The twisted-boundary model of the second worked example with zero twist: the stated
//! boundary row loses condition 2, while the half-weight variant is Fredholm.

use fibered::boundary::{bvp_ellipticity_check, bvp_index, example4_problem, Example4Variant};
use fibered::FrequencyGrid;

fn main() -> anyhow::Result<()> {
    for variant in [Example4Variant::AsStated, Example4Variant::HalfWeight] {
        let bvp = example4_problem(0, variant)?;
        let ell = bvp_ellipticity_check(&bvp, &FrequencyGrid::new(8, 8, bvp.model.rank))?;
        let idx = bvp_index(&bvp, &[4, 6, 8], false)?;
        let ker: Vec<usize> = idx.steps.iter().map(|s| s.dim_ker).collect();
        println!(
            "{variant:?}: margins {:.3}/{:.3}, dim ker along ladder {ker:?}, index {:?}",
            ell.principal_margin, ell.operator_margin, idx.index
        );
    }
    Ok(())
}
