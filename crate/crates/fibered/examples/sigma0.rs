//! Density of the generated subalgebra: a separated-variable approximation of the mixed
//! symbol by products of smooth symbols and fiber families.

use fibered::builtins;
use fibered::sigma0::{approximate_sigma0, Sigma0Params};

fn main() -> anyhow::Result<()> {
    let sym = builtins::mixed();
    for taylor_order in [1, 2, 4] {
        let params = Sigma0Params { taylor_order, ..Default::default() };
        let (sum, rep) = approximate_sigma0(&sym, 1e-3, &params)?;
        println!(
            "Taylor order {taylor_order}: {} terms, rank {}, principal error {:.2e}, operator error {:.2e}, reached {}",
            sum.len(),
            rep.svd_rank,
            rep.principal_error,
            rep.operator_error,
            rep.reached
        );
    }
    Ok(())
}
