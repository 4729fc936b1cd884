//! Fredholm criterion: stabilized kernel/cokernel ladders for elliptic symbols, and the
//! non-elliptic witness whose smallest singular value collapses.

use fibered::builtins;
use fibered::calkin::fredholm_check;

fn main() -> anyhow::Result<()> {
    for sym in builtins::elliptic_corpus() {
        let r = fredholm_check(&sym, &[8, 12, 16])?;
        let counts: Vec<String> = r.steps.iter().map(|s| format!("N={}:({},{})", s.n, s.dim_ker, s.dim_coker)).collect();
        println!("{:>16}: {:?}, index {:?}, {}", r.symbol, r.status, r.index, counts.join(" "));
    }
    let r = fredholm_check(&builtins::degenerate(), &[8, 16, 32])?;
    println!("{:>16}: {:?}, min σ decay {:.1}×", r.symbol, r.status, r.min_singular_decay);
    Ok(())
}
