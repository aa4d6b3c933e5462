//! Local averages M_p by both algorithms, and the closed form for the single form n.

use mfcorr::forms::{ap_system, parse_system};
use mfcorr::local::{local_average, LocalParams};
use mfcorr::multfunc::MultFunc;

fn main() -> mfcorr::Result<()> {
    let params = LocalParams::default();
    let lam = MultFunc::liouville();
    let single = parse_system("n", None)?;
    for p in [2u64, 3, 5, 7, 11] {
        let d = local_average(std::slice::from_ref(&lam), &single, p, &params)?;
        let closed = (p as f64 - 1.0) / (p as f64 + 1.0);
        println!("M_{p}(lambda, n) = {:.12}  closed form {closed:.12}", d.tree.value.re);
    }
    let ap3 = ap_system(&[0, 1, 2])?;
    for p in [2u64, 3, 5] {
        let d = local_average(&vec![lam.clone(); 3], &ap3, p, &params)?;
        println!(
            "M_{p}(lambda, 3-AP): tree {:.12} ({} nodes)  refine {:.12} ({} nodes)  |A-B| = {:.1e}",
            d.tree.value.re,
            d.tree.nodes,
            d.refine.value.re,
            d.refine.nodes,
            d.discrepancy()
        );
    }
    Ok(())
}
