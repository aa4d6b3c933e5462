//! Exact point-count and character-sum identities behind the elliptic bias.

use mfcorr::signpatterns::{blank_sum, elltrans_check, jacobi_sum_check, triv23_check, LegendreCurve};

fn main() -> mfcorr::Result<()> {
    for p in [5u64, 7, 11, 13, 17, 19] {
        let curve = LegendreCurve::for_progressions(p)?;
        let b = blank_sum(p)?;
        let j = jacobi_sum_check(p)?;
        println!(
            "p = {p:<3} lambda = {:<3} #E = {:<3} Delta = {:+}  blank residual {}  jacobi residual {}",
            curve.lambda, curve.points, curve.delta, b.residual, j.residual
        );
    }
    for q in [5u64, 7, 11, 13, 35, 55] {
        let e = elltrans_check(q)?;
        let vanish = triv23_check(q)?.iter().all(|(_, v)| v.norm() == 0.0);
        println!("q = {q:<3} Xi = {:<5} formula = {:<5} 2/3-term factors vanish: {vanish}", e.xi, e.formula);
    }
    Ok(())
}
