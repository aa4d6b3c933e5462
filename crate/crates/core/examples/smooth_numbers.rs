//! Counts smooth numbers exactly and compares with de Bruijn's estimate.

use mfcorr::arith::{debruijn_log_estimate, smooth_count};

fn main() {
    for (x, y) in [(30u64, 5u64), (10_000, 10), (1_000_000, 50), (10_000_000, 100)] {
        let psi = smooth_count(x, y);
        let est = debruijn_log_estimate(x as f64, y as f64);
        let rel = ((psi as f64).ln() - est).abs() / est;
        println!("Psi({x}, {y}) = {psi:<8}  log = {:.4}  de Bruijn {est:.4}  relative {rel:.3}", (psi as f64).ln());
    }
}
