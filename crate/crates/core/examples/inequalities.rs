//! Turán-Kubilius, generalized von Neumann and the basic inequality on sample inputs.

use mfcorr::averages::{gvn_trials, tk_check};
use mfcorr::forms::{AffineForm, BoxSpec};
use mfcorr::multfunc::{MultFunc, C64};
use mfcorr::signpatterns::basic_inequality_check;

fn main() -> mfcorr::Result<()> {
    let form = AffineForm::new(0, vec![1, 1]);
    let bx = BoxSpec::cube(2, 500.0)?;
    for f in [MultFunc::liouville(), MultFunc::mobius_squared()] {
        let r = tk_check(&f, &form, &bx, 2.0)?;
        println!("{:<15} TK lhs {:.4} rhs {:.4} ratio {:.3}", f.name(), r.lhs, r.rhs, r.ratio);
    }
    for n in [31u64, 61, 101] {
        let g = gvn_trials(n, 50, 1)?;
        println!("Z/{n}: worst 3-AP average {:.4} against min U^2 norm {:.4}", g.average, g.min_norm);
    }
    // opposite values: the stated form fails, the aligned form holds
    let r = basic_inequality_check(&[C64::new(1.0, 0.0)], &[C64::new(-1.0, 0.0)], &[1.0], 1.0)?;
    println!("basic inequality: lhs {} rhs {} aligned rhs {}", r.lhs, r.rhs, r.aligned_rhs);
    Ok(())
}
