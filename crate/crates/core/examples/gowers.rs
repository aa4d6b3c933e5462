//! Gowers norms of a few functions on [1, x], and the U^2 counting identity.

use mfcorr::averages::{gowers_identity_check, gowers_norm_of, GowersMethod};
use mfcorr::multfunc::from_registry;

fn main() -> mfcorr::Result<()> {
    for name in ["one", "liouville", "char-extended:5", "mobius-squared"] {
        let f = from_registry(name)?;
        let u2 = gowers_norm_of(&f, 1000, 2, GowersMethod::Fft)?;
        let u3 = gowers_norm_of(&f, 200, 3, GowersMethod::Direct)?;
        let vals: Vec<_> = (1..=100).map(|n| f.eval(n)).collect();
        let id = gowers_identity_check(&vals)?;
        println!(
            "{name:<16} U^2(1000) = {:.4}  U^3(200) = {:.4}  identity residual at 100: {:.4}",
            u2.value, u3.value, id.residual
        );
    }
    Ok(())
}
