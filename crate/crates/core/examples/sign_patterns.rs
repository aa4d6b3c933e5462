//! Sign-pattern census for the extended real character mod 5, with its elliptic bias.

use mfcorr::multfunc::from_registry;
use mfcorr::local::LocalParams;
use mfcorr::signpatterns::{census, DFilter, SignPattern};

fn main() -> mfcorr::Result<()> {
    let f = from_registry("char-extended:5")?;
    let mut c = census(&f, 200_000, 200, 4, DFilter::All)?;
    c.predict(&f, 5, 1000, &LocalParams::default())?;
    let pred = c.prediction.as_ref().expect("predicted");
    println!("T22 = {:.6}  T42 = {:.6}  T44 = {:.6}", pred.t.t22, pred.t.t42, pred.t.t44);
    for pat in SignPattern::all(4) {
        println!(
            "{}  mean {:.5}  predicted {:.5}  A_eps {:+.4}",
            pat.label(),
            c.mean[pat.index],
            pred.density[pat.index],
            pred.a_eps[pat.index]
        );
    }
    Ok(())
}
