//! Pretentious distances: a function against characters and twists.

use mfcorr::multfunc::{distance_sq, from_registry, min_distance, DirichletChar, MultFunc};

fn main() -> mfcorr::Result<()> {
    let chi5 = MultFunc::from_char(&DirichletChar::real_primitive(5)?);
    for name in ["one", "liouville", "char-extended:5"] {
        let f = from_registry(name)?;
        let to_chi = distance_sq(&f, &chi5, 2, 100_000)?;
        let best = min_distance(&f, 1000, 5, None)?;
        println!(
            "{name:<16} D(f, chi_5; 1e5)^2 = {to_chi:.4}   grid minimum {:.4} at {} t = {}",
            best.value,
            best.chi.label(),
            best.t
        );
    }
    Ok(())
}
