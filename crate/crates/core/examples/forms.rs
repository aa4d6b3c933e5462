//! Parses form systems, validates them and reports Cauchy-Schwarz complexity.

use mfcorr::forms::{gowers_system, parse_system};

fn main() -> mfcorr::Result<()> {
    for text in ["n; n+d; n+2d", "n; n+d; n+2d; n+3d", "1+n+2d; 3n+d", "n+d; 2n+2d"] {
        let sys = parse_system(text, None)?;
        let diag = sys.validate();
        println!("{:<24} l={} k={} height={} primitive={}", sys.render(), sys.l(), sys.k(), sys.height(), diag.primitive_system);
        if diag.primitive_system {
            println!("    Cauchy-Schwarz complexity: {:?}", sys.cs_complexity(4)?);
        } else {
            println!("    dependent pairs: {:?}", diag.dependent_pairs);
        }
    }
    let (g, conj) = gowers_system(2)?;
    println!("U^2 system: {}  conjugations {conj:?}", g.render());
    Ok(())
}
