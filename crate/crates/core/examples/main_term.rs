//! Empirical 3-AP averages against the assembled main term.

use mfcorr::averages::{brute_average, compare};
use mfcorr::forms::{ap_system, BoxSpec};
use mfcorr::local::{main_term, MainTermParams};
use mfcorr::multfunc::{DirichletChar, MultFunc};

fn main() -> mfcorr::Result<()> {
    let sys = ap_system(&[0, 1, 2])?;
    let bx = BoxSpec::cube(2, 2000.0)?;
    let chi5 = DirichletChar::real_primitive(5)?;
    let cases = [
        (MultFunc::one(), DirichletChar::trivial(1)?),
        (MultFunc::char_extended(&chi5), chi5.clone()),
        (MultFunc::from_char(&chi5), chi5),
    ];
    for (f, chi) in cases {
        let fs = vec![f.clone(); 3];
        let emp = brute_average(&fs, &sys, &bx)?;
        let pred = main_term(&fs, &vec![chi; 3], &[0.0; 3], &sys, &bx, &MainTermParams::default())?;
        let c = compare(&emp, &pred, 10.0)?;
        println!(
            "{:<18} empirical {:>10.6}  predicted {:>10.6}  |diff| {:.2e}  budget {:.2e}  {:?}",
            f.name(),
            c.empirical.re,
            c.predicted.re,
            c.difference,
            c.budget,
            c.verdict
        );
    }
    Ok(())
}
