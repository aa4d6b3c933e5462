use super::{DirichletChar, MultFunc, C64};
use crate::arith::primes_up_to;
use crate::error::{Error, Result};

fn check_range(y: u64, x: u64) -> Result<()> {
    if y < 1 || y > x {
        return Err(Error::InvalidArgument(format!("distance needs 1 <= y <= x, got y={y}, x={x}")));
    }
    Ok(())
}

/// Squared distance summed over primes in `(y, x]`.
pub fn distance_sq(f: &MultFunc, g: &MultFunc, y: u64, x: u64) -> Result<f64> {
    check_range(y, x)?;
    Ok(primes_up_to(x)
        .into_iter()
        .filter(|&p| p > y)
        .map(|p| (1.0 - (f.pp(p, 1) * g.pp(p, 1).conj()).re) / p as f64)
        .sum())
}

pub fn distance(f: &MultFunc, g: &MultFunc, y: u64, x: u64) -> Result<f64> {
    Ok(distance_sq(f, g, y, x)?.max(0.0).sqrt())
}

/// Same as [`distance`] but over all prime powers in `(y, x]`.
pub fn distance_star(f: &MultFunc, g: &MultFunc, y: u64, x: u64) -> Result<f64> {
    check_range(y, x)?;
    let mut s = 0.0;
    for p in primes_up_to(x) {
        let mut pk = p;
        let mut k = 1;
        loop {
            if pk > y {
                s += (1.0 - (f.pp(p, k) * g.pp(p, k).conj()).re) / pk as f64;
            }
            match pk.checked_mul(p) {
                Some(n) if n <= x => {
                    pk = n;
                    k += 1;
                }
                _ => break,
            }
        }
    }
    Ok(s.max(0.0).sqrt())
}

/// Mean and variance proxies of the additive function `h(p^k) = f(p^k) - 1`.
pub fn additive_moments(f: &MultFunc, x: u64) -> Result<(C64, f64)> {
    if x < 2 {
        return Err(Error::InvalidArgument(format!("additive moments need x >= 2, got {x}")));
    }
    let mut mu = C64::new(0.0, 0.0);
    let mut sigma2 = 0.0;
    for p in primes_up_to(x) {
        let w = 1.0 - 1.0 / p as f64;
        let mut pk = p;
        let mut k = 1;
        loop {
            let h = f.pp(p, k) - 1.0;
            mu += h * (w / pk as f64);
            sigma2 += h.norm_sqr() * w / pk as f64;
            match pk.checked_mul(p) {
                Some(n) if n <= x => {
                    pk = n;
                    k += 1;
                }
                _ => break,
            }
        }
    }
    Ok((mu, sigma2))
}

#[derive(Clone, Debug)]
pub struct MinDistance {
    /// squared distance at the minimizing pair
    pub value: f64,
    pub chi: DirichletChar,
    pub t: f64,
    pub grid_points: u64,
}

/// Grid minimum of `D(g, chi n^{it}; X)^2` over characters of modulus at most `q_max`
/// and `t = k * step` with `|t| <= X`.
pub fn min_distance(g: &MultFunc, x: u64, q_max: u64, step: Option<f64>) -> Result<MinDistance> {
    if x < 2 || q_max < 1 {
        return Err(Error::InvalidArgument(format!("min_distance needs X >= 2 and Q >= 1, got X={x}, Q={q_max}")));
    }
    let xf = x as f64;
    let step = step.unwrap_or(0.05 / xf.ln());
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("t grid step must be positive, got {step}")));
    }
    let primes = primes_up_to(x);
    let logs: Vec<f64> = primes.iter().map(|&p| (p as f64).ln()).collect();
    let base: f64 = primes.iter().map(|&p| 1.0 / p as f64).sum();
    let gp: Vec<C64> = primes.iter().map(|&p| g.pp(p, 1)).collect();
    let kmax = (xf / step).floor() as i64;
    let rot: Vec<C64> = logs.iter().map(|l| C64::from_polar(1.0, -step * l)).collect();

    let mut best: Option<MinDistance> = None;
    let mut points = 0u64;
    for q in 1..=q_max {
        for chi in DirichletChar::group_iter(q)? {
            let a: Vec<C64> = primes
                .iter()
                .zip(&gp)
                .map(|(&p, &gv)| gv * chi.eval(p as i64).conj() / p as f64)
                .collect();
            let exact = |t: f64, z: &mut Vec<C64>| {
                for ((zi, ai), l) in z.iter_mut().zip(&a).zip(&logs) {
                    *zi = ai * C64::from_polar(1.0, -t * l);
                }
            };
            let mut z = vec![C64::new(0.0, 0.0); a.len()];
            let (mut arg_t, mut arg_v) = (0.0f64, f64::INFINITY);
            for k in -kmax..=kmax {
                let t = k as f64 * step;
                if (k + kmax) % 256 == 0 {
                    exact(t, &mut z);
                } else {
                    for (zi, r) in z.iter_mut().zip(&rot) {
                        *zi *= r;
                    }
                }
                let v = base - z.iter().map(|c| c.re).sum::<f64>();
                // ties go to the smaller |t|
                if v < arg_v - 1e-15 || ((v - arg_v).abs() <= 1e-15 && t.abs() < arg_t.abs()) {
                    arg_v = v;
                    arg_t = t;
                }
                points += 1;
            }
            if best.as_ref().is_none_or(|b| arg_v < b.value - 1e-15) {
                best = Some(MinDistance { value: arg_v, chi, t: arg_t, grid_points: 0 });
            }
        }
    }
    let mut best = best.expect("at least the trivial character");
    best.value = best.value.max(0.0);
    best.grid_points = points;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn four_term_sum() {
        let d = distance_sq(&MultFunc::liouville(), &MultFunc::one(), 1, 10).unwrap();
        let oracle = 2.0 * (1.0 / 2.0 + 1.0 / 3.0 + 1.0 / 5.0 + 1.0 / 7.0);
        assert!((d - oracle).abs() < 1e-12);
        assert!((d - 2.352381).abs() < 1e-6);
    }

    #[test]
    fn self_distance_vanishes() {
        let chi = DirichletChar::group(7).unwrap().into_iter().nth(2).unwrap();
        let f = MultFunc::char_twist(&chi, 2.5);
        // f vanishes at 7, so start above it
        assert!(distance(&f, &f, 7, 5000).unwrap() < 1e-7);
        assert_eq!(distance_star(&MultFunc::one(), &MultFunc::one(), 1, 100).unwrap(), 0.0);
        assert!(distance(&f, &f, 10, 3).is_err());
    }

    #[test]
    fn moments() {
        let (mu, s2) = additive_moments(&MultFunc::one(), 1000).unwrap();
        assert_eq!((mu.norm(), s2), (0.0, 0.0));
        let (mu, _) = additive_moments(&MultFunc::liouville(), 5).unwrap();
        assert!((mu.re - (-0.5 - 4.0 / 9.0 - 8.0 / 25.0)).abs() < 1e-12);
        assert!((mu.re + 1.264444).abs() < 1e-6);
        let chi = DirichletChar::group(9).unwrap().into_iter().nth(4).unwrap();
        for f in [MultFunc::liouville(), MultFunc::mobius_squared(), MultFunc::char_twist(&chi, 0.3)] {
            for x in [2u64, 10, 100, 5000] {
                let (_, s2) = additive_moments(&f, x).unwrap();
                let d = distance_star(&MultFunc::one(), &f, 1, x).unwrap();
                assert!(s2 <= 2.0 * d * d + 1e-12, "{} x={x}", f.name());
            }
        }
    }

    /// Straight evaluation over the same grid, no rotation recurrence.
    fn brute_min(g: &MultFunc, x: u64, q_max: u64, step: f64) -> f64 {
        let kmax = (x as f64 / step).floor() as i64;
        let mut best = f64::INFINITY;
        for q in 1..=q_max {
            for chi in DirichletChar::group(q).unwrap() {
                for k in -kmax..=kmax {
                    let h = MultFunc::char_twist(&chi, k as f64 * step);
                    best = best.min(distance_sq(g, &h, 1, x).unwrap());
                }
            }
        }
        best
    }

    #[test]
    fn grid_scan_matches_direct_evaluation() {
        let g = MultFunc::char_extended(&DirichletChar::real_primitive(5).unwrap());
        for (x, q, step) in [(200u64, 6u64, 0.9), (60, 4, 0.37)] {
            let fast = min_distance(&g, x, q, Some(step)).unwrap();
            assert!((fast.value - brute_min(&g, x, q, step)).abs() < 1e-9);
        }
        let lam = MultFunc::liouville();
        let fast = min_distance(&lam, 300, 5, Some(1.1)).unwrap();
        assert!((fast.value - brute_min(&lam, 300, 5, 1.1)).abs() < 1e-9);
    }

    #[test]
    fn min_distance_examples() {
        let one = min_distance(&MultFunc::one(), 1000, 3, Some(0.5)).unwrap();
        assert!(one.value < 1e-12);
        assert_eq!((one.chi.modulus(), one.t), (1, 0.0));

        let chi5 = DirichletChar::real_primitive(5).unwrap();
        let g = MultFunc::char_extended(&chi5);
        let m = min_distance(&g, 1000, 5, Some(0.01)).unwrap();
        assert_eq!(m.chi.modulus(), 5);
        assert!(m.t.abs() < 1e-12);
        assert!(m.value <= 0.2 + 1e-12);
        assert!((m.value - 0.2).abs() < 1e-12);
    }

    #[test]
    fn liouville_distance_at_modest_height() {
        // chi mod 4 at t = 0 already gives about 1.865, so the scan minimum is below 2
        let lam = MultFunc::liouville();
        let chi4 = DirichletChar::table(4, 1).unwrap();
        let at_chi4 = distance_sq(&lam, &MultFunc::from_char(&chi4), 1, 1000).unwrap();
        assert!((at_chi4 - 1.864883339).abs() < 1e-8);
        let m = min_distance(&lam, 1000, 10, Some(0.5)).unwrap();
        assert!(m.value <= at_chi4 + 1e-12);
        // large |t| lines up p^{it} against -1 on enough small primes to go lower still
        let direct = distance_sq(&lam, &MultFunc::char_twist(&m.chi, m.t), 1, 1000).unwrap();
        assert!((m.value - direct).abs() < 1e-9);
        assert!(m.value > 0.5 && m.value < 1.0);
    }

    fn unimodular(seed: u64) -> MultFunc {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let phases: Vec<f64> = (0..1000).map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect();
        MultFunc::new(format!("rand{seed}"), true, move |p, k| C64::from_polar(1.0, phases[p as usize % 1000] * k as f64))
    }

    proptest! {
        #[test]
        fn triangle_inequality(a in 0u64..1000, b in 0u64..1000, c in 0u64..1000, x in 2u64..999) {
            let (f, g, h) = (unimodular(a), unimodular(b), unimodular(c));
            let fh = distance(&f, &h, 1, x).unwrap();
            let fg = distance(&f, &g, 1, x).unwrap();
            let gh = distance(&g, &h, 1, x).unwrap();
            prop_assert!(fh <= fg + gh + 1e-12);
        }
    }
}
