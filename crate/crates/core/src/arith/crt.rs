use super::factor::factorize;
use super::modular::{inv_mod, mul_mod, valuation};
use crate::error::{Error, Result};
use num_integer::Integer;
use num_rational::Ratio;

pub type Rational = Ratio<i128>;

/// `coeffs . n + constant == residue (mod modulus)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<i64>,
    pub constant: i64,
    pub residue: i64,
    pub modulus: u64,
}

impl Constraint {
    /// `modulus | coeffs . n + constant`
    pub fn divides(modulus: u64, coeffs: &[i64], constant: i64) -> Self {
        Constraint { coeffs: coeffs.to_vec(), constant, residue: 0, modulus }
    }
}

const DIRECT_CAP: f64 = 1e8;

fn check(l: usize, cs: &[Constraint]) -> Result<()> {
    for c in cs {
        if c.modulus == 0 {
            return Err(Error::ZeroModulus);
        }
        if c.coeffs.len() != l {
            return Err(Error::InvalidArgument(format!(
                "constraint has {} coefficients, expected {l}",
                c.coeffs.len()
            )));
        }
    }
    Ok(())
}

fn lcm_moduli(cs: &[Constraint]) -> Result<u64> {
    cs.iter().try_fold(1u64, |acc, c| {
        let g = acc.gcd(&c.modulus);
        (acc / g).checked_mul(c.modulus).ok_or(Error::Overflow("lcm of moduli"))
    })
}

/// Exact density of `n in Z^l` satisfying every constraint. Enumerates
/// `(Z/MZ)^l` directly when `M^l <= 1e8`, otherwise splits by prime.
pub fn crt_count(l: usize, cs: &[Constraint]) -> Result<Rational> {
    check(l, cs)?;
    if cs.is_empty() {
        return Ok(Rational::from_integer(1));
    }
    let small = lcm_moduli(cs).is_ok_and(|m| (m as f64).powi(l as i32) <= DIRECT_CAP);
    if small {
        crt_count_enumerate(l, cs)
    } else {
        crt_count_by_prime(l, cs)
    }
}

pub fn crt_count_enumerate(l: usize, cs: &[Constraint]) -> Result<Rational> {
    check(l, cs)?;
    let m = lcm_moduli(cs)?;
    let total = (m as f64).powi(l as i32);
    if total > DIRECT_CAP * 10.0 {
        return Err(Error::EnumerationCap {
            size: total,
            cap: DIRECT_CAP * 10.0,
            hint: "use crt_count_by_prime".into(),
        });
    }
    let mut n = vec![0i64; l];
    let mut count: i128 = 0;
    loop {
        let ok = cs.iter().all(|c| {
            let v: i128 = c.coeffs.iter().zip(&n).map(|(&a, &x)| a as i128 * x as i128).sum::<i128>()
                + c.constant as i128
                - c.residue as i128;
            v.rem_euclid(c.modulus as i128) == 0
        });
        if ok {
            count += 1;
        }
        // odometer
        let mut i = 0;
        loop {
            if i == l {
                return Ok(Rational::new(count, (m as i128).pow(l as u32)));
            }
            n[i] += 1;
            if n[i] as u64 == m {
                n[i] = 0;
                i += 1;
            } else {
                break;
            }
        }
    }
}

pub fn crt_count_by_prime(l: usize, cs: &[Constraint]) -> Result<Rational> {
    check(l, cs)?;
    let mut primes: Vec<u64> = Vec::new();
    for c in cs {
        primes.extend(factorize(c.modulus)?.primes());
    }
    primes.sort_unstable();
    primes.dedup();
    let mut den: i128 = 1;
    for p in primes {
        let rows: Vec<(Vec<i128>, i128, u32)> = cs
            .iter()
            .filter(|c| c.modulus % p == 0)
            .map(|c| {
                (
                    c.coeffs.iter().map(|&a| a as i128).collect(),
                    c.constant as i128 - c.residue as i128,
                    valuation(c.modulus as u128, p as u128),
                )
            })
            .collect();
        match padic_density(p, &rows, l)? {
            None => return Ok(Rational::from_integer(0)),
            Some(s) => {
                let ps = (p as i128).checked_pow(s).ok_or(Error::Overflow("density denominator"))?;
                den = den.checked_mul(ps).ok_or(Error::Overflow("density denominator"))?;
            }
        }
    }
    Ok(Rational::new(1, den))
}

/// Density of `{n in Z_p^l : p^e | c + a.n for every row (a, c, e)}`.
/// Returns `Some(s)` for density `p^-s`, `None` when the set is empty.
pub fn padic_density(p: u64, rows: &[(Vec<i128>, i128, u32)], l: usize) -> Result<Option<u32>> {
    let e_max = rows.iter().map(|r| r.2).max().unwrap_or(0);
    if e_max == 0 {
        return Ok(Some(0));
    }
    let m = p
        .checked_pow(e_max)
        .filter(|&m| m < 1 << 62)
        .ok_or(Error::Overflow("p-adic modulus"))?;
    let mi = m as i128;
    let k = rows.len();
    let mut mat: Vec<Vec<u64>> = Vec::with_capacity(k);
    let mut rhs: Vec<u64> = Vec::with_capacity(k);
    for (a, c, e) in rows {
        let scale = p.pow(e_max - e) as i128;
        mat.push(a.iter().map(|&x| ((x % mi) * scale).rem_euclid(mi) as u64).collect());
        rhs.push(((-c % mi) * scale).rem_euclid(mi) as u64);
    }
    let val = |x: u64| valuation(x as u128, p as u128);
    let mut s = 0u32;
    let mut t = 0usize;
    while t < k && t < l {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in mat.iter().enumerate().skip(t) {
            for (c, &x) in row.iter().enumerate().skip(t) {
                if x != 0 {
                    let v = val(x);
                    if best.is_none_or(|b| v < b.0) {
                        best = Some((v, i, c));
                    }
                }
            }
        }
        let Some((v, i, c)) = best else { break };
        mat.swap(t, i);
        rhs.swap(t, i);
        for row in mat.iter_mut() {
            row.swap(t, c);
        }
        let pv = p.pow(v);
        let unit = mat[t][t] / pv;
        let uinv = inv_mod(unit as i128, mi).expect("unit modulo p^E") as u64;
        for x in mat[t].iter_mut().skip(t) {
            *x = mul_mod(*x, uinv, m);
        }
        rhs[t] = mul_mod(rhs[t], uinv, m);
        let pivot_row = mat[t].clone();
        for i in 0..k {
            if i == t || mat[i][t] == 0 {
                continue;
            }
            let w = mat[i][t] / pv;
            for c in t..l {
                mat[i][c] = (mat[i][c] + m - mul_mod(w, pivot_row[c], m)) % m;
            }
            rhs[i] = (rhs[i] + m - mul_mod(w, rhs[t], m)) % m;
        }
        // column operations clear the rest of the pivot row without touching rhs
        for x in mat[t].iter_mut().skip(t + 1) {
            *x = 0;
        }
        if rhs[t] != 0 && val(rhs[t]) < v {
            return Ok(None);
        }
        s += e_max - v;
        t += 1;
    }
    if rhs.iter().skip(t).any(|&b| b != 0) {
        return Ok(None);
    }
    Ok(Some(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn spot_densities() {
        let cs = [Constraint::divides(2, &[1, 0], 0), Constraint::divides(3, &[1, 1], 0)];
        assert_eq!(crt_count(2, &cs).unwrap(), r(1, 6));
        assert_eq!(crt_count_by_prime(2, &cs).unwrap(), r(1, 6));
        let ap4: Vec<Constraint> = (0..4).map(|j| Constraint::divides(5, &[1, j], 0)).collect();
        assert_eq!(crt_count(2, &ap4).unwrap(), r(1, 25));
        assert_eq!(crt_count_by_prime(2, &ap4).unwrap(), r(1, 25));
        assert_eq!(crt_count(2, &[]).unwrap(), r(1, 1));
        // inconsistent: n even and n odd
        let bad = [Constraint::divides(2, &[1], 0), Constraint::divides(2, &[1], 1)];
        assert_eq!(crt_count(1, &bad).unwrap(), r(0, 1));
        assert_eq!(crt_count_by_prime(1, &bad).unwrap(), r(0, 1));
    }

    #[test]
    fn large_moduli_take_prime_path() {
        let cs = [Constraint::divides(1 << 40, &[1, 2], 0), Constraint::divides(3u64.pow(20), &[1, 0], 7)];
        let d = crt_count(2, &cs).unwrap();
        assert_eq!(d, r(1, (1i128 << 40) * 3i128.pow(20)));
    }

    fn constraint_strategy(l: usize) -> impl Strategy<Value = Constraint> {
        (
            proptest::collection::vec(0i64..6, l),
            0i64..10,
            0i64..10,
            prop::sample::select(vec![2u64, 3, 4, 5, 6, 7, 8, 9, 10, 12, 25, 27]),
        )
            .prop_map(|(coeffs, constant, residue, modulus)| Constraint { coeffs, constant, residue, modulus })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn enumeration_matches_prime_split(cs in proptest::collection::vec(constraint_strategy(2), 1..4)) {
            let m = lcm_moduli(&cs).unwrap();
            prop_assume!(m * m <= 1_000_000);
            prop_assert_eq!(crt_count_enumerate(2, &cs).unwrap(), crt_count_by_prime(2, &cs).unwrap());
        }

        #[test]
        fn multiplicative_over_coprime_groups(
            a in proptest::collection::vec(constraint_strategy(1), 1..4),
            b in proptest::collection::vec(constraint_strategy(1), 1..4),
            ea in proptest::collection::vec(0u32..3, 3),
            eb in proptest::collection::vec(0u32..3, 3),
        ) {
            // group a lives on primes 2 and 3, group b on 5 and 7
            let put = |cs: &[Constraint], ps: [u64; 2], es: &[u32]| -> Vec<Constraint> {
                cs.iter().enumerate().map(|(i, c)| {
                    let mut c = c.clone();
                    c.modulus = ps[i % 2].pow(1 + es[i % 3] % 2) * if es[i % 3] == 2 { ps[1 - i % 2] } else { 1 };
                    c
                }).collect()
            };
            let a = put(&a, [2, 3], &ea);
            let b = put(&b, [5, 7], &eb);
            let joint: Vec<_> = a.iter().chain(b.iter()).cloned().collect();
            prop_assume!(lcm_moduli(&joint).unwrap() <= 10_000);
            let lhs = crt_count_enumerate(1, &joint).unwrap();
            let rhs = crt_count_enumerate(1, &a).unwrap() * crt_count_enumerate(1, &b).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(lhs, crt_count_by_prime(1, &joint).unwrap());
        }
    }
}
