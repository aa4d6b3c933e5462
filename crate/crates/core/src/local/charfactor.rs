use crate::arith::{crt_count, factorize, solve_integer_system, Constraint, Rational};
use crate::error::{Error, Result};
use crate::forms::FormSystem;
use crate::multfunc::{DirichletChar, C64};
use num_integer::Integer;
use serde::Serialize;
use std::collections::VecDeque;

/// Cap on the `p`-part of `prod q_j`, the size of each residue-tuple group searched.
pub const TUPLE_CAP: u64 = 4_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct CharFactor {
    pub value: C64,
    /// admissible tuples `(b_j mod q_j)`
    pub admissible: u64,
    /// admissible tuples with every `b_j` a unit mod `q_j`
    pub coprime: u64,
}

fn check(a: &[u64], chis: &[DirichletChar], system: &FormSystem) -> Result<()> {
    if a.len() != system.k() || chis.len() != system.k() {
        return Err(Error::InvalidArgument("need one entry of a and one character per form".into()));
    }
    if a.contains(&0) {
        return Err(Error::ZeroModulus);
    }
    Ok(())
}

/// Sum of `prod chi_j(b_j)` over the distinct tuples `b` such that some `n` has
/// `a_j | L_j(n)` and `L_j(n)/a_j = b_j mod q_j` for every `j`.
///
/// The achievable `w = L(n)/a` form a translate of a lattice in `Z^k`, so the
/// tuples are a coset of a subgroup of `prod Z/q_j`, found by closing the
/// lattice generators.
pub fn char_factor(a: &[u64], chis: &[DirichletChar], system: &FormSystem) -> Result<CharFactor> {
    check(a, chis, system)?;
    let (k, l) = (system.k(), system.l());
    let q: Vec<u64> = chis.iter().map(|c| c.modulus()).collect();
    // [A | -diag(a)] (n, w) = -c
    let mat: Vec<Vec<i128>> = (0..k)
        .map(|j| {
            let mut row: Vec<i128> = system.forms[j].coeffs.iter().map(|&x| x as i128).collect();
            row.extend((0..k).map(|i| if i == j { -(a[j] as i128) } else { 0 }));
            row
        })
        .collect();
    let rhs: Vec<i128> = system.forms.iter().map(|f| -(f.constant as i128)).collect();
    let Some(sol) = solve_integer_system(&mat, &rhs)? else {
        return Ok(CharFactor { value: C64::new(0.0, 0.0), admissible: 0, coprime: 0 });
    };
    let gens: Vec<Vec<i128>> = sol.kernel.iter().map(|v| v[l..].to_vec()).collect();
    let w0 = &sol.particular[l..];
    // the tuple coset splits into its p-primary parts, and so does each character
    let mut primes: Vec<u64> = q.iter().flat_map(|&m| factorize(m).map(|f| f.primes().collect::<Vec<_>>())).flatten().collect();
    primes.sort_unstable();
    primes.dedup();
    let mut out = CharFactor { value: C64::new(1.0, 0.0), admissible: 1, coprime: 1 };
    for p in primes {
        let local = coset_sum(p, &q, chis, &gens, w0)?;
        out.value *= local.value;
        out.admissible *= local.admissible;
        out.coprime *= local.coprime;
    }
    Ok(out)
}

/// The `p`-primary part of the character sum: `b` runs over the coset in `prod Z/p^{v_p(q_j)}`
/// and `chi_j` is evaluated at the lift that is 1 modulo the rest of `q_j`.
fn coset_sum(p: u64, q: &[u64], chis: &[DirichletChar], gens: &[Vec<i128>], w0: &[i128]) -> Result<CharFactor> {
    let k = q.len();
    let qp: Vec<u64> = q
        .iter()
        .map(|&m| {
            let mut pe = 1;
            while m % (pe * p) == 0 {
                pe *= p;
            }
            pe
        })
        .collect();
    let size = qp.iter().try_fold(1u64, |acc, &m| acc.checked_mul(m)).filter(|&s| s <= TUPLE_CAP);
    let Some(size) = size else {
        return Err(Error::EnumerationCap {
            size: qp.iter().map(|&m| m as f64).product(),
            cap: TUPLE_CAP as f64,
            hint: format!("the {p}-parts of the moduli are too large"),
        });
    };
    // lift b mod p^e to B mod q with B = 1 mod q/p^e
    let lift = |j: usize, b: u64| -> i64 {
        let (pe, rest) = (qp[j] as i128, (q[j] / qp[j]) as i128);
        if pe == 1 {
            return 1;
        }
        let u = crate::arith::inv_mod(rest % pe, pe).expect("coprime parts");
        // B = 1 + rest * ((b - 1) * rest^{-1} mod pe)
        let t = ((b as i128 - 1) * u).rem_euclid(pe);
        (1 + rest * t) as i64
    };
    let encode = |w: &[i128]| -> usize {
        let mut idx = 0u64;
        for j in (0..k).rev() {
            idx = idx * qp[j] + w[j].rem_euclid(qp[j] as i128) as u64;
        }
        idx as usize
    };
    let decode = |mut idx: u64| -> Vec<u64> {
        let mut out = vec![0u64; k];
        for j in 0..k {
            out[j] = idx % qp[j];
            idx /= qp[j];
        }
        out
    };
    let start = encode(w0);
    let mut seen = vec![false; size as usize];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut value = C64::new(0.0, 0.0);
    let (mut admissible, mut coprime) = (0u64, 0u64);
    while let Some(idx) = queue.pop_front() {
        let b = decode(idx as u64);
        admissible += 1;
        let mut prod = C64::new(1.0, 0.0);
        let mut unit = true;
        for j in 0..k {
            unit &= qp[j] == 1 || b[j] % p != 0;
            prod *= chis[j].eval(lift(j, b[j]));
        }
        if unit {
            coprime += 1;
        }
        value += prod;
        for g in gens {
            let nb: Vec<i128> = (0..k).map(|j| b[j] as i128 + g[j]).collect();
            let ni = encode(&nb);
            if !seen[ni] {
                seen[ni] = true;
                queue.push_back(ni);
            }
        }
    }
    Ok(CharFactor { value, admissible, coprime })
}

/// Same sum by running `n` over `(Z/M)^l`, `M = lcm(a_j q_j)`; an oracle for small cases.
pub fn char_factor_enumerate(a: &[u64], chis: &[DirichletChar], system: &FormSystem, cap: f64) -> Result<CharFactor> {
    check(a, chis, system)?;
    let (k, l) = (system.k(), system.l());
    let q: Vec<u64> = chis.iter().map(|c| c.modulus()).collect();
    let m = (0..k).fold(1u64, |acc, j| acc.lcm(&(a[j] * q[j])));
    if (m as f64).powi(l as i32) > cap {
        return Err(Error::EnumerationCap {
            size: (m as f64).powi(l as i32),
            cap,
            hint: format!("modulus {m} in {l} variables; use char_factor"),
        });
    }
    let mut tuples = std::collections::BTreeSet::new();
    let mut n = vec![0u64; l];
    loop {
        let vals = system.eval(&n);
        if (0..k).all(|j| vals[j] % a[j] == 0) {
            tuples.insert((0..k).map(|j| vals[j] / a[j] % q[j]).collect::<Vec<u64>>());
        }
        let Some(i) = (0..l).find(|&i| n[i] + 1 < m) else { break };
        n[i] += 1;
        n[..i].iter_mut().for_each(|x| *x = 0);
    }
    let mut value = C64::new(0.0, 0.0);
    let mut coprime = 0;
    for b in &tuples {
        value += (0..k).map(|j| chis[j].eval(b[j] as i64)).product::<C64>();
        if (0..k).all(|j| b[j].gcd(&q[j]) == 1) {
            coprime += 1;
        }
    }
    Ok(CharFactor { value, admissible: tuples.len() as u64, coprime })
}

/// Density of `n` with `m_j | L_j(n)` for every `j`.
pub fn density_r(m: &[u64], system: &FormSystem) -> Result<Rational> {
    if m.len() != system.k() {
        return Err(Error::InvalidArgument("one modulus per form".into()));
    }
    let cs: Vec<Constraint> = system
        .forms
        .iter()
        .zip(m)
        .map(|(f, &mj)| Constraint::divides(mj, &coeffs_i64(&f.coeffs), f.constant as i64))
        .collect();
    crt_count(system.l(), &cs)
}

fn coeffs_i64(c: &[u64]) -> Vec<i64> {
    c.iter().map(|&x| x as i64).collect()
}

/// Density of `n` with `L_j(n)/a_j = u_j mod q_j` and `L_j(n) = v_j mod a_j d_j` for every `j`.
pub fn density_rad(a: &[u64], d: &[u64], q: &[u64], system: &FormSystem, u: &[i64], v: &[i64]) -> Result<Rational> {
    let k = system.k();
    if [a.len(), d.len(), q.len(), u.len(), v.len()].iter().any(|&x| x != k) {
        return Err(Error::InvalidArgument("one entry per form in every vector".into()));
    }
    let mut cs = Vec::with_capacity(2 * k);
    for j in 0..k {
        let f = &system.forms[j];
        let aq = a[j].checked_mul(q[j]).ok_or(Error::Overflow("a_j q_j"))?;
        let ad = a[j].checked_mul(d[j]).ok_or(Error::Overflow("a_j d_j"))?;
        // L/a = u (q)  <=>  L = a u (a q)
        let au = (a[j] as i64).checked_mul(u[j]).ok_or(Error::Overflow("a_j u_j"))?;
        cs.push(Constraint { coeffs: coeffs_i64(&f.coeffs), constant: f.constant as i64, residue: au, modulus: aq });
        cs.push(Constraint { coeffs: coeffs_i64(&f.coeffs), constant: f.constant as i64, residue: v[j], modulus: ad });
    }
    crt_count(system.l(), &cs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{ap_system, ap_system2, gowers_system, parse_system};

    fn chi5() -> DirichletChar {
        DirichletChar::real_primitive(5).unwrap()
    }

    #[test]
    fn four_ap_real_character() {
        let sys = ap_system(&[0, 1, 2, 3]).unwrap();
        let chis = vec![chi5(); 4];
        let x = char_factor(&[1, 1, 1, 1], &chis, &sys).unwrap();
        assert!((x.value - C64::new(8.0, 0.0)).norm() < 1e-9);
        let e = char_factor_enumerate(&[1, 1, 1, 1], &chis, &sys, 1e6).unwrap();
        assert!((e.value - x.value).norm() < 1e-9);
        assert_eq!((e.admissible, e.coprime), (x.admissible, x.coprime));
    }

    #[test]
    fn two_term_subsystems_vanish() {
        for s in [[0u64, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]] {
            for q in [5u64, 7, 11, 13, 35, 55] {
                let chi = DirichletChar::real_primitive(q).unwrap();
                let x = char_factor(&[1, 1], &[chi.clone(), chi], &ap_system(&s).unwrap()).unwrap();
                assert!(x.value.norm() < 1e-9, "S={s:?} q={q}");
            }
        }
        let single = parse_system("n", None).unwrap();
        assert!(char_factor(&[1], &[chi5()], &single).unwrap().value.norm() < 1e-12);
    }

    #[test]
    fn lattice_matches_enumeration() {
        let chi3 = DirichletChar::real_primitive(3).unwrap();
        let c4 = DirichletChar::table(4, 1).unwrap();
        let c7 = DirichletChar::table(7, 2).unwrap();
        let cases: Vec<(FormSystem, Vec<u64>, Vec<DirichletChar>)> = vec![
            (ap_system(&[0, 1, 2]).unwrap(), vec![1, 5, 25], vec![chi5(), chi5(), chi5()]),
            (ap_system(&[0, 1, 3]).unwrap(), vec![3, 1, 9], vec![chi3.clone(), chi3.clone(), chi3.clone()]),
            (ap_system2(&[0, 3], &[0, 1]).unwrap(), vec![1, 1, 5, 1], vec![chi5(), chi5(), chi5(), chi5()]),
            (parse_system("n+1; n+d; 2n+d+3", None).unwrap(), vec![2, 1, 7], vec![c4.clone(), chi3.clone(), c7.clone()]),
            (gowers_system(2).unwrap().0, vec![1, 2, 1, 4], vec![c4.clone(), c4.clone(), c4.clone(), c4]),
            // composite moduli sharing primes across forms
            (
                ap_system(&[0, 1, 2]).unwrap(),
                vec![1, 2, 3],
                vec![
                    DirichletChar::table(12, 3).unwrap(),
                    DirichletChar::table(15, 5).unwrap(),
                    DirichletChar::real_primitive(35).unwrap(),
                ],
            ),
        ];
        for (sys, a, chis) in cases {
            let x = char_factor(&a, &chis, &sys).unwrap();
            let e = char_factor_enumerate(&a, &chis, &sys, 2e7).unwrap();
            assert!((x.value - e.value).norm() < 1e-9, "{} a={a:?}", sys.render());
            assert_eq!((x.admissible, x.coprime), (e.admissible, e.coprime));
        }
    }

    #[test]
    fn trivial_characters_count_tuples() {
        let sys = ap_system(&[0, 1, 2]).unwrap();
        let triv: Vec<DirichletChar> = (0..3).map(|_| DirichletChar::trivial(6).unwrap()).collect();
        let x = char_factor(&[1, 1, 1], &triv, &sys).unwrap();
        assert_eq!(x.value.re, x.coprime as f64);
        assert_eq!(x.value.im, 0.0);
    }

    #[test]
    fn r_densities() {
        let ap4 = ap_system(&[0, 1, 2, 3]).unwrap();
        assert_eq!(density_r(&[5, 5, 5, 5], &ap4).unwrap(), Rational::new(1, 25));
        let pair = parse_system("n; n+d", None).unwrap();
        assert_eq!(density_r(&[2, 3], &pair).unwrap(), Rational::new(1, 6));
        // v = 0 and u = 0 reduce R_{a,d} to R at the lcm
        let sys = ap_system(&[0, 1, 2]).unwrap();
        let r = density_rad(&[5, 1, 1], &[1, 2, 3], &[5, 5, 5], &sys, &[0, 0, 0], &[0, 0, 0]).unwrap();
        assert_eq!(r, density_r(&[25, 10, 15], &sys).unwrap());
    }

    #[test]
    fn r_multiplicative_on_coprime_products() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let systems = [ap_system(&[0, 1, 2, 3]).unwrap(), ap_system2(&[0, 2], &[1, 3]).unwrap(), gowers_system(2).unwrap().0];
        let small = [1u64, 2, 3, 4, 8, 9];
        let big = [1u64, 5, 7, 25, 35];
        for _ in 0..60 {
            let sys = &systems[rng.gen_range(0..systems.len())];
            let m: Vec<u64> = (0..sys.k()).map(|_| small[rng.gen_range(0..small.len())]).collect();
            let n: Vec<u64> = (0..sys.k()).map(|_| big[rng.gen_range(0..big.len())]).collect();
            let mn: Vec<u64> = m.iter().zip(&n).map(|(a, b)| a * b).collect();
            assert_eq!(density_r(&mn, sys).unwrap(), density_r(&m, sys).unwrap() * density_r(&n, sys).unwrap());
        }
    }
}
