use super::modular::{mul_mod, pow_mod};
use crate::error::{Error, Result};
use num_integer::Integer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct PrimePower {
    pub p: u64,
    pub k: u32,
}

impl PrimePower {
    pub fn value(&self) -> Result<u64> {
        self.p.checked_pow(self.k).ok_or(Error::Overflow("prime power"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Factorization {
    pub factors: Vec<PrimePower>,
}

impl Factorization {
    pub fn value(&self) -> Result<u64> {
        self.factors.iter().try_fold(1u64, |acc, pp| {
            acc.checked_mul(pp.value()?).ok_or(Error::Overflow("factorization product"))
        })
    }

    pub fn radical(&self) -> u64 {
        self.factors.iter().map(|pp| pp.p).product()
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|pp| pp.p)
    }

    fn from_primes(mut ps: Vec<u64>) -> Self {
        ps.sort_unstable();
        let mut factors: Vec<PrimePower> = Vec::new();
        for p in ps {
            match factors.last_mut() {
                Some(last) if last.p == p => last.k += 1,
                _ => factors.push(PrimePower { p, k: 1 }),
            }
        }
        Factorization { factors }
    }
}

/// Smallest-prime-factor table for `2..=bound`.
#[derive(Debug, Clone)]
pub struct SpfSieve {
    bound: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl SpfSieve {
    pub fn new(bound: u64) -> Self {
        assert!(bound < u32::MAX as u64, "sieve bound too large");
        let n = bound as usize;
        let mut spf = vec![0u32; n + 1];
        let mut primes = Vec::new();
        // linear sieve: each composite is struck once by its least prime
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                if p > si || i * p as usize > n {
                    break;
                }
                spf[i * p as usize] = p;
            }
        }
        SpfSieve { bound, spf, primes }
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && n <= self.bound && self.spf[n as usize] as u64 == n
    }

    pub fn factorize(&self, mut n: u64) -> Factorization {
        assert!(n >= 1 && n <= self.bound);
        let mut factors: Vec<PrimePower> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            factors.push(PrimePower { p, k });
        }
        Factorization { factors }
    }
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn next_prime(n: u64) -> u64 {
    let mut m = n + 1;
    while !is_prime(m) {
        m += 1;
    }
    m
}

fn pollard_brent(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        while g == 1 {
            x = f(x);
            y = f(f(y));
            g = x.abs_diff(y).gcd(&n);
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    split_into(d, out);
    split_into(n / d, out);
}

/// Factorization of `n >= 1`: trial division by small primes, Pollard-rho for
/// the cofactor.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::InvalidArgument("factorize(0)".into()));
    }
    let mut ps = Vec::new();
    let mut m = n;
    for p in 2u64..1000 {
        if p * p > m {
            break;
        }
        while m % p == 0 {
            ps.push(p);
            m /= p;
        }
    }
    split_into(m, &mut ps);
    Ok(Factorization::from_primes(ps))
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n).expect("n >= 1");
    if f.factors.iter().any(|pp| pp.k > 1) {
        0
    } else if f.factors.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: u64) -> u64 {
    let f = factorize(n).expect("n >= 1");
    f.factors.iter().fold(n, |acc, pp| acc / pp.p * (pp.p - 1))
}

pub fn radical(n: u64) -> u64 {
    factorize(n).expect("n >= 1").radical()
}

pub fn divisors(n: u64) -> Vec<u64> {
    let f = factorize(n).expect("n >= 1");
    let mut ds = vec![1u64];
    for pp in &f.factors {
        let cur = ds.clone();
        let mut pk = 1;
        for _ in 0..pp.k {
            pk *= pp.p;
            ds.extend(cur.iter().map(|d| d * pk));
        }
    }
    ds.sort_unstable();
    ds
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            if k > 0 {
                out.push((p, k));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    fn pairs(f: &Factorization) -> Vec<(u64, u32)> {
        f.factors.iter().map(|pp| (pp.p, pp.k)).collect()
    }

    #[test]
    fn spot_factorizations() {
        assert_eq!(pairs(&factorize(360).unwrap()), vec![(2, 3), (3, 2), (5, 1)]);
        assert!(factorize(1).unwrap().factors.is_empty());
        assert_eq!(pairs(&factorize(9991).unwrap()), trial_division(9991));
        assert_eq!(pairs(&factorize(9991).unwrap()), vec![(97, 1), (103, 1)]);
        let big = 1_000_000_007u64 * 998_244_353;
        assert_eq!(pairs(&factorize(big).unwrap()), vec![(998_244_353, 1), (1_000_000_007, 1)]);
        assert!(factorize(0).is_err());
    }

    #[test]
    fn sieve_round_trip() {
        let s = SpfSieve::new(1_000_000);
        for n in 1..=1_000_000u64 {
            let f = s.factorize(n);
            assert_eq!(f.value().unwrap(), n);
            if n % 9973 == 0 {
                assert_eq!(f, factorize(n).unwrap());
            }
        }
        assert_eq!(s.primes().len(), 78_498);
    }

    #[test]
    fn arithmetic_functions() {
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
        assert_eq!(euler_phi(35), 24);
        assert_eq!(radical(360), 30);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(next_prime(4 * 64), 257);
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }
}
