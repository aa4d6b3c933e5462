use num_integer::Integer;

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let g = a.rem_euclid(m).extended_gcd(&m);
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m))
}

/// Exponent of `p` in `n`; `n` must be nonzero.
pub fn valuation(mut n: u128, p: u128) -> u32 {
    debug_assert!(n != 0 && p > 1);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Smallest primitive root modulo an odd prime power `p^k`.
pub fn primitive_root(p: u64, k: u32) -> u64 {
    let pk = p.pow(k);
    let phi = pk / p * (p - 1);
    let qs: Vec<u64> = super::factorize(phi)
        .map(|f| f.factors.iter().map(|pp| pp.p).collect())
        .unwrap_or_default();
    (2..pk)
        .find(|&g| g % p != 0 && qs.iter().all(|&q| pow_mod(g, phi / q, pk) != 1))
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_roots() {
        assert_eq!(primitive_root(5, 1), 2);
        assert_eq!(primitive_root(7, 1), 3);
        assert_eq!(primitive_root(9, 1), 2);
        // 2 generates mod 3 and mod 9
        assert_eq!(primitive_root(3, 2), 2);
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(2, 4), None);
    }
}
