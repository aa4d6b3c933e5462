use crate::error::{Error, Result};

/// Kronecker symbol (a/n). Agrees with the Legendre symbol for odd prime `n`
/// and with the Jacobi symbol for odd positive `n`.
pub fn kronecker(a: i64, n: i64) -> Result<i8> {
    if n == 0 {
        return Err(Error::ZeroModulus);
    }
    let mut a = a as i128;
    let mut n = n as i128;
    let mut sign: i8 = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            sign = -sign;
        }
    }
    // strip powers of two from n: (a/2) is 0 for even a, else depends on a mod 8
    let mut twos = 0;
    while n % 2 == 0 {
        n /= 2;
        twos += 1;
    }
    if twos > 0 {
        if a % 2 == 0 {
            return Ok(0);
        }
        if twos % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            sign = -sign;
        }
    }
    // n is now odd positive
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(n % 8, 3 | 5) {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    Ok(if n == 1 { sign } else { 0 })
}

/// Jacobi symbol for odd positive `n`.
pub fn jacobi(a: i64, n: u64) -> Result<i8> {
    if n % 2 == 0 {
        return Err(Error::InvalidArgument(format!("jacobi needs odd n, got {n}")));
    }
    kronecker(a, n as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn legendre_by_squares(a: i64, p: i64) -> i8 {
        let r = a.rem_euclid(p);
        if r == 0 {
            return 0;
        }
        if (1..p).any(|x| (x * x) % p == r) {
            1
        } else {
            -1
        }
    }

    #[test]
    fn spot_values() {
        assert_eq!(kronecker(2, 5).unwrap(), -1);
        assert_eq!(kronecker(4, 5).unwrap(), 1);
        assert_eq!(kronecker(7, 5).unwrap(), -1);
        for q in (1..200).step_by(2) {
            assert_eq!(kronecker(1, q).unwrap(), 1);
        }
        assert!(kronecker(3, 0).is_err());
        assert_eq!(kronecker(-1, 7).unwrap(), -1);
        assert_eq!(kronecker(3, 8).unwrap(), -1);
        assert_eq!(kronecker(6, 9).unwrap(), 0);
    }

    #[test]
    fn matches_squares_oracle() {
        for p in [3i64, 5, 7, 11, 13, 101] {
            for a in -30..60 {
                assert_eq!(kronecker(a, p).unwrap(), legendre_by_squares(a, p), "a={a} p={p}");
            }
        }
    }

    #[test]
    fn zero_iff_common_factor() {
        use num_integer::Integer;
        for n in (1..300i64).step_by(2) {
            for a in 0..60i64 {
                let k = kronecker(a, n).unwrap();
                assert_eq!(k == 0, a.gcd(&n) > 1);
            }
        }
    }
}
