use super::factor::primes_up_to;

/// Number of integers `n <= x` whose prime factors are all at most `y`.
pub fn smooth_count(x: u64, y: u64) -> u64 {
    let primes = primes_up_to(y.min(x));
    fn go(limit: u64, primes: &[u64]) -> u64 {
        // counts 1 plus every product whose least prime index is >= 0
        let mut total = 1;
        for (i, &p) in primes.iter().enumerate() {
            if p > limit {
                break;
            }
            let mut m = limit / p;
            loop {
                total += go(m, &primes[i + 1..]);
                if m < p {
                    break;
                }
                m /= p;
            }
        }
        total
    }
    if x == 0 {
        return 0;
    }
    go(x, &primes)
}

/// de Bruijn's estimate for `log Psi(x, y)` without the `1 + o(1)` factor.
pub fn debruijn_log_estimate(x: f64, y: f64) -> f64 {
    let (lx, ly) = (x.ln(), y.ln());
    (lx / ly) * (1.0 + y / lx).ln() + (y / ly) * (1.0 + lx / y).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_smooth(mut n: u64, y: u64) -> bool {
        let mut p = 2;
        while n > 1 && p <= y {
            while n % p == 0 {
                n /= p;
            }
            p += 1;
        }
        n == 1
    }

    #[test]
    fn small_counts_match_enumeration() {
        assert_eq!(smooth_count(30, 5), 18);
        for x in [1u64, 2, 10, 97, 500] {
            for y in [2u64, 3, 5, 7, 13, 50] {
                let brute = (1..=x).filter(|&n| is_smooth(n, y)).count() as u64;
                assert_eq!(smooth_count(x, y), brute, "x={x} y={y}");
            }
            assert_eq!(smooth_count(x, x), x);
        }
    }

    #[test]
    fn estimate_tracks_exact_count() {
        let exact = (smooth_count(1_000_000, 50) as f64).ln();
        let est = debruijn_log_estimate(1e6, 50.0);
        assert!(((exact - est) / est).abs() <= 0.35, "exact {exact} est {est}");
    }
}
