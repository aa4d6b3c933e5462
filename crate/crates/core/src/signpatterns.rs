//! Sign patterns of ±1 multiplicative functions along arithmetic progressions: exact
//! character-sum identities, the elliptic-curve bias predictor, second-moment constants and
//! brute-force pattern censuses.

use crate::arith::{euler_phi, factorize, jacobi, mobius, primes_up_to, Rational};
use crate::error::{Error, Result};
use crate::forms::{ap_system, ap_system2, FormSystem};
use crate::local::{char_factor, local_average_tree, LocalParams, LocalSystem};
use crate::multfunc::{distance_sq, DirichletChar, MultFunc, C64};
use crate::output::rational_string;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

/// A vector of signs, `eps_j = -1` exactly when bit `j` of the index is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SignPattern {
    pub m: usize,
    pub index: usize,
}

impl SignPattern {
    pub fn new(eps: &[i8]) -> Result<Self> {
        if !(3..=4).contains(&eps.len()) || eps.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::InvalidArgument(format!("sign pattern must be 3 or 4 entries of ±1, got {eps:?}")));
        }
        let index = eps.iter().enumerate().filter(|(_, &e)| e == -1).fold(0, |acc, (j, _)| acc | 1 << j);
        Ok(SignPattern { m: eps.len(), index })
    }

    pub fn all(m: usize) -> Vec<SignPattern> {
        (0..1 << m).map(|index| SignPattern { m, index }).collect()
    }

    pub fn eps(&self) -> Vec<i8> {
        (0..self.m).map(|j| if self.index >> j & 1 == 1 { -1 } else { 1 }).collect()
    }

    pub fn product(&self) -> i8 {
        if self.index.count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// `sum_{i<j} eps_i eps_j`.
    pub fn pair_sum(&self) -> i32 {
        let e = self.eps();
        let mut s = 0;
        for i in 0..self.m {
            for j in i + 1..self.m {
                s += (e[i] * e[j]) as i32;
            }
        }
        s
    }

    pub fn plus_count(&self) -> usize {
        self.m - self.index.count_ones() as usize
    }

    pub fn label(&self) -> String {
        self.eps().iter().map(|&e| if e == 1 { '+' } else { '-' }).collect()
    }
}

fn legendre(a: i64, p: u64) -> i64 {
    jacobi(a, p).expect("odd prime modulus") as i64
}

/// `y^2 = x(x-1)(x-lambda)` over `F_p`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LegendreCurve {
    pub p: u64,
    pub lambda: u64,
    /// points including the one at infinity
    pub points: u64,
    pub delta: i64,
}

impl LegendreCurve {
    pub fn new(p: u64, lambda: u64) -> Result<Self> {
        if p < 5 || !crate::arith::is_prime(p) {
            return Err(Error::InvalidArgument(format!("need a prime p >= 5, got {p}")));
        }
        let lam = lambda % p;
        if lam == 0 || lam == 1 {
            return Err(Error::SingularCurve(lam));
        }
        let mut points = 1u64;
        for x in 0..p {
            let v = (x as i128 * (x as i128 - 1) * (x as i128 - lam as i128)).rem_euclid(p as i128) as i64;
            points += (1 + legendre(v, p)) as u64;
        }
        let delta = p as i64 + 1 - points as i64;
        // Hasse bound
        if (delta * delta) as u64 > 4 * p {
            return Err(Error::InvalidArgument(format!("point count {points} violates the Hasse bound at p = {p}")));
        }
        Ok(LegendreCurve { p, lambda: lam, points, delta })
    }

    /// The curve attached to the progression problem: `lambda = 3 b^2` with `2b = 1 mod p`.
    pub fn for_progressions(p: u64) -> Result<Self> {
        if p % 2 == 0 || p % 3 == 0 {
            return Err(Error::InvalidArgument(format!("p = {p} must be coprime to 6")));
        }
        // inverse of 2 mod p
        let b = (p + 1) / 2;
        LegendreCurve::new(p, 3 * (b * b % p) % p)
    }
}

pub fn ec_count(p: u64, lambda: u64) -> Result<(u64, i64)> {
    let c = LegendreCurve::new(p, lambda)?;
    Ok((c.points, c.delta))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlankSum {
    pub p: u64,
    pub sum: i64,
    pub delta: i64,
    /// `sum + delta + 1`
    pub residual: i64,
}

/// `sum_{d mod p} (d(d+1)(d+2)(d+3) / p)` against `-(Delta_p + 1)`.
pub fn blank_sum(p: u64) -> Result<BlankSum> {
    let curve = LegendreCurve::for_progressions(p)?;
    let mut sum = 0i64;
    for d in 0..p as i128 {
        let v = (d * (d + 1) * (d + 2) * (d + 3)).rem_euclid(p as i128) as i64;
        sum += legendre(v, p);
    }
    Ok(BlankSum { p, sum, delta: curve.delta, residual: sum + curve.delta + 1 })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct JacobiSum {
    pub p: u64,
    pub value: i64,
    /// `value + chi_p(-1)`
    pub residual: i64,
}

pub fn jacobi_sum_check(p: u64) -> Result<JacobiSum> {
    if p < 3 || !crate::arith::is_prime(p) {
        return Err(Error::InvalidArgument(format!("need an odd prime, got {p}")));
    }
    let value: i64 = (0..p as i64).map(|b| legendre(b, p) * legendre(1 - b, p)).sum();
    Ok(JacobiSum { p, value, residual: value + legendre(-1, p) })
}

fn check_q(q: u64) -> Result<Vec<u64>> {
    if q < 5 || q % 2 == 0 || q % 3 == 0 || mobius(q) == 0 {
        return Err(Error::InvalidArgument(format!("q = {q} must be squarefree, > 1 and coprime to 6")));
    }
    Ok(factorize(q)?.primes().collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ElltransCheck {
    pub q: u64,
    pub xi: i64,
    /// `mu(q) phi(q) prod_{p|q} Delta_p`
    pub formula: i64,
    pub residual: i64,
    /// divisor vectors `a` (not all equal) checked for `Xi_a = 0`
    pub unequal_checked: usize,
    pub unequal_nonzero: usize,
}

fn round_int(z: C64) -> Result<i64> {
    let r = z.re.round();
    if (z.re - r).abs() > 1e-6 || z.im.abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!("character sum {z} is not an integer")));
    }
    Ok(r as i64)
}

/// Character factor of the 4-term progression system against the elliptic-curve product.
pub fn elltrans_check(q: u64) -> Result<ElltransCheck> {
    let primes = check_q(q)?;
    let sys = ap_system(&[0, 1, 2, 3])?;
    let chi = DirichletChar::real_primitive(q)?;
    let chis = vec![chi; 4];
    let xi = round_int(char_factor(&[1; 4], &chis, &sys)?.value)?;
    let mut formula = mobius(q) * euler_phi(q) as i64;
    for &p in &primes {
        formula *= LegendreCurve::for_progressions(p)?.delta;
    }
    let divs = crate::arith::divisors(q);
    let (mut checked, mut nonzero) = (0, 0);
    let mut a = [0u64; 4];
    for i in 0..divs.len().pow(4) {
        let mut r = i;
        for slot in a.iter_mut() {
            *slot = divs[r % divs.len()];
            r /= divs.len();
        }
        if a.iter().all(|&v| v == a[0]) {
            continue;
        }
        checked += 1;
        if char_factor(&a, &chis, &sys)?.value.norm() > 1e-9 {
            nonzero += 1;
        }
    }
    Ok(ElltransCheck { q, xi, formula, residual: xi - formula, unequal_checked: checked, unequal_nonzero: nonzero })
}

/// Character factors of every 2- and 3-term subsystem of the 4-term progression; all vanish.
pub fn triv23_check(q: u64) -> Result<Vec<(Vec<u64>, C64)>> {
    let chi = DirichletChar::real_primitive(q)?;
    let mut out = Vec::new();
    for mask in 1u32..16 {
        let s: Vec<u64> = (0..4).filter(|&j| mask >> j & 1 == 1).collect();
        if s.len() < 2 || s.len() > 3 {
            continue;
        }
        let sys = ap_system(&s)?;
        let v = char_factor(&vec![1; s.len()], &vec![chi.clone(); s.len()], &sys)?.value;
        out.push((s, v));
    }
    Ok(out)
}

/// Truncated Euler product of `M_p(F, L)` over `p <= big_p`, `p` not dividing `q`.
#[derive(Clone, Debug, Serialize)]
pub struct LocalProduct {
    pub value: f64,
    pub big_p: u64,
    /// `sum_{p > P} 4/p^2`, estimated as `4 / (P log P)`
    pub tail: f64,
    pub pruned: f64,
}

pub fn local_product(f_chi: &MultFunc, system: &FormSystem, q: u64, big_p: u64, params: &LocalParams) -> Result<LocalProduct> {
    let ls = LocalSystem::new(system)?;
    let fs = vec![f_chi.clone(); system.k()];
    let mut value = C64::new(1.0, 0.0);
    let mut pruned = 0.0;
    for p in primes_up_to(big_p) {
        if q % p == 0 {
            continue;
        }
        // a factor whose function is 1 on every p^nu, nu <= 64, is 1 up to 2^-64
        if (1..=64).all(|k| (f_chi.pp(p, k) - 1.0).norm() == 0.0) {
            continue;
        }
        let m = local_average_tree(&ls, &fs, p, params)?;
        value *= m.value;
        pruned += m.bound;
    }
    let pf = big_p.max(2) as f64;
    Ok(LocalProduct { value: value.re, big_p, tail: 4.0 / (pf * pf.ln()), pruned })
}

#[derive(Clone, Debug, Serialize)]
pub struct Bias {
    pub q: u64,
    pub deltas: Vec<(u64, i64)>,
    /// `prod_{p|q} mu(p) Delta_p / (p + 1)`
    pub curve_product: String,
    pub curve_value: f64,
    pub local: LocalProduct,
    /// `D(f, chi; 10^5)^2`
    pub distance_sq: f64,
    pub warning: Option<String>,
}

impl Bias {
    /// `A_eps(f; q)`.
    pub fn a_eps(&self, eps: &SignPattern) -> f64 {
        eps.product() as f64 * self.curve_value * self.local.value
    }
}

/// Squared distance above which `f` is not treated as pretending to be the character.
pub const PRETENTIOUS_LIMIT: f64 = 1.0;

pub fn f_times_char(f: &MultFunc, q: u64) -> Result<MultFunc> {
    Ok(f.times(&MultFunc::from_char(&DirichletChar::real_primitive(q)?)))
}

pub fn bias(f: &MultFunc, q: u64, big_p: u64, params: &LocalParams) -> Result<Bias> {
    let primes = check_q(q)?;
    let chi = DirichletChar::real_primitive(q)?;
    let mut curve = Rational::from_integer(1);
    let mut deltas = Vec::new();
    for &p in &primes {
        let d = LegendreCurve::for_progressions(p)?.delta;
        deltas.push((p, d));
        curve *= Rational::new(-(d as i128), p as i128 + 1);
    }
    let local = local_product(&f_times_char(f, q)?, &ap_system(&[0, 1, 2, 3])?, q, big_p, params)?;
    let dsq = distance_sq(f, &MultFunc::from_char(&chi), 2, 100_000)?;
    let warning = (dsq > PRETENTIOUS_LIMIT)
        .then(|| format!("D(f, chi_{q}; 1e5)^2 = {dsq:.3} is large; the bias formula assumes f pretends to be chi"));
    Ok(Bias {
        q,
        deltas,
        curve_product: rational_string(&curve),
        curve_value: *curve.numer() as f64 / *curve.denom() as f64,
        local,
        distance_sq: dsq,
        warning,
    })
}

pub fn a_eps(f: &MultFunc, q: u64, eps: &SignPattern) -> Result<f64> {
    Ok(bias(f, q, 1000, &LocalParams::default())?.a_eps(eps))
}

#[derive(Clone, Debug, Serialize)]
pub struct TConstants {
    pub q: u64,
    pub t22: f64,
    pub t42: f64,
    /// includes the `A_eps^2` factor, which is the same for every pattern
    pub t44: f64,
    /// exact `p | q` parts
    pub t22_primes: String,
    pub t42_primes: String,
    /// `A_eps^2 prod(...)` with the `Delta_p^2` denominators cancelled, `p | q` part only
    pub t44_primes: String,
    pub local22: LocalProduct,
    pub local42: LocalProduct,
    pub bias: Bias,
}

fn ratio(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn t_constants(f: &MultFunc, q: u64, big_p: u64, params: &LocalParams) -> Result<TConstants> {
    let b = bias(f, q, big_p, params)?;
    let fc = f_times_char(f, q)?;
    let local22 = local_product(&fc, &ap_system2(&[0, 1], &[0, 1])?, q, big_p, params)?;
    let local42 = local_product(&fc, &ap_system2(&[0, 1, 2, 3], &[0, 1])?, q, big_p, params)?;
    let one = Rational::from_integer(1);
    let (mut r22, mut r42, mut r44) = (one, one, one);
    for &(p, d) in &b.deltas {
        let (p, d) = (p as i128, d as i128);
        r22 *= Rational::new(p, p * p + p + 1);
        r42 *= Rational::new((p - d) * (p + 1) - d, p * p * (p + 1));
        // (Delta (1 + 1/Delta))^2 = (Delta + 1)^2
        let num = Rational::from_integer((d + 1) * (d + 1)) + Rational::new(d * d, p) + Rational::from_integer(p);
        let den = Rational::from_integer((p + 1) * (p + 1)) * (one + Rational::new(1, p * (p + 1)));
        r44 *= num / den;
    }
    let local_sq = b.local.value * b.local.value;
    Ok(TConstants {
        q,
        t22: local22.value * ratio(&r22),
        t42: local42.value * ratio(&r42),
        t44: local_sq * ratio(&r44),
        t22_primes: rational_string(&r22),
        t42_primes: rational_string(&r42),
        t44_primes: rational_string(&r44),
        local22,
        local42,
        bias: b,
    })
}

/// Right side of the second-moment formula for one pattern.
pub fn msq_prediction(t: &TConstants, eps: &SignPattern) -> f64 {
    let a = t.bias.a_eps(eps);
    let s = eps.pair_sum() as f64;
    (t.t44 - a * a + 2.0 * eps.product() as f64 * s * t.t42 + s * s * t.t22) / 256.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DFilter {
    All,
    /// `q` does not divide `d`
    Coprime(u64),
    /// `q` divides `d`
    Multiple(u64),
}

impl DFilter {
    pub fn keeps(&self, d: u64) -> bool {
        match *self {
            DFilter::All => true,
            DFilter::Coprime(q) => d % q != 0,
            DFilter::Multiple(q) => d % q == 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PatternPrediction {
    pub q: u64,
    pub a_eps: Vec<f64>,
    /// `(1 + A_eps) / 16`
    pub density: Vec<f64>,
    pub t: TConstants,
    pub msq: Vec<f64>,
    /// mean over the selected d of `(count/x - density)^2`
    pub msq_empirical: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PatternCensus {
    pub f: String,
    pub x: u64,
    pub z: u64,
    pub m: usize,
    pub filter: DFilter,
    pub d_values: Vec<u64>,
    /// per selected d, one count per pattern index
    #[serde(skip)]
    pub counts: Vec<Vec<u64>>,
    /// per pattern, mean over d of `count / x`
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub prediction: Option<PatternPrediction>,
}

/// `(f(1), ..., f(n))` as sign bits, rejecting values other than ±1.
pub fn sign_bits(f: &MultFunc, n: u64) -> Result<Vec<u8>> {
    let vals = f.bulk_eval(n);
    let mut out = vec![0u8; n as usize + 1];
    for (i, v) in vals.iter().enumerate().skip(1) {
        out[i] = if *v == C64::new(1.0, 0.0) {
            0
        } else if *v == C64::new(-1.0, 0.0) {
            1
        } else {
            return Err(Error::InvalidArgument(format!("{} takes the value {v} at {i}, not ±1", f.name())));
        };
    }
    Ok(out)
}

/// Pattern counts for one difference by direct comparison.
pub fn count_patterns(bits: &[u8], x: u64, d: u64, m: usize) -> Vec<u64> {
    let mut c = vec![0u64; 1 << m];
    let (x, d) = (x as usize, d as usize);
    for n in 1..=x {
        let mut idx = 0usize;
        for j in 0..m {
            idx |= (bits[n + j * d] as usize) << j;
        }
        c[idx] += 1;
    }
    c
}

/// Pattern counts from `prod_j (1 + eps_j f(n + jd)) / 2` expanded into correlations.
pub fn count_patterns_by_expansion(bits: &[u8], x: u64, d: u64, m: usize) -> Vec<u64> {
    let (xu, du) = (x as usize, d as usize);
    let sign = |n: usize| 1 - 2 * bits[n] as i64;
    // correlation sums over every subset of the progression
    let corr: Vec<i64> = (0..1usize << m)
        .map(|s| (1..=xu).map(|n| (0..m).filter(|&j| s >> j & 1 == 1).map(|j| sign(n + j * du)).product::<i64>()).sum())
        .collect();
    SignPattern::all(m)
        .iter()
        .map(|pat| {
            let eps = pat.eps();
            let total: i64 = (0..1usize << m)
                .map(|s| {
                    let e: i64 = (0..m).filter(|&j| s >> j & 1 == 1).map(|j| eps[j] as i64).product();
                    e * corr[s]
                })
                .sum();
            (total >> m) as u64
        })
        .collect()
}

pub fn census(f: &MultFunc, x: u64, z: u64, m: usize, filter: DFilter) -> Result<PatternCensus> {
    if !(3..=4).contains(&m) {
        return Err(Error::InvalidArgument(format!("m must be 3 or 4, got {m}")));
    }
    if z == 0 || z > x {
        return Err(Error::InvalidArgument(format!("need 1 <= z <= x, got z = {z}, x = {x}")));
    }
    let need = x + (m as u64 - 1) * z;
    if need > crate::averages::TABLE_LIMIT {
        return Err(Error::RangeOverflow { need, limit: crate::averages::TABLE_LIMIT });
    }
    let bits = sign_bits(f, need)?;
    let d_values: Vec<u64> = (1..=z).filter(|&d| filter.keeps(d)).collect();
    let counts: Vec<Vec<u64>> = d_values.par_iter().map(|&d| count_patterns(&bits, x, d, m)).collect();
    let np = 1 << m;
    let nd = d_values.len().max(1) as f64;
    let mut mean = vec![0.0; np];
    let mut variance = vec![0.0; np];
    for c in &counts {
        for e in 0..np {
            mean[e] += c[e] as f64 / x as f64 / nd;
        }
    }
    for c in &counts {
        for e in 0..np {
            variance[e] += (c[e] as f64 / x as f64 - mean[e]).powi(2) / nd;
        }
    }
    Ok(PatternCensus { f: f.name().to_string(), x, z, m, filter, d_values, counts, mean, variance, prediction: None })
}

impl PatternCensus {
    pub fn density(&self, d_index: usize, pattern: usize) -> f64 {
        self.counts[d_index][pattern] as f64 / self.x as f64
    }

    /// Share of the selected d whose density for `pattern` is within `tol` of `target`.
    pub fn fraction_within(&self, pattern: usize, target: f64, tol: f64) -> f64 {
        let hits = (0..self.counts.len()).filter(|&i| (self.density(i, pattern) - target).abs() <= tol).count();
        hits as f64 / self.counts.len().max(1) as f64
    }

    /// Attaches the bias and second-moment predictions for 4-term patterns.
    pub fn predict(&mut self, f: &MultFunc, q: u64, big_p: u64, params: &LocalParams) -> Result<()> {
        if self.m != 4 {
            return Err(Error::InvalidArgument("predictions are for 4-term patterns".into()));
        }
        let t = t_constants(f, q, big_p, params)?;
        let pats = SignPattern::all(4);
        let a_eps: Vec<f64> = pats.iter().map(|p| t.bias.a_eps(p)).collect();
        let density: Vec<f64> = a_eps.iter().map(|a| (1.0 + a) / 16.0).collect();
        let msq = pats.iter().map(|p| msq_prediction(&t, p)).collect();
        let nd = self.counts.len().max(1) as f64;
        let msq_empirical = (0..16)
            .map(|e| (0..self.counts.len()).map(|i| (self.density(i, e) - density[e]).powi(2)).sum::<f64>() / nd)
            .collect();
        self.prediction = Some(PatternPrediction { q, a_eps, density, t, msq, msq_empirical });
        Ok(())
    }

    /// `d,pattern,count` rows.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "d,pattern,count")?;
        for (d, c) in self.d_values.iter().zip(&self.counts) {
            for (e, n) in c.iter().enumerate() {
                writeln!(w, "{d},{e},{n}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BasicCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `max(0, rhs - lhs)` for the inequality as stated
    pub residual: f64,
    /// same with `A + B` replaced by `|sum w (a + b)| / H`, which the rotation argument proves
    pub aligned_rhs: f64,
    pub aligned_residual: f64,
}

pub fn basic_inequality_check(a: &[C64], b: &[C64], w: &[f64], x: f64) -> Result<BasicCheck> {
    if a.len() != b.len() || a.len() != w.len() || a.is_empty() {
        return Err(Error::InvalidArgument("a, b and w must be nonempty and of equal length".into()));
    }
    if w.iter().any(|&v| v <= 0.0) || a.iter().chain(b).any(|z| z.norm() > x * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument("weights must be positive and |a_j|, |b_j| <= X".into()));
    }
    let h: f64 = w.iter().sum();
    let sa: C64 = a.iter().zip(w).map(|(z, &v)| z * v).sum();
    let sb: C64 = b.iter().zip(w).map(|(z, &v)| z * v).sum();
    let lhs: f64 = a.iter().zip(b).zip(w).map(|((p, q), &v)| (p * q.conj()).re * v).sum();
    let (aa, bb) = (sa.norm() / h, sb.norm() / h);
    let rhs = (0.5 * (aa + bb).powi(2) - x) * h;
    let aligned_rhs = (0.5 * ((sa + sb).norm() / h).powi(2) - x) * h;
    let slack = 1e-12 * h * (1.0 + x);
    Ok(BasicCheck {
        lhs,
        rhs,
        residual: (rhs - lhs - slack).max(0.0),
        aligned_rhs,
        aligned_residual: (aligned_rhs - lhs - slack).max(0.0),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LogDensitySplit {
    pub d: u64,
    pub x: u64,
    /// `(S, H^{-1} sum_{n<=x} n^{-1} prod_{j in S} f(n + jd))` for the six pairs, with
    /// `H = sum_{n<=x} 1/n` so that `f = 1` gives exactly 1
    pub pairs: Vec<(Vec<usize>, f64)>,
    pub four_term: f64,
    /// `(1 - |four_term|) / 8`
    pub bound: f64,
}

pub fn logdens_decomposition(f: &MultFunc, d: u64, x: u64) -> Result<LogDensitySplit> {
    if x < 2 || d == 0 {
        return Err(Error::InvalidArgument("need x >= 2 and d >= 1".into()));
    }
    let bits = sign_bits(f, x + 3 * d)?;
    let sign = |n: usize| 1.0 - 2.0 * bits[n] as f64;
    let lx: f64 = (1..=x).map(|n| 1.0 / n as f64).sum();
    let du = d as usize;
    let corr = |s: &[usize]| -> f64 {
        (1..=x as usize).map(|n| s.iter().map(|&j| sign(n + j * du)).product::<f64>() / n as f64).sum::<f64>() / lx
    };
    let mut pairs = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            pairs.push((vec![i, j], corr(&[i, j])));
        }
    }
    let four_term = corr(&[0, 1, 2, 3]);
    Ok(LogDensitySplit { d, x, pairs, four_term, bound: (1.0 - four_term.abs()) / 8.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ext(q: u64) -> MultFunc {
        MultFunc::char_extended(&DirichletChar::real_primitive(q).unwrap())
    }

    #[test]
    fn patterns() {
        let p = SignPattern::new(&[1, 1, 1, -1]).unwrap();
        assert_eq!(p.index, 8);
        assert_eq!(p.product(), -1);
        assert_eq!(p.pair_sum(), 0);
        assert_eq!(p.label(), "+++-");
        assert_eq!(p.plus_count(), 3);
        assert_eq!(SignPattern::new(&[1, 1, 1, 1]).unwrap().pair_sum(), 6);
        assert!(SignPattern::new(&[1, 0, 1]).is_err());
    }

    #[test]
    fn curve_counts() {
        assert_eq!(ec_count(5, 2).unwrap(), (8, -2));
        assert_eq!(ec_count(7, 6).unwrap(), (8, 0));
        assert_eq!(LegendreCurve::for_progressions(5).unwrap().lambda, 2);
        assert_eq!(LegendreCurve::for_progressions(7).unwrap().lambda, 6);
        assert!(matches!(ec_count(7, 8), Err(Error::SingularCurve(1))));
        assert!(matches!(ec_count(7, 0), Err(Error::SingularCurve(0))));
        for p in primes_up_to(500).into_iter().filter(|&p| p > 3 && p % 4 == 1) {
            assert_eq!(LegendreCurve::for_progressions(p).unwrap().delta.rem_euclid(4), 2, "p={p}");
        }
    }

    #[test]
    fn identity_suite() {
        assert_eq!(blank_sum(5).unwrap().sum, 1);
        assert_eq!(blank_sum(7).unwrap().sum, -1);
        assert_eq!(jacobi_sum_check(5).unwrap().value, -1);
        assert_eq!(jacobi_sum_check(7).unwrap().value, 1);
        for p in primes_up_to(499).into_iter().filter(|&p| p >= 5) {
            assert_eq!(blank_sum(p).unwrap().residual, 0, "p={p}");
        }
        for p in primes_up_to(499).into_iter().filter(|&p| p >= 3) {
            assert_eq!(jacobi_sum_check(p).unwrap().residual, 0, "p={p}");
        }
    }

    #[test]
    fn elltrans_cases() {
        let c = elltrans_check(5).unwrap();
        assert_eq!((c.xi, c.formula), (8, 8));
        assert_eq!(c.unequal_nonzero, 0);
        let c = elltrans_check(35).unwrap();
        assert_eq!((c.xi, c.formula), (0, 0));
        let sys = ap_system(&[0, 1, 2, 3]).unwrap();
        let chis = vec![DirichletChar::real_primitive(5).unwrap(); 4];
        assert_eq!(char_factor(&[5, 1, 1, 1], &chis, &sys).unwrap().value.norm(), 0.0);
        assert!(elltrans_check(15).is_err());
    }

    #[test]
    fn triv23_vanishes() {
        for q in [5, 7, 11, 13, 35, 55] {
            for (s, v) in triv23_check(q).unwrap() {
                assert!(v.norm() < 1e-9, "q={q} S={s:?}: {v}");
            }
        }
    }

    #[test]
    fn bias_examples() {
        let params = LocalParams::default();
        let b = bias(&ext(5), 5, 1000, &params).unwrap();
        assert_eq!(b.local.value, 1.0);
        assert_eq!(b.curve_product, "1/3");
        assert!(b.warning.is_none());
        let minus = SignPattern::new(&[1, 1, 1, -1]).unwrap();
        assert!((b.a_eps(&minus) + 1.0 / 3.0).abs() < 1e-15);
        assert!((b.a_eps(&SignPattern::new(&[1, 1, 1, 1]).unwrap()) - 1.0 / 3.0).abs() < 1e-15);
        let b7 = bias(&ext(7), 7, 1000, &params).unwrap();
        assert_eq!(b7.a_eps(&minus), 0.0);
        assert!(bias(&ext(5), 15, 1000, &params).is_err());
        assert!(bias(&MultFunc::liouville(), 5, 100, &params).unwrap().warning.is_some());
    }

    #[test]
    fn second_moment_constants() {
        let t = t_constants(&ext(5), 5, 1000, &LocalParams::default()).unwrap();
        assert_eq!(t.t22_primes, "5/31");
        assert_eq!(t.t42_primes, "22/75");
        assert_eq!(t.t44_primes, "17/93");
        assert_eq!(t.t22, 5.0 / 31.0);
        let odd = SignPattern::new(&[1, 1, 1, -1]).unwrap();
        assert!((msq_prediction(&t, &odd) - 20.0 / 71424.0).abs() < 1e-15);
        // supersingular prime: the cancelled form stays finite
        let t7 = t_constants(&ext(7), 7, 1000, &LocalParams::default()).unwrap();
        assert!(t7.t44.is_finite());
        assert_eq!(t7.t44_primes, "7/57");
    }

    fn pair_systems() -> Vec<FormSystem> {
        let pairs = [[0u64, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
        let mut out = Vec::new();
        for s in &pairs {
            for t in &pairs {
                out.push(ap_system2(s, t).unwrap());
            }
        }
        out
    }

    #[test]
    fn local_products_off_six_do_not_depend_on_the_pair_system() {
        // ±1 valued, pretending to be chi_5, with nontrivial factors at 7 and 11
        let f = ext(5).times(&MultFunc::liouville().localize(7)).times(&MultFunc::liouville().localize(11));
        let fc = f_times_char(&f, 5).unwrap();
        let params = LocalParams { tol: 1e-10, ..Default::default() };
        let vals: Vec<f64> =
            pair_systems().iter().map(|sys| local_product(&fc, sys, 5, 1000, &params).unwrap().value).collect();
        assert!((vals[0] - 1.0).abs() > 1e-3);
        for v in &vals {
            assert!((v - vals[0]).abs() < 1e-6, "{vals:?}");
        }
    }

    #[test]
    fn two_adic_factor_depends_on_the_pair_system() {
        let lam = vec![MultFunc::liouville(); 4];
        let params = LocalParams { tol: 1e-6, ..Default::default() };
        let systems = [([0u64, 1], [0u64, 1]), ([0, 2], [0, 1]), ([0, 2], [1, 3]), ([0, 3], [0, 1])];
        let mut vals: Vec<f64> = systems
            .iter()
            .map(|(s, t)| {
                let ls = LocalSystem::new(&ap_system2(s, t).unwrap()).unwrap();
                local_average_tree(&ls, &lam, 2, &params).unwrap().value.re
            })
            .collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup_by(|a, b| (*a - *b).abs() < 1e-4);
        assert_eq!(vals.len(), 3, "{vals:?}");
    }

    #[test]
    fn census_partition_and_expansion() {
        let f = MultFunc::liouville();
        let c = census(&f, 3000, 40, 4, DFilter::All).unwrap();
        for row in &c.counts {
            assert_eq!(row.iter().sum::<u64>(), 3000);
        }
        let bits = sign_bits(&f, 10_000 + 3 * 7).unwrap();
        for m in [3, 4] {
            for d in [1, 7] {
                assert_eq!(count_patterns(&bits, 10_000, d, m), count_patterns_by_expansion(&bits, 10_000, d, m));
            }
        }
        assert!(sign_bits(&MultFunc::from_char(&DirichletChar::real_primitive(5).unwrap()), 10).is_err());
        let c = census(&f, 1000, 30, 3, DFilter::Multiple(5)).unwrap();
        assert_eq!(c.d_values, vec![5, 10, 15, 20, 25, 30]);
    }

    #[test]
    fn basic_inequality_examples() {
        let a: Vec<C64> = (0..5).map(|j| C64::from_polar(1.0, j as f64)).collect();
        let c = basic_inequality_check(&a, &a, &[1.0; 5], 1.0).unwrap();
        assert!((c.lhs - 5.0).abs() < 1e-12 && c.rhs <= c.lhs && c.residual == 0.0);
        // a single opposite pair breaks the inequality as stated but not the aligned form
        let c = basic_inequality_check(&[C64::new(1.0, 0.0)], &[C64::new(-1.0, 0.0)], &[1.0], 1.0).unwrap();
        assert_eq!((c.lhs, c.rhs), (-1.0, 1.0));
        assert!(c.residual > 0.0);
        assert_eq!(c.aligned_residual, 0.0);
    }

    #[test]
    fn logdens_trivial_function() {
        let r = logdens_decomposition(&MultFunc::one(), 1, 1000).unwrap();
        assert!((r.four_term - 1.0).abs() < 1e-12);
        assert!(r.bound.abs() < 1e-12);
    }
}
