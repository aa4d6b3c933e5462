use super::{DirichletChar, C64};
use crate::arith::{factorize, SpfSieve};
use crate::error::{Error, Result};
use std::sync::Arc;

type PpOracle = Arc<dyn Fn(u64, u32) -> C64 + Send + Sync>;

/// A multiplicative function given by its values on prime powers.
#[derive(Clone)]
pub struct MultFunc {
    name: String,
    completely: bool,
    pp: PpOracle,
}

impl std::fmt::Debug for MultFunc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultFunc").field("name", &self.name).field("completely", &self.completely).finish()
    }
}

impl MultFunc {
    pub fn new(
        name: impl Into<String>,
        completely: bool,
        pp: impl Fn(u64, u32) -> C64 + Send + Sync + 'static,
    ) -> Self {
        MultFunc { name: name.into(), completely, pp: Arc::new(pp) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_completely_multiplicative(&self) -> bool {
        self.completely
    }

    /// Value at `p^k`; `k = 0` gives 1.
    pub fn pp(&self, p: u64, k: u32) -> C64 {
        if k == 0 {
            C64::new(1.0, 0.0)
        } else {
            (self.pp)(p, k)
        }
    }

    pub fn eval(&self, n: u64) -> C64 {
        assert!(n >= 1, "multiplicative functions live on n >= 1");
        factorize(n)
            .expect("n >= 1")
            .factors
            .iter()
            .fold(C64::new(1.0, 0.0), |acc, pp| acc * self.pp(pp.p, pp.k))
    }

    /// `f(0..=n)` with index 0 set to 0, evaluated through a smallest-prime-factor sieve.
    pub fn bulk_eval(&self, n: u64) -> Vec<C64> {
        let sieve = SpfSieve::new(n.max(1));
        self.bulk_eval_with(&sieve, n)
    }

    pub fn bulk_eval_with(&self, sieve: &SpfSieve, n: u64) -> Vec<C64> {
        assert!(n <= sieve.bound());
        let n = n as usize;
        let mut out = vec![C64::new(0.0, 0.0); n + 1];
        if n == 0 {
            return out;
        }
        out[1] = C64::new(1.0, 0.0);
        // exponent of the least prime and the cofactor with that prime removed
        let mut exp = vec![0u32; n + 1];
        let mut rest = vec![0u32; n + 1];
        let mut cache: std::collections::HashMap<(u64, u32), C64> = std::collections::HashMap::new();
        for i in 2..=n {
            let p = sieve.spf(i as u64) as usize;
            let m = i / p;
            if m % p == 0 {
                exp[i] = exp[m] + 1;
                rest[i] = rest[m];
            } else {
                exp[i] = 1;
                rest[i] = m as u32;
            }
            let key = (p as u64, exp[i]);
            let v = *cache.entry(key).or_insert_with(|| (self.pp)(key.0, key.1));
            out[i] = out[rest[i] as usize] * v;
        }
        out
    }

    pub fn one() -> Self {
        MultFunc::new("one", true, |_, _| C64::new(1.0, 0.0))
    }

    pub fn liouville() -> Self {
        MultFunc::new("liouville", true, |_, k| C64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
    }

    pub fn mobius_squared() -> Self {
        MultFunc::new("mobius-squared", false, |_, k| C64::new(if k == 1 { 1.0 } else { 0.0 }, 0.0))
    }

    /// The character itself, vanishing on primes dividing its modulus.
    pub fn from_char(chi: &DirichletChar) -> Self {
        let chi = chi.clone();
        let name = format!("char:{}", chi.label());
        MultFunc::new(name, true, move |p, k| chi.eval(p as i64).powu(k))
    }

    /// `chi` on primes not dividing the modulus, 1 on powers of primes that do.
    pub fn char_extended(chi: &DirichletChar) -> Self {
        let chi = chi.clone();
        let q = chi.modulus();
        let name = format!("char-extended:{}", chi.label());
        MultFunc::new(name, false, move |p, k| {
            if q % p == 0 {
                C64::new(1.0, 0.0)
            } else {
                chi.eval(p as i64).powu(k)
            }
        })
    }

    /// `n -> chi(n) n^{it}`.
    pub fn char_twist(chi: &DirichletChar, t: f64) -> Self {
        let chi = chi.clone();
        let name = format!("twist:{}:t={t}", chi.label());
        MultFunc::new(name, true, move |p, k| {
            chi.eval(p as i64).powu(k) * C64::from_polar(1.0, t * k as f64 * (p as f64).ln())
        })
    }

    /// The function `f_p`: `f` at powers of `p`, 1 at every other prime power.
    pub fn localize(&self, p: u64) -> Self {
        let base = self.clone();
        MultFunc::new(format!("{}@{p}", self.name), self.completely, move |q, k| {
            if q == p {
                base.pp(q, k)
            } else {
                C64::new(1.0, 0.0)
            }
        })
    }

    pub fn conj(&self) -> Self {
        let base = self.clone();
        MultFunc::new(format!("conj({})", self.name), self.completely, move |p, k| base.pp(p, k).conj())
    }

    /// Pointwise product, again multiplicative.
    pub fn times(&self, other: &MultFunc) -> Self {
        let (a, b) = (self.clone(), other.clone());
        MultFunc::new(
            format!("{}*{}", self.name, other.name),
            self.completely && other.completely,
            move |p, k| a.pp(p, k) * b.pp(p, k),
        )
    }

    /// Values at `p^0..=p^kmax`.
    pub fn local_values(&self, p: u64, kmax: u32) -> Vec<C64> {
        (0..=kmax).map(|k| self.pp(p, k)).collect()
    }
}

/// Resolves registry names: `liouville`, `mobius-squared`, `one`,
/// `char-real:q`, `char-extended:q`.
pub fn from_registry(name: &str) -> Result<MultFunc> {
    let name = name.trim();
    match name {
        "liouville" => return Ok(MultFunc::liouville()),
        "mobius-squared" => return Ok(MultFunc::mobius_squared()),
        "one" => return Ok(MultFunc::one()),
        _ => {}
    }
    let parse_q = |s: &str| s.parse::<u64>().map_err(|_| Error::UnknownFunction(name.to_string()));
    if let Some(q) = name.strip_prefix("char-real:") {
        let chi = DirichletChar::real_primitive(parse_q(q)?)?;
        return Ok(MultFunc::from_char(&chi).renamed(name));
    }
    if let Some(q) = name.strip_prefix("char-extended:") {
        let chi = DirichletChar::real_primitive(parse_q(q)?)?;
        return Ok(MultFunc::char_extended(&chi).renamed(name));
    }
    Err(Error::UnknownFunction(name.to_string()))
}

impl MultFunc {
    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }
}

/// `F(n) = f(n) conj(chi(n)) n^{-it}` for `(n, q) = 1` and `F(n) = 1` otherwise.
#[derive(Clone, Debug)]
pub struct TwistedFunc {
    pub base: MultFunc,
    pub chi: DirichletChar,
    pub t: f64,
}

impl TwistedFunc {
    pub fn new(base: MultFunc, chi: DirichletChar, t: f64) -> Self {
        TwistedFunc { base, chi, t }
    }

    pub fn eval(&self, n: u64) -> C64 {
        use num_integer::Integer;
        if n.gcd(&self.chi.modulus()) != 1 {
            return C64::new(1.0, 0.0);
        }
        self.base.eval(n) * self.chi.eval(n as i64).conj() * C64::from_polar(1.0, -self.t * (n as f64).ln())
    }

    /// The multiplicative function agreeing with `eval` on every prime power
    /// and on every `n` coprime to the modulus.
    pub fn as_mult_func(&self) -> MultFunc {
        let (f, chi, t) = (self.base.clone(), self.chi.clone(), self.t);
        let q = chi.modulus();
        MultFunc::new(format!("F[{}]", f.name()), false, move |p, k| {
            if q % p == 0 {
                C64::new(1.0, 0.0)
            } else {
                f.pp(p, k) * chi.eval(p as i64).powu(k).conj() * C64::from_polar(1.0, -t * k as f64 * (p as f64).ln())
            }
        })
    }
}
