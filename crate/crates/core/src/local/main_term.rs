use super::arch::{arch_integral, ArchIntegral, QuadParams};
use super::average::euler_factor;
use super::charfactor::char_factor;
use super::padic::{tree_sum_to_tol, LocalSystem, TreeInput};
use super::LocalParams;
use crate::arith::{factorize, primes_up_to, valuation};
use crate::error::{Error, Result};
use crate::forms::{BoxSpec, FormSystem};
use crate::multfunc::{distance_star, DirichletChar, MultFunc, TwistedFunc, C64};
use crate::output::{f64_or_inf, Provenance};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

#[derive(Clone, Debug, Serialize)]
pub struct MainTermParams {
    pub local: LocalParams,
    pub quad: QuadParams,
    /// exponent `B` in the appropriateness condition
    pub b: f64,
    /// defaults to `max(max q_j + 1, 10)`, capped at `X`
    pub y: Option<u64>,
    pub vector_cap: usize,
    pub check_appropriate: bool,
}

impl Default for MainTermParams {
    fn default() -> Self {
        MainTermParams {
            local: LocalParams::default(),
            quad: QuadParams::default(),
            b: 0.5,
            y: None,
            vector_cap: 20_000,
            check_appropriate: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularSeries {
    /// normalized by the root density
    pub value: C64,
    /// `R(q_1 a_1, ..., q_k a_k)` of the homogeneous system
    pub r_qa: f64,
    /// bound on the pruned relative mass, summed over primes
    pub pruned: f64,
    pub factors: Vec<(u64, C64)>,
}

/// `F_j` as multiplicative functions, one per form.
pub fn twisted(fs: &[MultFunc], chis: &[DirichletChar], ts: &[f64]) -> Vec<MultFunc> {
    fs.iter()
        .zip(chis)
        .zip(ts)
        .map(|((f, c), &t)| TwistedFunc::new(f.clone(), c.clone(), t).as_mult_func())
        .collect()
}

fn r_homogeneous(ls: &LocalSystem, m: &[u64]) -> Result<f64> {
    let mut primes: Vec<u64> = Vec::new();
    for &x in m {
        primes.extend(factorize(x)?.primes());
    }
    primes.sort_unstable();
    primes.dedup();
    let mut r = 1.0;
    for p in primes {
        let exps: Vec<u32> = m.iter().map(|&x| valuation(x as u128, p as u128)).collect();
        match ls.density_exp(p, &exps, true)? {
            None => return Ok(0.0),
            Some(s) => r *= (p as f64).powi(-(s as i32)),
        }
    }
    Ok(r)
}

type FactorCache = HashMap<(u64, Vec<u32>), Option<(C64, f64)>>;

fn singular_series_inner(
    ls: &LocalSystem,
    big_f: &[MultFunc],
    q: &[u64],
    a: &[u64],
    y: u64,
    params: &LocalParams,
    cache: &mut FactorCache,
) -> Result<SingularSeries> {
    let qa: Vec<u64> = q.iter().zip(a).map(|(x, y)| x * y).collect();
    let r_qa = r_homogeneous(ls, &qa)?;
    let mut value = C64::new(1.0, 0.0);
    let mut pruned = 0.0;
    let mut factors = Vec::new();
    for p in primes_up_to(y) {
        let alpha: Vec<u32> = qa.iter().map(|&m| valuation(m as u128, p as u128)).collect();
        let free: Vec<bool> = q.iter().map(|&m| m % p != 0).collect();
        if free.iter().all(|&b| !b) {
            factors.push((p, C64::new(1.0, 0.0)));
            continue;
        }
        // the factor depends on a only through the valuation vector at p
        let key = (p, alpha.clone());
        let entry = match cache.get(&key) {
            Some(e) => *e,
            None => {
                let fv = |j: usize, nu: u32| big_f[j].pp(p, nu);
                let inp =
                    TreeInput { sys: ls, p, homogeneous: true, alpha: &alpha, free: &free, fval: &fv, max_depth: params.nu_max };
                let s = tree_sum_to_tol(&inp, params.tol)?;
                let e = if s.base == 0.0 { None } else { Some(s.normalized()) };
                cache.insert(key, e);
                e
            }
        };
        let Some((v, miss)) = entry else {
            return Ok(SingularSeries { value: C64::new(0.0, 0.0), r_qa: 0.0, pruned, factors });
        };
        value *= v;
        pruned += miss;
        factors.push((p, v));
    }
    Ok(SingularSeries { value, r_qa, pruned, factors })
}

/// The y-smooth divisor sum for the vector `a`, evaluated as an Euler product over `p <= y`.
pub fn singular_series(
    a: &[u64],
    y: u64,
    fs: &[MultFunc],
    system: &FormSystem,
    chis: &[DirichletChar],
    ts: &[f64],
    params: &LocalParams,
) -> Result<SingularSeries> {
    let k = system.k();
    if a.len() != k || fs.len() != k || chis.len() != k || ts.len() != k {
        return Err(Error::InvalidArgument("need one a_j, f_j, chi_j and t_j per form".into()));
    }
    if y < 2 {
        return Err(Error::InvalidArgument(format!("singular series needs y >= 2, got {y}")));
    }
    let q: Vec<u64> = chis.iter().map(|c| c.modulus()).collect();
    for j in 0..k {
        if a[j] == 0 || factorize(a[j])?.primes().any(|p| q[j] % p != 0) {
            return Err(Error::InvalidArgument(format!("rad(a_{j}) must divide q_{j}")));
        }
    }
    let ls = LocalSystem::new(system)?;
    singular_series_inner(&ls, &twisted(fs, chis, ts), &q, a, y, params, &mut HashMap::new())
}

#[derive(Clone, Debug, Serialize)]
pub struct ATerm {
    pub a: Vec<u64>,
    /// `prod f_j(a_j) a_j^{-i t_j}`
    pub f_factor: C64,
    pub r_density: f64,
    pub xi: C64,
    pub admissible: u64,
    pub coprime: u64,
    pub s_a: C64,
    /// full contribution to the assembled value
    pub term: C64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorBudget {
    pub dstar: Vec<f64>,
    pub log_term: f64,
    pub moduli_factor: Vec<f64>,
    #[serde(serialize_with = "f64_or_inf")]
    pub distance_term: f64,
    pub lcm_sum: f64,
    #[serde(serialize_with = "f64_or_inf")]
    pub box_term: f64,
    pub smooth_term: f64,
    /// the `1/log y` relative factor, reported separately
    pub relative: f64,
    #[serde(serialize_with = "f64_or_inf")]
    pub total: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunParams {
    pub y: u64,
    pub height: u64,
    pub a: f64,
    pub b: f64,
    pub b_prime: f64,
    pub big_x: f64,
    pub ax: u64,
    pub x_minus: f64,
    pub moduli: Vec<u64>,
    pub t: Vec<f64>,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MainTermReport {
    /// general assembly with the singular series inside the a-sum
    pub value: C64,
    /// equal-moduli assembly with the full product over `p <= AX`, `p` not dividing `q`
    pub equal_moduli_value: Option<C64>,
    pub a_terms: Vec<ATerm>,
    /// `sum_a prod f_j(a_j) a_j^{-it_j} R(qa) Xi_a`
    pub a_sum: C64,
    pub a_sum_tail: f64,
    pub arch: ArchIntegral,
    pub euler_low: C64,
    pub euler_high: C64,
    pub euler_pruned: f64,
    pub p_factors: Vec<C64>,
    pub budget: ErrorBudget,
    pub params: RunParams,
    pub provenance: Provenance,
}

/// Vectors `a` with `rad(a_j) | q_j` and `prod a_j <= cap`.
fn radical_vectors(q: &[u64], cap: u64) -> Result<Vec<Vec<u64>>> {
    let per: Vec<Vec<u64>> = q
        .iter()
        .map(|&m| -> Result<Vec<u64>> {
            let ps: Vec<u64> = factorize(m)?.primes().collect();
            let mut vals = vec![1u64];
            for p in ps {
                let mut more = Vec::new();
                for &v in &vals {
                    let mut x = v;
                    while let Some(n) = x.checked_mul(p).filter(|&n| n <= cap) {
                        more.push(n);
                        x = n;
                    }
                }
                vals.extend(more);
            }
            vals.sort_unstable();
            Ok(vals)
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    fn go(per: &[Vec<u64>], j: usize, prod: u64, cap: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if j == per.len() {
            out.push(cur.clone());
            return;
        }
        for &v in &per[j] {
            let Some(np) = prod.checked_mul(v).filter(|&n| n <= cap) else { break };
            cur.push(v);
            go(per, j + 1, np, cap, cur, out);
            cur.pop();
        }
    }
    go(&per, 0, 1, cap, &mut Vec::new(), &mut out);
    Ok(out)
}

/// `sum over a with rad(a_j) | q_j of 1 / lcm(a)`, as an Euler product.
fn lcm_sum(q: &[u64]) -> Result<f64> {
    let mut primes: Vec<u64> = Vec::new();
    for &m in q {
        primes.extend(factorize(m)?.primes());
    }
    primes.sort_unstable();
    primes.dedup();
    let mut total = 1.0;
    for p in primes {
        let m = q.iter().filter(|&&x| x % p == 0).count() as i32;
        // vectors in N^m with maximum exactly M number (M+1)^m - M^m
        let mut s = 0.0;
        let mut w = 1.0;
        for big_m in 0..4000 {
            let mf = big_m as f64;
            let term = ((mf + 1.0).powi(m) - mf.powi(m)) * w;
            s += term;
            if term < 1e-17 * s && big_m > 10 {
                break;
            }
            w /= p as f64;
        }
        total *= s;
    }
    Ok(total)
}

/// Product of `M_p(F, L)` over the given primes, with the summed pruning bound.
fn euler_product(ls: &LocalSystem, big_f: &[MultFunc], primes: &[u64], tol: f64, nu_max: u32) -> Result<(C64, f64)> {
    let k = ls.k;
    let alpha = vec![0u32; k];
    let free = vec![true; k];
    // small primes are the expensive ones, so they get the larger share of the tolerance
    let weight: f64 = primes.iter().map(|&p| 1.0 / p as f64).sum();
    let mut prod = C64::new(1.0, 0.0);
    let mut pruned = 0.0;
    for &p in primes {
        let fv = |j: usize, nu: u32| big_f[j].pp(p, nu);
        let inp = TreeInput { sys: ls, p, homogeneous: false, alpha: &alpha, free: &free, fval: &fv, max_depth: nu_max };
        let s = tree_sum_to_tol(&inp, (tol / (p as f64 * weight)).max(1e-17))?;
        prod *= s.value;
        pruned += s.missing;
    }
    Ok((prod, pruned))
}

/// Assembles the main term and its explicit error budget.
pub fn main_term(
    fs: &[MultFunc],
    chis: &[DirichletChar],
    ts: &[f64],
    system: &FormSystem,
    bx: &BoxSpec,
    params: &MainTermParams,
) -> Result<MainTermReport> {
    let k = system.k();
    if fs.len() != k || chis.len() != k || ts.len() != k {
        return Err(Error::InvalidArgument(format!("need {k} functions, characters and twists")));
    }
    if bx.l() != system.l() {
        return Err(Error::InvalidArgument(format!("box has {} sides for {} variables", bx.l(), system.l())));
    }
    system.require_primitive()?;
    if let Some(c) = chis.iter().find(|c| !c.is_primitive()) {
        return Err(Error::NotPrimitive(format!("character {} has conductor {}", c.label(), c.conductor())));
    }
    let height = system.height();
    let a_height = height.max(2) as f64;
    let (b, b_prime) = (params.b, (params.b / 2.0).min(1.0));
    if params.check_appropriate {
        bx.require_appropriate(a_height, b)?;
    }
    let big_x = bx.big_x();
    let q: Vec<u64> = chis.iter().map(|c| c.modulus()).collect();
    let q_max = *q.iter().max().expect("k >= 1");
    let y = params.y.unwrap_or_else(|| (q_max + 1).max(10).min(big_x.floor() as u64));
    if y <= q_max || y as f64 > big_x || y < 2 {
        return Err(Error::YOutOfRange { y: y as f64, q_max, x: big_x });
    }
    let ax = (a_height * big_x).floor() as u64;
    let tol = params.local.tol;

    let ls = LocalSystem::new(system)?;
    let big_f = twisted(fs, chis, ts);
    let arch = arch_integral(system, bx, ts, &params.quad)?;

    // a-sum, grown until the exact uncovered mass is below tolerance
    let mut cache: BTreeMap<Vec<u64>, (C64, f64, super::charfactor::CharFactor)> = BTreeMap::new();
    let mut cap = 1u64;
    let tail = loop {
        let vecs = radical_vectors(&q, cap)?;
        if vecs.len() > params.vector_cap {
            let covered: f64 = cache.values().map(|(_, r, x)| r * x.coprime as f64).sum();
            return Err(Error::TruncationFailure { tail: 1.0 - covered, terms: vecs.len(), cap: params.vector_cap });
        }
        for a in vecs {
            if cache.contains_key(&a) {
                continue;
            }
            let qa: Vec<u64> = q.iter().zip(&a).map(|(x, y)| x * y).collect();
            let r = r_homogeneous(&ls, &qa)?;
            let xi = char_factor(&a, chis, system)?;
            let mut ff = C64::new(1.0, 0.0);
            for j in 0..k {
                ff *= fs[j].eval(a[j]) * C64::from_polar(1.0, -ts[j] * (a[j] as f64).ln());
            }
            cache.insert(a, (ff, r, xi));
        }
        let covered: f64 = cache.values().map(|(_, r, x)| r * x.coprime as f64).sum();
        let tail = (1.0 - covered).max(0.0);
        if tail <= tol || q_max == 1 {
            break tail;
        }
        cap = cap.checked_mul(4).ok_or(Error::Overflow("a-sum cap"))?;
    };

    let all_primes = primes_up_to(ax.max(2));
    let high: Vec<u64> = all_primes.iter().copied().filter(|&p| p > y).collect();
    let low: Vec<u64> = all_primes.iter().copied().filter(|&p| p <= y && q.iter().all(|&m| m % p != 0)).collect();
    let (euler_high, pruned_high) = euler_product(&ls, &big_f, &high, tol, params.local.nu_max)?;
    let (euler_low, pruned_low) = euler_product(&ls, &big_f, &low, tol, params.local.nu_max)?;

    let mut factor_cache = FactorCache::new();
    let mut a_terms = Vec::with_capacity(cache.len());
    let mut a_sum = C64::new(0.0, 0.0);
    let mut value = C64::new(0.0, 0.0);
    for (a, (ff, r, xi)) in &cache {
        let core = ff * *r * xi.value;
        a_sum += core;
        let s_a = if core.norm() == 0.0 {
            C64::new(0.0, 0.0)
        } else {
            singular_series_inner(&ls, &big_f, &q, a, y, &params.local, &mut factor_cache)?.value
        };
        let term = core * arch.value * s_a * euler_high;
        value += term;
        a_terms.push(ATerm {
            a: a.clone(),
            f_factor: *ff,
            r_density: *r,
            xi: xi.value,
            admissible: xi.admissible,
            coprime: xi.coprime,
            s_a,
            term,
        });
    }
    let equal = q.iter().all(|&m| m == q[0]);
    let equal_moduli_value = equal.then(|| a_sum * arch.value * euler_low * euler_high);

    let p_factors = big_f.iter().map(|f| euler_factor(f, y, ax.max(y), tol)).collect::<Result<Vec<_>>>()?;

    // error budget, absolute constants dropped
    let log_term = big_x.ln().powf(-b_prime);
    let mut dstar = Vec::with_capacity(k);
    let mut moduli_factor = Vec::with_capacity(k);
    let mut distance_term = 0.0;
    for j in 0..k {
        let g = MultFunc::char_twist(&chis[j], ts[j]);
        let d = distance_star(&fs[j], &g, y, ax.max(y))?;
        let mf: f64 = factorize(q[j])?.primes().map(|p| 1.0 / (1.0 - (p as f64).powf(-0.5))).product();
        distance_term += mf * (d + log_term);
        dstar.push(d);
        moduli_factor.push(mf);
    }
    let ls_sum = lcm_sum(&q)?;
    let yf = y as f64;
    let growth = (3.0 * k as f64 * yf / yf.ln()).exp();
    let qt: f64 = q.iter().zip(ts).map(|(&m, &t)| m as f64 * t.abs().max(1.0)).product();
    let box_term = (a_height + growth * ls_sum * qt) / bx.x_minus();
    let smooth_term = yf.ln().powi(2) / yf.sqrt();
    let budget = ErrorBudget {
        dstar,
        log_term,
        moduli_factor,
        distance_term,
        lcm_sum: ls_sum,
        box_term,
        smooth_term,
        relative: 1.0 / yf.ln(),
        total: distance_term + box_term + smooth_term,
    };

    Ok(MainTermReport {
        value,
        equal_moduli_value,
        a_terms,
        a_sum,
        a_sum_tail: tail,
        arch,
        euler_low,
        euler_high,
        euler_pruned: pruned_high + pruned_low,
        p_factors,
        budget,
        params: RunParams {
            y,
            height,
            a: a_height,
            b,
            b_prime,
            big_x,
            ax,
            x_minus: bx.x_minus(),
            moduli: q,
            t: ts.to_vec(),
            tol,
        },
        provenance: Provenance {
            functions: fs.iter().map(|f| f.name().to_string()).collect(),
            system: system.render(),
            sides: bx.x.clone(),
        },
    })
}
