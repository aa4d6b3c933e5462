use super::padic::{tree_sum_to_tol, LocalSystem, TreeInput};
use super::LocalParams;
use crate::arith::{is_prime, primes_up_to, valuation};
use crate::error::{Error, Result};
use crate::forms::{AffineForm, FormSystem};
use crate::multfunc::{MultFunc, C64};
use serde::Serialize;

/// Number of `b in (Z/p^k)^l` with `p^k | L(b)`, which is `p^{k(l-1)}` for a primitive form.
pub fn omega_l(form: &AffineForm, p: u64, k: u32) -> Result<u64> {
    if !form.is_primitive() {
        return Err(Error::NotPrimitive(format!("coefficient gcd is {}", form.content())));
    }
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    let l = form.coeffs.len() as u32;
    p.checked_pow(k * (l - 1)).ok_or(Error::Overflow("p^{k(l-1)}"))
}

/// Brute-force count behind [`omega_l`], for `p^k` small.
pub fn omega_l_enumerate(form: &AffineForm, p: u64, k: u32) -> u64 {
    let m = p.pow(k);
    let l = form.coeffs.len();
    let mut b = vec![0u64; l];
    let mut count = 0;
    loop {
        let v = form.coeffs.iter().zip(&b).fold(form.constant % m, |acc, (a, x)| (acc + a % m * x) % m);
        if v == 0 {
            count += 1;
        }
        let Some(i) = (0..l).find(|&i| b[i] + 1 < m) else { break };
        b[i] += 1;
        b[..i].iter_mut().for_each(|x| *x = 0);
    }
    count
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LocalAverage {
    pub value: C64,
    /// bound on the pruned or unresolved mass
    pub bound: f64,
    pub nodes: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DualAverage {
    pub p: u64,
    pub tree: LocalAverage,
    pub refine: LocalAverage,
}

impl DualAverage {
    pub fn discrepancy(&self) -> f64 {
        (self.tree.value - self.refine.value).norm()
    }
}

fn check_inputs(fs: &[MultFunc], system: &FormSystem, p: u64) -> Result<()> {
    if fs.len() != system.k() {
        return Err(Error::InvalidArgument(format!("{} functions for {} forms", fs.len(), system.k())));
    }
    if !is_prime(p) {
        return Err(Error::InvalidArgument(format!("{p} is not prime")));
    }
    system.require_primitive()
}

/// Local average at `p` by summing over valuation vectors with exact densities.
pub fn local_average_tree(ls: &LocalSystem, fs: &[MultFunc], p: u64, params: &LocalParams) -> Result<LocalAverage> {
    let fval = |j: usize, nu: u32| fs[j].pp(p, nu);
    let alpha = vec![0u32; ls.k];
    let free = vec![true; ls.k];
    let inp = TreeInput { sys: ls, p, homogeneous: false, alpha: &alpha, free: &free, fval: &fval, max_depth: params.nu_max };
    let s = tree_sum_to_tol(&inp, params.tol)?;
    Ok(LocalAverage { value: s.value, bound: s.missing, nodes: s.nodes })
}

/// Local average at `p` by refining residue classes `n mod p^i` until at most one
/// form is still undecided on each class.
pub fn local_average_refine(system: &FormSystem, fs: &[MultFunc], p: u64, params: &LocalParams) -> Result<LocalAverage> {
    let (k, l) = (system.k(), system.l());
    let pf = p as f64;
    let rows: Vec<Vec<i128>> = system.forms.iter().map(|f| f.coeffs.iter().map(|&a| a as i128).collect()).collect();
    let consts: Vec<i128> = system.forms.iter().map(|f| f.constant as i128).collect();
    // sum_{s>=0} (1 - 1/p) p^{-s} f(p^{i+s}) for a form that is uniform on p^i Z_p
    let tail_cut = params.tol * 1e-3;
    let smax = ((1.0 / tail_cut).ln() / pf.ln()).ceil() as u32 + 1;
    let uniform_tail = |j: usize, i: u32| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        let mut w = 1.0 - 1.0 / pf;
        for s in 0..smax {
            acc += fs[j].pp(p, i + s) * w;
            w /= pf;
        }
        acc
    };
    let tail_err = pf.powi(-(smax as i32));

    // pending classes at the current level: representative n mod p^i
    let mut level: Vec<Vec<i128>> = vec![vec![0; l]];
    let mut value = C64::new(0.0, 0.0);
    let mut bound = 0.0;
    let mut nodes = 0usize;
    let mut i = 0u32;
    let children: Vec<Vec<i128>> = {
        let mut out = Vec::new();
        let mut c = vec![0i128; l];
        loop {
            out.push(c.clone());
            let Some(r) = (0..l).find(|&r| c[r] + 1 < p as i128) else { break };
            c[r] += 1;
            c[..r].iter_mut().for_each(|x| *x = 0);
        }
        out
    };
    loop {
        let pi = (p as i128).checked_pow(i).ok_or(Error::Overflow("p^i in refinement"))?;
        let weight = pf.powi(-((i as i32) * l as i32));
        let mut next = Vec::new();
        for n0 in &level {
            nodes += 1;
            let mut prod = C64::new(1.0, 0.0);
            let mut open = Vec::new();
            for j in 0..k {
                let v = rows[j].iter().zip(n0).fold(consts[j], |acc, (a, x)| acc + a * x);
                let r = v.rem_euclid(pi);
                if r == 0 {
                    open.push(j);
                } else {
                    prod *= fs[j].pp(p, valuation(r as u128, p as u128));
                }
            }
            match open.len() {
                0 => value += prod * weight,
                1 => {
                    value += prod * uniform_tail(open[0], i) * weight;
                    bound += tail_err * weight;
                }
                _ => next.push(n0.clone()),
            }
        }
        let open_mass = next.len() as f64 * weight;
        if next.is_empty() {
            break;
        }
        if open_mass <= params.tol * 0.5 {
            bound += open_mass;
            break;
        }
        if i + 1 > params.m_max || next.len().saturating_mul(children.len()) > params.node_cap {
            return Err(Error::NoConvergence { p, missing: open_mass });
        }
        level = next
            .iter()
            .flat_map(|n0| children.iter().map(move |c| n0.iter().zip(c).map(|(a, b)| a + pi * b).collect()))
            .collect();
        i += 1;
    }
    Ok(LocalAverage { value, bound, nodes })
}

/// Both local-average algorithms at `p`.
pub fn local_average(fs: &[MultFunc], system: &FormSystem, p: u64, params: &LocalParams) -> Result<DualAverage> {
    check_inputs(fs, system, p)?;
    let ls = LocalSystem::new(system)?;
    Ok(DualAverage {
        p,
        tree: local_average_tree(&ls, fs, p, params)?,
        refine: local_average_refine(system, fs, p, params)?,
    })
}

/// `prod_{y < p <= x} (1 - 1/p)(1 + sum_k f(p^k) p^{-k})`.
pub fn euler_factor(f: &MultFunc, y: u64, x: u64, tol: f64) -> Result<C64> {
    if y < 2 || y > x {
        return Err(Error::InvalidArgument(format!("euler factor needs 2 <= y <= x, got y={y}, x={x}")));
    }
    let mut prod = C64::new(1.0, 0.0);
    for p in primes_up_to(x).into_iter().filter(|&p| p > y) {
        prod *= euler_local(f, p, tol);
    }
    Ok(prod)
}

pub(crate) fn euler_local(f: &MultFunc, p: u64, tol: f64) -> C64 {
    let pf = p as f64;
    let mut s = C64::new(1.0, 0.0);
    let mut w = 1.0;
    let mut kk = 1;
    // the tail beyond p^-k is at most p^-k / (1 - 1/p)
    while w / pf > tol * (1.0 - 1.0 / pf) {
        w /= pf;
        s += f.pp(p, kk) * w;
        kk += 1;
    }
    s * (1.0 - 1.0 / pf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{ap_system, parse_system};
    use crate::multfunc::DirichletChar;

    fn params() -> LocalParams {
        LocalParams::default()
    }

    #[test]
    fn omega_examples() {
        let f2 = AffineForm::new(0, vec![1, 1]);
        assert_eq!(omega_l(&f2, 3, 1).unwrap(), 3);
        assert_eq!(omega_l(&AffineForm::new(4, vec![1]), 7, 3).unwrap(), 1);
        assert_eq!(omega_l(&AffineForm::new(0, vec![2, 3]), 5, 2).unwrap(), 25);
        assert_eq!(omega_l_enumerate(&AffineForm::new(0, vec![2, 3]), 5, 2), 25);
        for (p, k) in [(2u64, 1u32), (2, 5), (3, 3), (5, 2), (7, 3)] {
            for f in [AffineForm::new(1, vec![1, 2]), AffineForm::new(0, vec![3, 4, 0]), AffineForm::new(5, vec![6, 1])] {
                if p.pow(k).pow(f.coeffs.len() as u32) <= 343 * 343 {
                    assert_eq!(omega_l(&f, p, k).unwrap(), omega_l_enumerate(&f, p, k), "{f:?} {p}^{k}");
                }
            }
        }
        assert!(omega_l(&AffineForm::new(0, vec![2, 4]), 3, 1).is_err());
    }

    #[test]
    fn trivial_and_geometric() {
        let one = vec![MultFunc::one(); 3];
        let d = local_average(&one, &ap_system(&[0, 1, 2]).unwrap(), 3, &params()).unwrap();
        assert!((d.tree.value - 1.0).norm() < 1e-9 && (d.refine.value - 1.0).norm() < 1e-9);

        let single = parse_system("n", None).unwrap();
        for p in [2u64, 3, 5, 11] {
            let lam = vec![MultFunc::liouville().localize(p)];
            let d = local_average(&lam, &single, p, &params()).unwrap();
            let expect = (p as f64 - 1.0) / (p as f64 + 1.0);
            assert!((d.tree.value.re - expect).abs() < 1e-9);
            assert!((d.refine.value.re - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn liouville_on_three_ap() {
        let lam = vec![MultFunc::liouville(); 3];
        for p in [2u64, 3, 5] {
            let d = local_average(&lam, &ap_system(&[0, 1, 2]).unwrap(), p, &params()).unwrap();
            assert!(d.discrepancy() < 1e-9, "p={p}: {:?}", d);
        }
    }

    #[test]
    fn euler_examples() {
        let e = euler_factor(&MultFunc::one(), 2, 1000, 1e-14).unwrap();
        assert!((e - 1.0).norm() < 1e-12);
        let e = euler_factor(&MultFunc::liouville(), 2, 3, 1e-14).unwrap();
        assert!((e.re - 0.5).abs() < 1e-12);
        let chi = DirichletChar::group(7).unwrap().into_iter().nth(1).unwrap();
        for f in [MultFunc::liouville(), MultFunc::mobius_squared(), MultFunc::char_twist(&chi, 1.5)] {
            assert!(euler_factor(&f, 2, 5000, 1e-12).unwrap().norm() <= 1.0 + 1e-12);
        }
    }
}
