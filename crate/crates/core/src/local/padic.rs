//! p-adic densities of divisibility conditions on a form system, and the
//! pruned tree sum behind every local factor.

use crate::arith::padic_density;
use crate::error::{Error, Result};
use crate::forms::FormSystem;
use crate::multfunc::C64;
use num_integer::Integer;
use std::collections::HashMap;

/// Largest number of forms the inclusion-exclusion machinery accepts.
pub const MAX_FORMS: usize = 12;

/// Integer data of a system, plus what is needed for the large-prime shortcut.
#[derive(Clone, Debug)]
pub struct LocalSystem {
    pub k: usize,
    pub l: usize,
    pub rows: Vec<Vec<i128>>,
    pub consts: Vec<i128>,
    /// every nonzero minor of `[A | c]` is at most this in absolute value
    pub minor_bound: u128,
    rank: Vec<u32>,
    consistent: Vec<bool>,
}

fn det(mut m: Vec<Vec<i128>>) -> Option<i128> {
    // Bareiss fraction-free elimination
    let n = m.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for c in 0..n {
        if m[c][c] == 0 {
            let Some(swap) = (c + 1..n).find(|&r| m[r][c] != 0) else { return Some(0) };
            m.swap(c, swap);
            sign = -sign;
        }
        for r in c + 1..n {
            for t in c + 1..n {
                let num = m[r][t].checked_mul(m[c][c])?.checked_sub(m[r][c].checked_mul(m[c][t])?)?;
                m[r][t] = num / prev;
            }
            m[r][c] = 0;
        }
        prev = m[c][c];
    }
    Some(sign * m[n - 1][n - 1])
}

fn rank_of(rows: &[Vec<i128>]) -> u32 {
    let mut m = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, piv);
        for i in r + 1..m.len() {
            if m[i][c] != 0 {
                let g = m[r][c].gcd(&m[i][c]);
                let (a, b) = (m[r][c] / g, m[i][c] / g);
                for t in c..ncols {
                    m[i][t] = m[i][t] * a - m[r][t] * b;
                }
                let content = m[i].iter().fold(0i128, |g, &x| g.gcd(&x));
                if content > 1 {
                    m[i].iter_mut().for_each(|x| *x /= content);
                }
            }
        }
        r += 1;
    }
    r as u32
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, r, &mut Vec::new(), &mut out);
    out
}

impl LocalSystem {
    pub fn new(system: &FormSystem) -> Result<Self> {
        let (k, l) = (system.k(), system.l());
        if k > MAX_FORMS {
            return Err(Error::EnumerationCap {
                size: k as f64,
                cap: MAX_FORMS as f64,
                hint: "local factors use inclusion-exclusion over subsets of forms".into(),
            });
        }
        let rows: Vec<Vec<i128>> = system.forms.iter().map(|f| f.coeffs.iter().map(|&a| a as i128).collect()).collect();
        let consts: Vec<i128> = system.forms.iter().map(|f| f.constant as i128).collect();
        let aug: Vec<Vec<i128>> = rows.iter().zip(&consts).map(|(r, &c)| r.iter().copied().chain([c]).collect()).collect();
        let mut minor_bound = 0u128;
        for size in 1..=k.min(l + 1) {
            for rs in subsets(k, size) {
                for cs in subsets(l + 1, size) {
                    let m: Vec<Vec<i128>> = rs.iter().map(|&i| cs.iter().map(|&j| aug[i][j]).collect()).collect();
                    let d = det(m).ok_or(Error::Overflow("minor of the coefficient matrix"))?;
                    minor_bound = minor_bound.max(d.unsigned_abs());
                }
            }
        }
        let mut rank = vec![0u32; 1 << k];
        let mut consistent = vec![true; 1 << k];
        for mask in 1usize..1 << k {
            let sel: Vec<usize> = (0..k).filter(|&j| mask >> j & 1 == 1).collect();
            let a: Vec<Vec<i128>> = sel.iter().map(|&j| rows[j].clone()).collect();
            let ag: Vec<Vec<i128>> = sel.iter().map(|&j| aug[j].clone()).collect();
            rank[mask] = rank_of(&a);
            consistent[mask] = rank_of(&ag) == rank[mask];
        }
        Ok(LocalSystem { k, l, rows, consts, minor_bound, rank, consistent })
    }

    pub fn is_generic_prime(&self, p: u64) -> bool {
        p as u128 > self.minor_bound
    }

    /// Density exponent `s` with density `p^-s` of `p^{e_j} | L_j(n)` for all `j`,
    /// `None` if the set is empty. `homogeneous` drops the constants.
    pub fn density_exp(&self, p: u64, exps: &[u32], homogeneous: bool) -> Result<Option<u32>> {
        if self.is_generic_prime(p) {
            return Ok(self.generic_exp(exps, homogeneous));
        }
        self.exact_exp(p, exps, homogeneous)
    }

    pub fn exact_exp(&self, p: u64, exps: &[u32], homogeneous: bool) -> Result<Option<u32>> {
        let rows: Vec<(Vec<i128>, i128, u32)> = (0..self.k)
            .filter(|&j| exps[j] > 0)
            .map(|j| (self.rows[j].clone(), if homogeneous { 0 } else { self.consts[j] }, exps[j]))
            .collect();
        padic_density(p, &rows, self.l)
    }

    /// Closed form valid when `p` divides no nonzero minor of `[A | c]`.
    pub fn generic_exp(&self, exps: &[u32], homogeneous: bool) -> Option<u32> {
        // the set {j : exps_j >= i} only changes at the distinct values of exps
        let mut mask = 0usize;
        for (j, &e) in exps.iter().enumerate() {
            if e > 0 {
                mask |= 1 << j;
            }
        }
        if mask != 0 && !homogeneous && !self.consistent[mask] {
            return None;
        }
        let mut s = 0u32;
        let mut below = 0u32;
        while mask != 0 {
            let level = (0..self.k).filter(|&j| mask >> j & 1 == 1).map(|j| exps[j]).min().unwrap_or(0);
            s += (level - below) * self.rank[mask];
            below = level;
            for j in 0..self.k {
                if exps[j] == level {
                    mask &= !(1 << j);
                }
            }
        }
        Some(s)
    }
}

/// Result of a pruned local sum.
#[derive(Clone, Copy, Debug)]
pub struct TreeSum {
    /// sum over valuation vectors, not yet divided by `base`
    pub value: C64,
    /// density of the root condition `p^alpha | L`
    pub base: f64,
    /// upper bound for the mass of pruned subtrees
    pub missing: f64,
    pub nodes: usize,
}

impl TreeSum {
    /// The sum normalized by its root density, with the relative pruning bound.
    pub fn normalized(&self) -> (C64, f64) {
        if self.base == 0.0 {
            (C64::new(0.0, 0.0), 0.0)
        } else {
            (self.value / self.base, self.missing / self.base)
        }
    }
}

pub struct TreeInput<'a> {
    pub sys: &'a LocalSystem,
    pub p: u64,
    pub homogeneous: bool,
    pub alpha: &'a [u32],
    pub free: &'a [bool],
    /// `F_j(p^nu)`
    pub fval: &'a dyn Fn(usize, u32) -> C64,
    pub max_depth: u32,
}

struct Walker<'a, 'b> {
    inp: &'b TreeInput<'a>,
    cache: HashMap<Vec<u32>, Option<u32>>,
    free_idx: Vec<usize>,
    generic: bool,
    cut: f64,
    out: TreeSum,
}

impl Walker<'_, '_> {
    fn dens(&mut self, exps: &[u32]) -> Result<f64> {
        let e = if self.generic {
            self.inp.sys.generic_exp(exps, self.inp.homogeneous)
        } else if let Some(&e) = self.cache.get(exps) {
            e
        } else {
            let e = self.inp.sys.exact_exp(self.inp.p, exps, self.inp.homogeneous)?;
            self.cache.insert(exps.to_vec(), e);
            e
        };
        Ok(match e {
            None => 0.0,
            Some(s) => (self.inp.p as f64).powi(-(s as i32)),
        })
    }

    /// Probability that the valuation vector is exactly `exps` on the free coordinates.
    fn exact_mass(&mut self, exps: &mut [u32]) -> Result<f64> {
        let m = self.free_idx.len();
        let mut total = 0.0;
        for e in 0u32..1 << m {
            for (b, &j) in self.free_idx.iter().enumerate() {
                exps[j] += e >> b & 1;
            }
            let d = self.dens(exps)?;
            total += if e.count_ones() % 2 == 0 { d } else { -d };
            for (b, &j) in self.free_idx.iter().enumerate() {
                exps[j] -= e >> b & 1;
            }
        }
        Ok(total.max(0.0))
    }

    fn visit(&mut self, exps: &mut Vec<u32>, nu: &mut Vec<u32>, last: usize, depth: u32) -> Result<()> {
        let d = self.dens(exps)?;
        if d == 0.0 {
            return Ok(());
        }
        if d < self.cut {
            self.out.missing += d;
            return Ok(());
        }
        if depth > self.inp.max_depth {
            return Err(Error::NoConvergence { p: self.inp.p, missing: d / self.out.base.max(f64::MIN_POSITIVE) });
        }
        self.out.nodes += 1;
        let w = self.exact_mass(exps)?;
        if w > 0.0 {
            let mut prod = C64::new(1.0, 0.0);
            for &j in &self.free_idx {
                prod *= (self.inp.fval)(j, nu[j]);
            }
            self.out.value += prod * w;
        }
        for pos in last..self.free_idx.len() {
            let j = self.free_idx[pos];
            exps[j] += 1;
            nu[j] += 1;
            self.visit(exps, nu, pos, depth + 1)?;
            exps[j] -= 1;
            nu[j] -= 1;
        }
        Ok(())
    }
}

/// `sum_nu prod_j F_j(p^nu_j) P(v_p(L_j) - alpha_j = nu_j on free j, p^alpha | L)`, with masked
/// coordinates held at `nu_j = 0`. Subtrees whose root density falls below
/// `rel_cut * D(alpha)` are dropped and their mass reported.
pub fn tree_sum(inp: &TreeInput<'_>, rel_cut: f64) -> Result<TreeSum> {
    let k = inp.sys.k;
    let mut w = Walker {
        inp,
        cache: HashMap::new(),
        free_idx: (0..k).filter(|&j| inp.free[j]).collect(),
        generic: inp.sys.is_generic_prime(inp.p),
        cut: 0.0,
        out: TreeSum { value: C64::new(0.0, 0.0), base: 0.0, missing: 0.0, nodes: 0 },
    };
    let mut exps = inp.alpha.to_vec();
    let base = w.dens(&exps)?;
    if base == 0.0 {
        return Ok(w.out);
    }
    w.out.base = base;
    w.cut = rel_cut * base;
    let mut nu = vec![0u32; k];
    w.visit(&mut exps, &mut nu, 0, 0)?;
    Ok(w.out)
}

/// Tightens the cut until the relative pruned mass is at most `tol`.
pub fn tree_sum_to_tol(inp: &TreeInput<'_>, tol: f64) -> Result<TreeSum> {
    let mut cut = tol * 0.02;
    let mut last = None;
    for _ in 0..8 {
        let s = tree_sum(inp, cut)?;
        if s.base == 0.0 || s.missing <= tol * s.base {
            return Ok(s);
        }
        // the pruned mass scales roughly linearly with the cut
        cut *= (0.5 * tol * s.base / s.missing).clamp(1e-3, 0.5);
        last = Some(s);
    }
    let s = last.expect("ran at least once");
    Err(Error::NoConvergence { p: inp.p, missing: s.missing / s.base })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_up_to;
    use crate::forms::{ap_system, gowers_system, parse_system};
    use proptest::prelude::*;

    #[test]
    fn minors_and_ranks() {
        let ls = LocalSystem::new(&ap_system(&[0, 1, 2, 3]).unwrap()).unwrap();
        // 2x2 minors of the 4-AP matrix are differences of indices, at most 3
        assert_eq!(ls.minor_bound, 3);
        assert_eq!(ls.rank[0b1111], 2);
        assert_eq!(ls.rank[0b0001], 1);
        let aff = LocalSystem::new(&parse_system("n; n+d; n+2d+1", None).unwrap()).unwrap();
        assert!(!aff.consistent[0b111]);
        assert!(aff.consistent[0b011]);
    }

    #[test]
    fn generic_formula_matches_elimination() {
        for text in ["n; n+d; n+2d; n+3d", "n; n+d; n+2d+1", "n+3; 2n+d+1; m+d; n+m+d"] {
            let sys = parse_system(text, None).unwrap();
            let ls = LocalSystem::new(&sys).unwrap();
            for p in primes_up_to(60).into_iter().filter(|&p| ls.is_generic_prime(p)) {
                let k = ls.k;
                let mut exps = vec![0u32; k];
                // all exponent vectors with entries at most 3
                loop {
                    for homog in [false, true] {
                        assert_eq!(
                            ls.generic_exp(&exps, homog),
                            ls.exact_exp(p, &exps, homog).unwrap(),
                            "{text} p={p} {exps:?}"
                        );
                    }
                    let Some(i) = (0..k).find(|&i| exps[i] < 3) else { break };
                    exps[i] += 1;
                    exps[..i].iter_mut().for_each(|e| *e = 0);
                }
            }
        }
        let (g, _) = gowers_system(2).unwrap();
        let ls = LocalSystem::new(&g).unwrap();
        assert!(ls.is_generic_prime(3));
    }

    #[test]
    fn unit_function_gives_total_mass() {
        let ls = LocalSystem::new(&ap_system(&[0, 1, 2]).unwrap()).unwrap();
        let one = |_: usize, _: u32| C64::new(1.0, 0.0);
        for p in [2u64, 3, 5, 101] {
            let inp = TreeInput {
                sys: &ls,
                p,
                homogeneous: false,
                alpha: &[0, 0, 0],
                free: &[true, true, true],
                fval: &one,
                max_depth: 400,
            };
            let s = tree_sum_to_tol(&inp, 1e-12).unwrap();
            assert!((s.value.re - 1.0).abs() <= 1e-12 + s.missing, "p={p}");
        }
    }

    proptest! {
        #[test]
        fn generic_formula_on_random_systems(rows in proptest::collection::vec(proptest::collection::vec(0u64..4, 2), 2..4),
                                             consts in proptest::collection::vec(0u64..3, 4),
                                             exps in proptest::collection::vec(0u32..3, 4)) {
            let forms = rows.iter().zip(&consts).map(|(r, &c)| crate::forms::AffineForm::new(c, r.clone())).collect();
            let sys = FormSystem::with_default_vars(forms).unwrap();
            let ls = LocalSystem::new(&sys).unwrap();
            let p = crate::arith::next_prime(ls.minor_bound as u64 + 1);
            let e = &exps[..ls.k];
            for homog in [false, true] {
                prop_assert_eq!(ls.generic_exp(e, homog), ls.exact_exp(p, e, homog).unwrap());
            }
        }
    }
}
