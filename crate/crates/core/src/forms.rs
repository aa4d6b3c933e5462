//! Affine linear form systems with nonnegative integer coefficients.

use crate::error::{Error, Result};
use num_integer::Integer;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineForm {
    pub constant: u64,
    pub coeffs: Vec<u64>,
}

impl AffineForm {
    pub fn new(constant: u64, coeffs: Vec<u64>) -> Self {
        AffineForm { constant, coeffs }
    }

    pub fn eval(&self, n: &[u64]) -> u64 {
        self.coeffs.iter().zip(n).fold(self.constant, |acc, (a, x)| acc + a * x)
    }

    pub fn eval_checked(&self, n: &[u64]) -> Option<u64> {
        self.coeffs
            .iter()
            .zip(n)
            .try_fold(self.constant, |acc, (a, x)| acc.checked_add(a.checked_mul(*x)?))
    }

    pub fn is_degenerate(&self) -> bool {
        self.coeffs.iter().all(|&a| a == 0)
    }

    pub fn content(&self) -> u64 {
        self.coeffs.iter().fold(0u64, |g, &a| g.gcd(&a))
    }

    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }

    pub fn homogeneous(&self) -> AffineForm {
        AffineForm::new(0, self.coeffs.clone())
    }

    pub fn render(&self, vars: &[String]) -> String {
        let mut parts = Vec::new();
        if self.constant != 0 || self.is_degenerate() {
            parts.push(self.constant.to_string());
        }
        for (a, v) in self.coeffs.iter().zip(vars) {
            match a {
                0 => {}
                1 => parts.push(v.clone()),
                _ => parts.push(format!("{a}{v}")),
            }
        }
        parts.join("+")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSystem {
    pub vars: Vec<String>,
    pub forms: Vec<AffineForm>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub height: u64,
    pub form_primitive: Vec<bool>,
    pub degenerate: Vec<usize>,
    /// pairs `(i, j)` whose homogeneous parts are proportional
    pub dependent_pairs: Vec<(usize, usize)>,
    pub pairwise_independent: bool,
    pub primitive_system: bool,
}

impl FormSystem {
    pub fn new(vars: Vec<String>, forms: Vec<AffineForm>) -> Result<Self> {
        if forms.is_empty() {
            return Err(Error::InvalidArgument("a system needs at least one form".into()));
        }
        if let Some(f) = forms.iter().find(|f| f.coeffs.len() != vars.len()) {
            return Err(Error::InvalidArgument(format!(
                "form has {} coefficients but the system has {} variables",
                f.coeffs.len(),
                vars.len()
            )));
        }
        Ok(FormSystem { vars, forms })
    }

    pub fn with_default_vars(forms: Vec<AffineForm>) -> Result<Self> {
        let l = forms.first().map_or(0, |f| f.coeffs.len());
        Self::new((1..=l).map(|i| format!("n{i}")).collect(), forms)
    }

    pub fn l(&self) -> usize {
        self.vars.len()
    }

    pub fn k(&self) -> usize {
        self.forms.len()
    }

    /// Largest coefficient, constants included.
    pub fn height(&self) -> u64 {
        self.forms
            .iter()
            .flat_map(|f| std::iter::once(f.constant).chain(f.coeffs.iter().copied()))
            .max()
            .unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.forms.iter().all(|f| f.constant == 0)
    }

    pub fn constants(&self) -> Vec<u64> {
        self.forms.iter().map(|f| f.constant).collect()
    }

    pub fn eval(&self, n: &[u64]) -> Vec<u64> {
        self.forms.iter().map(|f| f.eval(n)).collect()
    }

    pub fn homogeneous(&self) -> FormSystem {
        FormSystem { vars: self.vars.clone(), forms: self.forms.iter().map(|f| f.homogeneous()).collect() }
    }

    pub fn validate(&self) -> Diagnostics {
        let form_primitive: Vec<bool> = self.forms.iter().map(|f| f.is_primitive()).collect();
        let degenerate: Vec<usize> = (0..self.k()).filter(|&j| self.forms[j].is_degenerate()).collect();
        let mut dependent_pairs = Vec::new();
        for i in 0..self.k() {
            for j in i + 1..self.k() {
                if !independent(&self.forms[i].coeffs, &self.forms[j].coeffs) {
                    dependent_pairs.push((i, j));
                }
            }
        }
        let pairwise_independent = dependent_pairs.is_empty();
        Diagnostics {
            height: self.height(),
            primitive_system: pairwise_independent && degenerate.is_empty() && form_primitive.iter().all(|&b| b),
            form_primitive,
            degenerate,
            dependent_pairs,
            pairwise_independent,
        }
    }

    pub fn require_primitive(&self) -> Result<()> {
        let d = self.validate();
        if d.primitive_system {
            return Ok(());
        }
        let mut why = Vec::new();
        if !d.degenerate.is_empty() {
            why.push(format!("degenerate forms {:?}", d.degenerate));
        }
        let bad: Vec<usize> = (0..self.k()).filter(|&j| !d.form_primitive[j]).collect();
        if !bad.is_empty() {
            why.push(format!("forms {bad:?} have coefficient gcd > 1"));
        }
        if !d.dependent_pairs.is_empty() {
            why.push(format!("proportional pairs {:?}", d.dependent_pairs));
        }
        Err(Error::NotPrimitive(why.join("; ")))
    }

    pub fn render(&self) -> String {
        self.forms.iter().map(|f| f.render(&self.vars)).collect::<Vec<_>>().join("; ")
    }

    /// Least `s <= s_max` with a valid Cauchy-Schwarz partition for every form, if any.
    pub fn cs_complexity(&self, s_max: usize) -> Result<Option<usize>> {
        if self.k() > 10 {
            return Err(Error::EnumerationCap {
                size: self.k() as f64,
                cap: 10.0,
                hint: "partition search is exhaustive".into(),
            });
        }
        let rows: Vec<Vec<i128>> = self.forms.iter().map(|f| f.coeffs.iter().map(|&a| a as i128).collect()).collect();
        let mut worst = 0;
        for j in 0..self.k() {
            let others: Vec<&Vec<i128>> = (0..self.k()).filter(|&i| i != j).map(|i| &rows[i]).collect();
            match (0..=s_max).find(|&s| partition_exists(&rows[j], &others, s + 1)) {
                Some(s) => worst = worst.max(s),
                None => return Ok(None),
            }
        }
        Ok(Some(worst))
    }
}

fn independent(a: &[u64], b: &[u64]) -> bool {
    for r in 0..a.len() {
        for s in r + 1..a.len() {
            if (a[r] as i128) * (b[s] as i128) != (a[s] as i128) * (b[r] as i128) {
                return true;
            }
        }
    }
    // a single variable: only the zero form is independent of nothing
    false
}

/// Rank by fraction-free elimination.
fn rank(rows: &[Vec<i128>]) -> usize {
    let mut m: Vec<Vec<i128>> = rows.to_vec();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..m.len()).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, piv);
        for i in r + 1..m.len() {
            if m[i][c] != 0 {
                let (a, b) = (m[r][c], m[i][c]);
                let g = a.gcd(&b);
                let (a, b) = (a / g, b / g);
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
    r
}

fn in_span(target: &[i128], class: &[&Vec<i128>]) -> bool {
    if class.is_empty() {
        return target.iter().all(|&x| x == 0);
    }
    let mut rows: Vec<Vec<i128>> = class.iter().map(|r| r.to_vec()).collect();
    let base = rank(&rows);
    rows.push(target.to_vec());
    rank(&rows) == base
}

// Set partitions in restricted-growth order, at most `classes` blocks; adding a
// form only grows a span, so a block that already captures the target is pruned.
fn partition_exists(target: &[i128], others: &[&Vec<i128>], classes: usize) -> bool {
    fn go<'a>(i: usize, target: &[i128], others: &[&'a Vec<i128>], blocks: &mut Vec<Vec<&'a Vec<i128>>>, cap: usize) -> bool {
        if i == others.len() {
            return true;
        }
        for b in 0..blocks.len() {
            blocks[b].push(others[i]);
            if !in_span(target, &blocks[b]) && go(i + 1, target, others, blocks, cap) {
                return true;
            }
            blocks[b].pop();
        }
        if blocks.len() < cap {
            blocks.push(vec![others[i]]);
            if !in_span(target, blocks.last().unwrap()) && go(i + 1, target, others, blocks, cap) {
                return true;
            }
            blocks.pop();
        }
        false
    }
    if in_span(target, &[]) {
        return false;
    }
    go(0, target, others, &mut Vec::new(), classes)
}

/// The order-`k` Gowers system with its conjugation exponents (binary digit sums).
pub fn gowers_system(k: usize) -> Result<(FormSystem, Vec<u32>)> {
    if !(2..=5).contains(&k) {
        return Err(Error::InvalidArgument(format!("Gowers system order must be in 2..=5, got {k}")));
    }
    let mut forms = Vec::with_capacity(1 << k);
    let mut conj = Vec::with_capacity(1 << k);
    for j in 0..1usize << k {
        let mut coeffs = vec![0u64; k + 1];
        for (l, c) in coeffs.iter_mut().take(k).enumerate() {
            *c = ((j >> l) & 1) as u64;
        }
        coeffs[k] = 1;
        forms.push(AffineForm::new(0, coeffs));
        conj.push(j.count_ones());
    }
    Ok((FormSystem::with_default_vars(forms)?, conj))
}

/// `{(n, d) -> n + j d : j in S}`.
pub fn ap_system(s: &[u64]) -> Result<FormSystem> {
    if s.is_empty() {
        return Err(Error::InvalidArgument("AP system needs a nonempty index set".into()));
    }
    let forms = s.iter().map(|&j| AffineForm::new(0, vec![1, j])).collect();
    FormSystem::new(vec!["n".into(), "d".into()], forms)
}

/// `{n + j d : j in S} together with {n' + j' d : j' in T}` in variables `(n, n', d)`.
pub fn ap_system2(s: &[u64], t: &[u64]) -> Result<FormSystem> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::InvalidArgument("both index sets must be nonempty".into()));
    }
    let forms = s
        .iter()
        .map(|&j| AffineForm::new(0, vec![1, 0, j]))
        .chain(t.iter().map(|&j| AffineForm::new(0, vec![0, 1, j])))
        .collect();
    FormSystem::new(vec!["n".into(), "m".into(), "d".into()], forms)
}

/// Parses `"n; n+d; n+2d"`. Terms are `c`, `v`, `cv` or `c*v`, joined by `+`.
/// Variables are ordered by first appearance unless `vars` is given.
pub fn parse_system(text: &str, vars: Option<&[&str]>) -> Result<FormSystem> {
    let gerr = |reason: String| Error::Grammar { input: text.to_string(), reason };
    let mut names: Vec<String> = vars.map(|v| v.iter().map(|s| s.to_string()).collect()).unwrap_or_default();
    let fixed = vars.is_some();
    let mut parsed: Vec<(u64, Vec<(String, u64)>)> = Vec::new();
    for (idx, raw) in text.split(';').enumerate() {
        let src: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
        if src.is_empty() {
            if idx > 0 && raw.trim().is_empty() && text.trim_end().ends_with(';') {
                continue;
            }
            return Err(gerr(format!("form {} is empty", idx + 1)));
        }
        if src.contains('-') {
            return Err(gerr("coefficients must be nonnegative; '-' is not allowed".into()));
        }
        let mut constant = 0u64;
        let mut terms = Vec::new();
        for term in src.split('+') {
            if term.is_empty() {
                return Err(gerr(format!("dangling '+' in form {}", idx + 1)));
            }
            let split = term.find(|c: char| !c.is_ascii_digit()).unwrap_or(term.len());
            let (digits, rest) = term.split_at(split);
            let rest = match rest.strip_prefix('*') {
                Some(_) if digits.is_empty() => return Err(gerr(format!("'*' without a coefficient in form {}", idx + 1))),
                Some(r) => r,
                None => rest,
            };
            let coeff = if digits.is_empty() {
                1
            } else {
                digits.parse::<u64>().map_err(|e| gerr(format!("bad number {digits:?}: {e}")))?
            };
            if rest.is_empty() {
                if digits.is_empty() {
                    return Err(gerr(format!("empty term in form {}", idx + 1)));
                }
                constant = constant.checked_add(coeff).ok_or_else(|| gerr("constant overflows".into()))?;
                continue;
            }
            let ok = rest.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
                && rest.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'');
            if !ok {
                return Err(gerr(format!("bad variable name {rest:?}")));
            }
            if !names.iter().any(|n| n == rest) {
                if fixed {
                    return Err(gerr(format!("unknown variable {rest:?}")));
                }
                names.push(rest.to_string());
            }
            terms.push((rest.to_string(), coeff));
        }
        parsed.push((constant, terms));
    }
    if parsed.is_empty() {
        return Err(gerr("no forms".into()));
    }
    let forms = parsed
        .into_iter()
        .map(|(c, terms)| {
            let mut coeffs = vec![0u64; names.len()];
            for (v, a) in terms {
                let i = names.iter().position(|n| *n == v).expect("registered");
                coeffs[i] += a;
            }
            AffineForm::new(c, coeffs)
        })
        .collect();
    FormSystem::new(names, forms)
}

/// Box `prod (0, x_j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub x: Vec<f64>,
}

impl BoxSpec {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() || x.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("box sides must be positive and finite, got {x:?}")));
        }
        Ok(BoxSpec { x })
    }

    pub fn cube(l: usize, x: f64) -> Result<Self> {
        Self::new(vec![x; l])
    }

    pub fn l(&self) -> usize {
        self.x.len()
    }

    pub fn ell(&self) -> f64 {
        self.x.iter().map(|v| v.abs()).sum()
    }

    /// `ell(x) + 1`.
    pub fn big_x(&self) -> f64 {
        self.ell() + 1.0
    }

    pub fn x_minus(&self) -> f64 {
        self.x.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn x_plus(&self) -> f64 {
        self.x.iter().copied().fold(0.0, f64::max)
    }

    pub fn volume(&self) -> f64 {
        self.x.iter().product()
    }

    /// Integer side lengths `floor(x_j)`.
    pub fn sides(&self) -> Vec<u64> {
        self.x.iter().map(|v| v.floor() as u64).collect()
    }

    pub fn appropriate_threshold(&self, a: f64, b: f64) -> f64 {
        let l = self.l() as f64;
        let xp = self.x_plus();
        l * ((l + 1.0) * a * xp).log2().powi(2) * xp.ln().max(0.0).powf(b)
    }

    pub fn is_appropriate(&self, a: f64, b: f64) -> bool {
        self.x_minus() >= 3.0 && self.x_minus() > self.appropriate_threshold(a, b)
    }

    pub fn require_appropriate(&self, a: f64, b: f64) -> Result<()> {
        if self.is_appropriate(a, b) {
            Ok(())
        } else {
            Err(Error::InappropriateBox { a, b, x_minus: self.x_minus(), threshold: self.appropriate_threshold(a, b) })
        }
    }
}
