use crate::error::{Error, Result};
use crate::forms::{BoxSpec, FormSystem};
use crate::multfunc::C64;
use gauss_quad::legendre::GaussLegendre;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadParams {
    pub tol: f64,
    /// ratio of consecutive cells in the grading toward 0
    pub ratio: f64,
    pub levels: usize,
    pub points: usize,
    pub max_refinements: usize,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams { tol: 1e-8, ratio: 0.25, levels: 10, points: 6, max_refinements: 4 }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ArchIntegral {
    pub value: C64,
    pub error: f64,
    /// for equal sides `x` and homogeneous forms: `x^{iT}` and the scale-free integral
    pub phase: Option<C64>,
    pub homogeneous: Option<C64>,
    pub total_t: f64,
}

/// 1-d nodes on `[0, 1]`: Gauss-Legendre on `[0, r^m]` and on each `[r^{i+1}, r^i]`.
fn graded_rule(ratio: f64, levels: usize, points: usize) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(points.try_into().expect("at least one point"));
    let mut out = Vec::with_capacity((levels + 1) * points);
    let mut hi = 1.0f64;
    for lev in 0..=levels {
        let lo = if lev == levels { 0.0 } else { hi * ratio };
        let (mid, half) = ((hi + lo) / 2.0, (hi - lo) / 2.0);
        for &(x, w) in gl.as_node_weight_pairs() {
            out.push((mid + half * x, half * w));
        }
        hi = lo;
    }
    out
}

fn tensor(system: &FormSystem, sides: &[f64], t: &[f64], rule: &[(f64, f64)]) -> C64 {
    let l = system.l();
    let mut idx = vec![0usize; l];
    let mut u = vec![0.0f64; l];
    let mut total = C64::new(0.0, 0.0);
    loop {
        let mut w = 1.0;
        for r in 0..l {
            let (x, wt) = rule[idx[r]];
            u[r] = x * sides[r];
            w *= wt;
        }
        let mut phase = 0.0;
        for (f, &tj) in system.forms.iter().zip(t) {
            if tj != 0.0 {
                let v: f64 = f.coeffs.iter().zip(&u).fold(f.constant as f64, |acc, (a, x)| acc + *a as f64 * x);
                phase += tj * v.ln();
            }
        }
        total += C64::from_polar(w, phase);
        let Some(r) = (0..l).find(|&r| idx[r] + 1 < rule.len()) else { break };
        idx[r] += 1;
        idx[..r].iter_mut().for_each(|i| *i = 0);
    }
    total
}

fn integrate(system: &FormSystem, sides: &[f64], t: &[f64], qp: &QuadParams) -> Result<(C64, f64)> {
    let (mut levels, mut points) = (qp.levels, qp.points);
    let mut prev = tensor(system, sides, t, &graded_rule(qp.ratio, levels, points));
    for _ in 0..qp.max_refinements {
        levels += 4;
        points += 2;
        let cur = tensor(system, sides, t, &graded_rule(qp.ratio, levels, points));
        let err = (cur - prev).norm();
        if err <= qp.tol {
            return Ok((cur, err));
        }
        prev = cur;
    }
    let last = tensor(system, sides, t, &graded_rule(qp.ratio, levels + 4, points + 2));
    let err = (last - prev).norm();
    if err <= qp.tol {
        Ok((last, err))
    } else {
        Err(Error::Quadrature { estimate: err, tol: qp.tol })
    }
}

/// `int_{[0,1]^l} prod_j L_j(u_1 x_1, ..., u_l x_l)^{i t_j} du`.
pub fn arch_integral(system: &FormSystem, bx: &BoxSpec, t: &[f64], qp: &QuadParams) -> Result<ArchIntegral> {
    if t.len() != system.k() || bx.l() != system.l() {
        return Err(Error::InvalidArgument("need one t per form and one side per variable".into()));
    }
    if let Some(j) = system.forms.iter().position(|f| f.is_degenerate() && f.constant == 0) {
        return Err(Error::InvalidArgument(format!("form {j} vanishes identically")));
    }
    let total_t: f64 = t.iter().sum();
    let equal = bx.x.iter().all(|&v| v == bx.x[0]);
    let split = equal && system.is_homogeneous();
    if t.iter().all(|&v| v == 0.0) {
        let one = C64::new(1.0, 0.0);
        return Ok(ArchIntegral {
            value: one,
            error: 0.0,
            phase: split.then_some(one),
            homogeneous: split.then_some(one),
            total_t,
        });
    }
    if split {
        let ones = vec![1.0; system.l()];
        let (hom, err) = integrate(system, &ones, t, qp)?;
        let phase = C64::from_polar(1.0, total_t * bx.x[0].ln());
        return Ok(ArchIntegral { value: phase * hom, error: err, phase: Some(phase), homogeneous: Some(hom), total_t });
    }
    let (value, error) = integrate(system, &bx.x, t, qp)?;
    Ok(ArchIntegral { value, error, phase: None, homogeneous: None, total_t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{ap_system, parse_system};

    #[test]
    fn zero_twist_is_one() {
        let s = ap_system(&[0, 1, 2]).unwrap();
        let r = arch_integral(&s, &BoxSpec::cube(2, 1e4).unwrap(), &[0.0; 3], &QuadParams::default()).unwrap();
        assert_eq!(r.value, C64::new(1.0, 0.0));
    }

    #[test]
    fn single_form_closed_form() {
        let s = parse_system("u", None).unwrap();
        for (x, t) in [(1.0, 1.0), (50.0, 0.3), (1e4, -2.5)] {
            let r = arch_integral(&s, &BoxSpec::new(vec![x]).unwrap(), &[t], &QuadParams::default()).unwrap();
            let expect = C64::from_polar(1.0, t * f64::ln(x)) / C64::new(1.0, t);
            assert!((r.value - expect).norm() < 1e-8, "x={x} t={t}: {} vs {expect}", r.value);
        }
    }

    #[test]
    fn three_ap_bounded_and_split() {
        let s = ap_system(&[0, 1, 2]).unwrap();
        let t = [0.3, 0.0, -0.3];
        let bx = BoxSpec::cube(2, 1000.0).unwrap();
        let r = arch_integral(&s, &bx, &t, &QuadParams::default()).unwrap();
        assert!(r.value.norm() <= 1.0);
        // the direct integral over the scaled box agrees with x^{iT} I(L, t)
        let (direct, _) = integrate(&s, &bx.x, &t, &QuadParams::default()).unwrap();
        assert!((direct - r.value).norm() < 1e-7);
        // Monte Carlo style midpoint oracle on a fine grid
        let n = 400;
        let mut mid = C64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                let (u, v) = ((a as f64 + 0.5) / n as f64, (b as f64 + 0.5) / n as f64);
                let ph = 0.3 * u.ln() - 0.3 * (u + 2.0 * v).ln();
                mid += C64::from_polar(1.0, ph);
            }
        }
        mid /= (n * n) as f64;
        assert!((mid - r.homogeneous.unwrap()).norm() < 1e-3);
    }

    #[test]
    fn affine_box() {
        let s = parse_system("n+1; n+d+2", None).unwrap();
        let bx = BoxSpec::new(vec![30.0, 70.0]).unwrap();
        let r = arch_integral(&s, &bx, &[1.0, -0.5], &QuadParams::default()).unwrap();
        assert!(r.phase.is_none());
        assert!(r.value.norm() <= 1.0 && r.error <= 1e-8);
    }
}
