use super::C64;
use crate::arith::{divisors, factorize, jacobi, mobius, primitive_root};
use crate::error::{Error, Result};
use num_integer::Integer;
use std::sync::{Arc, OnceLock};

/// One cyclic factor of `(Z/qZ)^*`: residues mod `pm` written as `gen^m`.
#[derive(Debug)]
struct Cyclic {
    pm: u64,
    order: u64,
    /// discrete log of each residue mod `pm`, `u64::MAX` off the units
    dlog: Vec<u64>,
}

#[derive(Debug)]
struct Group {
    q: u64,
    comps: Vec<Cyclic>,
    /// exponent of the group; every phase is `num / exponent`
    exponent: u64,
}

impl Group {
    fn new(q: u64) -> Result<Group> {
        if q == 0 {
            return Err(Error::ZeroModulus);
        }
        if q > 1 << 24 {
            return Err(Error::EnumerationCap { size: q as f64, cap: (1u64 << 24) as f64, hint: "use the real backend".into() });
        }
        let mut comps = Vec::new();
        for pp in factorize(q)?.factors {
            let pm = pp.value()?;
            if pp.p == 2 {
                comps.extend(two_power_components(pp.k));
            } else {
                let g = primitive_root(pp.p, pp.k);
                let order = pm / pp.p * (pp.p - 1);
                let mut dlog = vec![u64::MAX; pm as usize];
                let mut x = 1u64;
                for m in 0..order {
                    dlog[x as usize] = m;
                    x = x * g % pm;
                }
                comps.push(Cyclic { pm, order, dlog });
            }
        }
        let exponent = comps.iter().fold(1u64, |acc, c| acc.lcm(&c.order));
        Ok(Group { q, comps, exponent })
    }
}

// (Z/2^k)^* = <-1> x <5> for k >= 3, cyclic of order 2 for k = 2, trivial for k = 1.
fn two_power_components(k: u32) -> Vec<Cyclic> {
    let pm = 1u64 << k;
    match k {
        1 => vec![],
        2 => vec![Cyclic { pm, order: 2, dlog: vec![u64::MAX, 0, u64::MAX, 1] }],
        _ => {
            let order5 = pm / 4;
            let mut sign = vec![u64::MAX; pm as usize];
            let mut five = vec![u64::MAX; pm as usize];
            let mut x = 1u64;
            for m in 0..order5 {
                for (s, y) in [(0, x), (1, pm - x)] {
                    sign[y as usize] = s;
                    five[y as usize] = m;
                }
                x = x * 5 % pm;
            }
            vec![Cyclic { pm, order: 2, dlog: sign }, Cyclic { pm, order: order5, dlog: five }]
        }
    }
}

#[derive(Clone, Debug)]
pub enum CharBackend {
    /// Jacobi symbol `(n / q)` for odd squarefree `q`.
    RealPrimitive,
    /// Character of index `index` in the CRT-ordered group.
    Table { index: u64, exps: Vec<u64> },
}

#[derive(Clone, Debug)]
pub struct DirichletChar {
    q: u64,
    backend: CharBackend,
    group: Option<Arc<Group>>,
    conductor: Arc<OnceLock<u64>>,
}

impl DirichletChar {
    /// The real primitive character mod an odd squarefree `q`.
    pub fn real_primitive(q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::ZeroModulus);
        }
        if q % 2 == 0 || mobius(q) == 0 {
            return Err(Error::InvalidArgument(format!("real backend needs odd squarefree modulus, got {q}")));
        }
        let conductor = OnceLock::new();
        let _ = conductor.set(q);
        Ok(DirichletChar { q, backend: CharBackend::RealPrimitive, group: None, conductor: Arc::new(conductor) })
    }

    pub fn trivial(q: u64) -> Result<Self> {
        Ok(Self::group_iter(q)?.next().expect("group is nonempty"))
    }

    /// All `phi(q)` characters mod `q`, index 0 being principal.
    pub fn group(q: u64) -> Result<Vec<Self>> {
        Ok(Self::group_iter(q)?.collect())
    }

    pub fn group_iter(q: u64) -> Result<impl Iterator<Item = Self>> {
        let group = Arc::new(Group::new(q)?);
        let size: u64 = group.comps.iter().map(|c| c.order).product();
        Ok((0..size).map(move |index| Self::from_index(group.clone(), index)))
    }

    pub fn table(q: u64, index: u64) -> Result<Self> {
        let group = Arc::new(Group::new(q)?);
        let size: u64 = group.comps.iter().map(|c| c.order).product();
        if index >= size {
            return Err(Error::InvalidArgument(format!("character index {index} >= phi({q}) = {size}")));
        }
        Ok(Self::from_index(group, index))
    }

    /// The table-backed copy of the quadratic character `(n / q)`, q odd squarefree.
    pub fn real_primitive_table(q: u64) -> Result<Self> {
        Self::real_primitive(q)?;
        let group = Arc::new(Group::new(q)?);
        // a primitive root mod p is a non-residue, so the Legendre symbol sits at half the order
        let mut index = 0u64;
        for c in group.comps.iter().rev() {
            index = index * c.order + c.order / 2;
        }
        Ok(Self::from_index(group, index))
    }

    fn from_index(group: Arc<Group>, index: u64) -> Self {
        let mut exps = Vec::with_capacity(group.comps.len());
        let mut rem = index;
        for c in &group.comps {
            exps.push(rem % c.order);
            rem /= c.order;
        }
        DirichletChar {
            q: group.q,
            backend: CharBackend::Table { index, exps },
            group: Some(group),
            conductor: Arc::new(OnceLock::new()),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn backend(&self) -> &CharBackend {
        &self.backend
    }

    pub fn label(&self) -> String {
        match &self.backend {
            CharBackend::RealPrimitive => format!("real:{}", self.q),
            CharBackend::Table { index, .. } => format!("{}.{}", self.q, index),
        }
    }

    /// Phase `num / den` of `chi(n)` on units, `None` off the units.
    pub fn phase(&self, n: i64) -> Option<(u64, u64)> {
        let r = n.rem_euclid(self.q as i64) as u64;
        match &self.backend {
            CharBackend::RealPrimitive => match jacobi(r as i64, self.q).expect("odd modulus") {
                0 => None,
                1 => Some((0, 2)),
                _ => Some((1, 2)),
            },
            CharBackend::Table { exps, .. } => {
                let g = self.group.as_ref().expect("table backend");
                let mut num = 0u64;
                for (c, &a) in g.comps.iter().zip(exps) {
                    let m = c.dlog[(r % c.pm) as usize];
                    if m == u64::MAX {
                        return None;
                    }
                    let scale = g.exponent / c.order;
                    num = (num + (a * m % c.order) * scale) % g.exponent;
                }
                if r.gcd(&self.q) != 1 {
                    return None;
                }
                Some((num, g.exponent))
            }
        }
    }

    pub fn eval(&self, n: i64) -> C64 {
        match self.phase(n) {
            None => C64::new(0.0, 0.0),
            Some((num, den)) => phase_to_complex(num, den),
        }
    }

    /// Order of the character.
    pub fn order(&self) -> u64 {
        match &self.backend {
            CharBackend::RealPrimitive => if self.q == 1 { 1 } else { 2 },
            CharBackend::Table { exps, .. } => {
                let g = self.group.as_ref().expect("table backend");
                g.comps.iter().zip(exps).fold(1, |acc, (c, &a)| acc.lcm(&(c.order / c.order.gcd(&a))))
            }
        }
    }

    pub fn is_real(&self) -> bool {
        self.order() <= 2
    }

    /// Smallest `d | q` such that `chi` is induced from a character mod `d`.
    pub fn conductor(&self) -> u64 {
        *self.conductor.get_or_init(|| {
            for d in divisors(self.q) {
                let induced = (1..=self.q / d).all(|j| {
                    let n = (j - 1) * d + 1;
                    n.gcd(&self.q) != 1 || self.phase(n as i64).map(|(num, _)| num == 0).unwrap_or(true)
                });
                if induced {
                    return d;
                }
            }
            self.q
        })
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.q
    }

    /// `chi(-1)` as `+1` (even) or `-1` (odd).
    pub fn parity(&self) -> i8 {
        match self.phase(-1) {
            Some((0, _)) => 1,
            _ => -1,
        }
    }
}

fn phase_to_complex(num: u64, den: u64) -> C64 {
    if num == 0 {
        return C64::new(1.0, 0.0);
    }
    if 2 * num == den {
        return C64::new(-1.0, 0.0);
    }
    if 4 * num == den {
        return C64::new(0.0, 1.0);
    }
    if 4 * num == 3 * den {
        return C64::new(0.0, -1.0);
    }
    C64::from_polar(1.0, std::f64::consts::TAU * num as f64 / den as f64)
}
