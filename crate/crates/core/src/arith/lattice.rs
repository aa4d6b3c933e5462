use crate::error::{Error, Result};

/// Integer solutions of `B z = rhs`: `z = particular + span_Z(kernel)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSolution {
    pub particular: Vec<i128>,
    pub kernel: Vec<Vec<i128>>,
}

fn ck(x: Option<i128>) -> Result<i128> {
    x.ok_or(Error::Overflow("integer lattice reduction"))
}

/// Solves `B z = rhs` over the integers by unimodular column reduction.
/// Returns `None` when there is no integer solution.
pub fn solve_integer_system(b: &[Vec<i128>], rhs: &[i128]) -> Result<Option<IntSolution>> {
    let k = b.len();
    assert_eq!(rhs.len(), k);
    let n = b.first().map_or(0, |r| r.len());
    let mut w: Vec<Vec<i128>> = b.to_vec();
    // u holds the column transform: w = b * u
    let mut u: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect();
    let mut pivots: Vec<Option<usize>> = vec![None; k];
    let mut r = 0usize;

    let col_axpy = |m: &mut Vec<Vec<i128>>, dst: usize, src: usize, q: i128| -> Result<()> {
        for row in m.iter_mut() {
            row[dst] = ck(row[dst].checked_sub(ck(q.checked_mul(row[src]))?))?;
        }
        Ok(())
    };
    let swap_cols = |m: &mut Vec<Vec<i128>>, a: usize, c: usize| {
        for row in m.iter_mut() {
            row.swap(a, c);
        }
    };

    for i in 0..k {
        if r == n {
            break;
        }
        loop {
            let best = (r..n).filter(|&c| w[i][c] != 0).min_by_key(|&c| w[i][c].unsigned_abs());
            let Some(c) = best else { break };
            swap_cols(&mut w, r, c);
            swap_cols(&mut u, r, c);
            let mut done = true;
            for c2 in r + 1..n {
                if w[i][c2] != 0 {
                    let q = w[i][c2].div_euclid(w[i][r]);
                    col_axpy(&mut w, c2, r, q)?;
                    col_axpy(&mut u, c2, r, q)?;
                    if w[i][c2] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                pivots[i] = Some(r);
                r += 1;
                break;
            }
        }
    }

    // forward substitution on the lower echelon form
    let mut y = vec![0i128; n];
    for i in 0..k {
        let upto = pivots[i].unwrap_or(r);
        let mut acc: i128 = 0;
        for c in 0..upto.min(r) {
            acc = ck(acc.checked_add(ck(w[i][c].checked_mul(y[c]))?))?;
        }
        let resid = ck(rhs[i].checked_sub(acc))?;
        match pivots[i] {
            Some(pc) => {
                if resid % w[i][pc] != 0 {
                    return Ok(None);
                }
                y[pc] = resid / w[i][pc];
            }
            None => {
                if resid != 0 {
                    return Ok(None);
                }
            }
        }
    }
    let mut particular = vec![0i128; n];
    for (row, out) in u.iter().zip(particular.iter_mut()) {
        for c in 0..r {
            *out = ck(out.checked_add(ck(row[c].checked_mul(y[c]))?))?;
        }
    }
    let kernel = (r..n).map(|c| u.iter().map(|row| row[c]).collect()).collect();
    Ok(Some(IntSolution { particular, kernel }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(b: &[Vec<i128>], z: &[i128]) -> Vec<i128> {
        b.iter().map(|row| row.iter().zip(z).map(|(a, x)| a * x).sum()).collect()
    }

    #[test]
    fn solves_and_spans_kernel() {
        // n + 2d + 5y1 = -1, n + 3y2 = -2
        let b = vec![vec![1, 2, 5, 0], vec![1, 0, 0, 3]];
        let rhs = vec![-1, -2];
        let sol = solve_integer_system(&b, &rhs).unwrap().unwrap();
        assert_eq!(apply(&b, &sol.particular), rhs);
        assert_eq!(sol.kernel.len(), 2);
        for v in &sol.kernel {
            assert!(apply(&b, v).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn detects_no_solution() {
        let b = vec![vec![2, 4]];
        assert!(solve_integer_system(&b, &[3]).unwrap().is_none());
        assert!(solve_integer_system(&b, &[6]).unwrap().is_some());
    }
}
