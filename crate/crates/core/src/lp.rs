//! Dense tableau simplex for `max cᵀx` subject to `Ax ≤ b`, `x ≥ 0`, with
//! `b ≥ 0` so that the origin is a feasible basis. Bland's rule prevents cycling.

use thiserror::Error;

const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("constraint matrix is {rows}x{cols} but b has {b} and c has {c} entries")]
    Shape { rows: usize, cols: usize, b: usize, c: usize },
    #[error("right-hand side must be finite and nonnegative")]
    NegativeRhs,
    #[error("no convergence after {0} pivots")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Unbounded,
}

pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpOutcome, LpError> {
    let (rows, cols) = (a.len(), c.len());
    if b.len() != rows || a.iter().any(|r| r.len() != cols) {
        return Err(LpError::Shape {
            rows,
            cols: a.first().map_or(0, Vec::len),
            b: b.len(),
            c: cols,
        });
    }
    if b.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(LpError::NegativeRhs);
    }
    // rows: [A | I | b]; objective row holds reduced costs -c
    let width = cols + rows + 1;
    let mut t: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..rows).map(|k| if k == i { 1.0 } else { 0.0 }));
            row.push(b[i]);
            row
        })
        .collect();
    let mut obj: Vec<f64> = c.iter().map(|v| -v).collect();
    obj.extend(std::iter::repeat_n(0.0, rows + 1));
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    let limit = 50 * (rows + cols + 1);
    for _ in 0..limit {
        let Some(enter) = (0..width - 1).find(|&j| obj[j] < -PIVOT_TOL) else {
            let mut x = vec![0.0; cols];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < cols {
                    x[bv] = t[i][width - 1];
                }
            }
            let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
            return Ok(LpOutcome::Optimal { x, value });
        };
        // ratio test; ties broken by smallest basic index
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..rows {
            let p = t[i][enter];
            if p > PIVOT_TOL {
                let ratio = t[i][width - 1] / p;
                let better = match leave {
                    None => true,
                    Some((l, r)) => ratio < r || (ratio == r && basis[i] < basis[l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return Ok(LpOutcome::Unbounded);
        };
        let p = t[r][enter];
        t[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r {
                let f = row[enter];
                if f != 0.0 {
                    row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
                }
            }
        }
        let f = obj[enter];
        obj.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
        basis[r] = enter;
    }
    Err(LpError::IterationLimit(limit))
}
