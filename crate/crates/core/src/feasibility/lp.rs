//! Phase-one simplex over exact rationals with Bland's rule.
//!
//! Solves `A x = b, x >= 0` for feasibility only. Every row gets its own
//! artificial variable and the sum of artificials is driven to zero; the
//! system is feasible iff that minimum is zero. Bland's rule (lowest index
//! enters, lowest basic index leaves on ties) rules out cycling, so the loop
//! always terminates.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// A basic feasible solution of `A x = b, x >= 0`, or `None`.
pub fn phase_one(a: &[Vec<BigRational>], b: &[BigRational], columns: usize) -> Option<Vec<BigRational>> {
    let m = a.len();
    let width = columns + m;
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(m);
    let mut rhs: Vec<BigRational> = Vec::with_capacity(m);
    for (i, (row, value)) in a.iter().zip(b).enumerate() {
        debug_assert_eq!(row.len(), columns);
        let flip = value.is_negative();
        let mut r: Vec<BigRational> = row.iter().map(|x| if flip { -x } else { x.clone() }).collect();
        r.resize(width, BigRational::zero());
        r[columns + i] = BigRational::from_integer(1.into());
        rows.push(r);
        rhs.push(if flip { -value } else { value.clone() });
    }
    let mut basis: Vec<usize> = (columns..width).collect();

    // reduced costs of the artificial-sum objective, and its negated value
    let mut cost = vec![BigRational::zero(); width];
    let mut value = BigRational::zero();
    for (r, v) in rows.iter().zip(&rhs) {
        for j in 0..columns {
            cost[j] -= &r[j];
        }
        value -= v;
    }

    while let Some(enter) = (0..width).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..m {
            if !rows[i][enter].is_positive() {
                continue;
            }
            let ratio = &rhs[i] / &rows[i][enter];
            let better = match &leave {
                None => true,
                Some((k, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*k]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        // the objective is bounded below by zero, so some row always blocks
        let (p, _) = leave.expect("phase one is bounded");

        let pivot = rows[p][enter].clone();
        for x in rows[p].iter_mut() {
            *x /= &pivot;
        }
        rhs[p] /= &pivot;
        let pivot_row = rows[p].clone();
        let pivot_rhs = rhs[p].clone();
        for i in 0..m {
            if i == p || rows[i][enter].is_zero() {
                continue;
            }
            let factor = rows[i][enter].clone();
            for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &factor * y;
                }
            }
            rhs[i] -= &factor * &pivot_rhs;
        }
        let factor = cost[enter].clone();
        for (x, y) in cost.iter_mut().zip(&pivot_row) {
            if !y.is_zero() {
                *x -= &factor * y;
            }
        }
        value -= &factor * &pivot_rhs;
        basis[p] = enter;
    }

    if !value.is_zero() {
        return None;
    }
    let mut x = vec![BigRational::zero(); columns];
    for (i, &j) in basis.iter().enumerate() {
        if j < columns {
            x[j] = rhs[i].clone();
        }
    }
    Some(x)
}
