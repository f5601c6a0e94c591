//! Small dense exact linear algebra used by the hull code.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{gcd_of, lcm_of_denominators, Rational};

/// Reduced row echelon form, choosing pivots by scanning columns in
/// `column_order`. Returns the nonzero rows and, for each, its pivot column.
pub(crate) fn rref(mut rows: Vec<Vec<Rational>>, column_order: &[usize]) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for &col in column_order {
        if r == rows.len() {
            break;
        }
        let Some(found) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, found);
        let inv = Rational::one() / &rows[r][col];
        rows[r].iter_mut().for_each(|v| *v *= &inv);
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (t, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *t -= &f * p;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Inverse of a square nonsingular matrix.
pub(crate) fn inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let augmented: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut out = row.clone();
            out.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            out
        })
        .collect();
    let order: Vec<usize> = (0..n).collect();
    let (reduced, pivots) = rref(augmented, &order);
    if pivots.len() != n {
        return None;
    }
    Some(reduced.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Scales a rational vector by a positive factor to coprime integers.
pub(crate) fn primitive_integer(v: &[Rational]) -> Vec<BigInt> {
    let scale = Rational::from_integer(lcm_of_denominators(v));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &scale).to_integer()).collect();
    primitive(ints)
}

pub(crate) fn primitive(v: Vec<BigInt>) -> Vec<BigInt> {
    let g = gcd_of(&v);
    if g.is_zero() || g.is_one() {
        return v;
    }
    v.into_iter().map(|x| x / &g).collect()
}
