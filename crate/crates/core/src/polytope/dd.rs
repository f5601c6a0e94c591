//! Incremental double description for a pointed polyhedral cone
//! `{ y : a_i · y >= 0 }` given by integer rows `a_i` of full column rank.
//!
//! Rays are kept as primitive integer vectors together with the set of
//! processed rows they make tight; adjacency is decided combinatorially.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::linalg::{inverse, primitive, primitive_integer};
use crate::arith::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ZeroSet {
    words: Vec<u64>,
}

impl ZeroSet {
    fn empty(bits: usize) -> Self {
        Self {
            words: vec![0; bits.div_ceil(64)],
        }
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn intersection(&self, other: &Self) -> Self {
        Self {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    fn is_subset(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

#[derive(Debug, Clone)]
struct Ray {
    vector: Vec<BigInt>,
    zeros: ZeroSet,
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Picks `dim` linearly independent rows, greedily in index order.
fn independent_rows(rows: &[Vec<BigInt>], dim: usize) -> Vec<usize> {
    let mut basis: Vec<Vec<Rational>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut chosen = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut v: Vec<Rational> = row.iter().cloned().map(Rational::from_integer).collect();
        for (b, &p) in basis.iter().zip(&pivots) {
            if !v[p].is_zero() {
                let f = v[p].clone() / &b[p];
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= &f * y;
                }
            }
        }
        if let Some(p) = v.iter().position(|x| !x.is_zero()) {
            basis.push(v);
            pivots.push(p);
            chosen.push(i);
            if chosen.len() == dim {
                break;
            }
        }
    }
    chosen
}

/// Extreme rays of `{ y : rows[i] · y >= 0 }`. The rows must span the whole
/// space (the cone is then pointed). Output order is unspecified.
pub(crate) fn extreme_rays(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = rows.len();
    let dim = rows.first().map_or(0, Vec::len);
    let initial = independent_rows(rows, dim);
    assert_eq!(initial.len(), dim, "constraint rows must have full column rank");

    let square: Vec<Vec<Rational>> = initial
        .iter()
        .map(|&i| rows[i].iter().cloned().map(Rational::from_integer).collect())
        .collect();
    let inv = inverse(&square).expect("independent rows");
    let mut rays: Vec<Ray> = (0..dim)
        .map(|j| {
            let column: Vec<Rational> = (0..dim).map(|k| inv[k][j].clone()).collect();
            let mut zeros = ZeroSet::empty(n);
            for (k, &row) in initial.iter().enumerate() {
                if k != j {
                    zeros.insert(row);
                }
            }
            Ray {
                vector: primitive_integer(&column),
                zeros,
            }
        })
        .collect();

    let mut in_basis = vec![false; n];
    initial.iter().for_each(|&i| in_basis[i] = true);

    for (h, row) in rows.iter().enumerate() {
        if in_basis[h] {
            continue;
        }
        let values: Vec<BigInt> = rays.iter().map(|r| dot(row, &r.vector)).collect();
        let positive: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
        let negative: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();
        if negative.is_empty() {
            for (ray, v) in rays.iter_mut().zip(&values) {
                if v.is_zero() {
                    ray.zeros.insert(h);
                }
            }
            continue;
        }

        let mut created = Vec::new();
        for &p in &positive {
            for &q in &negative {
                let common = rays[p].zeros.intersection(&rays[q].zeros);
                if common.count() + 2 < dim {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, r)| k == p || k == q || !common.is_subset(&r.zeros));
                if !adjacent {
                    continue;
                }
                let vector: Vec<BigInt> = rays[q]
                    .vector
                    .iter()
                    .zip(&rays[p].vector)
                    .map(|(yq, yp)| &values[p] * yq - &values[q] * yp)
                    .collect();
                let mut zeros = common;
                zeros.insert(h);
                created.push(Ray {
                    vector: primitive(vector),
                    zeros,
                });
            }
        }

        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + created.len());
        for (mut ray, v) in rays.into_iter().zip(values) {
            if v.is_negative() {
                continue;
            }
            if v.is_zero() {
                ray.zeros.insert(h);
            }
            next.push(ray);
        }
        next.extend(created);
        rays = next;
    }

    rays.into_iter().map(|r| r.vector).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(data: &[&[i64]]) -> Vec<Vec<BigInt>> {
        data.iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect()
    }

    #[test]
    fn square_facets() {
        // homogenized vertices (1, x, y) of the unit square
        let r = rows(&[&[1, 0, 0], &[1, 1, 0], &[1, 0, 1], &[1, 1, 1]]);
        let mut rays = extreme_rays(&r);
        rays.sort();
        let expect = rows(&[&[0, 0, 1], &[0, 1, 0], &[1, -1, 0], &[1, 0, -1]]);
        let mut expect = expect;
        expect.sort();
        assert_eq!(rays, expect);
    }

    #[test]
    fn zero_set_ops() {
        let mut a = ZeroSet::empty(70);
        let mut b = ZeroSet::empty(70);
        a.insert(3);
        a.insert(65);
        b.insert(65);
        assert!(b.is_subset(&a));
        assert!(!a.is_subset(&b));
        assert_eq!(a.intersection(&b).count(), 1);
    }
}
