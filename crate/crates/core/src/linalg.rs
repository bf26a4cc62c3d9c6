//! Exact Gaussian elimination over GF(q).
//!
//! Rows are fixed-width arrays so the same code serves 5-column incidence
//! work and the 15-column system used when fitting quadratic forms.

use arrayvec::ArrayVec;
use rand::Rng;

use crate::gf::{Field, Scalar};

/// Brings `rows` into reduced row-echelon form in place (leading entries 1,
/// zero above and below each pivot). Zero rows end up at the bottom.
/// Returns the pivot columns; their count is the rank.
///
/// Pivot search scans rows top-down and takes the first nonzero entry, so the
/// result is fully deterministic.
pub fn rref<const N: usize>(field: &Field, rows: &mut [[Scalar; N]]) -> ArrayVec<usize, N> {
    let mut pivots = ArrayVec::new();
    let mut r = 0;
    for col in 0..N {
        if r == rows.len() {
            break;
        }
        let Some(sel) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, sel);
        let lead = rows[r][col];
        if lead != 1 {
            let inv = field.inv_nonzero(lead);
            for x in rows[r].iter_mut() {
                *x = field.mul(*x, inv);
            }
        }
        let pivot_row = rows[r];
        for (i, row) in rows.iter_mut().enumerate() {
            let c = row[col];
            if i != r && c != 0 {
                for (x, &p) in row.iter_mut().zip(pivot_row.iter()) {
                    *x ^= field.mul(c, p);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

pub fn rank<const N: usize>(field: &Field, rows: &[[Scalar; N]]) -> usize {
    let mut work = rows.to_vec();
    rref(field, &mut work).len()
}

/// Basis of `{ v : row · v = 0 for every row }`, itself in reduced
/// row-echelon form. `rows` must already be in RREF with the given pivots.
pub fn null_space_of_rref<const N: usize>(
    field: &Field,
    rows: &[[Scalar; N]],
    pivots: &[usize],
) -> ArrayVec<[Scalar; N], N> {
    let mut basis: ArrayVec<[Scalar; N], N> = ArrayVec::new();
    for free in (0..N).filter(|c| !pivots.contains(c)) {
        let mut v = [0; N];
        v[free] = 1;
        // char 2: -a = a
        for (row, &p) in rows.iter().zip(pivots) {
            v[p] = row[free];
        }
        basis.push(v);
    }
    let n = rref(field, &mut basis).len();
    basis.truncate(n);
    basis
}

/// Null space of arbitrary rows; convenience wrapper around [`null_space_of_rref`].
pub fn null_space<const N: usize>(field: &Field, rows: &[[Scalar; N]]) -> ArrayVec<[Scalar; N], N> {
    let mut work = rows.to_vec();
    let pivots = rref(field, &mut work);
    null_space_of_rref(field, &work[..pivots.len()], &pivots)
}

#[inline]
pub fn dot<const N: usize>(field: &Field, a: &[Scalar; N], b: &[Scalar; N]) -> Scalar {
    a.iter().zip(b).fold(0, |acc, (&x, &y)| acc ^ field.mul(x, y))
}

/// A 5×5 matrix over GF(q), acting on column vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Matrix5(pub [[Scalar; 5]; 5]);

impl Matrix5 {
    pub fn identity() -> Self {
        let mut m = [[0; 5]; 5];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1;
        }
        Matrix5(m)
    }

    pub fn apply(&self, field: &Field, v: &[Scalar; 5]) -> [Scalar; 5] {
        let mut out = [0; 5];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = dot(field, row, v);
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut t = [[0; 5]; 5];
        for (i, row) in self.0.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                t[j][i] = x;
            }
        }
        Matrix5(t)
    }

    pub fn mul(&self, field: &Field, other: &Matrix5) -> Matrix5 {
        let ot = other.transpose();
        let mut m = [[0; 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                m[i][j] = dot(field, &self.0[i], &ot.0[j]);
            }
        }
        Matrix5(m)
    }

    pub fn is_invertible(&self, field: &Field) -> bool {
        rank(field, &self.0) == 5
    }

    /// Gauss-Jordan on the augmented matrix `[M | I]`.
    pub fn inverse(&self, field: &Field) -> Option<Matrix5> {
        let mut aug = [[0; 10]; 5];
        for i in 0..5 {
            aug[i][..5].copy_from_slice(&self.0[i]);
            aug[i][5 + i] = 1;
        }
        let pivots = rref(field, &mut aug);
        if pivots.len() < 5 || pivots[4] != 4 {
            return None;
        }
        let mut inv = [[0; 5]; 5];
        for i in 0..5 {
            inv[i].copy_from_slice(&aug[i][5..]);
        }
        Some(Matrix5(inv))
    }

    /// Uniformly random invertible matrix (rejection sampling).
    pub fn random_invertible<R: Rng + ?Sized>(field: &Field, rng: &mut R) -> Matrix5 {
        loop {
            let mut m = [[0; 5]; 5];
            for row in m.iter_mut() {
                for x in row.iter_mut() {
                    *x = rng.gen_range(0..field.q()) as Scalar;
                }
            }
            let m = Matrix5(m);
            if m.is_invertible(field) {
                return m;
            }
        }
    }
}
