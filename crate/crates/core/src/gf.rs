//! Arithmetic in GF(2^e) for e = 1..=4.
//!
//! Elements are plain `u8` values in the polynomial basis: bit i is the
//! coefficient of x^i. Addition is XOR; multiplication and inversion go
//! through tables built once when the [`Field`] is constructed.

use thiserror::Error;

/// Largest supported exponent; q = 16.
pub const MAX_EXPONENT: u32 = 4;

/// A field element. Always `< q` for the field it belongs to.
pub type Scalar = u8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("exponent {0} out of supported range 1..=4")]
    UnsupportedExponent(u32),
    #[error("q = {0} is not a supported field order (expected 2, 4, 8 or 16)")]
    UnsupportedOrder(usize),
    #[error("modulus {modulus:#b} does not have degree {e}")]
    WrongDegree { e: u32, modulus: u32 },
    #[error("modulus {0:#b} is reducible over GF(2)")]
    Reducible(u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
}

/// Default modulus per exponent. For e = 1 the modulus is the polynomial x,
/// which never takes part in a reduction.
pub fn default_modulus(e: u32) -> Option<u32> {
    match e {
        1 => Some(0b10),
        2 => Some(0b111),
        3 => Some(0b1011),
        4 => Some(0b10011),
        _ => None,
    }
}

fn degree(p: u32) -> Option<u32> {
    (p != 0).then(|| 31 - p.leading_zeros())
}

/// Remainder of `a` modulo `b` as polynomials over GF(2).
fn poly_rem(mut a: u32, b: u32) -> u32 {
    let db = degree(b).expect("division by zero polynomial");
    while let Some(da) = degree(a) {
        if da < db {
            break;
        }
        a ^= b << (da - db);
    }
    a
}

/// Trial division by every polynomial of degree 1..=deg/2.
pub fn is_irreducible(p: u32) -> bool {
    let Some(d) = degree(p) else { return false };
    if d == 0 {
        return false;
    }
    (2u32..(1 << (d / 2 + 1))).all(|t| poly_rem(p, t) != 0)
}

/// Carry-less product reduced modulo `modulus`.
fn clmul_reduce(a: u32, b: u32, modulus: u32) -> u32 {
    let mut acc = 0u32;
    let mut a = a;
    let mut b = b;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        b >>= 1;
    }
    poly_rem(acc, modulus)
}

/// GF(2^e) arithmetic context. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Field {
    e: u32,
    q: usize,
    modulus: u32,
    mul: Vec<Scalar>,
    inv: Vec<Scalar>,
}

impl Field {
    /// Builds GF(2^e). With `modulus = None` the default table is used.
    pub fn new(e: u32, modulus: Option<u32>) -> Result<Self, FieldError> {
        if !(1..=MAX_EXPONENT).contains(&e) {
            return Err(FieldError::UnsupportedExponent(e));
        }
        let modulus = modulus.unwrap_or_else(|| default_modulus(e).unwrap());
        if degree(modulus) != Some(e) {
            return Err(FieldError::WrongDegree { e, modulus });
        }
        if !is_irreducible(modulus) {
            return Err(FieldError::Reducible(modulus));
        }
        let q = 1usize << e;
        let mut mul = vec![0; q * q];
        for a in 0..q {
            for b in 0..q {
                mul[a * q + b] = clmul_reduce(a as u32, b as u32, modulus) as Scalar;
            }
        }
        let mut inv = vec![0; q];
        for a in 1..q {
            inv[a] = (1..q)
                .find(|&b| mul[a * q + b] == 1)
                .expect("nonzero element without inverse: modulus not irreducible") as Scalar;
        }
        Ok(Field { e, q, modulus, mul, inv })
    }

    /// Builds the field of order `q` from its order rather than its exponent.
    pub fn with_order(q: usize, modulus: Option<u32>) -> Result<Self, FieldError> {
        match q {
            2 | 4 | 8 | 16 => Field::new(q.trailing_zeros(), modulus),
            _ => Err(FieldError::UnsupportedOrder(q)),
        }
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn exponent(&self) -> u32 {
        self.e
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    #[inline]
    pub fn add(&self, a: Scalar, b: Scalar) -> Scalar {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Scalar, b: Scalar) -> Scalar {
        self.mul[a as usize * self.q + b as usize]
    }

    pub fn inv(&self, a: Scalar) -> Result<Scalar, FieldError> {
        if a == 0 {
            Err(FieldError::ZeroInverse)
        } else {
            Ok(self.inv[a as usize])
        }
    }

    /// Inverse of a value the caller knows to be nonzero.
    #[inline]
    pub(crate) fn inv_nonzero(&self, a: Scalar) -> Scalar {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    pub fn pow(&self, a: Scalar, mut k: u64) -> Scalar {
        let mut base = a;
        let mut acc = 1;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    /// Multiplicative order of a nonzero element.
    pub fn order(&self, a: Scalar) -> Option<usize> {
        if a == 0 {
            return None;
        }
        let mut x = a;
        let mut k = 1;
        while x != 1 {
            x = self.mul(x, a);
            k += 1;
        }
        Some(k)
    }

    pub fn elements(&self) -> impl Iterator<Item = Scalar> + Clone {
        (0..self.q).map(|a| a as Scalar)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Scalar> + Clone {
        (1..self.q).map(|a| a as Scalar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_fields() -> Vec<Field> {
        (1..=4).map(|e| Field::new(e, None).unwrap()).collect()
    }

    #[test]
    fn defaults() {
        let f = Field::new(2, None).unwrap();
        assert_eq!((f.q(), f.modulus()), (4, 0b111));
        let f = Field::new(3, Some(0b1011)).unwrap();
        assert_eq!(f.q(), 8);
        assert_eq!(Field::with_order(16, None).unwrap().modulus(), 0b10011);
    }

    #[test]
    fn bad_moduli() {
        assert!(matches!(Field::new(2, Some(0b110)), Err(FieldError::Reducible(_))));
        assert!(matches!(Field::new(2, Some(0b101)), Err(FieldError::Reducible(_))));
        assert!(matches!(Field::new(3, Some(0b111)), Err(FieldError::WrongDegree { .. })));
        assert!(matches!(Field::new(5, None), Err(FieldError::UnsupportedExponent(5))));
        assert!(matches!(Field::new(0, None), Err(FieldError::UnsupportedExponent(0))));
        assert!(matches!(Field::with_order(3, None), Err(FieldError::UnsupportedOrder(3))));
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2
        assert!(matches!(Field::new(4, Some(0b10101)), Err(FieldError::Reducible(_))));
        // the other two quartic irreducibles are accepted
        assert!(Field::new(4, Some(0b11001)).is_ok());
        assert!(Field::new(4, Some(0b11111)).is_ok());
    }

    #[test]
    fn irreducible_counts_match_necklace_formula() {
        // Number of irreducible binary polynomials of degree d: 2, 1, 2, 3.
        for (d, expect) in [(1u32, 2usize), (2, 1), (3, 2), (4, 3)] {
            let n = ((1u32 << d)..(1 << (d + 1))).filter(|&p| is_irreducible(p)).count();
            assert_eq!(n, expect, "degree {d}");
        }
    }

    #[test]
    fn small_products() {
        let f4 = Field::new(2, None).unwrap();
        assert_eq!(f4.add(2, 3), 1);
        assert_eq!(f4.mul(2, 2), 3);
        assert_eq!(f4.inv(2).unwrap(), 3);
        let f8 = Field::new(3, None).unwrap();
        assert_eq!(f8.add(5, 3), 6);
        assert_eq!(f8.mul(2, 4), 3);
        assert_eq!(f8.inv(0), Err(FieldError::ZeroInverse));
        for f in all_fields() {
            assert_eq!(f.inv(1).unwrap(), 1);
            for a in f.elements() {
                assert_eq!(f.add(a, a), 0);
                assert_eq!(f.mul(a, 1), a);
            }
        }
    }

    #[test]
    fn inverses_exhaustive() {
        for f in all_fields() {
            for a in f.nonzero() {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                assert_eq!(f.pow(a, f.q() as u64 - 2), f.inv(a).unwrap());
            }
        }
    }

    #[test]
    fn multiplicative_group_is_cyclic() {
        for f in all_fields() {
            assert!(f.nonzero().any(|a| f.order(a) == Some(f.q() - 1)));
        }
    }

    #[test]
    fn frobenius_is_bijective() {
        for f in all_fields() {
            let mut seen = vec![false; f.q()];
            for a in f.elements() {
                seen[f.mul(a, a) as usize] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }
}
