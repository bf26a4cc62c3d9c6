//! Quadratic forms on GF(q)^5, the parabolic quadric and its solid sections.

use arrayvec::ArrayVec;
use serde::Serialize;
use thiserror::Error;

use crate::exec;
use crate::gf::{Field, Scalar};
use crate::incidence;
use crate::linalg::{self, Matrix5};
use crate::pg::{for_each_canonical_vec, Geometry, ProjPoint, Vec5};
use crate::sets::{PointSet, SolidFamily, Spectrum};

/// The 15 monomials `x_i x_j`, `i <= j`, in lexicographic order. This is the
/// coefficient order everywhere, including files and reports.
pub const MONOMIALS: [(usize, usize); 15] = [
    (0, 0), (0, 1), (0, 2), (0, 3), (0, 4),
    (1, 1), (1, 2), (1, 3), (1, 4),
    (2, 2), (2, 3), (2, 4),
    (3, 3), (3, 4),
    (4, 4),
];

fn monomial_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    MONOMIALS.iter().position(|&m| m == (i, j)).unwrap()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuadricError {
    #[error("polar form has trivial radical")]
    NoRadical,
    #[error("form is singular: radical point {0:?} lies on the quadric")]
    Singular(ProjPoint),
    #[error("collineation matrix is singular")]
    SingularMatrix,
    #[error("solid {solid} meets the quadric in {size} points")]
    UnexpectedSection { solid: usize, size: u32 },
    #[error("solid {0} is a cone section but misses the nucleus, or the reverse")]
    TangencyMismatch(usize),
}

/// `f(x) = Σ_{i<=j} c_ij x_i x_j`, coefficients in [`MONOMIALS`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct QuadraticForm {
    coeffs: [Scalar; 15],
}

impl QuadraticForm {
    pub fn new(coeffs: [Scalar; 15]) -> Self {
        QuadraticForm { coeffs }
    }

    /// `x0² + x1 x2 + x3 x4`.
    pub fn canonical_q4() -> Self {
        let mut coeffs = [0; 15];
        coeffs[monomial_index(0, 0)] = 1;
        coeffs[monomial_index(1, 2)] = 1;
        coeffs[monomial_index(3, 4)] = 1;
        QuadraticForm { coeffs }
    }

    pub fn coeffs(&self) -> &[Scalar; 15] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, j: usize) -> Scalar {
        self.coeffs[monomial_index(i, j)]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// The monomial values `x_i x_j` at `v`, in coefficient order.
    pub fn monomials(field: &Field, v: &Vec5) -> [Scalar; 15] {
        MONOMIALS.map(|(i, j)| field.mul(v[i], v[j]))
    }

    #[inline]
    pub fn evaluate(&self, field: &Field, v: &Vec5) -> Scalar {
        let mut acc = 0;
        for (&c, &(i, j)) in self.coeffs.iter().zip(MONOMIALS.iter()) {
            if c != 0 {
                acc ^= field.mul(c, field.mul(v[i], v[j]));
            }
        }
        acc
    }

    pub fn evaluate_point(&self, field: &Field, p: &ProjPoint) -> Scalar {
        self.evaluate(field, p.coords())
    }

    /// Gram matrix of the polar form; alternating in characteristic 2.
    pub fn polar_matrix(&self) -> [[Scalar; 5]; 5] {
        let mut a = [[0; 5]; 5];
        for (&c, &(i, j)) in self.coeffs.iter().zip(MONOMIALS.iter()) {
            if i != j {
                a[i][j] = c;
                a[j][i] = c;
            }
        }
        a
    }

    /// `B(x, y) = f(x + y) + f(x) + f(y)`.
    pub fn polar(&self, field: &Field, x: &Vec5, y: &Vec5) -> Scalar {
        let a = self.polar_matrix();
        let mut acc = 0;
        for i in 0..5 {
            acc ^= field.mul(x[i], linalg::dot(field, &a[i], y));
        }
        acc
    }

    /// Basis (RREF) of the radical of the polar form.
    pub fn radical(&self, field: &Field) -> ArrayVec<Vec5, 5> {
        linalg::null_space(field, &self.polar_matrix())
    }

    /// The same form scaled so its first nonzero coefficient is 1.
    pub fn normalized(&self, field: &Field) -> Self {
        match self.coeffs.iter().find(|&&c| c != 0) {
            Some(&lead) => {
                let inv = field.inv_nonzero(lead);
                QuadraticForm { coeffs: self.coeffs.map(|c| field.mul(c, inv)) }
            }
            None => *self,
        }
    }

    /// `f'(x) = f(Mx)`.
    pub fn apply_collineation(&self, field: &Field, m: &Matrix5) -> Result<Self, QuadricError> {
        if !m.is_invertible(field) {
            return Err(QuadricError::SingularMatrix);
        }
        let mut out = [0; 15];
        for (&c, &(i, j)) in self.coeffs.iter().zip(MONOMIALS.iter()) {
            if c == 0 {
                continue;
            }
            // c * (Σ a_k x_k)(Σ b_l x_l)
            let a = &m.0[i];
            let b = &m.0[j];
            for k in 0..5 {
                out[monomial_index(k, k)] ^= field.mul(c, field.mul(a[k], b[k]));
                for l in (k + 1)..5 {
                    let cross = field.mul(a[k], b[l]) ^ field.mul(a[l], b[k]);
                    out[monomial_index(k, l)] ^= field.mul(c, cross);
                }
            }
        }
        Ok(QuadraticForm { coeffs: out })
    }
}

/// Points where the form vanishes.
pub fn zero_set(geom: &Geometry, form: &QuadraticForm) -> PointSet {
    let f = geom.field();
    PointSet::from_mask(exec::map_range(geom.num_points(), |i| {
        form.evaluate(f, &geom.canonical_vec(i)) == 0
    }))
}

/// The nucleus of a non-singular parabolic quadric: the unique radical
/// point of the polar form, which must lie off the quadric.
pub fn nucleus(geom: &Geometry, form: &QuadraticForm) -> Result<ProjPoint, QuadricError> {
    let field = geom.field();
    let rad = form.radical(field);
    match rad.len() {
        0 => Err(QuadricError::NoRadical),
        1 => {
            let n = ProjPoint::from_vec(field, &rad[0]).unwrap();
            if form.evaluate(field, &rad[0]) == 0 {
                Err(QuadricError::Singular(n))
            } else {
                Ok(n)
            }
        }
        _ => {
            // f is additive on the radical and f(λx) = λ²f(x), so a radical of
            // dimension >= 2 always has a point on the quadric.
            let mut witness = None;
            for_each_canonical_vec(field, &rad, |v| {
                if witness.is_none() && form.evaluate(field, v) == 0 {
                    witness = ProjPoint::from_vec(field, v);
                }
            });
            Err(QuadricError::Singular(witness.expect("radical of dim >= 2 has a singular point")))
        }
    }
}

/// How a solid meets a point set, by cardinality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SectionType {
    /// (q+1)² points.
    Hyperbolic,
    /// q²+1 points.
    Elliptic,
    /// q²+q+1 points.
    Cone,
    Other(u32),
}

impl SectionType {
    pub fn from_size(q: usize, n: u32) -> Self {
        let q = q as u32;
        if n == (q + 1) * (q + 1) {
            SectionType::Hyperbolic
        } else if n == q * q + 1 {
            SectionType::Elliptic
        } else if n == q * q + q + 1 {
            SectionType::Cone
        } else {
            SectionType::Other(n)
        }
    }
}

pub fn section_type(geom: &Geometry, form: &QuadraticForm, solid: usize) -> SectionType {
    let f = geom.field();
    let mut n = 0;
    geom.for_each_point_of_solid(solid, |p| n += (form.evaluate(f, &geom.canonical_vec(p)) == 0) as u32);
    SectionType::from_size(geom.q(), n)
}

/// Partition of all solids by section type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolidClasses {
    pub hyperbolic: SolidFamily,
    pub elliptic: SolidFamily,
    pub tangent: SolidFamily,
}

/// Classifies every solid against a non-singular parabolic form and checks
/// that cone sections are exactly the solids through the nucleus.
pub fn classify_all_solids(geom: &Geometry, form: &QuadraticForm) -> Result<SolidClasses, QuadricError> {
    let n = nucleus(geom, form)?;
    let n_idx = geom.point_index(&n);
    let zeros = zero_set(geom, form);
    let sizes = incidence::solid_intersections(geom, &zeros);
    let f = geom.field();
    let mut hyperbolic = Vec::new();
    let mut elliptic = Vec::new();
    let mut tangent = Vec::new();
    for (s, &size) in sizes.iter().enumerate() {
        let through_n = geom.solid(s).contains_point(f, &geom.point(n_idx));
        match SectionType::from_size(geom.q(), size) {
            SectionType::Hyperbolic if !through_n => hyperbolic.push(s),
            SectionType::Elliptic if !through_n => elliptic.push(s),
            SectionType::Cone if through_n => tangent.push(s),
            SectionType::Other(_) => return Err(QuadricError::UnexpectedSection { solid: s, size }),
            _ => return Err(QuadricError::TangencyMismatch(s)),
        }
    }
    let u = geom.num_solids();
    Ok(SolidClasses {
        hyperbolic: SolidFamily::from_indices(u, hyperbolic),
        elliptic: SolidFamily::from_indices(u, elliptic),
        tangent: SolidFamily::from_indices(u, tangent),
    })
}

/// Histogram of `|K ∩ ℓ|` over all lines ℓ.
pub fn line_profile(geom: &Geometry, k: &PointSet) -> Spectrum {
    Spectrum::from_values(incidence::subspace_intersections(geom, k, 1).into_iter().map(u64::from))
}

/// Index image of a solid under the collineation `x ↦ M⁻¹x` that carries
/// the zero set of `f` onto that of `f∘M`: the covector `u` maps to `Mᵀu`.
pub fn solid_preimage(geom: &Geometry, m: &Matrix5, solid: usize) -> usize {
    let f = geom.field();
    let u = m.transpose().apply(f, &geom.canonical_vec(solid));
    geom.canonical_index(&crate::pg::normalize(f, &u).unwrap())
}

/// Index image of a point under `x ↦ M⁻¹x`.
pub fn point_preimage(geom: &Geometry, m_inv: &Matrix5, point: usize) -> usize {
    let f = geom.field();
    let v = m_inv.apply(f, &geom.canonical_vec(point));
    geom.canonical_index(&crate::pg::normalize(f, &v).unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geom(q: usize) -> Geometry {
        Geometry::with_order(q).unwrap()
    }

    fn pt(g: &Geometry, c: [u32; 5]) -> ProjPoint {
        ProjPoint::new(g.field(), c).unwrap()
    }

    #[test]
    fn canonical_form_values() {
        let g = geom(2);
        let f = QuadraticForm::canonical_q4();
        assert_eq!(f.evaluate_point(g.field(), &pt(&g, [0, 1, 0, 0, 0])), 0);
        assert_eq!(f.evaluate_point(g.field(), &pt(&g, [1, 0, 0, 0, 0])), 1);
        let g4 = geom(4);
        assert_eq!(f.evaluate_point(g4.field(), &pt(&g4, [1, 1, 1, 0, 0])), 0);
        assert_eq!(zero_set(&g, &f).len(), 15);
        assert_eq!(zero_set(&g4, &f).len(), 85);
        assert_eq!(zero_set(&g, &QuadraticForm::new([0; 15])).len(), 31);
    }

    #[test]
    fn polar_form_matches_definition() {
        let g = geom(4);
        let field = g.field();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = Matrix5::random_invertible(field, &mut rng);
            let form = QuadraticForm::canonical_q4().apply_collineation(field, &m).unwrap();
            for x in (0..g.num_points()).step_by(11) {
                for y in (0..g.num_points()).step_by(13) {
                    let (x, y) = (g.canonical_vec(x), g.canonical_vec(y));
                    let sum: Vec5 = std::array::from_fn(|i| x[i] ^ y[i]);
                    let by_def = form.evaluate(field, &sum) ^ form.evaluate(field, &x) ^ form.evaluate(field, &y);
                    assert_eq!(form.polar(field, &x, &y), by_def);
                    assert_eq!(form.polar(field, &x, &x), 0);
                }
            }
        }
        let f = QuadraticForm::canonical_q4();
        assert_eq!(f.polar(field, &[0, 1, 0, 0, 0], &[0, 0, 1, 0, 0]), 1);
        for y in 0..g.num_points() {
            assert_eq!(f.polar(field, &[1, 0, 0, 0, 0], &g.canonical_vec(y)), 0);
        }
    }

    #[test]
    fn nucleus_cases() {
        for q in [2, 4, 8, 16] {
            let g = geom(q);
            assert_eq!(nucleus(&g, &QuadraticForm::canonical_q4()).unwrap(), pt(&g, [1, 0, 0, 0, 0]));
        }
        let g = geom(2);
        let mut c = *QuadraticForm::canonical_q4().coeffs();
        c[0] = 0;
        assert_eq!(
            nucleus(&g, &QuadraticForm::new(c)),
            Err(QuadricError::Singular(pt(&g, [1, 0, 0, 0, 0])))
        );
        // x0² + x1x2: radical is 3-dimensional
        let mut c = [0; 15];
        c[0] = 1;
        c[monomial_index(1, 2)] = 1;
        assert!(matches!(nucleus(&g, &QuadraticForm::new(c)), Err(QuadricError::Singular(_))));
    }

    #[test]
    fn nucleus_follows_collineation() {
        let g = geom(4);
        let field = g.field();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let canon = QuadraticForm::canonical_q4();
        let n = nucleus(&g, &canon).unwrap();
        for _ in 0..10 {
            let m = Matrix5::random_invertible(field, &mut rng);
            let inv = m.inverse(field).unwrap();
            let f2 = canon.apply_collineation(field, &m).unwrap();
            let n2 = nucleus(&g, &f2).unwrap();
            assert_eq!(g.point_index(&n2), point_preimage(&g, &inv, g.point_index(&n)));
        }
    }

    #[test]
    fn section_types_by_hand() {
        let g = geom(2);
        let f = QuadraticForm::canonical_q4();
        let x0 = g.solid_index(&crate::pg::Solid::new(g.field(), [1, 0, 0, 0, 0]).unwrap());
        let x1 = g.solid_index(&crate::pg::Solid::new(g.field(), [0, 1, 0, 0, 0]).unwrap());
        assert_eq!(section_type(&g, &f, x0), SectionType::Hyperbolic);
        assert_eq!(section_type(&g, &f, x1), SectionType::Cone);
        assert_eq!(SectionType::from_size(2, 4), SectionType::Other(4));
    }

    #[test]
    fn family_sizes() {
        for (q, h, e, t) in [(2, 10, 6, 15), (4, 136, 120, 85), (8, 2080, 2016, 585)] {
            let g = geom(q);
            let c = classify_all_solids(&g, &QuadraticForm::canonical_q4()).unwrap();
            assert_eq!((c.hyperbolic.len(), c.elliptic.len(), c.tangent.len()), (h, e, t));
        }
    }

    #[test]
    fn lines_through_nucleus_meet_once() {
        for q in [2, 4] {
            let g = geom(q);
            let f = QuadraticForm::canonical_q4();
            let zeros = zero_set(&g, &f);
            let n = g.point_index(&nucleus(&g, &f).unwrap());
            let lines = g.lines_through_point(n);
            assert_eq!(lines.len(), g.points_in_dim(3));
            for l in lines {
                assert_eq!(g.points_of(&l).into_iter().filter(|&p| zeros.contains(p)).count(), 1);
            }
        }
    }

    #[test]
    fn section_sizes_double_count() {
        for q in [2u64, 4, 8] {
            let g = geom(q as usize);
            let zeros = zero_set(&g, &QuadraticForm::canonical_q4());
            let total: u64 = incidence::solid_intersections(&g, &zeros).iter().map(|&x| x as u64).sum();
            let k = q * q * q + q * q + q + 1;
            assert_eq!(total, k * k);
        }
    }

    #[test]
    fn collineation_preserves_families() {
        let g = geom(4);
        let field = g.field();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let canon = QuadraticForm::canonical_q4();
        let base = classify_all_solids(&g, &canon).unwrap();
        assert_eq!(canon.apply_collineation(field, &Matrix5::identity()).unwrap(), canon);
        for _ in 0..5 {
            let m = Matrix5::random_invertible(field, &mut rng);
            let f2 = canon.apply_collineation(field, &m).unwrap();
            assert_eq!(zero_set(&g, &f2).len(), 85);
            let c2 = classify_all_solids(&g, &f2).unwrap();
            let mapped = SolidFamily::from_indices(
                g.num_solids(),
                base.hyperbolic.iter().map(|s| solid_preimage(&g, &m, s)),
            );
            assert_eq!(c2.hyperbolic, mapped);
            assert_eq!(line_profile(&g, &zero_set(&g, &f2)), line_profile(&g, &zero_set(&g, &canon)));
        }
        let mut singular = Matrix5::identity();
        singular.0[0] = [0; 5];
        assert_eq!(canon.apply_collineation(field, &singular), Err(QuadricError::SingularMatrix));
    }

    #[test]
    fn line_profiles() {
        let g = geom(2);
        let zeros = zero_set(&g, &QuadraticForm::canonical_q4());
        assert!(line_profile(&g, &zeros).support_within(&[0, 1, 2, 3]));
        let single = PointSet::from_indices(31, [5]);
        assert_eq!(line_profile(&g, &single).support(), vec![0, 1]);
        let solid_pts = PointSet::from_indices(31, g.solid_points(0));
        assert_eq!(line_profile(&g, &solid_pts).support(), vec![1, 3]);
    }
}
