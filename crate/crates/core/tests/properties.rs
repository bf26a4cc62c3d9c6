use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pg4q::gf::Field;
use pg4q::linalg::Matrix5;
use pg4q::pg::{normalize, Geometry};
use pg4q::quadric::{self, QuadraticForm};
use pg4q::sets::Spectrum;

fn field_and_elems() -> impl Strategy<Value = (Field, u8, u8, u8)> {
    (1u32..=4).prop_flat_map(|e| {
        let q = 1u8 << e;
        (Just(Field::new(e, None).unwrap()), 0..q, 0..q, 0..q)
    })
}

proptest! {
    #[test]
    fn field_axioms((f, a, b, c) in field_and_elems()) {
        prop_assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
        // squaring is additive in characteristic 2
        prop_assert_eq!(f.mul(a ^ b, a ^ b), f.mul(a, a) ^ f.mul(b, b));
    }

    #[test]
    fn canonical_index_round_trip(q in prop::sample::select(vec![2usize, 4, 8]), raw in prop::array::uniform5(0u8..8), scale in 1u8..8) {
        let g = Geometry::with_order(q).unwrap();
        let f = g.field();
        let v = raw.map(|x| x % q as u8);
        prop_assume!(v.iter().any(|&x| x != 0));
        let s = scale % q as u8;
        prop_assume!(s != 0);
        let i = g.canonical_index(&normalize(f, &v).unwrap());
        let scaled = v.map(|x| f.mul(s, x));
        prop_assert_eq!(g.canonical_index(&normalize(f, &scaled).unwrap()), i);
        prop_assert_eq!(normalize(f, &g.canonical_vec(i)), Some(g.canonical_vec(i)));
    }

    #[test]
    fn subspace_index_round_trip(q in prop::sample::select(vec![2usize, 4]), dim in 1usize..=2, seed in any::<u64>()) {
        let g = Geometry::with_order(q).unwrap();
        let i = (seed % g.num_subspaces(dim) as u64) as usize;
        let sub = g.subspace(dim, i);
        prop_assert_eq!(g.subspace_index(&sub), i);
        prop_assert_eq!(g.points_of(&sub).len(), g.points_in_dim(dim));
    }

    #[test]
    fn section_spectrum_is_collineation_invariant(q in prop::sample::select(vec![2usize, 4]), seed in any::<u64>()) {
        let g = Geometry::with_order(q).unwrap();
        let f = g.field();
        let m = Matrix5::random_invertible(f, &mut ChaCha8Rng::seed_from_u64(seed));
        let base = QuadraticForm::canonical_q4();
        let image = base.apply_collineation(f, &m).unwrap();
        let sizes = |form: &QuadraticForm| {
            let z = quadric::zero_set(&g, form);
            Spectrum::from_values(pg4q::incidence::solid_intersections(&g, &z).into_iter().map(u64::from))
        };
        prop_assert_eq!(sizes(&base), sizes(&image));
        prop_assert!(quadric::nucleus(&g, &image).is_ok());
    }
}
