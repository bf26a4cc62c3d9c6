//! Bulk incidence counting. These are the hot loops: every one is a pure map
//! over an index range and runs through [`crate::exec`].

use crate::exec;
use crate::pg::Geometry;
use crate::sets::{PointSet, SolidFamily};

/// `|K ∩ Σ|` for every solid Σ, by solid index.
pub fn solid_intersections(geom: &Geometry, k: &PointSet) -> Vec<u32> {
    exec::map_range(geom.num_solids(), |s| {
        let mut n = 0;
        geom.for_each_point_of_solid(s, |p| n += k.contains(p) as u32);
        n
    })
}

/// `|K ∩ S|` for every subspace S of dimension `dim`, by subspace index.
pub fn subspace_intersections(geom: &Geometry, k: &PointSet, dim: usize) -> Vec<u32> {
    exec::map_range(geom.num_subspaces(dim), |i| {
        let sub = geom.subspace(dim, i);
        let mut n = 0;
        geom.for_each_point_in(&sub, |p| n += k.contains(p) as u32);
        n
    })
}

/// Number of solids of `family` through each point.
pub fn point_incidences(geom: &Geometry, family: &SolidFamily) -> Vec<u32> {
    exec::map_range(geom.num_points(), |p| {
        let mut n = 0;
        geom.for_each_solid_through_point(p, |s| n += family.contains(s) as u32);
        n
    })
}

/// Number of solids of `family` through each subspace of dimension `dim`
/// (1 for lines, 2 for planes).
pub fn subspace_incidences(geom: &Geometry, family: &SolidFamily, dim: usize) -> Vec<u32> {
    exec::map_range(geom.num_subspaces(dim), |i| {
        let sub = geom.subspace(dim, i);
        let mut n = 0;
        geom.for_each_solid_through(&sub, |s| n += family.contains(s) as u32);
        n
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;

    #[test]
    fn kernels_match_brute_force() {
        let g = Geometry::with_order(2).unwrap();
        let f = g.field();
        let k = PointSet::from_indices(g.num_points(), (0..g.num_points()).filter(|i| i % 3 == 1));
        let fam = SolidFamily::from_indices(g.num_solids(), [0, 4, 9, 17, 30]);

        let brute_solid: Vec<u32> = (0..g.num_solids())
            .map(|s| {
                let u = g.solid(s);
                k.iter().filter(|&p| dot(f, u.covector(), g.point(p).coords()) == 0).count() as u32
            })
            .collect();
        assert_eq!(solid_intersections(&g, &k), brute_solid);

        let brute_point: Vec<u32> = (0..g.num_points())
            .map(|p| {
                fam.iter()
                    .filter(|&s| dot(f, g.solid(s).covector(), g.point(p).coords()) == 0)
                    .count() as u32
            })
            .collect();
        assert_eq!(point_incidences(&g, &fam), brute_point);

        let planes = subspace_incidences(&g, &fam, 2);
        for (i, &n) in planes.iter().enumerate() {
            let plane = g.subspace(2, i);
            let brute = fam
                .iter()
                .filter(|&s| g.solid_contains(&g.solid(s), &plane).unwrap())
                .count() as u32;
            assert_eq!(n, brute);
        }
        let lines = subspace_intersections(&g, &k, 1);
        for (i, &n) in lines.iter().enumerate() {
            let line = g.subspace(1, i);
            let brute = k.iter().filter(|&p| line.contains_point(f, &g.point(p))).count() as u32;
            assert_eq!(n, brute);
        }
    }
}
