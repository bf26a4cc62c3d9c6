//! Quasi-quadrics: q³+q²+q+1 points with a nucleus N such that every line
//! through N meets the set once and every solid off N meets it in q²+1 or
//! (q+1)² points.
//!
//! Besides the predicate this module builds candidates by switching the
//! section of a quadric inside one tangent solid, and searches for
//! quasi-quadrics exhaustively at q = 2 and by seeded sampling at q = 4, 8.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exec;
use crate::families::{fit_quadratic_form, Identity, PointLevels};
use crate::gf::Scalar;
use crate::incidence;
use crate::linalg::dot;
use crate::pg::{normalize, Geometry, ProjPoint, Span, Subspace, Vec5};
use crate::quadric::{self, QuadraticForm, QuadricError};
use crate::sets::{PointSet, SolidFamily, Spectrum};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuasiError {
    #[error("exhaustive search is only defined for q = 2, got q = {0}")]
    ExhaustiveNeedsQ2(usize),
    #[error("sampled search supports q = 4 and q = 8, got q = {0}")]
    UnsupportedOrder(usize),
    #[error("solid {0} does not contain the nucleus")]
    NotTangent(usize),
    #[error("replacement point {0} is not in the tangent solid")]
    OutsideTangent(usize),
    #[error("replacement contains the nucleus")]
    NucleusInReplacement,
    #[error("candidate is not a quasi-quadric: {0:?}")]
    NotQuasiQuadric(QuasiWitness),
    #[error(transparent)]
    Quadric(#[from] QuadricError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct QuasiCandidate {
    pub points: PointSet,
    /// Point index of the nucleus.
    pub nucleus: usize,
}

/// First reason a candidate fails the definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum QuasiWitness {
    NucleusInSet,
    /// A line through N (by line index) meeting the set `meets` times.
    Line { line: usize, meets: u32 },
    /// A solid off N meeting the set in a forbidden number of points.
    Solid { solid: usize, meets: u32 },
}

fn solid_has_point(geom: &Geometry, solid: usize, point: usize) -> bool {
    let f = geom.field();
    dot(f, &geom.canonical_vec(solid), &geom.canonical_vec(point)) == 0
}

/// `None` if the candidate is a quasi-quadric, otherwise the first failure:
/// nucleus membership, then N-lines in index order, then off-N solids in
/// index order.
pub fn quasi_quadric_witness(geom: &Geometry, cand: &QuasiCandidate) -> Option<QuasiWitness> {
    let k = &cand.points;
    if k.contains(cand.nucleus) {
        return Some(QuasiWitness::NucleusInSet);
    }
    for line in geom.lines_through_point(cand.nucleus) {
        let mut meets = 0;
        geom.for_each_point_in(&line, |p| meets += k.contains(p) as u32);
        if meets != 1 {
            return Some(QuasiWitness::Line { line: geom.subspace_index(&line), meets });
        }
    }
    let q = geom.q() as u32;
    let sizes = incidence::solid_intersections(geom, k);
    sizes
        .iter()
        .enumerate()
        .find(|&(s, &n)| n != q * q + 1 && n != (q + 1) * (q + 1) && !solid_has_point(geom, s, cand.nucleus))
        .map(|(solid, &meets)| QuasiWitness::Solid { solid, meets })
}

pub fn is_quasi_quadric(geom: &Geometry, cand: &QuasiCandidate) -> bool {
    quasi_quadric_witness(geom, cand).is_none()
}

/// All solids meeting `k` in exactly `size` points.
pub fn solids_meeting_in(geom: &Geometry, k: &PointSet, size: u32) -> SolidFamily {
    SolidFamily::from_mask(incidence::solid_intersections(geom, k).into_iter().map(|n| n == size).collect())
}

/// Incidence counts of the (q+1)²-solid family of a quasi-quadric.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConverseReport {
    pub family_size: usize,
    /// Members through each point of K.
    pub member_counts: Spectrum,
    /// Members through each point outside K other than N.
    pub other_counts: Spectrum,
    pub nucleus_count: u32,
    pub identities: Vec<Identity>,
}

impl ConverseReport {
    pub fn holds(&self) -> bool {
        self.identities.iter().all(|i| i.holds)
    }
}

/// Builds H = solids meeting K in (q+1)² points and checks the per-point
/// counts (q³+q²)/2 on K, q³/2 off K ∪ {N}, 0 at N, together with the two
/// pair-count equations evaluated at every point.
pub fn verify_converse_lemma(geom: &Geometry, cand: &QuasiCandidate) -> Result<ConverseReport, QuasiError> {
    if let Some(w) = quasi_quadric_witness(geom, cand) {
        return Err(QuasiError::NotQuasiQuadric(w));
    }
    let q = geom.q();
    let qi = q as i64;
    let k = &cand.points;
    let sizes = incidence::solid_intersections(geom, k);
    let big = ((q + 1) * (q + 1)) as u32;
    let h = SolidFamily::from_mask(sizes.iter().map(|&n| n == big).collect());
    let n = cand.nucleus;

    // per point: (members through it, pairs (P, Π) with P ∈ K \ {X}, X ∈ Π, N ∉ Π)
    let per_point = exec::map_range(geom.num_points(), |x| {
        let mut members = 0i64;
        let mut pairs = 0i64;
        let own = k.contains(x) as i64;
        geom.for_each_solid_through_point(x, |s| {
            members += h.contains(s) as i64;
            if !solid_has_point(geom, s, n) {
                pairs += sizes[s] as i64 - own;
            }
        });
        (members, pairs)
    });

    let lv = PointLevels::new(q);
    let pair_total = (qi * qi * qi + qi * qi + qi) * qi * qi;
    let mut member_ok = 0;
    let mut other_ok = 0;
    let mut member_eq = 0;
    let mut other_eq = 0;
    let mut members = Vec::new();
    let mut others = Vec::new();
    for (x, &(c, pairs)) in per_point.iter().enumerate() {
        if x == n {
            continue;
        }
        if k.contains(x) {
            members.push(c as u64);
            member_ok += (c == lv.black as i64) as i64;
            let lhs = c * (qi * qi + 2 * qi) + (qi * qi * qi - c) * qi * qi;
            member_eq += (pairs == pair_total && lhs == pair_total) as i64;
        } else {
            others.push(c as u64);
            other_ok += (c == lv.white as i64) as i64;
            let lhs = c * (qi * qi + 2 * qi + 1) + (qi * qi * qi - c) * (qi * qi + 1);
            other_eq += (pairs == pair_total && lhs == pair_total) as i64;
        }
    }
    let nk = k.len() as i64;
    let no = (geom.num_points() - k.len() - 1) as i64;
    let nucleus_count = per_point[n].0 as u32;
    let identities = vec![
        Identity::new("member_points_on_half_q3_plus_q2", member_ok, nk),
        Identity::new("other_points_on_half_q3", other_ok, no),
        Identity::new("nucleus_on_no_member", nucleus_count as i64, 0),
        Identity::new("member_point_pair_count", member_eq, nk),
        Identity::new("other_point_pair_count", other_eq, no),
    ];
    Ok(ConverseReport {
        family_size: h.len(),
        member_counts: Spectrum::from_values(members),
        other_counts: Spectrum::from_values(others),
        nucleus_count,
        identities,
    })
}

/// `(Q \ tangent) ∪ replacement` with the nucleus of `form`. The result is
/// not checked; run [`is_quasi_quadric`] on it.
pub fn switch(
    geom: &Geometry,
    form: &QuadraticForm,
    tangent: usize,
    replacement: &PointSet,
) -> Result<QuasiCandidate, QuasiError> {
    let nucleus = geom.point_index(&quadric::nucleus(geom, form)?);
    if !solid_has_point(geom, tangent, nucleus) {
        return Err(QuasiError::NotTangent(tangent));
    }
    if let Some(p) = replacement.iter().find(|&p| !solid_has_point(geom, tangent, p)) {
        return Err(QuasiError::OutsideTangent(p));
    }
    if replacement.contains(nucleus) {
        return Err(QuasiError::NucleusInReplacement);
    }
    let zeros = quadric::zero_set(geom, form);
    let mask = (0..geom.num_points())
        .map(|p| if solid_has_point(geom, tangent, p) { replacement.contains(p) } else { zeros.contains(p) })
        .collect();
    Ok(QuasiCandidate { points: PointSet::from_mask(mask), nucleus })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Survivor {
    pub candidate: QuasiCandidate,
    /// Non-singular form with zero set equal to the candidate, if one exists.
    pub form: Option<QuadraticForm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExhaustiveSearch {
    pub search_space: usize,
    pub survivors: Vec<Survivor>,
}

impl ExhaustiveSearch {
    pub fn all_fit(&self) -> bool {
        self.survivors.iter().all(|s| s.form.is_some())
    }
}

/// The fixed search nucleus (1,0,0,0,0).
pub fn search_nucleus(geom: &Geometry) -> usize {
    geom.canonical_index(&[1, 0, 0, 0, 0])
}

/// Every transversal of the 15 lines through N = (1,0,0,0,0) in PG(4,2)
/// is tested against the solid condition; survivors are re-verified with the
/// full predicate and fitted.
///
/// Bit i of a choice selects the larger-index point of the i-th N-line.
/// Each solid off N contains exactly one of the two points on every N-line,
/// so its intersection size is the number of bits agreeing with a per-solid
/// mask.
pub fn exhaustive_search_q2(geom: &Geometry) -> Result<ExhaustiveSearch, QuasiError> {
    if geom.q() != 2 {
        return Err(QuasiError::ExhaustiveNeedsQ2(geom.q()));
    }
    let n = search_nucleus(geom);
    let pairs: Vec<(usize, usize)> = geom
        .lines_through_point(n)
        .iter()
        .map(|line| {
            let pts: Vec<usize> = geom.points_of(line).into_iter().filter(|&p| p != n).collect();
            (pts[0].min(pts[1]), pts[0].max(pts[1]))
        })
        .collect();
    let lines = pairs.len();
    let full = (1u32 << lines) - 1;
    let masks: Vec<u32> = (0..geom.num_solids())
        .filter(|&s| !solid_has_point(geom, s, n))
        .map(|s| {
            pairs
                .iter()
                .enumerate()
                .fold(0u32, |m, (i, &(_, b))| m | ((solid_has_point(geom, s, b) as u32) << i))
        })
        .collect();
    let search_space = 1usize << lines;
    let passing: Vec<u32> = exec::map_range(search_space, |c| {
        let c = c as u32;
        masks
            .iter()
            .all(|&m| matches!((!(c ^ m) & full).count_ones(), 5 | 9))
            .then_some(c)
    })
    .into_iter()
    .flatten()
    .collect();

    let survivors = exec::map_slice(&passing, |&c| {
        let points = PointSet::from_indices(
            geom.num_points(),
            pairs.iter().enumerate().map(|(i, &(a, b))| if c >> i & 1 == 1 { b } else { a }),
        );
        let candidate = QuasiCandidate { points, nucleus: n };
        let verified = is_quasi_quadric(geom, &candidate);
        (verified, candidate)
    });
    let survivors = survivors
        .into_iter()
        .map(|(verified, candidate)| {
            assert!(verified, "mask filter accepted a non-quasi-quadric");
            let form = fit_quadratic_form(geom, &candidate.points);
            Survivor { candidate, form }
        })
        .collect();
    Ok(ExhaustiveSearch { search_space, survivors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    /// Replace the cone in a tangent solid by a cone over another oval.
    Switching,
    /// Random transversal of the N-lines inside a tangent solid.
    RandomRestart,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Found {
    pub candidate: QuasiCandidate,
    pub form: Option<QuadraticForm>,
}

impl Found {
    pub fn is_quadric(&self) -> bool {
        self.form.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub evaluated: usize,
    /// Distinct verified quasi-quadrics, sorted by point indices.
    pub found: Vec<Found>,
}

/// A tangent solid of the canonical quadric with its vertex and the points
/// it contains.
struct TangentSolid {
    index: usize,
    vertex: usize,
    points: Vec<usize>,
}

fn tangent_solids(geom: &Geometry, form: &QuadraticForm, n: usize) -> Vec<TangentSolid> {
    let f = geom.field();
    let polar = form.polar_matrix();
    let zeros = quadric::zero_set(geom, form);
    (0..geom.num_solids())
        .filter(|&s| solid_has_point(geom, s, n))
        .map(|s| {
            let points = geom.solid_points(s);
            let cov = geom.canonical_vec(s);
            let vertex = points
                .iter()
                .copied()
                .find(|&p| {
                    let v = geom.canonical_vec(p);
                    let image: Vec5 = std::array::from_fn(|i| dot(f, &polar[i], &v));
                    zeros.contains(p) && normalize(f, &image) == Some(cov)
                })
                .expect("a tangent solid has a vertex");
            TangentSolid { index: s, vertex, points }
        })
        .collect()
}

/// Replacement set: P joined to the oval `g = 0` in a random plane β of the
/// tangent solid avoiding P and N, where `g` is a conic whose nucleus is the
/// point where PN meets β.
fn switching_replacement(geom: &Geometry, t: &TangentSolid, n: usize, rng: &mut ChaCha8Rng) -> PointSet {
    let f = geom.field();
    let q = geom.q();
    let (p, nv) = (geom.point(t.vertex), geom.point(n));
    let beta: Subspace = loop {
        let picks: Vec<ProjPoint> = t.points.choose_multiple(rng, 3).map(|&i| geom.point(i)).collect();
        if let Span::Subspace(s) = geom.span(&picks) {
            if s.dim() == 2 && !s.contains_point(f, &p) && !s.contains_point(f, &nv) {
                break s;
            }
        }
    };
    let pn = geom.line_through(&p, &nv);
    let n_prime = geom.points_of(&pn).into_iter().find(|&x| beta.contains_vec(f, &geom.canonical_vec(x))).unwrap();
    let pivots = beta.pivots();
    let coords = |x: usize| -> [Scalar; 3] {
        let v = geom.canonical_vec(x);
        [v[pivots[0]], v[pivots[1]], v[pivots[2]]]
    };
    let a = coords(n_prime);
    // cross terms proportional to the nucleus coordinates give radical a
    let (g01, g02, g12, diag) = loop {
        let lambda = rng.gen_range(1..q) as Scalar;
        let diag: [Scalar; 3] = std::array::from_fn(|_| rng.gen_range(0..q) as Scalar);
        let at_a = (0..3).fold(f.mul(lambda, f.mul(a[0], f.mul(a[1], a[2]))), |acc, i| {
            acc ^ f.mul(diag[i], f.mul(a[i], a[i]))
        });
        if at_a != 0 {
            break (f.mul(lambda, a[2]), f.mul(lambda, a[1]), f.mul(lambda, a[0]), diag);
        }
    };
    let g = |c: [Scalar; 3]| {
        (0..3).fold(0, |acc, i| acc ^ f.mul(diag[i], f.mul(c[i], c[i])))
            ^ f.mul(g01, f.mul(c[0], c[1]))
            ^ f.mul(g02, f.mul(c[0], c[2]))
            ^ f.mul(g12, f.mul(c[1], c[2]))
    };
    let mut out = PointSet::from_indices(geom.num_points(), [t.vertex]);
    for x in geom.points_of(&beta) {
        if g(coords(x)) == 0 {
            geom.for_each_point_in(&geom.line_through(&p, &geom.point(x)), |y| {
                out.insert(y);
            });
        }
    }
    out
}

fn transversal_replacement(geom: &Geometry, t: &TangentSolid, n: usize, rng: &mut ChaCha8Rng) -> PointSet {
    let nv = geom.point(n);
    let mut seen = vec![false; geom.num_points()];
    let mut out = PointSet::empty(geom.num_points());
    for &x in &t.points {
        if x == n || seen[x] {
            continue;
        }
        let line = geom.points_of(&geom.line_through(&nv, &geom.point(x)));
        let others: Vec<usize> = line.into_iter().filter(|&y| y != n).collect();
        others.iter().for_each(|&y| seen[y] = true);
        out.insert(*others.choose(rng).unwrap());
    }
    out
}

/// Seeded search around the canonical quadric with nucleus (1,0,0,0,0).
///
/// The first candidate is always the identity switch, so the quadric itself
/// is found whenever `budget >= 1`. Candidates are drawn sequentially from a
/// ChaCha8 stream and evaluated in parallel; output depends only on `seed`
/// and `budget`.
pub fn search_quasi(geom: &Geometry, strategy: Strategy, seed: u64, budget: usize) -> Result<SearchOutcome, QuasiError> {
    if !matches!(geom.q(), 4 | 8) {
        return Err(QuasiError::UnsupportedOrder(geom.q()));
    }
    let form = QuadraticForm::canonical_q4();
    let n = search_nucleus(geom);
    let zeros = quadric::zero_set(geom, &form);
    let tangents = tangent_solids(geom, &form, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut specs: Vec<(usize, PointSet)> = Vec::with_capacity(budget);
    if budget > 0 {
        let t = &tangents[0];
        let same = PointSet::from_indices(geom.num_points(), t.points.iter().copied().filter(|&p| zeros.contains(p)));
        specs.push((t.index, same));
    }
    while specs.len() < budget {
        let t = &tangents[rng.gen_range(0..tangents.len())];
        let replacement = match strategy {
            Strategy::Switching => switching_replacement(geom, t, n, &mut rng),
            Strategy::RandomRestart => transversal_replacement(geom, t, n, &mut rng),
        };
        specs.push((t.index, replacement));
    }

    let results = exec::map_slice(&specs, |(tangent, replacement)| {
        let cand = switch(geom, &form, *tangent, replacement).ok()?;
        is_quasi_quadric(geom, &cand).then_some(cand)
    });
    let mut found: Vec<QuasiCandidate> = results.into_iter().flatten().collect();
    found.sort_by(|a, b| a.points.members().cmp(b.points.members()));
    found.dedup();
    let found = exec::map_slice(&found, |c| Found { candidate: c.clone(), form: fit_quadratic_form(geom, &c.points) });
    Ok(SearchOutcome { evaluated: specs.len(), found })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadric_candidate(g: &Geometry) -> QuasiCandidate {
        let f = QuadraticForm::canonical_q4();
        QuasiCandidate { points: quadric::zero_set(g, &f), nucleus: search_nucleus(g) }
    }

    #[test]
    fn quadrics_are_quasi_quadrics() {
        for q in [2, 4] {
            let g = Geometry::with_order(q).unwrap();
            assert_eq!(quasi_quadric_witness(&g, &quadric_candidate(&g)), None);
        }
    }

    #[test]
    fn wrong_nucleus_and_bad_sets() {
        let g = Geometry::with_order(2).unwrap();
        let mut c = quadric_candidate(&g);
        c.nucleus = (0..31).find(|&p| p != c.nucleus && !c.points.contains(p)).unwrap();
        assert!(matches!(quasi_quadric_witness(&g, &c), Some(QuasiWitness::Line { .. })));
        c.nucleus = c.points.members()[0];
        assert_eq!(quasi_quadric_witness(&g, &c), Some(QuasiWitness::NucleusInSet));

        // swap one point with the other non-N point on its N-line
        let mut c = quadric_candidate(&g);
        let n = c.nucleus;
        let x = c.points.members()[0];
        let line = g.line_through(&g.point(n), &g.point(x));
        let y = g.points_of(&line).into_iter().find(|&y| y != n && y != x).unwrap();
        c.points.remove(x);
        c.points.insert(y);
        assert!(matches!(quasi_quadric_witness(&g, &c), Some(QuasiWitness::Solid { .. })));
    }

    #[test]
    fn solids_meeting_quadric() {
        let g = Geometry::with_order(2).unwrap();
        let c = quadric_candidate(&g);
        assert_eq!(solids_meeting_in(&g, &c.points, 9).len(), 10);
        let t = solids_meeting_in(&g, &c.points, 7);
        assert_eq!(t.len(), 15);
        assert!(t.iter().all(|s| solid_has_point(&g, s, c.nucleus)));
        assert!(solids_meeting_in(&g, &c.points, 4).is_empty());
    }

    #[test]
    fn converse_counts() {
        for (q, m, o) in [(2, 6, 4), (4, 40, 32)] {
            let g = Geometry::with_order(q).unwrap();
            let r = verify_converse_lemma(&g, &quadric_candidate(&g)).unwrap();
            assert!(r.holds(), "{r:?}");
            assert_eq!(r.member_counts.support(), vec![m]);
            assert_eq!(r.other_counts.support(), vec![o]);
            assert_eq!(r.nucleus_count, 0);
        }
    }

    #[test]
    fn switch_preconditions_and_identity() {
        let g = Geometry::with_order(2).unwrap();
        let f = QuadraticForm::canonical_q4();
        let c = quadric_candidate(&g);
        let t = (0..31).find(|&s| solid_has_point(&g, s, c.nucleus)).unwrap();
        let inside = PointSet::from_indices(31, g.solid_points(t).into_iter().filter(|&p| c.points.contains(p)));
        assert_eq!(switch(&g, &f, t, &inside).unwrap(), c);
        let empty = switch(&g, &f, t, &PointSet::empty(31)).unwrap();
        assert!(!is_quasi_quadric(&g, &empty));
        let off = (0..31).find(|&s| !solid_has_point(&g, s, c.nucleus)).unwrap();
        assert_eq!(switch(&g, &f, off, &inside), Err(QuasiError::NotTangent(off)));
        let with_n = PointSet::from_indices(31, [c.nucleus]);
        assert_eq!(switch(&g, &f, t, &with_n), Err(QuasiError::NucleusInReplacement));
    }

    #[test]
    fn search_is_deterministic_and_finds_quadric() {
        let g = Geometry::with_order(4).unwrap();
        let a = search_quasi(&g, Strategy::Switching, 7, 6).unwrap();
        let b = search_quasi(&g, Strategy::Switching, 7, 6).unwrap();
        assert_eq!(a, b);
        let q = quadric::zero_set(&g, &QuadraticForm::canonical_q4());
        assert!(a.found.iter().any(|f| f.candidate.points == q && f.is_quadric()));
        assert!(search_quasi(&Geometry::with_order(2).unwrap(), Strategy::Switching, 0, 1).is_err());
    }
}
