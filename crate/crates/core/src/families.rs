//! Analysis of arbitrary solid families.
//!
//! A family `H` is checked against the point condition (every point on 0,
//! q³/2 or (q³+q²)/2 members) and the plane condition (a plane in some member
//! lies in at least q/2 members). Points are colored red/white/black by their
//! count, solids split into `H`, tangent-type `T` (through a red point) and
//! the rest `E`, and the counting identities that tie these together are
//! evaluated exactly. [`characterize`] runs the whole pipeline and decides
//! whether the black points form a quadric or a quasi-quadric.

use serde::Serialize;
use thiserror::Error;

use crate::exec;
use crate::gf::Scalar;
use crate::incidence;
use crate::linalg;
use crate::pg::{Geometry, Vec5};
use crate::quadric::{self, QuadraticForm, QuadricError};
use crate::quasi;
use crate::sets::{PointSet, SolidFamily, Spectrum};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    #[error("the solid family is empty")]
    EmptyFamily,
    #[error("set has universe {got}, geometry has {expected}")]
    UniverseMismatch { expected: usize, got: usize },
    #[error("{0} points violate the point condition")]
    ColorViolations(usize),
    #[error("solid {solid} of the family contains red point {point}")]
    RedPointInFamily { solid: usize, point: usize },
    #[error(transparent)]
    Quadric(#[from] QuadricError),
}

/// Values that the point condition allows, for a given q.
#[derive(Debug, Clone, Copy)]
pub struct PointLevels {
    pub white: u32,
    pub black: u32,
}

impl PointLevels {
    pub fn new(q: usize) -> Self {
        let q = q as u32;
        PointLevels { white: q * q * q / 2, black: (q * q * q + q * q) / 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Color {
    Red,
    White,
    Black,
    Violation(u32),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Census {
    pub red: usize,
    pub white: usize,
    pub black: usize,
    pub violations: usize,
}

/// Per-point coloring induced by a family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorMap {
    colors: Vec<Color>,
    census: Census,
}

impl ColorMap {
    pub fn from_counts(q: usize, counts: &[u32]) -> Self {
        let lv = PointLevels::new(q);
        let mut census = Census::default();
        let colors = counts
            .iter()
            .map(|&c| {
                let color = match c {
                    0 => Color::Red,
                    c if c == lv.white => Color::White,
                    c if c == lv.black => Color::Black,
                    c => Color::Violation(c),
                };
                match color {
                    Color::Red => census.red += 1,
                    Color::White => census.white += 1,
                    Color::Black => census.black += 1,
                    Color::Violation(_) => census.violations += 1,
                }
                color
            })
            .collect();
        ColorMap { colors, census }
    }

    pub fn color(&self, point: usize) -> Color {
        self.colors[point]
    }

    pub fn census(&self) -> Census {
        self.census
    }

    pub fn satisfies_condition_i(&self) -> bool {
        self.census.violations == 0
    }

    /// `(point, observed count)` for every violating point.
    pub fn violations(&self) -> Vec<(usize, u32)> {
        self.colors
            .iter()
            .enumerate()
            .filter_map(|(i, c)| match c {
                Color::Violation(n) => Some((i, *n)),
                _ => None,
            })
            .collect()
    }

    fn set_of(&self, want: Color) -> PointSet {
        PointSet::from_mask(self.colors.iter().map(|&c| c == want).collect())
    }

    pub fn black(&self) -> PointSet {
        self.set_of(Color::Black)
    }

    pub fn white(&self) -> PointSet {
        self.set_of(Color::White)
    }

    pub fn red(&self) -> PointSet {
        self.set_of(Color::Red)
    }
}

fn check_universe(geom: &Geometry, n: usize) -> Result<(), FamilyError> {
    if n != geom.num_points() {
        return Err(FamilyError::UniverseMismatch { expected: geom.num_points(), got: n });
    }
    Ok(())
}

/// Number of solids of `h` through each point.
pub fn point_incidence_counts(geom: &Geometry, h: &SolidFamily) -> Vec<u32> {
    incidence::point_incidences(geom, h)
}

pub fn check_condition_i(geom: &Geometry, h: &SolidFamily) -> ColorMap {
    ColorMap::from_counts(geom.q(), &point_incidence_counts(geom, h))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionII {
    pub holds: bool,
    /// `(plane index, members through it)` for planes with 0 < count < q/2.
    pub violating_planes: Vec<(usize, u32)>,
}

fn condition_ii_from_counts(q: usize, plane_counts: &[u32]) -> ConditionII {
    let bound = (q / 2) as u32;
    let violating_planes: Vec<(usize, u32)> = plane_counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0 && c < bound)
        .map(|(i, &c)| (i, c))
        .collect();
    ConditionII { holds: violating_planes.is_empty(), violating_planes }
}

pub fn check_condition_ii(geom: &Geometry, h: &SolidFamily) -> ConditionII {
    condition_ii_from_counts(geom.q(), &incidence::subspace_incidences(geom, h, 2))
}

/// The solids outside `H`: those through a red point (`tangent`) and the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub tangent: SolidFamily,
    pub elliptic: SolidFamily,
}

pub fn partition_solids(geom: &Geometry, h: &SolidFamily, colors: &ColorMap) -> Result<Partition, FamilyError> {
    if !colors.satisfies_condition_i() {
        return Err(FamilyError::ColorViolations(colors.census().violations));
    }
    let red = colors.red();
    let first_red = exec::map_range(geom.num_solids(), |s| {
        let mut hit = None;
        geom.for_each_point_of_solid(s, |p| {
            if hit.is_none() && red.contains(p) {
                hit = Some(p);
            }
        });
        hit
    });
    let mut tangent = Vec::new();
    let mut elliptic = Vec::new();
    for (s, hit) in first_red.into_iter().enumerate() {
        match (h.contains(s), hit) {
            (true, Some(point)) => return Err(FamilyError::RedPointInFamily { solid: s, point }),
            (true, None) => {}
            (false, Some(_)) => tangent.push(s),
            (false, None) => elliptic.push(s),
        }
    }
    let u = geom.num_solids();
    Ok(Partition {
        tangent: SolidFamily::from_indices(u, tangent),
        elliptic: SolidFamily::from_indices(u, elliptic),
    })
}

/// A reduced fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 { a } else { gcd(b, a % b) }
        }
        let g = gcd(num, den).max(1);
        Ratio { num: num / g, den: den / g }
    }

    pub fn integer(&self) -> Option<u64> {
        (self.den == 1).then_some(self.num)
    }
}

/// `h = |H| / (q²/2)`.
pub fn h_ratio(q: usize, family_size: usize) -> Ratio {
    Ratio::new(family_size as u64, (q * q / 2) as u64)
}

/// One exactly evaluated identity; `holds` iff `lhs == rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Identity {
    pub name: &'static str,
    pub holds: bool,
    pub lhs: i64,
    pub rhs: i64,
}

impl Identity {
    pub fn new(name: &'static str, lhs: i64, rhs: i64) -> Self {
        Identity { name, holds: lhs == rhs, lhs, rhs }
    }
}

/// Black-count histograms of the three solid classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlackPerSolid {
    pub hyperbolic: Spectrum,
    pub elliptic: Spectrum,
    pub tangent: Spectrum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StructureCounts {
    pub h: Ratio,
    pub partition: PartitionSizes,
    pub black_per_solid: BlackPerSolid,
    pub identities: Vec<Identity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PartitionSizes {
    pub h: usize,
    pub e: usize,
    pub t: usize,
}

/// Divisibility of `|H|`, the value of h, the double and triple counts, the
/// color census, class sizes and black counts per solid class.
pub fn structure_counts(geom: &Geometry, h: &SolidFamily, colors: &ColorMap) -> Result<StructureCounts, FamilyError> {
    let partition = partition_solids(geom, h, colors)?;
    let black_counts = incidence::solid_intersections(geom, &colors.black());
    Ok(structure_counts_with(geom.q(), h, colors, &partition, &black_counts))
}

fn structure_counts_with(
    q: usize,
    h: &SolidFamily,
    colors: &ColorMap,
    partition: &Partition,
    black_counts: &[u32],
) -> StructureCounts {
    let qi = q as i64;
    let c = colors.census();
    let (w, b, r) = (c.white as i64, c.black as i64, c.red as i64);
    let size = h.len() as i64;
    let half_q2 = qi * qi / 2;
    let lv = PointLevels::new(q);
    let (white_lv, black_lv) = (lv.white as i64, lv.black as i64);
    let solid_pts = qi * qi * qi + qi * qi + qi + 1;
    let plane_pts = qi * qi + qi + 1;

    let mut ids = vec![Identity::new("half_q2_divides_family_size", size % half_q2, 0)];
    let h_ratio = h_ratio(q, h.len());
    if let Some(hv) = h_ratio.integer() {
        let hv = hv as i64;
        ids.push(Identity::new("h_times_h_minus_1_mod_q", (hv * (hv - 1)).rem_euclid(qi), 0));
        ids.push(Identity::new("h_times_h_minus_2_mod_q_plus_1", (hv * (hv - 2)).rem_euclid(qi + 1), 0));
        ids.push(Identity::new(
            "h_white_identity",
            hv * ((qi + 1 - hv) * plane_pts + qi * (qi * qi * qi + qi * qi - 2)),
            w * qi,
        ));
        ids.push(Identity::new("h_value", hv, qi * qi + 1));
    }
    ids.push(Identity::new("point_solid_double_count", w * white_lv + b * black_lv, size * solid_pts));
    ids.push(Identity::new(
        "point_solid_pair_triple_count",
        w * white_lv * (white_lv - 1) + b * black_lv * (black_lv - 1),
        size * (size - 1) * plane_pts,
    ));
    ids.push(Identity::new("family_size", size, half_q2 * (qi * qi + 1)));
    ids.push(Identity::new("black_points", b, solid_pts));
    ids.push(Identity::new("white_points", w, qi * qi * qi * qi - 1));
    ids.push(Identity::new("red_points", r, 1));
    ids.push(Identity::new("elliptic_class_size", partition.elliptic.len() as i64, half_q2 * (qi * qi - 1)));
    ids.push(Identity::new("tangent_class_size", partition.tangent.len() as i64, solid_pts));

    let spectrum_of = |fam: &SolidFamily| Spectrum::from_values(fam.iter().map(|s| black_counts[s] as u64));
    let black_per_solid = BlackPerSolid {
        hyperbolic: spectrum_of(h),
        elliptic: spectrum_of(&partition.elliptic),
        tangent: spectrum_of(&partition.tangent),
    };
    let matching = |fam: &SolidFamily, want: i64| fam.iter().filter(|&s| black_counts[s] as i64 == want).count() as i64;
    ids.push(Identity::new("hyperbolic_solids_black_count", matching(h, (qi + 1) * (qi + 1)), size));
    ids.push(Identity::new(
        "elliptic_solids_black_count",
        matching(&partition.elliptic, qi * qi + 1),
        partition.elliptic.len() as i64,
    ));
    ids.push(Identity::new(
        "tangent_solids_black_count",
        matching(&partition.tangent, plane_pts),
        partition.tangent.len() as i64,
    ));

    StructureCounts {
        h: h_ratio,
        partition: PartitionSizes { h: h.len(), e: partition.elliptic.len(), t: partition.tangent.len() },
        black_per_solid,
        identities: ids,
    }
}

/// Histogram of `|K ∩ π|` over all planes.
pub fn plane_spectrum(geom: &Geometry, k: &PointSet) -> Spectrum {
    Spectrum::from_values(incidence::subspace_intersections(geom, k, 2).into_iter().map(u64::from))
}

/// Histogram of `|K ∩ Σ|` over all solids.
pub fn solid_spectrum(geom: &Geometry, k: &PointSet) -> Spectrum {
    Spectrum::from_values(incidence::solid_intersections(geom, k).into_iter().map(u64::from))
}

/// Upper bound on projective solutions tried when the linear system leaves
/// more than one form up to scalars.
const FIT_CANDIDATE_LIMIT: usize = 1 << 20;

/// A non-singular parabolic form whose zero set is exactly `k`, if any.
///
/// Solves `f(P) = 0` for all `P ∈ K` over the 15 coefficients, then tries the
/// projective solutions in order until one has zero set `K` and a nucleus.
pub fn fit_quadratic_form(geom: &Geometry, k: &PointSet) -> Option<QuadraticForm> {
    let field = geom.field();
    let q = geom.q();
    if k.universe() != geom.num_points() || k.len() != geom.points_in_dim(3) {
        return None;
    }
    let mut rows: Vec<[Scalar; 15]> = k
        .iter()
        .map(|p| QuadraticForm::monomials(field, &geom.canonical_vec(p)))
        .collect();
    let pivots = linalg::rref(field, &mut rows);
    let basis = linalg::null_space_of_rref(field, &rows[..pivots.len()], &pivots);
    if basis.is_empty() || q.checked_pow(basis.len() as u32).is_none_or(|n| n > FIT_CANDIDATE_LIMIT) {
        return None;
    }
    let accepts = |form: &QuadraticForm| {
        (0..geom.num_points()).all(|p| (form.evaluate(field, &geom.canonical_vec(p)) == 0) == k.contains(p))
            && quadric::nucleus(geom, form).is_ok()
    };
    // Left-normalized coefficient vectors over an RREF basis give each
    // projective solution once, already normalized.
    let d = basis.len();
    for lead in 0..d {
        let tail = d - lead - 1;
        for digits in 0..q.pow(tail as u32) {
            let mut coeffs = basis[lead];
            let mut rest = digits;
            for t in (lead + 1..d).rev() {
                let c = (rest % q) as Scalar;
                rest /= q;
                if c != 0 {
                    for (x, &b) in coeffs.iter_mut().zip(&basis[t]) {
                        *x ^= field.mul(c, b);
                    }
                }
            }
            let form = QuadraticForm::new(coeffs);
            if accepts(&form) {
                return Some(form);
            }
        }
    }
    None
}

/// Incidence spectra of the hyperbolic family of a parabolic form over
/// points, lines and planes, with their allowed supports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lemma1Spectra {
    pub points: Spectrum,
    pub lines: Spectrum,
    pub planes: Spectrum,
    pub points_support: Vec<u64>,
    pub lines_support: Vec<u64>,
    pub planes_support: Vec<u64>,
    pub points_ok: bool,
    pub lines_ok: bool,
    pub planes_ok: bool,
    /// Point multiplicities are (1, q⁴−1, q³+q²+q+1) for values
    /// (0, q³/2, (q³+q²)/2).
    pub point_multiplicities_ok: bool,
}

impl Lemma1Spectra {
    pub fn all_ok(&self) -> bool {
        self.points_ok && self.lines_ok && self.planes_ok && self.point_multiplicities_ok
    }
}

pub fn lemma1_supports(q: usize) -> [Vec<u64>; 3] {
    let q = q as u64;
    [
        vec![0, q * q * q / 2, (q * q * q + q * q) / 2],
        vec![0, q * (q - 1) / 2, q * q / 2, q * (q + 1) / 2, q * q],
        vec![0, q / 2, q],
    ]
}

pub fn verify_lemma1(geom: &Geometry, form: &QuadraticForm) -> Result<Lemma1Spectra, QuadricError> {
    let classes = quadric::classify_all_solids(geom, form)?;
    let h = &classes.hyperbolic;
    let hist = |v: Vec<u32>| Spectrum::from_values(v.into_iter().map(u64::from));
    let points = hist(incidence::point_incidences(geom, h));
    let lines = hist(incidence::subspace_incidences(geom, h, 1));
    let planes = hist(incidence::subspace_incidences(geom, h, 2));
    let [ps, ls, pls] = lemma1_supports(geom.q());
    let q = geom.q() as u64;
    let point_multiplicities_ok = points.count(ps[0]) == 1
        && points.count(ps[1]) == q.pow(4) - 1
        && points.count(ps[2]) == q * q * q + q * q + q + 1;
    Ok(Lemma1Spectra {
        points_ok: points.support_within(&ps),
        lines_ok: lines.support_within(&ls),
        planes_ok: planes.support_within(&pls),
        point_multiplicities_ok,
        points,
        lines,
        planes,
        points_support: ps,
        lines_support: ls,
        planes_support: pls,
    })
}

/// Machine-checkable evidence attached to a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Witness {
    Point { point: usize, coords: Vec5, count: u32 },
    Plane { plane: usize, count: u32 },
    Solid { solid: usize, count: u32 },
    Detail { detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Verdict {
    /// Some point lies on a number of members other than 0, q³/2, (q³+q²)/2.
    /// Witnesses are the offending points.
    ViolatesI { witnesses: Vec<Witness> },
    /// Point condition holds, plane condition fails, and the black points
    /// form a quasi-quadric whose (q+1)²-solids are exactly the family.
    /// Witnesses are the planes breaking the plane condition.
    #[serde(rename = "SatisfiesI-QuasiQuadric")]
    QuasiQuadric { witnesses: Vec<Witness>, nucleus: Vec5 },
    /// Both conditions hold; the black points are the zero set of `form` and
    /// the family is its hyperbolic solids. The witness is the red point.
    #[serde(rename = "SatisfiesI&II-Quadric")]
    Quadric { witnesses: Vec<Witness>, form: QuadraticForm, nucleus: Vec5 },
    /// A verification step contradicted what the counting arguments imply.
    InternalInconsistency { witnesses: Vec<Witness> },
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::ViolatesI { .. } => "ViolatesI",
            Verdict::QuasiQuadric { .. } => "SatisfiesI-QuasiQuadric",
            Verdict::Quadric { .. } => "SatisfiesI&II-Quadric",
            Verdict::InternalInconsistency { .. } => "InternalInconsistency",
        }
    }

    pub fn witnesses(&self) -> &[Witness] {
        match self {
            Verdict::ViolatesI { witnesses }
            | Verdict::QuasiQuadric { witnesses, .. }
            | Verdict::Quadric { witnesses, .. }
            | Verdict::InternalInconsistency { witnesses } => witnesses,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Spectra {
    /// Members through each point.
    pub points: Spectrum,
    /// Members through each line.
    pub lines: Option<Spectrum>,
    /// Members through each plane.
    pub planes: Option<Spectrum>,
    /// Black points in each solid.
    pub solids: Option<Spectrum>,
    pub black_lines: Option<Spectrum>,
    pub black_planes: Option<Spectrum>,
}

/// Structured outcome of [`characterize`]. Serializes to the JSON report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub q: usize,
    pub modulus: u32,
    pub family_size: usize,
    pub h: Ratio,
    pub colors: Census,
    pub partition: Option<PartitionSizes>,
    pub black_per_solid: Option<BlackPerSolid>,
    pub spectra: Spectra,
    pub identities: Vec<Identity>,
    pub verdict: Verdict,
}

impl Report {
    pub fn failed_identities(&self) -> Vec<&Identity> {
        self.identities.iter().filter(|i| !i.holds).collect()
    }
}

/// Accumulated over all planes in one pass.
#[derive(Clone)]
struct PlanePass {
    black_hist: Vec<u64>,
    family_hist: Vec<u64>,
    sum_x: Vec<u64>,
    sum_x_pairs: Vec<u64>,
    sum_quadratic: Vec<i64>,
    ii_violations: Vec<(usize, u32)>,
    through_red: i64,
    through_red_ok: i64,
    off_red: i64,
    off_red_rule_ok: i64,
    count_identity_ok: i64,
}

impl PlanePass {
    fn new(q: usize, solids: usize) -> Self {
        PlanePass {
            black_hist: vec![0; q * q + q + 2],
            family_hist: vec![0; q + 2],
            sum_x: vec![0; solids],
            sum_x_pairs: vec![0; solids],
            sum_quadratic: vec![0; solids],
            ii_violations: Vec::new(),
            through_red: 0,
            through_red_ok: 0,
            off_red: 0,
            off_red_rule_ok: 0,
            count_identity_ok: 0,
        }
    }

    fn merge(mut self, other: PlanePass) -> PlanePass {
        let add = |a: &mut Vec<u64>, b: &[u64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.black_hist, &other.black_hist);
        add(&mut self.family_hist, &other.family_hist);
        add(&mut self.sum_x, &other.sum_x);
        add(&mut self.sum_x_pairs, &other.sum_x_pairs);
        self.sum_quadratic.iter_mut().zip(&other.sum_quadratic).for_each(|(x, y)| *x += y);
        self.ii_violations.extend(other.ii_violations);
        self.through_red += other.through_red;
        self.through_red_ok += other.through_red_ok;
        self.off_red += other.off_red;
        self.off_red_rule_ok += other.off_red_rule_ok;
        self.count_identity_ok += other.count_identity_ok;
        self
    }
}

struct LinePass {
    black_hist: Vec<u64>,
    family_hist: Vec<u64>,
    through_red: i64,
    through_red_ok: i64,
}

fn hist_to_spectrum(h: &[u64]) -> Spectrum {
    let mut values = Vec::new();
    for (v, &c) in h.iter().enumerate() {
        values.extend(std::iter::repeat_n(v as u64, c as usize));
    }
    Spectrum::from_values(values)
}

fn plane_pass(
    geom: &Geometry,
    h: &SolidFamily,
    tangent: &SolidFamily,
    black: &PointSet,
    red: &PointSet,
    total_black: i64,
) -> PlanePass {
    let q = geom.q();
    let qi = q as i64;
    let bound = (q / 2) as u32;
    let mut pass = exec::fold_range(
        geom.num_planes(),
        || PlanePass::new(q, geom.num_solids()),
        |mut acc, i| {
            let plane = geom.subspace(2, i);
            let mut x = 0u32;
            let mut has_red = false;
            geom.for_each_point_in(&plane, |p| {
                x += black.contains(p) as u32;
                has_red |= red.contains(p);
            });
            let mut s = 0u32;
            let mut t = 0u32;
            let xi = x as u64;
            geom.for_each_solid_through(&plane, |sol| {
                if h.contains(sol) {
                    s += 1;
                    acc.sum_x[sol] += xi;
                    acc.sum_x_pairs[sol] += xi * xi.saturating_sub(1);
                    acc.sum_quadratic[sol] += (xi as i64 - (qi + 1)) * (xi as i64 - (2 * qi + 1));
                }
                t += tangent.contains(sol) as u32;
            });
            acc.black_hist[x as usize] += 1;
            acc.family_hist[s as usize] += 1;
            if s > 0 && s < bound {
                acc.ii_violations.push((i, s));
            }
            if has_red {
                acc.through_red += 1;
                acc.through_red_ok += (x as i64 == qi + 1) as i64;
            } else {
                acc.off_red += 1;
                acc.off_red_rule_ok += (x == 2 * s + 1) as i64;
            }
            let (s, t, x) = (s as i64, t as i64, x as i64);
            let lhs = t * (qi * qi + qi + 1) + s * (qi + 1) * (qi + 1) + (qi + 1 - s - t) * (qi * qi + 1);
            acc.count_identity_ok += (lhs == total_black + qi * x) as i64;
            acc
        },
        PlanePass::merge,
    );
    pass.ii_violations.sort_unstable();
    pass
}

fn line_pass(geom: &Geometry, h: &SolidFamily, black: &PointSet, red: &PointSet) -> LinePass {
    let q = geom.q();
    let per_line = exec::map_range(geom.num_lines(), |i| {
        let line = geom.subspace(1, i);
        let mut x = 0u32;
        let mut has_red = false;
        geom.for_each_point_in(&line, |p| {
            x += black.contains(p) as u32;
            has_red |= red.contains(p);
        });
        let mut s = 0u32;
        geom.for_each_solid_through(&line, |sol| s += h.contains(sol) as u32);
        (x, s, has_red)
    });
    let mut pass = LinePass {
        black_hist: vec![0; q + 2],
        family_hist: vec![0; q * q + q + 2],
        through_red: 0,
        through_red_ok: 0,
    };
    for (x, s, has_red) in per_line {
        pass.black_hist[x as usize] += 1;
        pass.family_hist[s as usize] += 1;
        if has_red {
            pass.through_red += 1;
            pass.through_red_ok += (x == 1) as i64;
        }
    }
    pass
}

fn point_witness(geom: &Geometry, point: usize, count: u32) -> Witness {
    Witness::Point { point, coords: geom.canonical_vec(point), count }
}

/// Runs the full characterization of a non-empty solid family.
///
/// Point condition first; on failure the verdict lists every offending
/// point. Otherwise the lemma-chain identities are evaluated, the plane
/// condition is checked, and the black set is confirmed either as a
/// quasi-quadric generating the family (plane condition fails) or as a
/// non-singular quadric whose hyperbolic solids are the family. Any failed
/// confirmation yields [`Verdict::InternalInconsistency`].
pub fn characterize(geom: &Geometry, h: &SolidFamily) -> Result<Report, FamilyError> {
    check_universe(geom, h.universe())?;
    if h.is_empty() {
        return Err(FamilyError::EmptyFamily);
    }
    let q = geom.q();
    let qi = q as i64;
    let counts = point_incidence_counts(geom, h);
    let colors = ColorMap::from_counts(q, &counts);
    let mut report = Report {
        q,
        modulus: geom.field().modulus(),
        family_size: h.len(),
        h: h_ratio(q, h.len()),
        colors: colors.census(),
        partition: None,
        black_per_solid: None,
        spectra: Spectra {
            points: Spectrum::from_values(counts.iter().map(|&c| c as u64)),
            ..Default::default()
        },
        identities: Vec::new(),
        verdict: Verdict::ViolatesI { witnesses: Vec::new() },
    };
    if !colors.satisfies_condition_i() {
        let witnesses = colors.violations().into_iter().map(|(p, c)| point_witness(geom, p, c)).collect();
        report.verdict = Verdict::ViolatesI { witnesses };
        return Ok(report);
    }

    let inconsistent = |report: &mut Report, details: Vec<String>| {
        report.verdict = Verdict::InternalInconsistency {
            witnesses: details.into_iter().map(|detail| Witness::Detail { detail }).collect(),
        };
    };

    let partition = match partition_solids(geom, h, &colors) {
        Ok(p) => p,
        Err(FamilyError::RedPointInFamily { solid, point }) => {
            inconsistent(&mut report, vec![format!("solid {solid} of the family contains red point {point}")]);
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let black = colors.black();
    let red = colors.red();
    let black_counts = incidence::solid_intersections(geom, &black);
    let structure = structure_counts_with(q, h, &colors, &partition, &black_counts);
    report.partition = Some(structure.partition);
    report.black_per_solid = Some(structure.black_per_solid);
    report.identities = structure.identities;
    report.spectra.solids = Some(Spectrum::from_values(black_counts.iter().map(|&c| c as u64)));

    let census = colors.census();
    let planes = plane_pass(geom, h, &partition.tangent, &black, &red, census.black as i64);
    let lines = line_pass(geom, h, &black, &red);
    report.spectra.planes = Some(hist_to_spectrum(&planes.family_hist));
    report.spectra.black_planes = Some(hist_to_spectrum(&planes.black_hist));
    report.spectra.lines = Some(hist_to_spectrum(&lines.family_hist));
    report.spectra.black_lines = Some(hist_to_spectrum(&lines.black_hist));

    let size = h.len() as i64;
    let sum_x_target = (qi + 1) * (qi + 1) * (qi * qi + qi + 1);
    let sum_pairs_target = (qi + 1).pow(3) * (qi * qi + 2 * qi);
    let per_solid = |pred: &dyn Fn(usize) -> bool| h.iter().filter(|&s| pred(s)).count() as i64;
    let ids = &mut report.identities;
    ids.push(Identity::new(
        "planes_through_red_point_black_count",
        planes.through_red_ok,
        planes.through_red,
    ));
    ids.push(Identity::new("lines_through_red_point_black_count", lines.through_red_ok, lines.through_red));
    ids.push(Identity::new("plane_black_count_rule", planes.off_red_rule_ok, planes.off_red));
    ids.push(Identity::new(
        "plane_solid_black_count_identity",
        planes.count_identity_ok,
        geom.num_planes() as i64,
    ));
    ids.push(Identity::new(
        "plane_sum_x_per_hyperbolic_solid",
        per_solid(&|s| planes.sum_x[s] as i64 == sum_x_target),
        size,
    ));
    ids.push(Identity::new(
        "plane_sum_x_pairs_per_hyperbolic_solid",
        per_solid(&|s| planes.sum_x_pairs[s] as i64 == sum_pairs_target),
        size,
    ));
    ids.push(Identity::new(
        "plane_quadratic_sum_per_hyperbolic_solid",
        per_solid(&|s| planes.sum_quadratic[s] == 0),
        size,
    ));

    let failed: Vec<String> = report
        .failed_identities()
        .iter()
        .map(|i| format!("{}: {} != {}", i.name, i.lhs, i.rhs))
        .collect();
    if !failed.is_empty() {
        inconsistent(&mut report, failed);
        return Ok(report);
    }

    let red_point = red.members()[0];
    let nucleus = geom.canonical_vec(red_point);
    let ii = ConditionII { holds: planes.ii_violations.is_empty(), violating_planes: planes.ii_violations };

    if !ii.holds {
        let cand = quasi::QuasiCandidate { points: black.clone(), nucleus: red_point };
        let mut problems = Vec::new();
        if let Some(w) = quasi::quasi_quadric_witness(geom, &cand) {
            problems.push(format!("black set is not a quasi-quadric: {w:?}"));
        }
        let qp1 = (q + 1) * (q + 1);
        let generated = quasi::solids_meeting_in(geom, &black, qp1 as u32);
        if &generated != h {
            problems.push(format!("family differs from the solids meeting the black set in {qp1} points"));
        }
        if problems.is_empty() {
            let witnesses = ii
                .violating_planes
                .iter()
                .map(|&(plane, count)| Witness::Plane { plane, count })
                .collect();
            report.verdict = Verdict::QuasiQuadric { witnesses, nucleus };
        } else {
            inconsistent(&mut report, problems);
        }
        return Ok(report);
    }

    let mut problems = Vec::new();
    let plane_vals = [1, qi as u64 + 1, 2 * qi as u64 + 1];
    let q2 = (qi * qi) as u64;
    let solid_vals = [q2 + 1, q2 + qi as u64 + 1, (qi as u64 + 1).pow(2)];
    if !report.spectra.black_planes.as_ref().unwrap().support_within(&plane_vals) {
        problems.push("black plane spectrum outside {1, q+1, 2q+1}".to_string());
    }
    if !report.spectra.solids.as_ref().unwrap().support_within(&solid_vals) {
        problems.push("black solid spectrum outside {q²+1, q²+q+1, (q+1)²}".to_string());
    }
    match fit_quadratic_form(geom, &black) {
        None => problems.push("no non-singular quadratic form vanishes exactly on the black set".to_string()),
        Some(form) => {
            let classes = quadric::classify_all_solids(geom, &form)?;
            if &classes.hyperbolic != h {
                problems.push("family differs from the hyperbolic solids of the fitted form".to_string());
            }
            if classes.elliptic != partition.elliptic {
                problems.push("elliptic class differs from the fitted form's elliptic solids".to_string());
            }
            if classes.tangent != partition.tangent {
                problems.push("tangent class differs from the fitted form's cone solids".to_string());
            }
            let n = quadric::nucleus(geom, &form)?;
            if geom.point_index(&n) != red_point {
                problems.push(format!("fitted nucleus {n:?} is not the red point"));
            }
            if problems.is_empty() {
                report.verdict = Verdict::Quadric {
                    witnesses: vec![point_witness(geom, red_point, 0)],
                    form,
                    nucleus,
                };
                return Ok(report);
            }
        }
    }
    inconsistent(&mut report, problems);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadric::classify_all_solids;

    fn setup(q: usize) -> (Geometry, QuadraticForm, quadric::SolidClasses) {
        let g = Geometry::with_order(q).unwrap();
        let f = QuadraticForm::canonical_q4();
        let c = classify_all_solids(&g, &f).unwrap();
        (g, f, c)
    }

    #[test]
    fn incidence_counts_q2() {
        let (g, _, c) = setup(2);
        let counts = point_incidence_counts(&g, &c.hyperbolic);
        let zeros = quadric::zero_set(&g, &QuadraticForm::canonical_q4());
        let n = g.canonical_index(&[1, 0, 0, 0, 0]);
        for (p, &k) in counts.iter().enumerate() {
            let want = if p == n { 0 } else if zeros.contains(p) { 6 } else { 4 };
            assert_eq!(k, want);
        }
        assert!(point_incidence_counts(&g, &SolidFamily::empty(31)).iter().all(|&k| k == 0));
        let all = SolidFamily::from_indices(31, 0..31);
        assert!(point_incidence_counts(&g, &all).iter().all(|&k| k == 15));
    }

    #[test]
    fn coloring_and_violations() {
        let (g, _, c) = setup(2);
        let colors = check_condition_i(&g, &c.hyperbolic);
        assert_eq!(colors.census(), Census { red: 1, white: 15, black: 15, violations: 0 });

        let one = SolidFamily::from_indices(31, [c.hyperbolic.members()[0]]);
        let colors = check_condition_i(&g, &one);
        assert_eq!(colors.census().violations, 15);

        let mut minus = c.hyperbolic.clone();
        let dropped = minus.members()[3];
        minus.remove(dropped);
        let colors = check_condition_i(&g, &minus);
        let mut expect = g.solid_points(dropped);
        expect.sort_unstable();
        let got: Vec<usize> = colors.violations().into_iter().map(|(p, _)| p).collect();
        assert_eq!(got, expect);
    }

    #[test]
    fn condition_ii_cases() {
        let (g, _, c) = setup(4);
        let ii = check_condition_ii(&g, &c.hyperbolic);
        assert!(ii.holds);
        let planes = incidence::subspace_incidences(&g, &c.hyperbolic, 2);
        assert!(Spectrum::from_values(planes.iter().map(|&x| x as u64)).support_within(&[0, 2, 4]));
        let one = SolidFamily::from_indices(g.num_solids(), [7]);
        let ii = check_condition_ii(&g, &one);
        assert!(!ii.holds);
        assert_eq!(ii.violating_planes.len(), g.points_in_dim(3));
        assert!(check_condition_ii(&g, &SolidFamily::empty(g.num_solids())).holds);
    }

    #[test]
    fn partition_and_structure() {
        for (q, t, e) in [(2, 15, 6), (4, 85, 120)] {
            let (g, _, c) = setup(q);
            let colors = check_condition_i(&g, &c.hyperbolic);
            let p = partition_solids(&g, &c.hyperbolic, &colors).unwrap();
            assert_eq!((p.tangent.len(), p.elliptic.len()), (t, e));
            assert_eq!(p.tangent, c.tangent);
            assert_eq!(p.elliptic, c.elliptic);
            let s = structure_counts(&g, &c.hyperbolic, &colors).unwrap();
            assert!(s.identities.iter().all(|i| i.holds), "{:?}", s.identities);
        }
        let (g, _, c) = setup(2);
        let colors = check_condition_i(&g, &c.hyperbolic);
        let s = structure_counts(&g, &c.hyperbolic, &colors).unwrap();
        assert_eq!(s.h, Ratio { num: 5, den: 1 });
        assert_eq!(s.black_per_solid.hyperbolic.support(), vec![9]);
        assert_eq!(s.black_per_solid.elliptic.support(), vec![5]);
        assert_eq!(s.black_per_solid.tangent.support(), vec![7]);

        // a red point inside a member: add a tangent solid to H but keep the old colors
        let mut bad = c.hyperbolic.clone();
        bad.insert(c.tangent.members()[0]);
        assert!(matches!(
            partition_solids(&g, &bad, &colors),
            Err(FamilyError::RedPointInFamily { .. })
        ));
    }

    #[test]
    fn h_as_rational() {
        assert_eq!(h_ratio(4, 136), Ratio { num: 17, den: 1 });
        assert_eq!(h_ratio(4, 7), Ratio { num: 7, den: 8 });
        assert_eq!(h_ratio(4, 7).integer(), None);
    }

    #[test]
    fn spectra_of_quadric_and_trivial_sets() {
        let (g, f, _) = setup(2);
        let zeros = quadric::zero_set(&g, &f);
        assert_eq!(plane_spectrum(&g, &zeros).support(), vec![1, 3, 5]);
        assert_eq!(solid_spectrum(&g, &zeros).support(), vec![5, 7, 9]);
        let sp = solid_spectrum(&g, &zeros);
        assert_eq!((sp.count(5), sp.count(7), sp.count(9)), (6, 15, 10));
        assert_eq!(plane_spectrum(&g, &PointSet::empty(31)).support(), vec![0]);
        assert_eq!(solid_spectrum(&g, &PointSet::from_indices(31, [0])).support(), vec![0, 1]);
    }

    #[test]
    fn fit_recovers_forms() {
        let (g, f, _) = setup(4);
        let zeros = quadric::zero_set(&g, &f);
        assert_eq!(fit_quadratic_form(&g, &zeros), Some(f));
        assert_eq!(fit_quadratic_form(&g, &PointSet::empty(g.num_points())), None);
        let mut moved = zeros.clone();
        moved.remove(zeros.members()[0]);
        moved.insert(g.canonical_index(&[1, 0, 0, 0, 0]));
        assert_eq!(fit_quadratic_form(&g, &moved), None);
    }

    #[test]
    fn lemma1_q2_q4() {
        for q in [2, 4] {
            let (g, f, _) = setup(q);
            let l = verify_lemma1(&g, &f).unwrap();
            assert!(l.all_ok(), "{l:?}");
        }
        let (g, f, _) = setup(2);
        let l = verify_lemma1(&g, &f).unwrap();
        assert_eq!(l.points.iter().collect::<Vec<_>>(), vec![(0, 1), (4, 15), (6, 15)]);
    }

    #[test]
    fn characterize_canonical() {
        for q in [2, 4] {
            let (g, f, c) = setup(q);
            let r = characterize(&g, &c.hyperbolic).unwrap();
            match &r.verdict {
                Verdict::Quadric { form, nucleus, witnesses } => {
                    assert_eq!(quadric::zero_set(&g, form), quadric::zero_set(&g, &f));
                    assert_eq!(nucleus, &[1, 0, 0, 0, 0]);
                    assert!(!witnesses.is_empty());
                }
                v => panic!("unexpected verdict {v:?}"),
            }
            assert!(r.failed_identities().is_empty());
        }
    }

    #[test]
    fn characterize_rejects_perturbations() {
        let (g, _, c) = setup(2);
        let one = SolidFamily::from_indices(31, [c.hyperbolic.members()[0]]);
        let r = characterize(&g, &one).unwrap();
        assert_eq!(r.verdict.kind(), "ViolatesI");
        assert_eq!(r.verdict.witnesses().len(), 15);
        assert_eq!(characterize(&g, &SolidFamily::empty(31)), Err(FamilyError::EmptyFamily));
    }
}
