//! The projective space PG(4,q): canonical points, solids and subspaces,
//! their enumeration orders, and incidence.
//!
//! # Enumeration order
//!
//! Points are indexed in lexicographic order of their left-normalized
//! coordinate tuples, so index 0 is `(0,0,0,0,1)` and the last index is
//! `(1,q-1,...,q-1)`. Solids use the same order on their canonical
//! covectors: a solid and a point with identical coordinates share an index.
//!
//! Lines, planes (and, via [`Geometry::subspace`], any dimension 0..=3) are
//! indexed by Schubert cell: cells are ordered by pivot-column tuple in
//! decreasing lexicographic order, and inside a cell the free RREF entries,
//! read row-major, form a base-q number. For dimension 0 this coincides
//! with the point order. The scheme gives O(1) random access by index, so
//! bulk passes over 10^7 planes never materialize the list.

use arrayvec::ArrayVec;
use thiserror::Error;

use crate::gf::{Field, Scalar};
use crate::linalg;

pub type Vec5 = [Scalar; 5];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("the zero vector is not a projective point")]
    ZeroVector,
    #[error("coordinate {value} out of range for GF({q})")]
    OutOfRange { value: u32, q: usize },
    #[error("cannot test containment of a dimension-{inner} subspace in a dimension-{outer} one")]
    DimensionMismatch { outer: usize, inner: usize },
    #[error("subspace dimension {0} not in 0..=3")]
    BadDimension(usize),
}

/// Scales `v` so its first nonzero entry is 1. `None` for the zero vector.
#[inline]
pub fn normalize(field: &Field, v: &Vec5) -> Option<Vec5> {
    let lead = *v.iter().find(|&&x| x != 0)?;
    if lead == 1 {
        return Some(*v);
    }
    let inv = field.inv_nonzero(lead);
    Some(v.map(|x| field.mul(x, inv)))
}

fn checked_canonical(field: &Field, coords: &[u32; 5]) -> Result<Vec5, GeometryError> {
    let mut v = [0; 5];
    for (d, &c) in v.iter_mut().zip(coords) {
        if c as usize >= field.q() {
            return Err(GeometryError::OutOfRange { value: c, q: field.q() });
        }
        *d = c as Scalar;
    }
    normalize(field, &v).ok_or(GeometryError::ZeroVector)
}

/// A point of PG(4,q) in canonical (left-normalized) coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint(Vec5);

impl ProjPoint {
    /// Normalizes any nonzero representative.
    pub fn new(field: &Field, coords: [u32; 5]) -> Result<Self, GeometryError> {
        checked_canonical(field, &coords).map(ProjPoint)
    }

    pub fn from_vec(field: &Field, v: &Vec5) -> Option<Self> {
        normalize(field, v).map(ProjPoint)
    }

    pub fn coords(&self) -> &Vec5 {
        &self.0
    }
}

/// A hyperplane of PG(4,q), stored as its canonical covector `u`;
/// the point `x` lies in it iff `u · x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Solid(Vec5);

impl Solid {
    pub fn new(field: &Field, covector: [u32; 5]) -> Result<Self, GeometryError> {
        checked_canonical(field, &covector).map(Solid)
    }

    pub fn from_vec(field: &Field, v: &Vec5) -> Option<Self> {
        normalize(field, v).map(Solid)
    }

    pub fn covector(&self) -> &Vec5 {
        &self.0
    }

    #[inline]
    pub fn contains_point(&self, field: &Field, p: &ProjPoint) -> bool {
        linalg::dot(field, &self.0, &p.0) == 0
    }
}

/// A projective subspace given by its generator matrix in reduced
/// row-echelon form. Dimension 0 is a point, 3 a solid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    rows: ArrayVec<Vec5, 5>,
}

impl Subspace {
    /// Row space of `vectors`; `None` if they span the whole space or nothing.
    fn from_rows(field: &Field, vectors: &[Vec5]) -> Option<Self> {
        let mut rows: ArrayVec<Vec5, 5> = ArrayVec::new();
        let mut work = vectors.to_vec();
        let rank = linalg::rref(field, &mut work).len();
        if rank == 0 || rank == 5 {
            return None;
        }
        rows.extend(work.into_iter().take(rank));
        Some(Subspace { rows })
    }

    /// Projective dimension (rank − 1).
    pub fn dim(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn rows(&self) -> &[Vec5] {
        &self.rows
    }

    pub fn pivots(&self) -> ArrayVec<usize, 5> {
        self.rows
            .iter()
            .map(|r| r.iter().position(|&x| x != 0).unwrap())
            .collect()
    }

    /// Whether the vector lies in the row space.
    pub fn contains_vec(&self, field: &Field, v: &Vec5) -> bool {
        let mut v = *v;
        for (row, p) in self.rows.iter().zip(self.pivots()) {
            let c = v[p];
            if c != 0 {
                for (x, &r) in v.iter_mut().zip(row) {
                    *x ^= field.mul(c, r);
                }
            }
        }
        v.iter().all(|&x| x == 0)
    }

    pub fn contains_point(&self, field: &Field, p: &ProjPoint) -> bool {
        self.contains_vec(field, &p.0)
    }
}

impl From<ProjPoint> for Subspace {
    fn from(p: ProjPoint) -> Self {
        let mut rows = ArrayVec::new();
        rows.push(p.0);
        Subspace { rows }
    }
}

/// Result of [`Geometry::span`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Span {
    Subspace(Subspace),
    /// The points span all of PG(4,q).
    Whole,
}

/// Calls `f` with every canonical vector in the row space of the RREF
/// `rows`. Combining RREF rows with a left-normalized coefficient vector
/// yields a left-normalized result, so no inversions are needed.
#[inline]
pub fn for_each_canonical_vec<F: FnMut(&Vec5)>(field: &Field, rows: &[Vec5], mut f: F) {
    let q = field.q();
    let k = rows.len();
    // multiples[i][c] = c * rows[i]
    let mut multiples = [[[0 as Scalar; 5]; 16]; 5];
    for (i, row) in rows.iter().enumerate() {
        for c in 1..q {
            multiples[i][c] = row.map(|x| field.mul(c as Scalar, x));
        }
    }
    let mut digits = [0usize; 5];
    for lead in 0..k {
        let tail = k - lead - 1;
        digits[..tail].fill(0);
        loop {
            let mut v = rows[lead];
            for (t, &d) in digits[..tail].iter().enumerate() {
                if d != 0 {
                    let m = &multiples[lead + 1 + t][d];
                    for j in 0..5 {
                        v[j] ^= m[j];
                    }
                }
            }
            f(&v);
            // odometer increment over the tail digits
            let mut pos = 0;
            loop {
                if pos == tail {
                    break;
                }
                digits[pos] += 1;
                if digits[pos] < q {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if pos == tail {
                break;
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Cell {
    pivots: ArrayVec<usize, 5>,
    /// (row, column) of each free entry, row-major.
    free: ArrayVec<(usize, usize), 10>,
    offset: usize,
    size: usize,
}

fn combinations(n: usize, k: usize) -> Vec<ArrayVec<usize, 5>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut ArrayVec<usize, 5>, out: &mut Vec<ArrayVec<usize, 5>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut ArrayVec::new(), &mut out);
    out
}

/// PG(4,q) over a fixed field: counts, index maps and incidence queries.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Geometry {
    field: Field,
    /// offsets[p] = first point index whose pivot is column p
    point_offsets: [usize; 5],
    n_points: usize,
    cells: [Vec<Cell>; 4],
    counts: [usize; 4],
}

impl Geometry {
    pub fn new(field: Field) -> Self {
        let q = field.q();
        let mut point_offsets = [0; 5];
        let mut acc = 0;
        for p in (0..5).rev() {
            point_offsets[p] = acc;
            acc += q.pow((4 - p) as u32);
        }
        let mut cells: [Vec<Cell>; 4] = Default::default();
        let mut counts = [0; 4];
        for dim in 0..4 {
            let mut offset = 0;
            let mut combos = combinations(5, dim + 1);
            combos.reverse();
            for pivots in combos {
                let mut free = ArrayVec::new();
                for (r, &p) in pivots.iter().enumerate() {
                    for c in (p + 1)..5 {
                        if !pivots.contains(&c) {
                            free.push((r, c));
                        }
                    }
                }
                let size = q.pow(free.len() as u32);
                cells[dim].push(Cell { pivots, free, offset, size });
                offset += size;
            }
            counts[dim] = offset;
        }
        debug_assert_eq!(counts[0], acc);
        Geometry { field, point_offsets, n_points: acc, cells, counts }
    }

    pub fn with_order(q: usize) -> Result<Self, crate::gf::FieldError> {
        Field::with_order(q, None).map(Geometry::new)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn q(&self) -> usize {
        self.field.q()
    }

    pub fn num_points(&self) -> usize {
        self.n_points
    }

    pub fn num_solids(&self) -> usize {
        self.n_points
    }

    /// Number of projective subspaces of dimension `dim` (0..=3).
    pub fn num_subspaces(&self, dim: usize) -> usize {
        self.counts[dim]
    }

    pub fn num_lines(&self) -> usize {
        self.counts[1]
    }

    pub fn num_planes(&self) -> usize {
        self.counts[2]
    }

    /// Index of a canonical vector in the shared point/solid order.
    #[inline]
    pub fn canonical_index(&self, v: &Vec5) -> usize {
        let e = self.field.exponent();
        let p = v.iter().position(|&x| x != 0).expect("zero vector has no index");
        debug_assert_eq!(v[p], 1, "vector not canonical");
        let mut digits = 0usize;
        for &x in &v[p + 1..] {
            digits = (digits << e) | x as usize;
        }
        self.point_offsets[p] + digits
    }

    #[inline]
    pub fn canonical_vec(&self, index: usize) -> Vec5 {
        assert!(index < self.n_points, "index {index} out of range");
        let e = self.field.exponent();
        let mask = self.q() - 1;
        let p = (0..5)
            .find(|&p| index >= self.point_offsets[p] && index - self.point_offsets[p] < self.q().pow((4 - p) as u32))
            .unwrap();
        let mut digits = index - self.point_offsets[p];
        let mut v = [0; 5];
        v[p] = 1;
        for j in (p + 1..5).rev() {
            v[j] = (digits & mask) as Scalar;
            digits >>= e;
        }
        v
    }

    pub fn point(&self, index: usize) -> ProjPoint {
        ProjPoint(self.canonical_vec(index))
    }

    pub fn point_index(&self, p: &ProjPoint) -> usize {
        self.canonical_index(&p.0)
    }

    pub fn solid(&self, index: usize) -> Solid {
        Solid(self.canonical_vec(index))
    }

    pub fn solid_index(&self, s: &Solid) -> usize {
        self.canonical_index(&s.0)
    }

    /// All points in index order.
    pub fn enumerate_points(&self) -> impl Iterator<Item = ProjPoint> + '_ {
        (0..self.n_points).map(|i| self.point(i))
    }

    pub fn enumerate_solids(&self) -> impl Iterator<Item = Solid> + '_ {
        (0..self.n_points).map(|i| self.solid(i))
    }

    /// The `index`-th subspace of dimension `dim` in cell order.
    pub fn subspace(&self, dim: usize, index: usize) -> Subspace {
        let cells = &self.cells[dim];
        let ci = cells.partition_point(|c| c.offset <= index) - 1;
        let cell = &cells[ci];
        assert!(index - cell.offset < cell.size, "subspace index {index} out of range");
        let mut local = index - cell.offset;
        let e = self.field.exponent();
        let mask = self.q() - 1;
        let mut rows: ArrayVec<Vec5, 5> = ArrayVec::new();
        for &p in &cell.pivots {
            let mut r = [0; 5];
            r[p] = 1;
            rows.push(r);
        }
        for &(r, c) in cell.free.iter().rev() {
            rows[r][c] = (local & mask) as Scalar;
            local >>= e;
        }
        Subspace { rows }
    }

    pub fn subspace_index(&self, sub: &Subspace) -> usize {
        let dim = sub.dim();
        let pivots = sub.pivots();
        let cell = self.cells[dim]
            .iter()
            .find(|c| c.pivots == pivots)
            .expect("pivot pattern always has a cell");
        let e = self.field.exponent();
        let mut local = 0usize;
        for &(r, c) in &cell.free {
            local = (local << e) | sub.rows[r][c] as usize;
        }
        cell.offset + local
    }

    /// Every subspace of dimension `dim` exactly once, in index order.
    pub fn enumerate_subspaces(&self, dim: usize) -> Result<impl Iterator<Item = Subspace> + '_, GeometryError> {
        if dim > 3 {
            return Err(GeometryError::BadDimension(dim));
        }
        Ok((0..self.counts[dim]).map(move |i| self.subspace(dim, i)))
    }

    /// Canonical row space of the points; [`Span::Whole`] at rank 5.
    pub fn span(&self, pts: &[ProjPoint]) -> Span {
        let rows: Vec<Vec5> = pts.iter().map(|p| p.0).collect();
        match Subspace::from_rows(&self.field, &rows) {
            Some(s) => Span::Subspace(s),
            None => Span::Whole,
        }
    }

    /// Line through two distinct points.
    pub fn line_through(&self, a: &ProjPoint, b: &ProjPoint) -> Subspace {
        match self.span(&[*a, *b]) {
            Span::Subspace(s) if s.dim() == 1 => s,
            _ => panic!("line_through needs two distinct points"),
        }
    }

    /// The solid as a generator matrix.
    pub fn solid_subspace(&self, s: &Solid) -> Subspace {
        let ns = linalg::null_space(&self.field, &[s.0]);
        Subspace { rows: ns.into_iter().collect() }
    }

    /// The covector of a dimension-3 subspace.
    pub fn subspace_solid(&self, sub: &Subspace) -> Option<Solid> {
        if sub.dim() != 3 {
            return None;
        }
        let ns = linalg::null_space(&self.field, &sub.rows);
        Some(Solid(ns[0]))
    }

    /// `inner ⊆ outer`, for subspaces of any dimension with
    /// `dim(inner) < dim(outer)`.
    pub fn contains(&self, outer: &Subspace, inner: &Subspace) -> Result<bool, GeometryError> {
        if inner.dim() >= outer.dim() {
            return Err(GeometryError::DimensionMismatch { outer: outer.dim(), inner: inner.dim() });
        }
        Ok(inner.rows.iter().all(|r| outer.contains_vec(&self.field, r)))
    }

    pub fn solid_contains(&self, s: &Solid, inner: &Subspace) -> Result<bool, GeometryError> {
        if inner.dim() >= 3 {
            return Err(GeometryError::DimensionMismatch { outer: 3, inner: inner.dim() });
        }
        Ok(inner.rows.iter().all(|r| linalg::dot(&self.field, &s.0, r) == 0))
    }

    /// Calls `f` with the index of every point of `sub`.
    #[inline]
    pub fn for_each_point_in(&self, sub: &Subspace, mut f: impl FnMut(usize)) {
        for_each_canonical_vec(&self.field, &sub.rows, |v| f(self.canonical_index(v)));
    }

    pub fn points_of(&self, sub: &Subspace) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.points_in_dim(sub.dim()));
        self.for_each_point_in(sub, |i| out.push(i));
        out
    }

    /// Points of a projective subspace of dimension `dim`: 1 + q + ... + q^dim.
    pub fn points_in_dim(&self, dim: usize) -> usize {
        (0..=dim).map(|k| self.q().pow(k as u32)).sum()
    }

    /// Calls `f` with the index of every solid containing `sub`. Works for
    /// points (as dimension-0 subspaces), lines and planes.
    #[inline]
    pub fn for_each_solid_through(&self, sub: &Subspace, mut f: impl FnMut(usize)) {
        let pivots = sub.pivots();
        let dual = linalg::null_space_of_rref(&self.field, &sub.rows, &pivots);
        for_each_canonical_vec(&self.field, &dual, |v| f(self.canonical_index(v)));
    }

    /// Solids through a line (q²+q+1 of them) or plane (q+1).
    pub fn solids_through(&self, sub: &Subspace) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_solid_through(sub, |i| out.push(i));
        out
    }

    /// Calls `f` with the index of every point of the solid.
    #[inline]
    pub fn for_each_point_of_solid(&self, solid: usize, mut f: impl FnMut(usize)) {
        let u = self.canonical_vec(solid);
        let basis = linalg::null_space(&self.field, &[u]);
        for_each_canonical_vec(&self.field, &basis, |v| f(self.canonical_index(v)));
    }

    pub fn solid_points(&self, solid: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.points_in_dim(3));
        self.for_each_point_of_solid(solid, |i| out.push(i));
        out
    }

    /// Calls `f` with the index of every solid through the point.
    #[inline]
    pub fn for_each_solid_through_point(&self, point: usize, f: impl FnMut(usize)) {
        // points and solids share the canonical order, so this is the dual of
        // for_each_point_of_solid
        self.for_each_point_of_solid(point, f)
    }

    /// Lines through a point, each as a canonical subspace, in index order.
    pub fn lines_through_point(&self, point: usize) -> Vec<Subspace> {
        let p = self.point(point);
        let mut idx: Vec<usize> = (0..self.n_points)
            .filter(|&i| i != point)
            .map(|i| self.subspace_index(&self.line_through(&p, &self.point(i))))
            .collect();
        idx.sort_unstable();
        idx.dedup();
        idx.into_iter().map(|i| self.subspace(1, i)).collect()
    }
}
