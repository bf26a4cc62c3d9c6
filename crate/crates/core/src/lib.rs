//! Exact computations in PG(4,q), q even: the parabolic quadric Q(4,q), its
//! hyperbolic, elliptic and tangent solids, characterization of arbitrary
//! solid families, and quasi-quadric search.

pub mod exec;
pub mod families;
pub mod format;
pub mod gf;
pub mod incidence;
pub mod linalg;
pub mod pg;
pub mod quadric;
pub mod quasi;
pub mod sets;
