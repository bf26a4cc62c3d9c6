//! The `PG4Q v1` text format for point sets and solid families.
//!
//! ```text
//! PG4Q v1 q=2 mod=2 kind=points nucleus=1,0,0,0,0
//! 0 0 0 0 1
//! 0 0 0 1 1
//! ```
//!
//! One canonical (left-normalized) vector per line, records sorted by
//! canonical index on output. The file must end with a newline; a missing
//! final newline is treated as truncation.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::gf::{Field, FieldError};
use crate::pg::{normalize, Geometry, Vec5};
use crate::sets::{PointSet, SolidFamily};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("empty input")]
    Empty,
    #[error("missing trailing newline (truncated file?)")]
    Truncated,
    #[error("bad header: {0}")]
    Header(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("line {line}: {msg}")]
    Record { line: usize, msg: String },
    #[error("expected kind={expected}, found kind={found}")]
    WrongKind { expected: Kind, found: Kind },
    #[error("q={file} in file but geometry has q={geom}")]
    OrderMismatch { file: usize, geom: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Points,
    Solids,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::Points => "points",
            Kind::Solids => "solids",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyFile {
    pub q: usize,
    pub modulus: u32,
    pub kind: Kind,
    pub nucleus: Option<Vec5>,
    /// Canonical vectors, in file order.
    pub records: Vec<Vec5>,
}

fn parse_vec(field: &Field, tokens: &[&str], what: &str) -> Result<Vec5, String> {
    if tokens.len() != 5 {
        return Err(format!("{what}: expected 5 integers, found {}", tokens.len()));
    }
    let mut v = [0; 5];
    for (slot, tok) in v.iter_mut().zip(tokens) {
        let x = u32::from_str(tok).map_err(|_| format!("{what}: not an integer: {tok:?}"))?;
        if x as usize >= field.q() {
            return Err(format!("{what}: {x} is not below q={}", field.q()));
        }
        *slot = x as u8;
    }
    match normalize(field, &v) {
        None => Err(format!("{what}: zero vector")),
        Some(n) if n != v => Err(format!("{what}: not left-normalized")),
        Some(_) => Ok(v),
    }
}

impl FamilyFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        if text.is_empty() {
            return Err(FormatError::Empty);
        }
        if !text.ends_with('\n') {
            return Err(FormatError::Truncated);
        }
        let mut lines = text.lines();
        let header = lines.next().ok_or(FormatError::Empty)?;
        let mut toks = header.split_whitespace();
        if toks.next() != Some("PG4Q") || toks.next() != Some("v1") {
            return Err(FormatError::Header("expected 'PG4Q v1'".into()));
        }
        let mut field_of = |key: &str| -> Result<&str, FormatError> {
            let tok = toks.next().ok_or_else(|| FormatError::Header(format!("missing {key}=")))?;
            tok.strip_prefix(key)
                .and_then(|t| t.strip_prefix('='))
                .ok_or_else(|| FormatError::Header(format!("expected {key}=, found {tok:?}")))
        };
        let q: usize = field_of("q")?.parse().map_err(|_| FormatError::Header("q is not an integer".into()))?;
        let modulus: u32 = field_of("mod")?.parse().map_err(|_| FormatError::Header("mod is not an integer".into()))?;
        let kind = match field_of("kind")? {
            "points" => Kind::Points,
            "solids" => Kind::Solids,
            k => return Err(FormatError::Header(format!("unknown kind {k:?}"))),
        };
        let field = Field::with_order(q, Some(modulus))?;
        let nucleus = match toks.next() {
            None => None,
            Some(tok) => {
                let body = tok
                    .strip_prefix("nucleus=")
                    .ok_or_else(|| FormatError::Header(format!("unexpected token {tok:?}")))?;
                if kind != Kind::Points {
                    return Err(FormatError::Header("nucleus= is only allowed for kind=points".into()));
                }
                let parts: Vec<&str> = body.split(',').collect();
                Some(parse_vec(&field, &parts, "nucleus").map_err(FormatError::Header)?)
            }
        };
        if let Some(tok) = toks.next() {
            return Err(FormatError::Header(format!("unexpected token {tok:?}")));
        }

        let mut records = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let parts: Vec<&str> = line.split_whitespace().collect();
            let v = parse_vec(&field, &parts, "record").map_err(|msg| FormatError::Record { line: line_no, msg })?;
            if !seen.insert(v) {
                return Err(FormatError::Record { line: line_no, msg: "duplicate record".into() });
            }
            records.push(v);
        }
        Ok(FamilyFile { q, modulus, kind, nucleus, records })
    }

    /// Header plus one record per line, each line newline-terminated.
    pub fn to_text(&self) -> String {
        let mut out = format!("PG4Q v1 q={} mod={} kind={}", self.q, self.modulus, self.kind);
        if let Some(n) = self.nucleus {
            let parts: Vec<String> = n.iter().map(|x| x.to_string()).collect();
            write!(out, " nucleus={}", parts.join(",")).unwrap();
        }
        out.push('\n');
        for r in &self.records {
            let parts: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            out.push_str(&parts.join(" "));
            out.push('\n');
        }
        out
    }

    /// The geometry over the field named in the header.
    pub fn geometry(&self) -> Result<Geometry, FormatError> {
        Ok(Geometry::new(Field::with_order(self.q, Some(self.modulus))?))
    }

    fn check(&self, geom: &Geometry, kind: Kind) -> Result<(), FormatError> {
        if self.kind != kind {
            return Err(FormatError::WrongKind { expected: kind, found: self.kind });
        }
        if self.q != geom.q() {
            return Err(FormatError::OrderMismatch { file: self.q, geom: geom.q() });
        }
        Ok(())
    }

    pub fn point_set(&self, geom: &Geometry) -> Result<PointSet, FormatError> {
        self.check(geom, Kind::Points)?;
        Ok(PointSet::from_indices(geom.num_points(), self.records.iter().map(|v| geom.canonical_index(v))))
    }

    pub fn solid_family(&self, geom: &Geometry) -> Result<SolidFamily, FormatError> {
        self.check(geom, Kind::Solids)?;
        Ok(SolidFamily::from_indices(geom.num_solids(), self.records.iter().map(|v| geom.canonical_index(v))))
    }

    pub fn from_points(geom: &Geometry, points: &PointSet, nucleus: Option<usize>) -> Self {
        FamilyFile {
            q: geom.q(),
            modulus: geom.field().modulus(),
            kind: Kind::Points,
            nucleus: nucleus.map(|n| geom.canonical_vec(n)),
            records: points.iter().map(|p| geom.canonical_vec(p)).collect(),
        }
    }

    pub fn from_solids(geom: &Geometry, family: &SolidFamily) -> Self {
        FamilyFile {
            q: geom.q(),
            modulus: geom.field().modulus(),
            kind: Kind::Solids,
            nucleus: None,
            records: family.iter().map(|s| geom.canonical_vec(s)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = Geometry::with_order(4).unwrap();
        let set = PointSet::from_indices(g.num_points(), [0, 5, 77, 340]);
        let file = FamilyFile::from_points(&g, &set, Some(200));
        let text = file.to_text();
        let back = FamilyFile::parse(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.point_set(&g).unwrap(), set);
        assert!(back.solid_family(&g).is_err());
        assert!(text.starts_with("PG4Q v1 q=4 mod=7 kind=points nucleus="));
    }

    #[test]
    fn rejects_malformed() {
        let ok = "PG4Q v1 q=2 mod=2 kind=solids\n1 0 0 0 0\n";
        assert!(FamilyFile::parse(ok).is_ok());
        for bad in [
            "",
            "PG4Q v1 q=2 mod=2 kind=solids\n1 0 0 0 0",
            "PG4Q v2 q=2 mod=2 kind=solids\n",
            "PG4Q v1 q=3 mod=2 kind=solids\n",
            "PG4Q v1 q=4 mod=5 kind=solids\n",
            "PG4Q v1 q=2 mod=2 kind=lines\n",
            "PG4Q v1 q=2 mod=2 kind=solids nucleus=1,0,0,0,0\n",
            "PG4Q v1 q=2 mod=2 kind=solids\n1 0 0 0\n",
            "PG4Q v1 q=2 mod=2 kind=solids\n1 0 0 0 2\n",
            "PG4Q v1 q=2 mod=2 kind=solids\n0 0 0 0 0\n",
            "PG4Q v1 q=4 mod=7 kind=solids\n2 0 0 0 0\n",
            "PG4Q v1 q=2 mod=2 kind=solids\n1 0 0 0 0\n1 0 0 0 0\n",
        ] {
            assert!(FamilyFile::parse(bad).is_err(), "{bad:?}");
        }
    }
}
