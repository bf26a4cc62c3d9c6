//! Index sets over the canonical point and solid orders, and histograms.

use std::collections::BTreeMap;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

macro_rules! index_set {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash)]
        pub struct $name {
            members: Vec<usize>,
            mask: Vec<bool>,
        }

        impl $name {
            /// The empty set over a universe of `universe` indices.
            pub fn empty(universe: usize) -> Self {
                $name { members: Vec::new(), mask: vec![false; universe] }
            }

            /// Duplicates collapse; indices must be `< universe`.
            pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
                let mut mask = vec![false; universe];
                for i in indices {
                    mask[i] = true;
                }
                Self::from_mask(mask)
            }

            pub fn from_mask(mask: Vec<bool>) -> Self {
                let members = mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
                $name { members, mask }
            }

            pub fn universe(&self) -> usize {
                self.mask.len()
            }

            #[inline]
            pub fn contains(&self, i: usize) -> bool {
                self.mask[i]
            }

            pub fn len(&self) -> usize {
                self.members.len()
            }

            pub fn is_empty(&self) -> bool {
                self.members.is_empty()
            }

            /// Members in increasing index order.
            pub fn members(&self) -> &[usize] {
                &self.members
            }

            pub fn mask(&self) -> &[bool] {
                &self.mask
            }

            pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
                self.members.iter().copied()
            }

            pub fn insert(&mut self, i: usize) -> bool {
                if self.mask[i] {
                    return false;
                }
                self.mask[i] = true;
                let at = self.members.partition_point(|&m| m < i);
                self.members.insert(at, i);
                true
            }

            pub fn remove(&mut self, i: usize) -> bool {
                if !self.mask[i] {
                    return false;
                }
                self.mask[i] = false;
                let at = self.members.partition_point(|&m| m < i);
                self.members.remove(at);
                true
            }

            pub fn complement(&self) -> Self {
                Self::from_mask(self.mask.iter().map(|m| !m).collect())
            }
        }

        /// Serializes as the sorted member indices.
        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                self.members.serialize(s)
            }
        }
    };
}

index_set!(
    /// A set of points, by index in the canonical point order.
    PointSet
);
index_set!(
    /// A set of solids, by index in the canonical solid order.
    SolidFamily
);

/// Histogram `value -> multiplicity`. Serializes as `[[value, count], ...]`
/// sorted by value.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Spectrum(BTreeMap<u64, u64>);

impl Spectrum {
    pub fn from_values<I: IntoIterator<Item = u64>>(values: I) -> Self {
        let mut m = BTreeMap::new();
        for v in values {
            *m.entry(v).or_insert(0) += 1;
        }
        Spectrum(m)
    }

    pub fn count(&self, value: u64) -> u64 {
        self.0.get(&value).copied().unwrap_or(0)
    }

    pub fn support(&self) -> Vec<u64> {
        self.0.keys().copied().collect()
    }

    pub fn support_within(&self, allowed: &[u64]) -> bool {
        self.0.keys().all(|v| allowed.contains(v))
    }

    pub fn total(&self) -> u64 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.0.iter().map(|(&v, &c)| (v, c))
    }
}

impl Serialize for Spectrum {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.len()))?;
        for (v, c) in &self.0 {
            seq.serialize_element(&[v, c])?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_ops() {
        let mut s = PointSet::from_indices(10, [3, 1, 3, 7]);
        assert_eq!(s.members(), &[1, 3, 7]);
        assert!(s.insert(5));
        assert!(!s.insert(5));
        assert!(s.remove(3));
        assert_eq!(s.members(), &[1, 5, 7]);
        assert_eq!(s.complement().len(), 7);
        assert!(SolidFamily::empty(4).is_empty());
    }

    #[test]
    fn spectrum_json() {
        let sp = Spectrum::from_values([4, 6, 0, 4]);
        assert_eq!(serde_json::to_string(&sp).unwrap(), "[[0,1],[4,2],[6,1]]");
        assert!(sp.support_within(&[0, 4, 6]));
        assert!(!sp.support_within(&[0, 4]));
        assert_eq!(sp.total(), 4);
    }
}
