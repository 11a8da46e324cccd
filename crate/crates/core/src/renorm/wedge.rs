use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vertex `(v, u)` of the renormalized wedge `0 <= v <= u`.
///
/// Ordered by level `u` first, then by `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RenormVertex {
    pub v: u64,
    pub u: u64,
}

impl RenormVertex {
    pub fn new(v: u64, u: u64) -> Result<Self> {
        if v > u {
            return Err(Error::domain(format!("({v},{u}) lies outside the wedge v <= u")));
        }
        Ok(RenormVertex { v, u })
    }

    pub const ROOT: RenormVertex = RenormVertex { v: 0, u: 0 };

    /// The two wedge vertices one level up: `(v, u+1)` and `(v+1, u+1)`.
    pub fn children(self) -> [RenormVertex; 2] {
        [RenormVertex { v: self.v, u: self.u + 1 }, RenormVertex { v: self.v + 1, u: self.u + 1 }]
    }
}

impl Ord for RenormVertex {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.u, self.v).cmp(&(other.u, other.v))
    }
}

impl PartialOrd for RenormVertex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Vertices outside `a` with a parent `(v-1, u-1)` or `(v, u-1)` in `a`.
pub fn exterior_boundary(a: &BTreeSet<RenormVertex>) -> BTreeSet<RenormVertex> {
    a.iter().flat_map(|w| w.children()).filter(|w| !a.contains(w)).collect()
}

/// The least vertex of `exterior_boundary(a)` not in `b`.
pub fn next_vertex(a: &BTreeSet<RenormVertex>, b: &BTreeSet<RenormVertex>) -> Option<RenormVertex> {
    exterior_boundary(a).into_iter().find(|w| !b.contains(w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(v: u64, u: u64) -> RenormVertex {
        RenormVertex::new(v, u).unwrap()
    }

    fn set(vs: &[(u64, u64)]) -> BTreeSet<RenormVertex> {
        vs.iter().map(|&(v, u)| rv(v, u)).collect()
    }

    #[test]
    fn wedge_membership() {
        assert!(RenormVertex::new(2, 1).is_err());
        assert!(RenormVertex::new(1, 1).is_ok());
    }

    #[test]
    fn boundary_examples() {
        assert_eq!(exterior_boundary(&set(&[(0, 0)])), set(&[(0, 1), (1, 1)]));
        assert!(exterior_boundary(&BTreeSet::new()).is_empty());
        assert_eq!(exterior_boundary(&set(&[(0, 0), (0, 1)])), set(&[(0, 2), (1, 2), (1, 1)]));
    }

    #[test]
    fn next_vertex_examples() {
        let a = set(&[(0, 0)]);
        assert_eq!(next_vertex(&a, &BTreeSet::new()), Some(rv(0, 1)));
        assert_eq!(next_vertex(&a, &set(&[(0, 1)])), Some(rv(1, 1)));
        assert_eq!(next_vertex(&a, &set(&[(0, 1), (1, 1)])), None);
    }

    #[test]
    fn order_is_level_first() {
        assert!(rv(5, 5) < rv(0, 6));
        assert!(rv(1, 3) < rv(2, 3));
    }

    #[test]
    fn boundary_matches_enumeration() {
        // xorshift keeps the random subsets reproducible without extra deps
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let wedge: Vec<RenormVertex> = (0..=8).flat_map(|u| (0..=u).map(move |v| rv(v, u))).collect();
        for _ in 0..1000 {
            let density = next() % 100;
            let a: BTreeSet<_> = wedge.iter().copied().filter(|_| next() % 100 < density).collect();
            let expected: BTreeSet<_> = (0..=10u64)
                .flat_map(|u| (0..=u).map(move |v| rv(v, u)))
                .filter(|w| !a.contains(w))
                .filter(|w| {
                    w.u >= 1
                        && ((w.v >= 1 && a.contains(&rv(w.v - 1, w.u - 1)))
                            || (w.v < w.u && a.contains(&rv(w.v, w.u - 1))))
                })
                .collect();
            assert_eq!(exterior_boundary(&a), expected);
        }
    }
}
