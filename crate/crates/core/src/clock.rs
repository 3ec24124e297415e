//! Vector clocks: the ordering and join backbone for every visibility
//! decision in the store.
//!
//! A clock has exactly one entry per node in the cluster, fixed at startup.
//! All clocks in a run must have the same length; mixing lengths is a
//! configuration bug, not a recoverable condition, so it panics.

use std::fmt;

use serde::{Deserialize, Serialize};

/// An N-entry logical clock, one entry per node.
///
/// Entries never decrease across updates to the same owning object.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VectorClock(Vec<u64>);

impl VectorClock {
    /// All-zero clock for a cluster of `n` nodes.
    pub fn zero(n: usize) -> Self {
        VectorClock(vec![0; n])
    }

    pub fn from_entries(entries: Vec<u64>) -> Self {
        VectorClock(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> u64 {
        self.0[i]
    }

    pub fn set(&mut self, i: usize, v: u64) {
        self.0[i] = v;
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    fn check_len(&self, other: &VectorClock) {
        assert_eq!(
            self.0.len(),
            other.0.len(),
            "vector clock length mismatch: {} vs {}",
            self.0.len(),
            other.0.len()
        );
    }

    /// Entrywise maximum of two clocks.
    pub fn join(&self, other: &VectorClock) -> VectorClock {
        self.check_len(other);
        VectorClock(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| (*a).max(*b))
                .collect(),
        )
    }

    /// In-place entrywise maximum.
    pub fn join_in_place(&mut self, other: &VectorClock) {
        self.check_len(other);
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a = (*a).max(*b);
        }
    }

    /// True iff every entry of `self` is <= the corresponding entry of `other`.
    pub fn leq(&self, other: &VectorClock) -> bool {
        self.check_len(other);
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// Strict dominance: `self.leq(other)` and the clocks differ.
    pub fn lt(&self, other: &VectorClock) -> bool {
        self.leq(other) && self != other
    }

    pub fn increment(&mut self, i: usize) {
        self.0[i] += 1;
    }
}

impl fmt::Debug for VectorClock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vc(entries: &[u64]) -> VectorClock {
        VectorClock::from_entries(entries.to_vec())
    }

    /// Independent per-entry oracle for join.
    fn join_oracle(a: &VectorClock, b: &VectorClock) -> VectorClock {
        let mut out = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            if a.get(i) > b.get(i) {
                out.push(a.get(i));
            } else {
                out.push(b.get(i));
            }
        }
        VectorClock::from_entries(out)
    }

    #[test]
    fn join_identity_case() {
        assert_eq!(vc(&[0, 0]).join(&vc(&[0, 0])), vc(&[0, 0]));
    }

    #[test]
    fn join_folds_a_vote() {
        // Coordinator folding a vote: max([5,4],[3,8]) = [5,8].
        assert_eq!(vc(&[5, 4]).join(&vc(&[3, 8])), vc(&[5, 8]));
    }

    #[test]
    fn leq_examples() {
        assert!(vc(&[3, 7]).leq(&vc(&[3, 8])));
        let v = vc(&[4, 2, 9]);
        assert!(v.leq(&v));
        // Incomparable pair.
        assert!(!vc(&[5, 4]).leq(&vc(&[3, 8])));
        assert!(!vc(&[3, 8]).leq(&vc(&[5, 4])));
    }

    #[test]
    #[should_panic(expected = "length mismatch")]
    fn join_length_mismatch_is_fatal() {
        let _ = vc(&[1, 2]).join(&vc(&[1, 2, 3]));
    }

    #[test]
    #[should_panic(expected = "length mismatch")]
    fn leq_length_mismatch_is_fatal() {
        let _ = vc(&[1]).leq(&vc(&[1, 2]));
    }

    fn arb_clock(len: usize) -> impl Strategy<Value = VectorClock> {
        proptest::collection::vec(0u64..1000, len).prop_map(VectorClock::from_entries)
    }

    proptest! {
        #[test]
        fn join_dominates_both(a in arb_clock(4), b in arb_clock(4)) {
            let j = a.join(&b);
            prop_assert_eq!(&j, &join_oracle(&a, &b));
            prop_assert!(a.leq(&j));
            prop_assert!(b.leq(&j));
        }

        #[test]
        fn join_laws(a in arb_clock(3), b in arb_clock(3), c in arb_clock(3)) {
            // Commutative, associative, idempotent.
            prop_assert_eq!(a.join(&b), b.join(&a));
            prop_assert_eq!(a.join(&b).join(&c), a.join(&b.join(&c)));
            prop_assert_eq!(a.join(&a), a.clone());
        }

        #[test]
        fn leq_partial_order(a in arb_clock(3), b in arb_clock(3), c in arb_clock(3)) {
            prop_assert!(a.leq(&a));
            if a.leq(&b) && b.leq(&a) {
                prop_assert_eq!(&a, &b);
            }
            if a.leq(&b) && b.leq(&c) {
                prop_assert!(a.leq(&c));
            }
        }
    }
}
