//! Finite sets of binary strings, read as finite unions of cylinders ⟦σ⟧.

use std::collections::BTreeSet;
use std::fmt;

use crate::bits::BitString;
use crate::rational::{pow2, Rational};
use num_traits::Zero;

/// A binary trie over a finite string set. Every node lies on a path to some member.
#[derive(Debug, Clone)]
pub struct Trie {
    nodes: Vec<TrieNode>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrieNode {
    pub children: [Option<usize>; 2],
    pub member: bool,
}

impl Trie {
    pub const ROOT: usize = 0;

    pub fn build<'a>(members: impl IntoIterator<Item = &'a BitString>) -> Self {
        let mut nodes = vec![TrieNode::default()];
        for s in members {
            let mut at = Self::ROOT;
            for &b in s.bits() {
                at = match nodes[at].children[b as usize] {
                    Some(next) => next,
                    None => {
                        nodes.push(TrieNode::default());
                        let next = nodes.len() - 1;
                        nodes[at].children[b as usize] = Some(next);
                        next
                    }
                };
            }
            nodes[at].member = true;
        }
        Trie { nodes }
    }

    pub fn node(&self, id: usize) -> &TrieNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1 && !self.nodes[0].member
    }

    /// Node reached by following `s`, if the path exists.
    pub fn find(&self, s: &BitString) -> Option<usize> {
        let mut at = Self::ROOT;
        for &b in s.bits() {
            at = self.nodes[at].children[b as usize]?;
        }
        Some(at)
    }

    /// For every node: is the whole cylinder at that node covered by member cylinders
    /// at or below it?
    fn full_flags(&self) -> Vec<bool> {
        let mut full = vec![false; self.nodes.len()];
        // children always have larger ids than their parent
        for id in (0..self.nodes.len()).rev() {
            let n = &self.nodes[id];
            full[id] = n.member
                || matches!(n.children, [Some(a), Some(b)] if full[a] && full[b]);
        }
        full
    }
}

/// A finite set of binary strings. Iteration is in canonical order.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct CylinderSet {
    members: BTreeSet<BitString>,
}

impl CylinderSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, s: BitString) -> bool {
        self.members.insert(s)
    }

    pub fn remove(&mut self, s: &BitString) -> bool {
        self.members.remove(s)
    }

    pub fn contains(&self, s: &BitString) -> bool {
        self.members.contains(s)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &BitString> + '_ {
        self.members.iter()
    }

    pub fn members(&self) -> &BTreeSet<BitString> {
        &self.members
    }

    /// Maximum member length; 0 for the empty set.
    pub fn depth(&self) -> usize {
        self.members.iter().map(BitString::len).max().unwrap_or(0)
    }

    pub fn trie(&self) -> Trie {
        Trie::build(&self.members)
    }

    pub fn union(&self, other: &CylinderSet) -> CylinderSet {
        self.members.union(&other.members).cloned().collect()
    }

    /// Members that extend `prefix` (including `prefix` itself).
    pub fn extending(&self, prefix: &BitString) -> CylinderSet {
        self.members
            .iter()
            .filter(|s| prefix.is_prefix_of(s))
            .cloned()
            .collect()
    }

    /// Does some member lie on the path from the root to `s` (inclusive)?
    pub fn has_prefix_of(&self, s: &BitString) -> bool {
        s.prefixes().any(|p| self.members.contains(&p))
    }

    pub fn is_prefix_free(&self) -> bool {
        // a proper prefix relation always shows up between some member and an
        // ancestor; checking ancestors of each member is enough
        self.members.iter().all(|s| {
            (0..s.len()).all(|n| !self.members.contains(&s.prefix(n)))
        })
    }

    /// Â: the members with no proper prefix in the set.
    pub fn minimal_elements(&self) -> CylinderSet {
        let trie = self.trie();
        let mut out = CylinderSet::new();
        let mut stack = vec![(Trie::ROOT, BitString::empty())];
        while let Some((id, s)) = stack.pop() {
            let node = trie.node(id);
            if node.member {
                out.insert(s);
                continue;
            }
            for b in [true, false] {
                if let Some(c) = node.children[b as usize] {
                    stack.push((c, s.child(b)));
                }
            }
        }
        out
    }

    /// ⟦self⟧ ⊆ ⟦other⟧, decided exactly on the trie of `other`.
    pub fn covered_by(&self, other: &CylinderSet) -> bool {
        let trie = other.trie();
        let full = trie.full_flags();
        self.members.iter().all(|s| {
            let mut at = Trie::ROOT;
            for &b in s.bits() {
                if trie.node(at).member {
                    return true;
                }
                match trie.node(at).children[b as usize] {
                    Some(next) => at = next,
                    None => return false,
                }
            }
            full[at]
        })
    }

    /// μ(⟦self⟧) under the fair-coin measure.
    pub fn measure(&self) -> Rational {
        self.minimal_elements()
            .iter()
            .map(|s| pow2(-(s.len() as i64)))
            .fold(Rational::zero(), |acc, x| acc + x)
    }

    /// Does ⟦self⟧ meet ⟦other⟧?
    pub fn meets(&self, other: &CylinderSet) -> bool {
        if other.is_empty() {
            return false;
        }
        let trie = other.trie();
        self.members.iter().any(|s| {
            let mut at = Trie::ROOT;
            for &b in s.bits() {
                if trie.node(at).member {
                    return true;
                }
                match trie.node(at).children[b as usize] {
                    Some(next) => at = next,
                    None => return false,
                }
            }
            // the path exists, so some member of `other` extends s
            true
        })
    }

    /// A set whose cylinders are exactly ⟦self⟧ ∩ ⟦other⟧.
    pub fn intersect(&self, other: &CylinderSet) -> CylinderSet {
        let mut out = CylinderSet::new();
        for a in &self.members {
            for b in &other.members {
                if a.is_prefix_of(b) {
                    out.insert(b.clone());
                } else if b.is_prefix_of(a) {
                    out.insert(a.clone());
                }
            }
        }
        out.minimal_elements()
    }

    pub fn render_lines(&self) -> Vec<String> {
        self.members.iter().map(|s| s.to_string()).collect()
    }
}

/// `covers(A, B)`: ⟦A⟧ ⊆ ⟦B⟧.
pub fn covers(a: &CylinderSet, b: &CylinderSet) -> bool {
    a.covered_by(b)
}

pub fn minimal_elements(a: &CylinderSet) -> CylinderSet {
    a.minimal_elements()
}

pub fn cylinder_measure(a: &CylinderSet) -> Rational {
    a.measure()
}

impl FromIterator<BitString> for CylinderSet {
    fn from_iter<I: IntoIterator<Item = BitString>>(iter: I) -> Self {
        CylinderSet {
            members: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a CylinderSet {
    type Item = &'a BitString;
    type IntoIter = std::collections::btree_set::Iter<'a, BitString>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

impl fmt::Debug for CylinderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members.iter().map(|s| s.to_string())).finish()
    }
}

/// Shorthand: `set(&["0", "01"])`.
pub fn set(items: &[&str]) -> CylinderSet {
    items.iter().map(|s| crate::bits::bs(s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn minimal_elements_examples() {
        assert_eq!(set(&["0", "00", "01", "1"]).minimal_elements(), set(&["0", "1"]));
        assert_eq!(CylinderSet::new().minimal_elements(), CylinderSet::new());
        assert_eq!(set(&["010", "01", "0110"]).minimal_elements(), set(&["01"]));
    }

    #[test]
    fn covers_examples() {
        assert!(covers(&set(&["00"]), &set(&["0"])));
        assert!(covers(&set(&["0"]), &set(&["00", "01"])));
        assert!(!covers(&set(&["0"]), &set(&["00"])));
        assert!(covers(&CylinderSet::new(), &CylinderSet::new()));
        assert!(!covers(&set(&["e"]), &CylinderSet::new()));
        assert!(covers(&set(&["e"]), &set(&["0", "10", "11"])));
    }

    #[test]
    fn measure_examples() {
        assert_eq!(set(&["0", "1"]).measure(), int(1));
        assert_eq!(set(&["00", "0"]).measure(), ratio(1, 2));
        assert_eq!(CylinderSet::new().measure(), int(0));
    }

    #[test]
    fn meets_and_intersect() {
        let a = set(&["0"]);
        assert!(a.meets(&set(&["01"])));
        assert!(a.meets(&set(&["e"])));
        assert!(!a.meets(&set(&["1", "11"])));
        assert!(!set(&["e"]).meets(&CylinderSet::new()));
        assert!(!CylinderSet::new().meets(&set(&["e"])));
        assert_eq!(set(&["0", "10"]).intersect(&set(&["01", "1"])), set(&["01", "10"]));
    }

    #[test]
    fn prefix_free() {
        assert!(set(&["00", "01", "1"]).is_prefix_free());
        assert!(!set(&["0", "01"]).is_prefix_free());
        assert!(CylinderSet::new().is_prefix_free());
    }
}
