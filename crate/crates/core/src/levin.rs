//! Finite Levin systems: families σ ↦ V_σ of open sets with V_σ0 ∪ V_σ1 ⊆ V_σ and
//! V_σ0 ∩ V_σ1 = ∅, built from monotone functional tables, truncated under
//! measure caps, and used to turn measure bounds into weight bounds.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use crate::bits::BitString;
use crate::cylinder::{covers, CylinderSet};
use crate::error::{Error, Result};
use crate::rational::{pow2, render, Rational};
use crate::weight::WeightFunction;
use crate::weights::pwt;

/// A finite, monotone, single-valued table ρ ↦ Φ(ρ).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotoneFunctionalTable {
    input_depth: usize,
    output_depth: usize,
    map: BTreeMap<BitString, BitString>,
}

impl MonotoneFunctionalTable {
    /// Validates input depths and monotonicity along every defined prefix pair.
    pub fn new(
        input_depth: usize,
        output_depth: usize,
        map: BTreeMap<BitString, BitString>,
    ) -> Result<Self> {
        for (rho, out) in &map {
            if rho.len() > input_depth {
                return Err(Error::DomainDepthExceeded {
                    string: rho.clone(),
                    len: rho.len(),
                    depth: input_depth,
                });
            }
            for n in 0..rho.len() {
                let p = rho.prefix(n);
                if let Some(earlier) = map.get(&p) {
                    if !earlier.is_prefix_of(out) {
                        return Err(Error::NotMonotone(p, rho.clone()));
                    }
                }
            }
        }
        Ok(MonotoneFunctionalTable {
            input_depth,
            output_depth,
            map,
        })
    }

    /// Tabulates `phi` on every input of length ≤ `input_depth`.
    pub fn tabulate(
        input_depth: usize,
        output_depth: usize,
        phi: impl Fn(&BitString) -> Option<BitString>,
    ) -> Result<Self> {
        let map = BitString::all_up_to(input_depth)
            .filter_map(|r| phi(&r).map(|x| (r, x)))
            .collect();
        Self::new(input_depth, output_depth, map)
    }

    pub fn input_depth(&self) -> usize {
        self.input_depth
    }

    pub fn output_depth(&self) -> usize {
        self.output_depth
    }

    pub fn get(&self, rho: &BitString) -> Option<&BitString> {
        self.map.get(rho)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&BitString, &BitString)> {
        self.map.iter()
    }
}

/// σ ↦ V_σ for |σ| ≤ depth, with an enumeration time for each cylinder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteLevinSystem {
    depth: usize,
    sets: BTreeMap<BitString, CylinderSet>,
    stamps: BTreeMap<BitString, u64>,
}

impl FiniteLevinSystem {
    /// Indices deeper than `depth` are rejected; absent indices mean ∅. Cylinders
    /// without a timestamp are enumerated in canonical order.
    pub fn from_sets(
        depth: usize,
        sets: BTreeMap<BitString, CylinderSet>,
        stamps: BTreeMap<BitString, u64>,
    ) -> Result<Self> {
        if let Some(s) = sets.keys().find(|s| s.len() > depth) {
            return Err(Error::DomainDepthExceeded {
                string: s.clone(),
                len: s.len(),
                depth,
            });
        }
        let sets = sets.into_iter().filter(|(_, v)| !v.is_empty()).collect();
        Ok(FiniteLevinSystem { depth, sets, stamps })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn set(&self, s: &BitString) -> CylinderSet {
        self.sets.get(s).cloned().unwrap_or_default()
    }

    pub fn measure(&self, s: &BitString) -> Rational {
        self.sets.get(s).map(CylinderSet::measure).unwrap_or_else(Rational::zero)
    }

    pub fn stamp(&self, rho: &BitString) -> u64 {
        self.stamps
            .get(rho)
            .copied()
            .unwrap_or(rho.canonical_index() as u64)
    }

    pub fn stamps(&self) -> &BTreeMap<BitString, u64> {
        &self.stamps
    }

    /// Nonempty V_σ in canonical order of σ.
    pub fn entries(&self) -> impl Iterator<Item = (&BitString, &CylinderSet)> {
        self.sets.iter()
    }

    /// Same open set at every index.
    pub fn equivalent(&self, other: &FiniteLevinSystem) -> bool {
        self.depth == other.depth
            && BitString::all_up_to(self.depth).all(|s| {
                let (a, b) = (self.set(&s), other.set(&s));
                covers(&a, &b) && covers(&b, &a)
            })
    }
}

/// V_σ = ⟦{ρ : σ ⊆ Φ(ρ)}⟧ with minimal generators; each ρ is stamped by its
/// canonical rank.
pub fn levin_from_functional(phi: &MonotoneFunctionalTable) -> Result<FiniteLevinSystem> {
    let depth = phi.output_depth;
    let mut raw: BTreeMap<BitString, CylinderSet> = BTreeMap::new();
    for (rho, out) in &phi.map {
        for n in 0..=out.len().min(depth) {
            raw.entry(out.prefix(n)).or_default().insert(rho.clone());
        }
    }
    let sets = raw
        .into_iter()
        .map(|(s, v)| (s, v.minimal_elements()))
        .collect();
    FiniteLevinSystem::from_sets(depth, sets, BTreeMap::new())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LevinProperty {
    /// V_σb ⊆ V_σ
    ChildNested,
    /// V_σ0 ∩ V_σ1 = ∅
    ChildrenDisjoint,
    /// σ ⊆ τ ⇒ V_τ ⊆ V_σ
    ChainNested,
    /// σ, τ incomparable ⇒ V_σ ∩ V_τ = ∅
    IncomparableDisjoint,
}

impl fmt::Display for LevinProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LevinProperty::ChildNested => "child-nested",
            LevinProperty::ChildrenDisjoint => "children-disjoint",
            LevinProperty::ChainNested => "chain-nested",
            LevinProperty::IncomparableDisjoint => "incomparable-disjoint",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub property: LevinProperty,
    pub at: BitString,
    pub other: BitString,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LevinReport {
    pub violations: Vec<Violation>,
}

impl LevinReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self, property: LevinProperty) -> Option<&Violation> {
        self.violations.iter().find(|v| v.property == property)
    }
}

/// Checks all four properties at every index up to the system depth. The
/// pairwise ones are decided independently rather than derived from the
/// local ones.
pub fn levin_validate(v: &FiniteLevinSystem) -> LevinReport {
    let mut violations = Vec::new();
    let all: Vec<BitString> = BitString::all_up_to(v.depth).collect();
    let sets: Vec<CylinderSet> = all.iter().map(|s| v.set(s)).collect();
    let index = |s: &BitString| s.canonical_index();
    for (s, vs) in all.iter().zip(&sets) {
        if s.len() == v.depth {
            continue;
        }
        let [c0, c1] = s.children();
        let (v0, v1) = (&sets[index(&c0)], &sets[index(&c1)]);
        for (c, vc) in [(&c0, v0), (&c1, v1)] {
            if !covers(vc, vs) {
                violations.push(Violation {
                    property: LevinProperty::ChildNested,
                    at: s.clone(),
                    other: c.clone(),
                });
            }
        }
        if v0.meets(v1) {
            violations.push(Violation {
                property: LevinProperty::ChildrenDisjoint,
                at: s.clone(),
                other: c1,
            });
        }
    }
    for (i, s) in all.iter().enumerate() {
        for (j, t) in all.iter().enumerate().skip(i + 1) {
            if s.is_proper_prefix_of(t) {
                if !covers(&sets[j], &sets[i]) {
                    violations.push(Violation {
                        property: LevinProperty::ChainNested,
                        at: s.clone(),
                        other: t.clone(),
                    });
                }
            } else if !s.comparable(t) && sets[i].meets(&sets[j]) {
                violations.push(Violation {
                    property: LevinProperty::IncomparableDisjoint,
                    at: s.clone(),
                    other: t.clone(),
                });
            }
        }
    }
    LevinReport { violations }
}

/// r_σ for every |σ| ≤ depth; absent entries are unbounded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CapAssignment {
    caps: BTreeMap<BitString, Rational>,
}

impl CapAssignment {
    pub fn new(caps: BTreeMap<BitString, Rational>) -> Result<Self> {
        if let Some((s, _)) = caps.iter().find(|(_, r)| **r <= Rational::zero()) {
            return Err(Error::Precondition(format!("cap at {s} is not positive")));
        }
        Ok(CapAssignment { caps })
    }

    pub fn get(&self, s: &BitString) -> Option<&Rational> {
        self.caps.get(s)
    }

    fn allows(&self, s: &BitString, measure: &Rational) -> bool {
        self.caps.get(s).is_none_or(|r| measure <= r)
    }
}

/// Truncates V so that μ(Ṽ_σ) ≤ r_σ, keeping Ṽ_σ ⊆ V_σ, keeping the Levin
/// properties, and leaving V_σ intact wherever every ancestor ρ ⊆ σ has
/// μ(V_ρ) < r_ρ.
///
/// Cylinders are processed by timestamp, ties broken by canonical order. A
/// cylinder whose deepest containing index is τ goes into Ṽ_ρ for every ρ ⊆ τ′,
/// where τ′ ⊆ τ is the longest prefix all of whose prefixes can take it
/// without exceeding their cap.
pub fn levin_truncate(v: &FiniteLevinSystem, r: &CapAssignment) -> Result<FiniteLevinSystem> {
    let report = levin_validate(v);
    if let Some(bad) = report.violations.first() {
        return Err(Error::Precondition(format!(
            "input is not a Levin system: {} fails at {} / {}",
            bad.property, bad.at, bad.other
        )));
    }
    let mut cylinders: Vec<BitString> = v
        .sets
        .values()
        .flat_map(|s| s.iter().cloned())
        .collect::<CylinderSet>()
        .iter()
        .cloned()
        .collect();
    cylinders.sort_by_key(|c| (v.stamp(c), c.clone()));

    let mut out: BTreeMap<BitString, CylinderSet> = BTreeMap::new();
    for c in cylinders {
        let single: CylinderSet = [c.clone()].into_iter().collect();
        // deepest index whose set contains ⟦c⟧; the containing indices form a chain
        let mut tau = BitString::empty();
        while tau.len() < v.depth {
            match tau
                .children()
                .into_iter()
                .find(|child| covers(&single, &v.set(child)))
            {
                Some(child) => tau = child,
                None => break,
            }
        }
        if !covers(&single, &v.set(&tau)) {
            continue;
        }
        let mut admit_to = None;
        for rho in tau.prefixes() {
            let mut grown = out.get(&rho).cloned().unwrap_or_default();
            grown.insert(c.clone());
            if !r.allows(&rho, &grown.measure()) {
                break;
            }
            admit_to = Some(rho);
        }
        if let Some(top) = admit_to {
            for rho in top.prefixes() {
                out.entry(rho).or_default().insert(c.clone());
            }
        }
    }
    let sets = out
        .into_iter()
        .map(|(s, set)| (s, set.minimal_elements()))
        .collect();
    FiniteLevinSystem::from_sets(v.depth, sets, v.stamps.clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTest {
    pub index: i64,
    pub set: CylinderSet,
    pub pwt: Rational,
}

/// {σ : μ(V_σ) > 2^i·w(σ)}. Its prefix-free weight is at most 2^-i because the
/// sets indexed by an antichain are disjoint; this is checked and a failure is
/// an error.
pub fn levin_measure_test(v: &FiniteLevinSystem, w: &WeightFunction, i: i64) -> Result<MeasureTest> {
    if v.depth > w.depth() {
        return Err(Error::Precondition(format!(
            "system depth {} exceeds weight depth {}",
            v.depth,
            w.depth()
        )));
    }
    let mut set = CylinderSet::new();
    for (s, vs) in &v.sets {
        if vs.measure() > pow2(i) * w.weight(s)? {
            set.insert(s.clone());
        }
    }
    let value = pwt(&set, w)?.value;
    if value > pow2(-i) {
        return Err(Error::Invariant(format!(
            "measure test at level {i} has pwt {} > 2^-{i}",
            render(&value)
        )));
    }
    Ok(MeasureTest {
        index: i,
        set,
        pwt: value,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardBound {
    /// W = ⋃_{σ∈Â} Ṽ_σ, as minimal generators
    pub union: CylinderSet,
    pub measure: Rational,
    /// Σ_{σ∈Â} μ(Ṽ_σ)
    pub sum: Rational,
    pub pwt: Rational,
    /// 2^c·pwt(A)
    pub bound: Rational,
}

impl PushforwardBound {
    pub fn sum_identity(&self) -> bool {
        self.measure == self.sum
    }

    pub fn holds(&self) -> bool {
        self.sum_identity() && self.measure <= self.bound
    }
}

/// Given μ(Ṽ_σ) ≤ 2^c·w(σ) everywhere, μ(⋃_{σ∈A} Ṽ_σ) ≤ 2^c·pwt(A).
pub fn levin_pushforward_bound(
    v: &FiniteLevinSystem,
    a: &CylinderSet,
    w: &WeightFunction,
    c: i64,
) -> Result<PushforwardBound> {
    if let Some(s) = a.iter().find(|s| s.len() > v.depth) {
        return Err(Error::DomainDepthExceeded {
            string: s.clone(),
            len: s.len(),
            depth: v.depth,
        });
    }
    for (s, vs) in &v.sets {
        let m = vs.measure();
        let cap = pow2(c) * w.weight(s)?;
        if m > cap {
            return Err(Error::Precondition(format!(
                "μ(V_{s}) = {} exceeds 2^{c}·w = {}",
                render(&m),
                render(&cap)
            )));
        }
    }
    let mut union = CylinderSet::new();
    let mut sum = Rational::zero();
    for s in a.minimal_elements().iter() {
        let vs = v.set(s);
        sum += vs.measure();
        union = union.union(&vs);
    }
    let union = union.minimal_elements();
    let value = pwt(a, w)?.value;
    Ok(PushforwardBound {
        measure: union.measure(),
        sum,
        bound: pow2(c) * &value,
        pwt: value,
        union,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::cylinder::set;
    use crate::rational::{int, ratio};

    fn identity(d: usize) -> MonotoneFunctionalTable {
        MonotoneFunctionalTable::tabulate(d, d, |r| Some(r.clone())).unwrap()
    }

    fn constant(dy: usize, dx: usize) -> MonotoneFunctionalTable {
        MonotoneFunctionalTable::tabulate(dy, dx, |r| Some(BitString::zeros(r.len()))).unwrap()
    }

    #[test]
    fn from_functional_examples() {
        let v = levin_from_functional(&identity(3)).unwrap();
        for s in BitString::all_up_to(3) {
            assert_eq!(v.set(&s), [s.clone()].into_iter().collect());
            assert_eq!(v.measure(&s), pow2(-(s.len() as i64)));
        }
        assert!(levin_validate(&v).passed());

        let v = levin_from_functional(&constant(3, 3)).unwrap();
        assert_eq!(v.measure(&bs("000")), int(1));
        assert_eq!(v.measure(&bs("01")), int(0));
        assert!(levin_validate(&v).passed());

        let even = MonotoneFunctionalTable::tabulate(4, 2, |r| {
            Some(BitString::from_bits(r.bits().iter().step_by(2).copied().collect()))
        })
        .unwrap();
        let v = levin_from_functional(&even).unwrap();
        for s in BitString::all_up_to(2) {
            assert_eq!(v.measure(&s), pow2(-(s.len() as i64)));
        }
        assert!(levin_validate(&v).passed());
    }

    #[test]
    fn non_monotone_table_is_rejected() {
        let map = [(bs("0"), bs("1")), (bs("01"), bs("0"))].into_iter().collect();
        assert_eq!(
            MonotoneFunctionalTable::new(2, 2, map),
            Err(Error::NotMonotone(bs("0"), bs("01")))
        );
    }

    #[test]
    fn validate_catches_violations() {
        let sets = [(bs("e"), set(&["e"])), (bs("0"), set(&["0"])), (bs("1"), set(&["01"]))]
            .into_iter()
            .collect();
        let v = FiniteLevinSystem::from_sets(1, sets, BTreeMap::new()).unwrap();
        let r = levin_validate(&v);
        assert_eq!(r.first(LevinProperty::ChildrenDisjoint).unwrap().at, bs("e"));
        assert!(r.first(LevinProperty::ChildNested).is_none());

        let sets = [(bs("e"), set(&["0"])), (bs("1"), set(&["1"]))].into_iter().collect();
        let v = FiniteLevinSystem::from_sets(1, sets, BTreeMap::new()).unwrap();
        let r = levin_validate(&v);
        let bad = r.first(LevinProperty::ChildNested).unwrap();
        assert_eq!((&bad.at, &bad.other), (&bs("e"), &bs("1")));
    }

    fn whole_space_split() -> FiniteLevinSystem {
        let sets = [(bs("e"), set(&["00", "01", "10", "11"])), (bs("0"), set(&["00", "01"]))]
            .into_iter()
            .collect();
        FiniteLevinSystem::from_sets(1, sets, BTreeMap::new()).unwrap()
    }

    #[test]
    fn truncate_examples() {
        let v = levin_from_functional(&identity(3)).unwrap();
        let loose = CapAssignment::new(BitString::all_up_to(3).map(|s| (s, int(1))).collect()).unwrap();
        assert!(levin_truncate(&v, &loose).unwrap().equivalent(&v));

        let only_root = [(bs("e"), set(&["00", "01", "10", "11"]))].into_iter().collect();
        let v = FiniteLevinSystem::from_sets(1, only_root, BTreeMap::new()).unwrap();
        let caps = CapAssignment::new(
            [(bs("e"), ratio(1, 4)), (bs("0"), int(1)), (bs("1"), int(1))]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let t = levin_truncate(&v, &caps).unwrap();
        assert_eq!(t.set(&bs("e")), set(&["00"]));
        assert_eq!(t.measure(&bs("e")), ratio(1, 4));

        let t = levin_truncate(&whole_space_split(), &caps).unwrap();
        assert_eq!(t.set(&bs("e")), set(&["00"]));
        assert!(covers(&t.set(&bs("0")), &t.set(&bs("e"))));
        assert!(levin_validate(&t).passed());
    }

    #[test]
    fn measure_test_examples() {
        let w = WeightFunction::length(4);
        let v = levin_from_functional(&identity(4)).unwrap();
        for i in 0..3 {
            assert!(levin_measure_test(&v, &w, i).unwrap().set.is_empty());
        }
        let v = levin_from_functional(&constant(4, 4)).unwrap();
        let t = levin_measure_test(&v, &w, 1).unwrap();
        assert_eq!(t.set, set(&["00", "000", "0000"]));
        assert_eq!(t.pwt, ratio(1, 4));
        assert!(levin_measure_test(&v, &w, 40).unwrap().set.is_empty());
    }

    #[test]
    fn pushforward_examples() {
        let w = WeightFunction::length(3);
        let v = levin_from_functional(&identity(3)).unwrap();
        let r = levin_pushforward_bound(&v, &set(&["00", "01"]), &w, 0).unwrap();
        assert_eq!(r.measure, ratio(1, 2));
        assert_eq!(r.pwt, ratio(1, 2));
        assert!(r.holds());

        let r = levin_pushforward_bound(&v, &set(&["0", "10", "110", "01"]), &w, 0).unwrap();
        assert!(r.sum_identity() && r.holds());
        assert_eq!(r.measure, ratio(7, 8));

        let r = levin_pushforward_bound(&v, &CylinderSet::new(), &w, 0).unwrap();
        assert!(r.measure.is_zero());

        let v = levin_from_functional(&constant(3, 3)).unwrap();
        assert!(matches!(
            levin_pushforward_bound(&v, &set(&["0"]), &w, 0),
            Err(Error::Precondition(_))
        ));
    }
}
