//! Kraft–Chaitin code assignment, complexity estimators, the tests
//! S_i = {τ : K̂(τ) < f(τ) - i}, deficiency profiles, semimeasures extracted from
//! test families, and test-family audits.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::bits::BitString;
use crate::cylinder::CylinderSet;
use crate::error::{Error, Result};
use crate::rational::{int, pow2, render, Rational};
use crate::weight::WeightFunction;
use crate::weights::{dwt, pwt};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeRequest {
    pub label: String,
    pub length: usize,
}

impl CodeRequest {
    pub fn new(label: impl Into<String>, length: usize) -> Self {
        CodeRequest {
            label: label.into(),
            length,
        }
    }
}

/// Assigns prefix-free codewords of the requested lengths, online and in order.
///
/// The free antichain starts as {e}. Each request of length ℓ takes the longest
/// free string of length ≤ ℓ (lexicographically least among equals), pads it
/// with zeros to length ℓ, and returns the siblings along the padding path to
/// the free set. Free lengths stay distinct, so the free measure is the binary
/// expansion of 1 - Σ 2^-ℓ and a request fails exactly when the running sum
/// exceeds 1.
pub fn kraft_chaitin_assign(requests: &[CodeRequest]) -> Result<Vec<(String, BitString)>> {
    let mut free: Vec<BitString> = vec![BitString::empty()];
    let mut running = Rational::zero();
    let mut out = Vec::with_capacity(requests.len());
    for (index, req) in requests.iter().enumerate() {
        running += pow2(-(req.length as i64));
        let pick = free
            .iter()
            .enumerate()
            .filter(|(_, s)| s.len() <= req.length)
            .max_by(|(_, a), (_, b)| a.len().cmp(&b.len()).then_with(|| b.cmp(a)))
            .map(|(i, _)| i);
        let Some(i) = pick else {
            return Err(Error::KraftExhausted {
                index,
                running_sum: render(&running),
            });
        };
        let mut word = free.swap_remove(i);
        while word.len() < req.length {
            free.push(word.child(true));
            word = word.child(false);
        }
        out.push((req.label.clone(), word));
    }
    Ok(out)
}

/// Σ 2^-ℓ over the requests.
pub fn kraft_sum(requests: &[CodeRequest]) -> Rational {
    requests
        .iter()
        .map(|r| pow2(-(r.length as i64)))
        .fold(Rational::zero(), |a, b| a + b)
}

/// The self-delimiting sub-codes of the built-in estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SubCode {
    /// length header then the bits: |τ| + 2⌈log₂(|τ|+1)⌉ + 1
    Literal,
    /// 3-bit tag, first bit, run count, run lengths
    RunLength,
    /// 3-bit tag, period k, the k pattern bits, total length
    Periodic,
}

impl SubCode {
    pub const ALL: [SubCode; 3] = [SubCode::Literal, SubCode::RunLength, SubCode::Periodic];

    pub fn cost(self, s: &BitString) -> Option<u64> {
        match self {
            SubCode::Literal => Some(s.len() as u64 + header_len(s.len() as u64)),
            SubCode::RunLength => run_length_cost(s),
            SubCode::Periodic => Some(periodic_cost(s)),
        }
    }
}

const TAG_BITS: u64 = 3;

/// Length of the self-delimiting header for n: 2⌈log₂(n+1)⌉ + 1.
pub fn header_len(n: u64) -> u64 {
    let ceil_log = 64 - n.leading_zeros() as u64; // ⌈log₂(n+1)⌉
    2 * ceil_log + 1
}

fn run_length_cost(s: &BitString) -> Option<u64> {
    if s.is_empty() {
        return None;
    }
    let bits = s.bits();
    let mut runs = Vec::new();
    let mut len = 1u64;
    for pair in bits.windows(2) {
        if pair[0] == pair[1] {
            len += 1;
        } else {
            runs.push(len);
            len = 1;
        }
    }
    runs.push(len);
    let body: u64 = runs.iter().map(|&r| header_len(r - 1)).sum();
    Some(TAG_BITS + 1 + header_len(runs.len() as u64) + body)
}

fn periodic_cost(s: &BitString) -> u64 {
    let n = s.len();
    let bits = s.bits();
    let k = (1..=n.max(1))
        .find(|&k| (k..n).all(|i| bits[i] == bits[i - k]))
        .expect("period n always works");
    TAG_BITS + header_len(k as u64 - 1) + k as u64 + header_len(n as u64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Explicit values; strings without an entry have no description.
    Table(BTreeMap<BitString, u64>),
    /// Minimum over the listed sub-codes.
    CodeFamily(Vec<SubCode>),
}

/// A computable upper-bound stand-in K̂ for prefix complexity on |τ| ≤ domain_len.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityEstimator {
    pub domain_len: usize,
    pub kind: EstimatorKind,
}

impl ComplexityEstimator {
    pub fn table(domain_len: usize, table: BTreeMap<BitString, u64>) -> Self {
        ComplexityEstimator {
            domain_len,
            kind: EstimatorKind::Table(table),
        }
    }

    pub fn code_family(domain_len: usize, codes: &[SubCode]) -> Self {
        ComplexityEstimator {
            domain_len,
            kind: EstimatorKind::CodeFamily(codes.to_vec()),
        }
    }

    /// The built-in estimator: literal, run-length and periodic codes.
    pub fn builtin(domain_len: usize) -> Self {
        Self::code_family(domain_len, &SubCode::ALL)
    }

    /// K̂(τ); `None` when τ has no description.
    pub fn estimate(&self, s: &BitString) -> Result<Option<u64>> {
        if s.len() > self.domain_len {
            return Err(Error::DomainDepthExceeded {
                string: s.clone(),
                len: s.len(),
                depth: self.domain_len,
            });
        }
        Ok(match &self.kind {
            EstimatorKind::Table(t) => t.get(s).copied(),
            EstimatorKind::CodeFamily(codes) => codes.iter().filter_map(|c| c.cost(s)).min(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KraftAudit {
    pub up_to: usize,
    pub sum: Rational,
    pub admissible: bool,
}

/// Σ_{|τ|≤up_to} 2^-K̂(τ), exact; admissible iff ≤ 1.
pub fn kraft_audit(est: &ComplexityEstimator, up_to: usize) -> Result<KraftAudit> {
    let mut sum = Rational::zero();
    for s in BitString::all_up_to(up_to) {
        if let Some(k) = est.estimate(&s)? {
            sum += pow2(-(k as i64));
        }
    }
    Ok(KraftAudit {
        up_to,
        admissible: sum <= int(1),
        sum,
    })
}

/// τ ∈ S_i ⟺ K̂(τ) < f(τ) - i.
pub fn in_universal_test(
    est: &ComplexityEstimator,
    w: &WeightFunction,
    i: i64,
    s: &BitString,
) -> Result<bool> {
    let f = w.exponent(s)?;
    Ok(match est.estimate(s)? {
        Some(k) => (k as i64) < f - i,
        None => false,
    })
}

#[derive(Debug, Clone)]
pub struct TestLevel {
    pub index: i64,
    pub set: CylinderSet,
    pub dwt: Rational,
    /// the estimator's Kraft audit over the same length range
    pub audit: KraftAudit,
}

/// S_i restricted to |τ| ≤ len. When the estimator is admissible on that range
/// the bound dwt(S_i) ≤ 2^-i must hold and is enforced.
pub fn universal_test_generate(
    est: &ComplexityEstimator,
    w: &WeightFunction,
    i: i64,
    len: usize,
) -> Result<TestLevel> {
    if len > est.domain_len || len > w.depth() {
        return Err(Error::Precondition(format!(
            "length {len} beyond estimator ({}) or weight ({}) domain",
            est.domain_len,
            w.depth()
        )));
    }
    let mut set = CylinderSet::new();
    for s in BitString::all_up_to(len) {
        if in_universal_test(est, w, i, &s)? {
            set.insert(s);
        }
    }
    let audit = kraft_audit(est, len)?;
    let total = dwt(&set, w)?;
    if audit.admissible && total > pow2(-i) {
        return Err(Error::Invariant(format!(
            "admissible estimator but dwt(S_{i}) = {} > 2^-{i}",
            render(&total)
        )));
    }
    Ok(TestLevel {
        index: i,
        set,
        dwt: total,
        audit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeficiencyProfile {
    /// d(n) = f(X↾n) - K̂(X↾n) for n = 1..N; `None` when K̂ has no value.
    pub deficiencies: Vec<Option<i64>>,
    /// Largest i with some prefix in S_i, i.e. max d(n) - 1, if nonnegative.
    pub max_level: Option<i64>,
}

pub fn deficiency_profile(
    bits: &BitString,
    w: &WeightFunction,
    est: &ComplexityEstimator,
) -> Result<DeficiencyProfile> {
    let mut deficiencies = Vec::with_capacity(bits.len());
    for n in 1..=bits.len() {
        let p = bits.prefix(n);
        let f = w.exponent(&p)?;
        deficiencies.push(est.estimate(&p)?.map(|k| f - k as i64));
    }
    let max_level = deficiencies
        .iter()
        .flatten()
        .max()
        .map(|d| d - 1)
        .filter(|&i| i >= 0);
    Ok(DeficiencyProfile {
        deficiencies,
        max_level,
    })
}

/// An indexed family of finite test sets A_i.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TestFamily {
    pub levels: BTreeMap<u32, CylinderSet>,
}

impl TestFamily {
    pub fn new(levels: BTreeMap<u32, CylinderSet>) -> Self {
        TestFamily { levels }
    }

    pub fn get(&self, i: u32) -> Option<&CylinderSet> {
        self.levels.get(&i)
    }

    pub fn depth(&self) -> usize {
        self.levels.values().map(CylinderSet::depth).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub index: u32,
    pub value: Rational,
    pub bound: Rational,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyAudit {
    pub strong: bool,
    pub rows: Vec<AuditRow>,
    /// Σ_i pwt(A_i), the summability diagnostic
    pub pwt_sum: Rational,
}

impl FamilyAudit {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn first_failure(&self) -> Option<u32> {
        self.rows.iter().find(|r| !r.pass).map(|r| r.index)
    }
}

/// Checks dwt(A_i) ≤ 2^-i (pwt when `strong`) for each index.
pub fn test_family_audit(fam: &TestFamily, w: &WeightFunction, strong: bool) -> Result<FamilyAudit> {
    let mut rows = Vec::new();
    let mut pwt_sum = Rational::zero();
    for (&i, a) in &fam.levels {
        let p = pwt(a, w)?.value;
        pwt_sum += &p;
        let value = if strong { p } else { dwt(a, w)? };
        let bound = pow2(-(i as i64));
        rows.push(AuditRow {
            index: i,
            pass: value <= bound,
            value,
            bound,
        });
    }
    Ok(FamilyAudit {
        strong,
        rows,
        pwt_sum,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyRequests {
    /// smallest c ≥ 0 making all lengths nonnegative and the Kraft sum ≤ 1
    pub offset: i64,
    pub requests: Vec<CodeRequest>,
    pub kraft_sum: Rational,
    /// Σ_i 2^i·dwt(A_2i)
    pub mass: Rational,
}

/// Requests (τ, f(τ) - i + c) for τ ∈ A_2i, one per (i, τ) pair.
pub fn requests_from_family(fam: &TestFamily, w: &WeightFunction) -> Result<FamilyRequests> {
    let mut raw = Vec::new();
    let mut mass = Rational::zero();
    for (&j, a) in &fam.levels {
        if j % 2 != 0 {
            continue;
        }
        let i = (j / 2) as i64;
        mass += pow2(i) * dwt(a, w)?;
        for s in a {
            raw.push((format!("{s}@{j}"), w.exponent(s)? - i));
        }
    }
    // Σ 2^-(len + c) = 2^-c · Σ 2^-len
    let base: Rational = raw
        .iter()
        .map(|(_, l)| pow2(-l))
        .fold(Rational::zero(), |a, b| a + b);
    let mut offset = raw.iter().map(|(_, l)| -l).max().unwrap_or(0).max(0);
    while &base * pow2(-offset) > int(1) {
        offset += 1;
    }
    let requests: Vec<CodeRequest> = raw
        .into_iter()
        .map(|(label, l)| CodeRequest::new(label, (l + offset) as usize))
        .collect();
    Ok(FamilyRequests {
        offset,
        kraft_sum: kraft_sum(&requests),
        requests,
        mass,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemimeasureReport {
    /// m_i(σ) = pwt({τ ∈ A_i : σ ⊆ τ})
    pub per_index: BTreeMap<u32, Rational>,
    /// Σ_{i≥1} 2^i·m_2i(σ)
    pub mixture: Rational,
    /// m_i(σ) ≥ m_i(σ0) + m_i(σ1) for every i
    pub superadditive: bool,
    /// mixture at the root; ≤ 1 is required when every pwt(A_i) ≤ 2^-i
    pub mixture_root: Rational,
    pub audited: bool,
}

impl SemimeasureReport {
    pub fn holds(&self) -> bool {
        self.superadditive && (!self.audited || self.mixture_root <= int(1))
    }
}

fn semimeasure_value(a: &CylinderSet, w: &WeightFunction, s: &BitString) -> Result<Rational> {
    Ok(pwt(&a.extending(s), w)?.value)
}

fn mixture_at(fam: &TestFamily, w: &WeightFunction, s: &BitString) -> Result<Rational> {
    let mut total = Rational::zero();
    for (&j, a) in &fam.levels {
        if j % 2 == 0 && j >= 2 {
            total += pow2((j / 2) as i64) * semimeasure_value(a, w, s)?;
        }
    }
    Ok(total)
}

pub fn semimeasure_from_family(
    fam: &TestFamily,
    w: &WeightFunction,
    s: &BitString,
) -> Result<SemimeasureReport> {
    let mut per_index = BTreeMap::new();
    let mut superadditive = true;
    for (&i, a) in &fam.levels {
        let m = semimeasure_value(a, w, s)?;
        let [c0, c1] = s.children();
        let split = semimeasure_value(a, w, &c0)? + semimeasure_value(a, w, &c1)?;
        superadditive &= m >= split;
        per_index.insert(i, m);
    }
    let audited = test_family_audit(fam, w, true)?.all_pass();
    Ok(SemimeasureReport {
        per_index,
        mixture: mixture_at(fam, w, s)?,
        superadditive,
        mixture_root: mixture_at(fam, w, &BitString::empty())?,
        audited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::cylinder::set;
    use crate::rational::ratio;

    fn lengths(ls: &[usize]) -> Vec<CodeRequest> {
        ls.iter().enumerate().map(|(i, &l)| CodeRequest::new(i.to_string(), l)).collect()
    }

    #[test]
    fn kraft_chaitin_examples() {
        let words: Vec<String> = kraft_chaitin_assign(&lengths(&[1, 2, 2]))
            .unwrap()
            .into_iter()
            .map(|(_, w)| w.to_string())
            .collect();
        assert_eq!(words, ["0", "10", "11"]);
        assert_eq!(
            kraft_chaitin_assign(&lengths(&[1, 1, 1])),
            Err(Error::KraftExhausted {
                index: 2,
                running_sum: "3/2".into()
            })
        );
        let w = kraft_chaitin_assign(&lengths(&[3])).unwrap();
        assert_eq!(w[0].1, bs("000"));
        assert_eq!(kraft_chaitin_assign(&lengths(&[0])).unwrap()[0].1, bs("e"));
    }

    #[test]
    fn header_lengths() {
        assert_eq!(header_len(0), 1);
        assert_eq!(header_len(1), 3);
        assert_eq!(header_len(2), 5);
        assert_eq!(header_len(3), 5);
        assert_eq!(header_len(4), 7);
        assert_eq!(header_len(64), 15);
    }

    #[test]
    fn builtin_codes() {
        assert_eq!(SubCode::Literal.cost(&bs("e")), Some(1));
        assert_eq!(SubCode::RunLength.cost(&bs("e")), None);
        // one run of 4: tag + first bit + header(1) + header(3)
        assert_eq!(SubCode::RunLength.cost(&bs("0000")), Some(3 + 1 + 3 + 5));
        // period 2 pattern "01", n = 6: tag + header(1) + 2 + header(6)
        assert_eq!(SubCode::Periodic.cost(&bs("010101")), Some(3 + 3 + 2 + 7));
        assert_eq!(SubCode::Periodic.cost(&BitString::zeros(64)), Some(3 + 1 + 1 + 15));
    }

    #[test]
    fn universal_test_examples() {
        let mut t = BTreeMap::new();
        for s in BitString::all_up_to(3) {
            let k = if s == bs("00") { 1 } else { s.len() as u64 + 3 };
            t.insert(s, k);
        }
        let est = ComplexityEstimator::table(3, t);
        let w = WeightFunction::length(3);
        let lvl = universal_test_generate(&est, &w, 0, 3).unwrap();
        assert_eq!(lvl.set, set(&["00"]));
        assert!(lvl.audit.admissible);
        assert!(universal_test_generate(&est, &w, 5, 3).unwrap().set.is_empty());

        let mut cheap = BTreeMap::new();
        for s in BitString::all_up_to(2) {
            cheap.insert(s, 0);
        }
        let lvl = universal_test_generate(&ComplexityEstimator::table(2, cheap), &w, 0, 2).unwrap();
        assert!(!lvl.audit.admissible);
        assert_eq!(lvl.set.len(), 6);
    }

    #[test]
    fn deficiency_examples() {
        let mut t = BTreeMap::new();
        for n in 0..=4 {
            t.insert(BitString::zeros(n), 2);
        }
        let est = ComplexityEstimator::table(4, t);
        let w = WeightFunction::length(4);
        let p = deficiency_profile(&bs("0000"), &w, &est).unwrap();
        assert_eq!(p.deficiencies, vec![Some(-1), Some(0), Some(1), Some(2)]);
        assert_eq!(p.max_level, Some(1));

        let lit = ComplexityEstimator::code_family(8, &[SubCode::Literal]);
        let p = deficiency_profile(&bs("01101001"), &WeightFunction::length(8), &lit).unwrap();
        assert!(p.deficiencies.iter().all(|d| d.unwrap() <= 0));
        assert_eq!(p.max_level, None);

        let p = deficiency_profile(&BitString::empty(), &w, &est).unwrap();
        assert!(p.deficiencies.is_empty());
    }

    #[test]
    fn semimeasure_examples() {
        let w = WeightFunction::length(4);
        let fam = TestFamily::new([(1, set(&["00", "01"]))].into_iter().collect());
        let m = |s: &str| semimeasure_from_family(&fam, &w, &bs(s)).unwrap().per_index[&1].clone();
        assert_eq!(m("e"), ratio(1, 2));
        assert_eq!(m("0"), ratio(1, 2));
        assert_eq!(m("00"), ratio(1, 4));
        assert_eq!(m("1"), int(0));
        assert_eq!(m("0"), m("00") + m("01"));
        let r = semimeasure_from_family(&TestFamily::default(), &w, &bs("0")).unwrap();
        assert!(r.per_index.is_empty() && r.mixture.is_zero());
    }

    #[test]
    fn audit_examples() {
        let w = WeightFunction::length(12);
        let fam = TestFamily::new((0..6).map(|i| (i, [BitString::zeros(2 * i as usize)].into_iter().collect())).collect());
        let a = test_family_audit(&fam, &w, false).unwrap();
        assert!(a.all_pass());
        // Σ_{i<6} 4^-i
        assert_eq!(a.pwt_sum, ratio(1365, 1024));

        let fam = TestFamily::new((0..3).map(|i| (i, set(&["e"]))).collect());
        assert_eq!(test_family_audit(&fam, &w, false).unwrap().first_failure(), Some(1));

        let fam = TestFamily::new([(1, set(&["e", "0", "1"]))].into_iter().collect());
        assert!(!test_family_audit(&fam, &w, false).unwrap().all_pass());
        let strong = test_family_audit(&fam, &w, true).unwrap();
        assert_eq!(strong.rows[0].value, int(1));
        assert!(!strong.all_pass());
        let fam = TestFamily::new([(0, set(&["e", "0", "1"]))].into_iter().collect());
        assert!(!test_family_audit(&fam, &w, false).unwrap().all_pass());
        assert!(test_family_audit(&fam, &w, true).unwrap().all_pass());
    }

    #[test]
    fn family_requests_fit_kraft() {
        let w = WeightFunction::length(12);
        let fam = TestFamily::new((1..=5).map(|i| (i, [BitString::zeros(i as usize)].into_iter().collect())).collect());
        assert!(test_family_audit(&fam, &w, false).unwrap().all_pass());
        let r = requests_from_family(&fam, &w).unwrap();
        assert_eq!(r.offset, 0);
        assert!(r.kraft_sum <= int(1));
        assert!(kraft_chaitin_assign(&r.requests).is_ok());
    }
}
