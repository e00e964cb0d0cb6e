//! Direct, prefix-free and vehement weights of finite string sets.
//!
//! * `dwt(A)`: Σ_{σ∈A} w(σ).
//! * `pwt(A)`: the largest dwt of a prefix-free subset of A (max-weight antichain).
//! * `vwt(A)`: the smallest dwt of a set S with ⟦A⟧ ⊆ ⟦S⟧ (min-weight cover).
//!
//! For convex w the cover dynamic program is exact. For arbitrary w only covers
//! with bounded string length are searched, which gives upper bounds on vwt.

use std::fmt;

use num_traits::Zero;

use crate::bits::BitString;
use crate::cylinder::{CylinderSet, Trie};
use crate::error::{Error, Result};
use crate::rational::{pow2, Rational};
use crate::weight::WeightFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Sum,
    AntichainDp,
    ConvexCoverDp,
    DepthBounded,
    BruteForce,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sum => "sum",
            Method::AntichainDp => "antichain-dp",
            Method::ConvexCoverDp => "convex-cover-dp",
            Method::DepthBounded => "depth-bounded",
            Method::BruteForce => "brute-force",
        })
    }
}

/// A weight value together with the set that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightReport {
    pub value: Rational,
    pub witness: CylinderSet,
    pub method: Method,
    /// Longest string length a cover was allowed to use, when bounded.
    pub depth_bound: Option<usize>,
}

pub fn dwt(a: &CylinderSet, w: &WeightFunction) -> Result<Rational> {
    let mut total = Rational::zero();
    for s in a {
        total += w.weight(s)?;
    }
    Ok(total)
}

/// Prefix-free weight by the antichain DP M(v) = max(w(v) if v∈A, M(v0) + M(v1)).
/// Ties keep the shorter string.
pub fn pwt(a: &CylinderSet, w: &WeightFunction) -> Result<WeightReport> {
    w.check_domain_depth(a.depth())?;
    let trie = a.trie();
    let mut take = vec![false; trie.len()];
    let value = if a.is_empty() {
        Rational::zero()
    } else {
        antichain(&trie, Trie::ROOT, &BitString::empty(), w, &mut take)?
    };
    let mut witness = CylinderSet::new();
    collect_taken(&trie, Trie::ROOT, BitString::empty(), &take, &mut witness);
    Ok(WeightReport {
        value,
        witness,
        method: Method::AntichainDp,
        depth_bound: None,
    })
}

fn antichain(
    trie: &Trie,
    id: usize,
    s: &BitString,
    w: &WeightFunction,
    take: &mut [bool],
) -> Result<Rational> {
    let node = *trie.node(id);
    let mut below = Rational::zero();
    for b in [false, true] {
        if let Some(c) = node.children[b as usize] {
            below += antichain(trie, c, &s.child(b), w, take)?;
        }
    }
    if node.member {
        let here = w.weight(s)?;
        if here >= below {
            take[id] = true;
            return Ok(here);
        }
    }
    Ok(below)
}

fn collect_taken(trie: &Trie, id: usize, s: BitString, take: &[bool], out: &mut CylinderSet) {
    if take[id] {
        out.insert(s);
        return;
    }
    for b in [false, true] {
        if let Some(c) = trie.node(id).children[b as usize] {
            collect_taken(trie, c, s.child(b), take, out);
        }
    }
}

/// Runs the cover recurrence on the trie of Â:
/// C(v) = 0 off the trie, `full_cost(v)` at members of Â, and
/// min(w(v), C(v0) + C(v1)) elsewhere, preferring v itself on ties.
fn cover_dp<W, F>(a: &CylinderSet, weight: &W, full_cost: &F) -> Result<(Rational, CylinderSet)>
where
    W: Fn(&BitString) -> Result<Rational>,
    F: Fn(&BitString) -> Result<(Rational, CylinderSet)>,
{
    let hat = a.minimal_elements();
    if hat.is_empty() {
        return Ok((Rational::zero(), CylinderSet::new()));
    }
    let trie = hat.trie();
    cover_node(&trie, Trie::ROOT, BitString::empty(), weight, full_cost)
}

fn cover_node<W, F>(
    trie: &Trie,
    id: usize,
    s: BitString,
    weight: &W,
    full_cost: &F,
) -> Result<(Rational, CylinderSet)>
where
    W: Fn(&BitString) -> Result<Rational>,
    F: Fn(&BitString) -> Result<(Rational, CylinderSet)>,
{
    let node = *trie.node(id);
    if node.member {
        return full_cost(&s);
    }
    let mut split = Rational::zero();
    let mut split_cover = CylinderSet::new();
    for b in [false, true] {
        if let Some(c) = node.children[b as usize] {
            let (v, cov) = cover_node(trie, c, s.child(b), weight, full_cost)?;
            split += v;
            split_cover = split_cover.union(&cov);
        }
    }
    let here = weight(&s)?;
    if here <= split {
        Ok((here, [s].into_iter().collect()))
    } else {
        Ok((split, split_cover))
    }
}

fn check_local_convexity(w: &WeightFunction, s: &BitString) -> Result<()> {
    if s.len() < w.depth() {
        let [c0, c1] = s.children();
        if w.weight(s)? > w.weight(&c0)? + w.weight(&c1)? {
            return Err(Error::ConvexityViolation(s.clone()));
        }
    }
    Ok(())
}

/// Exact vehement weight for convex w. Convexity is checked at every node the
/// recursion touches.
pub fn vwt_convex(a: &CylinderSet, w: &WeightFunction) -> Result<WeightReport> {
    w.check_domain_depth(a.depth())?;
    let weight = |s: &BitString| {
        check_local_convexity(w, s)?;
        w.weight(s)
    };
    let full = |s: &BitString| Ok((weight(s)?, [s.clone()].into_iter().collect()));
    let (value, witness) = cover_dp(a, &weight, &full)?;
    Ok(WeightReport {
        value,
        witness,
        method: Method::ConvexCoverDp,
        depth_bound: None,
    })
}

/// The convex cover recurrence evaluated on arbitrary weights, with no checks.
/// For a convex weight this is vwt; it is monotone in the weights it reads, so
/// evaluating it on pointwise lower (upper) bounds bounds vwt from below (above).
pub fn convex_cover_value(a: &CylinderSet, weight: impl Fn(&BitString) -> Rational) -> Rational {
    let wf = |s: &BitString| Ok(weight(s));
    let full = |s: &BitString| Ok((weight(s), CylinderSet::new()));
    cover_dp(a, &wf, &full).expect("infallible weights").0
}

/// Least dwt over covers whose strings have length ≤ depth(A) + k.
pub fn vwt_depth_bounded(a: &CylinderSet, w: &WeightFunction, k: usize) -> Result<WeightReport> {
    let max_len = a.depth() + k;
    w.check_domain_depth(max_len)?;
    let hat = a.minimal_elements();
    if let Some(shallowest) = hat.iter().map(BitString::len).min() {
        if max_len - shallowest > 20 {
            return Err(Error::TooLarge(format!(
                "depth-bounded search would expand 2^{} nodes below {}",
                max_len - shallowest,
                max_len
            )));
        }
    }
    let weight = |s: &BitString| w.weight(s);
    let full = |s: &BitString| full_subtree(s, w, max_len);
    let (value, witness) = cover_dp(a, &weight, &full)?;
    Ok(WeightReport {
        value,
        witness,
        method: Method::DepthBounded,
        depth_bound: Some(max_len),
    })
}

/// Cheapest cover of the whole cylinder ⟦s⟧ by strings of length ≤ max_len.
fn full_subtree(s: &BitString, w: &WeightFunction, max_len: usize) -> Result<(Rational, CylinderSet)> {
    let here = w.weight(s)?;
    if s.len() >= max_len {
        return Ok((here, [s.clone()].into_iter().collect()));
    }
    let (v0, c0) = full_subtree(&s.child(false), w, max_len)?;
    let (v1, c1) = full_subtree(&s.child(true), w, max_len)?;
    let split = v0 + v1;
    if here <= split {
        Ok((here, [s.clone()].into_iter().collect()))
    } else {
        Ok((split, c0.union(&c1)))
    }
}

const BRUTE_FORCE_MAX_LEN: usize = 16;
const BRUTE_FORCE_MAX_STEPS: u64 = 50_000_000;

/// Exhaustive branch-and-bound over prefix-free covers built from strings of
/// length ≤ depth(A) + b. Independent of the cover recurrence and valid for any
/// positive weights.
pub fn vwt_bruteforce(a: &CylinderSet, w: &WeightFunction, b: usize) -> Result<WeightReport> {
    let max_len = a.depth() + b;
    w.check_domain_depth(max_len)?;
    if max_len > BRUTE_FORCE_MAX_LEN {
        return Err(Error::TooLarge(format!(
            "brute force limited to strings of length {BRUTE_FORCE_MAX_LEN}, asked for {max_len}"
        )));
    }
    let hat = a.minimal_elements();
    let trie = hat.trie();
    let mut search = Search::new(&hat, &trie, w, max_len)?;
    if !hat.is_empty() {
        let mut tasks = vec![search.task(Trie::ROOT, BitString::empty())];
        search.run(&mut tasks, Rational::zero())?;
    }
    Ok(WeightReport {
        value: search.best,
        witness: search.best_set.into_iter().collect(),
        method: Method::BruteForce,
        depth_bound: Some(max_len),
    })
}

enum Task {
    /// A non-member node of the Â trie: only the parts of ⟦Â⟧ below it need covering.
    Partial(usize, BitString),
    /// ⟦s⟧ must be covered entirely by s or strings below it.
    Full(BitString),
}

struct Search<'a> {
    trie: &'a Trie,
    max_len: usize,
    /// w of every string up to max_len, by canonical index
    weights: Vec<Rational>,
    /// min over x at or below s of w(x)·2^|x|; any cover of a region below s
    /// costs at least this times the region's measure
    density: Vec<Rational>,
    /// μ(⟦Â⟧ ∩ ⟦node⟧) per trie node
    region: Vec<Rational>,
    best: Rational,
    best_set: Vec<BitString>,
    chosen: Vec<BitString>,
    steps: u64,
}

impl<'a> Search<'a> {
    fn new(hat: &CylinderSet, trie: &'a Trie, w: &WeightFunction, max_len: usize) -> Result<Self> {
        let mut weights = Vec::new();
        for s in BitString::all_up_to(max_len) {
            weights.push(w.weight(&s)?);
        }
        let all: Vec<BitString> = BitString::all_up_to(max_len).collect();
        let mut density = vec![Rational::zero(); weights.len()];
        for s in all.iter().rev() {
            let i = s.canonical_index();
            let mut d = &weights[i] * pow2(s.len() as i64);
            if s.len() < max_len {
                for c in s.children() {
                    let dc = &density[c.canonical_index()];
                    if *dc < d {
                        d = dc.clone();
                    }
                }
            }
            density[i] = d;
        }
        let mut region = vec![Rational::zero(); trie.len()];
        fill_region(trie, Trie::ROOT, 0, &mut region);
        // Â itself is a cover of the admissible kind
        let mut best = Rational::zero();
        for s in hat {
            best += &weights[s.canonical_index()];
        }
        Ok(Search {
            trie,
            max_len,
            weights,
            density,
            region,
            best,
            best_set: hat.iter().cloned().collect(),
            chosen: Vec::new(),
            steps: 0,
        })
    }

    fn task(&self, id: usize, s: BitString) -> Task {
        if self.trie.node(id).member {
            Task::Full(s)
        } else {
            Task::Partial(id, s)
        }
    }

    fn lower_bound(&self, tasks: &[Task]) -> Rational {
        let mut lb = Rational::zero();
        for t in tasks {
            match t {
                Task::Full(s) => {
                    lb += &self.density[s.canonical_index()] * pow2(-(s.len() as i64));
                }
                Task::Partial(id, s) => {
                    lb += &self.density[s.canonical_index()] * &self.region[*id];
                }
            }
        }
        lb
    }

    fn run(&mut self, tasks: &mut Vec<Task>, cost: Rational) -> Result<()> {
        self.steps += 1;
        if self.steps > BRUTE_FORCE_MAX_STEPS {
            return Err(Error::TooLarge(format!(
                "brute force exceeded {BRUTE_FORCE_MAX_STEPS} search steps"
            )));
        }
        if &cost + self.lower_bound(tasks) >= self.best {
            return Ok(());
        }
        let Some(task) = tasks.pop() else {
            self.best = cost;
            self.best_set = self.chosen.clone();
            return Ok(());
        };
        let (s, below): (&BitString, Vec<Task>) = match &task {
            Task::Full(s) if s.len() < self.max_len => {
                (s, s.children().into_iter().map(Task::Full).collect())
            }
            Task::Full(s) => (s, Vec::new()),
            Task::Partial(id, s) => {
                let node = *self.trie.node(*id);
                let kids = [false, true]
                    .into_iter()
                    .filter_map(|b| node.children[b as usize].map(|c| self.task(c, s.child(b))))
                    .collect();
                (s, kids)
            }
        };

        // take s itself
        let with_s = &cost + &self.weights[s.canonical_index()];
        self.chosen.push(s.clone());
        self.run(tasks, with_s)?;
        self.chosen.pop();

        // or cover the region from strictly below s
        if !below.is_empty() {
            let n = below.len();
            tasks.extend(below);
            self.run(tasks, cost)?;
            tasks.truncate(tasks.len() - n);
        }
        tasks.push(task);
        Ok(())
    }
}

fn fill_region(trie: &Trie, id: usize, len: usize, region: &mut [Rational]) -> Rational {
    let node = *trie.node(id);
    let m = if node.member {
        pow2(-(len as i64))
    } else {
        let mut m = Rational::zero();
        for c in node.children.into_iter().flatten() {
            m += fill_region(trie, c, len + 1, region);
        }
        m
    };
    region[id] = m.clone();
    m
}

/// Result of a convexity scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexityCheck {
    pub convex: bool,
    pub violation: Option<BitString>,
}

/// Checks w(σ) ≤ w(σ0) + w(σ1) for all |σ| < depth, in canonical order.
pub fn is_convex(w: &WeightFunction, depth: usize) -> Result<ConvexityCheck> {
    w.check_domain_depth(depth)?;
    if depth > 0 {
        for s in BitString::all_up_to(depth - 1) {
            let [c0, c1] = s.children();
            if w.weight(&s)? > w.weight(&c0)? + w.weight(&c1)? {
                return Ok(ConvexityCheck {
                    convex: false,
                    violation: Some(s),
                });
            }
        }
    }
    Ok(ConvexityCheck {
        convex: true,
        violation: None,
    })
}

impl WeightFunction {
    pub(crate) fn check_domain_depth(&self, len: usize) -> Result<()> {
        if len > self.depth() {
            Err(Error::DomainDepthExceeded {
                string: BitString::zeros(len),
                len,
                depth: self.depth(),
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::cylinder::set;
    use crate::rational::{int, ratio};
    use std::collections::BTreeMap;

    fn table(depth: usize, entries: &[(&str, Rational)], default: impl Fn(usize) -> Rational) -> WeightFunction {
        let m: BTreeMap<BitString, Rational> = entries.iter().map(|(s, r)| (bs(s), r.clone())).collect();
        WeightFunction::tabulate(depth, |s| m.get(s).cloned().unwrap_or_else(|| default(s.len()))).unwrap()
    }

    #[test]
    fn dwt_examples() {
        let w = WeightFunction::length(4);
        assert_eq!(dwt(&set(&["0", "1"]), &w).unwrap(), int(1));
        assert_eq!(dwt(&CylinderSet::new(), &w).unwrap(), int(0));
        assert_eq!(dwt(&set(&["e", "0", "00"]), &w).unwrap(), ratio(7, 4));
        assert!(dwt(&set(&["00000"]), &w).is_err());
    }

    #[test]
    fn pwt_examples() {
        let w = WeightFunction::length(4);
        let r = pwt(&set(&["e", "0", "00"]), &w).unwrap();
        assert_eq!(r.value, int(1));
        assert_eq!(r.witness, set(&["e"]));
        assert_eq!(pwt(&set(&["0", "00", "01"]), &w).unwrap().value, ratio(1, 2));
        let r = pwt(&set(&["00", "01", "1"]), &w).unwrap();
        assert_eq!(r.value, int(1));
        assert_eq!(r.witness, set(&["00", "01", "1"]));
    }

    #[test]
    fn vwt_convex_examples() {
        let w = WeightFunction::length(4);
        let r = vwt_convex(&set(&["00", "01"]), &w).unwrap();
        assert_eq!(r.value, ratio(1, 2));
        assert_eq!(r.witness, set(&["0"]));

        let w2 = table(2, &[("e", ratio(1, 4))], |n| if n == 1 { ratio(1, 2) } else { ratio(1, 4) });
        let r = vwt_convex(&set(&["0"]), &w2).unwrap();
        assert_eq!(r.value, ratio(1, 4));
        assert_eq!(r.witness, set(&["e"]));

        assert_eq!(vwt_convex(&CylinderSet::new(), &w).unwrap().value, int(0));
    }

    #[test]
    fn vwt_convex_rejects_nonconvex_path() {
        let w = table(2, &[("e", int(1))], |_| ratio(1, 8));
        assert!(matches!(
            vwt_convex(&set(&["0"]), &w),
            Err(Error::ConvexityViolation(s)) if s == bs("e")
        ));
    }

    #[test]
    fn depth_bounded_descends_through_nonconvex_weights() {
        let w = table(2, &[("e", int(1))], |n| if n == 1 { ratio(1, 8) } else { ratio(1, 64) });
        let a = set(&["e"]);
        assert_eq!(vwt_depth_bounded(&a, &w, 0).unwrap().value, int(1));
        assert_eq!(vwt_depth_bounded(&a, &w, 1).unwrap().value, ratio(1, 4));
        let r = vwt_depth_bounded(&a, &w, 2).unwrap();
        assert_eq!(r.value, ratio(1, 16));
        assert_eq!(r.witness.len(), 4);
        assert_eq!(r.depth_bound, Some(2));
        assert!(vwt_depth_bounded(&a, &w, 3).is_err());
    }

    #[test]
    fn depth_bounded_k0_single() {
        let w = table(1, &[("e", ratio(1, 3))], |_| ratio(1, 2));
        assert_eq!(vwt_depth_bounded(&set(&["0"]), &w, 0).unwrap().value, ratio(1, 3));
        let w = table(1, &[("e", int(1))], |_| ratio(1, 2));
        assert_eq!(vwt_depth_bounded(&set(&["0"]), &w, 0).unwrap().value, ratio(1, 2));
    }

    #[test]
    fn bruteforce_examples() {
        let w = WeightFunction::length(4);
        assert_eq!(vwt_bruteforce(&set(&["00", "01"]), &w, 1).unwrap().value, ratio(1, 2));
        let w2 = table(1, &[("e", ratio(1, 4))], |_| ratio(1, 2));
        let r = vwt_bruteforce(&set(&["0"]), &w2, 0).unwrap();
        assert_eq!(r.value, ratio(1, 4));
        assert_eq!(r.witness, set(&["e"]));
        // nonconvex: brute force finds the deep cover too
        let w3 = table(2, &[("e", int(1))], |n| if n == 1 { ratio(1, 8) } else { ratio(1, 64) });
        assert_eq!(vwt_bruteforce(&set(&["e"]), &w3, 2).unwrap().value, ratio(1, 16));
    }

    #[test]
    fn convexity_examples() {
        assert!(is_convex(&WeightFunction::length(6), 6).unwrap().convex);
        let w = table(1, &[("e", int(1))], |_| ratio(1, 4));
        let c = is_convex(&w, 1).unwrap();
        assert!(!c.convex);
        assert_eq!(c.violation, Some(bs("e")));
        let half = WeightFunction::length_scaled(ratio(1, 2), 8).unwrap();
        assert!(is_convex(&half, 8).unwrap().convex);
        assert!(is_convex(&half, 9).is_err());
    }
}
