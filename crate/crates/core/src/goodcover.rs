//! Incremental good covers for convex weights.
//!
//! A good cover of A is a set B with ⟦A⟧ ⊆ ⟦B⟧ and pwt(B) ≤ vwt(A). Strings of A
//! arrive one at a time; an uncovered σ adds the prefix τ ⊆ σ minimizing
//! dwt of the minimal elements of B ∪ {τ}.

use num_traits::Zero;

use crate::bits::BitString;
use crate::cylinder::{covers, CylinderSet};
use crate::error::{Error, Result};
use crate::rational::{int, pow2, Rational};
use crate::transforms::{convex_rationalize, Band, RationalizeOptions, WeightOracle};
use crate::weight::WeightFunction;
use crate::weights::{dwt, is_convex, pwt, vwt_bruteforce, vwt_convex, Method};

#[derive(Debug, Clone)]
pub struct CoverState {
    accepted: CylinderSet,
    processed: Vec<BitString>,
    w: WeightFunction,
    /// convexity of w has been verified on all strings shorter than this
    checked_depth: usize,
}

impl CoverState {
    pub fn new(w: WeightFunction) -> Self {
        CoverState {
            accepted: CylinderSet::new(),
            processed: Vec::new(),
            w,
            checked_depth: 0,
        }
    }

    pub fn accepted(&self) -> &CylinderSet {
        &self.accepted
    }

    pub fn processed(&self) -> &[BitString] {
        &self.processed
    }

    pub fn processed_set(&self) -> CylinderSet {
        self.processed.iter().cloned().collect()
    }

    pub fn weights(&self) -> &WeightFunction {
        &self.w
    }

    fn ensure_convex_to(&mut self, len: usize) -> Result<()> {
        if len > self.checked_depth {
            if let Some(v) = is_convex(&self.w, len)?.violation {
                return Err(Error::ConvexityViolation(v));
            }
            self.checked_depth = len;
        }
        Ok(())
    }
}

/// One step of the construction. Among minimizing prefixes the shortest wins.
pub fn extend_cover(state: &CoverState, s: &BitString) -> Result<CoverState> {
    let mut next = state.clone();
    next.w.check_domain(s)?;
    next.ensure_convex_to(s.len())?;
    next.processed.push(s.clone());
    let single: CylinderSet = [s.clone()].into_iter().collect();
    if covers(&single, &state.accepted) {
        return Ok(next);
    }
    let mut best: Option<(Rational, BitString)> = None;
    for tau in s.prefixes() {
        let mut candidate = state.accepted.clone();
        candidate.insert(tau.clone());
        let cost = dwt(&candidate.minimal_elements(), &state.w)?;
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, tau));
        }
    }
    let (_, tau) = best.expect("σ has at least one prefix");
    next.accepted.insert(tau);
    Ok(next)
}

/// Folds [`extend_cover`] over the stream, returning every intermediate state.
pub fn cover_trace(stream: &[BitString], w: &WeightFunction) -> Result<Vec<CoverState>> {
    let mut states = vec![CoverState::new(w.clone())];
    for s in stream {
        let next = extend_cover(states.last().unwrap(), s)?;
        states.push(next);
    }
    Ok(states)
}

pub fn build_cover(stream: &[BitString], w: &WeightFunction) -> Result<CylinderSet> {
    let mut state = CoverState::new(w.clone());
    for s in stream {
        state = extend_cover(&state, s)?;
    }
    Ok(state.accepted)
}

#[derive(Debug, Clone)]
pub struct GoodCoverReport {
    pub covers: bool,
    pub vwt_set: Rational,
    pub vwt_cover: Rational,
    pub dwt_cover_hat: Rational,
    pub pwt_cover: Rational,
    pub method: Method,
    /// covers and pwt(B) ≤ vwt(A)
    pub good: bool,
    /// vwt(A) = vwt(B) = dwt(B̂) = pwt(B), checked only when `good`
    pub chain_equal: Option<bool>,
}

impl GoodCoverReport {
    pub fn passed(&self) -> bool {
        self.good && self.chain_equal == Some(true)
    }
}

/// Checks B against A. vwt is recomputed from scratch: by the convex DP when w
/// is convex on the relevant depth, otherwise by brute force with `brute_bound`
/// extra levels.
pub fn verify_good_cover(
    a: &CylinderSet,
    b: &CylinderSet,
    w: &WeightFunction,
    brute_bound: usize,
) -> Result<GoodCoverReport> {
    let depth = a.depth().max(b.depth());
    let convex = is_convex(w, depth)?.convex;
    let vwt = |x: &CylinderSet| -> Result<(Rational, Method)> {
        if convex {
            Ok((vwt_convex(x, w)?.value, Method::ConvexCoverDp))
        } else {
            Ok((vwt_bruteforce(x, w, brute_bound)?.value, Method::BruteForce))
        }
    };
    verify_with(a, b, w, vwt)
}

/// As [`verify_good_cover`] but with vwt always taken from the brute-force oracle.
pub fn verify_good_cover_bruteforce(
    a: &CylinderSet,
    b: &CylinderSet,
    w: &WeightFunction,
    brute_bound: usize,
) -> Result<GoodCoverReport> {
    verify_with(a, b, w, |x| {
        Ok((vwt_bruteforce(x, w, brute_bound)?.value, Method::BruteForce))
    })
}

fn verify_with(
    a: &CylinderSet,
    b: &CylinderSet,
    w: &WeightFunction,
    vwt: impl Fn(&CylinderSet) -> Result<(Rational, Method)>,
) -> Result<GoodCoverReport> {
    let contained = covers(a, b);
    let (vwt_set, method) = vwt(a)?;
    let pwt_cover = pwt(b, w)?.value;
    let good = contained && pwt_cover <= vwt_set;
    let (vwt_cover, _) = vwt(b)?;
    let dwt_cover_hat = dwt(&b.minimal_elements(), w)?;
    let chain_equal = good.then(|| {
        vwt_set == vwt_cover && vwt_cover == dwt_cover_hat && dwt_cover_hat == pwt_cover
    });
    Ok(GoodCoverReport {
        covers: contained,
        vwt_set,
        vwt_cover,
        dwt_cover_hat,
        pwt_cover,
        method,
        good,
        chain_equal,
    })
}

#[derive(Debug, Clone)]
pub struct ApproximateCover {
    pub cover: CylinderSet,
    pub rationalized: WeightFunction,
    /// pwt of the cover under the oracle's upper bounds
    pub pwt_upper: Rational,
    /// convex cover value of A under the oracle's lower bounds
    pub vwt_lower: Rational,
    pub covers: bool,
    /// pwt_w(B) ≤ (1+δ)·vwt_w(A), certified through the interval bounds
    pub holds: bool,
}

/// Good cover for a convex weight known only through an oracle: rationalize
/// within factor 1/(1+δ), build the cover on the rational table, then certify
/// pwt_w(B) ≤ (1+δ)·vwt_w(A) for the true weights by interval arithmetic.
pub fn approximate_good_cover(
    stream: &[BitString],
    oracle: &dyn WeightOracle,
    delta: &Rational,
    depth: usize,
    opts: RationalizeOptions,
) -> Result<ApproximateCover> {
    if *delta <= Rational::zero() {
        return Err(Error::Precondition("δ must be positive".into()));
    }
    let band = Band::Factor(int(1) / (int(1) + delta));
    let rationalized = convex_rationalize(oracle, &band, depth, opts)?;
    let cover = build_cover(stream, &rationalized)?;
    let a: CylinderSet = stream.iter().cloned().collect();
    let precision = pow2(-(opts.floor_bits as i64));
    let upper = WeightFunction::tabulate(depth, |s| oracle.interval(s, &precision).1)?;
    let pwt_upper = pwt(&cover, &upper)?.value;
    let vwt_lower = crate::weights::convex_cover_value(&a, |s| oracle.interval(s, &precision).0);
    let contained = covers(&a, &cover);
    let holds = contained && pwt_upper <= (int(1) + delta) * &vwt_lower;
    Ok(ApproximateCover {
        cover,
        rationalized,
        pwt_upper,
        vwt_lower,
        covers: contained,
        holds,
    })
}
