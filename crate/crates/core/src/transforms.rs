//! Normalizations of weight functions and test sets: integer exponents, the
//! increasing-set pushforward, the weight-inflation bound for g = f + h(f),
//! weights built from a family of trees, and convex rational approximation of
//! weights that are only known through interval queries.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::bits::BitString;
use crate::cylinder::{covers, CylinderSet};
use crate::error::{Error, Result};
use crate::rational::{floor, int, pow2, ratio, render, to_i64, Rational};
use crate::weight::WeightFunction;
use crate::weights::{dwt, is_convex, pwt};

/// f̄ = ⌊f0⌋ + 1 where f0 = min(max(f, 0), 2|σ|); satisfies f0 < f̄ < f0 + 2.
pub fn integer_normalize(f: &Rational, len: usize) -> i64 {
    integer_normalize_bounds(f, f, len).expect("exact value always locates the band")
}

/// Same as [`integer_normalize`] when f is only known to lie in [lo, hi].
/// Fails unless the clamped interval sits inside one unit interval [k, k+1).
pub fn integer_normalize_bounds(lo: &Rational, hi: &Rational, len: usize) -> Result<i64> {
    if lo > hi {
        return Err(Error::Precondition(format!(
            "empty bound interval [{}, {}]",
            render(lo),
            render(hi)
        )));
    }
    let clamp = |x: &Rational| -> Rational {
        let cap = int(2 * len as i64);
        let x = if x.is_negative() { Rational::zero() } else { x.clone() };
        if x > cap {
            cap
        } else {
            x
        }
    };
    let (a, b) = (clamp(lo), clamp(hi));
    let k = floor(&a);
    if floor(&b) != k {
        return Err(Error::BoundsTooLoose(format!(
            "f0 in [{}, {}] straddles an integer",
            render(&a),
            render(&b)
        )));
    }
    Ok(to_i64(&k).expect("clamped exponent fits") + 1)
}

/// Integer-exponent weight from a rational f table, normalized pointwise.
pub fn normalize_table(depth: usize, f: &BTreeMap<BitString, Rational>) -> Result<WeightFunction> {
    let mut exps = BTreeMap::new();
    for s in BitString::all_up_to(depth) {
        let v = f.get(&s).ok_or_else(|| Error::MissingWeight(s.clone()))?;
        exps.insert(s.clone(), integer_normalize(v, s.len()));
    }
    WeightFunction::from_exponents(depth, &exps)
}

/// σ ∈ I(f): every proper prefix has strictly larger weight (smaller f).
pub fn in_increasing_set(s: &BitString, w: &WeightFunction) -> Result<bool> {
    let ws = w.weight(s)?;
    for n in 0..s.len() {
        if w.weight(&s.prefix(n))? <= ws {
            return Ok(false);
        }
    }
    Ok(true)
}

/// σ̄: the shortest prefix ρ ⊆ σ with w(ρ) ≤ w(σ), i.e. f(ρ) ≥ f(σ).
pub fn increasing_representative(s: &BitString, w: &WeightFunction) -> Result<BitString> {
    let ws = w.weight(s)?;
    for p in s.prefixes() {
        if w.weight(&p)? <= ws {
            return Ok(p);
        }
    }
    unreachable!("σ itself qualifies")
}

#[derive(Debug, Clone)]
pub struct Pushforward {
    pub set: CylinderSet,
    pub in_increasing_set: bool,
    pub covers: bool,
    pub dwt_before: Rational,
    pub dwt_after: Rational,
    pub pwt_before: Rational,
    pub pwt_after: Rational,
}

impl Pushforward {
    pub fn holds(&self) -> bool {
        self.in_increasing_set
            && self.covers
            && self.dwt_after <= self.dwt_before
            && self.pwt_after <= self.pwt_before
    }
}

/// Ā = {σ̄ : σ ∈ A}, with its four postconditions evaluated.
pub fn increasing_pushforward(a: &CylinderSet, w: &WeightFunction) -> Result<Pushforward> {
    let mut out = CylinderSet::new();
    for s in a {
        out.insert(increasing_representative(s, w)?);
    }
    let mut in_inc = true;
    for s in &out {
        in_inc &= in_increasing_set(s, w)?;
    }
    Ok(Pushforward {
        in_increasing_set: in_inc,
        covers: covers(a, &out),
        dwt_before: dwt(a, w)?,
        dwt_after: dwt(&out, w)?,
        pwt_before: pwt(a, w)?.value,
        pwt_after: pwt(&out, w)?.value,
        set: out,
    })
}

/// The function h in g(σ) = f(σ) + h(f(σ)).
#[derive(Debug, Clone, PartialEq)]
pub enum HFunction {
    Identity,
    Table(BTreeMap<i64, i64>),
    /// h(x) = ⌈(1+ε)·log₂ x⌉ for x ≥ 1, and h(0) = 0.
    LogScaled(Rational),
}

impl HFunction {
    pub fn eval(&self, x: i64) -> Result<i64> {
        match self {
            HFunction::Identity => Ok(x),
            HFunction::Table(t) => t
                .get(&x)
                .copied()
                .ok_or_else(|| Error::Precondition(format!("h undefined at {x}"))),
            HFunction::LogScaled(eps) => {
                if x < 0 {
                    return Err(Error::Precondition(format!("h undefined at {x}")));
                }
                if x <= 1 {
                    return Ok(0);
                }
                Ok(ceil_scaled_log2(x as u64, eps))
            }
        }
    }
}

/// ⌈(1+ε)·log₂ x⌉ exactly: the least m with x^(q+p) ≤ 2^(m·q) where ε = p/q.
fn ceil_scaled_log2(x: u64, eps: &Rational) -> i64 {
    let q_u = to_i64(eps.denom()).expect("small ε") as usize;
    let exp = q_u + to_i64(eps.numer()).expect("small ε") as usize;
    let lhs = num_traits::pow(BigInt::from(x), exp);
    let mut m = ((exp as f64 * (x as f64).log2()) / q_u as f64).floor() as i64 - 2;
    m = m.max(0);
    while lhs > (BigInt::one() << (m as usize * q_u)) {
        m += 1;
    }
    m
}

#[derive(Debug, Clone)]
pub struct FgReport {
    /// Exponent n ↦ P_n = {σ ∈ A : f(σ) = n}.
    pub slices: BTreeMap<i64, CylinderSet>,
    /// Σ_n 2^(-h(n))·dwt_f(P_n).
    pub slice_value: Rational,
    /// Σ_{σ∈A} 2^(-g(σ)), summed directly.
    pub direct_value: Rational,
    pub pwt_f: Rational,
    /// 2^c·pwt_f(A).
    pub bound: Rational,
    pub h_mass: Rational,
    pub holds: bool,
}

/// Certifies dwt_g(A) = Σ_n 2^(-h(n)) dwt_f(P_n) ≤ 2^c·pwt_f(A) for g = f + h∘f.
pub fn fg_bound_check(
    a: &CylinderSet,
    w: &WeightFunction,
    h: &HFunction,
    c: i64,
) -> Result<FgReport> {
    let mut slices: BTreeMap<i64, CylinderSet> = BTreeMap::new();
    for s in a {
        if !in_increasing_set(s, w)? {
            return Err(Error::Precondition(format!(
                "{s} is not in the increasing set of f; push A forward first"
            )));
        }
        slices.entry(w.exponent(s)?).or_default().insert(s.clone());
    }
    let occurring: Vec<i64> = slices.keys().copied().collect();
    if let (Some(&lo), Some(&hi)) = (occurring.first(), occurring.last()) {
        let mut prev = h.eval(lo)?;
        for n in lo + 1..=hi {
            let cur = h.eval(n)?;
            if cur < prev {
                return Err(Error::Precondition(format!("h is not nondecreasing at {n}")));
            }
            prev = cur;
        }
    }
    let mut h_mass = Rational::zero();
    for &n in &occurring {
        h_mass += pow2(-h.eval(n)?);
    }
    if h_mass > pow2(c) {
        return Err(Error::Precondition(format!(
            "Σ 2^(-h(n)) = {} exceeds 2^{c}",
            render(&h_mass)
        )));
    }
    let mut slice_value = Rational::zero();
    for (&n, p) in &slices {
        if !p.is_prefix_free() {
            return Err(Error::Invariant(format!("slice {n} is not prefix-free")));
        }
        slice_value += pow2(-h.eval(n)?) * dwt(p, w)?;
    }
    let mut direct_value = Rational::zero();
    for s in a {
        let f = w.exponent(s)?;
        direct_value += pow2(-(f + h.eval(f)?));
    }
    let pwt_f = pwt(a, w)?.value;
    let bound = pow2(c) * &pwt_f;
    let holds = slice_value == direct_value && direct_value <= bound;
    Ok(FgReport {
        slices,
        slice_value,
        direct_value,
        pwt_f,
        bound,
        h_mass,
        holds,
    })
}

/// Trees T_1, T_2, ... (1-based), each prefix-closed and containing e.
#[derive(Debug, Clone, Default)]
pub struct TreeFamily {
    trees: Vec<CylinderSet>,
}

impl TreeFamily {
    pub fn new(trees: Vec<CylinderSet>) -> Result<Self> {
        for (i, t) in trees.iter().enumerate() {
            if !t.contains(&BitString::empty()) {
                return Err(Error::Precondition(format!("tree {} lacks e", i + 1)));
            }
            for s in t {
                if let Some(p) = s.parent() {
                    if !t.contains(&p) {
                        return Err(Error::Precondition(format!(
                            "tree {} is not prefix-closed at {s}",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(TreeFamily { trees })
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// T_i for i ≥ 1.
    pub fn tree(&self, i: usize) -> Option<&CylinderSet> {
        i.checked_sub(1).and_then(|k| self.trees.get(k))
    }

    /// h(τ): the least i ≥ 1 with i = |τ| or τ ∈ T_i. h(e) = 1.
    pub fn level(&self, tau: &BitString) -> Result<usize> {
        let mut i = 1;
        loop {
            if i == tau.len() {
                return Ok(i);
            }
            let t = self.tree(i).ok_or(Error::FamilyTooShort { needed: i })?;
            if t.contains(tau) {
                return Ok(i);
            }
            i += 1;
        }
    }
}

/// f(τ) = 1 if h(τ↾(|τ|-1)) = h(τ), else 2|τ|; f(e) = 1.
pub fn sigma02_exponent(family: &TreeFamily, s: &BitString) -> Result<i64> {
    let Some(parent) = s.parent() else {
        return Ok(1);
    };
    if family.level(&parent)? == family.level(s)? {
        Ok(1)
    } else {
        Ok(2 * s.len() as i64)
    }
}

/// The tree-family weight tabulated up to `depth`.
pub fn sigma02_weight(family: &TreeFamily, depth: usize) -> Result<WeightFunction> {
    let mut exps = BTreeMap::new();
    for s in BitString::all_up_to(depth) {
        let f = sigma02_exponent(family, &s)?;
        exps.insert(s, f);
    }
    WeightFunction::from_exponents(depth, &exps)
}

/// A weight known only through interval queries: `interval(σ, p)` returns
/// [lo, hi] ∋ w(σ) with hi - lo ≤ p. Repeated queries must be consistent.
pub trait WeightOracle {
    fn interval(&self, s: &BitString, precision: &Rational) -> (Rational, Rational);
}

/// w(σ) = 2^(-s·|σ|) for rational s ≥ 0.
#[derive(Debug, Clone)]
pub struct LengthPowerOracle {
    pub scale: Rational,
}

impl LengthPowerOracle {
    pub fn new(scale: Rational) -> Self {
        LengthPowerOracle { scale }
    }
}

impl WeightOracle for LengthPowerOracle {
    fn interval(&self, s: &BitString, precision: &Rational) -> (Rational, Rational) {
        let x = &self.scale * int(s.len() as i64);
        if x.is_integer() {
            let v = pow2(-to_i64(&x.to_integer()).expect("exponent fits"));
            return (v.clone(), v);
        }
        // 2^(-a/b) = 2^(-⌈a/b⌉) · 2^(r/b) with 0 < r < b
        let (a, b) = (x.numer().clone(), x.denom().clone());
        let whole = a.div_ceil(&b);
        let r = &whole * &b - &a;
        let b_u = to_i64(&b).expect("small denominator") as u32;
        let mut m = 1usize;
        while pow2(-(m as i64)) * int(2) > *precision {
            m += 1;
        }
        // largest k with (k / 2^m)^b ≤ 2^r, i.e. k^b ≤ 2^(r + m·b)
        let target = BigInt::one() << (to_i64(&r).unwrap() as usize + m * b_u as usize);
        let (mut lo, mut hi) = (BigInt::one() << m, BigInt::one() << (m + 1));
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) >> 1;
            if num_traits::pow(mid.clone(), b_u as usize) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let scale = pow2(-to_i64(&whole).unwrap()) * pow2(-(m as i64));
        let lo_r = Rational::from_integer(lo.clone()) * &scale;
        let hi_r = if num_traits::pow(lo.clone(), b_u as usize) == target {
            lo_r.clone()
        } else {
            Rational::from_integer(lo + 1) * &scale
        };
        (lo_r, hi_r)
    }
}

/// How far below w the approximation may sit.
#[derive(Debug, Clone, PartialEq)]
pub enum Band {
    /// f < f̄ < f + ε, i.e. 2^(-ε)·w < w̄ < w.
    Exponent(Rational),
    /// λ·w < w̄ < w for rational λ ∈ (0, 1).
    Factor(Rational),
}

#[derive(Debug, Clone, Copy)]
pub struct RationalizeOptions {
    /// Finest precision tried, and largest dyadic denominator exponent used.
    pub floor_bits: u32,
}

impl Default for RationalizeOptions {
    fn default() -> Self {
        RationalizeOptions { floor_bits: 96 }
    }
}

/// A dyadic λ' < 1 with λ' ≥ the band's lower factor.
fn band_factor(band: &Band, floor_bits: u32) -> Result<Rational> {
    match band {
        Band::Factor(l) => {
            if l.is_positive() && *l < int(1) {
                Ok(l.clone())
            } else {
                Err(Error::Precondition(format!("band factor {} outside (0, 1)", render(l))))
            }
        }
        Band::Exponent(eps) => {
            if !eps.is_positive() {
                return Err(Error::Precondition("ε must be positive".into()));
            }
            let (Some(p), Some(q)) = (to_i64(eps.numer()), to_i64(eps.denom())) else {
                return Err(Error::Precondition("ε numerator/denominator too large".into()));
            };
            if q > 64 && *eps < int(1) {
                // 2^-ε = e^-x with 0.693ε ≤ x ≤ 0.7ε, and e^-x ≤ 1 - x + x²/2
                let t = int(1) - ratio(693, 1000) * eps + ratio(49, 200) * eps * eps;
                for m in 1..=floor_bits as i64 {
                    let scale = pow2(m);
                    let k = (&t * &scale).ceil().to_integer();
                    let cand = Rational::from_integer(k) / scale;
                    if cand < int(1) {
                        return Ok(cand);
                    }
                }
                return Err(Error::EmptyBand(BitString::empty()));
            }
            let (p, q) = (p as usize, q as usize);
            for m in 1..=floor_bits as usize {
                // least k with k^q · 2^p ≥ 2^(m q)
                let target = BigInt::one() << (m * q);
                let (mut lo, mut hi) = (BigInt::zero(), BigInt::one() << m);
                while &hi - &lo > BigInt::one() {
                    let mid: BigInt = (&lo + &hi) >> 1;
                    if (num_traits::pow(mid.clone(), q) << p) >= target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                if hi < (BigInt::one() << m) {
                    return Ok(Rational::new(hi, BigInt::one() << m));
                }
            }
            Err(Error::EmptyBand(BitString::empty()))
        }
    }
}

/// Smallest-denominator dyadic strictly inside (lo, hi), up to 2^-max_bits.
fn dyadic_between(lo: &Rational, hi: &Rational, max_bits: u32) -> Option<Rational> {
    for m in 0..=max_bits as i64 {
        let scale = pow2(m);
        let k = floor(&(lo * &scale)) + BigInt::one();
        let cand = Rational::from_integer(k) / &scale;
        if cand < *hi {
            return Some(cand);
        }
    }
    None
}

/// Builds a convex rational table w̄ with λ·w < w̄ < w on all strings up to
/// `depth`, for a convex oracle weight w.
///
/// Level n gets the sub-band ((1 - g·2^-n)·w, (1 - g·2^-(n+1))·w) with
/// g = 1 - λ'. Each level's upper factor is the next level's lower factor, so
/// w̄(σ0) + w̄(σ1) > (1 - g·2^-(n+1))·(w(σ0) + w(σ1)) ≥ (1 - g·2^-(n+1))·w(σ) > w̄(σ).
pub fn convex_rationalize(
    oracle: &dyn WeightOracle,
    band: &Band,
    depth: usize,
    opts: RationalizeOptions,
) -> Result<WeightFunction> {
    let lambda = band_factor(band, opts.floor_bits)?;
    let gap = int(1) - &lambda;
    let mut table = BTreeMap::new();
    for s in BitString::all_up_to(depth) {
        let n = s.len() as i64;
        let lower = int(1) - &gap * pow2(-n);
        let upper = int(1) - &gap * pow2(-(n + 1));
        let mut picked = None;
        for j in 1..=opts.floor_bits as i64 {
            let (lo, hi) = oracle.interval(&s, &pow2(-j));
            let (l, u) = (&lower * &hi, &upper * &lo);
            if l < u {
                if let Some(x) = dyadic_between(&l, &u, opts.floor_bits) {
                    picked = Some(x);
                    break;
                }
            }
        }
        match picked {
            Some(x) => {
                table.insert(s, x);
            }
            None => return Err(Error::EmptyBand(s)),
        }
    }
    let out = WeightFunction::from_table(depth, &table)?;
    let check = is_convex(&out, depth)?;
    if let Some(v) = check.violation {
        return Err(Error::Invariant(format!("rationalized weight not convex at {v}")));
    }
    Ok(out)
}
