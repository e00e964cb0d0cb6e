//! Seeded random instance generators for property checks and the self-test.

use std::collections::BTreeMap;

use rand::Rng;

use crate::bits::BitString;
use crate::codes::CodeRequest;
use crate::cylinder::CylinderSet;
use crate::levin::{CapAssignment, MonotoneFunctionalTable};
use crate::rational::{int, ratio, Rational};
use crate::weight::WeightFunction;

pub fn random_string(rng: &mut impl Rng, max_len: usize) -> BitString {
    let len = rng.gen_range(0..=max_len);
    BitString::from_bits((0..len).map(|_| rng.gen()).collect())
}

/// Up to `max_size` strings of length ≤ `depth`.
pub fn random_set(rng: &mut impl Rng, depth: usize, max_size: usize) -> CylinderSet {
    let size = rng.gen_range(0..=max_size);
    (0..size).map(|_| random_string(rng, depth)).collect()
}

/// A positive rational with denominator ≤ `max_den`, at most 1.
pub fn random_fraction(rng: &mut impl Rng, max_den: i64) -> Rational {
    let d = rng.gen_range(1..=max_den);
    ratio(rng.gen_range(1..=d), d)
}

/// Convex rational weights: each child gets its parent's weight times a factor
/// in (0, 1], and the two factors of a node sum to at least 1.
pub fn random_convex_weights(rng: &mut impl Rng, depth: usize) -> WeightFunction {
    let mut table = BTreeMap::new();
    table.insert(BitString::empty(), random_fraction(rng, 4));
    let internal = if depth == 0 { 0 } else { (1usize << depth) - 1 };
    for s in BitString::all_up_to(depth).take(internal) {
        let parent = table[&s].clone();
        let a = random_fraction(rng, 6);
        let floor_b = int(1) - &a;
        let b = loop {
            let b = random_fraction(rng, 6);
            if b >= floor_b {
                break b;
            }
        };
        let [c0, c1] = s.children();
        table.insert(c0, &parent * a);
        table.insert(c1, &parent * b);
    }
    WeightFunction::from_table(depth, &table).expect("total positive table")
}

/// Arbitrary positive rational weights, convex or not.
pub fn random_rational_weights(rng: &mut impl Rng, depth: usize) -> WeightFunction {
    let table = BitString::all_up_to(depth)
        .map(|s| (s, random_fraction(rng, 8)))
        .collect();
    WeightFunction::from_table(depth, &table).expect("total positive table")
}

/// Integer exponents in 0..=max_exp, arbitrary shape.
pub fn random_exponent_weights(rng: &mut impl Rng, depth: usize, max_exp: i64) -> WeightFunction {
    let table = BitString::all_up_to(depth)
        .map(|s| (s, rng.gen_range(0..=max_exp)))
        .collect();
    WeightFunction::from_exponents(depth, &table).expect("total table")
}

/// A monotone table: each input either is undefined or extends the output of
/// its nearest defined ancestor by up to two random bits, capped at `dx`.
pub fn random_functional(rng: &mut impl Rng, dy: usize, dx: usize) -> MonotoneFunctionalTable {
    let mut base: BTreeMap<BitString, BitString> = BTreeMap::new();
    let mut map = BTreeMap::new();
    for rho in BitString::all_up_to(dy) {
        let inherited = match rho.parent() {
            Some(p) => base[&p].clone(),
            None => BitString::empty(),
        };
        if rng.gen_bool(0.2) {
            base.insert(rho, inherited);
            continue;
        }
        let mut out = inherited;
        for _ in 0..rng.gen_range(0..=2) {
            if out.len() < dx {
                out = out.child(rng.gen());
            }
        }
        base.insert(rho.clone(), out.clone());
        map.insert(rho, out);
    }
    MonotoneFunctionalTable::new(dy, dx, map).expect("monotone by construction")
}

/// Caps k/8 with k in 1..=8 on every index up to `depth`.
pub fn random_caps(rng: &mut impl Rng, depth: usize) -> CapAssignment {
    let caps = BitString::all_up_to(depth)
        .map(|s| (s, ratio(rng.gen_range(1..=8), 8)))
        .collect();
    CapAssignment::new(caps).expect("positive caps")
}

/// Requests with lengths in 0..=max_len.
pub fn random_requests(rng: &mut impl Rng, count: usize, max_len: usize) -> Vec<CodeRequest> {
    (0..count)
        .map(|i| CodeRequest::new(format!("r{i}"), rng.gen_range(0..=max_len)))
        .collect()
}
