//! The bundled invariant suites behind `fweight selftest`.

use std::fmt;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitString;
use crate::codes::{
    kraft_chaitin_assign, kraft_sum, requests_from_family, semimeasure_from_family,
    test_family_audit, universal_test_generate, ComplexityEstimator, TestFamily,
};
use crate::cylinder::{covers, CylinderSet};
use crate::dnrsim::{exhaustive_sweep, run_propagation, verify_witness, FinitePiClass, OracleTable};
use crate::error::Result;
use crate::gen;
use crate::goodcover::{build_cover, verify_good_cover};
use crate::levin::{
    levin_from_functional, levin_measure_test, levin_pushforward_bound, levin_truncate, levin_validate,
};
use crate::rational::{int, pow2, ratio, Rational};
use crate::transforms::{fg_bound_check, increasing_pushforward, integer_normalize, HFunction};
use crate::weight::WeightFunction;
use crate::weights::{dwt, is_convex, pwt, vwt_bruteforce, vwt_convex, vwt_depth_bounded};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Small,
    Full,
}

impl Scale {
    fn cases(self, small: usize) -> usize {
        match self {
            Scale::Small => small,
            Scale::Full => small * 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checks: u64,
    pub failures: u64,
    pub first_failure: Option<String>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "suite {} {}/{} {}",
            self.name,
            self.checks - self.failures,
            self.checks,
            if self.passed() { "pass" } else { "fail" }
        )
    }
}

struct Tally {
    name: &'static str,
    checks: u64,
    failures: u64,
    first_failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            checks: 0,
            failures: 0,
            first_failure: None,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            self.first_failure.get_or_insert_with(what);
        }
    }

    /// Records an operation that must not error.
    fn ok<T>(&mut self, r: Result<T>, what: impl FnOnce() -> String) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(false, || format!("{}: {e}", what()));
                None
            }
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name,
            checks: self.checks,
            failures: self.failures,
            first_failure: self.first_failure,
        }
    }
}

fn rng_for(seed: u64, suite: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ suite.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Runs every suite; results are ordered by suite name.
pub fn run_all(scale: Scale, seed: u64) -> Vec<SuiteResult> {
    vec![
        codes_suite(scale, seed),
        dnrsim_suite(scale, seed),
        goodcover_suite(scale, seed),
        levin_suite(scale, seed),
        transforms_suite(scale, seed),
        weights_suite(scale, seed),
    ]
}

pub fn weights_suite(scale: Scale, seed: u64) -> SuiteResult {
    let mut t = Tally::new("weights");
    let mut rng = rng_for(seed, 1);
    for _ in 0..scale.cases(300) {
        let depth = rng.gen_range(0..=3);
        let a = gen::random_set(&mut rng, depth, 6);
        let w = gen::random_convex_weights(&mut rng, depth);
        let ctx = || format!("A = {:?}", a.render_lines());
        t.check(is_convex(&w, depth).map(|c| c.convex).unwrap_or(false), || format!("generated weights not convex, {}", ctx()));
        let (Some(d), Some(p), Some(v), Some(b)) = (
            t.ok(dwt(&a, &w), ctx),
            t.ok(pwt(&a, &w), ctx),
            t.ok(vwt_convex(&a, &w), ctx),
            t.ok(vwt_bruteforce(&a, &w, 0), ctx),
        ) else {
            continue;
        };
        t.check(p.value <= d, || format!("pwt > dwt, {}", ctx()));
        t.check(v.value <= p.value, || format!("vwt > pwt, {}", ctx()));
        t.check(v.value == b.value, || format!("convex DP differs from brute force, {}", ctx()));
        let wit: CylinderSet = p.witness.iter().cloned().collect();
        t.check(
            wit.is_prefix_free() && covers(&wit, &a) && dwt(&wit, &w).ok() == Some(p.value.clone()),
            || format!("pwt witness invalid, {}", ctx()),
        );
        let vw: CylinderSet = v.witness.iter().cloned().collect();
        t.check(covers(&a, &vw) && dwt(&vw, &w).ok() == Some(v.value.clone()), || {
            format!("vwt witness invalid, {}", ctx())
        });

        let raw = gen::random_rational_weights(&mut rng, depth + 1);
        if let (Some(x), Some(y)) = (
            t.ok(vwt_depth_bounded(&a, &raw, 1), ctx),
            t.ok(vwt_bruteforce(&a, &raw, 1), ctx),
        ) {
            t.check(x.value == y.value, || format!("depth-bounded DP differs from brute force, {}", ctx()));
        }
    }
    t.finish()
}

fn stream_of(rng: &mut impl Rng, depth: usize, len: usize) -> Vec<BitString> {
    (0..len).map(|_| gen::random_string(rng, depth)).collect()
}

pub fn goodcover_suite(scale: Scale, seed: u64) -> SuiteResult {
    let mut t = Tally::new("goodcover");
    // golden traces; the first two pin the shortest-prefix tie-break
    let length4 = WeightFunction::length(4);
    let golden: [(&[&str], &[&str]); 4] = [
        (&["0", "1"], &["e", "0"]),
        (&["00", "01"], &["0", "00"]),
        (&["00", "01", "010"], &["0", "00"]),
        (&["011", "0", "1", "11"], &["e", "0", "011"]),
    ];
    for (stream, expect) in golden {
        let s: Vec<BitString> = stream.iter().map(|x| x.parse().unwrap()).collect();
        let expect: CylinderSet = expect.iter().map(|x| x.parse().unwrap()).collect();
        let got = build_cover(&s, &length4);
        t.check(got.as_ref().ok() == Some(&expect), || {
            format!("golden trace {stream:?}: expected {:?}, got {got:?}", expect.render_lines())
        });
    }
    let mut rng = rng_for(seed, 2);
    for _ in 0..scale.cases(300) {
        let depth = rng.gen_range(1..=3);
        let w = gen::random_convex_weights(&mut rng, depth);
        let len = rng.gen_range(0..=6);
        let stream = stream_of(&mut rng, depth, len);
        let ctx = || format!("stream {stream:?}");
        let Some(b) = t.ok(build_cover(&stream, &w), ctx) else {
            continue;
        };
        let a: CylinderSet = stream.iter().cloned().collect();
        if let Some(r) = t.ok(verify_good_cover(&a, &b, &w, 0), ctx) {
            t.check(r.passed(), || format!("not a good cover: {r:?}, {}", ctx()));
        }
    }
    t.finish()
}

pub fn transforms_suite(scale: Scale, seed: u64) -> SuiteResult {
    let mut t = Tally::new("transforms");
    let mut rng = rng_for(seed, 3);
    for _ in 0..scale.cases(300) {
        let depth = rng.gen_range(0..=4);
        let w = gen::random_exponent_weights(&mut rng, depth, 6);
        let a = gen::random_set(&mut rng, depth, 8);
        let ctx = || format!("A = {:?}", a.render_lines());
        let Some(p) = t.ok(increasing_pushforward(&a, &w), ctx) else {
            continue;
        };
        t.check(p.holds(), || format!("pushforward postconditions fail: {p:?}"));
        // exponents are ≥ 0, so Σ_n 2^-n over occurring n is at most 2
        if let Some(r) = t.ok(fg_bound_check(&p.set, &w, &HFunction::Identity, 1), ctx) {
            t.check(r.holds, || format!("fg bound fails: {r:?}"));
        }

        let num = rng.gen_range(-40..=40);
        let den = rng.gen_range(1..=8);
        let f = ratio(num, den);
        let len = rng.gen_range(0..=8usize);
        let n = integer_normalize(&f, len);
        let cap = int(2 * len as i64);
        let f0 = if f < int(0) { int(0) } else if f > cap { cap } else { f.clone() };
        let nr = int(n);
        t.check(f0 < nr && nr < f0 + int(2), || format!("integer_normalize({num}/{den}, {len}) = {n}"));
    }
    t.finish()
}

fn bounded_family(rng: &mut impl Rng, w: &WeightFunction, depth: usize, levels: u32) -> TestFamily {
    let mut fam = TestFamily::default();
    for i in 1..=levels {
        let mut a = CylinderSet::new();
        for _ in 0..rng.gen_range(0..=6) {
            let s = gen::random_string(rng, depth);
            let mut grown = a.clone();
            grown.insert(s);
            if dwt(&grown, w).map(|d| d <= pow2(-(i as i64))).unwrap_or(false) {
                a = grown;
            }
        }
        fam.levels.insert(i, a);
    }
    fam
}

pub fn codes_suite(scale: Scale, seed: u64) -> SuiteResult {
    let mut t = Tally::new("codes");
    let mut rng = rng_for(seed, 4);
    for _ in 0..scale.cases(1000) {
        let count = rng.gen_range(0..=12);
        let reqs = gen::random_requests(&mut rng, count, 6);
        let total = kraft_sum(&reqs);
        let got = kraft_chaitin_assign(&reqs);
        if total <= int(1) {
            let words: Option<Vec<BitString>> = got.ok().map(|v| v.into_iter().map(|(_, w)| w).collect());
            let ok = words.as_ref().is_some_and(|ws| {
                ws.iter().zip(&reqs).all(|(w, r)| w.len() == r.length)
                    && ws.iter().enumerate().all(|(i, x)| {
                        ws.iter().enumerate().all(|(j, y)| i == j || !x.comparable(y))
                    })
            });
            t.check(ok, || format!("assignment failed within Kraft bound: {reqs:?}"));
        } else {
            let mut running = Rational::zero();
            let first = reqs
                .iter()
                .position(|r| {
                    running += pow2(-(r.length as i64));
                    running > int(1)
                })
                .expect("sum exceeds 1");
            let index = match got {
                Err(crate::error::Error::KraftExhausted { index, .. }) => Some(index),
                _ => None,
            };
            t.check(index == Some(first), || format!("expected failure at {first}: {reqs:?}"));
        }
    }

    let w = WeightFunction::length(6);
    for _ in 0..scale.cases(200) {
        let fam = bounded_family(&mut rng, &w, 6, 6);
        let audit = test_family_audit(&fam, &w, false);
        t.check(audit.as_ref().is_ok_and(|a| a.all_pass()), || "bounded family fails its audit".into());
        if let Some(r) = t.ok(requests_from_family(&fam, &w), || "requests".into()) {
            t.check(r.offset == 0 && r.kraft_sum <= int(1), || format!("family requests exceed Kraft: {r:?}"));
            t.check(kraft_chaitin_assign(&r.requests).is_ok(), || "family requests unservable".into());
        }
        let sigma = gen::random_string(&mut rng, 4);
        if let Some(m) = t.ok(semimeasure_from_family(&fam, &w, &sigma), || "semimeasure".into()) {
            t.check(m.holds(), || format!("semimeasure fails at {sigma}: {m:?}"));
        }
    }

    let est = ComplexityEstimator::builtin(8);
    let fw = WeightFunction::length(8);
    let mut prev: Option<CylinderSet> = None;
    for i in 0..4 {
        if let Some(level) = t.ok(universal_test_generate(&est, &fw, i, 8), || format!("S_{i}")) {
            t.check(level.audit.admissible, || "built-in estimator inadmissible".into());
            if let Some(p) = &prev {
                t.check(covers(&level.set, p) && level.set.iter().all(|s| p.contains(s)), || {
                    format!("S_{i} not contained in S_{}", i - 1)
                });
            }
            prev = Some(level.set);
        }
    }
    t.finish()
}

pub fn levin_suite(scale: Scale, seed: u64) -> SuiteResult {
    let mut t = Tally::new("levin");
    let mut rng = rng_for(seed, 5);
    for _ in 0..scale.cases(100) {
        let dy = rng.gen_range(0..=5);
        let dx = rng.gen_range(0..=3);
        let phi = gen::random_functional(&mut rng, dy, dx);
        let ctx = || format!("functional {:?}", phi.entries().collect::<Vec<_>>());
        let Some(v) = t.ok(levin_from_functional(&phi), ctx) else {
            continue;
        };
        t.check(levin_validate(&v).passed(), || format!("system invalid, {}", ctx()));
        let caps = gen::random_caps(&mut rng, dx);
        let Some(tv) = t.ok(levin_truncate(&v, &caps), ctx) else {
            continue;
        };
        t.check(levin_validate(&tv).passed(), || format!("truncated system invalid, {}", ctx()));
        for s in BitString::all_up_to(dx) {
            let r = caps.get(&s).expect("total caps");
            t.check(covers(&tv.set(&s), &v.set(&s)) && tv.measure(&s) <= *r, || {
                format!("truncation posts fail at {s}, {}", ctx())
            });
            let untouched = s
                .prefixes()
                .all(|p| v.measure(&p) < *caps.get(&p).expect("total caps"));
            if untouched {
                t.check(covers(&v.set(&s), &tv.set(&s)), || format!("truncation removed V_{s}, {}", ctx()));
            }
        }

        let w = WeightFunction::length(dx);
        for i in 0..3 {
            if let Some(m) = t.ok(levin_measure_test(&v, &w, i), ctx) {
                let fam = TestFamily::new([(i as u32, m.set)].into_iter().collect());
                let audit = test_family_audit(&fam, &w, true);
                t.check(audit.is_ok_and(|a| a.all_pass()), || format!("measure test fails strong audit, {}", ctx()));
            }
        }
        let c = (0..=8)
            .find(|&c| {
                BitString::all_up_to(dx).all(|s| tv.measure(&s) <= pow2(c) * pow2(-(s.len() as i64)))
            })
            .expect("measures are at most 1");
        let a = gen::random_set(&mut rng, dx, 5);
        if let Some(r) = t.ok(levin_pushforward_bound(&tv, &a, &w, c), ctx) {
            t.check(r.holds(), || format!("pushforward bound fails: {r:?}"));
        }
    }
    t.finish()
}

pub fn dnrsim_suite(scale: Scale, seed: u64) -> SuiteResult {
    let mut t = Tally::new("dnrsim");
    let sweep = match scale {
        Scale::Small => exhaustive_sweep(1, 2, 2),
        Scale::Full => exhaustive_sweep(2, 3, 2),
    };
    if let Some(r) = t.ok(sweep, || "sweep".into()) {
        t.checks += r.instances - 1;
        t.check(r.failures == 0, || r.first_failure.clone().unwrap_or_default());
        if r.failures > 1 {
            t.failures += r.failures - 1;
        }
    }
    let mut rng = rng_for(seed, 6);
    let all: Vec<BitString> = BitString::all_of_length(3).collect();
    for _ in 0..scale.cases(500) {
        let leaves: Vec<BitString> = all.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        let Ok(q) = FinitePiClass::new(3, leaves) else {
            continue;
        };
        let n = rng.gen_range(0..=5);
        let values = (0..n)
            .map(|_| {
                (0..q.len())
                    .map(|_| rng.gen_bool(0.8).then(|| rng.gen_range(0..=3)))
                    .collect()
            })
            .collect();
        let table = OracleTable::new(values);
        if let Some(run) = t.ok(run_propagation(&q, &table), || format!("{table:?}")) {
            t.check(verify_witness(&run, &q, &table).passed(), || format!("witness fails: {table:?}"));
        }
    }
    t.finish()
}
