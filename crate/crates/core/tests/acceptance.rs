//! Acceptance suite: one PASS/FAIL line per criterion, each with a time budget.
//! Expected values are recomputed here by independent means where practical.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fweight_core::codes::{
    in_universal_test, kraft_audit, kraft_chaitin_assign, requests_from_family,
    semimeasure_from_family, test_family_audit, universal_test_generate, CodeRequest,
    ComplexityEstimator, SubCode, TestFamily,
};
use fweight_core::dnrsim::exhaustive_sweep;
use fweight_core::gen;
use fweight_core::goodcover::{cover_trace, verify_good_cover_bruteforce};
use fweight_core::levin::{
    levin_from_functional, levin_measure_test, levin_pushforward_bound, levin_truncate,
    levin_validate, CapAssignment,
};
use fweight_core::rational::{int, pow2, ratio};
use fweight_core::transforms::{
    fg_bound_check, increasing_pushforward, integer_normalize, HFunction,
};
use fweight_core::weights::{dwt, pwt, vwt_bruteforce, vwt_convex, vwt_depth_bounded};
use fweight_core::{covers, BitString, CylinderSet, Rational, WeightFunction};

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn set_from_mask(universe: &[BitString], mask: u64) -> CylinderSet {
    universe
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, s)| s.clone())
        .collect()
}

/// Max dwt over prefix-free subsets, by enumerating subsets.
fn pwt_by_subsets(a: &CylinderSet, w: &WeightFunction) -> Rational {
    let members: Vec<BitString> = a.iter().cloned().collect();
    let mut best = Rational::zero();
    for mask in 0u64..(1 << members.len()) {
        let sub = set_from_mask(&members, mask);
        if sub.is_prefix_free() {
            let d = dwt(&sub, w).unwrap();
            if d > best {
                best = d;
            }
        }
    }
    best
}

fn chain_law() -> Outcome {
    let universe: Vec<BitString> = BitString::all_up_to(3).collect();
    let mut r = rng(101);
    let tables: Vec<WeightFunction> = (0..200).map(|_| gen::random_rational_weights(&mut r, 4)).collect();
    for mask in 0..(1u64 << universe.len()) {
        let a = set_from_mask(&universe, mask);
        let w = &tables[(mask % 200) as usize];
        let v = vwt_depth_bounded(&a, w, 1).map_err(|e| e.to_string())?.value;
        let hat = dwt(&a.minimal_elements(), w).unwrap();
        let p = pwt(&a, w).unwrap().value;
        let d = dwt(&a, w).unwrap();
        ensure(v <= hat && hat <= p && p <= d, || format!("chain fails for {:?}", a.render_lines()))?;
        if mask % 16 == 0 {
            let b = vwt_bruteforce(&a, w, 1).map_err(|e| e.to_string())?.value;
            ensure(b == v, || format!("brute force disagrees for {:?}", a.render_lines()))?;
        }
        if mask % 64 == 0 && a.len() <= 8 {
            ensure(p == pwt_by_subsets(&a, w), || format!("pwt oracle disagrees for {:?}", a.render_lines()))?;
        }
    }
    Ok(())
}

fn convex_exactness() -> Outcome {
    let mut r = rng(202);
    for _ in 0..1000 {
        let depth = r.gen_range(0..=4);
        let a = gen::random_set(&mut r, depth, 8);
        let w = gen::random_convex_weights(&mut r, depth + 3);
        let ctx = || format!("A = {:?}", a.render_lines());
        let c = vwt_convex(&a, &w).map_err(|e| e.to_string())?.value;
        let b = vwt_bruteforce(&a, &w, 2).map_err(|e| e.to_string())?.value;
        ensure(c == b, || format!("convex DP {c} vs brute force {b}, {}", ctx()))?;
        for k in 0..=3 {
            let d = vwt_depth_bounded(&a, &w, k).map_err(|e| e.to_string())?.value;
            ensure(c == d, || format!("depth-bounded k={k} gives {d}, {}", ctx()))?;
        }
    }
    Ok(())
}

fn good_cover_induction() -> Outcome {
    let mut r = rng(303);
    for case in 0..500 {
        let depth = r.gen_range(1..=5);
        let w = gen::random_convex_weights(&mut r, depth);
        let len = r.gen_range(0..=12);
        let stream: Vec<BitString> = (0..len).map(|_| gen::random_string(&mut r, depth)).collect();
        let states = cover_trace(&stream, &w).map_err(|e| e.to_string())?;
        for st in &states {
            let processed = st.processed_set();
            let b = st.accepted();
            ensure(covers(&processed, b), || format!("case {case}: cover misses processed strings"))?;
            let p = pwt(b, &w).unwrap().value;
            let v = vwt_convex(&processed, &w).unwrap().value;
            ensure(p == v, || format!("case {case}: pwt(B) = {p} but vwt = {v}, stream {stream:?}"))?;
            if depth <= 3 {
                let rep = verify_good_cover_bruteforce(&processed, b, &w, 0).map_err(|e| e.to_string())?;
                ensure(rep.passed(), || format!("case {case}: brute-force check fails: {rep:?}"))?;
            }
        }
    }
    Ok(())
}

fn kraft_chaitin() -> Outcome {
    let mut r = rng(404);
    for _ in 0..1000 {
        let count = r.gen_range(0..=16);
        let reqs: Vec<CodeRequest> = (0..count)
            .map(|i| CodeRequest::new(format!("q{i}"), r.gen_range(0..=7)))
            .collect();
        let mut running = Rational::zero();
        let first_excess = reqs.iter().position(|q| {
            running += pow2(-(q.length as i64));
            running > int(1)
        });
        match (kraft_chaitin_assign(&reqs), first_excess) {
            (Ok(words), None) => {
                for (i, (q, (label, w))) in reqs.iter().zip(&words).enumerate() {
                    ensure(&q.label == label && w.len() == q.length, || format!("bad word {w} for {q:?}"))?;
                    for (_, v) in &words[i + 1..] {
                        ensure(!w.comparable(v), || format!("{w} and {v} are comparable"))?;
                    }
                }
            }
            (Err(fweight_core::Error::KraftExhausted { index, .. }), Some(first)) => {
                ensure(index == first, || format!("failed at {index}, expected {first}"))?;
            }
            (got, expect) => return Err(format!("{reqs:?}: got {got:?}, expected failure at {expect:?}")),
        }
    }

    // Families with dwt(A_2i) = 2^-2i exactly: Σ_{i=1}^n 2^i·2^-2i = 1 - 2^-n.
    let w = WeightFunction::length(20);
    for n in 1..=8i64 {
        let mut levels = BTreeMap::new();
        for i in 1..=n {
            let len = 2 * i as usize;
            // two siblings one level down carry the same weight as one string
            let base = gen::random_string(&mut r, len - 1);
            let base = BitString::from_bits(base.bits().iter().copied().chain(std::iter::repeat(false)).take(len).collect());
            let a: CylinderSet = if r.gen_bool(0.5) {
                [base].into_iter().collect()
            } else {
                base.children().into_iter().collect()
            };
            ensure(dwt(&a, &w).unwrap() == pow2(-2 * i), || "family level not tight".into())?;
            levels.insert(2 * i as u32, a);
            levels.insert(2 * i as u32 - 1, CylinderSet::new());
        }
        let fam = TestFamily::new(levels);
        let fr = requests_from_family(&fam, &w).map_err(|e| e.to_string())?;
        let expected: Rational = (1..=n).map(|i| pow2(i) * pow2(-2 * i)).fold(Rational::zero(), |a, b| a + b);
        ensure(expected == int(1) - pow2(-n), || "geometric identity".into())?;
        ensure(fr.mass == expected && fr.offset == 0 && fr.kraft_sum == expected, || {
            format!("n={n}: mass {} kraft {} offset {}", fr.mass, fr.kraft_sum, fr.offset)
        })?;
        ensure(kraft_chaitin_assign(&fr.requests).is_ok(), || format!("n={n}: family requests unservable"))?;
    }
    Ok(())
}

fn inflation_bound() -> Outcome {
    let mut r = rng(505);
    for case in 0..200 {
        let depth = r.gen_range(1..=5);
        let w = gen::random_exponent_weights(&mut r, depth, 8);
        let a0 = gen::random_set(&mut r, depth, 10);
        let a = increasing_pushforward(&a0, &w).map_err(|e| e.to_string())?.set;
        let exps: Vec<i64> = a.iter().map(|s| w.exponent(s).unwrap()).collect();
        let (lo, hi) = (
            exps.iter().copied().min().unwrap_or(0),
            exps.iter().copied().max().unwrap_or(0),
        );
        let h = match case % 3 {
            0 => HFunction::Identity,
            1 => HFunction::LogScaled(ratio(r.gen_range(1..=4), 2)),
            _ => {
                let mut level = r.gen_range(0..=2);
                let mut table = BTreeMap::new();
                for n in lo..=hi {
                    level += r.gen_range(0..=1);
                    table.insert(n, level);
                }
                HFunction::Table(table)
            }
        };
        let hv = |n: i64| h.eval(n).unwrap();
        let mut mass = Rational::zero();
        for n in exps.iter().copied().collect::<std::collections::BTreeSet<_>>() {
            mass += pow2(-hv(n));
        }
        let c = (0..64).find(|&c| mass <= pow2(c)).unwrap();
        let rep = fg_bound_check(&a, &w, &h, c).map_err(|e| format!("case {case}: {e}"))?;
        let direct: Rational = a
            .iter()
            .map(|s| {
                let f = w.exponent(s).unwrap();
                pow2(-(f + hv(f)))
            })
            .fold(Rational::zero(), |x, y| x + y);
        ensure(rep.slice_value == direct, || format!("case {case}: slice sum {} vs direct {direct}", rep.slice_value))?;
        let bound = pow2(c) * pwt(&a, &w).unwrap().value;
        ensure(direct <= bound, || format!("case {case}: {direct} > {bound}"))?;
    }
    Ok(())
}

fn levin_suite() -> Outcome {
    let mut r = rng(606);
    let mut strictly_slack_seen = 0;
    for case in 0..500 {
        let dy = r.gen_range(0..=6);
        let dx = r.gen_range(0..=3);
        let phi = gen::random_functional(&mut r, dy, dx);
        let v = levin_from_functional(&phi).map_err(|e| e.to_string())?;
        ensure(levin_validate(&v).passed(), || format!("case {case}: built system invalid"))?;
        // independent membership check of V_σ against the table
        for s in BitString::all_up_to(dx) {
            for y in BitString::all_of_length(dy) {
                let direct = y.prefixes().any(|p| phi.get(&p).is_some_and(|x| s.is_prefix_of(x)));
                let single: CylinderSet = [y.clone()].into_iter().collect();
                ensure(direct == covers(&single, &v.set(&s)), || format!("case {case}: V_{s} wrong at {y}"))?;
            }
        }
        let caps = if case % 4 == 0 {
            // strictly slack everywhere
            CapAssignment::new(BitString::all_up_to(dx).map(|s| (s.clone(), v.measure(&s) + ratio(1, 16))).collect())
        } else {
            Ok(gen::random_caps(&mut r, dx))
        }
        .map_err(|e| e.to_string())?;
        let t = levin_truncate(&v, &caps).map_err(|e| e.to_string())?;
        ensure(levin_validate(&t).passed(), || format!("case {case}: truncated system invalid"))?;
        for s in BitString::all_up_to(dx) {
            let cap = caps.get(&s).unwrap();
            ensure(covers(&t.set(&s), &v.set(&s)), || format!("case {case}: Ṽ_{s} ⊄ V_{s}"))?;
            ensure(t.measure(&s) <= *cap, || format!("case {case}: μ(Ṽ_{s}) above cap"))?;
            if s.prefixes().all(|p| v.measure(&p) < *caps.get(&p).unwrap()) {
                strictly_slack_seen += 1;
                ensure(covers(&v.set(&s), &t.set(&s)), || format!("case {case}: Ṽ_{s} ≠ V_{s} under slack caps"))?;
            }
        }
        let w = WeightFunction::length(dx);
        for i in 0..4 {
            let m = levin_measure_test(&v, &w, i).map_err(|e| format!("case {case}: {e}"))?;
            let expect: CylinderSet = BitString::all_up_to(dx)
                .filter(|s| v.measure(s) > pow2(i) * pow2(-(s.len() as i64)))
                .collect();
            ensure(m.set == expect, || format!("case {case}: measure test set differs"))?;
            let fam = TestFamily::new([(i as u32, m.set)].into_iter().collect());
            ensure(test_family_audit(&fam, &w, true).unwrap().all_pass(), || format!("case {case}: strong audit fails"))?;
        }
        let c = (0..=8)
            .find(|&c| BitString::all_up_to(dx).all(|s| t.measure(&s) <= pow2(c - s.len() as i64)))
            .unwrap();
        let a = gen::random_set(&mut r, dx, 6);
        let p = levin_pushforward_bound(&t, &a, &w, c).map_err(|e| e.to_string())?;
        ensure(p.sum_identity() && p.holds(), || format!("case {case}: pushforward bound fails {p:?}"))?;
    }
    ensure(strictly_slack_seen > 0, || "no strictly slack index exercised".into())
}

fn semimeasures() -> Outcome {
    let sigmas: Vec<BitString> = BitString::all_up_to(4).collect();
    let weights = {
        let mut r = rng(707);
        vec![
            WeightFunction::length(5),
            gen::random_rational_weights(&mut r, 5),
            gen::random_convex_weights(&mut r, 5),
        ]
    };
    // every single-level family over strings of length ≤ 2, checked against a
    // subset-enumeration pwt
    let small: Vec<BitString> = BitString::all_up_to(2).collect();
    for mask in 0..(1u64 << small.len()) {
        let a = set_from_mask(&small, mask);
        for w in &weights {
            for s in &sigmas {
                let m = |x: &BitString| pwt_by_subsets(&a.extending(x), w);
                let [c0, c1] = s.children();
                ensure(m(s) >= m(&c0) + m(&c1), || format!("superadditivity fails at {s}"))?;
                let fam = TestFamily::new([(1, a.clone())].into_iter().collect());
                let rep = semimeasure_from_family(&fam, w, s).map_err(|e| e.to_string())?;
                ensure(rep.per_index[&1] == m(s) && rep.superadditive, || format!("library m differs at {s}"))?;
            }
        }
    }
    // random multi-level families; every audited one has mixture(e) ≤ 1
    let mut r = rng(708);
    let w = WeightFunction::length(5);
    let mut audited = 0;
    for k in 0..300 {
        let mut levels = BTreeMap::new();
        for i in 1..=5u32 {
            let a = if k % 2 == 0 {
                gen::random_set(&mut r, 5, 3 + i as usize)
            } else {
                // at most 2^(5-i) strings of length 5, so pwt ≤ 2^-i
                let n = r.gen_range(0..=1usize << (5 - i));
                (0..n).map(|_| BitString::from_bits((0..5).map(|_| r.gen()).collect())).collect()
            };
            levels.insert(i, a);
        }
        let fam = TestFamily::new(levels);
        for s in &sigmas {
            let rep = semimeasure_from_family(&fam, &w, s).map_err(|e| e.to_string())?;
            ensure(rep.superadditive, || format!("superadditivity fails at {s}"))?;
            if rep.audited {
                ensure(rep.mixture_root <= int(1), || format!("mixture at root {} > 1", rep.mixture_root))?;
            }
        }
        if test_family_audit(&fam, &w, true).unwrap().all_pass() {
            audited += 1;
        }
    }
    ensure(audited > 0, || "no audited family generated".into())
}

fn dnr_sweep() -> Outcome {
    let rep = exhaustive_sweep(2, 3, 2).map_err(|e| e.to_string())?;
    // Σ_d Σ_N Σ_Q 4^{N|Q|}
    let mut expected = 0u64;
    for d in 0..=2u32 {
        let leaves = 1u64 << d;
        for k in 1..=leaves {
            let classes = binomial(leaves, k);
            for n in 0..=3u32 {
                expected += classes * 4u64.pow(n * k as u32);
            }
        }
    }
    ensure(rep.instances == expected, || format!("{} instances, expected {expected}", rep.instances))?;
    ensure(rep.failures == 0, || format!("{} failures, first {:?}", rep.failures, rep.first_failure))
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn estimator_tests() -> Outcome {
    let est = ComplexityEstimator::builtin(14);
    let audit = kraft_audit(&est, 14).map_err(|e| e.to_string())?;
    ensure(audit.admissible, || format!("built-in Kraft sum {} > 1", audit.sum))?;
    let w = WeightFunction::length(14);
    let mut prev: Option<CylinderSet> = None;
    for i in 0..=12 {
        let lvl = universal_test_generate(&est, &w, i, 14).map_err(|e| e.to_string())?;
        ensure(lvl.dwt <= pow2(-i), || format!("dwt(S_{i}) = {} > 2^-{i}", lvl.dwt))?;
        if let Some(p) = &prev {
            ensure(lvl.set.iter().all(|s| p.contains(s)), || format!("S_{i} ⊄ S_{}", i - 1))?;
        }
        prev = Some(lvl.set);
    }
    let periodic = ComplexityEstimator::code_family(64, &[SubCode::Periodic]);
    let w64 = WeightFunction::length(64);
    let zeros = BitString::zeros(64);
    for i in 0..=10 {
        ensure(in_universal_test(&periodic, &w64, i, &zeros).unwrap(), || format!("0^64 ∉ S_{i}"))?;
    }
    Ok(())
}

fn transform_posts() -> Outcome {
    for q in 1..=12i64 {
        for p in -36..=72i64 {
            for len in 0..=6usize {
                let f = ratio(p, q);
                let cap = int(2 * len as i64);
                let f0 = if f < int(0) { int(0) } else if f > cap { cap } else { f.clone() };
                let k = integer_normalize(&f, len);
                ensure(f0 < int(k) && int(k) < &f0 + int(2), || format!("f = {p}/{q}, len {len} → {k}"))?;
            }
        }
    }
    let mut r = rng(1010);
    for case in 0..1000 {
        let depth = r.gen_range(0..=5);
        let w = gen::random_exponent_weights(&mut r, depth, 7);
        let a = gen::random_set(&mut r, depth, 10);
        let pf = increasing_pushforward(&a, &w).map_err(|e| e.to_string())?;
        let f = |s: &BitString| w.exponent(s).unwrap();
        for s in &pf.set {
            let increasing = (0..s.len()).all(|n| f(&s.prefix(n)) < f(s));
            ensure(increasing, || format!("case {case}: {s} not in the increasing set"))?;
        }
        ensure(covers(&a, &pf.set), || format!("case {case}: pushforward does not cover A"))?;
        ensure(dwt(&pf.set, &w).unwrap() <= dwt(&a, &w).unwrap(), || format!("case {case}: dwt grew"))?;
        ensure(pwt(&pf.set, &w).unwrap().value <= pwt(&a, &w).unwrap().value, || format!("case {case}: pwt grew"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("weight chain vwt ≤ dwt(Â) ≤ pwt", chain_law, 10),
        ("convex vwt exactness", convex_exactness, 60),
        ("good-cover induction", good_cover_induction, 120),
        ("Kraft–Chaitin assignment and mass identity", kraft_chaitin, 10),
        ("weight-inflation bound", inflation_bound, 10),
        ("Levin systems, truncation, measure tests", levin_suite, 60),
        ("semimeasure extraction", semimeasures, 10),
        ("DNR propagation exhaustive sweep", dnr_sweep, 120),
        ("estimator admissibility and universal tests", estimator_tests, 30),
        ("normalization and pushforward posts", transform_posts, 10),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            ensure(elapsed <= Duration::from_secs(*budget), || {
                format!("took {:.1}s, budget {budget}s", elapsed.as_secs_f64())
            })
        });
        match outcome {
            Ok(()) => println!("criterion {:>2} {name}: PASS ({:.2}s / {budget}s)", i + 1, elapsed.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({:.2}s / {budget}s): {msg}", i + 1, elapsed.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
