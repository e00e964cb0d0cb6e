//! Plain-text file formats. Every format is line based; `#` starts a comment and
//! blank lines are ignored. Bit strings are written over {0,1} with `e` for the
//! empty string, rationals as `<num>/<den>`.

use std::collections::BTreeMap;

use crate::bits::BitString;
use crate::codes::{CodeRequest, ComplexityEstimator, TestFamily};
use crate::cylinder::CylinderSet;
use crate::dnrsim::{FinitePiClass, OracleTable};
use crate::error::{Error, Result};
use crate::levin::{CapAssignment, FiniteLevinSystem, MonotoneFunctionalTable};
use crate::rational::{exponent_of, parse as parse_rational, pow2, render, Rational};
use crate::transforms::TreeFamily;
use crate::weight::{WeightFunction, WeightMode};

/// Default depth for the length-scaled family when the file gives none.
pub const DEFAULT_FAMILY_DEPTH: usize = 64;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Re-tags a token-level parse error with its line number.
fn at<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { msg, .. } => Error::Parse { line, msg },
        other => other,
    })
}

fn bits(line: usize, token: &str) -> Result<BitString> {
    at(line, token.parse())
}

fn natural(line: usize, token: &str) -> Result<u64> {
    token
        .parse()
        .map_err(|_| err(line, format!("expected a natural number, got {token:?}")))
}

fn fields<const N: usize>(line: usize, text: &str) -> Result<[&str; N]> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    parts
        .try_into()
        .map_err(|p: Vec<&str>| err(line, format!("expected {N} fields, found {}", p.len())))
}

/// One string per line.
pub fn parse_cylinder_set(text: &str) -> Result<CylinderSet> {
    parse_stream(text).map(|v| v.into_iter().collect())
}

/// One string per line, order and repetitions kept.
pub fn parse_stream(text: &str) -> Result<Vec<BitString>> {
    content_lines(text)
        .map(|(n, line)| {
            let [tok] = fields::<1>(n, line)?;
            bits(n, tok)
        })
        .collect()
}

pub fn render_cylinder_set(a: &CylinderSet) -> String {
    a.iter().map(|s| format!("{s}\n")).collect()
}

/// A weight value: `e<k>` for 2^-k, otherwise a rational.
fn weight_value(line: usize, token: &str) -> Result<Rational> {
    match token.strip_prefix('e') {
        Some(k) => {
            let k: i64 = k
                .parse()
                .map_err(|_| err(line, format!("invalid exponent in {token:?}")))?;
            Ok(pow2(-k))
        }
        None => at(line, parse_rational(token)),
    }
}

/// Weight file:
///
/// ```text
/// mode: integer-exponent | rational-table | length-scaled s=<num>/<den>
/// depth: <n>            # optional
/// <bits> <num>/<den>    # or <bits> e<k>; table modes only
/// ```
///
/// Table modes must list every string up to the depth, which defaults to the
/// longest listed string.
pub fn parse_weights(text: &str) -> Result<WeightFunction> {
    let mut lines = content_lines(text);
    let (n, header) = lines.next().ok_or_else(|| err(1, "missing `mode:` header"))?;
    let mode_spec = header
        .strip_prefix("mode:")
        .ok_or_else(|| err(n, "first line must be `mode: ...`"))?
        .trim();
    let mut depth = None;
    let mut entries = Vec::new();
    for (n, line) in lines {
        if let Some(d) = line.strip_prefix("depth:") {
            if depth.is_some() || !entries.is_empty() {
                return Err(err(n, "`depth:` must directly follow the mode line"));
            }
            depth = Some(natural(n, d.trim())? as usize);
            continue;
        }
        let [s, v] = fields::<2>(n, line)?;
        entries.push((n, bits(n, s)?, weight_value(n, v)?));
    }
    let mut mode_parts = mode_spec.split_whitespace();
    match mode_parts.next() {
        Some("length-scaled") => {
            if !entries.is_empty() {
                return Err(err(entries[0].0, "length-scaled weights take no table"));
            }
            let s = match mode_parts.next().and_then(|p| p.strip_prefix("s=")) {
                Some(s) => at(n, parse_rational(s))?,
                None => return Err(err(n, "length-scaled needs `s=<num>/<den>`")),
            };
            WeightFunction::length_scaled(s, depth.unwrap_or(DEFAULT_FAMILY_DEPTH))
        }
        Some(kind @ ("integer-exponent" | "rational-table")) => {
            if let Some(extra) = mode_parts.next() {
                return Err(err(n, format!("unexpected {extra:?} after mode")));
            }
            let depth = depth.unwrap_or_else(|| entries.iter().map(|(_, s, _)| s.len()).max().unwrap_or(0));
            if depth >= 28 {
                return Err(Error::TooLarge(format!("weight table of depth {depth}")));
            }
            let mut seen = BTreeMap::new();
            for (n, s, v) in &entries {
                if s.len() > depth {
                    return Err(err(*n, format!("{s} is deeper than depth {depth}")));
                }
                if seen.insert(s.clone(), v.clone()).is_some() {
                    return Err(err(*n, format!("duplicate entry for {s}")));
                }
            }
            if kind == "rational-table" {
                return WeightFunction::from_table(depth, &seen);
            }
            let mut exps = BTreeMap::new();
            for (n, s, v) in &entries {
                let k = exponent_of(v)
                    .ok_or_else(|| err(*n, format!("{} is not a power of two", render(v))))?;
                exps.insert(s.clone(), k);
            }
            WeightFunction::from_exponents(depth, &exps)
        }
        other => Err(err(n, format!("unknown weight mode {other:?}"))),
    }
}

/// Renders a table-mode weight function; the family mode is rendered by its
/// parameter.
pub fn render_weights(w: &WeightFunction) -> Result<String> {
    let mut out = String::new();
    match w.mode() {
        WeightMode::BuiltinFamily => {
            let s = w.length_scale().expect("family mode has a scale");
            out.push_str(&format!("mode: length-scaled s={}\ndepth: {}\n", render(s), w.depth()));
        }
        mode => {
            out.push_str(&format!("mode: {mode}\ndepth: {}\n", w.depth()));
            for s in BitString::all_up_to(w.depth()) {
                if mode == WeightMode::IntegerExponent {
                    out.push_str(&format!("{s} e{}\n", w.exponent(&s)?));
                } else {
                    out.push_str(&format!("{s} {}\n", render(&w.weight(&s)?)));
                }
            }
        }
    }
    Ok(out)
}

/// Sections `[<keyword> <label>]` followed by member strings.
fn sections<'a>(text: &'a str, keyword: &str) -> Result<Vec<(usize, &'a str, CylinderSet)>> {
    let mut out: Vec<(usize, &str, CylinderSet)> = Vec::new();
    for (n, line) in content_lines(text) {
        if let Some(inner) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let label = inner
                .trim()
                .strip_prefix(keyword)
                .ok_or_else(|| err(n, format!("expected `[{keyword} ...]`")))?
                .trim();
            out.push((n, label, CylinderSet::new()));
        } else {
            let s = bits(n, fields::<1>(n, line)?[0])?;
            match out.last_mut() {
                Some((_, _, set)) => {
                    set.insert(s);
                }
                None => return Err(err(n, format!("string before the first `[{keyword} ...]`"))),
            }
        }
    }
    Ok(out)
}

/// Sections `[tree 1]`, `[tree 2]`, ... in order.
pub fn parse_tree_family(text: &str) -> Result<TreeFamily> {
    let mut trees = Vec::new();
    for (i, (n, label, set)) in sections(text, "tree")?.into_iter().enumerate() {
        if natural(n, label)? != i as u64 + 1 {
            return Err(err(n, format!("expected `[tree {}]`", i + 1)));
        }
        trees.push(set);
    }
    TreeFamily::new(trees)
}

/// Sections `[test i=<n>]`.
pub fn parse_test_family(text: &str) -> Result<TestFamily> {
    let mut levels = BTreeMap::new();
    for (n, label, set) in sections(text, "test")? {
        let i = label
            .strip_prefix("i=")
            .ok_or_else(|| err(n, "expected `[test i=<n>]`"))?;
        let i = u32::try_from(natural(n, i)?).map_err(|_| err(n, "index too large"))?;
        if levels.insert(i, set).is_some() {
            return Err(err(n, format!("duplicate test index {i}")));
        }
    }
    Ok(TestFamily::new(levels))
}

pub fn render_test_family(fam: &TestFamily) -> String {
    let mut out = String::new();
    for (i, a) in &fam.levels {
        out.push_str(&format!("[test i={i}]\n"));
        out.push_str(&render_cylinder_set(a));
    }
    out
}

/// Lines `<label> <length>`.
pub fn parse_requests(text: &str) -> Result<Vec<CodeRequest>> {
    content_lines(text)
        .map(|(n, line)| {
            let [label, len] = fields::<2>(n, line)?;
            Ok(CodeRequest::new(label, natural(n, len)? as usize))
        })
        .collect()
}

/// Lines `<bits> <nat>`; strings without a line have no description. The
/// domain length defaults to the longest listed string.
pub fn parse_estimator_table(text: &str, domain_len: Option<usize>) -> Result<ComplexityEstimator> {
    let mut table = BTreeMap::new();
    for (n, line) in content_lines(text) {
        let [s, k] = fields::<2>(n, line)?;
        let s = bits(n, s)?;
        if table.insert(s.clone(), natural(n, k)?).is_some() {
            return Err(err(n, format!("duplicate entry for {s}")));
        }
    }
    let longest = table.keys().map(BitString::len).max().unwrap_or(0);
    Ok(ComplexityEstimator::table(domain_len.unwrap_or(longest), table))
}

/// Lines `<Ybits> -> <Xbits>`. Depths default to the longest input and output.
pub fn parse_functional(
    text: &str,
    input_depth: Option<usize>,
    output_depth: Option<usize>,
) -> Result<MonotoneFunctionalTable> {
    let mut map = BTreeMap::new();
    for (n, line) in content_lines(text) {
        let (y, x) = line
            .split_once("->")
            .ok_or_else(|| err(n, "expected `<Ybits> -> <Xbits>`"))?;
        let (y, x) = (bits(n, y.trim())?, bits(n, x.trim())?);
        if map.insert(y.clone(), x).is_some() {
            return Err(err(n, format!("{y} is mapped twice")));
        }
    }
    let dy = input_depth.unwrap_or_else(|| map.keys().map(BitString::len).max().unwrap_or(0));
    let dx = output_depth.unwrap_or_else(|| map.values().map(BitString::len).max().unwrap_or(0));
    MonotoneFunctionalTable::new(dy, dx, map)
}

/// Lines `<bits> <num>/<den>`.
pub fn parse_caps(text: &str) -> Result<CapAssignment> {
    let mut caps = BTreeMap::new();
    for (n, line) in content_lines(text) {
        let [s, r] = fields::<2>(n, line)?;
        let s = bits(n, s)?;
        if caps.insert(s.clone(), at(n, parse_rational(r))?).is_some() {
            return Err(err(n, format!("duplicate cap for {s}")));
        }
    }
    CapAssignment::new(caps)
}

/// Levin system file:
///
/// ```text
/// depth: <n>
/// [set <bits>]
/// <bits>              # or <bits> @<timestamp>
/// ```
pub fn parse_levin_system(text: &str) -> Result<FiniteLevinSystem> {
    let mut lines = content_lines(text).peekable();
    let depth = match lines.peek() {
        Some(&(n, l)) if l.starts_with("depth:") => {
            lines.next();
            Some(natural(n, l["depth:".len()..].trim())? as usize)
        }
        _ => None,
    };
    let mut sets: BTreeMap<BitString, CylinderSet> = BTreeMap::new();
    let mut stamps = BTreeMap::new();
    let mut current: Option<BitString> = None;
    for (n, line) in lines {
        if let Some(inner) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let idx = inner
                .trim()
                .strip_prefix("set")
                .ok_or_else(|| err(n, "expected `[set <bits>]`"))?;
            let idx = bits(n, idx.trim())?;
            if sets.insert(idx.clone(), CylinderSet::new()).is_some() {
                return Err(err(n, format!("duplicate section for {idx}")));
            }
            current = Some(idx);
            continue;
        }
        let idx = current
            .as_ref()
            .ok_or_else(|| err(n, "string before the first `[set ...]`"))?;
        let mut parts = line.split_whitespace();
        let s = bits(n, parts.next().unwrap_or(""))?;
        if let Some(stamp) = parts.next() {
            let t = stamp
                .strip_prefix('@')
                .ok_or_else(|| err(n, "timestamp must be written `@<n>`"))?;
            let t = natural(n, t)?;
            if stamps.insert(s.clone(), t).is_some_and(|old| old != t) {
                return Err(err(n, format!("conflicting timestamps for {s}")));
            }
        }
        if parts.next().is_some() {
            return Err(err(n, "trailing fields"));
        }
        sets.get_mut(idx).expect("section exists").insert(s);
    }
    let depth = depth.unwrap_or_else(|| sets.keys().map(BitString::len).max().unwrap_or(0));
    FiniteLevinSystem::from_sets(depth, sets, stamps)
}

pub fn render_levin_system(v: &FiniteLevinSystem) -> String {
    let mut out = format!("depth: {}\n", v.depth());
    for (s, set) in v.entries() {
        out.push_str(&format!("[set {s}]\n"));
        for c in set.iter() {
            match v.stamps().get(c) {
                Some(t) => out.push_str(&format!("{c} @{t}\n")),
                None => out.push_str(&format!("{c}\n")),
            }
        }
    }
    out
}

/// Leaf strings, one per line; all must share a length.
pub fn parse_class(text: &str) -> Result<FinitePiClass> {
    let leaves = parse_stream(text)?;
    let depth = leaves.first().map(BitString::len).unwrap_or(0);
    FinitePiClass::new(depth, leaves)
}

/// Lines `<n> <leaf> <value|undef>`; absent entries diverge.
pub fn parse_oracle_table(text: &str, q: &FinitePiClass, indices: usize) -> Result<OracleTable> {
    let mut entries = BTreeMap::new();
    for (n, line) in content_lines(text) {
        let [i, leaf, v] = fields::<3>(n, line)?;
        let i = natural(n, i)? as usize;
        let leaf = bits(n, leaf)?;
        let v = match v {
            "undef" => None,
            v => Some(natural(n, v)?),
        };
        if entries.insert((i, leaf.clone()), v).is_some() {
            return Err(err(n, format!("duplicate entry for ({i}, {leaf})")));
        }
    }
    OracleTable::from_entries(q, indices, &entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bs;
    use crate::cylinder::set;
    use crate::rational::ratio;

    #[test]
    fn cylinder_sets() {
        let a = parse_cylinder_set("# comment\n0\n\n00 # inline\ne\n00\n").unwrap();
        assert_eq!(a, set(&["e", "0", "00"]));
        assert_eq!(render_cylinder_set(&a), "e\n0\n00\n");
        assert_eq!(
            parse_cylinder_set("0\n012\n"),
            Err(Error::Parse {
                line: 2,
                msg: "invalid bit '2' in \"012\"".into()
            })
        );
    }

    #[test]
    fn weight_files() {
        let w = parse_weights("mode: integer-exponent\ne e0\n0 e1\n1 1/2\n").unwrap();
        assert_eq!(w.depth(), 1);
        assert_eq!(w.exponent(&bs("1")).unwrap(), 1);
        assert_eq!(parse_weights(&render_weights(&w).unwrap()).unwrap().weight(&bs("0")).unwrap(), ratio(1, 2));

        let w = parse_weights("mode: rational-table\ne 1\n0 1/3\n1 e2\n").unwrap();
        assert_eq!(w.weight(&bs("0")).unwrap(), ratio(1, 3));
        assert!(matches!(w.exponent(&bs("0")), Err(Error::NotIntegerExponent(_))));

        let w = parse_weights("mode: length-scaled s=1/2\ndepth: 10\n").unwrap();
        assert_eq!((w.depth(), w.exponent(&bs("011")).unwrap()), (10, 2));
        assert_eq!(parse_weights("mode: length-scaled s=1/1\n").unwrap().depth(), DEFAULT_FAMILY_DEPTH);

        assert!(matches!(parse_weights("mode: integer-exponent\ne 1/3\n"), Err(Error::Parse { line: 2, .. })));
        assert_eq!(
            parse_weights("mode: rational-table\ne 1\n0 1/2\n").err(),
            Some(Error::MissingWeight(bs("1")))
        );
        assert!(matches!(parse_weights("mode: rational-table\ne\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_weights("mode: fancy\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn families_and_requests() {
        let f = parse_test_family("[test i=1]\n00\n01\n[test i=3]\n[test i=2]\n0\n").unwrap();
        assert_eq!(f.get(1), Some(&set(&["00", "01"])));
        assert_eq!(f.get(3), Some(&CylinderSet::new()));
        assert_eq!(parse_test_family(&render_test_family(&f)).unwrap(), f);
        assert!(parse_test_family("0\n").is_err());

        let t = parse_tree_family("[tree 1]\ne\n0\n[tree 2]\ne\n").unwrap();
        assert_eq!(t.len(), 2);
        assert!(parse_tree_family("[tree 2]\ne\n").is_err());

        let r = parse_requests("a 1\nb 2\n").unwrap();
        assert_eq!(r, vec![CodeRequest::new("a", 1), CodeRequest::new("b", 2)]);
        assert!(parse_requests("a -1\n").is_err());

        let est = parse_estimator_table("00 1\n0 4\n", None).unwrap();
        assert_eq!(est.domain_len, 2);
        assert_eq!(est.estimate(&bs("00")).unwrap(), Some(1));
        assert_eq!(est.estimate(&bs("1")).unwrap(), None);
    }

    #[test]
    fn levin_files() {
        let phi = parse_functional("e -> e\n0 -> 0\n01 -> 01\n", None, None).unwrap();
        assert_eq!((phi.input_depth(), phi.output_depth()), (2, 2));
        assert!(matches!(
            parse_functional("0 -> 1\n01 -> 0\n", None, None),
            Err(Error::NotMonotone(_, _))
        ));
        let caps = parse_caps("e 1/4\n0 1\n").unwrap();
        assert_eq!(caps.get(&bs("e")), Some(&ratio(1, 4)));
        assert!(parse_caps("e 0\n").is_err());

        let v = parse_levin_system("depth: 1\n[set e]\n00 @3\n01\n[set 0]\n00\n").unwrap();
        assert_eq!(v.stamp(&bs("00")), 3);
        assert_eq!(v.set(&bs("0")), set(&["00"]));
        assert_eq!(parse_levin_system(&render_levin_system(&v)).unwrap(), v);
    }

    #[test]
    fn dnr_files() {
        let q = parse_class("00\n11\n").unwrap();
        assert_eq!(q.len(), 2);
        assert!(parse_class("00\n1\n").is_err());
        let t = parse_oracle_table("0 00 5\n0 11 undef\n1 11 2\n", &q, 2).unwrap();
        assert_eq!((t.value(0, 0), t.value(0, 1), t.value(1, 0), t.value(1, 1)), (Some(5), None, None, Some(2)));
        assert!(parse_oracle_table("0 01 5\n", &q, 1).is_err());
        assert!(parse_oracle_table("3 00 5\n", &q, 1).is_err());
    }
}
