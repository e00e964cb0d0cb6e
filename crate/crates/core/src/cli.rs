//! Command-line front end. Exit codes: 0 success, 1 a checked property failed,
//! 2 bad input, usage, or unmet precondition.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::bits::BitString;
use crate::codes::{
    deficiency_profile, kraft_chaitin_assign, requests_from_family, semimeasure_from_family,
    test_family_audit, universal_test_generate, ComplexityEstimator,
};
use crate::cylinder::{covers, CylinderSet};
use crate::dnrsim::{exhaustive_sweep, run_propagation, verify_witness};
use crate::error::{Error, Result};
use crate::goodcover::{cover_trace, verify_good_cover};
use crate::io;
use crate::levin::{
    levin_from_functional, levin_measure_test, levin_pushforward_bound, levin_truncate,
    levin_validate, FiniteLevinSystem,
};
use crate::rational::{parse as parse_rational, render, Rational};
use crate::selftest::{run_all, Scale};
use crate::transforms::{
    convex_rationalize, fg_bound_check, increasing_pushforward, integer_normalize,
    integer_normalize_bounds, sigma02_weight, Band, HFunction, LengthPowerOracle,
    RationalizeOptions,
};
use crate::weight::WeightFunction;
use crate::weights::{dwt, is_convex, pwt, vwt_bruteforce, vwt_convex, vwt_depth_bounded, WeightReport};

#[derive(Parser, Debug)]
#[command(name = "fweight", version, about = "Exact weights of finite string sets and related constructions")]
struct Cli {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Direct, prefix-free and vehement weights
    #[command(subcommand)]
    Weights(WeightsCmd),
    /// Weight and test-set transformations
    #[command(subcommand)]
    Transform(TransformCmd),
    /// Good covers for convex weights
    #[command(subcommand)]
    Cover(CoverCmd),
    /// Kraft–Chaitin code assignment
    #[command(subcommand)]
    Kc(KcCmd),
    /// Universal tests and test-family audits
    #[command(subcommand)]
    Tests(TestsCmd),
    /// Deficiency profile f(X↾n) - K̂(X↾n)
    Deficiency(DeficiencyArgs),
    /// Semimeasures extracted from a test family
    Semimeasure(SemimeasureArgs),
    /// Finite Levin systems
    #[command(subcommand)]
    Levin(LevinCmd),
    /// DNR propagation through a finite class
    #[command(subcommand)]
    Dnr(DnrCmd),
    /// Run the bundled property suites
    Selftest {
        #[arg(value_enum, default_value_t = ScaleArg::Small)]
        scale: ScaleArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScaleArg {
    Small,
    Full,
}

#[derive(Args, Debug)]
struct SetWeights {
    #[arg(long)]
    set: PathBuf,
    #[arg(long)]
    weights: PathBuf,
}

#[derive(Subcommand, Debug)]
enum WeightsCmd {
    Dwt(SetWeights),
    Pwt(SetWeights),
    Vwt {
        #[command(flatten)]
        io: SetWeights,
        /// `convex`, `bounded <k>` or `brute <b>`
        #[arg(long, num_args = 1..=2, value_names = ["MODE", "BOUND"], default_values_t = ["convex".to_string()])]
        mode: Vec<String>,
    },
}

#[derive(Subcommand, Debug)]
enum TransformCmd {
    /// Integer exponent ⌊f0⌋+1 for a rational f (or an interval for it)
    IntNormalize {
        #[arg(long, conflicts_with_all = ["lo", "hi"])]
        value: Option<String>,
        #[arg(long, requires = "hi")]
        lo: Option<String>,
        #[arg(long, requires = "lo")]
        hi: Option<String>,
        /// |σ|, which caps f at 2|σ|
        #[arg(long)]
        len: usize,
    },
    /// Push a test set into the increasing set of f
    Pushforward(SetWeights),
    /// Bound dwt_g(A) ≤ 2^c·pwt_f(A) for g = f + h∘f
    FgCheck {
        #[command(flatten)]
        io: SetWeights,
        /// `identity` or `log=<num>/<den>`
        #[arg(long, default_value = "identity", conflicts_with = "h_table")]
        h: String,
        /// file of lines `<n> <h(n)>`
        #[arg(long)]
        h_table: Option<PathBuf>,
        #[arg(short = 'c', long, default_value_t = 0)]
        c: i64,
    },
    /// Integer weight from a sequence of trees
    Sigma02 {
        #[arg(long)]
        trees: PathBuf,
        #[arg(long)]
        depth: usize,
    },
    /// Convex rational table below w = 2^(-s|σ|)
    Rationalize {
        #[arg(long)]
        scale: String,
        /// f < f̄ < f + ε
        #[arg(long, conflicts_with = "factor")]
        eps: Option<String>,
        /// λ·w < w̄ < w
        #[arg(long)]
        factor: Option<String>,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = RationalizeOptions::default().floor_bits)]
        floor_bits: u32,
    },
}

#[derive(Subcommand, Debug)]
enum CoverCmd {
    Build {
        #[arg(long)]
        stream: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        verify: bool,
        /// print the accepted set after every step
        #[arg(long)]
        trace: bool,
    },
    Verify {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        /// extra levels for the brute-force oracle when w is not convex
        #[arg(long, default_value_t = 2)]
        brute: usize,
    },
}

#[derive(Subcommand, Debug)]
enum KcCmd {
    Assign {
        #[arg(long)]
        requests: PathBuf,
    },
    /// Requests (τ, f(τ) - i + c) for τ ∈ A_2i, then assign
    Family {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        weights: PathBuf,
    },
}

#[derive(Args, Debug)]
struct EstimatorArgs {
    /// table file of lines `<bits> <nat>`
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    estimator: Option<PathBuf>,
    /// literal, run-length and periodic codes
    #[arg(long)]
    builtin: bool,
}

#[derive(Subcommand, Debug)]
enum TestsCmd {
    Gen {
        #[arg(long)]
        weights: PathBuf,
        #[command(flatten)]
        est: EstimatorArgs,
        #[arg(short = 'i', long)]
        level: i64,
        #[arg(short = 'L', long = "len")]
        len: usize,
    },
    Audit {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        strong: bool,
    },
}

#[derive(Args, Debug)]
struct DeficiencyArgs {
    #[arg(long)]
    bits: String,
    #[arg(long)]
    weights: PathBuf,
    #[command(flatten)]
    est: EstimatorArgs,
}

#[derive(Args, Debug)]
struct SemimeasureArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    weights: PathBuf,
    #[arg(long, default_value = "e")]
    sigma: String,
}

#[derive(Args, Debug)]
struct SystemSource {
    /// Levin system file
    #[arg(long, conflicts_with = "functional", required_unless_present = "functional")]
    system: Option<PathBuf>,
    /// functional file; the system is built from it
    #[arg(long)]
    functional: Option<PathBuf>,
    #[arg(long)]
    output_depth: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum LevinCmd {
    Build {
        #[arg(long)]
        functional: PathBuf,
        #[arg(long)]
        input_depth: Option<usize>,
        #[arg(long)]
        output_depth: Option<usize>,
    },
    Validate(SystemSource),
    Truncate {
        #[command(flatten)]
        src: SystemSource,
        #[arg(long)]
        caps: PathBuf,
    },
    Test {
        #[command(flatten)]
        src: SystemSource,
        #[arg(long)]
        weights: PathBuf,
        #[arg(short = 'i', long)]
        level: i64,
    },
    Push {
        #[command(flatten)]
        src: SystemSource,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(short = 'c', long, default_value_t = 0)]
        c: i64,
    },
}

#[derive(Subcommand, Debug)]
enum DnrCmd {
    Simulate {
        #[arg(long, required_unless_present = "exhaustive")]
        class: Option<PathBuf>,
        #[arg(long, required_unless_present = "exhaustive")]
        table: Option<PathBuf>,
        #[arg(short = 'N', required_unless_present = "exhaustive")]
        n: Option<usize>,
        /// sweep every instance up to depth d, N indices, values ≤ vmax
        #[arg(long, num_args = 3, value_names = ["D", "N", "VMAX"], conflicts_with_all = ["class", "table", "n"])]
        exhaustive: Option<Vec<u64>>,
    },
}

/// Result lines and checked properties of one command.
#[derive(Debug, Default)]
struct Report {
    command: String,
    fields: Vec<(String, Value)>,
    checks: Vec<(String, bool)>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            ..Default::default()
        }
    }

    fn put(&mut self, key: &str, value: impl ToString) {
        self.fields.push((key.to_string(), Value::String(value.to_string())));
    }

    fn rational(&mut self, key: &str, value: &Rational) {
        self.put(key, render(value));
    }

    fn list<T: ToString>(&mut self, key: &str, items: impl IntoIterator<Item = T>) {
        let items = items.into_iter().map(|x| Value::String(x.to_string())).collect();
        self.fields.push((key.to_string(), Value::Array(items)));
    }

    fn set(&mut self, key: &str, a: &CylinderSet) {
        self.list(key, a.iter());
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.checks.push((name.to_string(), ok));
    }

    fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    fn text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            match v {
                Value::Array(items) => {
                    for x in items {
                        out.push_str(&format!("{k} {}\n", x.as_str().unwrap_or_default()));
                    }
                }
                Value::String(s) if s.contains('\n') => {
                    out.push_str(s);
                    if !s.ends_with('\n') {
                        out.push('\n');
                    }
                }
                Value::String(s) => out.push_str(&format!("{k} {s}\n")),
                other => out.push_str(&format!("{k} {other}\n")),
            }
        }
        for (name, ok) in &self.checks {
            out.push_str(&format!("check {name} {}\n", if *ok { "pass" } else { "fail" }));
        }
        out
    }

    fn json(&self) -> String {
        let mut results = Map::new();
        for (k, v) in &self.fields {
            match results.get_mut(k) {
                Some(Value::Array(existing)) => existing.push(v.clone()),
                Some(_) => unreachable!("keys are unique per report"),
                None => {
                    results.insert(k.clone(), v.clone());
                }
            }
        }
        let checks: Map<String, Value> = self
            .checks
            .iter()
            .map(|(k, ok)| (k.clone(), Value::Bool(*ok)))
            .collect();
        let doc = json!({
            "command": self.command,
            "results": results,
            "checks": checks,
            "passed": self.passed(),
        });
        format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable"))
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Precondition(format!("cannot read {}: {e}", path.display())))
}

/// Parses a file, prefixing errors with its path.
fn load<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T>) -> Result<T> {
    parse(&read(path)?).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

fn rational_arg(s: &str) -> Result<Rational> {
    parse_rational(s)
}

fn bits_arg(s: &str) -> Result<BitString> {
    s.parse()
}

fn put_weight_report(r: &mut Report, w: &WeightReport) {
    r.rational("value", &w.value);
    r.put("method", w.method);
    if let Some(d) = w.depth_bound {
        r.put("depth-bound", d);
    }
    r.list("witness", w.witness.iter());
}

fn estimator(args: &EstimatorArgs, len: usize) -> Result<ComplexityEstimator> {
    match &args.estimator {
        Some(p) => load(p, |t| io::parse_estimator_table(t, Some(len))),
        None => Ok(ComplexityEstimator::builtin(len)),
    }
}

fn system(src: &SystemSource) -> Result<FiniteLevinSystem> {
    match (&src.system, &src.functional) {
        (Some(p), _) => load(p, io::parse_levin_system),
        (None, Some(p)) => {
            let phi = load(p, |t| io::parse_functional(t, None, src.output_depth))?;
            levin_from_functional(&phi)
        }
        (None, None) => Err(Error::Precondition("need --system or --functional".into())),
    }
}

fn put_levin_checks(r: &mut Report, v: &FiniteLevinSystem, prefix: &str) {
    let report = levin_validate(v);
    r.list(
        "violation",
        report
            .violations
            .iter()
            .map(|x| format!("{} {} {}", x.property, x.at, x.other)),
    );
    r.check(&format!("{prefix}levin-properties"), report.passed());
}

fn execute(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Weights(w) => weights_cmd(w),
        Command::Transform(t) => transform_cmd(t),
        Command::Cover(c) => cover_cmd(c),
        Command::Kc(k) => kc_cmd(k),
        Command::Tests(t) => tests_cmd(t),
        Command::Deficiency(d) => deficiency_cmd(d),
        Command::Semimeasure(s) => semimeasure_cmd(s),
        Command::Levin(l) => levin_cmd(l),
        Command::Dnr(d) => dnr_cmd(d),
        Command::Selftest { scale, seed } => {
            let scale = match scale {
                ScaleArg::Small => Scale::Small,
                ScaleArg::Full => Scale::Full,
            };
            let mut r = Report::new("selftest");
            for suite in run_all(scale, *seed) {
                r.put(
                    &format!("suite-{}", suite.name),
                    format!("{}/{}", suite.checks - suite.failures, suite.checks),
                );
                if let Some(f) = &suite.first_failure {
                    r.put(&format!("failure-{}", suite.name), f);
                }
                r.check(suite.name, suite.passed());
            }
            Ok(r)
        }
    }
}

fn weights_cmd(cmd: &WeightsCmd) -> Result<Report> {
    let load_io = |io: &SetWeights| -> Result<(CylinderSet, WeightFunction)> {
        Ok((load(&io.set, io::parse_cylinder_set)?, load(&io.weights, io::parse_weights)?))
    };
    match cmd {
        WeightsCmd::Dwt(io) => {
            let (a, w) = load_io(io)?;
            let mut r = Report::new("weights dwt");
            r.rational("value", &dwt(&a, &w)?);
            Ok(r)
        }
        WeightsCmd::Pwt(io) => {
            let (a, w) = load_io(io)?;
            let mut r = Report::new("weights pwt");
            put_weight_report(&mut r, &pwt(&a, &w)?);
            Ok(r)
        }
        WeightsCmd::Vwt { io, mode } => {
            let (a, w) = load_io(io)?;
            let bound = |m: &str| -> Result<usize> {
                mode.get(1)
                    .ok_or_else(|| Error::Precondition(format!("--mode {m} needs a bound")))?
                    .parse()
                    .map_err(|_| Error::Precondition(format!("invalid bound for --mode {m}")))
            };
            let report = match mode[0].as_str() {
                "convex" if mode.len() == 1 => vwt_convex(&a, &w)?,
                "bounded" => vwt_depth_bounded(&a, &w, bound("bounded")?)?,
                "brute" => vwt_bruteforce(&a, &w, bound("brute")?)?,
                other => {
                    return Err(Error::Precondition(format!(
                        "unknown vwt mode {other:?}; use convex, bounded <k> or brute <b>"
                    )))
                }
            };
            let mut r = Report::new("weights vwt");
            put_weight_report(&mut r, &report);
            Ok(r)
        }
    }
}

fn transform_cmd(cmd: &TransformCmd) -> Result<Report> {
    match cmd {
        TransformCmd::IntNormalize { value, lo, hi, len } => {
            let k = match (value, lo, hi) {
                (Some(v), _, _) => integer_normalize(&rational_arg(v)?, *len),
                (None, Some(lo), Some(hi)) => {
                    integer_normalize_bounds(&rational_arg(lo)?, &rational_arg(hi)?, *len)?
                }
                _ => return Err(Error::Precondition("give --value or both --lo and --hi".into())),
            };
            let mut r = Report::new("transform int-normalize");
            r.put("exponent", k);
            Ok(r)
        }
        TransformCmd::Pushforward(io) => {
            let a = load(&io.set, io::parse_cylinder_set)?;
            let w = load(&io.weights, io::parse_weights)?;
            let p = increasing_pushforward(&a, &w)?;
            let mut r = Report::new("transform pushforward");
            r.set("member", &p.set);
            r.rational("dwt-before", &p.dwt_before);
            r.rational("dwt-after", &p.dwt_after);
            r.rational("pwt-before", &p.pwt_before);
            r.rational("pwt-after", &p.pwt_after);
            r.check("in-increasing-set", p.in_increasing_set);
            r.check("covers", p.covers);
            r.check("dwt-nonincreasing", p.dwt_after <= p.dwt_before);
            r.check("pwt-nonincreasing", p.pwt_after <= p.pwt_before);
            Ok(r)
        }
        TransformCmd::FgCheck { io, h, h_table, c } => {
            let a = load(&io.set, io::parse_cylinder_set)?;
            let w = load(&io.weights, io::parse_weights)?;
            let h = match h_table {
                Some(p) => HFunction::Table(load(p, parse_h_table)?),
                None if h == "identity" => HFunction::Identity,
                None => match h.strip_prefix("log=") {
                    Some(eps) => HFunction::LogScaled(rational_arg(eps)?),
                    None => return Err(Error::Precondition(format!("unknown h {h:?}"))),
                },
            };
            let f = fg_bound_check(&a, &w, &h, *c)?;
            let mut r = Report::new("transform fg-check");
            r.list(
                "slice",
                f.slices.iter().map(|(n, p)| {
                    let members: Vec<String> = p.render_lines();
                    format!("{n} {}", members.join(" "))
                }),
            );
            r.rational("slice-value", &f.slice_value);
            r.rational("direct-value", &f.direct_value);
            r.rational("pwt", &f.pwt_f);
            r.rational("bound", &f.bound);
            r.rational("h-mass", &f.h_mass);
            r.check("slice-sum-identity", f.slice_value == f.direct_value);
            r.check("bound", f.direct_value <= f.bound);
            Ok(r)
        }
        TransformCmd::Sigma02 { trees, depth } => {
            let family = load(trees, io::parse_tree_family)?;
            let w = sigma02_weight(&family, *depth)?;
            let mut r = Report::new("transform sigma02");
            r.put("weights", io::render_weights(&w)?);
            Ok(r)
        }
        TransformCmd::Rationalize {
            scale,
            eps,
            factor,
            depth,
            floor_bits,
        } => {
            let band = match (eps, factor) {
                (Some(e), _) => Band::Exponent(rational_arg(e)?),
                (None, Some(l)) => Band::Factor(rational_arg(l)?),
                (None, None) => return Err(Error::Precondition("give --eps or --factor".into())),
            };
            let oracle = LengthPowerOracle::new(rational_arg(scale)?);
            let opts = RationalizeOptions {
                floor_bits: *floor_bits,
            };
            let w = convex_rationalize(&oracle, &band, *depth, opts)?;
            let mut r = Report::new("transform rationalize");
            r.put("weights", io::render_weights(&w)?);
            r.check("convex", is_convex(&w, *depth)?.convex);
            Ok(r)
        }
    }
}

fn parse_h_table(text: &str) -> Result<std::collections::BTreeMap<i64, i64>> {
    let mut out = std::collections::BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Parse {
            line: i + 1,
            msg: "expected `<n> <h(n)>`".into(),
        };
        let mut parts = line.split_whitespace();
        let (Some(n), Some(h), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(bad());
        };
        out.insert(n.parse().map_err(|_| bad())?, h.parse().map_err(|_| bad())?);
    }
    Ok(out)
}

fn put_good_cover(r: &mut Report, a: &CylinderSet, b: &CylinderSet, w: &WeightFunction, brute: usize) -> Result<()> {
    let g = verify_good_cover(a, b, w, brute)?;
    r.rational("vwt-set", &g.vwt_set);
    r.rational("vwt-cover", &g.vwt_cover);
    r.rational("dwt-cover-minimal", &g.dwt_cover_hat);
    r.rational("pwt-cover", &g.pwt_cover);
    r.put("method", g.method);
    r.check("covers", g.covers);
    r.check("good", g.good);
    if let Some(eq) = g.chain_equal {
        r.check("chain-equal", eq);
    }
    Ok(())
}

fn cover_cmd(cmd: &CoverCmd) -> Result<Report> {
    match cmd {
        CoverCmd::Build {
            stream,
            weights,
            verify,
            trace,
        } => {
            let s = load(stream, io::parse_stream)?;
            let w = load(weights, io::parse_weights)?;
            let states = cover_trace(&s, &w)?;
            let mut r = Report::new("cover build");
            if *trace {
                r.list(
                    "step",
                    states.iter().skip(1).zip(&s).map(|(st, x)| {
                        format!("{x} -> {}", st.accepted().render_lines().join(" "))
                    }),
                );
            }
            let b = states.last().expect("initial state").accepted().clone();
            r.set("member", &b);
            r.rational("pwt", &pwt(&b, &w)?.value);
            if *verify {
                let a: CylinderSet = s.iter().cloned().collect();
                put_good_cover(&mut r, &a, &b, &w, 0)?;
            }
            Ok(r)
        }
        CoverCmd::Verify {
            set,
            cover,
            weights,
            brute,
        } => {
            let a = load(set, io::parse_cylinder_set)?;
            let b = load(cover, io::parse_cylinder_set)?;
            let w = load(weights, io::parse_weights)?;
            let mut r = Report::new("cover verify");
            put_good_cover(&mut r, &a, &b, &w, *brute)?;
            Ok(r)
        }
    }
}

fn kc_cmd(cmd: &KcCmd) -> Result<Report> {
    match cmd {
        KcCmd::Assign { requests } => {
            let reqs = load(requests, io::parse_requests)?;
            let codes = kraft_chaitin_assign(&reqs)?;
            let mut r = Report::new("kc assign");
            r.list("code", codes.iter().map(|(l, c)| format!("{l} {c}")));
            r.rational("kraft-sum", &crate::codes::kraft_sum(&reqs));
            Ok(r)
        }
        KcCmd::Family { family, weights } => {
            let fam = load(family, io::parse_test_family)?;
            let w = load(weights, io::parse_weights)?;
            let fr = requests_from_family(&fam, &w)?;
            let codes = kraft_chaitin_assign(&fr.requests)?;
            let mut r = Report::new("kc family");
            r.put("offset", fr.offset);
            r.rational("mass", &fr.mass);
            r.rational("kraft-sum", &fr.kraft_sum);
            r.list(
                "code",
                fr.requests
                    .iter()
                    .zip(&codes)
                    .map(|(q, (l, c))| format!("{l} {} {c}", q.length)),
            );
            Ok(r)
        }
    }
}

fn tests_cmd(cmd: &TestsCmd) -> Result<Report> {
    match cmd {
        TestsCmd::Gen {
            weights,
            est,
            level,
            len,
        } => {
            let w = load(weights, io::parse_weights)?;
            let e = estimator(est, *len)?;
            let t = universal_test_generate(&e, &w, *level, *len)?;
            let mut r = Report::new("tests gen");
            r.set("member", &t.set);
            r.rational("dwt", &t.dwt);
            r.rational("estimator-kraft-sum", &t.audit.sum);
            r.put("admissible", t.audit.admissible);
            if t.audit.admissible {
                r.check("dwt-bound", t.dwt <= crate::rational::pow2(-level));
            }
            Ok(r)
        }
        TestsCmd::Audit {
            family,
            weights,
            strong,
        } => {
            let fam = load(family, io::parse_test_family)?;
            let w = load(weights, io::parse_weights)?;
            let a = test_family_audit(&fam, &w, *strong)?;
            let mut r = Report::new("tests audit");
            r.put("mode", if *strong { "pwt" } else { "dwt" });
            r.list(
                "level",
                a.rows.iter().map(|row| {
                    format!(
                        "{} {} {} {}",
                        row.index,
                        render(&row.value),
                        render(&row.bound),
                        if row.pass { "pass" } else { "fail" }
                    )
                }),
            );
            r.rational("pwt-sum", &a.pwt_sum);
            r.check("levels", a.all_pass());
            Ok(r)
        }
    }
}

fn deficiency_cmd(args: &DeficiencyArgs) -> Result<Report> {
    let x = bits_arg(&args.bits)?;
    let w = load(&args.weights, io::parse_weights)?;
    let e = estimator(&args.est, x.len())?;
    let p = deficiency_profile(&x, &w, &e)?;
    let mut r = Report::new("deficiency");
    r.list(
        "d",
        p.deficiencies.iter().enumerate().map(|(i, d)| match d {
            Some(d) => format!("{} {d}", i + 1),
            None => format!("{} none", i + 1),
        }),
    );
    match p.max_level {
        Some(i) => r.put("max-level", i),
        None => r.put("max-level", "none"),
    }
    Ok(r)
}

fn semimeasure_cmd(args: &SemimeasureArgs) -> Result<Report> {
    let fam = load(&args.family, io::parse_test_family)?;
    let w = load(&args.weights, io::parse_weights)?;
    let sigma = bits_arg(&args.sigma)?;
    let m = semimeasure_from_family(&fam, &w, &sigma)?;
    let mut r = Report::new("semimeasure");
    r.list("m", m.per_index.iter().map(|(i, v)| format!("{i} {}", render(v))));
    r.rational("mixture", &m.mixture);
    r.rational("mixture-root", &m.mixture_root);
    r.put("audited", m.audited);
    r.check("superadditive", m.superadditive);
    if m.audited {
        r.check("mixture-root-bound", m.mixture_root <= crate::rational::int(1));
    }
    Ok(r)
}

fn levin_cmd(cmd: &LevinCmd) -> Result<Report> {
    match cmd {
        LevinCmd::Build {
            functional,
            input_depth,
            output_depth,
        } => {
            let phi = load(functional, |t| io::parse_functional(t, *input_depth, *output_depth))?;
            let v = levin_from_functional(&phi)?;
            let mut r = Report::new("levin build");
            r.put("system", io::render_levin_system(&v));
            r.list("measure", v.entries().map(|(s, set)| format!("{s} {}", render(&set.measure()))));
            put_levin_checks(&mut r, &v, "");
            Ok(r)
        }
        LevinCmd::Validate(src) => {
            let v = system(src)?;
            let mut r = Report::new("levin validate");
            put_levin_checks(&mut r, &v, "");
            Ok(r)
        }
        LevinCmd::Truncate { src, caps } => {
            let v = system(src)?;
            let caps = load(caps, io::parse_caps)?;
            let t = levin_truncate(&v, &caps)?;
            let mut r = Report::new("levin truncate");
            r.put("system", io::render_levin_system(&t));
            r.list("measure", t.entries().map(|(s, set)| format!("{s} {}", render(&set.measure()))));
            let all: Vec<BitString> = BitString::all_up_to(v.depth()).collect();
            r.check("subset", all.iter().all(|s| covers(&t.set(s), &v.set(s))));
            r.check(
                "capped",
                all.iter()
                    .all(|s| caps.get(s).is_none_or(|cap| t.measure(s) <= *cap)),
            );
            r.check(
                "unblocked-kept",
                all.iter().all(|s| {
                    let untouched = s
                        .prefixes()
                        .all(|p| caps.get(&p).is_none_or(|cap| v.measure(&p) < *cap));
                    !untouched || covers(&v.set(s), &t.set(s))
                }),
            );
            put_levin_checks(&mut r, &t, "output-");
            Ok(r)
        }
        LevinCmd::Test { src, weights, level } => {
            let v = system(src)?;
            let w = load(weights, io::parse_weights)?;
            let t = levin_measure_test(&v, &w, *level)?;
            let mut r = Report::new("levin test");
            r.set("member", &t.set);
            r.rational("pwt", &t.pwt);
            r.check("pwt-bound", t.pwt <= crate::rational::pow2(-level));
            Ok(r)
        }
        LevinCmd::Push { src, set, weights, c } => {
            let v = system(src)?;
            let a = load(set, io::parse_cylinder_set)?;
            let w = load(weights, io::parse_weights)?;
            let p = levin_pushforward_bound(&v, &a, &w, *c)?;
            let mut r = Report::new("levin push");
            r.set("union", &p.union);
            r.rational("measure", &p.measure);
            r.rational("sum", &p.sum);
            r.rational("pwt", &p.pwt);
            r.rational("bound", &p.bound);
            r.check("sum-identity", p.sum_identity());
            r.check("bound", p.measure <= p.bound);
            Ok(r)
        }
    }
}

fn dnr_cmd(cmd: &DnrCmd) -> Result<Report> {
    let DnrCmd::Simulate {
        class,
        table,
        n,
        exhaustive,
    } = cmd;
    if let Some(spec) = exhaustive {
        let (d, n, vmax) = (spec[0] as usize, spec[1] as usize, spec[2]);
        if d > 2 || n > 3 || vmax > 3 {
            return Err(Error::TooLarge(format!(
                "exhaustive sweep limited to d ≤ 2, N ≤ 3, vmax ≤ 3 (got {d} {n} {vmax})"
            )));
        }
        let s = exhaustive_sweep(d, n, vmax)?;
        let mut r = Report::new("dnr simulate --exhaustive");
        r.put("instances", s.instances);
        r.put("failures", s.failures);
        if let Some(f) = &s.first_failure {
            r.put("first-failure", f);
        }
        r.check("all-instances", s.failures == 0);
        return Ok(r);
    }
    let (Some(class), Some(table), Some(n)) = (class, table, n) else {
        return Err(Error::Precondition("need --class, --table and -N".into()));
    };
    let q = load(class, io::parse_class)?;
    let t = load(table, |text| io::parse_oracle_table(text, &q, *n))?;
    let run = run_propagation(&q, &t)?;
    let v = verify_witness(&run, &q, &t);
    let mut r = Report::new("dnr simulate");
    r.list("g", run.g.iter());
    r.list(
        "chain",
        run.chain_leaves(&q).enumerate().map(|(i, leaves)| {
            let names: Vec<String> = leaves.iter().map(|l| l.to_string()).collect();
            format!("{i} {}", names.join(" "))
        }),
    );
    r.put("witness", &run.witness);
    r.check("chain-recomputed", v.chain_matches);
    r.check("nested", v.nested);
    r.check("witness-in-chain", v.witness_in_chain);
    r.check("avoids-diagonal", v.avoids);
    r.check("avoids-derived-diagonal", v.diagonal_avoided);
    Ok(r)
}

/// Parses `argv` (including the program name), runs the command, and writes
/// the report. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            let text = match cli.format {
                Format::Text => report.text(),
                Format::Json => report.json(),
            };
            let _ = out.write_all(text.as_bytes());
            if report.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Invariant(_) => 1,
                _ => 2,
            }
        }
    }
}
