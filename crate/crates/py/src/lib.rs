//! Python bindings. Sets cross the boundary as lists of bit strings (`"e"` is
//! the empty string) and rationals as `fractions.Fraction`.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use fweight_core::codes::{kraft_chaitin_assign, CodeRequest};
use fweight_core::dnrsim::exhaustive_sweep;
use fweight_core::goodcover::build_cover;
use fweight_core::levin::{levin_from_functional, levin_validate, MonotoneFunctionalTable};
use fweight_core::rational::{parse, render};
use fweight_core::selftest::{run_all, Scale};
use fweight_core::transforms::{increasing_pushforward, integer_normalize};
use fweight_core::weights::{self, is_convex, vwt_bruteforce, vwt_convex, vwt_depth_bounded};
use fweight_core::{io, BitString, CylinderSet, Error, Rational, WeightFunction};

fn value_error(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn bits(s: &str) -> PyResult<BitString> {
    s.parse().map_err(value_error)
}

fn set(members: &[String]) -> PyResult<CylinderSet> {
    members.iter().map(|s| bits(s)).collect()
}

fn listing(a: &CylinderSet) -> Vec<String> {
    a.iter().map(|s| s.to_string()).collect()
}

/// Anything whose `str()` is `n`, `n/d` or `-n/d`: int, Fraction, str.
fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    parse(&obj.str()?.to_cow()?).map_err(value_error)
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?.getattr("Fraction")?.call1((render(r),))
}

#[pyclass(name = "Weights", frozen)]
struct Weights(WeightFunction);

#[pymethods]
impl Weights {
    /// w(σ) = 2^(-s|σ|), s defaulting to 1.
    #[staticmethod]
    #[pyo3(signature = (depth, scale=None))]
    fn length(depth: usize, scale: Option<&Bound<'_, PyAny>>) -> PyResult<Self> {
        match scale {
            None => Ok(Weights(WeightFunction::length(depth))),
            Some(s) => WeightFunction::length_scaled(rational(s)?, depth).map(Weights).map_err(value_error),
        }
    }

    /// A total table of positive rationals on all strings up to `depth`.
    #[staticmethod]
    fn table(depth: usize, values: BTreeMap<String, Bound<'_, PyAny>>) -> PyResult<Self> {
        let mut table = BTreeMap::new();
        for (s, v) in &values {
            table.insert(bits(s)?, rational(v)?);
        }
        WeightFunction::from_table(depth, &table).map(Weights).map_err(value_error)
    }

    /// w(σ) = 2^(-f(σ)) from integer exponents.
    #[staticmethod]
    fn exponents(depth: usize, values: BTreeMap<String, i64>) -> PyResult<Self> {
        let mut table = BTreeMap::new();
        for (s, k) in values {
            table.insert(bits(&s)?, k);
        }
        WeightFunction::from_exponents(depth, &table).map(Weights).map_err(value_error)
    }

    /// The weight-file text format used by the command line tool.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        io::parse_weights(text).map(Weights).map_err(value_error)
    }

    #[getter]
    fn depth(&self) -> usize {
        self.0.depth()
    }

    #[getter]
    fn mode(&self) -> String {
        self.0.mode().to_string()
    }

    fn weight<'py>(&self, py: Python<'py>, s: &str) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.0.weight(&bits(s)?).map_err(value_error)?)
    }

    fn exponent(&self, s: &str) -> PyResult<i64> {
        self.0.exponent(&bits(s)?).map_err(value_error)
    }

    #[pyo3(signature = (depth=None))]
    fn is_convex(&self, depth: Option<usize>) -> PyResult<bool> {
        let d = depth.unwrap_or(self.0.depth());
        Ok(is_convex(&self.0, d).map_err(value_error)?.convex)
    }

    fn __repr__(&self) -> String {
        format!("Weights(mode={}, depth={})", self.0.mode(), self.0.depth())
    }
}

#[pyfunction]
fn dwt<'py>(py: Python<'py>, a: Vec<String>, w: &Weights) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &weights::dwt(&set(&a)?, &w.0).map_err(value_error)?)
}

/// (value, prefix-free witness)
#[pyfunction]
fn pwt<'py>(py: Python<'py>, a: Vec<String>, w: &Weights) -> PyResult<(Bound<'py, PyAny>, Vec<String>)> {
    let r = weights::pwt(&set(&a)?, &w.0).map_err(value_error)?;
    Ok((fraction(py, &r.value)?, listing(&r.witness)))
}

/// (value, cover attaining it). `mode` is "convex", "bounded" (extra depth
/// `bound`) or "brute" (search depth `bound`).
#[pyfunction]
#[pyo3(signature = (a, w, mode="convex", bound=0))]
fn vwt<'py>(
    py: Python<'py>,
    a: Vec<String>,
    w: &Weights,
    mode: &str,
    bound: usize,
) -> PyResult<(Bound<'py, PyAny>, Vec<String>)> {
    let a = set(&a)?;
    let r = match mode {
        "convex" => vwt_convex(&a, &w.0),
        "bounded" => vwt_depth_bounded(&a, &w.0, bound),
        "brute" => vwt_bruteforce(&a, &w.0, bound),
        other => return Err(PyValueError::new_err(format!("unknown vwt mode {other:?}"))),
    }
    .map_err(value_error)?;
    Ok((fraction(py, &r.value)?, listing(&r.witness)))
}

#[pyfunction]
fn good_cover(stream: Vec<String>, w: &Weights) -> PyResult<Vec<String>> {
    let stream: Vec<BitString> = stream.iter().map(|s| bits(s)).collect::<PyResult<_>>()?;
    Ok(listing(&build_cover(&stream, &w.0).map_err(value_error)?))
}

#[pyfunction]
fn pushforward(a: Vec<String>, w: &Weights) -> PyResult<Vec<String>> {
    Ok(listing(&increasing_pushforward(&set(&a)?, &w.0).map_err(value_error)?.set))
}

#[pyfunction]
fn int_normalize(f: &Bound<'_, PyAny>, length: usize) -> PyResult<i64> {
    Ok(integer_normalize(&rational(f)?, length))
}

/// [(label, length)] -> [(label, codeword)]
#[pyfunction]
fn kraft_chaitin(requests: Vec<(String, usize)>) -> PyResult<Vec<(String, String)>> {
    let reqs: Vec<CodeRequest> = requests.into_iter().map(|(l, n)| CodeRequest::new(l, n)).collect();
    let words = kraft_chaitin_assign(&reqs).map_err(value_error)?;
    Ok(words.into_iter().map(|(l, w)| (l, w.to_string())).collect())
}

/// The Levin system of a monotone table {input: output}, as {index: members}.
#[pyfunction]
fn levin_system(functional: BTreeMap<String, String>) -> PyResult<BTreeMap<String, Vec<String>>> {
    let mut map = BTreeMap::new();
    for (y, x) in &functional {
        map.insert(bits(y)?, bits(x)?);
    }
    let dy = map.keys().map(BitString::len).max().unwrap_or(0);
    let dx = map.values().map(BitString::len).max().unwrap_or(0);
    let phi = MonotoneFunctionalTable::new(dy, dx, map).map_err(value_error)?;
    let v = levin_from_functional(&phi).map_err(value_error)?;
    if !levin_validate(&v).passed() {
        return Err(PyValueError::new_err("constructed system fails validation"));
    }
    Ok(BitString::all_up_to(v.depth())
        .map(|s| (s.to_string(), listing(&v.set(&s))))
        .collect())
}

/// (instances, failures)
#[pyfunction]
fn dnr_sweep(max_depth: usize, max_n: usize, vmax: u64) -> PyResult<(u64, u64)> {
    let r = exhaustive_sweep(max_depth, max_n, vmax).map_err(value_error)?;
    Ok((r.instances, r.failures))
}

/// [(suite, checks, failures)] at the small scale.
#[pyfunction]
#[pyo3(signature = (seed=1))]
fn selftest(seed: u64) -> Vec<(String, u64, u64)> {
    run_all(Scale::Small, seed)
        .into_iter()
        .map(|r| (r.name.to_string(), r.checks, r.failures))
        .collect()
}

#[pymodule]
fn fweight(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Weights>()?;
    m.add_function(wrap_pyfunction!(dwt, m)?)?;
    m.add_function(wrap_pyfunction!(pwt, m)?)?;
    m.add_function(wrap_pyfunction!(vwt, m)?)?;
    m.add_function(wrap_pyfunction!(good_cover, m)?)?;
    m.add_function(wrap_pyfunction!(pushforward, m)?)?;
    m.add_function(wrap_pyfunction!(int_normalize, m)?)?;
    m.add_function(wrap_pyfunction!(kraft_chaitin, m)?)?;
    m.add_function(wrap_pyfunction!(levin_system, m)?)?;
    m.add_function(wrap_pyfunction!(dnr_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
