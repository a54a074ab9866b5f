//! Python bindings. Enclosures come back as dicts of exact dyadic strings
//! (`lo`, `hi`) and outward-rounded decimals (`lo_decimal`, `hi_decimal`).

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use shannon_core::compile::{compile_interpolation, compile_sampling, roundtrip_check, ConstantTable};
use shannon_core::desc::Description;
use shannon_core::error::Error;
use shannon_core::interval::Enclosure;
use shannon_core::machine;
use shannon_core::norm::norm_of_description;
use shannon_core::verify::{run_suite, Suite, VerifyOptions};
use shannon_core::witness::{build_g_witness, build_q_witness, WitnessOptions};

const DIGITS: usize = 12;

create_exception!(shannon, ShannonError, PyException);
create_exception!(shannon, ParseError, ShannonError);
create_exception!(shannon, UnsupportedExponent, ShannonError);
create_exception!(shannon, MissingConstant, ShannonError);
create_exception!(shannon, NotIntegrable, ShannonError);
create_exception!(shannon, Inconclusive, ShannonError);
create_exception!(shannon, ResourceLimit, ShannonError);
create_exception!(shannon, GeneratorFailure, ShannonError);

fn raise(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Syntax { .. } | Error::Validation(_) | Error::MalformedProgram(_) => ParseError::new_err(msg),
        Error::UnsupportedExponent(_) => UnsupportedExponent::new_err(msg),
        Error::MissingConstant(_) => MissingConstant::new_err(msg),
        Error::NotIntegrable(_) => NotIntegrable::new_err(msg),
        Error::Inconclusive(_) => Inconclusive::new_err(msg),
        Error::ResourceLimit(_) => ResourceLimit::new_err(msg),
        Error::GeneratorFailure(_) | Error::DivisionByZero => GeneratorFailure::new_err(msg),
    }
}

fn enclosure<'py>(py: Python<'py>, e: &Enclosure) -> PyResult<Bound<'py, PyDict>> {
    let (a, b) = e.decimal_bounds(DIGITS);
    let d = PyDict::new(py);
    d.set_item("lo", e.lo().to_string())?;
    d.set_item("hi", e.hi().to_string())?;
    d.set_item("lo_decimal", a)?;
    d.set_item("hi_decimal", b)?;
    Ok(d)
}

fn parse(text: &str) -> PyResult<Description> {
    Description::parse(text).map_err(raise)
}

/// Parses and validates a document; returns its canonical text.
#[pyfunction]
fn validate(document: &str) -> PyResult<String> {
    Ok(parse(document)?.serialize())
}

/// Compiles with `direction` "sample" or "interpolate". `constants` is the
/// text of a TOML constant table. Returns `(document, report_json)`.
#[pyfunction]
#[pyo3(signature = (document, direction, constants=None))]
fn compile(document: &str, direction: &str, constants: Option<&str>) -> PyResult<(String, String)> {
    let d = parse(document)?;
    let table = match constants {
        Some(t) => ConstantTable::from_toml(t).map_err(raise)?,
        None => ConstantTable::default(),
    };
    let c = match direction {
        "sample" => compile_sampling(&d),
        "interpolate" => compile_interpolation(&d, &table),
        other => return Err(pyo3::exceptions::PyValueError::new_err(format!("unknown direction '{other}'"))),
    }
    .map_err(raise)?;
    let report = serde_json::to_string(&c.report).expect("report serializes");
    Ok((c.description.serialize(), report))
}

/// Round trip through both compilers; true when every element comes back
/// within `2^-precision`.
#[pyfunction]
#[pyo3(signature = (document, depth=8, precision=20, constants=None))]
fn roundtrip(document: &str, depth: u64, precision: u32, constants: Option<&str>) -> PyResult<bool> {
    let d = parse(document)?;
    let table = match constants {
        Some(t) => ConstantTable::from_toml(t).map_err(raise)?,
        None => ConstantTable::default(),
    };
    Ok(roundtrip_check(&d, &table, depth, precision).map_err(raise)?.pass)
}

/// Enclosure of the norm of the described limit, width at most `2^-precision`.
#[pyfunction]
#[pyo3(signature = (document, precision=20))]
fn norm<'py>(py: Python<'py>, document: &str, precision: u32) -> PyResult<Bound<'py, PyDict>> {
    let d = parse(document)?;
    let e = py.allow_threads(|| norm_of_description(&d, precision)).map_err(raise)?;
    enclosure(py, &e)
}

#[pyfunction]
#[pyo3(signature = (n, precision=20))]
fn g_witness<'py>(py: Python<'py>, n: u64, precision: u32) -> PyResult<Bound<'py, PyDict>> {
    let g = py
        .allow_threads(|| build_g_witness(n, precision, &WitnessOptions::default()))
        .map_err(raise)?;
    let d = PyDict::new(py);
    d.set_item("n", n)?;
    d.set_item("log2_N", g.log2_n)?;
    d.set_item("C", enclosure(py, &g.c)?)?;
    d.set_item("value_at_half", enclosure(py, &g.value_at_half)?)?;
    d.set_item("sample_sup", enclosure(py, &g.sample_sup)?)?;
    d.set_item("peak_upper", g.peak_upper.to_string())?;
    d.set_item("value_is_one", g.value_ok(precision))?;
    d.set_item("sample_below_1_over_n", g.sample_ok())?;
    d.set_item("c_above_log2n_over_4", g.c_ok())?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (big_n, precision=20))]
fn q_witness<'py>(py: Python<'py>, big_n: u64, precision: u32) -> PyResult<Bound<'py, PyDict>> {
    let q = py
        .allow_threads(|| build_q_witness(big_n, precision, &WitnessOptions::default()))
        .map_err(raise)?;
    let d = PyDict::new(py);
    d.set_item("N", big_n)?;
    d.set_item("l1", enclosure(py, &q.l1)?)?;
    d.set_item("lower", enclosure(py, &q.lower)?)?;
    d.set_item("upper", enclosure(py, &q.upper)?)?;
    d.set_item("inside", q.inside())?;
    d.set_item("sample_l1", q.sample_l1.to_string())?;
    Ok(d)
}

/// Runs a verification suite; returns `(passed, report_text)`.
#[pyfunction]
#[pyo3(signature = (suite, seed=None, cases=None, fuzz=None))]
fn verify(py: Python<'_>, suite: &str, seed: Option<u64>, cases: Option<usize>, fuzz: Option<usize>) -> PyResult<(bool, String)> {
    let suite: Suite = suite.parse().map_err(raise)?;
    let mut opts = VerifyOptions::default();
    opts.seed = seed.unwrap_or(opts.seed);
    opts.cases = cases.unwrap_or(opts.cases);
    opts.fuzz = fuzz.unwrap_or(opts.fuzz);
    let r = py.allow_threads(|| run_suite(suite, &opts)).map_err(raise)?;
    Ok((r.pass, r.to_string()))
}

/// True when the machine halts within `steps` steps.
#[pyfunction]
fn run_machine(program: &str, steps: u64) -> PyResult<bool> {
    machine::run_machine(program, steps).map_err(raise)
}

#[pymodule]
fn shannon(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("ShannonError", py.get_type::<ShannonError>())?;
    m.add("ParseError", py.get_type::<ParseError>())?;
    m.add("UnsupportedExponent", py.get_type::<UnsupportedExponent>())?;
    m.add("MissingConstant", py.get_type::<MissingConstant>())?;
    m.add("NotIntegrable", py.get_type::<NotIntegrable>())?;
    m.add("Inconclusive", py.get_type::<Inconclusive>())?;
    m.add("ResourceLimit", py.get_type::<ResourceLimit>())?;
    m.add("GeneratorFailure", py.get_type::<GeneratorFailure>())?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(compile, m)?)?;
    m.add_function(wrap_pyfunction!(roundtrip, m)?)?;
    m.add_function(wrap_pyfunction!(norm, m)?)?;
    m.add_function(wrap_pyfunction!(g_witness, m)?)?;
    m.add_function(wrap_pyfunction!(q_witness, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_machine, m)?)?;
    Ok(())
}
