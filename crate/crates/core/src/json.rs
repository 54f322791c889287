//! JSON formats shared by the CLI and the file-based tests.
//!
//! Writers emit compact single-line JSON with a fixed field order and fixed
//! 17-significant-digit float formatting, so identical inputs serialize to
//! identical bytes. Readers go through `serde_json` and re-validate every
//! structural invariant on the way in.

use num::complex::Complex64;
use num::{BigInt, BigRational};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::lax::SpectralCurve;
use crate::matrix::Mat;
use crate::normalize::GaugeData;
use crate::polygon::{Chain, Lift};

/// Shortest representation that survives a parse round trip: one leading
/// digit plus sixteen decimals.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(what: &str) -> Error {
    Error::Parse(what.to_string())
}

/// Scalar encoding used by every file format: complex entries as `[re,im]`
/// number pairs, rationals as `"p/q"` strings.
pub trait JsonScalar: Scalar {
    fn encode(&self) -> String;
    fn decode(v: &Value) -> Result<Self>;
}

impl JsonScalar for Complex64 {
    fn encode(&self) -> String {
        format!("[{},{}]", fmt_f64(self.re), fmt_f64(self.im))
    }

    fn decode(v: &Value) -> Result<Self> {
        let pair = v
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| parse_err("complex entry must be a [re,im] pair"))?;
        let get = |i: usize| {
            pair[i]
                .as_f64()
                .ok_or_else(|| parse_err("complex entry must hold two numbers"))
        };
        Ok(Complex64::new(get(0)?, get(1)?))
    }
}

impl JsonScalar for BigRational {
    fn encode(&self) -> String {
        format!("\"{}/{}\"", self.numer(), self.denom())
    }

    fn decode(v: &Value) -> Result<Self> {
        let s = v
            .as_str()
            .ok_or_else(|| parse_err("rational entry must be a \"p/q\" string"))?;
        let (p, q) = s.split_once('/').unwrap_or((s, "1"));
        let p: BigInt = p
            .parse()
            .map_err(|_| parse_err("rational numerator is not an integer"))?;
        let q: BigInt = q
            .parse()
            .map_err(|_| parse_err("rational denominator is not an integer"))?;
        if num::Zero::is_zero(&q) {
            return Err(parse_err("rational denominator is zero"));
        }
        Ok(BigRational::new(p, q))
    }
}

fn mat_str<T: JsonScalar>(m: &Mat<T>) -> String {
    let rows: Vec<String> = (0..m.rows())
        .map(|r| {
            let entries: Vec<String> = (0..m.cols()).map(|c| m.at(r, c).encode()).collect();
            format!("[{}]", entries.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

fn mat_from(v: &Value, rows: usize, cols: usize, what: &str) -> Result<Mat<Complex64>> {
    typed_mat_from::<Complex64>(v, rows, cols, what)
}

fn typed_mat_from<T: JsonScalar>(v: &Value, rows: usize, cols: usize, what: &str) -> Result<Mat<T>> {
    let rlist = v
        .as_array()
        .filter(|a| a.len() == rows)
        .ok_or_else(|| parse_err(&format!("{what}: expected {rows} matrix rows")))?;
    let mut out = Mat::zeros(rows, cols);
    for (r, row) in rlist.iter().enumerate() {
        let entries = row
            .as_array()
            .filter(|a| a.len() == cols)
            .ok_or_else(|| parse_err(&format!("{what}: expected {cols} entries per row")))?;
        for (c, e) in entries.iter().enumerate() {
            *out.at_mut(r, c) = T::decode(e)?;
        }
    }
    Ok(out)
}

fn dims_of(v: &Value) -> Result<(usize, usize, usize)> {
    let field = |name: &str| {
        v.get(name)
            .and_then(Value::as_u64)
            .ok_or_else(|| parse_err(&format!("missing or non-integer field \"{name}\"")))
    };
    Ok((field("n")? as usize, field("m")? as usize, field("N")? as usize))
}

fn field_tag(v: &Value) -> Result<&str> {
    v.get("field")
        .and_then(Value::as_str)
        .filter(|t| *t == "complex" || *t == "rational")
        .ok_or_else(|| parse_err("field must be \"complex\" or \"rational\""))
}

/// `{"n","m","N","field","a"}` with a as N rows of m blocks.
pub fn chain_to_json<T: JsonScalar>(chain: &Chain<T>) -> String {
    let rows: Vec<String> = (0..chain.big_n)
        .map(|k| {
            let blocks: Vec<String> = (0..chain.m).map(|i| mat_str(chain.block(k, i))).collect();
            format!("[{}]", blocks.join(","))
        })
        .collect();
    format!(
        "{{\"n\":{},\"m\":{},\"N\":{},\"field\":\"{}\",\"a\":[{}]}}",
        chain.n,
        chain.m,
        chain.big_n,
        T::FIELD_TAG,
        rows.join(",")
    )
}

fn chain_from_value<T: JsonScalar>(v: &Value) -> Result<Chain<T>> {
    let (n, m, big_n) = dims_of(v)?;
    let rows = v
        .get("a")
        .and_then(Value::as_array)
        .filter(|a| a.len() == big_n)
        .ok_or_else(|| parse_err("\"a\" must hold N block rows"))?;
    let mut a = Vec::with_capacity(big_n);
    for (k, row) in rows.iter().enumerate() {
        let blocks = row
            .as_array()
            .filter(|b| b.len() == m)
            .ok_or_else(|| parse_err("each block row must hold m blocks"))?;
        let mut out = Vec::with_capacity(m);
        for (i, b) in blocks.iter().enumerate() {
            out.push(typed_mat_from::<T>(b, n, n, &format!("a[{k}][{i}]"))?);
        }
        a.push(out);
    }
    Chain::new(n, m, big_n, a)
}

/// `{"n","m","N","field","X","M"}` with X as N stacked-lift matrices.
pub fn lift_to_json<T: JsonScalar>(lift: &Lift<T>) -> String {
    let xs: Vec<String> = lift.x.iter().map(mat_str).collect();
    format!(
        "{{\"n\":{},\"m\":{},\"N\":{},\"field\":\"{}\",\"X\":[{}],\"M\":{}}}",
        lift.n,
        lift.m,
        lift.big_n,
        T::FIELD_TAG,
        xs.join(","),
        mat_str(&lift.monodromy)
    )
}

fn lift_from_value<T: JsonScalar>(v: &Value) -> Result<Lift<T>> {
    let (n, m, big_n) = dims_of(v)?;
    let xs = v
        .get("X")
        .and_then(Value::as_array)
        .filter(|a| a.len() == big_n)
        .ok_or_else(|| parse_err("\"X\" must hold N matrices"))?;
    let x = xs
        .iter()
        .enumerate()
        .map(|(k, xv)| typed_mat_from::<T>(xv, m * n, n, &format!("X[{k}]")))
        .collect::<Result<Vec<_>>>()?;
    let mv = v
        .get("M")
        .ok_or_else(|| parse_err("missing monodromy field \"M\""))?;
    let monodromy = typed_mat_from::<T>(mv, m * n, m * n, "M")?;
    Lift::new(n, m, big_n, x, monodromy)
}

/// A parsed file in whichever backend its tag declared.
#[derive(Debug)]
pub enum AnyChain {
    Complex(Chain<Complex64>),
    Rational(Chain<BigRational>),
}

#[derive(Debug)]
pub enum AnyLift {
    Complex(Lift<Complex64>),
    Rational(Lift<BigRational>),
}

pub fn parse_chain(s: &str) -> Result<AnyChain> {
    let v: Value = serde_json::from_str(s)?;
    match field_tag(&v)? {
        "rational" => Ok(AnyChain::Rational(chain_from_value(&v)?)),
        _ => Ok(AnyChain::Complex(chain_from_value(&v)?)),
    }
}

pub fn parse_lift(s: &str) -> Result<AnyLift> {
    let v: Value = serde_json::from_str(s)?;
    match field_tag(&v)? {
        "rational" => Ok(AnyLift::Rational(lift_from_value(&v)?)),
        _ => Ok(AnyLift::Complex(lift_from_value(&v)?)),
    }
}

/// `{"delta","d","q","lambda"}`; the redundant frame determinants Z are
/// recomputable from the lift and stay out of the file (parse fills zeros).
pub fn gauge_to_json(g: &GaugeData) -> String {
    let scalars: Vec<String> = g.delta.iter().map(JsonScalar::encode).collect();
    let mats = |list: &[Mat<Complex64>]| {
        let rows: Vec<String> = list.iter().map(mat_str).collect();
        format!("[{}]", rows.join(","))
    };
    format!(
        "{{\"delta\":[{}],\"d\":{},\"q\":{},\"lambda\":{}}}",
        scalars.join(","),
        mats(&g.d),
        mats(&g.q),
        mats(&g.lambda)
    )
}

pub fn parse_gauge(s: &str, n: usize, big_n: usize) -> Result<GaugeData> {
    let v: Value = serde_json::from_str(s)?;
    let deltas = v
        .get("delta")
        .and_then(Value::as_array)
        .filter(|a| a.len() == big_n)
        .ok_or_else(|| parse_err("\"delta\" must hold N scalars"))?;
    let delta = deltas
        .iter()
        .map(Complex64::decode)
        .collect::<Result<Vec<_>>>()?;
    let mats = |name: &str| -> Result<Vec<Mat<Complex64>>> {
        let list = v
            .get(name)
            .and_then(Value::as_array)
            .filter(|a| a.len() == big_n)
            .ok_or_else(|| parse_err(&format!("\"{name}\" must hold N matrices")))?;
        list.iter()
            .enumerate()
            .map(|(k, mv)| mat_from(mv, n, n, &format!("{name}[{k}]")))
            .collect()
    };
    let z = delta.iter().map(|_| Complex64::new(0.0, 0.0)).collect();
    Ok(GaugeData {
        z,
        delta,
        d: mats("d")?,
        q: mats("q")?,
        lambda: mats("lambda")?,
    })
}

/// Spectral report: the requested mu samples with their char-poly
/// coefficient vectors, plus the interpolated Laurent curve in nu.
pub struct SpectralReport {
    pub mus: Vec<Complex64>,
    pub eta_polys: Vec<Vec<Complex64>>,
    pub curve: SpectralCurve,
}

pub fn spectral_to_json(report: &SpectralReport) -> String {
    let cvec = |list: &[Complex64]| {
        let entries: Vec<String> = list.iter().map(JsonScalar::encode).collect();
        format!("[{}]", entries.join(","))
    };
    let polys: Vec<String> = report.eta_polys.iter().map(|p| cvec(p)).collect();
    let rows: Vec<String> = report.curve.coeffs.iter().map(|p| cvec(p)).collect();
    format!(
        "{{\"mus\":{},\"eta_polys\":[{}],\"curve\":{{\"nu_offset\":{},\"coeffs\":[{}]}}}}",
        cvec(&report.mus),
        polys.join(","),
        report.curve.nu_offset,
        rows.join(",")
    )
}

/// `{"error":kind,"message":text}` written to stderr by the CLI.
pub fn error_to_json(e: &Error) -> String {
    format!(
        "{{\"error\":{},\"message\":{}}}",
        Value::String(e.kind().to_string()),
        Value::String(e.to_string())
    )
}
