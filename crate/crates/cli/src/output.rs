use std::fs;
use std::io::{self, Write};
use std::path::Path;

use finitegap::{Error, Tolerances};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::args::{Common, Format};

/// Shortest round-trip representation, switching to exponent form for very
/// large or small magnitudes.
pub fn cell(x: f64) -> String {
    format!("{x:?}")
}

/// `a+bi` with each part as in `cell`.
pub fn fmt_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { "" } else { "+" };
    format!("{:?}{sign}{:?}i", z.re, z.im)
}

pub fn json_complex(z: Complex64) -> Value {
    json!({ "re": json_num(z.re), "im": json_num(z.im) })
}

/// Numbers that JSON cannot hold become the strings `inf`, `-inf`, `nan`.
pub fn json_num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn tolerance_json(t: &Tolerances) -> Value {
    let mut m = Map::new();
    for (k, v) in t.entries() {
        m.insert(k.to_string(), json!(v));
    }
    Value::Object(m)
}

fn tolerance_header(command: &str, t: &Tolerances) -> String {
    let parts: Vec<String> = t.entries().iter().map(|(k, v)| format!("{k}={v:e}")).collect();
    format!("# finitegap {command}; tolerances: {}", parts.join(" "))
}

/// A hard failure, reported as JSON on stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            kind: "usage",
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.kind, "code": self.code, "message": self.message }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::InvalidArgument(_) | Error::Precondition(_) => (1, "usage"),
            Error::Inconsistent(_) => (2, "assertion"),
            _ => (3, "numerical"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::usage(format!("i/o: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    ChecksFailed,
}

impl Status {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Status::Pass
        } else {
            Status::ChecksFailed
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::ChecksFailed => 2,
        }
    }
}

/// Everything a command produces; rendering depends on the format.
pub struct Report {
    pub command: &'static str,
    pub input: Value,
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub result: Value,
    pub summary: Value,
    pub status: Status,
}

pub fn write_to(path: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()
        }
    }
}

fn csv_bytes(headers: &[&str], rows: &[Vec<String>]) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| e.into_error())
}

pub fn emit(common: &Common, tol: &Tolerances, report: Report) -> Result<Status, Failure> {
    match common.format {
        Format::Csv => {
            let mut bytes = tolerance_header(report.command, tol).into_bytes();
            bytes.push(b'\n');
            bytes.extend(csv_bytes(&report.headers, &report.rows)?);
            write_to(common.output.as_deref(), &bytes)?;
            let summary = json!({
                "command": report.command,
                "tolerances": tolerance_json(tol),
                "summary": report.summary,
            });
            let text = serde_json::to_string_pretty(&summary).expect("json") + "\n";
            match &common.summary {
                Some(p) => fs::write(p, text)?,
                None => eprint!("{text}"),
            }
        }
        Format::Json => {
            let payload = json!({
                "command": report.command,
                "tolerances": tolerance_json(tol),
                "input": report.input,
                "result": report.result,
                "summary": report.summary,
            });
            let text = serde_json::to_string_pretty(&payload).expect("json") + "\n";
            write_to(common.output.as_deref(), text.as_bytes())?;
        }
    }
    Ok(report.status)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_format() {
        assert_eq!(fmt_complex(Complex64::new(0.0, 1.2)), "0.0+1.2i");
        assert_eq!(fmt_complex(Complex64::new(-1.5, -2.0)), "-1.5-2.0i");
        assert_eq!(fmt_complex(Complex64::new(1.0, 2.5e-12)), "1.0+2.5e-12i");
        assert_eq!(cell(1e-23), "1e-23");
    }

    #[test]
    fn non_finite_numbers() {
        assert_eq!(json_num(f64::NEG_INFINITY), json!("-inf"));
        assert_eq!(json_num(2.0), json!(2.0));
    }
}
