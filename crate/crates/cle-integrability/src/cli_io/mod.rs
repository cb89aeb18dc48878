//! Run records, suite reports, config files and CSV output for the `cleint`
//! front end.

mod config;
mod csv_io;
pub mod suites;

pub use config::{load_config, parse_config, ConfigEntry, ConfigError};
pub use csv_io::{read_histogram_csv, write_curve_csv, write_histogram_csv, HistogramRow};

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Version string stamped on every record.
pub const TOOL_VERSION: &str = concat!("cleint ", env!("CARGO_PKG_VERSION"));

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "CLEINT_THREADS";

/// A real number that serializes non-finite values as the strings `"inf"`,
/// `"-inf"` and `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                match v {
                    "inf" => Ok(Num(f64::INFINITY)),
                    "-inf" => Ok(Num(f64::NEG_INFINITY)),
                    "nan" => Ok(Num(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

impl From<f64> for Num {
    fn from(x: f64) -> Self {
        Num(x)
    }
}

/// Name and message of an evaluator error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

impl From<&crate::error::Error> for ErrorInfo {
    fn from(e: &crate::error::Error) -> Self {
        ErrorInfo { kind: e.kind().to_string(), message: e.to_string() }
    }
}

/// One command invocation and its result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    /// Every parameter the command used, defaults included.
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Secondary outputs such as counts of unresolved replicates.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, Num>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    pub runtime_ms: u64,
    pub tool_version: String,
}

impl RunRecord {
    pub fn new(command: impl Into<String>, params: BTreeMap<String, String>) -> Self {
        RunRecord {
            command: command.into(),
            params,
            value: None,
            values: None,
            stderr: None,
            target: None,
            n: None,
            seed: None,
            diagnostics: BTreeMap::new(),
            error: None,
            runtime_ms: 0,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records contain only strings and numbers")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// A single named comparison of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub target: Num,
    pub observed: Num,
    pub tolerance: Num,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

impl Check {
    /// Passes when `|observed - target| <= tolerance`.
    pub fn close(name: impl Into<String>, target: f64, observed: f64, tolerance: f64) -> Self {
        let pass = (observed - target).abs() <= tolerance;
        Check { name: name.into(), target: Num(target), observed: Num(observed), tolerance: Num(tolerance), pass, error: None }
    }

    /// Passes when `observed < tolerance`; for residuals.
    pub fn residual(name: impl Into<String>, observed: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            target: Num(0.0),
            observed: Num(observed),
            tolerance: Num(tolerance),
            pass: observed < tolerance,
            error: None,
        }
    }

    /// Passes when `pass` holds; records `observed` for the report.
    pub fn predicate(name: impl Into<String>, observed: f64, pass: bool) -> Self {
        Check { name: name.into(), target: Num(f64::NAN), observed: Num(observed), tolerance: Num(0.0), pass, error: None }
    }

    /// A failed check carrying the evaluator error.
    pub fn failed(name: impl Into<String>, tolerance: f64, err: &crate::error::Error) -> Self {
        Check {
            name: name.into(),
            target: Num(0.0),
            observed: Num(f64::NAN),
            tolerance: Num(tolerance),
            pass: false,
            error: Some(err.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
    pub overall: bool,
    pub runtime_ms: u64,
    pub tool_version: String,
}

impl SuiteReport {
    pub fn new(suite: impl Into<String>, checks: Vec<Check>, runtime_ms: u64) -> Self {
        let overall = checks.iter().all(|c| c.pass);
        SuiteReport { suite: suite.into(), checks, overall, runtime_ms, tool_version: TOOL_VERSION.to_string() }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports contain only strings and numbers")
    }
}
