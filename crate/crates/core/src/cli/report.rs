//! Report schema: `{command, params, results, checks, provenance}`, and the
//! CSV table `k,route,value,error_estimate,seed`.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::variance::{QuadratureSpec, VarianceResult};

use super::config::RunConfig;

/// One declared comparison. `basis` says where `expected` comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub got: f64,
    pub tol: f64,
    pub pass: bool,
    pub basis: String,
}

impl Check {
    /// `|got - expected| ≤ tol`.
    pub fn absolute(name: impl Into<String>, expected: f64, got: f64, tol: f64, basis: &str) -> Self {
        Check {
            name: name.into(),
            expected,
            got,
            tol,
            pass: (got - expected).abs() <= tol,
            basis: basis.to_string(),
        }
    }

    /// `|got/expected - 1| ≤ tol`.
    pub fn relative(name: impl Into<String>, expected: f64, got: f64, tol: f64, basis: &str) -> Self {
        Check {
            name: name.into(),
            expected,
            got,
            tol,
            pass: (got / expected - 1.0).abs() <= tol || got == expected,
            basis: basis.to_string(),
        }
    }

    /// A boolean property, encoded as expected 1 / got 0 or 1.
    pub fn holds(name: impl Into<String>, ok: bool, basis: &str) -> Self {
        Check {
            name: name.into(),
            expected: 1.0,
            got: if ok { 1.0 } else { 0.0 },
            tol: 0.0,
            pass: ok,
            basis: basis.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub quadrature: QuadratureSpec,
    pub wall_clock_seconds: f64,
    pub timestamp_unix: u64,
}

/// One row of the CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub k: u32,
    pub route: String,
    pub value: f64,
    pub error_estimate: f64,
    pub seed: Option<u64>,
}

impl From<&VarianceResult> for CsvRow {
    fn from(r: &VarianceResult) -> Self {
        let seed = match r.params {
            crate::variance::RouteParams::Sampling { seed, .. } => Some(seed),
            _ => None,
        };
        CsvRow {
            k: r.k,
            route: serde_json::to_value(r.route)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default(),
            value: r.value,
            error_estimate: r.error_estimate,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub params: RunConfig,
    pub results: Vec<Value>,
    pub checks: Vec<Check>,
    pub provenance: Provenance,
    #[serde(skip)]
    pub csv_rows: Vec<CsvRow>,
    /// Extra plot-ready table `(k, k·Var)` written next to the main output by `fit`.
    #[serde(skip)]
    pub k_var_table: Vec<(u32, f64)>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,route,value,error_estimate,seed\n");
        for r in &self.csv_rows {
            let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{:.17e},{:.6e},{}", r.k, r.route, r.value, r.error_estimate, seed);
        }
        out
    }

    pub fn k_var_csv(&self) -> String {
        let mut out = String::from("k,k_var\n");
        for (k, v) in &self.k_var_table {
            let _ = writeln!(out, "{k},{v:.17e}");
        }
        out
    }
}
