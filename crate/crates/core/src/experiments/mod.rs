//! Monte Carlo experiments built on the flow, the energies and the Wick
//! calculus, each summarized as an [`ExperimentReport`].

mod checks;
mod density;
mod derivative;
pub(crate) mod nan;
mod transport;

pub use checks::{alpha_centering, conservation_check, ConservationReport};
pub use density::{density_convergence, DensityConvergence, DensityConvergenceSpec, DensityRow};
pub use derivative::{
    derivative_norm_mu1, derivative_norm_mu32, derivative_sample_e, derivative_sample_g, e_derivative_wick_route,
    fd_check_e, fd_check_g, form_norm, DerivativeMc, FdCheck, GNormEstimate,
};
pub use transport::{
    monotonicity_probe, transport_experiment, transport_sweep, Ball, MonotonicityReport, MonotonicitySpec,
    TransportCell, TransportSpec, TransportSweep,
};

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::stats::MeanEstimate;
use crate::wick::{DecayFit, SumEstimate};

/// Version tag of the JSON report layout.
pub const REPORT_SCHEMA: &str = "bolab-report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scalar {
    pub name: String,
    #[serde(deserialize_with = "nan::f64_or_nan")]
    pub value: f64,
    /// Standard error; 0 for exact values.
    #[serde(deserialize_with = "nan::f64_or_nan")]
    pub se: f64,
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Numeric table; exported as CSV and plotted column 0 against the others.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    #[serde(deserialize_with = "nan::rows_or_nan")]
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    pub scalars: Vec<Scalar>,
    pub fits: Vec<DecayFit>,
    pub checks: Vec<Check>,
    pub tables: Vec<Table>,
    pub wall_clock_s: f64,
}

impl ExperimentReport {
    pub fn new(name: &str) -> Self {
        Self {
            schema: REPORT_SCHEMA.into(),
            name: name.into(),
            parameters: BTreeMap::new(),
            scalars: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            tables: Vec::new(),
            wall_clock_s: 0.0,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.into(), value.into());
        self
    }

    pub fn scalar(&mut self, name: &str, value: f64, se: f64, method: &str) {
        self.scalars.push(Scalar { name: name.into(), value, se, method: method.into() });
    }

    pub fn estimate(&mut self, name: &str, e: &SumEstimate) {
        let method = match e.method {
            crate::wick::Method::Exact => "exact",
            crate::wick::Method::MonteCarlo => "monte-carlo",
        };
        self.scalar(name, e.value, e.se, method);
    }

    pub fn mean(&mut self, name: &str, m: &MeanEstimate) {
        self.scalar(name, m.mean, m.se, "monte-carlo");
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn timed(mut self, start: Instant) -> Self {
        self.wall_clock_s = start.elapsed().as_secs_f64();
        self
    }
}
