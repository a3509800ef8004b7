//! Scenario registry: parameterized reproductions of worked examples, each
//! producing a machine-readable report and optional CSV dumps.

mod denjoy;
mod dyadic;
mod example1;
mod rotation;
pub mod specs;
mod spiral;

use std::fs::File;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{de::DeserializeOwned, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::circle::CircleError;
use crate::exponents::{ExponentError, ExponentProbeReport, FSequence, Verdict};
use crate::groups::GroupError;
use crate::realfield::FieldError;
use crate::solenoid::SolenoidError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("bad parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Circle(#[from] CircleError),
    #[error(transparent)]
    Solenoid(#[from] SolenoidError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Stated outright by the source example.
    Reference,
    /// Immediate from the definitions.
    Trivial,
    /// Computed here by an independent route and compared.
    Derived,
}

#[derive(Debug, Clone, Serialize)]
pub struct Expectation {
    pub id: String,
    pub provenance: Provenance,
    pub label: String,
    pub passed: bool,
    pub measured: Value,
    pub detail: String,
}

impl Expectation {
    pub fn new(
        id: &str,
        provenance: Provenance,
        label: impl Into<String>,
        passed: bool,
        measured: Value,
        detail: impl Into<String>,
    ) -> Self {
        Expectation {
            id: id.to_string(),
            provenance,
            label: label.into(),
            passed,
            measured,
            detail: detail.into(),
        }
    }

    /// `measured <= bound`.
    pub fn at_most(
        id: &str,
        provenance: Provenance,
        label: impl Into<String>,
        measured: f64,
        bound: f64,
    ) -> Self {
        Self::new(
            id,
            provenance,
            label,
            measured <= bound,
            json!(measured),
            format!("{measured:.3e} <= {bound:.1e}"),
        )
    }

    pub fn verdict(
        id: &str,
        provenance: Provenance,
        report: &ExponentProbeReport,
        expected: Verdict,
    ) -> Self {
        let got = report.verdict;
        Self::new(
            id,
            provenance,
            format!("candidate {} is {:?}", report.candidate, expected),
            got == expected,
            report.to_json(),
            format!("verdict {got:?}, max spread {:?}", report.max_spread),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub params: Value,
    pub passed: bool,
    pub expectations: Vec<Expectation>,
}

impl RunReport {
    pub fn new(scenario: &str, params: Value, expectations: Vec<Expectation>) -> Self {
        RunReport {
            scenario: scenario.to_string(),
            params,
            passed: expectations.iter().all(|e| e.passed),
            expectations,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Expectation> {
        self.expectations.iter().filter(|e| !e.passed)
    }

    pub fn get(&self, id: &str) -> Option<&Expectation> {
        self.expectations.iter().find(|e| e.id == id)
    }
}

/// A table written as `<name>.csv`.
#[derive(Debug, Clone)]
pub struct Dump {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Dump {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Dump {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_writer(File::create(dir.join(format!("{}.csv", self.name)))?);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Rows `(sequence, candidate, index, t, frac(candidate * t))`.
pub(crate) fn trace_dump(
    name: &str,
    sequences: &[FSequence],
    candidates: &[crate::realfield::RealVector],
) -> Dump {
    let mut d = Dump::new(name, &["sequence", "candidate", "index", "t", "trace"]);
    for s in sequences {
        for c in candidates {
            let a = c.eval();
            for (i, t) in s.times.iter().enumerate() {
                d.push(vec![
                    s.label.clone(),
                    c.to_string(),
                    i.to_string(),
                    t.to_string(),
                    crate::torus::frac(a * t).to_string(),
                ]);
            }
        }
    }
    d
}

pub struct ScenarioRun {
    pub report: RunReport,
    pub dumps: Vec<Dump>,
    pub runtime: Duration,
}

pub struct ScenarioInfo {
    pub name: &'static str,
    pub summary: &'static str,
}

pub const SCENARIOS: &[ScenarioInfo] = &[
    ScenarioInfo {
        name: "example1",
        summary: "planar curve accumulating on (0, 1/2); exponent group Z",
    },
    ScenarioInfo {
        name: "spiral",
        summary: "spiral between two invariant circles; forward group <alpha>, full group {0}",
    },
    ScenarioInfo {
        name: "denjoy_suspension",
        summary: "suspension of a Denjoy map; exponent group <theta, 1>",
    },
    ScenarioInfo {
        name: "dyadic_solenoid",
        summary: "B-sequence of the dyadic rationals and its solenoid flow",
    },
    ScenarioInfo {
        name: "rotation_suspension",
        summary: "suspension of a rotation against the linear flow on the 2-torus",
    },
];

pub(crate) fn parse_params<P: DeserializeOwned + Serialize + Default>(
    v: Option<&Value>,
) -> Result<(P, Value), HarnessError> {
    let p: P = match v {
        None | Some(Value::Null) => P::default(),
        Some(v) => {
            serde_json::from_value(v.clone()).map_err(|e| HarnessError::Params(e.to_string()))?
        }
    };
    let echo = serde_json::to_value(&p).map_err(|e| HarnessError::Params(e.to_string()))?;
    Ok((p, echo))
}

/// Runs a registered scenario. `params` overrides the defaults field by field.
pub fn run_scenario(name: &str, params: Option<&Value>) -> Result<ScenarioRun, HarnessError> {
    let start = Instant::now();
    let (report, dumps) = match name {
        "example1" => example1::run(params)?,
        "spiral" => spiral::run(params)?,
        "denjoy_suspension" => denjoy::run(params)?,
        "dyadic_solenoid" => dyadic::run(params)?,
        "rotation_suspension" => rotation::run(params)?,
        _ => return Err(HarnessError::UnknownScenario(name.to_string())),
    };
    Ok(ScenarioRun {
        report,
        dumps,
        runtime: start.elapsed(),
    })
}
