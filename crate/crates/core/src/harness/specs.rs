//! JSON descriptions of orbits, for the command line.

use std::sync::Arc;

use serde::Deserialize;
use serde_json::Value;

use super::HarnessError;
use crate::circle::{CircleLift, SuspensionOrbit, SuspensionPoint};
use crate::exponents::{LinearTorusOrbit, Orbit, PlanarAccumulation, SpiralOrbit};
use crate::realfield::{RealVector, SymbolBasis};

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OrbitSpec {
    LinearTorus {
        frequencies: Vec<String>,
        #[serde(default)]
        start: Option<Vec<f64>>,
    },
    Planar,
    Spiral {
        alpha: String,
        beta: String,
    },
    Suspension {
        lift: Value,
        #[serde(default)]
        base: Option<[f64; 2]>,
    },
}

/// An orbit with an owned evaluator.
pub struct BuiltOrbit {
    pub orbit: Box<dyn Orbit>,
    /// Frequencies or generators named by the spec, when any.
    pub generators: Vec<RealVector>,
}

fn real(ctx: &Arc<SymbolBasis>, s: &str) -> Result<RealVector, HarnessError> {
    Ok(RealVector::parse(ctx, s)?)
}

impl OrbitSpec {
    pub fn from_json(v: &Value) -> Result<Self, HarnessError> {
        serde_json::from_value(v.clone()).map_err(|e| HarnessError::Params(e.to_string()))
    }

    pub fn build(&self) -> Result<BuiltOrbit, HarnessError> {
        let ctx = Arc::new(SymbolBasis::standard());
        Ok(match self {
            OrbitSpec::LinearTorus { frequencies, start } => {
                let gens = frequencies
                    .iter()
                    .map(|f| real(&ctx, f))
                    .collect::<Result<Vec<_>, _>>()?;
                let start = start.clone().unwrap_or_else(|| vec![0.0; gens.len()]);
                if start.len() != gens.len() {
                    return Err(HarnessError::Params(
                        "start and frequencies differ in length".into(),
                    ));
                }
                BuiltOrbit {
                    orbit: Box::new(LinearTorusOrbit::new(
                        start,
                        gens.iter().map(RealVector::eval).collect(),
                    )),
                    generators: gens,
                }
            }
            OrbitSpec::Planar => BuiltOrbit {
                orbit: Box::new(PlanarAccumulation),
                generators: vec![real(&ctx, "1")?],
            },
            OrbitSpec::Spiral { alpha, beta } => {
                let (a, b) = (real(&ctx, alpha)?, real(&ctx, beta)?);
                BuiltOrbit {
                    orbit: Box::new(SpiralOrbit {
                        alpha: a.eval(),
                        beta: b.eval(),
                    }),
                    generators: vec![a, b],
                }
            }
            OrbitSpec::Suspension { lift, base } => {
                let lift = CircleLift::from_json(lift)?;
                let [s, x] = base.unwrap_or([0.0, 0.0]);
                BuiltOrbit {
                    orbit: Box::new(SuspensionOrbit::new(lift, SuspensionPoint::new(s, x))),
                    generators: Vec::new(),
                }
            }
        })
    }
}
