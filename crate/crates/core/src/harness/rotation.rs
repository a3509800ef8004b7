//! Suspension of the rotation by `theta`: the conjugacy with the linear
//! flow of frequencies `(theta, 1)`, and the map to the dual solenoid of
//! `<theta, 1>` computed from f-sequences.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{parse_params, Dump, Expectation, HarnessError, Provenance, RunReport};
use crate::circle::{
    linear_flow, mu_rotation, suspension_flow, CircleLift, SuspensionOrbit, SuspensionPoint,
};
use crate::exponents::{build_breaker_sequence, BreakerSpec, ProbeConfig};
use crate::realfield::{RealVector, SymbolBasis};
use crate::solenoid::{semiconjugacy_to_solenoid, SolenoidSystem};
use crate::torus::torus_dist;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub theta: String,
    pub mu_samples: usize,
    pub t_range: f64,
    /// Points at which the map to the solenoid is evaluated.
    pub limit_samples: usize,
    pub first_index: usize,
    pub length: usize,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            theta: "sqrt2/2".into(),
            mu_samples: 10_000,
            t_range: 100.0,
            limit_samples: 20,
            first_index: 4_000_000,
            length: 6,
            seed: 5,
        }
    }
}

pub(super) fn run(params: Option<&Value>) -> Result<(RunReport, Vec<Dump>), HarnessError> {
    let (p, echo) = parse_params::<Params>(params)?;
    let ctx = Arc::new(SymbolBasis::standard());
    let theta = RealVector::parse(&ctx, &p.theta)?;
    let th = theta.eval();
    let lift = CircleLift::rotation(th);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut ex = Vec::new();

    let mut defect = 0.0f64;
    for _ in 0..p.mu_samples {
        let q = SuspensionPoint::new(rng.gen::<f64>(), rng.gen::<f64>());
        let t = rng.gen_range(-p.t_range..p.t_range);
        let lhs = mu_rotation(th, suspension_flow(&lift, t, q));
        let rhs = linear_flow(&[th, 1.0], t, &mu_rotation(th, q));
        defect = defect.max(torus_dist(&lhs, &rhs));
    }
    ex.push(Expectation::at_most(
        "mu_equivariance",
        Provenance::Derived,
        format!(
            "mu(sigma(t, p)) = Phi(t, mu(p)) on {} random (t, p)",
            p.mu_samples
        ),
        defect,
        1e-9,
    ));

    // h_f through f-sequences, compared with mu and with the flow
    let orbit = SuspensionOrbit::new(lift.clone(), SuspensionPoint::new(0.0, 0.0));
    let one = RealVector::parse(&ctx, "1")?;
    let system = SolenoidSystem::new(2, vec![], vec![vec![theta.clone(), one.clone()]])?;
    let probe = ProbeConfig::default();
    let h_f = |q: SuspensionPoint, label: &str| -> Result<Vec<f64>, HarnessError> {
        let m = mu_rotation(th, q);
        let mut spec = BreakerSpec::new(label, vec![theta.clone(), one.clone()], m.to_vec());
        spec.first_index = p.first_index;
        spec.length = p.length;
        spec.limit_point = Some(vec![q.s, q.x]);
        let seq = build_breaker_sequence(&orbit, &spec)?.fseq;
        Ok(semiconjugacy_to_solenoid(&orbit, &system, &seq, &probe)?
            .point
            .stages[0]
            .clone())
    };
    let mut vs_mu = 0.0f64;
    let mut equivariance = 0.0f64;
    let mut dump = Dump::new(
        "limits",
        &["s", "x", "t", "h_s", "h_x", "h_flowed_s", "h_flowed_x"],
    );
    for k in 0..p.limit_samples {
        let q = SuspensionPoint::new(rng.gen::<f64>(), rng.gen::<f64>());
        let t = rng.gen_range(-10.0..10.0);
        let hq = h_f(q, &format!("point {k}"))?;
        vs_mu = vs_mu.max(torus_dist(&hq, &mu_rotation(th, q)));
        let moved = h_f(suspension_flow(&lift, t, q), &format!("flowed point {k}"))?;
        equivariance = equivariance.max(torus_dist(&moved, &linear_flow(&[th, 1.0], t, &hq)));
        dump.push(
            [q.s, q.x, t, hq[0], hq[1], moved[0], moved[1]]
                .iter()
                .map(f64::to_string)
                .collect(),
        );
    }
    ex.push(Expectation::at_most(
        "h_f_matches_mu",
        Provenance::Derived,
        "the solenoid limit of f-sequences equals the mu image",
        vs_mu,
        1e-6,
    ));
    ex.push(Expectation::at_most(
        "h_f_equivariance",
        Provenance::Derived,
        "h_f(sigma(t, p)) = Phi(t, h_f(p))",
        equivariance,
        1e-5,
    ));
    Ok((RunReport::new("rotation_suspension", echo, ex), vec![dump]))
}
