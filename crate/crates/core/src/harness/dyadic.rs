//! The dyadic rationals: B-sequence, dual solenoid and its linear flow.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{parse_params, Dump, Expectation, HarnessError, Provenance, RunReport};
use crate::groups::build_b_sequence;
use crate::realfield::{rational::ratio, RealVector, SymbolBasis};
use crate::solenoid::{point_dist, LinearFlowSpec, SolenoidSystem};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub depth: usize,
    pub samples: usize,
    pub t_range: f64,
    pub cocycle_samples: usize,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            depth: 8,
            samples: 10_000,
            t_range: 100.0,
            cocycle_samples: 1000,
            seed: 11,
        }
    }
}

pub(super) fn run(params: Option<&Value>) -> Result<(RunReport, Vec<Dump>), HarnessError> {
    let (p, echo) = parse_params::<Params>(params)?;
    if !(2..=60).contains(&p.depth) {
        return Err(HarnessError::Params("depth must be in 2..=60".into()));
    }
    let ctx = Arc::new(SymbolBasis::standard());
    let elements: Vec<RealVector> = (0..p.depth)
        .map(|k| {
            if k == 0 {
                Ok(RealVector::zero(&ctx))
            } else {
                RealVector::rational(&ctx, ratio(1, 1i64 << k))
            }
        })
        .collect::<Result<_, _>>()?;
    let seq = build_b_sequence(&[RealVector::parse(&ctx, "1")?], &elements)?;
    let mut ex = Vec::new();

    let matrices: Vec<String> = seq.matrices().iter().map(|m| format!("{m:?}")).collect();
    let all_two = seq
        .matrices()
        .iter()
        .all(|m| m.len() == 1 && m[0] == vec![2.into()]);
    ex.push(Expectation::new(
        "bonding_matrices",
        Provenance::Derived,
        "every bonding matrix is [2]",
        all_two && matrices.len() == p.depth - 1,
        json!(matrices),
        format!("{} matrices", matrices.len()),
    ));
    ex.push(Expectation::new(
        "stage_identities",
        Provenance::Derived,
        "b^i = M_i b^(i+1) exactly at every stage",
        seq.verify().is_ok(),
        json!(seq.verify().err().map(|(i, r)| [i, r])),
        "",
    ));

    let system = SolenoidSystem::from_b_sequence(&seq, None)?;
    let dual = system.dual_group()?;
    let prefix = seq.group()?;
    ex.push(Expectation::new(
        "dual_group",
        Provenance::Derived,
        "the group generated by all stage bases equals the prefix group",
        dual == prefix,
        json!(dual
            .basis()
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()),
        "",
    ));

    let flow = LinearFlowSpec::new(system);
    let at_one = flow.pi_solenoid(1.0);
    let want: Vec<Vec<f64>> = (0..p.depth)
        .map(|i| vec![if i == 0 { 0.0 } else { 0.5f64.powi(i as i32) }])
        .collect();
    ex.push(Expectation::new(
        "pi_at_one",
        Provenance::Derived,
        "pi(1) has stage coordinates 0, 1/2, 1/4, ...",
        at_one.stages == want,
        json!(at_one.stages),
        "",
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut residual = 0.0f64;
    let mut samples = Dump::new("pi", &["t", "stage", "coordinate"]);
    for k in 0..p.samples {
        let t = -p.t_range + 2.0 * p.t_range * k as f64 / (p.samples.max(2) - 1) as f64;
        let x = flow.pi_solenoid(t);
        residual = residual.max(flow.system.residual(&x).1);
        if k % 10 == 0 {
            for (i, s) in x.stages.iter().enumerate() {
                samples.push(vec![t.to_string(), (i + 1).to_string(), s[0].to_string()]);
            }
        }
    }
    ex.push(Expectation::at_most(
        "consistency_residual",
        Provenance::Derived,
        format!(
            "max compatibility residual of pi(t) over {} times",
            p.samples
        ),
        residual,
        1e-9,
    ));

    let mut cocycle = 0.0f64;
    for _ in 0..p.cocycle_samples {
        let (s, t, u) = (
            rng.gen_range(-p.t_range..p.t_range),
            rng.gen_range(-p.t_range..p.t_range),
            rng.gen_range(-p.t_range..p.t_range),
        );
        let x = flow.pi_solenoid(u);
        let once = flow.flow_step(t + s, &x)?;
        let twice = flow.flow_step(t, &flow.flow_step(s, &x)?)?;
        cocycle = cocycle.max(point_dist(&once, &twice));
    }
    ex.push(Expectation::at_most(
        "flow_cocycle",
        Provenance::Trivial,
        "Phi(t, Phi(s, x)) = Phi(t + s, x) on random triples",
        cocycle,
        1e-9,
    ));

    Ok((RunReport::new("dyadic_solenoid", echo, ex), vec![samples]))
}
