//! Suspension of a Denjoy map: its exponent group is `<theta, 1>`, and every
//! non-member is refuted by a sequence along which the `1` and `theta`
//! traces converge while the candidate's trace alternates.

use std::sync::Arc;

use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{parse_params, trace_dump, Dump, Expectation, HarnessError, Provenance, RunReport};
use crate::circle::{
    build_denjoy, linear_flow, rotation_number, suspension_flow, suspension_semiconjugacy,
    CircleLift, SuspensionOrbit, SuspensionPoint,
};
use crate::exponents::{
    build_breaker_sequence, probe_exponent, BreakerSpec, ExponentError, ProbeConfig, Verdict,
};
use crate::groups::FinGenSubgroup;
use crate::realfield::{rational::parse_rational, RealVector, SymbolBasis};
use crate::torus::{frac, torus_dist};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub theta: String,
    pub lambda: String,
    pub truncation: usize,
    /// Limit of the `theta` trace; should avoid the tracked orbit points.
    pub zeta: f64,
    /// Limit of the `theta` trace for the extra convergent sequence.
    pub extra_zeta: f64,
    pub first_index: usize,
    pub length: usize,
    pub candidates: Vec<String>,
    pub rotation_steps: Vec<u64>,
    pub samples: usize,
    pub equivariance_samples: usize,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            theta: "sqrt2/2".into(),
            lambda: "1/2".into(),
            truncation: 40,
            zeta: 0.5,
            extra_zeta: 0.3,
            first_index: 10_000,
            length: 10,
            candidates: [
                "1",
                "theta",
                "1 + theta",
                "2*theta - 1",
                "1/2",
                "sqrt3",
                "(1 + theta)/2",
            ]
            .map(String::from)
            .to_vec(),
            rotation_steps: vec![100, 1000, 10_000],
            samples: 1000,
            equivariance_samples: 1000,
            seed: 7,
        }
    }
}

/// Candidate expressions may use `theta` for the rotation number.
fn parse_candidate(
    ctx: &Arc<SymbolBasis>,
    src: &str,
    theta: &str,
) -> Result<RealVector, HarnessError> {
    Ok(RealVector::parse(
        ctx,
        &src.replace("theta", &format!("({theta})")),
    )?)
}

/// Targets of the candidate trace: independent of `{1, theta}` it may go
/// anywhere; otherwise `q gamma = p + r theta` forces
/// `frac(gamma t) -> (r zeta + j) / q`, and two values of `j` are used.
fn breaker_targets(
    one: &RealVector,
    theta: &RealVector,
    gamma: &RealVector,
    zeta: f64,
) -> Result<Option<[f64; 2]>, HarnessError> {
    let g = FinGenSubgroup::new(one.basis(), vec![one.clone(), theta.clone(), gamma.clone()])?;
    let Some(rel) = g.relations().first() else {
        return Ok(Some([0.0, 0.5]));
    };
    let sign: i64 = if rel[2].is_negative() { -1 } else { 1 };
    let q = (&rel[2] * sign).to_i64().unwrap_or(0);
    if q <= 1 {
        return Ok(None);
    }
    let r = -(&rel[1] * sign).to_f64().unwrap_or(0.0);
    let base = frac(r * zeta / q as f64);
    Ok(Some([base, frac(base + 1.0 / q as f64)]))
}

pub(super) fn run(params: Option<&Value>) -> Result<(RunReport, Vec<Dump>), HarnessError> {
    let (p, echo) = parse_params::<Params>(params)?;
    let ctx = Arc::new(SymbolBasis::standard());
    let theta = RealVector::parse(&ctx, &p.theta)?;
    let one = RealVector::parse(&ctx, "1")?;
    let lambda = parse_rational(&p.lambda)?;
    let map = Arc::new(build_denjoy(&theta, &lambda, p.truncation)?);
    let th = map.theta_value();
    let lift = CircleLift::denjoy(map.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut ex = Vec::new();

    // the map itself
    ex.push(Expectation::at_most(
        "tail_bound",
        Provenance::Derived,
        "truncation tail 2c lambda^(N+1)/(1 - lambda)",
        map.tail_bound(),
        crate::circle::TOL_DENJOY,
    ));
    let xs: Vec<f64> = (0..p.samples).map(|_| rng.gen::<f64>()).collect();
    ex.push(Expectation::at_most(
        "semiconjugacy_defect",
        Provenance::Derived,
        format!("max d(h(f(x)), h(x) + theta) over {} samples", p.samples),
        map.semiconjugacy_defect(&xs),
        1e-6,
    ));
    let (a0, b0) = map.interval(0).expect("I_0 exists");
    ex.push(Expectation::new(
        "collapse_endpoints",
        Provenance::Trivial,
        "h identifies the endpoints of I_0",
        map.collapse(a0) == map.collapse(b0),
        json!([map.collapse(a0), map.collapse(b0)]),
        format!("I_0 = [{a0}, {b0})"),
    ));
    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    let monotone = sorted
        .windows(2)
        .all(|w| map.collapse(w[0]) <= map.collapse(w[1]) + 1e-15);
    ex.push(Expectation::new(
        "collapse_monotone",
        Provenance::Trivial,
        "h is nondecreasing on samples",
        monotone,
        json!(monotone),
        "",
    ));
    let mut worst = 0.0f64;
    let mut estimates = Vec::new();
    for &n in &p.rotation_steps {
        let r = rotation_number(&lift, 0.0, n)?;
        worst = worst.max((r.estimate - th).abs() / r.error_bound);
        estimates.push(json!({"n": n, "estimate": r.estimate, "error_bound": r.error_bound}));
    }
    ex.push(Expectation::new(
        "rotation_number",
        Provenance::Derived,
        "rotation number within 2/n of theta",
        worst <= 1.0,
        json!(estimates),
        format!("worst |estimate - theta| n / 2 = {worst:.3e}"),
    ));

    // the suspension and its semiconjugacy onto the linear flow
    let base = SuspensionPoint::new(0.0, 0.0);
    let mut defect = 0.0f64;
    for _ in 0..p.equivariance_samples {
        let q = SuspensionPoint::new(rng.gen::<f64>(), rng.gen::<f64>());
        let t = rng.gen_range(-50.0..50.0);
        let lhs = suspension_semiconjugacy(&map, suspension_flow(&lift, t, q), base);
        let rhs = linear_flow(&[th, 1.0], t, &suspension_semiconjugacy(&map, q, base));
        defect = defect.max(torus_dist(&lhs, &rhs));
    }
    ex.push(Expectation::at_most(
        "semiconjugacy_equivariance",
        Provenance::Derived,
        "g(sigma(t, p)) = Phi(t, g(p)) on random (t, p)",
        defect,
        1e-5,
    ));

    let orbit = SuspensionOrbit::new(lift.clone(), base);
    let limit = vec![0.0, map.embed(p.zeta)];
    let probe = ProbeConfig::default();
    let freqs = vec![one.clone(), theta.clone()];
    let mut sequences = Vec::new();
    let mut extra = BreakerSpec::new("convergent", freqs.clone(), vec![0.0, p.extra_zeta]);
    extra.first_index = p.first_index;
    extra.length = p.length;
    extra.limit_point = Some(vec![0.0, map.embed(p.extra_zeta)]);
    sequences.push(build_breaker_sequence(&orbit, &extra)?.fseq);

    let group = FinGenSubgroup::new(&ctx, freqs.clone())?;
    let mut candidates = Vec::new();
    let mut members = Vec::new();
    for src in &p.candidates {
        let c = parse_candidate(&ctx, src, &p.theta)?;
        let member = group.contains(&c)?;
        let targets = breaker_targets(&one, &theta, &c, p.zeta)?;
        let mut spec = BreakerSpec::new(format!("breaker {c}"), freqs.clone(), vec![0.0, p.zeta]);
        spec.first_index = p.first_index;
        spec.length = p.length;
        spec.limit_point = Some(limit.clone());
        if member {
            // no admissible alternating targets exist; check the builder agrees
            spec.gamma = Some((c.clone(), [0.0, 0.5]));
            let refused = matches!(
                build_breaker_sequence(&orbit, &spec),
                Err(ExponentError::NotFound(_))
            );
            ex.push(Expectation::new(
                &format!("member breaker refused {c}"),
                Provenance::Derived,
                format!("no breaker exists for the member {c}"),
                refused && targets.is_none(),
                json!(refused),
                "",
            ));
        } else if let Some(t) = targets {
            spec.gamma = Some((c.clone(), t));
            sequences.push(build_breaker_sequence(&orbit, &spec)?.fseq);
        }
        candidates.push(c.clone());
        members.push(member);
    }

    for (c, &member) in candidates.iter().zip(&members) {
        let report = probe_exponent(&orbit, c, &sequences, &probe);
        let want = if member {
            Verdict::Accepted
        } else {
            Verdict::Rejected
        };
        let mut e = Expectation::verdict(
            &format!("verdict {c}"),
            Provenance::Reference,
            &report,
            want,
        );
        if let Some(r) = &report.rejection {
            let s = sequences
                .iter()
                .find(|s| s.label == r.sequence)
                .expect("evidence is one of the inputs");
            let check = s.cauchy_check(&orbit, probe.tol_evidence);
            e.passed &= check.passed;
            e.detail = format!("{}; evidence {}: {}", e.detail, r.sequence, check.detail);
        }
        ex.push(e);
    }

    let mut intervals = Dump::new("intervals", &["n", "start", "end", "orbit_point"]);
    for n in -(p.truncation as i64)..=p.truncation as i64 {
        let (a, b) = map.interval(n).expect("tracked");
        intervals.push(vec![
            n.to_string(),
            a.to_string(),
            b.to_string(),
            map.collapse(a).to_string(),
        ]);
    }
    let dumps = vec![intervals, trace_dump("traces", &sequences, &candidates)];
    Ok((RunReport::new("denjoy_suspension", echo, ex), dumps))
}
