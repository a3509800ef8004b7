//! The spiral between two invariant circles: forward returns see only
//! `alpha`, backward returns only `beta`, so the full orbit has trivial
//! exponent group.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{parse_params, trace_dump, Dump, Expectation, HarnessError, Provenance, RunReport};
use crate::exponents::{
    build_breaker_sequence, find_f_sequences, probe_exponent, BreakerSpec, Direction, Forward,
    Orbit, ProbeConfig, SearchConfig, SpiralOrbit, Verdict,
};
use crate::groups::rational_rank;
use crate::realfield::{RealVector, SymbolBasis};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub alpha: String,
    pub beta: String,
    pub t_max: f64,
    pub grid: f64,
    pub breaker_first_index: usize,
    pub breaker_length: usize,
    pub breaker_t_start: f64,
    pub breaker_targets: [f64; 2],
}

impl Default for Params {
    fn default() -> Self {
        Params {
            alpha: "1".into(),
            beta: "sqrt2".into(),
            t_max: 40.0,
            grid: 0.01,
            breaker_first_index: 2000,
            breaker_length: 12,
            breaker_t_start: 30.0,
            breaker_targets: [0.0, 0.5],
        }
    }
}

pub(super) fn run(params: Option<&Value>) -> Result<(RunReport, Vec<Dump>), HarnessError> {
    let (p, echo) = parse_params::<Params>(params)?;
    let ctx = Arc::new(SymbolBasis::standard());
    let alpha = RealVector::parse(&ctx, &p.alpha)?;
    let beta = RealVector::parse(&ctx, &p.beta)?;
    if rational_rank(&[alpha.clone(), beta.clone()]) != 2 {
        return Err(HarnessError::Params(
            "alpha and beta must be rationally independent".into(),
        ));
    }
    let orbit = SpiralOrbit {
        alpha: alpha.eval(),
        beta: beta.eval(),
    };
    let mut ex = Vec::new();

    let f0 = orbit.eval(0.0);
    ex.push(Expectation::new(
        "f0",
        Provenance::Trivial,
        "f(0) = (0, 1/2)",
        f0[0].abs() < 1e-12 && (f0[1] - 0.5).abs() < 1e-15,
        json!(f0),
        format!("{f0:?}"),
    ));
    let (hi, lo) = (SpiralOrbit::radius(40.0), SpiralOrbit::radius(-40.0));
    ex.push(Expectation::new(
        "radius_asymptotes",
        Provenance::Trivial,
        "r(t) -> 1 as t -> +inf and -> 0 as t -> -inf",
        1.0 - hi < 1e-15 && lo < 1e-15,
        json!([hi, lo]),
        format!("r(40) = {hi}, r(-40) = {lo:.3e}"),
    ));

    let outer = orbit.outer_limit();
    let inner = orbit.inner_limit();
    let cfg = SearchConfig {
        grid: p.grid,
        ..SearchConfig::default()
    };
    let found = find_f_sequences(&orbit, &outer, 2, p.t_max, &cfg);
    ex.push(Expectation::new(
        "forward_returns",
        Provenance::Derived,
        "the return search finds forward f-sequences to the outer circle",
        !found.none_found,
        json!({"sequences": found.sequences.len(), "near_returns": found.near_returns}),
        format!("{} sequences", found.sequences.len()),
    ));
    let mut sequences = found.sequences;

    let mut fwd = BreakerSpec::new(
        format!("forward breaker {beta}"),
        vec![alpha.clone()],
        vec![0.0],
    );
    fwd.gamma = Some((beta.clone(), p.breaker_targets));
    fwd.first_index = p.breaker_first_index;
    fwd.length = p.breaker_length;
    fwd.t_start = p.breaker_t_start;
    fwd.limit_point = Some(outer.clone());
    sequences.push(build_breaker_sequence(&orbit, &fwd)?.fseq);

    let mut bwd = BreakerSpec::new(
        format!("backward breaker {alpha}"),
        vec![beta.clone()],
        vec![0.0],
    );
    bwd.gamma = Some((alpha.clone(), p.breaker_targets));
    bwd.first_index = p.breaker_first_index;
    bwd.length = p.breaker_length;
    bwd.t_start = p.breaker_t_start;
    bwd.direction = Direction::Backward;
    bwd.limit_point = Some(inner.clone());
    sequences.push(build_breaker_sequence(&orbit, &bwd)?.fseq);

    let probe = ProbeConfig::default();
    let semi = Forward(&orbit);
    let cases = [
        ("forward", &semi as &dyn Orbit, &alpha, Verdict::Accepted),
        ("forward", &semi, &beta, Verdict::Rejected),
        ("full", &orbit, &alpha, Verdict::Rejected),
        ("full", &orbit, &beta, Verdict::Rejected),
    ];
    for (which, o, c, want) in cases {
        let report = probe_exponent(o, c, &sequences, &probe);
        ex.push(Expectation::verdict(
            &format!("{which} {c}"),
            Provenance::Reference,
            &report,
            want,
        ));
    }

    let mut orbit_dump = Dump::new("orbit", &["t", "angle", "r"]);
    let n = (p.t_max / p.grid) as i64;
    for k in -n..=n {
        let t = k as f64 * p.grid;
        let v = orbit.eval(t);
        orbit_dump.push(vec![t.to_string(), v[0].to_string(), v[1].to_string()]);
    }
    let dumps = vec![orbit_dump, trace_dump("traces", &sequences, &[alpha, beta])];
    Ok((RunReport::new("spiral", echo, ex), dumps))
}
