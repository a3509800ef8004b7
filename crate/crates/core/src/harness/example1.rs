//! The planar curve accumulating on `(0, 1/2)`, whose exponent group is `Z`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{parse_params, trace_dump, Dump, Expectation, HarnessError, Provenance, RunReport};
use crate::exponents::{
    build_breaker_sequence, find_f_sequences, probe_exponent, BreakerSpec, FSequence, Orbit,
    PlanarAccumulation, ProbeConfig, SearchConfig, Verdict,
};
use crate::realfield::{RealVector, SymbolBasis};
use crate::torus::frac;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub t_max: f64,
    pub grid: f64,
    /// Index range `[lo, hi]` of the rational breakers `t_i = q i + 1/2`
    /// (odd `i`) and `q i + 3/2` (even `i`).
    pub rational_indices: [usize; 2],
    pub breaker_first_index: usize,
    pub breaker_length: usize,
    pub breaker_t_start: f64,
    pub irrational_targets: [f64; 2],
    pub candidates: Vec<String>,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            t_max: 40.0,
            grid: 0.01,
            rational_indices: [11, 30],
            breaker_first_index: 2000,
            breaker_length: 12,
            breaker_t_start: 32.0,
            irrational_targets: [0.0, 1.0 / 3.0],
            candidates: ["1", "2", "1/2", "1/3", "sqrt2"].map(String::from).to_vec(),
        }
    }
}

/// Times `q i + 1/2` for odd `i` and `q i + 3/2` for even `i`: the orbit
/// values converge while `frac(p/q t)` alternates between `p/2q` and
/// `p/2q + p/q`.
fn rational_breaker(orbit: &dyn Orbit, q: i64, lo: usize, hi: usize) -> FSequence {
    let times: Vec<f64> = (lo..=hi)
        .map(|i| q as f64 * i as f64 + if i % 2 == 1 { 0.5 } else { 1.5 })
        .collect();
    let bounds = times
        .iter()
        .map(|t| 0.5f64.powi(t.floor() as i32 - 1))
        .collect();
    FSequence::new(
        orbit,
        format!("rational breaker q = {q}"),
        times,
        vec![0.0, 0.5],
        Some(bounds),
    )
}

pub(super) fn run(params: Option<&Value>) -> Result<(RunReport, Vec<Dump>), HarnessError> {
    let (p, echo) = parse_params::<Params>(params)?;
    let ctx = Arc::new(SymbolBasis::standard());
    let orbit = PlanarAccumulation;
    let target = [0.0, 0.5];
    let mut ex = Vec::new();

    let g = orbit.eval(0.5);
    ex.push(Expectation::new(
        "g_half",
        Provenance::Derived,
        "g(0.5) = (0.75, 0.5)",
        g == vec![0.75, 0.5],
        json!(g),
        format!("{g:?}"),
    ));
    let worst = (1..=30)
        .map(|n| orbit.distance(&orbit.eval(n as f64 + 0.5), &target) / 0.5f64.powi(n - 1))
        .fold(0.0, f64::max);
    ex.push(Expectation::at_most(
        "half_integer_returns",
        Provenance::Reference,
        "d(f(n + 1/2), (0, 1/2)) <= 2^(1-n) for n = 1..30 (ratio to the bound)",
        worst,
        1.0,
    ));

    let cfg = SearchConfig {
        grid: p.grid,
        ..SearchConfig::default()
    };
    let found = find_f_sequences(&orbit, &target, 2, p.t_max, &cfg);
    ex.push(Expectation::new(
        "search_finds_returns",
        Provenance::Derived,
        "the return search finds two f-sequences converging to (0, 1/2)",
        !found.none_found,
        json!({"sequences": found.sequences.len(), "near_returns": found.near_returns}),
        format!(
            "{} sequences from {} near-returns",
            found.sequences.len(),
            found.near_returns
        ),
    ));
    let mut sequences = found.sequences;

    let mut candidates = Vec::new();
    for c in &p.candidates {
        candidates.push(RealVector::parse(&ctx, c)?);
    }
    let [lo, hi] = p.rational_indices;
    for c in &candidates {
        if let Some(q) = c.as_rational() {
            let den: i64 = q
                .denom()
                .try_into()
                .map_err(|_| HarnessError::Params("denominator too large".into()))?;
            if den > 1
                && !sequences
                    .iter()
                    .any(|s| s.label == format!("rational breaker q = {den}"))
            {
                sequences.push(rational_breaker(&orbit, den, lo, hi));
            }
        }
    }
    for c in candidates.iter().filter(|c| c.as_rational().is_none()) {
        // solve on the untranslated times, then shift by 1/2 onto the returns
        let offset = 0.5;
        let shift = c.eval() * offset;
        let mut spec = BreakerSpec::new(
            format!("kronecker breaker {c}"),
            vec![RealVector::parse(&ctx, "1")?],
            vec![0.0],
        );
        spec.gamma = Some((c.clone(), p.irrational_targets.map(|x| frac(x - shift))));
        spec.first_index = p.breaker_first_index;
        spec.length = p.breaker_length;
        spec.time_offset = offset;
        spec.t_start = p.breaker_t_start;
        spec.limit_point = Some(target.to_vec());
        let b = build_breaker_sequence(&orbit, &spec)?;
        sequences.push(b.fseq);
    }

    let probe = ProbeConfig::default();
    for c in &candidates {
        let report = probe_exponent(&orbit, c, &sequences, &probe);
        let member = c.as_rational().is_some_and(|q| q.is_integer());
        let expected = if member {
            Verdict::Accepted
        } else {
            Verdict::Rejected
        };
        let mut e = Expectation::verdict(
            &format!("verdict {c}"),
            Provenance::Reference,
            &report,
            expected,
        );
        if let (Some(q), Some(r)) = (c.as_rational(), &report.rejection) {
            // clusters at p/2q and p/2q + p/q: separation d_1(p/q, 0)
            let want =
                crate::torus::circle_dist(crate::realfield::rational::rational_to_f64(&q), 0.0);
            let ok = (r.gap - want).abs() <= 2.0 * probe.tol_limit;
            e.passed &= ok;
            e.detail = format!(
                "{}; cluster gap {:.4} (expected {:.4})",
                e.detail, r.gap, want
            );
        }
        ex.push(e);
    }

    let mut orbit_dump = Dump::new("orbit", &["t", "x", "y"]);
    for k in 0..=((p.t_max / p.grid) as usize).min(100_000) {
        let t = k as f64 * p.grid;
        let v = orbit.eval(t);
        orbit_dump.push(vec![t.to_string(), v[0].to_string(), v[1].to_string()]);
    }
    let dumps = vec![orbit_dump, trace_dump("traces", &sequences, &candidates)];
    Ok((RunReport::new("example1", echo, ex), dumps))
}
