//! Membership probes for candidate exponents.

use serde::Serialize;
use serde_json::{json, Value};

use super::fseq::FSequence;
use super::orbit::Orbit;
use super::ExponentError;
use crate::realfield::RealVector;
use crate::torus::{circle_center, circle_clusters, circle_dist, circle_spread, frac};

pub const TOL_LIMIT: f64 = 1e-3;
pub const GAP_MIN: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
pub struct ProbeConfig {
    /// Largest tail spread of a circle trace still counted as convergent.
    pub tol_limit: f64,
    /// Smallest separation of two clusters counted as an oscillation.
    pub gap_min: f64,
    /// Tail diameter allowed when verifying a sequence is an f-sequence.
    pub tol_evidence: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            tol_limit: TOL_LIMIT,
            gap_min: GAP_MIN,
            tol_evidence: TOL_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Accepted,
    Rejected,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct Rejection {
    pub sequence: String,
    pub gap: f64,
    pub clusters: Vec<f64>,
    pub cluster_sizes: Vec<usize>,
    pub orbit_tail_diameter: f64,
}

#[derive(Debug, Clone)]
pub struct ExponentProbeReport {
    pub candidate: RealVector,
    pub verdict: Verdict,
    /// Largest tail spread of `frac(candidate * t_i)` over verified sequences.
    pub max_spread: Option<f64>,
    pub rejection: Option<Rejection>,
    pub verified: usize,
    pub skipped: Vec<String>,
}

impl ExponentProbeReport {
    pub fn to_json(&self) -> Value {
        json!({
            "candidate": self.candidate.to_string(),
            "verdict": self.verdict,
            "max_spread": self.max_spread,
            "rejection": self.rejection,
            "verified_sequences": self.verified,
            "skipped": self.skipped,
        })
    }
}

/// Tail values of `frac(alpha * t_i)`.
pub fn trace(alpha: f64, seq: &FSequence) -> Vec<f64> {
    seq.tail_times().iter().map(|&t| frac(alpha * t)).collect()
}

/// Probes `candidate` against every sequence that independently passes the
/// f-sequence check. Semi-orbits ignore sequences with negative times.
pub fn probe_exponent(
    orbit: &dyn Orbit,
    candidate: &RealVector,
    sequences: &[FSequence],
    cfg: &ProbeConfig,
) -> ExponentProbeReport {
    let alpha = candidate.eval();
    let mut max_spread: Option<f64> = None;
    let mut rejection: Option<Rejection> = None;
    let mut skipped = Vec::new();
    let mut verified = 0;
    for seq in sequences {
        if orbit.forward_only() && seq.times.iter().any(|&t| t < 0.0) {
            skipped.push(format!("{}: negative times on a semi-orbit", seq.label));
            continue;
        }
        let check = seq.cauchy_check(orbit, cfg.tol_evidence);
        if !check.passed {
            skipped.push(format!("{}: {}", seq.label, check.detail));
            continue;
        }
        verified += 1;
        let values = trace(alpha, seq);
        let spread = circle_spread(&values);
        max_spread = Some(max_spread.map_or(spread, |m: f64| m.max(spread)));
        let clusters = circle_clusters(&values, cfg.gap_min);
        if clusters.len() >= 2 && clusters.iter().all(|c| c.members >= 2) {
            let centers: Vec<f64> = clusters.iter().map(|c| c.center).collect();
            let mut gap = f64::INFINITY;
            for i in 0..centers.len() {
                for j in i + 1..centers.len() {
                    gap = gap.min(circle_dist(centers[i], centers[j]));
                }
            }
            if rejection.as_ref().is_none_or(|r| gap > r.gap) {
                rejection = Some(Rejection {
                    sequence: seq.label.clone(),
                    gap,
                    clusters: centers,
                    cluster_sizes: clusters.iter().map(|c| c.members).collect(),
                    orbit_tail_diameter: check.tail_diameter,
                });
            }
        }
    }
    let verdict = if rejection.is_some() {
        Verdict::Rejected
    } else if verified > 0 && max_spread.is_some_and(|s| s <= cfg.tol_limit) {
        Verdict::Accepted
    } else {
        Verdict::Inconclusive
    };
    ExponentProbeReport {
        candidate: candidate.clone(),
        verdict,
        max_spread,
        rejection,
        verified,
        skipped,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InducedValue {
    pub sequence: String,
    pub value: f64,
    pub spread: f64,
}

/// Values of the induced circle map at the limit points of the given
/// presentations. Presentations with the same target must agree to within
/// `2 tol_limit`.
pub fn induced_circle_map(
    orbit: &dyn Orbit,
    alpha: &RealVector,
    presentations: &[FSequence],
    cfg: &ProbeConfig,
) -> Result<Vec<InducedValue>, ExponentError> {
    let a = alpha.eval();
    let mut out: Vec<InducedValue> = Vec::new();
    for seq in presentations {
        let values = trace(a, seq);
        let spread = circle_spread(&values);
        if spread > cfg.tol_limit {
            return Err(ExponentError::NonConvergent {
                label: seq.label.clone(),
                spread,
            });
        }
        out.push(InducedValue {
            sequence: seq.label.clone(),
            value: circle_center(&values),
            spread,
        });
    }
    for i in 0..presentations.len() {
        for j in i + 1..presentations.len() {
            let same = orbit.distance(&presentations[i].target, &presentations[j].target)
                <= cfg.tol_evidence;
            let gap = circle_dist(out[i].value, out[j].value);
            if same && gap > 2.0 * cfg.tol_limit {
                return Err(ExponentError::IllDefined {
                    first: out[i].sequence.clone(),
                    second: out[j].sequence.clone(),
                    gap,
                });
            }
        }
    }
    Ok(out)
}
