//! CPD-weights: multiplying the weights by `√k` and applying `Δ²` sends a
//! charge `Σ a_i δ_{r_i}` to `Σ a_i (1 − k r_i)² δ_{k r_i}`, so the only
//! sign changes available come from annihilating one atom with `k = 1/r_i`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::charge::{Charge, ChargeError, SubnormalVerdict};
use crate::hankel::{k_hyponormality_test, HankelError, HankelOverall};
use crate::linalg::PsdVerdict;
use crate::rational::{format_rational, Rational, Sign};
use crate::seqcalc::{completely_monotone_check, delta_pow, weights_from_moments, MomentSeq, SeqError, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CpdError {
    #[error("empty charge")]
    EmptyCharge,
    #[error("multiplier k = {0} is not positive")]
    NonpositiveMultiplier(String),
    #[error("candidate k = {0} failed verification")]
    VerificationFailed(String),
    #[error(transparent)]
    Charge(#[from] ChargeError),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Hankel(#[from] HankelError),
}

/// `Δ²` after multiplying the weights by `√k`: atoms `k r_i` with densities
/// `a_i (1 − k r_i)²`; an atom sent to 1 vanishes.
pub fn scaled_delta2_charge(c: &Charge, k: &Rational) -> Result<Charge, CpdError> {
    if !k.is_positive() {
        return Err(CpdError::NonpositiveMultiplier(format_rational(k)));
    }
    Ok(c.scale_positions(k)?.delta2_transform())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CpdStatus {
    /// All densities share a sign; every multiplier works.
    AlreadySubnormal,
    /// Exact `k` values (weight multipliers `√k`), ascending.
    Multipliers {
        #[serde(with = "crate::rational::serde_vec_str")]
        ks: Vec<Rational>,
    },
    NoMultiplier,
}

/// Whether the multiplier set is known to be complete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Completeness {
    Exact,
    /// The charge is a truncation; an atom in the tail could change the census.
    RelativeToRetainedAtoms,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CpdEvidence {
    #[serde(with = "crate::rational::serde_str")]
    pub k: Rational,
    pub transformed: Charge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CpdVerdict {
    pub status: CpdStatus,
    pub evidence: Vec<CpdEvidence>,
    pub completeness: Completeness,
}

impl CpdVerdict {
    pub fn multipliers(&self) -> &[Rational] {
        match &self.status {
            CpdStatus::Multipliers { ks } => ks,
            _ => &[],
        }
    }
}

fn is_one_signed(c: &Charge) -> bool {
    c.is_empty() || c.is_subnormal_charge() == Ok(SubnormalVerdict::Subnormal)
}

/// Multiplier set from the sign census: two opposite atoms give `{1/r₊, 1/r₋}`,
/// a single odd-signed atom at `r*` among more gives `{1/r*}`, and two or
/// more of each sign give none. Every returned `k` is checked.
pub fn find_cpd_weight_multipliers(c: &Charge) -> Result<CpdVerdict, CpdError> {
    if c.is_empty() {
        return Err(CpdError::EmptyCharge);
    }
    let completeness = if c.is_truncated() {
        Completeness::RelativeToRetainedAtoms
    } else {
        Completeness::Exact
    };
    let census = c.sign_census();
    let odd_one = |sign: Sign| {
        c.atoms()
            .iter()
            .find(|a| Sign::of(&a.density) == sign)
            .map(|a| a.position.recip())
    };
    let mut ks = if census.plus == 0 || census.minus == 0 {
        let transformed = scaled_delta2_charge(c, &Rational::one())?;
        return Ok(CpdVerdict {
            status: CpdStatus::AlreadySubnormal,
            evidence: vec![CpdEvidence {
                k: Rational::one(),
                transformed,
            }],
            completeness,
        });
    } else if census.plus == 1 && census.minus == 1 {
        c.positions().map(|r| r.recip()).collect::<Vec<_>>()
    } else if census.minus == 1 {
        odd_one(Sign::Minus).into_iter().collect()
    } else if census.plus == 1 {
        odd_one(Sign::Plus).into_iter().collect()
    } else {
        Vec::new()
    };
    ks.sort();
    let mut evidence = Vec::with_capacity(ks.len());
    for k in &ks {
        let transformed = scaled_delta2_charge(c, k)?;
        if !is_one_signed(&transformed) {
            return Err(CpdError::VerificationFailed(format_rational(k)));
        }
        evidence.push(CpdEvidence {
            k: k.clone(),
            transformed,
        });
    }
    let status = if ks.is_empty() {
        CpdStatus::NoMultiplier
    } else {
        CpdStatus::Multipliers { ks }
    };
    Ok(CpdVerdict {
        status,
        evidence,
        completeness,
    })
}

/// Does `√k`-scaling followed by `Δ²` leave a one-signed charge?
pub fn is_cpd_multiplier(c: &Charge, k: &Rational) -> Result<bool, CpdError> {
    Ok(is_one_signed(&scaled_delta2_charge(c, k)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum NotCpdReason {
    /// `Δ²γ_0 = 0` while a later term is not.
    ZeroInitialTerm { index: usize },
    /// `Δ²γ_{n+1}/Δ²γ_n ≤ 0`.
    NonpositiveRatio { index: usize },
    /// `(k+1)×(k+1)` Hankel matrix at base `m` of the normalized `±Δ²γ` is not PSD.
    Hankel {
        k: usize,
        m: usize,
        minor: Vec<usize>,
        #[serde(with = "crate::rational::serde_str")]
        value: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CpdWeightsVerdict {
    /// Holds up to `horizon` with Hankel order `depth`; `orientation` is the
    /// sign taken on `Δ²γ`.
    CpdWeights {
        degenerate: bool,
        orientation: Sign,
        depth: usize,
        horizon: usize,
    },
    NotCpdWeights(NotCpdReason),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CpdWeightsReport {
    pub verdict: CpdWeightsVerdict,
    /// Complete monotonicity of the normalized `±Δ²γ`. Informational: a
    /// subnormal shift with Berger measure reaching past 1 fails it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completely_monotone: Option<Verdict>,
}

impl CpdWeightsReport {
    pub fn is_cpd_weights(&self) -> bool {
        matches!(self.verdict, CpdWeightsVerdict::CpdWeights { .. })
    }
}

/// Decides whether `±Δ²γ`, normalized, is a moment sequence of a subnormal
/// shift on the window: positive ratios, then PSD Hankel matrices of order
/// `depth + 1` at every base `m ≤ horizon`. An identically zero `Δ²γ` counts
/// as CPD-weights.
pub fn is_cpd_weights(m: &MomentSeq, horizon: usize, depth: usize) -> Result<CpdWeightsReport, CpdError> {
    let depth = depth.max(1);
    let d2 = delta_pow(m, 2);
    let window = d2.prefix(horizon + 2 * depth + 2)?;
    let Some(first) = window.iter().position(|v| !v.is_zero()) else {
        let verdict = CpdWeightsVerdict::CpdWeights {
            degenerate: true,
            orientation: Sign::Zero,
            depth,
            horizon,
        };
        return Ok(CpdWeightsReport {
            verdict,
            completely_monotone: None,
        });
    };
    if first > 0 {
        let verdict = CpdWeightsVerdict::NotCpdWeights(NotCpdReason::ZeroInitialTerm { index: first });
        return Ok(CpdWeightsReport {
            verdict,
            completely_monotone: None,
        });
    }
    let orientation = Sign::of(&window[0]);
    let scale = window[0].clone();
    let normalized: Vec<Rational> = window.iter().map(|v| v / &scale).collect();
    let t = MomentSeq::from_values(normalized);
    if let Err(e) = weights_from_moments(&t, horizon) {
        return match e {
            SeqError::NonpositiveRatio(index) | SeqError::ZeroMoment(index) => Ok(CpdWeightsReport {
                verdict: CpdWeightsVerdict::NotCpdWeights(NotCpdReason::NonpositiveRatio { index }),
                completely_monotone: None,
            }),
            other => Err(other.into()),
        };
    }
    let cm = completely_monotone_check(&t, depth, horizon)?;
    let report = k_hyponormality_test(&t, depth, horizon)?;
    let verdict = match (&report.overall, report.first_failure()) {
        (HankelOverall::NotPsd { m }, Some(entry)) => match &entry.verdict {
            PsdVerdict::NotPsd { minor, value } => CpdWeightsVerdict::NotCpdWeights(NotCpdReason::Hankel {
                k: depth,
                m: *m,
                minor: minor.clone(),
                value: value.clone(),
            }),
            _ => unreachable!("first failure is not PSD"),
        },
        _ => CpdWeightsVerdict::CpdWeights {
            degenerate: false,
            orientation,
            depth,
            horizon,
        },
    };
    Ok(CpdWeightsReport {
        verdict,
        completely_monotone: Some(cm),
    })
}
