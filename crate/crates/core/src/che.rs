//! Completely hyperexpansive shifts with atomic data: the charge
//! `Cδ_1 − σ`, its Lévy–Khinchin data, the `Δγ` measure, the integrability
//! test `∫ dμ/(1−x) < ∞`, and the `Q_n` representation.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::charge::{Charge, ChargeError};
use crate::rational::{format_rational, int, pow, Rational};
use crate::seqcalc::{delta, MomentSeq};

/// Moments checked exactly when validating a representation.
pub const VALIDATION_HORIZON: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheError {
    #[error("atom at 1 where only [0, 1) is allowed")]
    AtomAtOne,
    #[error("atom at {0} outside [0, 1]")]
    OutsideUnitInterval(String),
    #[error("density {0} is not positive")]
    NonpositiveDensity(String),
    #[error("scale c = {0} is not positive")]
    NonpositiveScale(String),
    #[error("drift b = {0} is negative")]
    NegativeDrift(String),
    #[error("charge is not of the form Cδ_1 − σ: {0}")]
    WrongShape(String),
    #[error("∫ dμ/(1−x) diverges (atom at 1)")]
    NotIntegrable,
    #[error("truncated measure; an exact construction needs every atom")]
    Truncated,
    #[error("representations disagree at n = {0}")]
    ValidationFailed(usize),
    #[error(transparent)]
    Charge(#[from] ChargeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevyKhinchinData {
    #[serde(with = "crate::rational::serde_str")]
    pub a: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub b: Rational,
    pub nu: Charge,
}

/// `Δγ_n = c ∫ x^n dμ` with `c > 0` and `μ` positive on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaMeasure {
    #[serde(with = "crate::rational::serde_str")]
    c: Rational,
    mu: Charge,
}

impl DeltaMeasure {
    pub fn new(c: Rational, mu: Charge) -> Result<Self, CheError> {
        if !c.is_positive() {
            return Err(CheError::NonpositiveScale(format_rational(&c)));
        }
        check_positive(&mu)?;
        if let Some(bad) = mu.positions().find(|x| **x > Rational::one()) {
            return Err(CheError::OutsideUnitInterval(format_rational(bad)));
        }
        if mu.tail().is_some_and(|t| *t.position() >= Rational::one()) {
            return Err(CheError::OutsideUnitInterval("tail".into()));
        }
        Ok(DeltaMeasure { c, mu })
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    pub fn mu(&self) -> &Charge {
        &self.mu
    }

    fn has_atom_at_one(&self) -> bool {
        self.mu.density_at(&Rational::one()).is_some()
    }
}

fn check_positive(c: &Charge) -> Result<(), CheError> {
    match c.densities().find(|a| !a.is_positive()) {
        Some(bad) => Err(CheError::NonpositiveDensity(format_rational(bad))),
        None => Ok(()),
    }
}

fn check_sigma(sigma: &Charge) -> Result<(), CheError> {
    check_positive(sigma)?;
    let one = Rational::one();
    if let Some(bad) = sigma.positions().find(|x| **x > one) {
        return Err(CheError::OutsideUnitInterval(format_rational(bad)));
    }
    if sigma.density_at(&one).is_some() {
        return Err(CheError::AtomAtOne);
    }
    Ok(())
}

/// `Cδ_1 − σ` with `C = 1 + σ([0,1))`, so that `γ_0 = 1`.
pub fn che_charge_from_sigma(sigma: &Charge) -> Result<Charge, CheError> {
    check_sigma(sigma)?;
    if sigma.is_truncated() {
        return Err(CheError::Truncated);
    }
    let big_c = Rational::one() + sigma.total_mass();
    let atoms = std::iter::once((Rational::one(), big_c))
        .chain(sigma.atoms().iter().map(|a| (a.position.clone(), -&a.density)));
    Ok(Charge::new(atoms)?)
}

/// Splits `ch` into `Cδ_1 − σ`, or explains why it has another shape.
fn split_che(ch: &Charge) -> Result<Charge, CheError> {
    if ch.is_truncated() {
        return Err(CheError::Truncated);
    }
    let one = Rational::one();
    let mut sigma = Vec::new();
    for atom in ch.atoms() {
        if atom.position == one {
            if !atom.density.is_positive() {
                return Err(CheError::WrongShape("density at 1 is not positive".into()));
            }
        } else if atom.position > one {
            return Err(CheError::WrongShape(format!(
                "atom at {} outside [0, 1]",
                format_rational(&atom.position)
            )));
        } else if atom.density.is_positive() {
            return Err(CheError::WrongShape(format!(
                "positive density below 1 at {}",
                format_rational(&atom.position)
            )));
        } else {
            sigma.push((atom.position.clone(), -&atom.density));
        }
    }
    if !ch.total_mass().is_one() {
        return Err(CheError::WrongShape(format!(
            "total mass {} ≠ 1",
            format_rational(&ch.total_mass())
        )));
    }
    Ok(Charge::new(sigma)?)
}

/// Returns `(a, b, ν) = (1, 0, σ)` for `ch = Cδ_1 − σ`, after checking
/// `γ_n = 1 + Σ σ_i (1 − x_i^n)` for `n ≤ 16`.
pub fn levy_khinchin_of_charge(ch: &Charge) -> Result<LevyKhinchinData, CheError> {
    let sigma = split_che(ch)?;
    for n in 0..=VALIDATION_HORIZON {
        let lk: Rational = Rational::one()
            + sigma
                .atoms()
                .iter()
                .map(|a| &a.density * (Rational::one() - pow(&a.position, n)))
                .sum::<Rational>();
        if lk != ch.moment(n) {
            return Err(CheError::ValidationFailed(n));
        }
    }
    Ok(LevyKhinchinData {
        a: Rational::one(),
        b: Rational::zero(),
        nu: sigma,
    })
}

/// `c` and `μ` with `Δγ_n = c ∫ x^n dμ` for a normalized `Cδ_1 − σ`:
/// `c = Δγ_0` and `μ = Σ σ_i(1 − x_i)/c δ_{x_i}`. The unweighted shift
/// (`Δγ ≡ 0`) gets `c = 1` and `μ = 0`.
pub fn delta_measure_of_charge(ch: &Charge) -> Result<DeltaMeasure, CheError> {
    let sigma = split_che(ch)?;
    let raw: Vec<(Rational, Rational)> = sigma
        .atoms()
        .iter()
        .map(|a| (a.position.clone(), &a.density * (Rational::one() - &a.position)))
        .collect();
    let c: Rational = raw.iter().map(|(_, w)| w).sum();
    if c.is_zero() {
        return DeltaMeasure::new(Rational::one(), Charge::empty());
    }
    let mu = Charge::new(raw.into_iter().map(|(x, w)| (x, w / &c)))?;
    DeltaMeasure::new(c, mu)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Integrability {
    /// `∫ dμ/(1−x)`; `error` bounds the contribution of a truncated tail.
    Finite {
        #[serde(with = "crate::rational::serde_str")]
        value: Rational,
        #[serde(with = "crate::rational::serde_opt_str", skip_serializing_if = "Option::is_none")]
        error: Option<Rational>,
    },
    Infinite,
}

pub fn integrability_test(dm: &DeltaMeasure) -> Integrability {
    if dm.has_atom_at_one() {
        return Integrability::Infinite;
    }
    let value = integral_over_one_minus_x(&dm.mu);
    let error = dm.mu.tail().map(|t| t.mass() / (Rational::one() - t.position()));
    Integrability::Finite { value, error }
}

fn integral_over_one_minus_x(mu: &Charge) -> Rational {
    mu.atoms()
        .iter()
        .map(|a| &a.density / (Rational::one() - &a.position))
        .sum()
}

/// `[1 + c I] δ_1 − Σ c a_i/(1 − x_i) δ_{x_i}` with `I = ∫ dμ/(1−x)`.
pub fn charge_from_delta_measure(dm: &DeltaMeasure) -> Result<Charge, CheError> {
    if dm.has_atom_at_one() {
        return Err(CheError::NotIntegrable);
    }
    if dm.mu.is_truncated() {
        return Err(CheError::Truncated);
    }
    let c = &dm.c;
    let integral = integral_over_one_minus_x(&dm.mu);
    let atoms = std::iter::once((Rational::one(), Rational::one() + c * integral)).chain(
        dm.mu
            .atoms()
            .iter()
            .map(|a| (a.position.clone(), -(c * &a.density) / (Rational::one() - &a.position))),
    );
    Ok(Charge::new(atoms)?)
}

/// `γ_n = 1 + c Σ a_i (1 − x_i^n)/(1 − x_i)`, the sequence the
/// `Δγ` measure determines.
pub fn moments_of_delta_measure(dm: &DeltaMeasure, drift: &Rational) -> Result<MomentSeq, CheError> {
    if dm.has_atom_at_one() {
        return Err(CheError::AtomAtOne);
    }
    let weighted: Vec<(Rational, Rational)> = dm
        .mu
        .atoms()
        .iter()
        .map(|a| (a.position.clone(), &dm.c * &a.density))
        .collect();
    let drift = drift.clone();
    Ok(MomentSeq::from_fn(move |n| {
        let nr = int(n as i64);
        Rational::one()
            + &drift * &nr
            + weighted
                .iter()
                .map(|(x, w)| w * (Rational::one() - pow(x, n)) / (Rational::one() - x))
                .sum::<Rational>()
    }))
}

/// `Q_n(x) = (x^n − 1 − n(x−1))/(x−1)²`, with the removable value
/// `n(n−1)/2` at `x = 1`.
pub fn q_poly(n: usize, x: &Rational) -> Rational {
    let nr = int(n as i64);
    if x.is_one() {
        return &nr * (&nr - Rational::one()) / int(2);
    }
    let d = x - Rational::one();
    (pow(x, n) - Rational::one() - &nr * &d) / (&d * &d)
}

/// `Σ_{j=0}^{n−2} (n−1−j) x^j`, the polynomial form of [`q_poly`].
pub fn q_poly_expanded(n: usize, x: &Rational) -> Rational {
    (0..n.saturating_sub(1))
        .map(|j| int((n - 1 - j) as i64) * pow(x, j))
        .sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct CpdLikeRepresentation {
    /// `b + c μ([0,1))`
    #[serde(with = "crate::rational::serde_str")]
    pub drift: Rational,
    /// `(x − 1) c μ`, all densities negative.
    pub signed_measure: Charge,
    #[serde(skip)]
    pub moments: MomentSeq,
    pub checked_to: usize,
}

/// `γ_n = 1 + (b + c μ([0,1))) n + Σ Q_n(x_i)(x_i − 1) c a_i`, checked
/// against `1 + b n + Σ c a_i (1 − x_i^n)/(1 − x_i)` for `n ≤ 16`.
pub fn cpd_like_representation(dm: &DeltaMeasure, b: &Rational) -> Result<CpdLikeRepresentation, CheError> {
    if b.is_negative() {
        return Err(CheError::NegativeDrift(format_rational(b)));
    }
    if dm.has_atom_at_one() {
        return Err(CheError::AtomAtOne);
    }
    let weighted: Vec<(Rational, Rational)> = dm
        .mu
        .atoms()
        .iter()
        .map(|a| (a.position.clone(), &dm.c * &a.density))
        .collect();
    let drift = b + weighted.iter().map(|(_, w)| w).sum::<Rational>();
    let signed_measure = Charge::new(weighted.iter().map(|(x, w)| (x.clone(), w * (x - Rational::one()))))?;
    let direct = moments_of_delta_measure(dm, b)?;
    let signed = signed_measure.clone();
    let slope = drift.clone();
    let moments = MomentSeq::from_fn(move |n| {
        Rational::one()
            + &slope * int(n as i64)
            + signed
                .atoms()
                .iter()
                .map(|a| q_poly(n, &a.position) * &a.density)
                .sum::<Rational>()
    });
    for n in 0..=VALIDATION_HORIZON {
        if moments.get(n).expect("infallible") != direct.get(n).expect("infallible") {
            return Err(CheError::ValidationFailed(n));
        }
    }
    Ok(CpdLikeRepresentation {
        drift,
        signed_measure,
        moments,
        checked_to: VALIDATION_HORIZON,
    })
}

/// Positive charge `Σ σ_i (1 − x_i) δ_{x_i}` whose moments are `Δγ` for
/// `γ` from [`che_charge_from_sigma`].
pub fn delta_bridge_charge(sigma: &Charge) -> Result<Charge, CheError> {
    check_sigma(sigma)?;
    Ok(Charge::new(sigma.atoms().iter().map(|a| {
        (a.position.clone(), &a.density * (Rational::one() - &a.position))
    }))?)
}

/// `Δγ` of a charge's moments, for callers holding the charge only.
pub fn delta_of_charge(ch: &Charge) -> MomentSeq {
    delta(&MomentSeq::from_charge(ch))
}
