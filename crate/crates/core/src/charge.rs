//! Finite (or truncated countably infinite) atomic signed measures on
//! `[0, ∞)`, the signed analogue of a Berger measure.
//!
//! A [`Charge`] keeps its atoms sorted by strictly decreasing position with
//! every density nonzero. Coincident atoms are merged by adding densities,
//! and atoms whose merged density is zero are dropped.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{big, format_rational, pow, Exact, Rational, Sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChargeError {
    #[error("atom position {0} is negative")]
    NegativePosition(String),
    #[error("scale factor {0} is not positive")]
    NonpositiveScale(String),
    #[error("charge has no atoms")]
    EmptyCharge,
    #[error("charge has zero total mass and cannot be normalized")]
    ZeroMass,
    #[error("moment {0} vanishes")]
    ZeroMoment(usize),
    #[error("invalid tail bound: {0}")]
    InvalidTail(String),
    #[error("`normalized` flag disagrees with total mass {0}")]
    NormalizationMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub position: Rational,
    pub density: Rational,
}

impl Atom {
    pub fn new(position: Rational, density: Rational) -> Self {
        Atom { position, density }
    }
}

/// Bound on what a truncation left out: the omitted densities sum (in
/// absolute value) to at most `mass`, and every omitted atom sits in
/// `(0, position]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TailBound {
    mass: Rational,
    position: Rational,
}

impl TailBound {
    pub fn new(mass: Rational, position: Rational) -> Result<Self, ChargeError> {
        if mass.is_negative() {
            return Err(ChargeError::InvalidTail(format!("mass {} < 0", format_rational(&mass))));
        }
        if !position.is_positive() {
            return Err(ChargeError::InvalidTail(format!(
                "position {} <= 0",
                format_rational(&position)
            )));
        }
        Ok(TailBound { mass, position })
    }

    pub fn mass(&self) -> &Rational {
        &self.mass
    }

    pub fn position(&self) -> &Rational {
        &self.position
    }

    /// Bound on the omitted part of the `n`-th moment.
    pub fn moment_bound(&self, n: usize) -> Rational {
        &self.mass * pow(&self.position, n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Charge {
    atoms: Vec<Atom>,
    normalized: bool,
    tail: Option<TailBound>,
}

/// Signs of the densities read over decreasing atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignPattern(pub Vec<Sign>);

impl SignPattern {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[Sign] {
        &self.0
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl Serialize for SignPattern {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignCensus {
    pub pattern: SignPattern,
    pub plus: usize,
    pub minus: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SubnormalVerdict {
    Subnormal,
    NotSubnormal,
}

impl Charge {
    /// Builds a charge from `(position, density)` pairs in any order.
    pub fn new<I>(atoms: I) -> Result<Self, ChargeError>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let atoms: Vec<Atom> = atoms.into_iter().map(|(p, d)| Atom::new(p, d)).collect();
        if let Some(bad) = atoms.iter().find(|a| a.position.is_negative()) {
            return Err(ChargeError::NegativePosition(format_rational(&bad.position)));
        }
        Ok(Self::from_clean_atoms(merge_atoms(atoms), None))
    }

    /// Attaches a truncation bound. The bound must sit strictly below the
    /// smallest retained position.
    pub fn with_tail(mut self, tail: TailBound) -> Result<Self, ChargeError> {
        if let Some(smallest) = self.atoms.last() {
            if tail.position >= smallest.position {
                return Err(ChargeError::InvalidTail(format!(
                    "tail position {} not below smallest retained atom {}",
                    format_rational(&tail.position),
                    format_rational(&smallest.position)
                )));
            }
        }
        self.tail = Some(tail);
        Ok(self)
    }

    pub fn empty() -> Self {
        Charge {
            atoms: Vec::new(),
            normalized: false,
            tail: None,
        }
    }

    /// `density · δ_position`.
    pub fn point(position: Rational, density: Rational) -> Result<Self, ChargeError> {
        Self::new([(position, density)])
    }

    // atoms must already be sorted, merged and nonzero
    fn from_clean_atoms(atoms: Vec<Atom>, tail: Option<TailBound>) -> Self {
        let mass = big::sum(atoms.iter().map(|a| &a.density));
        Charge {
            normalized: mass.is_one(),
            atoms,
            tail,
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn tail(&self) -> Option<&TailBound> {
        self.tail.as_ref()
    }

    pub fn is_truncated(&self) -> bool {
        self.tail.is_some()
    }

    pub fn positions(&self) -> impl Iterator<Item = &Rational> {
        self.atoms.iter().map(|a| &a.position)
    }

    pub fn densities(&self) -> impl Iterator<Item = &Rational> {
        self.atoms.iter().map(|a| &a.density)
    }

    /// Σ densities (the zeroth moment).
    pub fn total_mass(&self) -> Rational {
        big::sum(self.densities())
    }

    /// Σ |densities| over the retained atoms.
    pub fn abs_mass(&self) -> Rational {
        big::sum(&self.densities().map(|d| d.abs()).collect::<Vec<_>>())
    }

    pub fn max_abs_density(&self) -> Rational {
        self.densities().map(|d| d.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// Exact `Σ density · position^n` over retained atoms, with `0^0 = 1`.
    pub fn moment(&self, n: usize) -> Rational {
        let terms: Vec<Rational> = self
            .atoms
            .iter()
            .map(|a| big::mul(&a.density, &pow(&a.position, n)))
            .collect();
        big::sum(&terms)
    }

    /// Bound on the contribution of omitted atoms to the `n`-th moment.
    pub fn moment_error_bound(&self, n: usize) -> Option<Rational> {
        self.tail.as_ref().map(|t| t.moment_bound(n))
    }

    pub fn moment_bounded(&self, n: usize) -> (Rational, Option<Rational>) {
        (self.moment(n), self.moment_error_bound(n))
    }

    /// Multiplicative convolution: `δ_a ∗ δ_b = δ_{ab}`.
    ///
    /// When either side is truncated the omitted mass is bounded by
    /// `t1·M2 + t2·M1 + t1·t2` (Mi = Σ|densities of side i|) and the omitted
    /// positions by the largest product involving a tail position. That
    /// position bound need not lie below every retained product.
    pub fn convolve(&self, other: &Charge) -> Charge {
        let mut products = Vec::with_capacity(self.len() * other.len());
        for a in &self.atoms {
            for b in &other.atoms {
                products.push(Atom::new(&a.position * &b.position, &a.density * &b.density));
            }
        }
        let tail = match (&self.tail, &other.tail) {
            (None, None) => None,
            (t1, t2) => {
                let zero = Rational::zero();
                let (m1, m2) = (self.abs_mass(), other.abs_mass());
                let (tm1, tp1) = t1.as_ref().map_or((&zero, &zero), |t| (&t.mass, &t.position));
                let (tm2, tp2) = t2.as_ref().map_or((&zero, &zero), |t| (&t.mass, &t.position));
                let mass = tm1 * &m2 + tm2 * &m1 + tm1 * tm2;
                let r1 = self
                    .atoms
                    .first()
                    .map_or(zero.clone(), |a| a.position.clone())
                    .max(tp1.clone());
                let r2 = other
                    .atoms
                    .first()
                    .map_or(zero.clone(), |a| a.position.clone())
                    .max(tp2.clone());
                let position = [tp1 * &r2, tp2 * &r1, tp1 * tp2].into_iter().max().unwrap();
                if position.is_zero() {
                    // the truncated side has no retained atoms on the other side to pair with
                    None
                } else {
                    Some(TailBound { mass, position })
                }
            }
        };
        Charge::from_clean_atoms(merge_atoms(products), tail)
    }

    /// Multiplies every position by `k > 0`; the moments become `k^n γ_n`.
    pub fn scale_positions(&self, k: &Rational) -> Result<Charge, ChargeError> {
        if !k.is_positive() {
            return Err(ChargeError::NonpositiveScale(format_rational(k)));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom::new(&a.position * k, a.density.clone()))
            .collect();
        let tail = self.tail.as_ref().map(|t| TailBound {
            mass: t.mass.clone(),
            position: &t.position * k,
        });
        Ok(Charge::from_clean_atoms(atoms, tail))
    }

    /// Charge of `Δ²γ`: each atom `(r, a)` becomes `(r, a(1 − r)²)`, so an
    /// atom at 1 disappears.
    pub fn delta2_transform(&self) -> Charge {
        let one = Rational::one();
        let atoms = self
            .atoms
            .iter()
            .map(|a| {
                let gap = &one - &a.position;
                Atom::new(a.position.clone(), &a.density * &gap * &gap)
            })
            .filter(|a| !a.density.is_zero())
            .collect();
        let tail = self.tail.as_ref().map(|t| {
            let gap = &t.position - &one;
            let factor = (&gap * &gap).max(one.clone());
            TailBound {
                mass: &t.mass * factor,
                position: t.position.clone(),
            }
        });
        Charge::from_clean_atoms(atoms, tail)
    }

    pub fn sign_census(&self) -> SignCensus {
        let signs: Vec<Sign> = self.densities().map(Sign::of).collect();
        let plus = signs.iter().filter(|s| **s == Sign::Plus).count();
        let minus = signs.len() - plus;
        SignCensus {
            pattern: SignPattern(signs),
            plus,
            minus,
        }
    }

    /// A charge whose densities share one strict sign represents a subnormal
    /// shift: ratios of moments of `−μ` and `μ` give the same weights.
    pub fn is_subnormal_charge(&self) -> Result<SubnormalVerdict, ChargeError> {
        if self.is_empty() {
            return Err(ChargeError::EmptyCharge);
        }
        let census = self.sign_census();
        if census.plus == 0 || census.minus == 0 {
            Ok(SubnormalVerdict::Subnormal)
        } else {
            Ok(SubnormalVerdict::NotSubnormal)
        }
    }

    /// Multiplies every density by `factor` (nonzero).
    pub fn scale_densities(&self, factor: &Rational) -> Charge {
        if factor.is_zero() {
            return Charge::empty();
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.position.clone(), &a.density * factor))
            .collect();
        let tail = self.tail.as_ref().map(|t| TailBound {
            mass: &t.mass * factor.abs(),
            position: t.position.clone(),
        });
        Charge::from_clean_atoms(atoms, tail)
    }

    pub fn negated(&self) -> Charge {
        self.scale_densities(&-Rational::one())
    }

    /// Divides by `|Σ a_i|`, keeping the sign of the raw total mass.
    pub fn normalized_by_abs_mass(&self) -> Result<Charge, ChargeError> {
        let mass = self.total_mass();
        if mass.is_zero() {
            return Err(ChargeError::ZeroMass);
        }
        Ok(self.scale_densities(&mass.abs().recip()))
    }

    /// Charge of the restriction to `⋁{e_i : i ≥ shift}`: densities
    /// `a_i r_i^shift / γ_shift`.
    pub fn restricted(&self, shift: usize) -> Result<Charge, ChargeError> {
        let gamma = self.moment(shift);
        if gamma.is_zero() {
            return Err(ChargeError::ZeroMoment(shift));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom::new(a.position.clone(), &a.density * pow(&a.position, shift) / &gamma))
            .filter(|a| !a.density.is_zero())
            .collect();
        let tail = self.tail.as_ref().map(|t| TailBound {
            mass: &t.mass * pow(&t.position, shift) / gamma.abs(),
            position: t.position.clone(),
        });
        Ok(Charge::from_clean_atoms(atoms, tail))
    }

    /// Density of the atom at exactly `position`, if present.
    pub fn density_at(&self, position: &Rational) -> Option<&Rational> {
        self.atoms.iter().find(|a| &a.position == position).map(|a| &a.density)
    }
}

impl fmt::Display for Charge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return f.write_str("0");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({})δ_{{{}}}", a.density, a.position)?;
        }
        Ok(())
    }
}

fn merge_atoms(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort_by(|a, b| b.position.cmp(&a.position));
    let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
    for atom in atoms {
        match merged.last_mut() {
            Some(last) if last.position == atom.position => last.density += atom.density,
            _ => merged.push(atom),
        }
    }
    merged.retain(|a| !a.density.is_zero());
    merged
}

// JSON wire form: {"atoms":[{"pos":"p/q","den":"p/q"}],"normalized":bool,"tail":{"mass":..,"pos":..}}

#[derive(Serialize, Deserialize)]
struct AtomWire {
    pos: Exact,
    den: Exact,
}

#[derive(Serialize, Deserialize)]
struct TailWire {
    mass: Exact,
    pos: Exact,
}

#[derive(Serialize, Deserialize)]
struct ChargeWire {
    atoms: Vec<AtomWire>,
    normalized: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<TailWire>,
}

impl Serialize for Charge {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ChargeWire {
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomWire {
                    pos: Exact(a.position.clone()),
                    den: Exact(a.density.clone()),
                })
                .collect(),
            normalized: self.normalized,
            tail: self.tail.as_ref().map(|t| TailWire {
                mass: Exact(t.mass.clone()),
                pos: Exact(t.position.clone()),
            }),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Charge {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let wire = ChargeWire::deserialize(deserializer)?;
        let mut charge = Charge::new(wire.atoms.into_iter().map(|a| (a.pos.0, a.den.0))).map_err(D::Error::custom)?;
        if let Some(t) = wire.tail {
            let tail = TailBound::new(t.mass.0, t.pos.0).map_err(D::Error::custom)?;
            charge = charge.with_tail(tail).map_err(D::Error::custom)?;
        }
        if wire.normalized != charge.normalized {
            return Err(D::Error::custom(ChargeError::NormalizationMismatch(format_rational(
                &charge.total_mass(),
            ))));
        }
        Ok(charge)
    }
}
