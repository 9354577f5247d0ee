//! Geometrically regular weighted shifts with weights
//! `α_n² = (p^n + N)/(p^n + D)`: multipliers, densities, the representing
//! charge `a(N,D) Σ c_i δ_{p^{-i}}` with a certified truncation, and the
//! sector map of the `(N, D)` square.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::charge::{Charge, ChargeError, SignPattern, TailBound};
use crate::rational::{big, format_rational, pow, rat, Rational, Sign};
use crate::seqcalc::{moments_from_weights, MomentSeq, WeightSeq};

/// Truncation threshold used when the caller does not pick one: `10^{-12}`.
pub fn default_epsilon() -> Rational {
    Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(10), 12))
}

/// Hard cap on the truncation depth chosen from an epsilon.
pub const MAX_DEPTH: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrwsError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("normalizer enclosure [{lo}, {hi}] contains 0")]
    DegenerateNormalizer { lo: String, hi: String },
    #[error("epsilon must be positive")]
    NonpositiveEpsilon,
    #[error("tail bound still above epsilon at depth {0}")]
    DepthLimit(usize),
    #[error(transparent)]
    Charge(#[from] ChargeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct GrwsParams {
    #[serde(with = "crate::rational::serde_str")]
    p: Rational,
    #[serde(rename = "N", with = "crate::rational::serde_str")]
    n: Rational,
    #[serde(rename = "D", with = "crate::rational::serde_str")]
    d: Rational,
}

impl GrwsParams {
    pub fn new(p: Rational, n: Rational, d: Rational) -> Result<Self, GrwsError> {
        if p <= Rational::one() {
            return Err(GrwsError::InvalidParams(format!(
                "p = {} must exceed 1",
                format_rational(&p)
            )));
        }
        for (name, v) in [("N", &n), ("D", &d)] {
            if v.abs() >= Rational::one() {
                return Err(GrwsError::InvalidParams(format!(
                    "{name} = {} outside (-1, 1)",
                    format_rational(v)
                )));
            }
        }
        Ok(GrwsParams { p, n, d })
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    pub fn n(&self) -> &Rational {
        &self.n
    }

    pub fn d(&self) -> &Rational {
        &self.d
    }
}

pub fn grws_weight_sq(params: &GrwsParams, n: usize) -> Rational {
    let pn = pow(&params.p, n);
    (&pn + &params.n) / (&pn + &params.d)
}

/// `m_i = p(D − p^{i−1}N)/(p^i − 1)` for `i ≥ 1`, and `m_0 = 1`.
pub fn grws_multiplier(params: &GrwsParams, i: usize) -> Rational {
    if i == 0 {
        return Rational::one();
    }
    let p = &params.p;
    p * (&params.d - pow(p, i - 1) * &params.n) / (pow(p, i) - Rational::one())
}

/// `c_i = m_1 ⋯ m_i`.
pub fn grws_density(params: &GrwsParams, i: usize) -> Rational {
    (1..=i).map(|j| grws_multiplier(params, j)).product()
}

/// `c_0, …, c_depth`.
pub fn grws_coefficients(params: &GrwsParams, depth: usize) -> Vec<Rational> {
    let mut c = Vec::with_capacity(depth + 1);
    c.push(Rational::one());
    for i in 1..=depth {
        let next = big::mul(&c[i - 1], &grws_multiplier(params, i));
        c.push(next);
    }
    c
}

pub fn grws_weights(params: &GrwsParams) -> WeightSeq {
    let params = params.clone();
    WeightSeq::from_squares_fn(move |n| grws_weight_sq(&params, n))
}

/// Exact moments `γ_n = Π_{j<n} α_j²`.
pub fn grws_moments(params: &GrwsParams) -> MomentSeq {
    moments_from_weights(&grws_weights(params))
}

/// `ρ(i) = (p|D| + p^{i+1}|N|)/(p^{i+1} − 1)` bounds `|m_j|` for every `j > i`
/// (the bound on `|m_j|` decreases in `j`).
fn multiplier_tail_ratio(params: &GrwsParams, i: usize) -> Rational {
    let pi = pow(&params.p, i + 1);
    (&params.p * params.d.abs() + &pi * params.n.abs()) / (pi - Rational::one())
}

/// Smallest `i` with `ρ(i) ≤ (1 + |N|)/2 < 1`.
fn geometric_start(params: &GrwsParams) -> usize {
    let target = (Rational::one() + params.n.abs()) / Rational::from_integer(2.into());
    (0..)
        .find(|&i| multiplier_tail_ratio(params, i) <= target)
        .expect("ρ(i) → |N| < 1")
}

/// Certified bound on `Σ_{i > depth} |c_i|`.
pub fn tail_sum_bound(params: &GrwsParams, depth: usize) -> Rational {
    tail_bound_from(params, depth, geometric_start(params))
}

/// `Σ_{depth<i≤anchor} |c_i| + |c_anchor| ρ(anchor)/(1 − ρ(anchor))` with
/// `anchor = max(depth, start)`.
fn tail_bound_from(params: &GrwsParams, depth: usize, start: usize) -> Rational {
    let anchor = depth.max(start);
    let c = grws_coefficients(params, anchor);
    let explicit = big::sum(&c[depth + 1..=anchor].iter().map(|v| v.abs()).collect::<Vec<_>>());
    let rho = multiplier_tail_ratio(params, anchor);
    big::add(
        &explicit,
        &big::mul(&c[anchor].abs(), &(&rho / (Rational::one() - &rho))),
    )
}

/// Unreduced integer partial sums at depth `d`: `c_d = u/v`, `S_d = w/v` and
/// `Σ_{i≤d} |c_i| = a/v`, with `v > 0`.
#[derive(Clone)]
struct Partials {
    u: BigInt,
    v: BigInt,
    w: BigInt,
    a: BigInt,
}

impl Partials {
    fn origin() -> Self {
        Partials {
            u: BigInt::one(),
            v: BigInt::one(),
            w: BigInt::one(),
            a: BigInt::one(),
        }
    }

    fn next(&self, params: &GrwsParams, depth: usize) -> Self {
        let m = grws_multiplier(params, depth);
        let u = &self.u * m.numer();
        Partials {
            v: &self.v * m.denom(),
            w: &self.w * m.denom() + &u,
            a: &self.a * m.denom() + u.abs(),
            u,
        }
    }
}

/// Walks depths `0, 1, …` and reports the tail bound `T(d) = tn/td` next to
/// the partial sums, without reducing any fraction.
struct TailScan<'a> {
    params: &'a GrwsParams,
    start: usize,
    /// Partial sums for depths `0..=start`.
    head: Vec<Partials>,
    depth: usize,
    current: Partials,
}

impl<'a> TailScan<'a> {
    fn new(params: &'a GrwsParams) -> Self {
        let start = geometric_start(params);
        let mut head = vec![Partials::origin()];
        for i in 1..=start {
            let next = head[i - 1].next(params, i);
            head.push(next);
        }
        TailScan {
            params,
            start,
            head,
            depth: 0,
            current: Partials::origin(),
        }
    }

    fn advance(&mut self) {
        self.depth += 1;
        self.current = match self.head.get(self.depth) {
            Some(p) => p.clone(),
            None => self.current.next(self.params, self.depth),
        };
    }

    /// `(tn, td)` with `td > 0` and `T(depth) = tn/td`, as in [`tail_bound_from`].
    fn tail(&self) -> (BigInt, BigInt) {
        let anchor = self.depth.max(self.start);
        let rho = multiplier_tail_ratio(self.params, anchor);
        let q = &rho / (Rational::one() - &rho);
        if self.depth >= self.start {
            return (self.current.u.abs() * q.numer(), &self.current.v * q.denom());
        }
        let s = &self.head[self.start];
        let lift = &s.v / &self.current.v;
        let explicit = &s.a - &self.current.a * lift;
        (explicit * q.denom() + s.u.abs() * q.numer(), &s.v * q.denom())
    }

    fn below(&self, (tn, td): &(BigInt, BigInt), epsilon: &Rational) -> bool {
        tn * epsilon.denom() < epsilon.numer() * td
    }
}

/// Smallest depth `≥ min_depth` whose certified tail bound is below `epsilon`.
fn epsilon_depth(params: &GrwsParams, epsilon: &Rational, min_depth: usize) -> Result<usize, GrwsError> {
    if !epsilon.is_positive() {
        return Err(GrwsError::NonpositiveEpsilon);
    }
    let mut scan = TailScan::new(params);
    loop {
        if scan.depth >= min_depth && scan.below(&scan.tail(), epsilon) {
            return Ok(scan.depth);
        }
        if scan.depth >= MAX_DEPTH {
            return Err(GrwsError::DepthLimit(scan.depth));
        }
        scan.advance();
    }
}

/// First depth `d ≥ min_depth` with `|S_d| > T(d)`, which proves the
/// normalizer `S = Σ c_i` nonzero. Gives up with `DegenerateNormalizer` once
/// `T(d) < epsilon` and the enclosure `[S_d − T, S_d + T]` still holds 0.
/// Cheaper than building the charge: no fraction is reduced on the way.
pub fn certify_normalizer(params: &GrwsParams, epsilon: &Rational, min_depth: usize) -> Result<usize, GrwsError> {
    if !epsilon.is_positive() {
        return Err(GrwsError::NonpositiveEpsilon);
    }
    let mut scan = TailScan::new(params);
    loop {
        if scan.depth >= min_depth {
            let (tn, td) = scan.tail();
            let p = &scan.current;
            if p.w.abs() * &td > &tn * &p.v {
                return Ok(scan.depth);
            }
            if scan.below(&(tn.clone(), td.clone()), epsilon) {
                let den = &p.v * &td;
                let (lo, hi) = (&p.w * &td - &tn * &p.v, &p.w * &td + &tn * &p.v);
                return Err(GrwsError::DegenerateNormalizer {
                    lo: format_rational(&Rational::new(lo, den.clone())),
                    hi: format_rational(&Rational::new(hi, den)),
                });
            }
        }
        if scan.depth >= MAX_DEPTH {
            return Err(GrwsError::DepthLimit(scan.depth));
        }
        scan.advance();
    }
}

/// Truncated representing charge together with its error bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrwsCharge {
    params: GrwsParams,
    depth: usize,
    coefficients: Vec<Rational>,
    partial_sum: Rational,
    tail_sum: Rational,
    charge: Charge,
}

impl GrwsCharge {
    pub fn params(&self) -> &GrwsParams {
        &self.params
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `c_0, …, c_depth`, zeros included.
    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    /// Normalized charge `Σ_{i≤depth} (c_i/S) δ_{p^{-i}}` with its tail bound.
    pub fn charge(&self) -> &Charge {
        &self.charge
    }

    /// `Σ_{i≤depth} c_i δ_{p^{-i}}` before normalization.
    pub fn unnormalized_charge(&self) -> Charge {
        let positions = self.positions();
        Charge::new(positions.into_iter().zip(self.coefficients.iter().cloned())).expect("positions are positive")
    }

    fn positions(&self) -> Vec<Rational> {
        let q = self.params.p.recip();
        (0..=self.depth).map(|i| pow(&q, i)).collect()
    }

    pub fn partial_sum(&self) -> &Rational {
        &self.partial_sum
    }

    /// Bound `T` on `Σ_{i>depth} |c_i|`; zero when the series terminates.
    pub fn tail_sum(&self) -> &Rational {
        &self.tail_sum
    }

    pub fn is_exact(&self) -> bool {
        self.tail_sum.is_zero()
    }

    /// `1/S`, the estimate of `a(N,D)`.
    pub fn a_estimate(&self) -> Rational {
        self.partial_sum.recip()
    }

    /// `|a(N,D) − 1/S| ≤ T/(|S|(|S|−T))`.
    pub fn a_error(&self) -> Rational {
        let s = self.partial_sum.abs();
        &self.tail_sum / (&s * (&s - &self.tail_sum))
    }

    /// Bound on `|γ_n − moment(n)|` covering both the dropped atoms and the
    /// error in the normalizer: `T(|S| q^n + |P_n|)/(|S|(|S|−T))` with
    /// `q = p^{-(depth+1)}` and `P_n = Σ_{i≤depth} c_i p^{-in}`.
    pub fn moment_error_bound(&self, n: usize) -> Rational {
        if self.tail_sum.is_zero() {
            return Rational::zero();
        }
        let s = self.partial_sum.abs();
        let q = pow(&self.params.p.recip(), self.depth + 1);
        let p_n = self.charge.moment(n) * &self.partial_sum;
        &self.tail_sum * (&s * pow(&q, n) + p_n.abs()) / (&s * (&s - &self.tail_sum))
    }

    /// Signs of `c_0, …, c_depth`, zeros included.
    pub fn sign_pattern(&self) -> SignPattern {
        SignPattern(self.coefficients.iter().map(Sign::of).collect())
    }
}

impl Serialize for GrwsCharge {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            params: &'a GrwsParams,
            depth: usize,
            #[serde(with = "crate::rational::serde_vec_str")]
            coefficients: &'a [Rational],
            sign_pattern: SignPattern,
            #[serde(with = "crate::rational::serde_str")]
            a_estimate: Rational,
            #[serde(with = "crate::rational::serde_str")]
            a_error: Rational,
            #[serde(with = "crate::rational::serde_str")]
            tail_sum: &'a Rational,
            charge: &'a Charge,
        }
        Wire {
            params: &self.params,
            depth: self.depth,
            coefficients: &self.coefficients,
            sign_pattern: self.sign_pattern(),
            a_estimate: self.a_estimate(),
            a_error: self.a_error(),
            tail_sum: &self.tail_sum,
            charge: &self.charge,
        }
        .serialize(serializer)
    }
}

/// Truncates at the smallest depth whose certified tail bound is below
/// `epsilon`.
pub fn grws_charge(params: &GrwsParams, epsilon: &Rational) -> Result<GrwsCharge, GrwsError> {
    grws_charge_min_depth(params, epsilon, 0)
}

/// As [`grws_charge`] but never shallower than `min_depth`.
pub fn grws_charge_min_depth(
    params: &GrwsParams,
    epsilon: &Rational,
    min_depth: usize,
) -> Result<GrwsCharge, GrwsError> {
    grws_charge_at_depth(params, epsilon_depth(params, epsilon, min_depth)?)
}

pub fn grws_charge_at_depth(params: &GrwsParams, depth: usize) -> Result<GrwsCharge, GrwsError> {
    let coefficients = grws_coefficients(params, depth);
    let tail_sum = tail_sum_bound(params, depth);
    let partial_sum = big::sum(&coefficients);
    if partial_sum.abs() <= tail_sum {
        return Err(GrwsError::DegenerateNormalizer {
            lo: format_rational(&big::sub(&partial_sum, &tail_sum)),
            hi: format_rational(&big::add(&partial_sum, &tail_sum)),
        });
    }
    let q = params.p.recip();
    let atoms = coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| (pow(&q, i), big::div(c, &partial_sum)));
    let mut charge = Charge::new(atoms)?;
    if !tail_sum.is_zero() {
        let mass = big::div(&tail_sum, &big::sub(&partial_sum.abs(), &tail_sum));
        charge = charge.with_tail(TailBound::new(mass, pow(&q, depth + 1))?)?;
    }
    Ok(GrwsCharge {
        params: params.clone(),
        depth,
        coefficients,
        partial_sum,
        tail_sum,
        charge,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SectorTag {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIIIA,
    VIIIB,
    /// Third-quadrant region below `D = p²N`.
    VIII,
}

impl fmt::Display for SectorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Origin,
    /// `N = 0`.
    NAxis,
    /// `D = 0`.
    DAxis,
    /// `D = N`.
    Diagonal,
    /// `D = −N`.
    Antidiagonal,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Origin => "origin",
            Boundary::NAxis => "n_axis",
            Boundary::DAxis => "d_axis",
            Boundary::Diagonal => "diagonal",
            Boundary::Antidiagonal => "antidiagonal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Sector {
    /// `None` exactly when the point sits on a boundary line.
    pub tag: Option<SectorTag>,
    pub boundary: Option<Boundary>,
    /// `j` with `D = p^j N`.
    pub special_line: Option<u32>,
    /// Length of the leading run of positive densities in Sector IV.
    pub plus_run: Option<usize>,
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.tag, self.boundary) {
            (Some(t), _) => write!(f, "{t}"),
            (None, Some(b)) => write!(f, "boundary:{b}"),
            (None, None) => f.write_str("unclassified"),
        }
    }
}

fn special_line_index(params: &GrwsParams) -> Option<u32> {
    if params.n.is_zero() {
        return None;
    }
    let ratio = &params.d / &params.n;
    if !ratio.is_positive() {
        return None;
    }
    let mut power = Rational::one();
    let mut j = 0u32;
    while power < ratio {
        power *= &params.p;
        j += 1;
    }
    (power == ratio).then_some(j)
}

/// Exact sector of `(N, D)`. The lines `D = ±N` and the axes are reported as
/// boundaries without a tag; special lines `D = p^j N` keep their tag.
pub fn classify_sector(params: &GrwsParams) -> Sector {
    let (n, d, p) = (&params.n, &params.d, &params.p);
    let special_line = special_line_index(params);
    let on_boundary = |b| Sector {
        tag: None,
        boundary: Some(b),
        special_line,
        plus_run: None,
    };
    if n.is_zero() && d.is_zero() {
        return on_boundary(Boundary::Origin);
    }
    if n.is_zero() {
        return on_boundary(Boundary::NAxis);
    }
    if d.is_zero() {
        return on_boundary(Boundary::DAxis);
    }
    if d == n {
        return on_boundary(Boundary::Diagonal);
    }
    if *d == -n {
        return on_boundary(Boundary::Antidiagonal);
    }
    let tagged = |t, plus_run| Sector {
        tag: Some(t),
        boundary: None,
        special_line,
        plus_run,
    };
    match (n.is_positive(), d.is_positive()) {
        (true, true) if d > n => {
            // m_i > 0 while p^{i−1} < D/N
            let ratio = d / n;
            let mut run = 1;
            let mut power = Rational::one();
            while power < ratio {
                run += 1;
                power *= p;
            }
            tagged(SectorTag::IV, Some(run))
        }
        (true, true) => tagged(SectorTag::V, None),
        (true, false) if *d > -n => tagged(SectorTag::VI, None),
        (true, false) => tagged(SectorTag::VII, None),
        (false, true) if *d < -n => tagged(SectorTag::II, None),
        (false, true) => tagged(SectorTag::III, None),
        (false, false) => {
            let pn = p * n;
            let p2n = &pn * p;
            if d > n {
                tagged(SectorTag::I, None)
            } else if *d > pn {
                tagged(SectorTag::VIIIA, None)
            } else if *d >= p2n {
                tagged(SectorTag::VIIIB, None)
            } else {
                tagged(SectorTag::VIII, None)
            }
        }
    }
}

/// Density-sign template read over decreasing atoms `1, 1/p, 1/p², …`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignTemplate {
    /// `+, +, +, …`
    AllPlus,
    /// `plus` positive densities, then zeros.
    PlusThenZeros {
        plus: usize,
    },
    /// `+, −, +, …` for `len` entries, then zeros.
    AlternatingThenZeros {
        len: usize,
    },
    /// `plus` positive densities, then `−, +, −, …`.
    PlusThenAlternating {
        plus: usize,
    },
    /// `+, −, −, −, …`
    PlusThenMinus,
    /// `+, −, +, +, …`
    PlusMinusThenPlus,
    Unknown,
}

impl SignTemplate {
    pub fn sign_at(&self, i: usize) -> Option<Sign> {
        let alternating = |i: usize| if i.is_multiple_of(2) { Sign::Plus } else { Sign::Minus };
        Some(match *self {
            SignTemplate::AllPlus => Sign::Plus,
            SignTemplate::PlusThenZeros { plus } => {
                if i < plus {
                    Sign::Plus
                } else {
                    Sign::Zero
                }
            }
            SignTemplate::AlternatingThenZeros { len } => {
                if i < len {
                    alternating(i)
                } else {
                    Sign::Zero
                }
            }
            SignTemplate::PlusThenAlternating { plus } => {
                if i < plus {
                    Sign::Plus
                } else if (i - plus).is_multiple_of(2) {
                    Sign::Minus
                } else {
                    Sign::Plus
                }
            }
            SignTemplate::PlusThenMinus => {
                if i == 0 {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            }
            SignTemplate::PlusMinusThenPlus => {
                if i == 1 {
                    Sign::Minus
                } else {
                    Sign::Plus
                }
            }
            SignTemplate::Unknown => return None,
        })
    }

    /// First `len` entries, or `None` for [`SignTemplate::Unknown`].
    pub fn expand(&self, len: usize) -> Option<SignPattern> {
        (0..len)
            .map(|i| self.sign_at(i))
            .collect::<Option<Vec<_>>>()
            .map(SignPattern)
    }

    pub fn matches(&self, pattern: &SignPattern) -> bool {
        self.expand(pattern.len()).is_some_and(|t| t == *pattern)
    }
}

/// Density-sign template for a classified point. Special lines take
/// precedence over the surrounding sector; boundary points and Sectors V–VII
/// give [`SignTemplate::Unknown`].
pub fn expected_sign_pattern(sector: &Sector) -> SignTemplate {
    let Some(tag) = sector.tag else {
        return SignTemplate::Unknown;
    };
    match (tag, sector.special_line) {
        (SectorTag::I | SectorTag::II | SectorTag::III, _) => SignTemplate::AllPlus,
        (SectorTag::IV, Some(j)) => SignTemplate::PlusThenZeros { plus: j as usize + 1 },
        (SectorTag::IV, None) => match sector.plus_run {
            Some(plus) => SignTemplate::PlusThenAlternating { plus },
            None => SignTemplate::Unknown,
        },
        (SectorTag::VIIIA | SectorTag::VIIIB | SectorTag::VIII, Some(j)) => {
            SignTemplate::AlternatingThenZeros { len: j as usize + 1 }
        }
        (SectorTag::VIIIA, None) => SignTemplate::PlusThenMinus,
        (SectorTag::VIIIB, None) => SignTemplate::PlusMinusThenPlus,
        _ => SignTemplate::Unknown,
    }
}

/// `(N, D)` on the line `D = p^j N`: `D = p^j N` for a given `N`.
pub fn special_line_point(p: &Rational, n: &Rational, j: u32) -> Rational {
    pow(p, j as usize) * n
}

/// Convenience for tests and fixtures: `GrwsParams` from small fractions.
pub fn params_from_fractions(p: (i64, i64), n: (i64, i64), d: (i64, i64)) -> Result<GrwsParams, GrwsError> {
    GrwsParams::new(rat(p.0, p.1), rat(n.0, n.1), rat(d.0, d.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn params(p: (i64, i64), n: (i64, i64), d: (i64, i64)) -> GrwsParams {
        params_from_fractions(p, n, d).unwrap()
    }

    fn signs(text: &str) -> SignPattern {
        SignPattern(
            text.split(',')
                .map(|s| Sign::from_symbol(s.chars().next().unwrap()).unwrap())
                .collect(),
        )
    }

    #[test]
    fn rejects_out_of_square() {
        assert!(params_from_fractions((1, 1), (0, 1), (0, 1)).is_err());
        assert!(params_from_fractions((2, 1), (1, 1), (0, 1)).is_err());
        assert!(params_from_fractions((2, 1), (0, 1), (-1, 1)).is_err());
    }

    #[test]
    fn weight_examples() {
        let diag = params((3, 2), (1, 3), (1, 3));
        assert!((0..20).all(|n| grws_weight_sq(&diag, n).is_one()));
        let pt = params((2, 1), (-1, 2), (-3, 4));
        assert_eq!(grws_weight_sq(&pt, 0), int(2));
        assert_eq!(grws_moments(&pt).get(1).unwrap(), int(2));
        for n in 1..30 {
            let gap = (grws_weight_sq(&pt, n) - Rational::one()).abs();
            assert!(gap <= rat(5, 4) / (pow(&int(2), n) - Rational::one()));
        }
    }

    #[test]
    fn multiplier_examples() {
        let pt = params((2, 1), (-1, 2), (-3, 4));
        assert_eq!(grws_multiplier(&pt, 1), rat(-1, 2));
        assert_eq!(grws_multiplier(&pt, 2), rat(1, 6));
        assert_eq!(grws_density(&pt, 2), rat(-1, 12));
        let line = params((2, 1), (1, 4), (1, 2));
        assert_eq!(grws_multiplier(&line, 2), int(0));
        for i in 1..40 {
            let gap = (grws_multiplier(&pt, i) - rat(1, 2)).abs();
            assert!(gap * pow(&int(2), i) <= int(4), "i = {i}");
        }
    }

    #[test]
    fn density_recurrence() {
        let pt = params((3, 2), (-2, 5), (1, 7));
        let c = grws_coefficients(&pt, 15);
        assert!(c[0].is_one());
        for n in 1..=15 {
            assert_eq!(c[n], &c[n - 1] * grws_multiplier(&pt, n));
        }
    }

    #[test]
    fn special_lines_are_exact() {
        let line1 = params((2, 1), (-1, 3), (-2, 3));
        let gc = grws_charge_at_depth(&line1, 10).unwrap();
        assert!(gc.is_exact());
        assert_eq!(gc.charge().len(), 2);
        assert_eq!(
            &gc.charge().atoms()[1].density / &gc.charge().atoms()[0].density,
            grws_multiplier(&line1, 1)
        );

        let line2 = params((2, 1), (-1, 5), (-4, 5));
        let gc = grws_charge(&line2, &default_epsilon()).unwrap();
        assert_eq!(gc.charge().len(), 3);
        assert!(gc.coefficients()[3..].iter().all(Zero::is_zero));
    }

    #[test]
    fn viiia_pattern_example() {
        let pt = params((2, 1), (-1, 2), (-3, 4));
        let gc = grws_charge_at_depth(&pt, 4).unwrap();
        assert_eq!(gc.sign_pattern(), signs("+,-,-,-,-"));
    }

    #[test]
    fn epsilon_truncation_is_certified() {
        let pt = params((3, 2), (-3, 5), (-4, 5));
        let eps = rat(1, 1_000_000);
        let gc = grws_charge(&pt, &eps).unwrap();
        assert!(gc.tail_sum() < &eps);
        let exact = grws_moments(&pt);
        for n in 0..=16 {
            let err = (exact.get(n).unwrap() - gc.charge().moment(n)).abs();
            assert!(err <= gc.moment_error_bound(n), "n = {n}");
        }
    }

    #[test]
    fn classification_examples() {
        let s = classify_sector(&params((2, 1), (-3, 5), (-3, 10)));
        assert_eq!(s.tag, Some(SectorTag::I));
        let s = classify_sector(&params((2, 1), (-2, 5), (-9, 10)));
        assert_eq!(s.tag, Some(SectorTag::VIIIB));
        let s = classify_sector(&params((2, 1), (1, 4), (1, 2)));
        assert_eq!((s.tag, s.special_line), (Some(SectorTag::IV), Some(1)));
        let s = classify_sector(&params((2, 1), (-1, 2), (-3, 4)));
        assert_eq!(s.tag, Some(SectorTag::VIIIA));
        let s = classify_sector(&params((2, 1), (0, 1), (0, 1)));
        assert_eq!((s.tag, s.boundary), (None, Some(Boundary::Origin)));
        let s = classify_sector(&params((2, 1), (1, 3), (1, 3)));
        assert_eq!((s.boundary, s.special_line), (Some(Boundary::Diagonal), Some(0)));
        assert_eq!(
            classify_sector(&params((2, 1), (-1, 2), (1, 4))).tag,
            Some(SectorTag::II)
        );
        assert_eq!(
            classify_sector(&params((2, 1), (-1, 4), (1, 2))).tag,
            Some(SectorTag::III)
        );
        assert_eq!(classify_sector(&params((2, 1), (1, 2), (1, 4))).tag, Some(SectorTag::V));
        assert_eq!(
            classify_sector(&params((2, 1), (1, 2), (-1, 4))).tag,
            Some(SectorTag::VI)
        );
        assert_eq!(
            classify_sector(&params((2, 1), (1, 4), (-1, 2))).tag,
            Some(SectorTag::VII)
        );
    }

    #[test]
    fn template_examples() {
        let sector = |p, n, d| classify_sector(&params(p, n, d));
        assert_eq!(
            expected_sign_pattern(&sector((2, 1), (-1, 2), (-3, 4))),
            SignTemplate::PlusThenMinus
        );
        assert_eq!(
            expected_sign_pattern(&sector((2, 1), (-1, 2), (1, 4))),
            SignTemplate::AllPlus
        );
        assert_eq!(
            expected_sign_pattern(&sector((2, 1), (1, 2), (1, 4))),
            SignTemplate::Unknown
        );
        assert_eq!(SignTemplate::PlusMinusThenPlus.expand(4).unwrap(), signs("+,-,+,+"));
        assert_eq!(
            SignTemplate::PlusThenAlternating { plus: 3 }.expand(6).unwrap(),
            signs("+,+,+,-,+,-")
        );
    }

    #[test]
    fn computed_patterns_match_templates() {
        for (p, n, d) in [
            ((2, 1), (-2, 5), (-9, 10)),
            ((2, 1), (1, 20), (1, 5)),
            ((3, 2), (1, 10), (9, 40)),
            ((3, 1), (-1, 5), (-3, 5)),
            ((2, 1), (-1, 5), (-4, 5)),
            ((2, 1), (1, 5), (4, 5)),
        ] {
            let pt = params(p, n, d);
            let gc = grws_charge_at_depth(&pt, 12).unwrap();
            let template = expected_sign_pattern(&classify_sector(&pt));
            assert!(template.matches(&gc.sign_pattern()), "{pt:?}: {}", gc.sign_pattern());
        }
    }

    #[test]
    fn degenerate_normalizer_detected() {
        // c_0 + c_1 = 0 exactly on the line m_1 = −1 (D − N = (1 − p)/p), with the
        // rest of the series tiny
        let pt = params((9, 1), (1, 2), (-7, 18));
        assert_eq!(grws_multiplier(&pt, 1), int(-1));
        assert!(matches!(
            grws_charge_at_depth(&pt, 1),
            Err(GrwsError::DegenerateNormalizer { .. })
        ));
    }

    #[test]
    fn integer_scan_matches_rational_bounds() {
        let points = [
            params((2, 1), (-1, 2), (-3, 4)),
            params((3, 2), (9, 10), (0, 1)),
            params((3, 2), (-9, 10), (9, 10)),
            params((5, 4), (1, 3), (-2, 3)),
            params((2, 1), (1, 4), (1, 2)),
        ];
        for pt in &points {
            let mut scan = TailScan::new(pt);
            let plain = grws_coefficients_plain(pt, 20);
            assert_eq!(grws_coefficients(pt, 20), plain);
            for d in 0..=20 {
                let (tn, td) = scan.tail();
                assert_eq!(Rational::new(tn, td), tail_sum_bound(pt, d), "{pt:?} depth {d}");
                let partial: Rational = plain[..=d].iter().sum();
                assert_eq!(Rational::new(scan.current.w.clone(), scan.current.v.clone()), partial);
                scan.advance();
            }
        }
    }

    fn grws_coefficients_plain(params: &GrwsParams, depth: usize) -> Vec<Rational> {
        (0..=depth).map(|i| grws_density(params, i)).collect()
    }

    #[test]
    fn normalizer_certification() {
        let eps = default_epsilon();
        let pt = params((2, 1), (-1, 2), (-3, 4));
        let d = certify_normalizer(&pt, &eps, 0).unwrap();
        assert!(grws_charge_at_depth(&pt, d).is_ok());
        assert!(d == 0 || grws_charge_at_depth(&pt, d - 1).is_err());

        let far = params((3, 2), (9, 10), (0, 1));
        let d = certify_normalizer(&far, &eps, 12).unwrap();
        assert!(d > 12);
        assert!(grws_charge_at_depth(&far, d).is_ok());
        assert!(grws_charge_at_depth(&far, d - 1).is_err());
        assert_eq!(epsilon_depth(&far, &eps, 0).unwrap(), 309);

        assert_eq!(certify_normalizer(&pt, &int(0), 0), Err(GrwsError::NonpositiveEpsilon));
    }
}
