//! Moment and weight sequences, finite differences, and finite-depth
//! complete monotonicity / complete alternation checks.
//!
//! Sequences are lazy: a pure generator plus a memo table. Generators may
//! fail (a zero moment, a singular weight transform) and the failure
//! surfaces on evaluation with the offending index.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::charge::Charge;
use crate::rational::{format_rational, pow, Rational};

pub const DEFAULT_HORIZON: usize = 32;
pub const DEFAULT_DEPTH: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeqError {
    #[error("moment {0} is zero")]
    ZeroMoment(usize),
    #[error("ratio γ_{next} / γ_{0} is not positive", next = .0 + 1)]
    NonpositiveRatio(usize),
    #[error("weight square at {0} equals 1; the weight-level Δ formula is singular")]
    UnitWeight(usize),
    #[error("weight-level Δ produced a nonpositive square at {0}")]
    NonpositiveResult(usize),
    #[error("weight square at {0} is not positive")]
    NonpositiveWeight(usize),
    #[error("index {index} is beyond the known length {len}")]
    BeyondKnownLength { index: usize, len: usize },
}

type Generator = dyn Fn(usize) -> Result<Rational, SeqError> + Send + Sync;

struct Lazy {
    generator: Box<Generator>,
    memo: Mutex<HashMap<usize, Rational>>,
    known_length: Option<usize>,
}

impl Lazy {
    fn new(generator: Box<Generator>, known_length: Option<usize>) -> Self {
        Lazy {
            generator,
            memo: Mutex::new(HashMap::new()),
            known_length,
        }
    }

    fn get(&self, n: usize) -> Result<Rational, SeqError> {
        if let Some(len) = self.known_length {
            if n >= len {
                return Err(SeqError::BeyondKnownLength { index: n, len });
            }
        }
        if let Some(v) = self.memo.lock().unwrap().get(&n) {
            return Ok(v.clone());
        }
        // evaluated outside the lock; concurrent writers store the same value
        let v = (self.generator)(n)?;
        self.memo.lock().unwrap().insert(n, v.clone());
        Ok(v)
    }
}

/// A sequence `γ_0, γ_1, …` of exact rationals.
#[derive(Clone)]
pub struct MomentSeq {
    inner: Arc<Lazy>,
}

impl fmt::Debug for MomentSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MomentSeq")
            .field("known_length", &self.inner.known_length)
            .finish()
    }
}

impl MomentSeq {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(usize) -> Rational + Send + Sync + 'static,
    {
        Self::from_try_fn(move |n| Ok(f(n)))
    }

    pub fn from_try_fn<F>(f: F) -> Self
    where
        F: Fn(usize) -> Result<Rational, SeqError> + Send + Sync + 'static,
    {
        MomentSeq {
            inner: Arc::new(Lazy::new(Box::new(f), None)),
        }
    }

    /// A finite sequence; indices past the end are an error.
    pub fn from_values(values: Vec<Rational>) -> Self {
        let len = values.len();
        MomentSeq {
            inner: Arc::new(Lazy::new(Box::new(move |n| Ok(values[n].clone())), Some(len))),
        }
    }

    /// Moments `Σ a_i r_i^n` of the retained atoms of a charge.
    pub fn from_charge(charge: &Charge) -> Self {
        let charge = charge.clone();
        Self::from_fn(move |n| charge.moment(n))
    }

    pub fn known_length(&self) -> Option<usize> {
        self.inner.known_length
    }

    pub fn get(&self, n: usize) -> Result<Rational, SeqError> {
        self.inner.get(n)
    }

    pub fn prefix(&self, len: usize) -> Result<Vec<Rational>, SeqError> {
        (0..len).map(|n| self.get(n)).collect()
    }

    /// `γ_n / γ_0`.
    pub fn normalized(&self) -> Result<MomentSeq, SeqError> {
        let g0 = self.get(0)?;
        if g0.is_zero() {
            return Err(SeqError::ZeroMoment(0));
        }
        let src = self.clone();
        Ok(self.derived(move |n| Ok(src.get(n)? / &g0)))
    }

    /// `k^n γ_n`, the moments after multiplying the weights by `√k`.
    pub fn geometric_scale(&self, k: &Rational) -> MomentSeq {
        let (src, k) = (self.clone(), k.clone());
        self.derived(move |n| Ok(pow(&k, n) * src.get(n)?))
    }

    pub fn negated(&self) -> MomentSeq {
        let src = self.clone();
        self.derived(move |n| Ok(-src.get(n)?))
    }

    fn derived<F>(&self, f: F) -> MomentSeq
    where
        F: Fn(usize) -> Result<Rational, SeqError> + Send + Sync + 'static,
    {
        self.derived_with_length(self.known_length(), f)
    }

    fn derived_with_length<F>(&self, known_length: Option<usize>, f: F) -> MomentSeq
    where
        F: Fn(usize) -> Result<Rational, SeqError> + Send + Sync + 'static,
    {
        MomentSeq {
            inner: Arc::new(Lazy::new(Box::new(f), known_length)),
        }
    }
}

/// `(Δs)_n = s_{n+1} − s_n`.
pub fn delta(s: &MomentSeq) -> MomentSeq {
    let src = s.clone();
    let len = s.known_length().map(|l| l.saturating_sub(1));
    s.derived_with_length(len, move |n| Ok(src.get(n + 1)? - src.get(n)?))
}

/// `∇ = −Δ`.
pub fn nabla(s: &MomentSeq) -> MomentSeq {
    let src = s.clone();
    let len = s.known_length().map(|l| l.saturating_sub(1));
    s.derived_with_length(len, move |n| Ok(src.get(n)? - src.get(n + 1)?))
}

/// `Δ^k s`, with `Δ^0` the identity.
pub fn delta_pow(s: &MomentSeq, k: usize) -> MomentSeq {
    (0..k).fold(s.clone(), |acc, _| delta(&acc))
}

/// Weight sequence stored as the squares `α_n²`.
#[derive(Clone)]
pub struct WeightSeq {
    inner: Arc<Lazy>,
}

impl fmt::Debug for WeightSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeightSeq")
            .field("known_length", &self.inner.known_length)
            .finish()
    }
}

impl WeightSeq {
    /// Squares from a generator; nonpositive values are reported as
    /// [`SeqError::NonpositiveWeight`] when evaluated.
    pub fn from_squares_fn<F>(f: F) -> Self
    where
        F: Fn(usize) -> Rational + Send + Sync + 'static,
    {
        Self::from_try(move |n| {
            let sq = f(n);
            if sq.is_positive() {
                Ok(sq)
            } else {
                Err(SeqError::NonpositiveWeight(n))
            }
        })
    }

    pub fn from_squares(values: Vec<Rational>) -> Self {
        let len = values.len();
        let inner = Lazy::new(
            Box::new(move |n| {
                if values[n].is_positive() {
                    Ok(values[n].clone())
                } else {
                    Err(SeqError::NonpositiveWeight(n))
                }
            }),
            Some(len),
        );
        WeightSeq { inner: Arc::new(inner) }
    }

    fn from_try<F>(f: F) -> Self
    where
        F: Fn(usize) -> Result<Rational, SeqError> + Send + Sync + 'static,
    {
        WeightSeq {
            inner: Arc::new(Lazy::new(Box::new(f), None)),
        }
    }

    pub fn known_length(&self) -> Option<usize> {
        self.inner.known_length
    }

    /// `α_n²`.
    pub fn square(&self, n: usize) -> Result<Rational, SeqError> {
        self.inner.get(n)
    }

    pub fn squares(&self, count: usize) -> Result<Vec<Rational>, SeqError> {
        (0..count).map(|n| self.square(n)).collect()
    }

    /// Weights multiplied by `√k`: squares times `k`.
    pub fn scaled(&self, k: &Rational) -> WeightSeq {
        let (src, k) = (self.clone(), k.clone());
        WeightSeq::from_try(move |n| Ok(src.square(n)? * &k))
    }
}

/// `γ_0 = 1`, `γ_{n+1} = γ_n α_n²`.
pub fn moments_from_weights(w: &WeightSeq) -> MomentSeq {
    let src = w.clone();
    let running: Arc<Mutex<Vec<Rational>>> = Arc::new(Mutex::new(vec![Rational::one()]));
    let len = w.known_length().map(|l| l + 1);
    let gen = move |n: usize| -> Result<Rational, SeqError> {
        let mut prefix = running.lock().unwrap();
        while prefix.len() <= n {
            let i = prefix.len() - 1;
            let next = &prefix[i] * src.square(i)?;
            prefix.push(next);
        }
        Ok(prefix[n].clone())
    };
    MomentSeq {
        inner: Arc::new(Lazy::new(Box::new(gen), len)),
    }
}

/// `α_n² = γ_{n+1} / γ_n`, checked positive for `n < count`.
pub fn weights_from_moments(m: &MomentSeq, count: usize) -> Result<WeightSeq, SeqError> {
    let src = m.clone();
    let w = WeightSeq::from_try(move |n| {
        let g = src.get(n)?;
        if g.is_zero() {
            return Err(SeqError::ZeroMoment(n));
        }
        let ratio = src.get(n + 1)? / g;
        if ratio.is_positive() {
            Ok(ratio)
        } else {
            Err(SeqError::NonpositiveRatio(n))
        }
    });
    w.squares(count)?;
    Ok(w)
}

/// Effect of `Δ` on the weights: new square `α_n²(α_{n+1}² − 1)/(α_n² − 1)`.
pub fn delta_on_weights(w: &WeightSeq) -> WeightSeq {
    let src = w.clone();
    WeightSeq::from_try(move |n| {
        let a = src.square(n)?;
        if a.is_one() {
            return Err(SeqError::UnitWeight(n));
        }
        let b = src.square(n + 1)?;
        let out = &a * (b - Rational::one()) / (a - Rational::one());
        if out.is_positive() {
            Ok(out)
        } else {
            Err(SeqError::NonpositiveResult(n))
        }
    })
}

/// Outcome of a finite-depth, finite-horizon check. A pass never claims
/// more than the tested window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Pass {
        depth: usize,
        horizon: usize,
    },
    Fail {
        order: usize,
        index: usize,
        #[serde(with = "crate::rational::serde_str")]
        value: Rational,
    },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass { depth, horizon } => write!(f, "pass (depth {depth}, horizon {horizon})"),
            Verdict::Fail { order, index, value } => {
                write!(f, "fail at (k={order}, n={index}), value {}", format_rational(value))
            }
        }
    }
}

// rows[k][n] = (∇^k s)_n for k <= depth, n <= horizon
fn nabla_table(values: &[Rational], depth: usize, horizon: usize) -> Vec<Vec<Rational>> {
    let mut rows = Vec::with_capacity(depth + 1);
    let mut current: Vec<Rational> = values.to_vec();
    for _ in 0..=depth {
        let next: Vec<Rational> = current.windows(2).map(|w| &w[0] - &w[1]).collect();
        current.truncate(horizon + 1);
        rows.push(std::mem::replace(&mut current, next));
    }
    rows
}

fn first_negative(rows: &[Vec<Rational>], order_offset: usize) -> Option<Verdict> {
    rows.iter().enumerate().find_map(|(k, row)| {
        row.iter()
            .enumerate()
            .find(|(_, v)| v.is_negative())
            .map(|(n, v)| Verdict::Fail {
                order: k + order_offset,
                index: n,
                value: v.clone(),
            })
    })
}

/// `(∇^k s)_n ≥ 0` for all `k ≤ depth`, `n ≤ horizon`.
pub fn completely_monotone_check(s: &MomentSeq, depth: usize, horizon: usize) -> Result<Verdict, SeqError> {
    let values = s.prefix(horizon + depth + 1)?;
    let rows = nabla_table(&values, depth, horizon);
    Ok(first_negative(&rows, 0).unwrap_or(Verdict::Pass { depth, horizon }))
}

/// Complete alternation in the sense that makes `s` completely alternating
/// exactly when `Δs` is completely monotone: `(∇^{k−1} Δ s)_n ≥ 0` for
/// `1 ≤ k ≤ depth`, `n ≤ horizon`. A failure reports the order `k` of the
/// `Δ`-difference involved.
pub fn completely_alternating_check(s: &MomentSeq, depth: usize, horizon: usize) -> Result<Verdict, SeqError> {
    if depth == 0 {
        return Ok(Verdict::Pass { depth, horizon });
    }
    let values = s.prefix(horizon + depth + 1)?;
    let diffs: Vec<Rational> = values.windows(2).map(|w| &w[1] - &w[0]).collect();
    let rows = nabla_table(&diffs, depth - 1, horizon);
    Ok(first_negative(&rows, 1).unwrap_or(Verdict::Pass { depth, horizon }))
}
