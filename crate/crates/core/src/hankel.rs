//! Hankel moment matrices, k-hyponormality scans, and asymptotic signs of
//! Hankel determinants for atomic charges.
//!
//! For a finite charge `Σ a_i δ_{r_i}` the k×k determinant at base `n`
//! expands (Cauchy–Binet) as a sum over k-subsets `C` of atoms of
//! `Π_{i∈C} a_i r_i^n · V_C` with `V_C = Π_{i<j∈C} (r_i − r_j)² > 0`. The
//! subset of the k largest atoms dominates for large `n`, so the sign of
//! `det M_n^k` is eventually the sign of `a_1⋯a_k`.
//! [`dominance_threshold`] makes "eventually" explicit.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::charge::{Charge, ChargeError};
use crate::linalg::{self, PsdVerdict, Rows};
use crate::rational::{pow, Rational, Sign};
use crate::seqcalc::{MomentSeq, SeqError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HankelError {
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Charge(#[from] ChargeError),
    #[error("matrix size / order must be at least 1")]
    InvalidOrder,
    #[error("charge has {atoms} atoms, fewer than the order {k}")]
    TooFewAtoms { atoms: usize, k: usize },
    #[error("atom at position 0; the determinant asymptotics need positive positions")]
    ZeroPosition,
    #[error("determinant certificates need an untruncated charge")]
    TruncatedCharge,
}

/// `size × size` matrix with entry `(i, j) = γ_{base+i+j}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HankelMatrix {
    base: usize,
    size: usize,
    // γ_base, …, γ_{base+2size−2}
    values: Vec<Rational>,
}

impl HankelMatrix {
    pub fn from_moments(moments: &[Rational], base: usize, size: usize) -> Self {
        HankelMatrix {
            base,
            size,
            values: moments[base..base + 2 * size - 1].to_vec(),
        }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.values[i + j]
    }

    pub fn rows(&self) -> Rows {
        (0..self.size).map(|i| self.values[i..i + self.size].to_vec()).collect()
    }
}

pub fn hankel_matrix(m: &MomentSeq, n: usize, size: usize) -> Result<HankelMatrix, HankelError> {
    if size == 0 {
        return Err(HankelError::InvalidOrder);
    }
    let values = (n..n + 2 * size - 1).map(|i| m.get(i)).collect::<Result<Vec<_>, _>>()?;
    Ok(HankelMatrix { base: n, size, values })
}

pub fn exact_det(h: &HankelMatrix) -> Rational {
    linalg::det(&h.rows())
}

pub fn psd_test(h: &HankelMatrix) -> PsdVerdict {
    linalg::psd_test(&h.rows())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HankelScanEntry {
    pub m: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub det: Rational,
    pub verdict: PsdVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HankelOverall {
    /// Every tested matrix was PSD; says nothing about `m > horizon`.
    PassToHorizon { horizon: usize },
    /// First (smallest) base index whose matrix is not PSD.
    NotPsd { m: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HankelReport {
    pub k: usize,
    pub m_range: usize,
    pub entries: Vec<HankelScanEntry>,
    pub overall: HankelOverall,
}

impl HankelReport {
    pub fn passed(&self) -> bool {
        matches!(self.overall, HankelOverall::PassToHorizon { .. })
    }

    pub fn first_failure(&self) -> Option<&HankelScanEntry> {
        match self.overall {
            HankelOverall::NotPsd { m } => self.entries.iter().find(|e| e.m == m),
            HankelOverall::PassToHorizon { .. } => None,
        }
    }
}

/// Tests the `(k+1)×(k+1)` Hankel matrices at bases `m = 0..=m_range`.
pub fn k_hyponormality_test(m: &MomentSeq, k: usize, m_range: usize) -> Result<HankelReport, HankelError> {
    if k == 0 {
        return Err(HankelError::InvalidOrder);
    }
    let size = k + 1;
    let moments = m.prefix(m_range + 2 * size - 1)?;
    let entries: Vec<HankelScanEntry> = (0..=m_range)
        .into_par_iter()
        .map(|base| {
            let rows = HankelMatrix::from_moments(&moments, base, size).rows();
            HankelScanEntry {
                m: base,
                det: linalg::det(&rows),
                verdict: linalg::psd_test(&rows),
            }
        })
        .collect();
    let overall = entries
        .iter()
        .find(|e| !e.verdict.is_psd())
        .map(|e| HankelOverall::NotPsd { m: e.m })
        .unwrap_or(HankelOverall::PassToHorizon { horizon: m_range });
    Ok(HankelReport {
        k,
        m_range,
        entries,
        overall,
    })
}

/// Moments of the restriction to `⋁{e_i : i ≥ shift}`: `γ_{n+shift} / γ_shift`.
pub fn restriction_shift(m: &MomentSeq, shift: usize) -> Result<MomentSeq, HankelError> {
    let g = m.get(shift)?;
    if g.is_zero() {
        return Err(SeqError::ZeroMoment(shift).into());
    }
    let src = m.clone();
    Ok(MomentSeq::from_try_fn(move |n| Ok(src.get(n + shift)? / &g)))
}

/// Eventual sign of `det M_n^k`: the sign of the product of the first `k`
/// densities, or zero when there are fewer than `k` atoms.
pub fn asymptotic_k_det_sign(c: &Charge, k: usize) -> Result<Sign, HankelError> {
    if k == 0 {
        return Err(HankelError::InvalidOrder);
    }
    if c.len() < k {
        if c.is_truncated() {
            return Err(HankelError::TooFewAtoms { atoms: c.len(), k });
        }
        return Ok(Sign::Zero);
    }
    Ok(c.densities().take(k).map(Sign::of).fold(Sign::Plus, |a, b| a * b))
}

/// Explicit index past which the leading k-subset dominates `det M_n^k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominanceBound {
    pub k: usize,
    /// `B = max |a_j|` (tail mass included).
    #[serde(with = "crate::rational::serde_str")]
    pub max_density: Rational,
    /// `s = Σ |a_j|` (tail mass included).
    #[serde(with = "crate::rational::serde_str")]
    pub abs_mass: Rational,
    /// `L = Π_{i<j≤k} (r_i − r_j)²`, the k×k Hankel determinant of `Σ_{i≤k} δ_{r_i}` at `n = 0`.
    #[serde(with = "crate::rational::serde_str")]
    pub leading_constant: Rational,
    /// `k! · max(1, r_1)^{k(2k−2)}`, bounding every other subset's constant.
    #[serde(with = "crate::rational::serde_str")]
    pub kernel_bound: Rational,
    pub n_star: usize,
}

struct DominanceTerms<'a> {
    k: usize,
    leading: &'a [Rational],
    lead_density: Rational,
    next: Rational,
    b: Rational,
    s: Rational,
    l: Rational,
    kernel: Rational,
    binom: Vec<Rational>,
    inv_factorial: Vec<Rational>,
}

impl DominanceTerms<'_> {
    fn prefix_power(&self, len: usize, n: usize) -> Rational {
        self.leading[..len].iter().map(|r| pow(r, n)).product()
    }

    // |a_1⋯a_k| (r_1⋯r_k)^n L  >  one-excluded bound + many-excluded bound
    fn dominates(&self, n: usize) -> bool {
        let k = self.k;
        let dominant = &self.lead_density * self.prefix_power(k, n) * &self.l;
        let next_n = pow(&self.next, n);
        let one_excluded = &self.s * pow(&self.b, k - 1) * self.prefix_power(k - 1, n) * &next_n * &self.kernel;
        let tail_weight = &self.s * &next_n;
        let many_excluded: Rational = (2..=k)
            .map(|m| {
                &self.binom[m]
                    * pow(&self.b, k - m)
                    * self.prefix_power(k - m, n)
                    * pow(&tail_weight, m)
                    * &self.inv_factorial[m]
            })
            .sum::<Rational>()
            * &self.kernel;
        dominant > one_excluded + many_excluded
    }
}

/// Smallest `n_star` such that for every `n ≥ n_star` the leading term
/// `|a_1⋯a_k| (r_1⋯r_k)^n L` strictly exceeds the combined bound on all
/// other k-subsets:
///
/// * one excluded atom: `s B^{k−1} (r_1⋯r_{k−1})^n r_{k+1}^n · K`
/// * `m ≥ 2` excluded: `K · Σ_m C(k,m) B^{k−m} (r_1⋯r_{k−m})^n (s r_{k+1}^n)^m / m!`
///
/// with `K = k! max(1, r_1)^{k(2k−2)}`. Every ratio to the leading term is
/// geometric with ratio below 1, so the comparison is monotone in `n` and a
/// doubling-then-bisection search finds the threshold. For a truncated
/// charge the tail mass enters `B` and `s` and the tail position stands in
/// for `r_{k+1}` when no retained atom remains.
pub fn dominance_threshold(c: &Charge, k: usize) -> Result<DominanceBound, HankelError> {
    if k == 0 {
        return Err(HankelError::InvalidOrder);
    }
    if c.len() < k {
        return Err(HankelError::TooFewAtoms { atoms: c.len(), k });
    }
    if c.positions().any(|r| r.is_zero()) {
        return Err(HankelError::ZeroPosition);
    }
    let positions: Vec<Rational> = c.positions().cloned().collect();
    let tail = c.tail();
    let zero = Rational::zero();
    let tail_mass = tail.map_or(&zero, |t| t.mass());
    let b = c.max_abs_density().max(tail_mass.clone());
    let s = c.abs_mass() + tail_mass;
    let leading_unit = Charge::new(positions[..k].iter().map(|r| (r.clone(), Rational::one())))?;
    let l = linalg::det(&HankelMatrix::from_moments(&moment_prefix(&leading_unit, 2 * k - 1), 0, k).rows());
    let r1 = positions[0].clone();
    let kernel = factorial(k) * pow(&r1.max(Rational::one()), k * (2 * k - 2));

    let next = match (positions.get(k), tail) {
        (Some(r), _) => r.clone(),
        (None, Some(t)) => t.position().clone(),
        (None, None) => {
            // only the leading subset exists: det M_n^k = a_1⋯a_k (r_1⋯r_k)^n L exactly
            return Ok(DominanceBound {
                k,
                max_density: b,
                abs_mass: s,
                leading_constant: l,
                kernel_bound: kernel,
                n_star: 0,
            });
        }
    };

    let terms = DominanceTerms {
        k,
        leading: &positions[..k],
        lead_density: c.densities().take(k).product::<Rational>().abs(),
        next,
        b: b.clone(),
        s: s.clone(),
        l: l.clone(),
        kernel: kernel.clone(),
        binom: (0..=k).map(|m| binomial(k, m)).collect(),
        inv_factorial: (0..=k).map(|m| factorial(m).recip()).collect(),
    };

    let n_star = if terms.dominates(0) {
        0
    } else {
        let mut hi = 1usize;
        while !terms.dominates(hi) {
            hi *= 2;
        }
        let mut lo = hi / 2; // fails at lo
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if terms.dominates(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    Ok(DominanceBound {
        k,
        max_density: b,
        abs_mass: s,
        leading_constant: l,
        kernel_bound: kernel,
        n_star,
    })
}

fn moment_prefix(c: &Charge, len: usize) -> Vec<Rational> {
    (0..len).map(|n| c.moment(n)).collect()
}

fn factorial(n: usize) -> Rational {
    Rational::from_integer((1..=n).map(BigInt::from).product())
}

fn binomial(n: usize, m: usize) -> Rational {
    factorial(n) / (factorial(m) * factorial(n - m))
}

/// Signs of `det M_n^k` for every `n`: exact values below `n_star`, the
/// asymptotic sign from `n_star` on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeterminantSignCertificate {
    pub k: usize,
    pub n_star: usize,
    pub asymptotic_sign: Sign,
    pub initial_signs: Vec<Sign>,
}

impl DeterminantSignCertificate {
    pub fn sign_at(&self, n: usize) -> Sign {
        self.initial_signs.get(n).copied().unwrap_or(self.asymptotic_sign)
    }

    /// Strictly positive determinants at every base index.
    pub fn all_positive(&self) -> bool {
        self.asymptotic_sign == Sign::Plus && self.initial_signs.iter().all(|s| *s == Sign::Plus)
    }
}

pub fn certify_determinant_signs(c: &Charge, k: usize) -> Result<DeterminantSignCertificate, HankelError> {
    if c.is_truncated() {
        return Err(HankelError::TruncatedCharge);
    }
    let bound = dominance_threshold(c, k)?;
    let asymptotic_sign = asymptotic_k_det_sign(c, k)?;
    let moments = moment_prefix(c, bound.n_star + 2 * k);
    let initial_signs = (0..bound.n_star)
        .into_par_iter()
        .map(|n| Sign::of(&linalg::det(&HankelMatrix::from_moments(&moments, n, k).rows())))
        .collect();
    Ok(DeterminantSignCertificate {
        k,
        n_star: bound.n_star,
        asymptotic_sign,
        initial_signs,
    })
}
