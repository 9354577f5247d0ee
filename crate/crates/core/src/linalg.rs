//! Exact determinants and positive-semidefiniteness tests for small dense
//! rational matrices.
//!
//! Determinants clear denominators once and run fraction-free (Bareiss)
//! elimination over the integers, so every intermediate division is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::rational::Rational;

/// Row-major square matrix.
pub type Rows = Vec<Vec<Rational>>;

/// Largest size decided by the exhaustive principal-minor criterion;
/// larger matrices use symmetric pivoted elimination.
pub const EXHAUSTIVE_PSD_MAX: usize = 8;

fn common_denominator(rows: &[Vec<Rational>]) -> BigInt {
    rows.iter().flatten().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

fn integer_rows(rows: &[Vec<Rational>], scale: &BigInt) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|row| row.iter().map(|v| v.numer() * (scale / v.denom())).collect())
        .collect()
}

/// Runs Bareiss elimination in place. Returns the determinant of the
/// integer matrix.
fn bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Exact determinant (the empty matrix has determinant 1).
pub fn det(rows: &[Vec<Rational>]) -> Rational {
    let n = rows.len();
    if n == 0 {
        return Rational::one();
    }
    let scale = common_denominator(rows);
    let numer = bareiss(integer_rows(rows, &scale));
    Rational::new(numer, num_traits::pow(scale, n))
}

/// Leading principal minors `det A[..j]` for `j = 1..=n`, from a single
/// pivot-free Bareiss pass. Stops after the first zero minor, so the
/// result may be shorter than `n`.
pub fn leading_minors(rows: &[Vec<Rational>]) -> Vec<Rational> {
    let n = rows.len();
    let scale = common_denominator(rows);
    let mut m = integer_rows(rows, &scale);
    let mut out = Vec::with_capacity(n);
    let mut prev = BigInt::one();
    let mut scale_pow = BigInt::one();
    for k in 0..n {
        // before step k the pivot equals the (k+1)-th leading minor of the integer matrix
        scale_pow *= &scale;
        let minor = Rational::new(m[k][k].clone(), scale_pow.clone());
        let stop = minor.is_zero();
        out.push(minor);
        if stop {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    out
}

pub fn submatrix(rows: &[Vec<Rational>], idx: &[usize]) -> Rows {
    idx.iter()
        .map(|&i| idx.iter().map(|&j| rows[i][j].clone()).collect())
        .collect()
}

pub fn principal_minor(rows: &[Vec<Rational>], idx: &[usize]) -> Rational {
    det(&submatrix(rows, idx))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PsdVerdict {
    /// Every leading principal minor is strictly positive.
    PositiveDefinite,
    /// Positive semidefinite but singular.
    PsdSingular,
    /// `det A[minor] = value < 0` for the listed principal submatrix.
    NotPsd {
        minor: Vec<usize>,
        #[serde(with = "crate::rational::serde_str")]
        value: Rational,
    },
}

impl PsdVerdict {
    pub fn is_psd(&self) -> bool {
        !matches!(self, PsdVerdict::NotPsd { .. })
    }
}

/// PSD test for a symmetric matrix. Leading minors give the positive
/// definite fast path; otherwise sizes up to [`EXHAUSTIVE_PSD_MAX`] check
/// all principal minors and larger sizes fall back to
/// [`psd_test_pivoted`].
pub fn psd_test(rows: &[Vec<Rational>]) -> PsdVerdict {
    let n = rows.len();
    let leading = leading_minors(rows);
    if leading.len() == n && leading.iter().all(|m| m.is_positive()) {
        return PsdVerdict::PositiveDefinite;
    }
    if let Some(j) = leading.iter().position(|m| m.is_negative()) {
        return PsdVerdict::NotPsd {
            minor: (0..=j).collect(),
            value: leading[j].clone(),
        };
    }
    if n <= EXHAUSTIVE_PSD_MAX {
        psd_test_exhaustive(rows)
    } else {
        psd_test_pivoted(rows)
    }
}

/// All `2^n − 1` principal minors, by increasing size then lexicographic
/// order; the first negative one is the witness.
pub fn psd_test_exhaustive(rows: &[Vec<Rational>]) -> PsdVerdict {
    let n = rows.len();
    let mut subsets: Vec<Vec<usize>> = (1u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut all_positive = true;
    for idx in subsets {
        let value = principal_minor(rows, &idx);
        if value.is_negative() {
            return PsdVerdict::NotPsd { minor: idx, value };
        }
        all_positive &= value.is_positive();
    }
    if all_positive {
        PsdVerdict::PositiveDefinite
    } else {
        PsdVerdict::PsdSingular
    }
}

/// Symmetric elimination with diagonal pivoting. A negative pivot, or a
/// zero diagonal with a nonzero off-diagonal entry in the Schur
/// complement, exhibits a negative principal minor.
pub fn psd_test_pivoted(rows: &[Vec<Rational>]) -> PsdVerdict {
    let n = rows.len();
    let mut schur: Rows = rows.to_vec();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut chosen: Vec<usize> = Vec::new();
    loop {
        if remaining.is_empty() {
            return PsdVerdict::PositiveDefinite;
        }
        if let Some(&i) = remaining.iter().find(|&&i| schur[i][i].is_negative()) {
            return witness(rows, &chosen, &[i]);
        }
        let pivot = remaining.iter().copied().find(|&i| schur[i][i].is_positive());
        let Some(p) = pivot else {
            for (a, &i) in remaining.iter().enumerate() {
                for &j in &remaining[a + 1..] {
                    if !schur[i][j].is_zero() {
                        return witness(rows, &chosen, &[i, j]);
                    }
                }
            }
            return PsdVerdict::PsdSingular;
        };
        remaining.retain(|&i| i != p);
        for &i in &remaining {
            let factor = &schur[i][p] / &schur[p][p];
            for &j in &remaining {
                let update = &factor * &schur[p][j];
                schur[i][j] -= update;
            }
        }
        chosen.push(p);
    }
}

fn witness(rows: &[Vec<Rational>], chosen: &[usize], extra: &[usize]) -> PsdVerdict {
    let mut idx: Vec<usize> = chosen.iter().chain(extra).copied().collect();
    idx.sort_unstable();
    let value = principal_minor(rows, &idx);
    debug_assert!(value.is_negative());
    PsdVerdict::NotPsd { minor: idx, value }
}
