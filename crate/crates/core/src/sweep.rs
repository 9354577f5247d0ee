//! Grid sweeps over the `(N, D)` square for a fixed `p`.

use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::charge::{Charge, SignPattern};
use crate::cpd::{find_cpd_weight_multipliers, CpdStatus};
use crate::grws::{certify_normalizer, classify_sector, grws_coefficients, grws_moments, GrwsError, GrwsParams};
use crate::hankel::k_hyponormality_test;
use crate::rational::{format_rational, int, pow, Rational, Sign};
use crate::seqcalc::{completely_alternating_check, completely_monotone_check, MomentSeq};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SweepError {
    #[error("range needs at least one step")]
    NoSteps,
    #[error("{axis} range [{lo}, {hi}] leaves the open square (-1, 1)")]
    OutOfSquare { axis: &'static str, lo: String, hi: String },
    #[error(transparent)]
    Grws(#[from] GrwsError),
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive (`lo` alone when
/// `steps = 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridRange {
    pub lo: Rational,
    pub hi: Rational,
    pub steps: usize,
}

impl GridRange {
    pub fn points(&self) -> Vec<Rational> {
        if self.steps == 1 {
            return vec![self.lo.clone()];
        }
        let gap = (&self.hi - &self.lo) / int(self.steps as i64 - 1);
        (0..self.steps).map(|i| &self.lo + &gap * int(i as i64)).collect()
    }

    fn validate(&self, axis: &'static str) -> Result<(), SweepError> {
        if self.steps == 0 {
            return Err(SweepError::NoSteps);
        }
        let one = Rational::one();
        if self.lo.abs() >= one || self.hi.abs() >= one {
            return Err(SweepError::OutOfSquare {
                axis,
                lo: format_rational(&self.lo),
                hi: format_rational(&self.hi),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSpec {
    pub p: Rational,
    pub n_range: GridRange,
    pub d_range: GridRange,
    /// Depth of the sign pattern and of the charge handed to the CPD search.
    pub depth: usize,
    /// Largest `k` tried for k-hyponormality.
    pub khyp_max: usize,
    /// Hankel bases `m = 0..=m_range` per level.
    pub m_range: usize,
    /// Tail size below which an uncertified normalizer is reported degenerate.
    pub epsilon: Rational,
}

/// One CSV row. `verdicts` is a `;`-separated list of `key=value` pairs:
/// `normalizer` (`ok`/`degenerate`), `cm` and `ca` (complete monotonicity /
/// alternation of the exact moments, `pass`/`fail`), and `cpd` (`subnormal`,
/// `none`, or the `k` values joined by `|`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepRow {
    pub p: String,
    #[serde(rename = "N")]
    pub n: String,
    #[serde(rename = "D")]
    pub d: String,
    pub sector: String,
    pub special_line_j: Option<u32>,
    pub depth: usize,
    pub sign_pattern: String,
    pub khyp_max_tested: usize,
    pub verdicts: String,
}

/// Depth and horizon of the monotone / alternating checks in a sweep row.
const CHECK_DEPTH: usize = 8;

/// Largest `k ≤ k_max` with every level `1..=k` passing on `m = 0..=m_range`.
pub fn max_khyponormal_level(m: &MomentSeq, k_max: usize, m_range: usize) -> usize {
    (1..=k_max)
        .take_while(|&k| k_hyponormality_test(m, k, m_range).is_ok_and(|r| r.passed()))
        .last()
        .unwrap_or(0)
}

pub fn sweep_point(params: &GrwsParams, spec: &SweepSpec) -> SweepRow {
    let sector = classify_sector(params);
    let coefficients = grws_coefficients(params, spec.depth);
    let pattern = SignPattern(coefficients.iter().map(Sign::of).collect());
    let normalizer = match certify_normalizer(params, &spec.epsilon, spec.depth) {
        Ok(_) => "ok",
        Err(_) => "degenerate",
    };
    let moments = grws_moments(params);
    let pass = |ok: bool| if ok { "pass" } else { "fail" };
    let cm = completely_monotone_check(&moments, CHECK_DEPTH, spec.m_range).is_ok_and(|v| v.is_pass());
    let ca = completely_alternating_check(&moments, CHECK_DEPTH, spec.m_range).is_ok_and(|v| v.is_pass());
    let q = params.p().recip();
    let charge = Charge::new(coefficients.iter().enumerate().map(|(i, c)| (pow(&q, i), c.clone())))
        .expect("positions are positive");
    let cpd = match find_cpd_weight_multipliers(&charge).map(|v| v.status) {
        Ok(CpdStatus::AlreadySubnormal) => "subnormal".to_string(),
        Ok(CpdStatus::NoMultiplier) => "none".to_string(),
        Ok(CpdStatus::Multipliers { ks }) => ks.iter().map(format_rational).collect::<Vec<_>>().join("|"),
        Err(e) => format!("error:{e}"),
    };
    SweepRow {
        p: format_rational(params.p()),
        n: format_rational(params.n()),
        d: format_rational(params.d()),
        sector: sector.to_string(),
        special_line_j: sector.special_line,
        depth: spec.depth,
        sign_pattern: pattern.to_string(),
        khyp_max_tested: max_khyponormal_level(&moments, spec.khyp_max, spec.m_range),
        verdicts: format!("normalizer={normalizer};cm={};ca={};cpd={cpd}", pass(cm), pass(ca)),
    }
}

/// Rows in row-major order over `N`, then `D`, computed in parallel on the
/// current rayon pool.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, SweepError> {
    spec.n_range.validate("N")?;
    spec.d_range.validate("D")?;
    let grid: Vec<GrwsParams> = spec
        .n_range
        .points()
        .into_iter()
        .flat_map(|n| spec.d_range.points().into_iter().map(move |d| (n.clone(), d)))
        .map(|(n, d)| GrwsParams::new(spec.p.clone(), n, d))
        .collect::<Result<_, _>>()?;
    Ok(grid.par_iter().map(|params| sweep_point(params, spec)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grws::default_epsilon;
    use crate::rational::rat;
    use num_traits::Zero;

    fn spec(p: Rational, n: (Rational, Rational, usize), d: (Rational, Rational, usize)) -> SweepSpec {
        SweepSpec {
            p,
            n_range: GridRange {
                lo: n.0,
                hi: n.1,
                steps: n.2,
            },
            d_range: GridRange {
                lo: d.0,
                hi: d.1,
                steps: d.2,
            },
            depth: 8,
            khyp_max: 2,
            m_range: 8,
            epsilon: default_epsilon(),
        }
    }

    #[test]
    fn grid_points() {
        let r = GridRange {
            lo: rat(-1, 2),
            hi: rat(1, 2),
            steps: 3,
        };
        assert_eq!(r.points(), vec![rat(-1, 2), Rational::zero(), rat(1, 2)]);
        assert_eq!(
            GridRange {
                lo: rat(1, 3),
                hi: rat(1, 2),
                steps: 1
            }
            .points(),
            vec![rat(1, 3)]
        );
    }

    #[test]
    fn sector_three_block_is_all_plus() {
        let s = spec(int(2), (rat(-3, 10), rat(-1, 10), 3), (rat(4, 10), rat(6, 10), 3));
        let rows = sweep(&s).unwrap();
        assert_eq!(rows.len(), 9);
        for row in &rows {
            assert_eq!(row.sector, "III");
            assert!(row.sign_pattern.split(',').all(|c| c == "+"), "{row:?}");
            assert!(row.verdicts.contains("cm=pass"));
            assert_eq!(row.khyp_max_tested, 2);
        }
        assert_eq!(rows[1].n, "-3/10");
        assert_eq!(rows[1].d, "1/2");
    }

    #[test]
    fn viiib_strip_reports_multiplier_p() {
        let s = spec(int(2), (rat(-2, 5), rat(-2, 5), 1), (rat(-9, 10), rat(-17, 20), 2));
        for row in sweep(&s).unwrap() {
            assert_eq!(row.sector, "VIIIB");
            assert!(row.verdicts.ends_with("cpd=2/1"), "{row:?}");
        }
    }

    #[test]
    fn rejects_bad_ranges() {
        let s = spec(int(2), (rat(-1, 1), rat(0, 1), 2), (rat(0, 1), rat(1, 2), 2));
        assert!(matches!(sweep(&s), Err(SweepError::OutOfSquare { .. })));
        let s = spec(int(2), (rat(-1, 2), rat(0, 1), 0), (rat(0, 1), rat(1, 2), 2));
        assert_eq!(sweep(&s), Err(SweepError::NoSteps));
    }
}
