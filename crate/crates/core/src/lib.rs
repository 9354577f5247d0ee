//! Exact-arithmetic toolkit for subnormal weighted shifts: atomic charges,
//! moment and weight sequences, Hankel positivity, recursively generated
//! weights, and conditional-positive-definiteness tests.

pub mod charge;
pub mod che;
pub mod cpd;
pub mod grws;
pub mod hankel;
pub mod linalg;
pub mod rational;
pub mod seqcalc;
pub mod sweep;

pub use charge::{Atom, Charge, ChargeError, SignCensus, SignPattern, SubnormalVerdict, TailBound};
pub use che::{
    charge_from_delta_measure, che_charge_from_sigma, cpd_like_representation, delta_measure_of_charge,
    integrability_test, levy_khinchin_of_charge, q_poly, CheError, CpdLikeRepresentation, DeltaMeasure, Integrability,
    LevyKhinchinData,
};
pub use cpd::{
    find_cpd_weight_multipliers, is_cpd_multiplier, is_cpd_weights, scaled_delta2_charge, Completeness, CpdError,
    CpdEvidence, CpdStatus, CpdVerdict, CpdWeightsReport, CpdWeightsVerdict, NotCpdReason,
};
pub use grws::{
    certify_normalizer, classify_sector, expected_sign_pattern, grws_charge, grws_charge_at_depth,
    grws_charge_min_depth, grws_coefficients, grws_density, grws_moments, grws_multiplier, grws_weight_sq,
    grws_weights, Boundary, GrwsCharge, GrwsError, GrwsParams, Sector, SectorTag, SignTemplate,
};
pub use hankel::{
    asymptotic_k_det_sign, certify_determinant_signs, dominance_threshold, exact_det, hankel_matrix,
    k_hyponormality_test, psd_test, restriction_shift, DeterminantSignCertificate, DominanceBound, HankelError,
    HankelMatrix, HankelOverall, HankelReport, HankelScanEntry,
};
pub use linalg::PsdVerdict;
pub use rational::{format_rational, parse_rational, Exact, ParseRationalError, Rational, Sign};
pub use seqcalc::{
    completely_alternating_check, completely_monotone_check, delta, delta_on_weights, delta_pow, moments_from_weights,
    nabla, weights_from_moments, MomentSeq, SeqError, Verdict, WeightSeq, DEFAULT_DEPTH, DEFAULT_HORIZON,
};
pub use sweep::{sweep, sweep_point, GridRange, SweepError, SweepRow, SweepSpec};
