mod common;

use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use common::{cauchy_binet_det, direct_moment, leibniz_det};
use shiftcharge::grws::default_epsilon;
use shiftcharge::linalg::{self, psd_test_exhaustive, psd_test_pivoted};
use shiftcharge::rational::{big, format_rational, int, parse_rational, pow, rat};
use shiftcharge::{
    certify_normalizer, charge_from_delta_measure, che_charge_from_sigma, classify_sector, completely_monotone_check,
    delta_measure_of_charge, expected_sign_pattern, find_cpd_weight_multipliers, grws_charge_at_depth,
    grws_coefficients, grws_moments, grws_multiplier, grws_weight_sq, hankel_matrix, is_cpd_multiplier,
    k_hyponormality_test, moments_from_weights, q_poly, restriction_shift, weights_from_moments, Charge, CpdStatus,
    GrwsError, GrwsParams, MomentSeq, PsdVerdict, Rational, SectorTag,
};

fn rational(max_num: i64, max_den: i64) -> impl Strategy<Value = Rational> {
    (-max_num..=max_num, 1..=max_den).prop_map(|(n, d)| rat(n, d))
}

fn nonzero(max_num: i64, max_den: i64) -> impl Strategy<Value = Rational> {
    rational(max_num, max_den).prop_filter("nonzero", |v| !v.is_zero())
}

fn position() -> impl Strategy<Value = Rational> {
    (1i64..=16, 1i64..=8).prop_map(|(n, d)| rat(n, d))
}

fn unit_position() -> impl Strategy<Value = Rational> {
    (1i64..=15).prop_map(|n| rat(n, 16))
}

fn charge(max_atoms: usize) -> impl Strategy<Value = Charge> {
    prop::collection::vec((position(), nonzero(9, 5)), 1..=max_atoms)
        .prop_map(|atoms| Charge::new(atoms).unwrap())
        .prop_filter("nonempty after merging", |c| !c.is_empty())
}

fn positive_unit_charge(max_atoms: usize) -> impl Strategy<Value = Charge> {
    prop::collection::vec((unit_position(), (1i64..=9).prop_map(|n| rat(n, 9))), 1..=max_atoms)
        .prop_map(|atoms| Charge::new(atoms).unwrap())
}

fn sigma() -> impl Strategy<Value = Charge> {
    prop::collection::vec(
        (
            (0i64..=15).prop_map(|n| rat(n, 16)),
            (1i64..=10).prop_map(|n| rat(n, 10)),
        ),
        1..=5,
    )
    .prop_map(|atoms| Charge::new(atoms).unwrap())
}

fn grws_params() -> impl Strategy<Value = GrwsParams> {
    let p = prop_oneof![Just(rat(3, 2)), Just(int(2)), Just(int(3)), Just(rat(5, 4))];
    (p, -19i64..=19, -19i64..=19).prop_map(|(p, n, d)| GrwsParams::new(p, rat(n, 20), rat(d, 20)).unwrap())
}

fn symmetric(size: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
    prop::collection::vec(rational(6, 4), size * (size + 1) / 2).prop_map(move |upper| {
        let mut m = vec![vec![Rational::zero(); size]; size];
        let mut it = upper.into_iter();
        for i in 0..size {
            for j in i..size {
                let v = it.next().unwrap();
                m[i][j] = v.clone();
                m[j][i] = v;
            }
        }
        m
    })
}

fn atoms_of(c: &Charge) -> Vec<(Rational, Rational)> {
    c.atoms()
        .iter()
        .map(|a| (a.position.clone(), a.density.clone()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn rational_text_round_trip(v in rational(1_000_000, 1_000_000)) {
        prop_assert_eq!(parse_rational(&format_rational(&v)).unwrap(), v);
    }

    #[test]
    fn charge_is_sorted_merged_and_nonzero(c in charge(6)) {
        let atoms = c.atoms();
        prop_assert!(atoms.windows(2).all(|w| w[0].position > w[1].position));
        prop_assert!(atoms.iter().all(|a| !a.density.is_zero()));
        prop_assert_eq!(c.is_normalized(), c.total_mass().is_one());
    }

    #[test]
    fn charge_json_round_trip(c in charge(5)) {
        let text = serde_json::to_string(&c).unwrap();
        let back: Charge = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn convolution_commutes_and_multiplies_moments(a in charge(4), b in charge(4), n in 0usize..8) {
        prop_assert_eq!(a.convolve(&b), b.convolve(&a));
        prop_assert_eq!(a.convolve(&b).moment(n), a.moment(n) * b.moment(n));
    }

    #[test]
    fn delta2_matches_second_difference(c in charge(5), n in 0usize..10) {
        let atoms = atoms_of(&c);
        let expected = direct_moment(&atoms, n + 2) - int(2) * direct_moment(&atoms, n + 1) + direct_moment(&atoms, n);
        prop_assert_eq!(c.delta2_transform().moment(n), expected);
    }

    #[test]
    fn position_scaling_multiplies_moments(c in charge(5), k in position(), n in 0usize..10) {
        prop_assert_eq!(c.scale_positions(&k).unwrap().moment(n), pow(&k, n) * c.moment(n));
    }

    #[test]
    fn weights_and_moments_invert(c in positive_unit_charge(4)) {
        let m = MomentSeq::from_charge(&c.normalized_by_abs_mass().unwrap());
        let w = weights_from_moments(&m, 12).unwrap();
        let back = moments_from_weights(&w);
        prop_assert_eq!(back.prefix(12).unwrap(), m.prefix(12).unwrap());
    }

    #[test]
    fn positive_unit_charges_are_completely_monotone(c in positive_unit_charge(4)) {
        let m = MomentSeq::from_charge(&c);
        prop_assert!(completely_monotone_check(&m, 8, 12).unwrap().is_pass());
    }

    #[test]
    fn bareiss_matches_leibniz(m in (1usize..=4).prop_flat_map(symmetric)) {
        prop_assert_eq!(linalg::det(&m), leibniz_det(&m));
    }

    #[test]
    fn psd_strategies_agree(m in (1usize..=5).prop_flat_map(symmetric)) {
        let exhaustive = psd_test_exhaustive(&m);
        let pivoted = psd_test_pivoted(&m);
        prop_assert_eq!(exhaustive.is_psd(), pivoted.is_psd());
        prop_assert_eq!(linalg::psd_test(&m).is_psd(), exhaustive.is_psd());
        if let PsdVerdict::NotPsd { minor, value } = pivoted {
            prop_assert!(value.is_negative());
            prop_assert_eq!(linalg::principal_minor(&m, &minor), value);
        }
    }

    #[test]
    fn gram_matrices_are_psd(b in (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(rational(5, 3), c), r))) {
        let cols = b[0].len();
        let g: Vec<Vec<Rational>> = (0..cols)
            .map(|i| (0..cols).map(|j| b.iter().map(|row| &row[i] * &row[j]).sum()).collect())
            .collect();
        prop_assert!(linalg::psd_test(&g).is_psd());
    }

    #[test]
    fn hankel_det_matches_cauchy_binet(c in charge(5), n in 0usize..6, k in 1usize..=4) {
        let m = MomentSeq::from_charge(&c);
        let det = linalg::det(&hankel_matrix(&m, n, k).unwrap().rows());
        prop_assert_eq!(det, cauchy_binet_det(&atoms_of(&c), n, k));
    }

    #[test]
    fn positive_measures_are_k_hyponormal(c in positive_unit_charge(4), k in 1usize..=3) {
        let m = MomentSeq::from_charge(&c);
        prop_assert!(k_hyponormality_test(&m, k, 6).unwrap().passed());
    }

    #[test]
    fn khyp_report_matches_sequential_scan(c in charge(4), k in 1usize..=2) {
        let m = MomentSeq::from_charge(&c);
        let report = k_hyponormality_test(&m, k, 10).unwrap();
        let first_bad = (0..=10).find(|&base| !linalg::psd_test(&hankel_matrix(&m, base, k + 1).unwrap().rows()).is_psd());
        prop_assert_eq!(report.first_failure().map(|e| e.m), first_bad);
        prop_assert!(report.entries.iter().enumerate().all(|(i, e)| e.m == i));
    }

    #[test]
    fn restriction_shifts_compose(c in positive_unit_charge(4), a in 0usize..5, b in 0usize..5) {
        let m = MomentSeq::from_charge(&c);
        let twice = restriction_shift(&restriction_shift(&m, a).unwrap(), b).unwrap();
        let once = restriction_shift(&m, a + b).unwrap();
        prop_assert_eq!(twice.prefix(8).unwrap(), once.prefix(8).unwrap());
    }

    #[test]
    fn grws_density_recurrence(params in grws_params()) {
        let c = grws_coefficients(&params, 14);
        prop_assert!(c[0].is_one());
        for n in 1..=14 {
            prop_assert_eq!(&c[n], &(&c[n - 1] * grws_multiplier(&params, n)));
        }
    }

    #[test]
    fn grws_weights_match_truncated_charge(params in grws_params()) {
        match grws_charge_at_depth(&params, 24) {
            Ok(gc) => {
                let exact = grws_moments(&params);
                for n in 0..=16 {
                    let err = (exact.get(n).unwrap() - gc.charge().moment(n)).abs();
                    prop_assert!(err <= gc.moment_error_bound(n), "n = {}", n);
                }
            }
            Err(GrwsError::DegenerateNormalizer { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn grws_special_lines_truncate(p in prop_oneof![Just(rat(3, 2)), Just(int(2)), Just(int(3))], j in 1u32..=3, num in -9i64..=9) {
        prop_assume!(num != 0);
        let n = rat(num, 10) / pow(&p, j as usize);
        let params = GrwsParams::new(p.clone(), n.clone(), pow(&p, j as usize) * n).unwrap();
        let c = grws_coefficients(&params, 12);
        prop_assert!(c[(j as usize + 1)..].iter().all(Zero::is_zero));
        prop_assert!(c[..=(j as usize)].iter().all(|v| !v.is_zero()));
        prop_assert_eq!(classify_sector(&params).special_line, Some(j));
    }

    #[test]
    fn grws_diagonal_is_unweighted(p in prop_oneof![Just(rat(3, 2)), Just(int(2))], num in -19i64..=19, n in 0usize..20) {
        let params = GrwsParams::new(p, rat(num, 20), rat(num, 20)).unwrap();
        prop_assert!(grws_weight_sq(&params, n).is_one());
    }

    #[test]
    fn grws_templates_match_when_known(params in grws_params()) {
        let sector = classify_sector(&params);
        let template = expected_sign_pattern(&sector);
        let pattern = shiftcharge::SignPattern(grws_coefficients(&params, 12).iter().map(shiftcharge::Sign::of).collect());
        if template.expand(1).is_some() {
            prop_assert!(template.matches(&pattern), "{:?} {}", sector, pattern);
        }
        if matches!(sector.tag, Some(SectorTag::V | SectorTag::VI | SectorTag::VII)) {
            prop_assert!(template.expand(1).is_none());
        }
    }

    #[test]
    fn che_forward_and_round_trip(s in sigma()) {
        let ch = che_charge_from_sigma(&s).unwrap();
        prop_assert!(ch.is_normalized());
        let dm = delta_measure_of_charge(&ch).unwrap();
        prop_assert_eq!(charge_from_delta_measure(&dm).unwrap(), ch);
    }

    #[test]
    fn q_poly_second_difference(x in rational(12, 7), n in 0usize..=12) {
        prop_assert_eq!(q_poly(n + 2, &x) - int(2) * q_poly(n + 1, &x) + q_poly(n, &x), pow(&x, n));
    }

    #[test]
    fn cpd_multiplier_law(c in charge(6)) {
        let census = c.sign_census();
        let v = find_cpd_weight_multipliers(&c).unwrap();
        let count = v.multipliers().len();
        prop_assert!(count <= 2);
        match (census.plus, census.minus) {
            (0, _) | (_, 0) => prop_assert_eq!(&v.status, &CpdStatus::AlreadySubnormal),
            (1, 1) => prop_assert_eq!(count, 2),
            (1, _) | (_, 1) => prop_assert_eq!(count, 1),
            _ => prop_assert_eq!(&v.status, &CpdStatus::NoMultiplier),
        }
        for k in v.multipliers() {
            prop_assert!(is_cpd_multiplier(&c, k).unwrap());
            let transformed = shiftcharge::scaled_delta2_charge(&c, k).unwrap();
            if !transformed.is_empty() {
                let m = MomentSeq::from_charge(&transformed);
                let orient = if m.get(0).unwrap().is_negative() { m.negated() } else { m };
                prop_assert!(weights_from_moments(&orient, 8).is_ok());
            }
        }
    }

    #[test]
    fn cpd_non_multipliers_fail(c in charge(6), num in 1i64..=40, den in 1i64..=8) {
        let census = c.sign_census();
        prop_assume!(census.plus > 0 && census.minus > 0);
        let k = rat(num, den);
        let v = find_cpd_weight_multipliers(&c).unwrap();
        prop_assume!(!v.multipliers().contains(&k));
        prop_assert!(!is_cpd_multiplier(&c, &k).unwrap());
    }

    #[test]
    fn long_rational_helpers_match_ratio(a in rational(1000, 999), b in nonzero(1000, 999), e in 0usize..600) {
        let a = a * pow(&rat(7, 5), e);
        let b = b / pow(&rat(11, 13), e / 2);
        prop_assert_eq!(big::add(&a, &b), &a + &b);
        prop_assert_eq!(big::mul(&a, &b), &a * &b);
        prop_assert_eq!(big::div(&a, &b), &a / &b);
    }

    #[test]
    fn certified_normalizer_builds_a_charge(params in grws_params()) {
        if let Ok(d) = certify_normalizer(&params, &default_epsilon(), 0) {
            prop_assert!(grws_charge_at_depth(&params, d).is_ok());
        }
    }
}
