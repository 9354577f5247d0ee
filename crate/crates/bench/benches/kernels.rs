use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shiftcharge::grws::default_epsilon;
use shiftcharge::{
    certify_determinant_signs, certify_normalizer, charge_from_delta_measure, che_charge_from_sigma,
    delta_measure_of_charge, exact_det, find_cpd_weight_multipliers, grws_charge, grws_coefficients, hankel_matrix,
    k_hyponormality_test, psd_test, sweep, MomentSeq,
};
use shiftcharge_bench::{alternating_charge, grws_points, one_negative_charge, positive_charge, sigma, sweep_spec};

fn hankel(c: &mut Criterion) {
    let mut group = c.benchmark_group("hankel");
    for size in [4usize, 6, 8, 10] {
        let moments = MomentSeq::from_charge(&alternating_charge(size));
        let h = hankel_matrix(&moments, 5, size).unwrap();
        group.bench_with_input(BenchmarkId::new("det", size), &h, |b, h| {
            b.iter(|| exact_det(black_box(h)))
        });
        let psd = hankel_matrix(&MomentSeq::from_charge(&positive_charge(size)), 5, size).unwrap();
        group.bench_with_input(BenchmarkId::new("psd", size), &psd, |b, h| {
            b.iter(|| psd_test(black_box(h)))
        });
    }
    let moments = MomentSeq::from_charge(&positive_charge(6));
    group.bench_function("khyp_k3_m40", |b| {
        b.iter(|| k_hyponormality_test(black_box(&moments), 3, 40))
    });
    let charge = alternating_charge(5);
    group.bench_function("certify_k3", |b| {
        b.iter(|| certify_determinant_signs(black_box(&charge), 3))
    });
    group.finish();
}

fn grws(c: &mut Criterion) {
    let mut group = c.benchmark_group("grws");
    let eps = default_epsilon();
    for (name, params) in grws_points() {
        group.bench_with_input(BenchmarkId::new("coefficients_64", name), &params, |b, p| {
            b.iter(|| grws_coefficients(black_box(p), 64))
        });
        group.bench_with_input(BenchmarkId::new("certify_normalizer", name), &params, |b, p| {
            b.iter(|| certify_normalizer(black_box(p), &eps, 12))
        });
        group.bench_with_input(BenchmarkId::new("charge_eps", name), &params, |b, p| {
            b.iter(|| grws_charge(black_box(p), &eps))
        });
    }
    group.finish();
}

fn cpd_and_che(c: &mut Criterion) {
    let mut group = c.benchmark_group("cpd_che");
    for atoms in [4usize, 8, 16] {
        let charge = one_negative_charge(atoms);
        group.bench_with_input(BenchmarkId::new("cpd_multipliers", atoms), &charge, |b, ch| {
            b.iter(|| find_cpd_weight_multipliers(black_box(ch)))
        });
        let s = sigma(atoms);
        group.bench_with_input(BenchmarkId::new("che_round_trip", atoms), &s, |b, s| {
            b.iter(|| {
                let ch = che_charge_from_sigma(black_box(s)).unwrap();
                charge_from_delta_measure(&delta_measure_of_charge(&ch).unwrap()).unwrap()
            })
        });
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    let spec = sweep_spec(6);
    group.bench_function("grid_6x6", |b| b.iter(|| sweep(black_box(&spec)).unwrap()));
    group.finish();
}

criterion_group!(benches, hankel, grws, cpd_and_che, sweeps);
criterion_main!(benches);
