//! Fixed inputs shared by the kernel benchmarks.

use shiftcharge::rational::{int, rat};
use shiftcharge::{Charge, GrwsParams, Rational, SweepSpec};

/// `atoms` atoms at `1, 1/2, …, 1/atoms` with alternating densities
/// summing to 1.
pub fn alternating_charge(atoms: usize) -> Charge {
    let raw: Vec<(Rational, Rational)> = (1..=atoms as i64)
        .map(|i| {
            let sign = if i % 2 == 1 { 1 } else { -1 };
            (rat(1, i), rat(sign * (atoms as i64 + 1 - i), atoms as i64))
        })
        .collect();
    let mass: Rational = raw.iter().map(|(_, d)| d).sum();
    Charge::new(raw.into_iter().map(|(p, d)| (p, d / &mass))).expect("valid atoms")
}

/// Positive charge on `(0, 1)`, so every Hankel matrix is PSD.
pub fn positive_charge(atoms: usize) -> Charge {
    Charge::new((1..=atoms as i64).map(|i| (rat(i, atoms as i64 + 1), rat(1, atoms as i64)))).expect("valid atoms")
}

/// Positive atoms at `1, 1/2, …` except a negative second atom, so the CPD
/// multiplier search has a root to find.
pub fn one_negative_charge(atoms: usize) -> Charge {
    Charge::new((1..=atoms as i64).map(|i| (rat(1, i), if i == 2 { rat(-1, 3) } else { rat(1, i) })))
        .expect("valid atoms")
}

/// σ for the completely hyperexpansive construction.
pub fn sigma(atoms: usize) -> Charge {
    Charge::new((0..atoms as i64).map(|i| (rat(i, atoms as i64), rat(1, 2 * atoms as i64)))).expect("valid atoms")
}

/// One point per GRWS sector family used in the benches.
pub fn grws_points() -> Vec<(&'static str, GrwsParams)> {
    let point = |n: Rational, d: Rational| GrwsParams::new(int(2), n, d).expect("inside the square");
    vec![
        ("III", point(rat(-1, 5), rat(1, 2))),
        ("VIIIA", point(rat(-1, 2), rat(-3, 4))),
        ("VIIIB", point(rat(-2, 5), rat(-9, 10))),
        ("VI", point(rat(7, 10), rat(-1, 2))),
    ]
}

pub fn sweep_spec(steps: usize) -> SweepSpec {
    use shiftcharge::GridRange;
    SweepSpec {
        p: int(2),
        n_range: GridRange {
            lo: rat(-9, 10),
            hi: rat(9, 10),
            steps,
        },
        d_range: GridRange {
            lo: rat(-9, 10),
            hi: rat(9, 10),
            steps,
        },
        depth: 12,
        khyp_max: 2,
        m_range: 12,
        epsilon: shiftcharge::grws::default_epsilon(),
    }
}
