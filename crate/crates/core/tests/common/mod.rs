#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use shiftcharge::rational::{int, pow, rat};
use shiftcharge::{Charge, Rational};

/// Permutation-expansion determinant, independent of the library's elimination.
pub fn leibniz_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Rational::zero();
    permute(&mut perm, 0, m, &mut total);
    total
}

fn permute(perm: &mut Vec<usize>, start: usize, m: &[Vec<Rational>], total: &mut Rational) {
    if start == perm.len() {
        let mut inversions = 0;
        for i in 0..perm.len() {
            for j in i + 1..perm.len() {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        let mut term: Rational = (0..perm.len()).map(|i| m[i][perm[i]].clone()).product();
        if inversions % 2 == 1 {
            term = -term;
        }
        *total += term;
        return;
    }
    for i in start..perm.len() {
        perm.swap(start, i);
        permute(perm, start + 1, m, total);
        perm.swap(start, i);
    }
}

/// `det M_n^k` of a finite charge by summing over k-subsets of atoms:
/// `Σ_C Π_{i∈C} a_i r_i^n · Π_{i<j∈C} (r_i − r_j)²`.
pub fn cauchy_binet_det(atoms: &[(Rational, Rational)], n: usize, k: usize) -> Rational {
    let mut chosen = Vec::with_capacity(k);
    let mut total = Rational::zero();
    subsets(atoms, n, k, 0, &mut chosen, &mut total);
    total
}

fn subsets(
    atoms: &[(Rational, Rational)],
    n: usize,
    k: usize,
    from: usize,
    chosen: &mut Vec<usize>,
    total: &mut Rational,
) {
    if chosen.len() == k {
        let mut term = Rational::one();
        for (a, &i) in chosen.iter().enumerate() {
            term *= &atoms[i].1 * pow(&atoms[i].0, n);
            for &j in &chosen[a + 1..] {
                let d = &atoms[i].0 - &atoms[j].0;
                term *= &d * &d;
            }
        }
        *total += term;
        return;
    }
    for i in from..atoms.len() {
        chosen.push(i);
        subsets(atoms, n, k, i + 1, chosen, total);
        chosen.pop();
    }
}

pub fn direct_moment(atoms: &[(Rational, Rational)], n: usize) -> Rational {
    atoms.iter().map(|(r, a)| a * pow(r, n)).sum()
}

pub fn small_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    rat(rng.gen_range(-max_num..=max_num), rng.gen_range(1..=max_den))
}

pub fn nonzero_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    loop {
        let v = small_rational(rng, max_num, max_den);
        if !v.is_zero() {
            return v;
        }
    }
}

/// Rational in `[lo_num/den, hi_num/den]` on the grid `1/den`.
pub fn grid_rational<R: Rng>(rng: &mut R, lo_num: i64, hi_num: i64, den: i64) -> Rational {
    rat(rng.gen_range(lo_num..=hi_num), den)
}

/// Strictly decreasing positions in `(0, 1]`, consecutive ratios in `[1/5, 4/5]`.
pub fn decreasing_positions<R: Rng>(rng: &mut R, count: usize) -> Vec<Rational> {
    let mut r = rat(rng.gen_range(6..=12), 12);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(r.clone());
        r *= rat(rng.gen_range(2..=8), 10);
    }
    out
}

/// 3–6 atoms, `a_1 > 0`, `Σ a_i = 1`, as `(position, density)` over decreasing positions.
pub fn random_lemma_charge<R: Rng>(rng: &mut R) -> Vec<(Rational, Rational)> {
    let count = rng.gen_range(3..=6);
    let positions = decreasing_positions(rng, count);
    loop {
        let mut dens: Vec<Rational> = (0..count).map(|_| int(rng.gen_range(1..=9))).collect();
        for d in dens.iter_mut().skip(1) {
            if rng.gen_bool(0.5) {
                *d = -d.clone();
            }
        }
        let total: Rational = dens.iter().sum();
        if total > Rational::zero() {
            return positions
                .iter()
                .cloned()
                .zip(dens.into_iter().map(|d| d / &total))
                .collect();
        }
    }
}

/// Positive atomic σ on `[0, 1)` with 1–5 atoms.
pub fn random_sigma<R: Rng>(rng: &mut R) -> Charge {
    let count = rng.gen_range(1..=5);
    let atoms: Vec<(Rational, Rational)> = (0..count)
        .map(|_| (rat(rng.gen_range(0..=15), 16), rat(rng.gen_range(1..=10), 10)))
        .collect();
    Charge::new(atoms).unwrap()
}

/// Small charge with arbitrary signs, positions in `(0, 2]`.
pub fn random_charge<R: Rng>(rng: &mut R, max_atoms: usize) -> Charge {
    let count = rng.gen_range(1..=max_atoms);
    let atoms: Vec<(Rational, Rational)> = (0..count)
        .map(|_| (rat(rng.gen_range(1..=16), 8), nonzero_rational(rng, 9, 5)))
        .collect();
    Charge::new(atoms).unwrap()
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<Rational>> {
    let mut m = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = small_rational(rng, 9, 7);
            m[i][j] = v.clone();
            m[j][i] = v;
        }
    }
    m
}

pub fn big(v: i64) -> BigInt {
    BigInt::from(v)
}
