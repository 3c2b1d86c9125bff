//! Seeded random fixtures. Entries are `p/q` with `p ∈ ±[1, 20]`,
//! `q ∈ [1, 7]`, drawn from a ChaCha8 stream so every seed gives the same
//! matrices on every platform.

use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::genpos::poisson_t_general;
use crate::poisson::{pfaffian_dense, PoissonStructure};
use crate::ring::{int, rat, Rational};
use crate::toric::{make_toric_from_rationals, ToricStructure};

pub type Fixture = (Vec<Vec<Rational>>, ToricStructure, PoissonStructure);

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_entry<R: Rng>(rng: &mut R) -> Rational {
    let p: i64 = rng.gen_range(1..=20);
    let q: i64 = rng.gen_range(1..=7);
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    rat(sign * p, q)
}

/// Random skew matrix of size `d` with every upper entry nonzero.
pub fn random_skew<R: Rng>(rng: &mut R, d: usize) -> Vec<Vec<Rational>> {
    let mut a = vec![vec![int(0); d]; d];
    for i in 0..d {
        for j in i + 1..d {
            let x = random_entry(rng);
            a[j][i] = -x.clone();
            a[i][j] = x;
        }
    }
    a
}

/// Random toric fixtures with `Pf(A) ≠ 0`.
pub fn nonsingular_fixtures(seed: u64, n: usize, count: usize) -> Vec<Fixture> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = random_skew(&mut r, 2 * n);
        if pfaffian_dense(&a).is_zero() {
            continue;
        }
        let (t, p) = make_toric_from_rationals(&a).expect("random skew matrix of even size");
        out.push((a, t, p));
    }
    out
}

/// Random toric fixtures with `Pf(A) ≠ 0` in 2-general position.
pub fn two_general_fixtures(seed: u64, n: usize, count: usize) -> Vec<Fixture> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = random_skew(&mut r, 2 * n);
        if pfaffian_dense(&a).is_zero() {
            continue;
        }
        let (t, p) = make_toric_from_rationals(&a).expect("random skew matrix of even size");
        if poisson_t_general(&p, 2).expect("t = 2 is in range").verdict {
            out.push((a, t, p));
        }
    }
    out
}

/// `diag(a·J, b·J)` with `J` the standard 2×2 skew block.
pub fn block_diagonal(a: Rational, b: Rational) -> Vec<Vec<Rational>> {
    let mut m = vec![vec![int(0); 4]; 4];
    m[0][1] = a.clone();
    m[1][0] = -a;
    m[2][3] = b.clone();
    m[3][2] = -b;
    m
}

/// The integer matrix with `a_12, a_13, a_14, a_23, a_24, a_34 = 1, …, 6`.
pub fn explicit_example() -> Vec<Vec<Rational>> {
    let mut m = vec![vec![int(0); 4]; 4];
    let mut k = 1;
    for i in 0..4 {
        for j in i + 1..4 {
            m[i][j] = int(k);
            m[j][i] = int(-k);
            k += 1;
        }
    }
    m
}
