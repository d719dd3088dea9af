//! Seeded random inputs for the polynomial-identity harnesses.
//!
//! Symmetric samples draw integer entries in `[-9, 9]` for the upper triangle
//! and mirror them. Rational samples draw `p / q` with `p ∈ [-9, 9]` and
//! `q ∈ [1, 5]`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rational::{frac, int, Rational};
use crate::tensor::DenseTensor;

pub const ENTRY_BOUND: i64 = 9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_integer(rng: &mut impl Rng) -> Rational {
    int(rng.gen_range(-ENTRY_BOUND..=ENTRY_BOUND))
}

pub fn random_rational(rng: &mut impl Rng) -> Rational {
    frac(
        rng.gen_range(-ENTRY_BOUND..=ENTRY_BOUND),
        rng.gen_range(1..=5),
    )
}

fn matrix_from(f: &mut impl FnMut(usize, usize) -> Option<Rational>) -> DenseTensor {
    let mut m = DenseTensor::zeros(3, 2).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            if let Some(v) = f(i, j) {
                m.set(&[i, j], v);
            }
        }
    }
    m
}

pub fn random_symmetric(rng: &mut impl Rng) -> DenseTensor {
    let mut m = matrix_from(&mut |i, j| (i <= j).then(|| random_integer(rng)));
    for i in 0..3 {
        for j in 0..i {
            let v = m.at(j, i).clone();
            m.set(&[i, j], v);
        }
    }
    m
}

/// Symmetric integer matrix with `S_33 = −S_11 − S_22`.
pub fn random_trace_free_symmetric(rng: &mut impl Rng) -> DenseTensor {
    let mut s = random_symmetric(rng);
    let last = -(s.at(0, 0) + s.at(1, 1));
    s.set(&[2, 2], last);
    s
}

/// General integer matrix with zero trace.
pub fn random_trace_free(rng: &mut impl Rng) -> DenseTensor {
    let mut u = matrix_from(&mut |_, _| Some(random_integer(rng)));
    let last = -(u.at(0, 0) + u.at(1, 1));
    u.set(&[2, 2], last);
    u
}

pub fn random_rationals(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| random_rational(rng)).collect()
}

/// Fixed degenerate symmetric samples: `0`, `I` and `diag(1, 1, 2)`.
pub fn degenerate_symmetric() -> Vec<DenseTensor> {
    vec![
        DenseTensor::zeros(3, 2).unwrap(),
        DenseTensor::identity(3).unwrap(),
        DenseTensor::diagonal(&[int(1), int(1), int(2)]).unwrap(),
    ]
}
