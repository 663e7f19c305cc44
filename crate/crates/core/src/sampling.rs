//! Random test inputs: Haar states, channels drawn uniformly from the
//! probability simplex, Hermitian matrices and rotated MUB families.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::channel::GeneralizedPauliChannel;
use crate::linalg::{ComplexMatrix, C64};
use crate::mub::MubFamily;

/// Haar-random unit vector: i.i.d. complex Gaussian components, normalized.
pub fn haar_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re, im)
            })
            .collect();
        let n = crate::linalg::norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// A point drawn uniformly from the probability simplex of length `d + 2`.
pub fn random_probabilities<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..d + 2).map(|_| Exp1.sample(rng)).collect();
    let sum: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / sum).collect()
}

pub fn random_channel<R: Rng + ?Sized>(fam: Arc<MubFamily>, rng: &mut R) -> GeneralizedPauliChannel {
    let d = fam.dim();
    GeneralizedPauliChannel::from_probabilities(d, random_probabilities(d, rng), fam)
        .expect("simplex points are valid channels")
}

/// A CPTP channel whose eigenvalues are all nonnegative, obtained by
/// rejection from the simplex.
pub fn random_nonnegative_channel<R: Rng + ?Sized>(
    fam: Arc<MubFamily>,
    rng: &mut R,
) -> GeneralizedPauliChannel {
    loop {
        let ch = random_channel(fam.clone(), rng);
        if ch.spectrum().min() >= 0.0 {
            return ch;
        }
    }
}

/// Uniform draw from `[-1, 1]^{d+1}`; most draws are not CPTP.
pub fn random_lambdas<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d + 1).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

pub fn random_operator<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let a = random_operator(d, rng);
    (&a + &a.adjoint()).scale_real(0.5)
}

/// Random unitary from the eigenvectors of a random Hermitian matrix,
/// with random column phases.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let eig = random_hermitian(d, rng)
        .hermitian_eigensystem()
        .expect("Hermitian by construction");
    let phases: Vec<C64> = (0..d)
        .map(|_| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU)))
        .collect();
    ComplexMatrix::from_fn(d, d, |i, j| eig.vectors.get(i, j) * phases[j])
}

/// A different valid family: every vector rotated by one random unitary,
/// re-phased, and each basis cyclically shifted.
pub fn rotated_family<R: Rng + ?Sized>(fam: &MubFamily, rng: &mut R) -> MubFamily {
    let d = fam.dim();
    let u = random_unitary(d, rng);
    let bases = fam
        .bases()
        .iter()
        .map(|basis| {
            let shift = rng.random_range(0..d);
            (0..d)
                .map(|k| {
                    let v = u.mul_vec(&basis[(k + shift) % d]);
                    let ph = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
                    v.into_iter().map(|z| z * ph).collect()
                })
                .collect()
        })
        .collect();
    MubFamily::from_bases(d, bases, 1e-10).expect("unitary images of a MUB family are MUB")
}
