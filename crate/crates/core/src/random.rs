//! Seeded generation of random matrices, states and vectors.
//!
//! Every function takes the RNG by reference, so callers control seeding
//! (the crate standard is `ChaCha8Rng::seed_from_u64`) and the same seed
//! always reproduces the same output on every platform.

use crate::matrix::{Complex64, ComplexMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

/// One sample of the standard complex Gaussian (unit expected square norm).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std::f64::consts::FRAC_1_SQRT_2, im * std::f64::consts::FRAC_1_SQRT_2)
}

/// Matrix with independent standard complex Gaussian entries.
pub fn complex_gaussian_matrix<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Random Hermitian matrix `(G + G*)/2` with Gaussian `G`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = complex_gaussian_matrix(dim, dim, rng);
    g.hermitian_part().expect("square by construction")
}

/// Random PSD matrix `G* G` of the requested rank (`rank <= dim`; rank 0
/// yields the zero matrix).
pub fn random_psd<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let rank = rank.min(dim);
    if rank == 0 {
        return ComplexMatrix::zeros(dim, dim);
    }
    let g = complex_gaussian_matrix(rank, dim, rng);
    g.adjoint().mul(&g).expect("conformable by construction")
}

/// Random unit column vector.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    assert!(dim > 0, "unit vector needs a positive dimension");
    loop {
        let v = complex_gaussian_matrix(dim, 1, rng);
        let norm = v.frobenius_norm();
        if norm > 1e-6 {
            return v.scale_real(1.0 / norm);
        }
    }
}

/// Random density matrix: trace-one PSD of the requested rank (at least 1).
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> ComplexMatrix {
    let rank = rank.clamp(1, dim);
    loop {
        let a = random_psd(dim, rank, rng);
        let tr = a.trace().re;
        if tr > 1e-9 {
            return a.scale_real(1.0 / tr);
        }
    }
}

/// Random rank-one density matrix `v v*` from a unit vector `v`.
pub fn random_pure_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let v = random_unit_vector(dim, rng);
    v.mul(&v.adjoint()).expect("outer product")
}
