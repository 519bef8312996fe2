//! Seeded random instances for property sweeps.
//!
//! One generator type is used everywhere: SplitMix64 (64-bit state, Steele–Lea–Flood
//! increment `0x9E3779B97F4A7C15` followed by the MurmurHash3 finalizer), so a seed
//! fully determines every instance.

use rand::{RngExt, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;

use crate::matcore::{ComplexMatrix, HermitianOperator, C64};
use crate::observables::DichotomicObservable;

pub type SeededRng = SplitMix64;

pub fn seeded(seed: u64) -> SeededRng {
    SplitMix64::seed_from_u64(seed)
}

fn gaussian(rng: &mut SeededRng) -> f64 {
    rng.sample(StandardNormal)
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(dim: usize, rng: &mut SeededRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, dim, |_, _| C64::new(gaussian(rng), gaussian(rng)))
}

/// GUE-distributed Hermitian matrix.
pub fn hermitian(dim: usize, rng: &mut SeededRng) -> HermitianOperator {
    HermitianOperator::hermitian_part(&ginibre(dim, rng))
}

/// Density operator `G G† / Tr[G G†]` (Hilbert–Schmidt measure).
pub fn density(dim: usize, rng: &mut SeededRng) -> HermitianOperator {
    let g = ginibre(dim, rng);
    let gg = &g * &g.adjoint();
    let tr = gg.trace().re;
    HermitianOperator::hermitian_part(&gg.scale(1.0 / tr))
}

/// `sign(H)` for a GUE matrix `H`: a dichotomic observable with a random eigenbasis.
pub fn dichotomic(dim: usize, rng: &mut SeededRng) -> DichotomicObservable {
    let h = hermitian(dim, rng);
    let s = h
        .map_spectrum(|v| if v >= 0.0 { 1.0 } else { -1.0 })
        .expect("random Hermitian matrices diagonalize");
    DichotomicObservable::new(s).expect("sign of a Hermitian matrix squares to identity")
}

pub fn unit_vector3(rng: &mut SeededRng) -> [f64; 3] {
    loop {
        let v = [gaussian(rng), gaussian(rng), gaussian(rng)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-6 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

pub fn uniform(rng: &mut SeededRng) -> f64 {
    rng.random::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let a = density(3, &mut seeded(11));
        let b = density(3, &mut seeded(11));
        assert_eq!(a, b);
        assert!((a.trace() - 1.0).abs() < 1e-14);
        assert!(a.min_eigenvalue().unwrap() > -1e-14);
    }
}
