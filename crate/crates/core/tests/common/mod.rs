#![allow(dead_code)]

use floquet_core::operator::{c, HermitianOperator};
use floquet_core::{CMatrix, Complex64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> HermitianOperator {
    let m = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    HermitianOperator::hermitized((&m + m.adjoint()) * c(0.5 * scale))
}

pub fn random_density(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let a = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    floquet_core::operator::trace_distance(a, b)
}
