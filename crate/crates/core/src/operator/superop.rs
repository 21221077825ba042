use nalgebra::DVector;
use num_complex::Complex64;

use super::{c, check_same_dim, eigh, identity, unvectorize, vectorize};
use crate::{CMatrix, Result};

/// Linear map on `n × n` matrices, stored as an `n² × n²` matrix acting on
/// column-stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: CMatrix) -> Result<Self> {
        check_same_dim(dim * dim, matrix.nrows())?;
        check_same_dim(dim * dim, matrix.ncols())?;
        Ok(Self { dim, matrix })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: CMatrix::zeros(dim * dim, dim * dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: identity(dim * dim),
        }
    }

    /// `ρ ↦ −i[H, ρ]`.
    pub fn hamiltonian(h: &CMatrix) -> Self {
        let n = h.nrows();
        let id = identity(n);
        let m = (id.kronecker(h) - h.transpose().kronecker(&id)) * Complex64::new(0.0, -1.0);
        Self { dim: n, matrix: m }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        unvectorize(&(&self.matrix * vectorize(rho)), self.dim)
    }

    pub fn apply_vec(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * v
    }

    /// `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Self {
            dim: self.dim,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn scaled(&self, factor: f64) -> Superoperator {
        Self {
            dim: self.dim,
            matrix: &self.matrix * c(factor),
        }
    }

    pub fn sum<'a>(dim: usize, terms: impl IntoIterator<Item = &'a Superoperator>) -> Superoperator {
        let mut acc = Superoperator::zero(dim);
        for t in terms {
            acc.matrix += &t.matrix;
        }
        acc
    }

    /// `exp(self · t)` as a superoperator.
    pub fn exp(&self, t: f64) -> Superoperator {
        Self {
            dim: self.dim,
            matrix: super::expm(&(&self.matrix * c(t))),
        }
    }

    /// Largest `|vec(I)† M|` entry; zero for a trace-annihilating generator.
    pub fn trace_annihilation_defect(&self) -> f64 {
        let row = vectorize(&identity(self.dim)).adjoint() * &self.matrix;
        row.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_trace_annihilating(&self, tol: f64) -> bool {
        self.trace_annihilation_defect() <= tol
    }

    /// Operator (spectral) norm of the matrix representation.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }
}

impl std::ops::Add<&Superoperator> for &Superoperator {
    type Output = Superoperator;
    fn add(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl std::ops::Sub<&Superoperator> for &Superoperator {
    type Output = Superoperator;
    fn sub(self, rhs: &Superoperator) -> Superoperator {
        Superoperator {
            dim: self.dim,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

/// Superoperator of `ρ ↦ A ρ B`, i.e. `Bᵀ ⊗ A`.
pub fn superop_sandwich(a: &CMatrix, b: &CMatrix) -> Result<Superoperator> {
    super::check_square(a)?;
    super::check_square(b)?;
    check_same_dim(a.nrows(), b.nrows())?;
    Ok(Superoperator {
        dim: a.nrows(),
        matrix: b.transpose().kronecker(a),
    })
}

/// `rate · (A ρ A† − ½{A†A, ρ})`.
pub fn dissipator(jump: &CMatrix, rate: f64) -> Superoperator {
    let n = jump.nrows();
    let id = identity(n);
    let jj = jump.adjoint() * jump;
    let m = jump.conjugate().kronecker(jump) - (id.kronecker(&jj) + jj.transpose().kronecker(&id)) * c(0.5);
    Superoperator {
        dim: n,
        matrix: m * c(rate),
    }
}

/// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)` of a linear map.
pub fn choi_matrix(map: &Superoperator) -> CMatrix {
    let n = map.dim();
    let mut choi = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let mut e = CMatrix::zeros(n, n);
            e[(i, j)] = c(1.0);
            let image = map.apply(&e);
            for k in 0..n {
                for l in 0..n {
                    choi[(i * n + k, j * n + l)] = image[(k, l)];
                }
            }
        }
    }
    choi
}

pub const CP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiVerdict {
    pub cp_ok: bool,
    pub min_eigenvalue: f64,
}

/// Checks complete positivity of `exp(L·dt)` via the smallest Choi eigenvalue.
pub fn choi_positivity_check(generator: &Superoperator, dt: f64) -> ChoiVerdict {
    let channel = generator.exp(dt);
    let min_eigenvalue = eigh(&choi_matrix(&channel)).0[0];
    ChoiVerdict {
        cp_ok: min_eigenvalue >= -CP_TOL,
        min_eigenvalue,
    }
}

#[cfg(test)]
mod tests {
    use super::super::pauli;
    use super::*;
    use num_complex::Complex64;

    fn basis(n: usize, k: usize, l: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        m[(k, l)] = c(1.0);
        m
    }

    fn sample(n: usize, seed: f64) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| {
            let x = seed + 1.3 * i as f64 + 0.7 * j as f64;
            Complex64::new(x.sin(), (1.9 * x).cos())
        })
    }

    #[test]
    fn identity_sandwich() {
        let id = identity(3);
        let s = superop_sandwich(&id, &id).unwrap();
        assert_eq!(s, Superoperator::identity(3));
    }

    #[test]
    fn single_jump() {
        let s = superop_sandwich(&pauli::sigma_minus(), &pauli::sigma_plus()).unwrap();
        let out = s.apply(&basis(2, 0, 0));
        assert!((out - basis(2, 1, 1)).norm() < 1e-15);
    }

    #[test]
    fn random_triple_product() {
        let (a, b, rho) = (sample(3, 0.1), sample(3, 2.2), sample(3, -1.0));
        let s = superop_sandwich(&a, &b).unwrap();
        assert!((s.apply(&rho) - &a * &rho * &b).norm() < 1e-12);
    }

    #[test]
    fn exhaustive_basis_linearity() {
        for n in 1..=4 {
            let (a, b) = (sample(n, 0.4), sample(n, 1.1));
            let s = superop_sandwich(&a, &b).unwrap();
            for k in 0..n {
                for l in 0..n {
                    let e = basis(n, k, l);
                    assert!((s.apply(&e) - &a * &e * &b).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn sandwich_dimension_mismatch() {
        assert!(superop_sandwich(&identity(2), &identity(3)).is_err());
    }

    #[test]
    fn dissipator_matches_definition() {
        let a = sample(3, 0.9);
        let rho = sample(3, 0.2);
        let d = dissipator(&a, 0.7);
        let direct = (&a * &rho * a.adjoint() - (a.adjoint() * &a * &rho + &rho * a.adjoint() * &a) * c(0.5)) * c(0.7);
        assert!((d.apply(&rho) - direct).norm() < 1e-12);
        assert!(d.is_trace_annihilating(1e-12));
    }

    #[test]
    fn hamiltonian_superop() {
        let h = sample(3, 0.3);
        let h = (&h + h.adjoint()) * c(0.5);
        let rho = sample(3, 1.5);
        let expected = (&h * &rho - &rho * &h) * Complex64::new(0.0, -1.0);
        assert!((Superoperator::hamiltonian(&h).apply(&rho) - expected).norm() < 1e-12);
    }

    #[test]
    fn choi_of_zero_generator() {
        let v = choi_positivity_check(&Superoperator::zero(2), 1e-3);
        assert!(v.cp_ok);
        assert!(v.min_eigenvalue.abs() < 1e-14);
    }

    #[test]
    fn choi_detects_negated_dissipator() {
        let d = dissipator(&pauli::sigma_minus(), 1.0);
        assert!(choi_positivity_check(&d, 1e-3).cp_ok);
        let anti = d.scaled(-1.0);
        let v = choi_positivity_check(&anti, 1e-3);
        assert!(!v.cp_ok, "min eigenvalue {}", v.min_eigenvalue);
    }
}
