//! Dense operator foundation.
//!
//! Every operator is an `n × n` [`CMatrix`]. Newtypes carry the algebraic
//! invariants (hermiticity, unitarity, density-matrix constraints) and are
//! checked once at construction; afterwards they are immutable.
//!
//! Superoperators act on column-stacked density matrices:
//! `vec(ρ)[i + n·j] = ρ[i, j]`, so `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

mod spectral;
mod superop;

pub use spectral::{bohr_components, spectral_decompose, BohrComponent, BohrComponents, SpectralDecomposition};
pub use superop::{choi_matrix, choi_positivity_check, dissipator, superop_sandwich, ChoiVerdict, Superoperator};

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;

use crate::{CMatrix, Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const UNITARY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-12;
pub const POSITIVITY_TOL: f64 = 1e-10;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest element-wise deviation from hermiticity.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let adj = m.adjoint();
    m.iter()
        .zip(adj.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first; columns of the returned matrix are the
/// orthonormal eigenvectors in the same order as the eigenvalues.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| c(f(v))),
    ));
    &vectors * diag * vectors.adjoint()
}

/// `exp(-i H t)` for Hermitian `H`, exact up to the eigensolver.
pub fn unitary_exp(h: &CMatrix, t: f64) -> CMatrix {
    let (values, vectors) = eigh(h);
    let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| (-I * v * t).exp()),
    ));
    &vectors * diag * vectors.adjoint()
}

/// Scaling-and-squaring Padé exponential of a general square matrix.
pub fn expm(m: &CMatrix) -> CMatrix {
    m.clone().exp()
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMatrix) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &nalgebra::DVector<Complex64>, n: usize) -> CMatrix {
    CMatrix::from_column_slice(n, n, v.as_slice())
}

/// Trace norm ‖A‖₁ of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    eigh(m).0.iter().map(|v| v.abs()).sum()
}

/// Trace distance ½‖ρ − σ‖₁.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * trace_norm(&(a - b))
}

/// Pauli and ladder matrices in the basis `(|e⟩, |g⟩)`, so that
/// `σ³ = diag(+1, −1)` and `σ⁻ = |g⟩⟨e|`.
pub mod pauli {
    use super::c;
    use crate::CMatrix;
    use num_complex::Complex64;

    pub fn sigma_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
    }

    pub fn sigma_y() -> CMatrix {
        let i = Complex64::new(0.0, 1.0);
        CMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)])
    }

    pub fn sigma_z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
    }

    /// `|e⟩⟨g|`
    pub fn sigma_plus() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)])
    }

    /// `|g⟩⟨e|`
    pub fn sigma_minus() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)])
    }
}

/// A Hermitian matrix, checked element-wise to `1e-12`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(CMatrix);

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let defect = hermiticity_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(Error::invariant(
                "HermitianOperator",
                format!("max |H - H†| = {defect:.3e}"),
            ));
        }
        Ok(Self(hermitize(&m)))
    }

    /// Symmetrizes `m` instead of checking it; for matrices that are
    /// Hermitian up to round-off by construction.
    pub fn hermitized(m: CMatrix) -> Self {
        Self(hermitize(&m))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            diag.len(),
            diag.iter().map(|&d| c(d)),
        )))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

/// A unitary matrix with `‖U†U − I‖_F ≤ 1e-10`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator(CMatrix);

impl UnitaryOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let drift = unitarity_defect(&m);
        if drift > UNITARY_TOL {
            return Err(Error::invariant(
                "UnitaryOperator",
                format!("‖U†U − I‖_F = {drift:.3e}"),
            ));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(identity(n))
    }

    /// `exp(−i H t)`.
    pub fn evolution(h: &HermitianOperator, t: f64) -> Self {
        Self(unitary_exp(h.matrix(), t))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn compose(&self, later: &UnitaryOperator) -> Self {
        Self(later.matrix() * &self.0)
    }
}

pub fn unitarity_defect(m: &CMatrix) -> f64 {
    (m.adjoint() * m - identity(m.nrows())).norm()
}

/// A density matrix: Hermitian, unit trace, positive semidefinite within
/// `1e-10`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let defect = hermiticity_defect(&m);
        if defect > HERMITIAN_TOL {
            return Err(Error::invariant(
                "DensityMatrix",
                format!("not Hermitian: max |ρ - ρ†| = {defect:.3e}"),
            ));
        }
        let m = hermitize(&m);
        let tr = trace(&m);
        if (tr - c(1.0)).norm() > TRACE_TOL {
            return Err(Error::invariant(
                "DensityMatrix",
                format!("trace = {:.15} + {:.3e}i", tr.re, tr.im),
            ));
        }
        let min = eigh(&m).0[0];
        if min < -POSITIVITY_TOL {
            return Err(Error::invariant(
                "DensityMatrix",
                format!("minimum eigenvalue {min:.3e}"),
            ));
        }
        Ok(Self(m))
    }

    /// Hermitizes and rescales to unit trace before checking positivity.
    pub fn normalized(m: CMatrix) -> Result<Self> {
        check_square(&m)?;
        let m = hermitize(&m);
        let tr = trace(&m).re;
        if !(tr.is_finite() && tr > 0.0) {
            return Err(Error::invariant("DensityMatrix", format!("trace {tr} not positive")));
        }
        Self::new(m / c(tr))
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        m[(k, k)] = c(1.0);
        Self(m)
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self(identity(n) / c(n as f64))
    }

    /// `Z⁻¹ exp(−H/T)`; `T` may be negative or infinite. Computed with a
    /// shifted exponent so extreme `|H/T|` does not overflow.
    pub fn gibbs(h: &HermitianOperator, temperature: f64) -> Self {
        let beta = 1.0 / temperature;
        let (values, vectors) = eigh(h.matrix());
        let exponents: Vec<f64> = values.iter().map(|&e| -beta * e).collect();
        let top = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = exponents.iter().map(|&x| (x - top).exp()).collect();
        let z: f64 = weights.iter().sum();
        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            values.len(),
            weights.iter().map(|&w| c(w / z)),
        ));
        Self(&vectors * diag * vectors.adjoint())
    }

    /// Wraps a matrix already checked by the caller against looser,
    /// context-specific tolerances.
    pub(crate) fn from_checked(m: CMatrix) -> Self {
        Self(hermitize(&m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn populations(&self) -> Vec<f64> {
        self.0.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eigh(&self.0).0[0]
    }

    pub fn purity(&self) -> f64 {
        trace(&(&self.0 * &self.0)).re
    }

    /// Von Neumann entropy `−Tr ρ ln ρ` (with `0 ln 0 = 0`).
    pub fn entropy(&self) -> f64 {
        eigh(&self.0).0.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
    }

    /// Mixes in `eps` of the maximally mixed state when the smallest
    /// eigenvalue is below `eps / n`; returns whether it did.
    pub fn regularized(&self, eps: f64) -> (Self, bool) {
        let n = self.dim();
        if self.min_eigenvalue() >= eps / n as f64 {
            return (self.clone(), false);
        }
        let mixed = &self.0 * c(1.0 - eps) + identity(n) * c(eps / n as f64);
        (Self(mixed), true)
    }

    /// `ln ρ` by eigen-decomposition with eigenvalues floored at `1e-300`.
    pub fn log(&self) -> CMatrix {
        hermitian_map(&self.0, |p| p.max(1e-300).ln())
    }
}

pub(crate) fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::param("dim", "operators must have positive dimension"));
    }
    Ok(())
}

pub(crate) fn check_same_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
