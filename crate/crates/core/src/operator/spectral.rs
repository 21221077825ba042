use super::{check_same_dim, eigh, HermitianOperator, I};
use crate::{CMatrix, Error, Result};

/// Components with Frobenius norm below this are discarded.
pub const COMPONENT_FLOOR: f64 = 1e-14;

/// Merged eigen-structure of a Hermitian operator.
///
/// `levels` are distinct eigenvalues in ascending order; `projectors[k]`
/// projects onto the eigenspace of `levels[k]`. The orthonormal eigenvectors
/// are retained (`vectors`, with `level_of[col]` naming the level of each
/// column) so that block projections can be done in the eigenbasis.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub levels: Vec<f64>,
    pub projectors: Vec<CMatrix>,
    pub bohr_frequencies: Vec<f64>,
    pub vectors: CMatrix,
    pub level_of: Vec<usize>,
    pub tolerance: f64,
}

impl SpectralDecomposition {
    /// Groups eigenpairs into levels. `values[i]` belongs to column `i` of
    /// `vectors`; values within `tolerance` of a neighbour share a level
    /// whose energy is the cluster mean.
    pub fn from_eigensystem(values: &[f64], vectors: CMatrix, tolerance: f64) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for &i in &order {
            if values[i] - last > tolerance || clusters.is_empty() {
                clusters.push(vec![i]);
            } else {
                clusters.last_mut().unwrap().push(i);
            }
            last = values[i];
        }

        let mut sorted = CMatrix::zeros(n, n);
        let mut level_of = Vec::with_capacity(n);
        let mut levels = Vec::with_capacity(clusters.len());
        let mut projectors = Vec::with_capacity(clusters.len());
        let mut col = 0;
        for (k, members) in clusters.iter().enumerate() {
            let mean = members.iter().map(|&i| values[i]).sum::<f64>() / members.len() as f64;
            levels.push(mean);
            let mut proj = CMatrix::zeros(n, n);
            for &i in members {
                let v = vectors.column(i);
                proj += v * v.adjoint();
                sorted.set_column(col, &v);
                level_of.push(k);
                col += 1;
            }
            projectors.push(proj);
        }

        let bohr_frequencies = bohr_set(&levels, tolerance);
        Self {
            levels,
            projectors,
            bohr_frequencies,
            vectors: sorted,
            level_of,
            tolerance,
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    /// `Σ_k ε_k Π_k`.
    pub fn operator(&self) -> HermitianOperator {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for (e, p) in self.levels.iter().zip(&self.projectors) {
            m += p * super::c(*e);
        }
        HermitianOperator::hermitized(m)
    }

    /// Index into `bohr_frequencies` matching `omega` within tolerance.
    pub fn bohr_index(&self, omega: f64) -> Option<usize> {
        self.bohr_frequencies
            .iter()
            .position(|&w| (w - omega).abs() <= self.tolerance.max(1e-12 * w.abs()))
    }
}

/// Sorted, deduplicated differences `ε_k − ε_l`; closed under negation.
fn bohr_set(levels: &[f64], tolerance: f64) -> Vec<f64> {
    let mut positive: Vec<f64> = Vec::new();
    for (a, &ea) in levels.iter().enumerate() {
        for &eb in &levels[..a] {
            positive.push(ea - eb);
        }
    }
    positive.sort_by(f64::total_cmp);
    let mut dedup: Vec<f64> = Vec::new();
    for w in positive {
        match dedup.last() {
            Some(&last) if w - last <= tolerance => {}
            _ => dedup.push(w),
        }
    }
    let mut all: Vec<f64> = dedup.iter().rev().map(|w| -w).collect();
    all.push(0.0);
    all.extend(dedup);
    all
}

/// Eigen-decomposes a Hermitian operator, merging eigenvalues closer than
/// `degeneracy_tol`.
pub fn spectral_decompose(h: &HermitianOperator, degeneracy_tol: f64) -> Result<SpectralDecomposition> {
    if degeneracy_tol.is_nan() || degeneracy_tol <= 0.0 {
        return Err(Error::param("degeneracy_tol", "must be positive"));
    }
    // Re-check: callers may have built the operator with `hermitized`.
    let defect = super::hermiticity_defect(h.matrix());
    if defect > super::HERMITIAN_TOL {
        return Err(Error::invariant("HermitianOperator", format!("defect {defect:.3e}")));
    }
    let (values, vectors) = eigh(h.matrix());
    Ok(SpectralDecomposition::from_eigensystem(
        &values,
        vectors,
        degeneracy_tol,
    ))
}

#[derive(Debug, Clone)]
pub struct BohrComponent {
    pub omega: f64,
    pub op: CMatrix,
}

/// Bohr-frequency components `S_ω` of a coupling operator.
///
/// `S_ω = Σ_{ε_l − ε_k = ω} Π_k S Π_l` lowers the energy by `ω`, so the
/// Heisenberg-picture operator expands as `e^{iHt} S e^{−iHt} = Σ_ω e^{−iωt} S_ω`
/// and `S_{−ω} = S_ω†`. Sorted by ascending `ω`.
#[derive(Debug, Clone)]
pub struct BohrComponents {
    pub components: Vec<BohrComponent>,
}

impl BohrComponents {
    pub fn get(&self, omega: f64, tol: f64) -> Option<&CMatrix> {
        self.components
            .iter()
            .find(|c| (c.omega - omega).abs() <= tol)
            .map(|c| &c.op)
    }

    pub fn reconstruct(&self) -> Option<CMatrix> {
        let mut it = self.components.iter();
        let first = it.next()?.op.clone();
        Some(it.fold(first, |acc, c| acc + &c.op))
    }

    /// `Σ_ω e^{−iωt} S_ω`.
    pub fn heisenberg(&self, t: f64) -> Option<CMatrix> {
        let mut it = self.components.iter();
        let first = it.next()?;
        let init = &first.op * (-I * first.omega * t).exp();
        Some(it.fold(init, |acc, c| acc + &c.op * (-I * c.omega * t).exp()))
    }
}

pub fn bohr_components(s: &HermitianOperator, dec: &SpectralDecomposition) -> Result<BohrComponents> {
    check_same_dim(dec.dim(), s.dim())?;
    let nl = dec.levels.len();
    let mut ops: Vec<Option<CMatrix>> = vec![None; dec.bohr_frequencies.len()];
    for k in 0..nl {
        for l in 0..nl {
            let omega = dec.levels[l] - dec.levels[k];
            let idx = dec
                .bohr_index(omega)
                .ok_or_else(|| Error::NumericalFailure(format!("Bohr frequency {omega} missing from decomposition")))?;
            let block = &dec.projectors[k] * s.matrix() * &dec.projectors[l];
            match &mut ops[idx] {
                Some(acc) => *acc += block,
                slot @ None => *slot = Some(block),
            }
        }
    }
    let components = dec
        .bohr_frequencies
        .iter()
        .zip(ops)
        .filter_map(|(&omega, op)| op.map(|op| BohrComponent { omega, op }))
        .filter(|c| c.op.norm() >= COMPONENT_FLOOR)
        .collect();
    Ok(BohrComponents { components })
}

#[cfg(test)]
mod tests {
    use super::super::{c, pauli, unitary_exp};
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> HermitianOperator {
        // Small LCG keeps these unit tests free of extra dependencies.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = num_complex::Complex64::new(next(), next());
            }
        }
        HermitianOperator::hermitized(m)
    }

    #[test]
    fn two_level_diagonal() {
        let h = HermitianOperator::from_real_diagonal(&[0.5, -0.5]);
        let dec = spectral_decompose(&h, 1e-9).unwrap();
        assert_eq!(dec.levels, vec![-0.5, 0.5]);
        assert_eq!(dec.bohr_frequencies, vec![-1.0, 0.0, 1.0]);
    }

    #[test]
    fn identity_is_single_level() {
        let h = HermitianOperator::new(CMatrix::identity(3, 3)).unwrap();
        let dec = spectral_decompose(&h, 1e-9).unwrap();
        assert_eq!(dec.levels.len(), 1);
        assert!((&dec.projectors[0] - CMatrix::identity(3, 3)).norm() < 1e-14);
        assert_eq!(dec.bohr_frequencies, vec![0.0]);
    }

    #[test]
    fn near_degenerate_levels_merge() {
        let h = HermitianOperator::from_real_diagonal(&[1.0, 1.0 + 1e-11, 2.0]);
        let dec = spectral_decompose(&h, 1e-9).unwrap();
        assert_eq!(dec.levels.len(), 2);
        assert_eq!(dec.bohr_frequencies.len(), 3);
        assert!((dec.projectors[0].trace().re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_positive_tolerance() {
        let h = HermitianOperator::from_real_diagonal(&[1.0]);
        assert!(spectral_decompose(&h, 0.0).is_err());
    }

    #[test]
    fn qubit_sigma_x_components() {
        let h = HermitianOperator::new(pauli::sigma_z() * c(0.5)).unwrap();
        let s = HermitianOperator::new(pauli::sigma_x()).unwrap();
        let dec = spectral_decompose(&h, 1e-9).unwrap();
        let comps = bohr_components(&s, &dec).unwrap();
        assert_eq!(comps.components.len(), 2);
        // Positive frequency lowers the energy.
        assert!((comps.get(1.0, 1e-12).unwrap() - pauli::sigma_minus()).norm() < 1e-15);
        assert!((comps.get(-1.0, 1e-12).unwrap() - pauli::sigma_plus()).norm() < 1e-15);
        assert!(comps.get(0.0, 1e-12).is_none());
    }

    #[test]
    fn commuting_coupling_has_only_zero_component() {
        let h = random_hermitian(3, 7);
        let dec = spectral_decompose(&h, 1e-9).unwrap();
        let comps = bohr_components(&h, &dec).unwrap();
        assert_eq!(comps.components.len(), 1);
        assert_eq!(comps.components[0].omega, 0.0);
        assert!((&comps.components[0].op - h.matrix()).norm() < 1e-12);
    }

    #[test]
    fn random_three_level_heisenberg_matches_exponential() {
        let h = random_hermitian(3, 11);
        let s = random_hermitian(3, 12);
        let dec = spectral_decompose(&h, 1e-9).unwrap();
        let comps = bohr_components(&s, &dec).unwrap();
        for t in [0.3, 1.7] {
            let u = unitary_exp(h.matrix(), t);
            let direct = u.adjoint() * s.matrix() * &u;
            let series = comps.heisenberg(t).unwrap();
            assert!((direct - series).norm() < 1e-10);
        }
        assert!((comps.reconstruct().unwrap() - s.matrix()).norm() < 1e-12);
        for comp in &comps.components {
            let partner = comps.get(-comp.omega, 1e-9).unwrap();
            assert!((partner - comp.op.adjoint()).norm() < 1e-14);
        }
    }

    #[test]
    fn random_four_level_bohr_set_matches_pairwise_differences() {
        let h = random_hermitian(4, 3);
        let dec = spectral_decompose(&h, 1e-9).unwrap();
        // Independent eigensolver: Schur form of the same matrix.
        let schur = nalgebra::linalg::Schur::new(h.matrix().clone());
        let mut eigs: Vec<f64> = schur.eigenvalues().unwrap().iter().map(|z| z.re).collect();
        eigs.sort_by(f64::total_cmp);
        let mut brute: Vec<f64> = Vec::new();
        for a in &eigs {
            for b in &eigs {
                brute.push(a - b);
            }
        }
        brute.sort_by(f64::total_cmp);
        brute.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(brute.len(), dec.bohr_frequencies.len());
        for (x, y) in brute.iter().zip(&dec.bohr_frequencies) {
            assert!((x - y).abs() < 1e-10);
        }
        let total: CMatrix = dec.projectors.iter().fold(CMatrix::zeros(4, 4), |acc, p| acc + p);
        assert!((total - CMatrix::identity(4, 4)).norm() < 1e-12);
        for (i, p) in dec.projectors.iter().enumerate() {
            for (j, q) in dec.projectors.iter().enumerate() {
                let prod = p * q;
                let expected = if i == j { p.clone() } else { CMatrix::zeros(4, 4) };
                assert!((prod - expected).norm() < 1e-12);
            }
        }
    }
}
