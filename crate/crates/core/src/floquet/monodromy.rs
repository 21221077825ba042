use std::f64::consts::PI;

use nalgebra::linalg::Schur;

use super::{propagate, PeriodicHamiltonian, PropagationOptions};
use crate::operator::{HermitianOperator, SpectralDecomposition, UnitaryOperator};
use crate::{CMatrix, Result};

/// Quasi-energies closer than this (on the circle of period `Ω`) are merged.
pub const QUASI_DEGENERACY_TOL: f64 = 1e-9;

/// One-period propagator together with its quasi-energy structure.
#[derive(Debug, Clone)]
pub struct Monodromy {
    pub period: f64,
    pub drive_frequency: f64,
    pub unitary: UnitaryOperator,
    /// Levels are the folded quasi-energies `ε_k ∈ (−Ω/2, Ω/2]`.
    pub quasi: SpectralDecomposition,
    pub averaged_hamiltonian: HermitianOperator,
    pub degenerate: bool,
}

/// Eigen-decomposes `U(τ, 0) = Σ_k e^{−iε_k τ} Π_k` and builds `H̄ = Σ_k ε_k Π_k`.
pub fn monodromy(h: &PeriodicHamiltonian, opts: &PropagationOptions) -> Result<Monodromy> {
    let tau = h.period();
    let omega = h.drive_frequency();
    let unitary = propagate(h, tau, opts)?;

    let (q, t) = Schur::new(unitary.matrix().clone()).unpack();
    let n = h.dim();
    let mut quasi: Vec<f64> = (0..n)
        .map(|k| {
            let mut theta = -t[(k, k)].arg();
            if theta <= -PI {
                theta += 2.0 * PI;
            }
            theta / tau
        })
        .collect();

    // Levels straddling the zone edge are one level on the circle.
    let tol = QUASI_DEGENERACY_TOL;
    if quasi.iter().any(|&e| e > 0.5 * omega - tol) {
        for e in quasi.iter_mut() {
            if *e < -0.5 * omega + tol {
                *e += omega;
            }
        }
    }

    let vectors: CMatrix = q;
    let decomposition = SpectralDecomposition::from_eigensystem(&quasi, vectors, tol);
    let degenerate = decomposition.levels.len() < n;
    if degenerate {
        log::warn!(
            "quasi-energy degeneracy: {} levels merged into {}",
            n,
            decomposition.levels.len()
        );
    }
    let averaged_hamiltonian = decomposition.operator();
    Ok(Monodromy {
        period: tau,
        drive_frequency: omega,
        unitary,
        quasi: decomposition,
        averaged_hamiltonian,
        degenerate,
    })
}
