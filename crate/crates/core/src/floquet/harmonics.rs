use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{monodromy, propagate, propagate_grid, Monodromy, PeriodicHamiltonian, PropagationOptions};
use crate::operator::{check_same_dim, HermitianOperator, UnitaryOperator};
use crate::parallel::{map_range, Execution};
use crate::{CMatrix, Error, Result};

/// Harmonics with Frobenius norm below this are dropped.
pub const HARMONIC_FLOOR: f64 = 1e-14;
/// Relative floor, in units of `‖S‖`, for round-off left behind by the
/// grid propagation and the FFT.
pub const RELATIVE_HARMONIC_FLOOR: f64 = 1e-12;
/// Off-grid sample count for the reconstruction check.
pub const RECONSTRUCTION_SAMPLES: usize = 37;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetOptions {
    /// Harmonics kept: `q ∈ [−Q, Q]`.
    pub q_max: usize,
    /// Samples per period for the DFT; must satisfy `grid_n ≥ 4Q + 4`.
    pub grid_n: usize,
    pub propagation: PropagationOptions,
    /// Largest accepted reconstruction error.
    pub reconstruction_tol: f64,
    pub execution: Execution,
}

impl Default for FloquetOptions {
    fn default() -> Self {
        Self {
            q_max: 8,
            grid_n: 256,
            propagation: PropagationOptions::default(),
            reconstruction_tol: 1e-6,
            execution: Execution::default(),
        }
    }
}

impl FloquetOptions {
    fn validate(&self) -> Result<()> {
        if self.grid_n < 4 * self.q_max + 4 {
            return Err(Error::param(
                "grid_n",
                format!("needs grid_n >= 4Q + 4 = {}, got {}", 4 * self.q_max + 4, self.grid_n),
            ));
        }
        Ok(())
    }
}

/// One Fourier–Bohr component `S_{ωq}`.
#[derive(Debug, Clone)]
pub struct Harmonic {
    pub omega: f64,
    pub q: i64,
    pub op: CMatrix,
}

/// Harmonic decomposition of one coupling operator.
#[derive(Debug, Clone)]
pub struct FloquetDecomposition {
    pub period: f64,
    pub drive_frequency: f64,
    pub quasi_energies: Vec<f64>,
    pub averaged_hamiltonian: HermitianOperator,
    /// Sorted by `(ω, q)`.
    pub harmonics: Vec<Harmonic>,
    pub q_max: usize,
    pub reconstruction_error: f64,
}

impl FloquetDecomposition {
    pub fn get(&self, omega: f64, q: i64, tol: f64) -> Option<&CMatrix> {
        self.harmonics
            .iter()
            .find(|h| h.q == q && (h.omega - omega).abs() <= tol)
            .map(|h| &h.op)
    }

    /// `Σ_{ω,q} e^{−i(ω + qΩ)t} S_{ωq}`.
    pub fn reconstruct(&self, t: f64) -> CMatrix {
        let n = self.averaged_hamiltonian.dim();
        let mut acc = CMatrix::zeros(n, n);
        for h in &self.harmonics {
            let phase = Complex64::new(0.0, -(h.omega + h.q as f64 * self.drive_frequency) * t).exp();
            acc += &h.op * phase;
        }
        acc
    }

    /// Distinct quasi-Bohr frequencies present, ascending.
    pub fn frequencies(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for h in &self.harmonics {
            if out.last().is_none_or(|&w| (h.omega - w).abs() > 1e-12) {
                out.push(h.omega);
            }
        }
        out
    }
}

/// Monodromy plus the propagator grid, shared by every coupling operator
/// decomposed against the same drive.
#[derive(Debug, Clone)]
pub struct FloquetEngine {
    hamiltonian: PeriodicHamiltonian,
    options: FloquetOptions,
    monodromy: Monodromy,
    grid: Vec<UnitaryOperator>,
    check: Vec<(f64, UnitaryOperator)>,
}

impl FloquetEngine {
    pub fn new(hamiltonian: PeriodicHamiltonian, options: FloquetOptions) -> Result<Self> {
        options.validate()?;
        let monodromy = monodromy(&hamiltonian, &options.propagation)?;
        let mut grid = propagate_grid(&hamiltonian, options.grid_n, &options.propagation, options.execution)?;
        grid.pop();
        let tau = hamiltonian.period();
        let check = map_range(options.execution, RECONSTRUCTION_SAMPLES, |m| {
            let t = tau * (m as f64 + 0.2917) / RECONSTRUCTION_SAMPLES as f64;
            propagate(&hamiltonian, t, &options.propagation).map(|u| (t, u))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            hamiltonian,
            options,
            monodromy,
            grid,
            check,
        })
    }

    pub fn hamiltonian(&self) -> &PeriodicHamiltonian {
        &self.hamiltonian
    }

    pub fn options(&self) -> &FloquetOptions {
        &self.options
    }

    pub fn monodromy(&self) -> &Monodromy {
        &self.monodromy
    }

    pub fn averaged_hamiltonian(&self) -> &HermitianOperator {
        &self.monodromy.averaged_hamiltonian
    }

    /// Splits `U†(t) S U(t)` into harmonics `S_{ωq}`.
    ///
    /// Samples are rotated into the quasi-energy eigenbasis, each `(k, l)`
    /// block is demodulated by `e^{iω_{kl}t}`, and the remaining periodic
    /// signal is Fourier transformed on the grid.
    pub fn decompose(&self, s: &HermitianOperator) -> Result<FloquetDecomposition> {
        check_same_dim(self.hamiltonian.dim(), s.dim())?;
        let n = s.dim();
        let big_n = self.options.grid_n;
        let q_max = self.options.q_max as i64;
        let tau = self.hamiltonian.period();
        let drive = self.hamiltonian.drive_frequency();
        let quasi = &self.monodromy.quasi;
        let v = &quasi.vectors;
        let exec = self.options.execution;

        let rotated: Vec<CMatrix> = map_range(exec, big_n, |k| {
            let u = self.grid[k].matrix();
            v.adjoint() * u.adjoint() * s.matrix() * u * v
        });

        let sector_omega = |a: usize, b: usize| quasi.levels[quasi.level_of[b]] - quasi.levels[quasi.level_of[a]];

        // FFT every entry after removing its Bohr oscillation.
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_inverse(big_n);
        let coefficients: Vec<Vec<Complex64>> = map_range(exec, n * n, |entry| {
            let (a, b) = (entry % n, entry / n);
            let w = sector_omega(a, b);
            let mut buf: Vec<Complex64> = (0..big_n)
                .map(|k| {
                    let t = tau * k as f64 / big_n as f64;
                    rotated[k][(a, b)] * Complex64::new(0.0, w * t).exp()
                })
                .collect();
            fft.process(&mut buf);
            let scale = 1.0 / big_n as f64;
            (-q_max..=q_max)
                .map(|q| buf[q.rem_euclid(big_n as i64) as usize] * scale)
                .collect()
        });

        let floor = HARMONIC_FLOOR.max(RELATIVE_HARMONIC_FLOOR * s.matrix().norm());
        let mut harmonics = Vec::new();
        for (wi, &omega) in quasi.bohr_frequencies.iter().enumerate() {
            let entries: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .filter(|&(a, b)| quasi.bohr_index(sector_omega(a, b)) == Some(wi))
                .collect();
            if entries.is_empty() {
                continue;
            }
            for (qi, q) in (-q_max..=q_max).enumerate() {
                let mut block = CMatrix::zeros(n, n);
                for &(a, b) in &entries {
                    block[(a, b)] = coefficients[a + n * b][qi];
                }
                let op = v * block * v.adjoint();
                if op.norm() >= floor {
                    harmonics.push(Harmonic { omega, q, op });
                }
            }
        }

        let mut decomposition = FloquetDecomposition {
            period: tau,
            drive_frequency: drive,
            quasi_energies: quasi.levels.clone(),
            averaged_hamiltonian: self.monodromy.averaged_hamiltonian.clone(),
            harmonics,
            q_max: self.options.q_max,
            reconstruction_error: 0.0,
        };
        let errors = map_range(exec, self.check.len(), |m| {
            let (t, u) = &self.check[m];
            let direct = u.matrix().adjoint() * s.matrix() * u.matrix();
            (direct - decomposition.reconstruct(*t)).norm()
        });
        decomposition.reconstruction_error = errors.into_iter().fold(0.0, f64::max);
        if decomposition.reconstruction_error > self.options.reconstruction_tol {
            return Err(Error::Truncation {
                error: decomposition.reconstruction_error,
                tolerance: self.options.reconstruction_tol,
                q_max: self.options.q_max,
                suggested_q: (2 * self.options.q_max).max(1),
            });
        }
        Ok(decomposition)
    }
}

/// One-shot helper: builds the engine and decomposes `s`.
pub fn harmonic_decompose(
    s: &HermitianOperator,
    h: &PeriodicHamiltonian,
    options: FloquetOptions,
) -> Result<FloquetDecomposition> {
    FloquetEngine::new(h.clone(), options)?.decompose(s)
}
