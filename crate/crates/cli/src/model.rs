//! Turns a validated scenario into a generator bundle.

use std::f64::consts::PI;

use anyhow::{bail, Context, Result};
use floquet_core::bath::BathSpec;
use floquet_core::floquet::{FloquetEngine, FloquetOptions, PeriodicHamiltonian, PropagationOptions};
use floquet_core::generator::{build_floquet_with, build_static_with, GeneratorBundle};
use floquet_core::operator::{DensityMatrix, HermitianOperator};
use floquet_core::parallel::Execution;
use floquet_core::qubit::{build_qubit_bundle_with, ModulationProfile, QubitModel, Shape};
use floquet_core::Complex64;

use crate::config::{HamiltonianConfig, InitialState, ModulationConfig, ScenarioConfig, SystemConfig};

/// Eigenvalues of a constant Hamiltonian closer than this share a Bohr sector.
const DEGENERACY_TOL: f64 = 1e-9;

/// Everything a run needs once the physics is assembled.
pub struct Prepared {
    pub bundle: GeneratorBundle,
    /// Drive used to rotate interaction-picture states back to the lab frame.
    pub hamiltonian: PeriodicHamiltonian,
    pub propagation: PropagationOptions,
    pub qubit: Option<QubitModel>,
    /// Largest reconstruction error over the couplings, for Floquet systems.
    pub reconstruction_error: Option<f64>,
}

fn baths(cfg: &ScenarioConfig) -> Result<Vec<BathSpec>> {
    cfg.baths
        .iter()
        .map(|b| b.to_spec().with_context(|| format!("bath `{}`", b.label)))
        .collect()
}

pub fn propagation(cfg: &ScenarioConfig) -> PropagationOptions {
    let f = &cfg.floquet;
    PropagationOptions {
        steps_per_period: f.steps_per_period.unwrap_or(crate::config::DEFAULT_STEPS_PER_PERIOD),
        integrator: f.integrator.map(Into::into).unwrap_or_default(),
    }
}

pub fn modulation_profile(cfg: &ScenarioConfig) -> Result<ModulationProfile> {
    let SystemConfig::Qubit {
        omega0,
        drive_frequency,
        modulation,
    } = &cfg.system
    else {
        bail!("scenario does not describe a qubit");
    };
    let (w0, big) = (omega0.unwrap_or_default(), drive_frequency.unwrap_or_default());
    let period = 2.0 * PI / big;
    let profile = match modulation {
        ModulationConfig::Constant => ModulationProfile::new(w0, period, Shape::Constant),
        ModulationConfig::PulseTrain => ModulationProfile::new(w0, period, Shape::PulseTrain),
        ModulationConfig::Sinusoidal { amplitude, phase } => ModulationProfile::new(
            w0,
            period,
            Shape::Sinusoidal {
                amplitude: *amplitude,
                phase: *phase,
            },
        ),
        ModulationConfig::Tabulated { times, omega, .. } => {
            let p = ModulationProfile::tabulated(times.clone(), omega.clone())
                .context("qubit-workbench: tabulated modulation")?;
            if (p.drive_frequency() - big).abs() > 1e-9 * big || (p.omega0() - w0).abs() > 1e-9 * w0.abs() {
                bail!("system: omega0 / drive_frequency disagree with the tabulated samples");
            }
            Ok(p)
        }
    };
    profile.context("qubit-workbench: modulation profile")
}

fn generic_hamiltonian(h: &HamiltonianConfig, dim: usize) -> Result<PeriodicHamiltonian> {
    let herm = |m: &crate::config::MatrixConfig| HermitianOperator::hermitized(m.to_matrix());
    let built = match h {
        HamiltonianConfig::Constant { matrix } => PeriodicHamiltonian::constant(herm(matrix), 2.0 * PI),
        HamiltonianConfig::Piecewise { segments } => {
            PeriodicHamiltonian::piecewise(segments.iter().map(|s| (s.duration, herm(&s.matrix))).collect())
        }
        HamiltonianConfig::Harmonic {
            drive_frequency,
            static_part,
            cos,
            sin,
        } => {
            let big = *drive_frequency;
            let h0 = static_part.to_matrix();
            let cos: Vec<_> = cos.iter().map(|m| m.to_matrix()).collect();
            let sin: Vec<_> = sin.iter().map(|m| m.to_matrix()).collect();
            PeriodicHamiltonian::smooth(dim, 2.0 * PI / big, move |t| {
                let mut acc = h0.clone();
                for (k, m) in cos.iter().enumerate() {
                    acc += m * Complex64::new(((k + 1) as f64 * big * t).cos(), 0.0);
                }
                for (k, m) in sin.iter().enumerate() {
                    acc += m * Complex64::new(((k + 1) as f64 * big * t).sin(), 0.0);
                }
                acc
            })
        }
    };
    built.context("floquet-engine: periodic Hamiltonian")
}

/// Builds the generator for `cfg`. `exec` governs the inner data-parallel
/// work; sweeps pass `Sequential` because they parallelize across points.
pub fn prepare(cfg: &ScenarioConfig, exec: Execution) -> Result<Prepared> {
    let baths = baths(cfg)?;
    let propagation = propagation(cfg);
    match &cfg.system {
        SystemConfig::Qubit { .. } => {
            let profile = modulation_profile(cfg)?;
            let model = QubitModel::with_execution(profile, baths, cfg.floquet.q_max, exec)
                .context("qubit-workbench: model")?;
            let bundle = build_qubit_bundle_with(&model, exec).context("generator-builder: qubit bundle")?;
            let hamiltonian = model.periodic_hamiltonian().context("floquet-engine: qubit drive")?;
            Ok(Prepared {
                bundle,
                hamiltonian,
                propagation,
                qubit: Some(model),
                reconstruction_error: None,
            })
        }
        SystemConfig::Generic {
            dim,
            hamiltonian,
            couplings,
        } => {
            let h = generic_hamiltonian(hamiltonian, *dim)?;
            let ops: Vec<(HermitianOperator, BathSpec)> = couplings
                .iter()
                .map(|c| {
                    let bath = baths.iter().find(|b| b.label == c.bath).cloned().expect("validated");
                    (HermitianOperator::hermitized(c.operator.to_matrix()), bath)
                })
                .collect();
            if let HamiltonianConfig::Constant { matrix } = hamiltonian {
                let h0 = HermitianOperator::hermitized(matrix.to_matrix());
                let bundle =
                    build_static_with(&h0, &ops, DEGENERACY_TOL, exec).context("generator-builder: static bundle")?;
                return Ok(Prepared {
                    bundle,
                    hamiltonian: h,
                    propagation,
                    qubit: None,
                    reconstruction_error: None,
                });
            }
            let f = &cfg.floquet;
            let opts = FloquetOptions {
                q_max: f.q_max.unwrap_or_default(),
                grid_n: f.grid_n.unwrap_or_default(),
                propagation,
                reconstruction_tol: f
                    .reconstruction_tol
                    .unwrap_or(crate::config::DEFAULT_RECONSTRUCTION_TOL),
                execution: exec,
            };
            let engine = FloquetEngine::new(h.clone(), opts).context("floquet-engine: monodromy")?;
            let mut worst: f64 = 0.0;
            let mut decomps = Vec::with_capacity(ops.len());
            for (s, bath) in ops {
                let fd = engine
                    .decompose(&s)
                    .with_context(|| format!("floquet-engine: coupling to bath `{}`", bath.label))?;
                worst = worst.max(fd.reconstruction_error);
                decomps.push((fd, bath));
            }
            let bundle = build_floquet_with(&decomps, exec).context("generator-builder: Floquet bundle")?;
            Ok(Prepared {
                bundle,
                hamiltonian: h,
                propagation,
                qubit: None,
                reconstruction_error: Some(worst),
            })
        }
    }
}

/// Initial state in the lab frame at `t = 0`, where it coincides with the
/// interaction picture.
pub fn initial_state(cfg: &ScenarioConfig, prepared: &Prepared) -> Result<DensityMatrix> {
    let n = prepared.bundle.dim();
    Ok(match cfg.run.initial_state {
        InitialState::Basis { index } => DensityMatrix::basis(n, index),
        InitialState::MaximallyMixed => DensityMatrix::maximally_mixed(n),
        InitialState::Gibbs { temperature } => DensityMatrix::gibbs(&prepared.bundle.averaged_hamiltonian, temperature),
    })
}
