//! Periodic Hamiltonians, their propagators and Floquet decompositions.
//!
//! For `H(t) = H(t + τ)` the one-period propagator is written
//! `U(τ, 0) = e^{−i H̄ τ}`, with the averaged (quasi-energy) Hamiltonian
//! `H̄ = Σ_k ε_k Π_k` and quasi-energies folded into `(−Ω/2, Ω/2]`,
//! `Ω = 2π/τ`. A coupling operator in the interaction picture then splits as
//!
//! `U†(t) S U(t) = Σ_{ω, q} e^{−i(ω + qΩ)t} S_{ωq}`,
//!
//! where `ω` runs over quasi-Bohr frequencies and `S_{ωq}` lowers the
//! quasi-energy by `ω`. Only `ω + qΩ` is independent of the branch chosen
//! for the quasi-energies.

mod harmonics;
mod monodromy;

pub use harmonics::{
    harmonic_decompose, FloquetDecomposition, FloquetEngine, FloquetOptions, Harmonic, HARMONIC_FLOOR,
    RECONSTRUCTION_SAMPLES, RELATIVE_HARMONIC_FLOOR,
};
pub use monodromy::{monodromy, Monodromy, QUASI_DEGENERACY_TOL};

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::operator::{c, eigh, superop_sandwich, unitarity_defect, HermitianOperator, Superoperator, UnitaryOperator};
use crate::parallel::{map_range, Execution};
use crate::{CMatrix, Error, Result};

/// Diagonal drive `H(t) = diag(e_k(t))`, given together with the exact
/// cumulative phases `Φ_k(t) = ∫₀ᵗ e_k(s) ds` for `t ∈ [0, τ]`.
///
/// Phases may jump (delta kicks); `energies` then returns only the regular
/// part.
pub trait DiagonalDrive: Send + Sync {
    fn energies(&self, t: f64) -> Vec<f64>;
    fn phases(&self, t: f64) -> Vec<f64>;
}

#[derive(Clone)]
pub struct Segment {
    pub duration: f64,
    pub hamiltonian: HermitianOperator,
    eigen: (Vec<f64>, CMatrix),
}

impl Segment {
    pub fn new(duration: f64, hamiltonian: HermitianOperator) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::param(
                "segment.duration",
                format!("must be positive, got {duration}"),
            ));
        }
        let eigen = eigh(hamiltonian.matrix());
        Ok(Self {
            duration,
            hamiltonian,
            eigen,
        })
    }

    fn exp(&self, t: f64) -> CMatrix {
        let (values, vectors) = &self.eigen;
        let phases = nalgebra::DVector::from_iterator(
            values.len(),
            values.iter().map(|&e| num_complex::Complex64::new(0.0, -e * t).exp()),
        );
        vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint()
    }
}

#[derive(Clone)]
pub enum Drive {
    PiecewiseConstant(Vec<Segment>),
    Smooth(Arc<dyn Fn(f64) -> CMatrix + Send + Sync>),
    DiagonalModulated(Arc<dyn DiagonalDrive>),
}

/// Which representation a [`PeriodicHamiltonian`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormTag {
    PiecewiseConstant,
    SmoothSampled,
    DiagonalModulated,
}

/// A `τ`-periodic Hamiltonian.
#[derive(Clone)]
pub struct PeriodicHamiltonian {
    dim: usize,
    period: f64,
    drive: Drive,
}

impl fmt::Debug for PeriodicHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicHamiltonian")
            .field("dim", &self.dim)
            .field("period", &self.period)
            .field("form", &self.form())
            .finish()
    }
}

pub const PERIODICITY_TOL: f64 = 1e-12;

fn check_period(period: f64) -> Result<()> {
    if period.is_finite() && period > 0.0 {
        Ok(())
    } else {
        Err(Error::param("period", format!("must be positive, got {period}")))
    }
}

impl PeriodicHamiltonian {
    /// A constant Hamiltonian regarded as periodic with `period`.
    pub fn constant(h: HermitianOperator, period: f64) -> Result<Self> {
        check_period(period)?;
        Ok(Self {
            dim: h.dim(),
            period,
            drive: Drive::PiecewiseConstant(vec![Segment::new(period, h)?]),
        })
    }

    /// Piecewise-constant drive; durations must add up to the period.
    pub fn piecewise(segments: Vec<(f64, HermitianOperator)>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::param("segments", "at least one segment required"));
        }
        let dim = segments[0].1.dim();
        let mut built = Vec::with_capacity(segments.len());
        for (duration, h) in segments {
            crate::operator::check_same_dim(dim, h.dim())?;
            built.push(Segment::new(duration, h)?);
        }
        let period = built.iter().map(|s| s.duration).sum();
        Ok(Self {
            dim,
            period,
            drive: Drive::PiecewiseConstant(built),
        })
    }

    /// Smooth drive given by an evaluator; periodicity is checked on 64 points.
    pub fn smooth<F>(dim: usize, period: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> CMatrix + Send + Sync + 'static,
    {
        check_period(period)?;
        for k in 0..64 {
            let t = period * k as f64 / 64.0;
            let (a, b) = (f(t), f(t + period));
            crate::operator::check_same_dim(dim, a.nrows())?;
            HermitianOperator::new(a.clone())?;
            let gap = (&a - &b).norm();
            if gap > PERIODICITY_TOL * (1.0 + a.norm()) {
                return Err(Error::invariant(
                    "PeriodicHamiltonian",
                    format!("‖H(t) − H(t+τ)‖ = {gap:.3e} at t = {t}"),
                ));
            }
        }
        Ok(Self {
            dim,
            period,
            drive: Drive::Smooth(Arc::new(f)),
        })
    }

    pub fn diagonal(dim: usize, period: f64, drive: Arc<dyn DiagonalDrive>) -> Result<Self> {
        check_period(period)?;
        let e = drive.energies(0.0);
        crate::operator::check_same_dim(dim, e.len())?;
        Ok(Self {
            dim,
            period,
            drive: Drive::DiagonalModulated(drive),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn drive_frequency(&self) -> f64 {
        2.0 * PI / self.period
    }

    pub fn drive(&self) -> &Drive {
        &self.drive
    }

    pub fn form(&self) -> FormTag {
        match self.drive {
            Drive::PiecewiseConstant(_) => FormTag::PiecewiseConstant,
            Drive::Smooth(_) => FormTag::SmoothSampled,
            Drive::DiagonalModulated(_) => FormTag::DiagonalModulated,
        }
    }

    /// True for a single-segment drive.
    pub fn is_constant(&self) -> bool {
        matches!(&self.drive, Drive::PiecewiseConstant(s) if s.len() == 1)
    }

    /// `H(t)`; for diagonal drives only the regular part of the energies.
    pub fn evaluate(&self, t: f64) -> HermitianOperator {
        let local = t.rem_euclid(self.period);
        match &self.drive {
            Drive::PiecewiseConstant(segments) => {
                let mut start = 0.0;
                for s in segments {
                    if local < start + s.duration {
                        return s.hamiltonian.clone();
                    }
                    start += s.duration;
                }
                segments.last().unwrap().hamiltonian.clone()
            }
            Drive::Smooth(f) => HermitianOperator::hermitized(f(t)),
            Drive::DiagonalModulated(d) => HermitianOperator::from_real_diagonal(&d.energies(local)),
        }
    }
}

/// Time-stepping scheme for smooth drives. Both are exactly unitary per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integrator {
    /// `U ← e^{−iH(t + h/2)h} U`; second order.
    Midpoint,
    /// Two-point Gauss fourth-order Magnus step.
    #[default]
    Magnus4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    pub steps_per_period: usize,
    pub integrator: Integrator,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            steps_per_period: 1024,
            integrator: Integrator::Magnus4,
        }
    }
}

pub const MIN_STEPS_PER_PERIOD: usize = 64;
pub const DRIFT_TOL: f64 = 1e-8;

impl PropagationOptions {
    fn validate(&self) -> Result<()> {
        if self.steps_per_period < MIN_STEPS_PER_PERIOD {
            return Err(Error::param(
                "steps_per_period",
                format!("must be at least {MIN_STEPS_PER_PERIOD}, got {}", self.steps_per_period),
            ));
        }
        Ok(())
    }
}

fn step(f: &(dyn Fn(f64) -> CMatrix + Send + Sync), t: f64, h: f64, integrator: Integrator) -> CMatrix {
    match integrator {
        Integrator::Midpoint => crate::operator::unitary_exp(&f(t + 0.5 * h), h),
        Integrator::Magnus4 => {
            let offset = 3f64.sqrt() / 6.0;
            let h1 = f(t + h * (0.5 - offset));
            let h2 = f(t + h * (0.5 + offset));
            let comm = &h2 * &h1 - &h1 * &h2;
            let k = (&h1 + &h2) * c(0.5 * h) - comm * num_complex::Complex64::new(0.0, 3f64.sqrt() * h * h / 12.0);
            crate::operator::unitary_exp(&crate::operator::hermitize(&k), 1.0)
        }
    }
}

fn integrate_smooth(
    f: &(dyn Fn(f64) -> CMatrix + Send + Sync),
    start: f64,
    end: f64,
    steps: usize,
    integrator: Integrator,
    mut u: CMatrix,
) -> CMatrix {
    let h = (end - start) / steps as f64;
    for k in 0..steps {
        u = step(f, start + k as f64 * h, h, integrator) * u;
    }
    u
}

fn piecewise_within_period(segments: &[Segment], t: f64) -> CMatrix {
    let n = segments[0].hamiltonian.dim();
    let mut u = CMatrix::identity(n, n);
    let mut remaining = t;
    for s in segments {
        if remaining <= 0.0 {
            break;
        }
        let dt = remaining.min(s.duration);
        u = s.exp(dt) * u;
        remaining -= s.duration;
    }
    u
}

fn matrix_power(m: &CMatrix, mut n: u64) -> CMatrix {
    let mut result = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &base * &result;
        }
        base = &base * &base;
        n >>= 1;
    }
    result
}

fn diagonal_unitary(phases: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        phases.len(),
        phases.iter().map(|&p| num_complex::Complex64::new(0.0, -p).exp()),
    ))
}

fn finish(u: CMatrix) -> Result<UnitaryOperator> {
    let drift = unitarity_defect(&u);
    if drift > DRIFT_TOL {
        return Err(Error::Accuracy {
            drift,
            tolerance: DRIFT_TOL,
        });
    }
    if drift > crate::operator::UNITARY_TOL {
        // Re-unitarize through the polar factor.
        let svd = u.svd(true, true);
        let fixed = svd.u.unwrap() * svd.v_t.unwrap();
        return UnitaryOperator::new(fixed);
    }
    UnitaryOperator::new(u)
}

/// `U(t, 0) = 𝒯 exp(−i ∫₀ᵗ H(s) ds)`.
///
/// Piecewise-constant and diagonal drives are propagated exactly; smooth
/// drives are stepped with `ceil(t/τ · steps_per_period)` steps.
pub fn propagate(h: &PeriodicHamiltonian, t: f64, opts: &PropagationOptions) -> Result<UnitaryOperator> {
    opts.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param("t", format!("must be finite and non-negative, got {t}")));
    }
    let tau = h.period;
    let periods = (t / tau).floor();
    let rest = t - periods * tau;
    let u = match &h.drive {
        Drive::PiecewiseConstant(segments) => {
            let full = piecewise_within_period(segments, tau);
            piecewise_within_period(segments, rest) * matrix_power(&full, periods as u64)
        }
        Drive::DiagonalModulated(d) => {
            let per_period = d.phases(tau);
            let partial = d.phases(rest);
            let phases: Vec<f64> = partial
                .iter()
                .zip(&per_period)
                .map(|(p, full)| p + periods * full)
                .collect();
            diagonal_unitary(&phases)
        }
        Drive::Smooth(f) => {
            let steps = ((t / tau) * opts.steps_per_period as f64).ceil().max(1.0) as usize;
            integrate_smooth(
                f.as_ref(),
                0.0,
                t,
                steps,
                opts.integrator,
                CMatrix::identity(h.dim, h.dim),
            )
        }
    };
    finish(u)
}

/// Propagators at `t_k = k τ / n` for `k = 0..=n`.
pub fn propagate_grid(
    h: &PeriodicHamiltonian,
    n: usize,
    opts: &PropagationOptions,
    exec: Execution,
) -> Result<Vec<UnitaryOperator>> {
    opts.validate()?;
    if n == 0 {
        return Err(Error::param("grid_n", "must be positive"));
    }
    let tau = h.period;
    match &h.drive {
        Drive::Smooth(f) => {
            let sub = opts.steps_per_period.div_ceil(n).max(1);
            let mut out = Vec::with_capacity(n + 1);
            let mut u = CMatrix::identity(h.dim, h.dim);
            out.push(UnitaryOperator::identity(h.dim));
            for k in 0..n {
                let (a, b) = (tau * k as f64 / n as f64, tau * (k + 1) as f64 / n as f64);
                u = integrate_smooth(f.as_ref(), a, b, sub, opts.integrator, u);
                out.push(finish(u.clone())?);
            }
            Ok(out)
        }
        _ => map_range(exec, n + 1, |k| propagate(h, tau * k as f64 / n as f64, opts))
            .into_iter()
            .collect(),
    }
}

/// Conjugation `U A U†` of an operator.
pub fn heisenberg_frame(op: &CMatrix, u: &UnitaryOperator) -> Result<CMatrix> {
    crate::operator::check_same_dim(u.dim(), op.nrows())?;
    Ok(u.matrix() * op * u.matrix().adjoint())
}

/// `𝒰 ℒ 𝒰†` with `𝒰 = U · U†`, the frame change of a superoperator.
pub fn heisenberg_frame_superop(l: &Superoperator, u: &UnitaryOperator) -> Result<Superoperator> {
    crate::operator::check_same_dim(u.dim(), l.dim())?;
    let m = u.matrix();
    let forward = superop_sandwich(m, &m.adjoint())?;
    let backward = superop_sandwich(&m.adjoint(), m)?;
    Ok(forward.compose(l).compose(&backward))
}
