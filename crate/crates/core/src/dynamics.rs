//! Time evolution under a time-independent (interaction-picture) generator,
//! stationary states and periodic limit cycles.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::floquet::{propagate, propagate_grid, PeriodicHamiltonian, PropagationOptions};
use crate::generator::GeneratorBundle;
use crate::operator::{
    c, eigh, hermiticity_defect, hermitize, trace, unvectorize, vectorize, DensityMatrix, Superoperator,
};
use crate::parallel::Execution;
use crate::{CMatrix, Error, Result};

pub const STATE_TRACE_TOL: f64 = 1e-10;
pub const STATE_HERMITIAN_TOL: f64 = 1e-10;
pub const STATE_POSITIVITY_TOL: f64 = 1e-8;
/// Second-smallest singular value must exceed this times the largest.
pub const NULL_SPACE_GAP: f64 = 1e-8;
pub const STEADY_RESIDUAL_TOL: f64 = 1e-9;
pub const CLIP_TOL: f64 = 1e-10;
pub const PERIODICITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Schroedinger,
    Interaction,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub frame: Frame,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &DensityMatrix)> {
        Some((*self.times.last()?, self.states.last()?))
    }

    /// Rotates an interaction-picture trajectory by `U(t, 0)`.
    pub fn to_schroedinger(&self, h: &PeriodicHamiltonian, opts: &PropagationOptions) -> Result<Trajectory> {
        if self.frame == Frame::Schroedinger {
            return Ok(self.clone());
        }
        let mut states = Vec::with_capacity(self.len());
        for (&t, rho) in self.times.iter().zip(&self.states) {
            let u = propagate(h, t, opts)?;
            let m = u.matrix();
            states.push(checked_state(m * rho.matrix() * m.adjoint(), t)?);
        }
        Ok(Trajectory {
            times: self.times.clone(),
            states,
            frame: Frame::Schroedinger,
        })
    }
}

fn checked_state(m: CMatrix, t: f64) -> Result<DensityMatrix> {
    let herm = hermiticity_defect(&m);
    let tr = trace(&m);
    if herm > STATE_HERMITIAN_TOL || (tr - c(1.0)).norm() > STATE_TRACE_TOL {
        return Err(Error::NumericalFailure(format!(
            "state at t = {t} drifted: hermiticity {herm:.3e}, trace {:.15}",
            tr.re
        )));
    }
    let m = hermitize(&m);
    let min = eigh(&m).0[0];
    if min < -STATE_POSITIVITY_TOL {
        return Err(Error::NumericalFailure(format!(
            "state at t = {t} lost positivity: minimum eigenvalue {min:.3e}"
        )));
    }
    Ok(DensityMatrix::from_checked(m))
}

/// Sample times `0, dt, 2dt, …` closed by `t_end`.
pub fn time_grid(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::param("t_end", format!("must be non-negative, got {t_end}")));
    }
    let n = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let mut times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    times.push(t_end);
    Ok(times)
}

/// `ρ(t) = 𝒰(t,0) e^{ℒt} ρ₀`.
///
/// The semigroup is applied step by step with `exp(ℒ dt)`; `frame` supplies
/// the drive whose propagator rotates the result back to the Schrödinger
/// picture.
pub fn evolve(
    bundle: &GeneratorBundle,
    frame: Option<(&PeriodicHamiltonian, &PropagationOptions)>,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    crate::operator::check_same_dim(bundle.dim(), rho0.dim())?;
    let times = time_grid(t_end, dt)?;
    let step = bundle.total.exp(dt);
    let mut states = Vec::with_capacity(times.len());
    let mut v = vectorize(rho0.matrix());
    states.push(rho0.clone());
    for w in times.windows(2) {
        let h = w[1] - w[0];
        v = if (h - dt).abs() <= 1e-12 * dt {
            step.apply_vec(&v)
        } else {
            bundle.total.exp(h).apply_vec(&v)
        };
        states.push(checked_state(unvectorize(&v, bundle.dim()), w[1])?);
    }
    let traj = Trajectory {
        times,
        states,
        frame: Frame::Interaction,
    };
    match frame {
        None => Ok(traj),
        Some((h, opts)) => traj.to_schroedinger(h, opts),
    }
}

/// Singular values of the vectorized generator, ascending, with the
/// matching right singular vectors.
fn ascending_svd(l: &Superoperator) -> Result<(Vec<f64>, Vec<DVector<crate::Complex64>>)> {
    let svd = l.matrix().clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::NumericalFailure("SVD did not return right singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let values = order.iter().map(|&k| svd.singular_values[k]).collect();
    let vectors = order.iter().map(|&k| v_t.row(k).adjoint().into_owned()).collect();
    Ok((values, vectors))
}

/// The unique stationary state `ℒρ̃ = 0`.
pub fn steady_state(bundle: &GeneratorBundle) -> Result<DensityMatrix> {
    steady_state_of(&bundle.total)
}

pub fn steady_state_of(l: &Superoperator) -> Result<DensityMatrix> {
    let n = l.dim();
    let (values, vectors) = ascending_svd(l)?;
    let largest = *values.last().unwrap_or(&0.0);
    let threshold = NULL_SPACE_GAP * largest;
    let null_dim = values.iter().filter(|&&s| s <= threshold).count().max(1);
    if largest == 0.0 || (values.len() > 1 && values[1] <= threshold) {
        return Err(Error::NonUniqueSteadyState {
            dimension: if largest == 0.0 { values.len() } else { null_dim },
        });
    }
    let m = unvectorize(&vectors[0], n);
    let tr = trace(&m);
    if tr.norm() < 1e-12 {
        return Err(Error::NumericalFailure("null vector is traceless".into()));
    }
    let m = hermitize(&(m / tr));

    let (eigvals, eigvecs) = eigh(&m);
    let min = eigvals[0];
    if min < -CLIP_TOL {
        return Err(Error::invariant(
            "steady_state",
            format!("null vector has eigenvalue {min:.3e} below the clipping window"),
        ));
    }
    let m = if min < 0.0 {
        let clipped = DVector::from_iterator(n, eigvals.iter().map(|&p| c(p.max(0.0))));
        let r = &eigvecs * CMatrix::from_diagonal(&clipped) * eigvecs.adjoint();
        let tr = trace(&r);
        hermitize(&(r / tr))
    } else {
        m
    };

    let residual = l.apply(&m).norm();
    let tolerance = STEADY_RESIDUAL_TOL * largest.max(1.0);
    if residual > tolerance {
        return Err(Error::NotStationary { residual, tolerance });
    }
    DensityMatrix::new(m)
}

/// `ρ̃(t_k) = U(t_k,0) ρ̃ U(t_k,0)†` on `t_k = kτ/grid_n`, `k = 0..=grid_n`.
pub fn limit_cycle(
    bundle: &GeneratorBundle,
    rho: &DensityMatrix,
    h: &PeriodicHamiltonian,
    opts: &PropagationOptions,
    grid_n: usize,
    exec: Execution,
) -> Result<Trajectory> {
    let residual = bundle.total.apply(rho.matrix()).norm();
    let tolerance = STEADY_RESIDUAL_TOL * bundle.total.norm().max(1.0);
    if residual > tolerance {
        return Err(Error::NotStationary { residual, tolerance });
    }
    let tau = h.period();
    let unitaries = propagate_grid(h, grid_n, opts, exec)?;
    let mut states = Vec::with_capacity(unitaries.len());
    let mut times = Vec::with_capacity(unitaries.len());
    for (k, u) in unitaries.iter().enumerate() {
        let t = tau * k as f64 / grid_n as f64;
        let m = u.matrix();
        states.push(checked_state(m * rho.matrix() * m.adjoint(), t)?);
        times.push(t);
    }
    let gap = (states[grid_n].matrix() - states[0].matrix()).norm();
    if gap > PERIODICITY_TOL {
        return Err(Error::invariant("limit_cycle", format!("‖ρ̃(τ) − ρ̃(0)‖ = {gap:.3e}")));
    }
    Ok(Trajectory {
        times,
        states,
        frame: Frame::Schroedinger,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::make_flat_bath;
    use crate::generator::{build_static, GeneratorBundle, Mode};
    use crate::operator::{pauli, HermitianOperator};

    fn qubit_bundle(w0: f64, t: f64, g: f64) -> (HermitianOperator, GeneratorBundle) {
        let h = HermitianOperator::hermitized(pauli::sigma_z() * c(0.5 * w0));
        let bath = make_flat_bath("b", t, g).unwrap();
        let b = build_static(&h, &[(HermitianOperator::hermitized(pauli::sigma_x()), bath)]).unwrap();
        (h, b)
    }

    #[test]
    fn grid_closes_on_t_end() {
        let g = time_grid(1.0, 0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(time_grid(0.9, 0.3).unwrap().len(), 4);
        assert!(time_grid(1.0, 0.0).is_err());
    }

    #[test]
    fn qubit_relaxation_closed_form() {
        let (w0, t, g) = (1.0, 1.0, 0.3);
        let (_, b) = qubit_bundle(w0, t, g);
        let traj = evolve(&b, None, &DensityMatrix::basis(2, 0), 5.0, 0.5).unwrap();
        let rate = g * (1.0 + (-w0 / t).exp());
        let p_inf = (-1.0f64).exp() / (1.0 + (-1.0f64).exp());
        for (&time, rho) in traj.times.iter().zip(&traj.states) {
            let expected = p_inf + (1.0 - p_inf) * (-rate * time).exp();
            assert!((rho.populations()[0] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn steady_state_is_gibbs() {
        let (h, b) = qubit_bundle(1.3, 0.7, 0.2);
        let rho = steady_state(&b).unwrap();
        let gibbs = DensityMatrix::gibbs(&h, 0.7);
        assert!((rho.matrix() - gibbs.matrix()).norm() < 1e-9);
    }

    #[test]
    fn decoupled_blocks_are_degenerate() {
        let (h, b) = qubit_bundle(1.0, 1.0, 0.2);
        // two qubits with different gaps and no transitions between them
        let big_h = HermitianOperator::from_real_diagonal(&[0.5, -0.5, 3.0, 1.0]);
        let mut s = CMatrix::zeros(4, 4);
        s[(0, 1)] = c(1.0);
        s[(1, 0)] = c(1.0);
        s[(2, 3)] = c(1.0);
        s[(3, 2)] = c(1.0);
        let bath = make_flat_bath("b", 1.0, 0.2).unwrap();
        let big = build_static(&big_h, &[(HermitianOperator::hermitized(s), bath)]).unwrap();
        match steady_state(&big) {
            Err(Error::NonUniqueSteadyState { dimension }) => assert_eq!(dimension, 2),
            other => panic!("expected degeneracy, got {other:?}"),
        }
        let zero = GeneratorBundle::from_channels(vec![], h, Mode::Static, vec![]);
        assert!(matches!(steady_state(&zero), Err(Error::NonUniqueSteadyState { .. })));
        drop(b);
    }

    #[test]
    fn zero_generator_gives_pure_rotation() {
        let h = HermitianOperator::hermitized(pauli::sigma_x() * c(0.8));
        let ph = PeriodicHamiltonian::constant(h.clone(), 1.0).unwrap();
        let b = GeneratorBundle::from_channels(vec![], h, Mode::Static, vec![]);
        let psi = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.5), c(0.5), c(0.5)]);
        let rho0 = DensityMatrix::new(psi).unwrap();
        let traj = evolve(&b, Some((&ph, &PropagationOptions::default())), &rho0, 3.0, 0.25).unwrap();
        assert_eq!(traj.frame, Frame::Schroedinger);
        for rho in &traj.states {
            assert!((rho.purity() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_limit_cycle_is_constant() {
        let (h, b) = qubit_bundle(1.0, 0.5, 0.1);
        let rho = steady_state(&b).unwrap();
        let ph = PeriodicHamiltonian::constant(h, 2.0).unwrap();
        let lc = limit_cycle(&b, &rho, &ph, &PropagationOptions::default(), 16, Execution::Sequential).unwrap();
        assert_eq!(lc.len(), 17);
        for s in &lc.states {
            assert!((s.matrix() - rho.matrix()).norm() < 1e-12);
        }
        let not_stationary = DensityMatrix::basis(2, 0);
        assert!(matches!(
            limit_cycle(
                &b,
                &not_stationary,
                &ph,
                &PropagationOptions::default(),
                16,
                Execution::Sequential
            ),
            Err(Error::NotStationary { .. })
        ));
    }
}
