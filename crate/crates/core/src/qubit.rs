//! Two-level system with a diagonally modulated gap, coupled through `σ¹`.
//!
//! `H(t) = ½ω(t)σ³` with mean `ω₀`. Writing the accumulated phase
//! `φ(t) = ∫₀ᵗ (ω(s) − ω₀) ds` (periodic with `τ`), the weights
//!
//! `ξ(q) = (1/τ) ∫₀^τ e^{iφ(t)} e^{iqΩt} dt`,  `P(q) = |ξ(q)|²`
//!
//! split the coupling into harmonics. With this sign, harmonic `q` exchanges
//! the quantum `ω₀ − qΩ` with a bath, so channel `(a, q)` behaves like the
//! undriven qubit in contact with a bath at `T_a(q) = ω₀ T_a / (ω₀ − qΩ)`.
//! In the generic [`GeneratorBundle`] ledger the same channel carries
//! harmonic index `−q`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::BathSpec;
use crate::floquet::{DiagonalDrive, PeriodicHamiltonian};
use crate::generator::{ChannelGenerator, GeneratorBundle, Mode};
use crate::operator::{c, pauli, DensityMatrix, HermitianOperator};
use crate::parallel::{map_range, map_slice, Execution};
use crate::quadrature::integrate;
use crate::{Error, Result};

/// Absolute accuracy demanded from the `ξ(q)` quadrature.
pub const XI_TOL: f64 = 1e-12;
/// Harmonics with `P(q)` at or below this are left out of the bundle.
pub const WEIGHT_FLOOR: f64 = 1e-20;
pub const MEAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    Constant,
    /// `ω(t) = ω₀ + A sin(Ωt + phase)`.
    Sinusoidal {
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `ω(t) = ω₀ + π δ(t − τ/4) − π δ(t − 3τ/4)` on each period.
    PulseTrain,
    /// Linear interpolation of `(t, ω)` samples spanning `[0, τ]`.
    Tabulated {
        times: Vec<f64>,
        omega: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulationProfile {
    omega0: f64,
    period: f64,
    shape: Shape,
    // ∫₀^{t_i} ω for tabulated shapes
    cumulative: Vec<f64>,
}

impl ModulationProfile {
    pub fn new(omega0: f64, period: f64, shape: Shape) -> Result<Self> {
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::param("period", format!("must be positive, got {period}")));
        }
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::param("omega0", format!("must be positive, got {omega0}")));
        }
        let mut cumulative = Vec::new();
        match &shape {
            Shape::Constant | Shape::PulseTrain => {}
            Shape::Sinusoidal { amplitude, phase } => {
                if !(amplitude.is_finite() && phase.is_finite()) {
                    return Err(Error::param("sinusoidal", "amplitude and phase must be finite"));
                }
                if amplitude.abs() >= omega0 {
                    return Err(Error::param(
                        "amplitude",
                        format!(
                            "|A| = {} must stay below ω₀ = {omega0} to keep ω(t) > 0",
                            amplitude.abs()
                        ),
                    ));
                }
            }
            Shape::Tabulated { times, omega } => {
                if times.len() != omega.len() || times.len() < 2 {
                    return Err(Error::param("tabulated", "needs at least two (t, ω) samples"));
                }
                if times[0].abs() > 1e-12 || (times[times.len() - 1] - period).abs() > 1e-12 * period {
                    return Err(Error::param("tabulated.times", "samples must span [0, τ]"));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::param("tabulated.times", "must be strictly increasing"));
                }
                if omega.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::param("tabulated.omega", "ω(t) must be positive"));
                }
                cumulative.push(0.0);
                for k in 1..times.len() {
                    let area = 0.5 * (omega[k] + omega[k - 1]) * (times[k] - times[k - 1]);
                    cumulative.push(cumulative[k - 1] + area);
                }
            }
        }
        let profile = Self {
            omega0,
            period,
            shape,
            cumulative,
        };
        let mean = profile.quadrature_mean()?;
        if (mean - omega0).abs() > MEAN_TOL * omega0.max(1.0) {
            return Err(Error::param(
                "omega0",
                format!("time average of ω(t) is {mean:.12}, not ω₀ = {omega0}"),
            ));
        }
        Ok(profile)
    }

    /// Tabulated profile whose `ω₀` is the exact mean of the samples.
    pub fn tabulated(times: Vec<f64>, omega: Vec<f64>) -> Result<Self> {
        let (Some(&period), true) = (times.last(), times.len() == omega.len() && times.len() >= 2) else {
            return Err(Error::param("tabulated", "needs at least two (t, ω) samples"));
        };
        let area: f64 = (1..times.len())
            .map(|k| 0.5 * (omega[k] + omega[k - 1]) * (times[k] - times[k - 1]))
            .sum();
        Self::new(area / period, period, Shape::Tabulated { times, omega })
    }

    pub fn constant(omega0: f64, period: f64) -> Result<Self> {
        Self::new(omega0, period, Shape::Constant)
    }

    pub fn sinusoidal(omega0: f64, period: f64, amplitude: f64, phase: f64) -> Result<Self> {
        Self::new(omega0, period, Shape::Sinusoidal { amplitude, phase })
    }

    pub fn pulse_train(omega0: f64, period: f64) -> Result<Self> {
        Self::new(omega0, period, Shape::PulseTrain)
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn drive_frequency(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Truncation used when none is given.
    pub fn default_q_max(&self) -> usize {
        match self.shape {
            Shape::PulseTrain => 31,
            _ => 8,
        }
    }

    /// Regular part of `ω(t)`; the pulse-train kicks are carried by
    /// [`phase`](Self::phase) only.
    pub fn omega(&self, t: f64) -> f64 {
        let s = t.rem_euclid(self.period);
        match &self.shape {
            Shape::Constant | Shape::PulseTrain => self.omega0,
            Shape::Sinusoidal { amplitude, phase } => {
                self.omega0 + amplitude * (self.drive_frequency() * s + phase).sin()
            }
            Shape::Tabulated { times, omega } => {
                let i = times.partition_point(|&x| x <= s).clamp(1, times.len() - 1);
                omega[i - 1] + (omega[i] - omega[i - 1]) * (s - times[i - 1]) / (times[i] - times[i - 1])
            }
        }
    }

    /// `φ(t) = ∫₀ᵗ (ω(s) − ω₀) ds`, periodic in `t`.
    pub fn phase(&self, t: f64) -> f64 {
        let s = t.rem_euclid(self.period);
        match &self.shape {
            Shape::Constant => 0.0,
            Shape::Sinusoidal { amplitude, phase } => {
                let big = self.drive_frequency();
                amplitude / big * (phase.cos() - (big * s + phase).cos())
            }
            Shape::PulseTrain => {
                if (0.25 * self.period..0.75 * self.period).contains(&s) {
                    PI
                } else {
                    0.0
                }
            }
            Shape::Tabulated { times, omega } => {
                let i = times.partition_point(|&x| x <= s).clamp(1, times.len() - 1);
                let h = s - times[i - 1];
                let slope = (omega[i] - omega[i - 1]) / (times[i] - times[i - 1]);
                self.cumulative[i - 1] + omega[i - 1] * h + 0.5 * slope * h * h - self.omega0 * s
            }
        }
    }

    /// Points where `ω(t)` or `φ(t)` is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::PulseTrain => vec![0.25 * self.period, 0.75 * self.period],
            Shape::Tabulated { times, .. } => times.clone(),
            _ => Vec::new(),
        }
    }

    fn quadrature_mean(&self) -> Result<f64> {
        let r = integrate(
            |t| c(self.omega(t)),
            0.0,
            self.period,
            &self.breakpoints(),
            1e-13 * self.omega0.max(1.0) * self.period,
        )?;
        Ok(r.value.re / self.period)
    }
}

/// `ξ(q)` by adaptive quadrature.
pub fn xi(profile: &ModulationProfile, q: i64) -> Result<Complex64> {
    if matches!(profile.shape, Shape::Constant) {
        return Ok(if q == 0 { c(1.0) } else { c(0.0) });
    }
    let tau = profile.period;
    let big = profile.drive_frequency();
    let r = integrate(
        |t| Complex64::from_polar(1.0 / tau, profile.phase(t) + q as f64 * big * t),
        0.0,
        tau,
        &profile.breakpoints(),
        XI_TOL,
    )
    .map_err(|e| match e {
        Error::Quadrature { estimate, .. } if estimate > 1e-10 => Error::Quadrature {
            estimate,
            tolerance: 1e-10,
        },
        other => other,
    })?;
    Ok(r.value)
}

pub fn pq(profile: &ModulationProfile, q: i64) -> Result<f64> {
    Ok(xi(profile, q)?.norm_sqr())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PqEntry {
    pub q: i64,
    pub xi_re: f64,
    pub xi_im: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PqTable {
    pub q_max: usize,
    /// Ordered `q = −Q, …, Q`.
    pub entries: Vec<PqEntry>,
    pub captured_mass: f64,
    /// `1 − Σ P(q)`, the weight outside the truncation.
    pub tail_bound: f64,
}

impl PqTable {
    pub fn p(&self, q: i64) -> f64 {
        let idx = q + self.q_max as i64;
        if idx < 0 || idx as usize >= self.entries.len() {
            0.0
        } else {
            self.entries[idx as usize].p
        }
    }

    /// `Σ_{|q|≤Q} P(q) ≥ 1 − tol`.
    pub fn is_complete(&self, tol: f64) -> bool {
        self.captured_mass >= 1.0 - tol
    }
}

pub fn pq_table(profile: &ModulationProfile, q_max: usize, exec: Execution) -> Result<PqTable> {
    let n = 2 * q_max + 1;
    let entries = map_range(exec, n, |k| {
        let q = k as i64 - q_max as i64;
        xi(profile, q).map(|z| PqEntry {
            q,
            xi_re: z.re,
            xi_im: z.im,
            p: z.norm_sqr(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let captured_mass: f64 = entries.iter().map(|e| e.p).sum();
    Ok(PqTable {
        q_max,
        entries,
        captured_mass,
        tail_bound: (1.0 - captured_mass).max(0.0),
    })
}

/// Smallest `Q` with `Σ_{|q|≤Q} P(q) ≥ 1 − tol`, searched up to `limit`.
pub fn required_q(profile: &ModulationProfile, tol: f64, limit: usize) -> Result<Option<usize>> {
    let mut mass = pq(profile, 0)?;
    for q in 0..=limit {
        if q > 0 {
            mass += pq(profile, q as i64)? + pq(profile, -(q as i64))?;
        }
        if mass >= 1.0 - tol {
            return Ok(Some(q));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Temperature {
    Finite(f64),
    Infinite,
}

impl Temperature {
    pub fn value(self) -> f64 {
        match self {
            Temperature::Finite(t) => t,
            Temperature::Infinite => f64::INFINITY,
        }
    }
}

/// `T_a(q) = ω₀ T_a / (ω₀ − qΩ)`.
pub fn effective_temperature(temperature: f64, omega0: f64, drive_frequency: f64, q: i64) -> Temperature {
    let x = omega0 - q as f64 * drive_frequency;
    if x.abs() <= 1e-12 * omega0.abs().max(drive_frequency.abs()) {
        Temperature::Infinite
    } else {
        Temperature::Finite(omega0 / x * temperature)
    }
}

/// Averaged decay and excitation rates for one bath.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedRates {
    pub bath: String,
    pub temperature: f64,
    /// `R̄_e = Σ_q P(q) G(ω₀ − qΩ)`.
    pub decay: f64,
    /// `R̄_g = Σ_q P(q) G(−(ω₀ − qΩ))`.
    pub excitation: f64,
    /// Bound on what the truncated harmonics could add to either rate.
    pub tail_bound: f64,
}

#[derive(Debug, Clone)]
pub struct QubitModel {
    pub modulation: ModulationProfile,
    pub baths: Vec<BathSpec>,
    pub q_max: usize,
    pub table: PqTable,
}

impl QubitModel {
    pub fn new(modulation: ModulationProfile, baths: Vec<BathSpec>, q_max: Option<usize>) -> Result<Self> {
        Self::with_execution(modulation, baths, q_max, Execution::default())
    }

    pub fn with_execution(
        modulation: ModulationProfile,
        baths: Vec<BathSpec>,
        q_max: Option<usize>,
        exec: Execution,
    ) -> Result<Self> {
        if baths.is_empty() {
            return Err(Error::param("baths", "at least one bath required"));
        }
        for (i, b) in baths.iter().enumerate() {
            if baths[..i].iter().any(|o| o.label == b.label) {
                return Err(Error::param("baths", format!("duplicate bath label `{}`", b.label)));
            }
        }
        let q_max = q_max.unwrap_or_else(|| modulation.default_q_max());
        let table = pq_table(&modulation, q_max, exec)?;
        if !table.is_complete(1e-6) {
            log::warn!(
                "harmonics |q| ≤ {q_max} capture P-mass {:.9}; the remaining {:.3e} is dropped",
                table.captured_mass,
                table.tail_bound
            );
        }
        Ok(Self {
            modulation,
            baths,
            q_max,
            table,
        })
    }

    pub fn omega0(&self) -> f64 {
        self.modulation.omega0
    }

    pub fn drive_frequency(&self) -> f64 {
        self.modulation.drive_frequency()
    }

    /// `ω₀ − qΩ`, the quantum exchanged by harmonic `q`.
    pub fn quantum(&self, q: i64) -> f64 {
        self.omega0() - q as f64 * self.drive_frequency()
    }

    /// `H₀ = ½ω₀σ³`, which is also the averaged Hamiltonian.
    pub fn reference_hamiltonian(&self) -> HermitianOperator {
        HermitianOperator::hermitized(pauli::sigma_z() * c(0.5 * self.omega0()))
    }

    pub fn coupling(&self) -> HermitianOperator {
        HermitianOperator::hermitized(pauli::sigma_x())
    }

    pub fn periodic_hamiltonian(&self) -> Result<PeriodicHamiltonian> {
        PeriodicHamiltonian::diagonal(2, self.modulation.period, Arc::new(QubitDrive(self.modulation.clone())))
    }

    fn bath_index(&self, label: &str) -> Result<usize> {
        self.baths
            .iter()
            .position(|b| b.label == label)
            .ok_or_else(|| Error::param("bath", format!("no bath labelled `{label}`")))
    }
}

struct QubitDrive(ModulationProfile);

impl DiagonalDrive for QubitDrive {
    fn energies(&self, t: f64) -> Vec<f64> {
        let w = self.0.omega(t);
        vec![0.5 * w, -0.5 * w]
    }

    fn phases(&self, t: f64) -> Vec<f64> {
        // only called on [0, τ]; at t = τ the periodic phase has wrapped to 0
        let theta = self.0.omega0 * t + if t >= self.0.period { 0.0 } else { self.0.phase(t) };
        vec![0.5 * theta, -0.5 * theta]
    }
}

pub fn averaged_rates(model: &QubitModel) -> Result<Vec<AveragedRates>> {
    model
        .baths
        .iter()
        .map(|bath| {
            let mut decay = 0.0;
            let mut excitation = 0.0;
            for e in &model.table.entries {
                let x = model.quantum(e.q);
                decay += e.p * bath.eval_rate(x)?;
                excitation += e.p * bath.eval_rate(-x)?;
            }
            Ok(AveragedRates {
                bath: bath.label.clone(),
                temperature: bath.temperature,
                decay,
                excitation,
                tail_bound: model.table.tail_bound * bath.model.supremum(),
            })
        })
        .collect()
}

/// `T_eff = ω₀ / ln(Σ_a R̄^a_e / Σ_a R̄^a_g)`.
pub fn t_eff(model: &QubitModel) -> Result<Temperature> {
    let rates = averaged_rates(model)?;
    let decay: f64 = rates.iter().map(|r| r.decay).sum();
    let excitation: f64 = rates.iter().map(|r| r.excitation).sum();
    if decay <= 0.0 && excitation <= 0.0 {
        return Err(Error::invariant("t_eff", "all averaged rates vanish"));
    }
    if excitation <= 0.0 {
        return Ok(Temperature::Finite(0.0));
    }
    if decay <= 0.0 {
        return Ok(Temperature::Finite(-0.0));
    }
    let log_ratio = (decay / excitation).ln();
    if log_ratio == 0.0 {
        return Ok(Temperature::Infinite);
    }
    Ok(Temperature::Finite(model.omega0() / log_ratio))
}

/// Stationary populations `(p_e, p_g)` of the averaged rate equation.
pub fn steady_populations(model: &QubitModel) -> Result<(f64, f64)> {
    let rates = averaged_rates(model)?;
    let decay: f64 = rates.iter().map(|r| r.decay).sum();
    let excitation: f64 = rates.iter().map(|r| r.excitation).sum();
    let total = decay + excitation;
    if total <= 0.0 {
        return Err(Error::invariant("steady_populations", "all averaged rates vanish"));
    }
    Ok((excitation / total, decay / total))
}

pub fn analytic_steady_state(model: &QubitModel) -> Result<DensityMatrix> {
    let (pe, pg) = steady_populations(model)?;
    DensityMatrix::new(crate::CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        c(pe),
        c(pg),
    ])))
}

/// `(1 − qΩ/ω₀) Tr[(ℒ^a_q ρ) H₀] = (ω₀ − qΩ) P(q) [G(−(ω₀−qΩ)) p_g − G(ω₀−qΩ) p_e]`.
pub fn single_harmonic_current(model: &QubitModel, rho: &DensityMatrix, bath: &str, q: i64) -> Result<f64> {
    crate::operator::check_same_dim(2, rho.dim())?;
    let a = model.bath_index(bath)?;
    let x = model.quantum(q);
    let p = model.table.p(q);
    let pops = rho.populations();
    let (pe, pg) = (pops[0], pops[1]);
    let b = &model.baths[a];
    Ok(x * p * (b.eval_rate(-x)? * pg - b.eval_rate(x)? * pe))
}

/// Total current from bath `a`, summed over `|q| ≤ Q`.
pub fn bath_current(model: &QubitModel, rho: &DensityMatrix, bath: &str) -> Result<f64> {
    let mut total = 0.0;
    for e in &model.table.entries {
        total += single_harmonic_current(model, rho, bath, e.q)?;
    }
    Ok(total)
}

/// Channels `√P(q) σ⁻` with rates `G^a(±(ω₀ − qΩ))`.
pub fn build_qubit_bundle(model: &QubitModel) -> Result<GeneratorBundle> {
    build_qubit_bundle_with(model, Execution::default())
}

pub fn build_qubit_bundle_with(model: &QubitModel, exec: Execution) -> Result<GeneratorBundle> {
    let h0 = model.reference_hamiltonian();
    let omega0 = model.omega0();
    let big = model.drive_frequency();
    let mut jobs = Vec::new();
    for (a, bath) in model.baths.iter().enumerate() {
        for e in &model.table.entries {
            if e.p > WEIGHT_FLOOR {
                jobs.push((a, bath, e.q, e.p));
            }
        }
    }
    let built = map_slice(exec, &jobs, |(a, bath, q, p)| {
        ChannelGenerator::new(bath, *a, -q, omega0, big, pauli::sigma_minus() * c(p.sqrt()), &h0)
    });
    let channels = built
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(GeneratorBundle::from_channels(
        channels,
        h0,
        Mode::Floquet { drive_frequency: big },
        model.baths.clone(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::make_flat_bath;

    // J_n(z) from its power series; independent of the quadrature.
    fn bessel_j(n: i64, z: f64) -> f64 {
        let m = n.unsigned_abs();
        let mut term = (0.5 * z).powi(m as i32) / (1..=m).map(|k| k as f64).product::<f64>();
        let mut sum = term;
        for k in 1..60 {
            term *= -(0.25 * z * z) / (k as f64 * (k + m) as f64);
            sum += term;
        }
        if n < 0 && m % 2 == 1 {
            -sum
        } else {
            sum
        }
    }

    #[test]
    fn constant_profile_single_harmonic() {
        let p = ModulationProfile::constant(1.0, 2.0).unwrap();
        assert_eq!(pq(&p, 0).unwrap(), 1.0);
        assert_eq!(pq(&p, 3).unwrap(), 0.0);
    }

    #[test]
    fn pulse_train_closed_form() {
        let p = ModulationProfile::pulse_train(1.0, 2.0 * PI / 3.0).unwrap();
        for q in [-9i64, -7, -5, -3, -1, 1, 3, 5, 7, 9] {
            let expected = 4.0 / (PI * PI * (q * q) as f64);
            assert!((pq(&p, q).unwrap() - expected).abs() < 1e-8, "q = {q}");
        }
        for q in [-10i64, -6, -2, 0, 2, 4, 8, 10] {
            assert!(pq(&p, q).unwrap() <= 1e-10, "q = {q}");
        }
    }

    #[test]
    fn sinusoidal_bessel_weights() {
        for (ratio, phase) in [(0.3, 0.0), (1.0, 0.7), (0.8, -2.0)] {
            let big = 2.5;
            let p = ModulationProfile::sinusoidal(4.0, 2.0 * PI / big, ratio * big, phase).unwrap();
            for q in -6i64..=6 {
                let expected = bessel_j(q, ratio).powi(2);
                assert!((pq(&p, q).unwrap() - expected).abs() < 1e-8, "q = {q}");
            }
        }
    }

    #[test]
    fn parseval_for_smooth_modulation() {
        let p = ModulationProfile::sinusoidal(8.0, 1.0, 2.0 * PI * 0.9, 0.0).unwrap();
        let t = pq_table(&p, 8, Execution::Sequential).unwrap();
        assert!(t.captured_mass >= 1.0 - 1e-9);
        assert_eq!(t.entries.len(), 17);
        assert_eq!(t.entries[0].q, -8);
    }

    #[test]
    fn tabulated_phase_and_mean() {
        let tau = 2.0;
        let times: Vec<f64> = (0..=40).map(|k| tau * k as f64 / 40.0).collect();
        let omega: Vec<f64> = times
            .iter()
            .map(|t| 1.5 + 0.4 * (PI * t).sin() + 0.1 * (PI * t).cos())
            .collect();
        let p = ModulationProfile::tabulated(times, omega).unwrap();
        assert!(p.phase(0.0).abs() < 1e-15);
        assert!(p.phase(tau - 1e-12).abs() < 1e-9);
        let t = pq_table(&p, 8, Execution::Sequential).unwrap();
        assert!(t.captured_mass > 1.0 - 1e-9);
    }

    #[test]
    fn rejects_non_positive_gap() {
        assert!(ModulationProfile::sinusoidal(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ModulationProfile::tabulated(vec![0.0, 1.0], vec![1.0, -0.5]).is_err());
        assert!(ModulationProfile::constant(-1.0, 1.0).is_err());
    }

    #[test]
    fn effective_temperatures() {
        assert_eq!(effective_temperature(0.7, 1.0, 0.5, 0), Temperature::Finite(0.7));
        assert_eq!(effective_temperature(0.7, 1.0, 0.5, 1), Temperature::Finite(1.4));
        assert_eq!(effective_temperature(0.7, 1.0, 3.0, 1), Temperature::Finite(-0.35));
        assert_eq!(effective_temperature(0.7, 1.0, 1.0, 1), Temperature::Infinite);
    }

    #[test]
    fn undriven_detailed_balance_and_t_eff() {
        let m = QubitModel::new(
            ModulationProfile::constant(1.2, 1.0).unwrap(),
            vec![make_flat_bath("h", 0.9, 0.1).unwrap()],
            None,
        )
        .unwrap();
        let r = &averaged_rates(&m).unwrap()[0];
        assert!((r.decay - 0.1).abs() < 1e-15);
        assert!((r.excitation / r.decay - (-1.2f64 / 0.9).exp()).abs() < 1e-14);
        assert!((t_eff(&m).unwrap().value() - 0.9).abs() < 1e-10);
    }

    #[test]
    fn two_undriven_baths_t_eff_between() {
        let m = QubitModel::new(
            ModulationProfile::constant(1.0, 1.0).unwrap(),
            vec![
                make_flat_bath("h", 2.0, 0.1).unwrap(),
                make_flat_bath("c", 0.5, 0.3).unwrap(),
            ],
            None,
        )
        .unwrap();
        let t = t_eff(&m).unwrap().value();
        assert!(t > 0.5 && t < 2.0);
    }

    #[test]
    fn bundle_even_pulse_harmonics_absent() {
        let m = QubitModel::new(
            ModulationProfile::pulse_train(1.0, 2.0 * PI / 0.7).unwrap(),
            vec![make_flat_bath("h", 1.0, 0.1).unwrap()],
            None,
        )
        .unwrap();
        let b = build_qubit_bundle(&m).unwrap();
        assert_eq!(b.channels.len(), 32);
        assert!(b.channels.iter().all(|ch| ch.q % 2 != 0));
    }

    #[test]
    fn asymmetric_profile_quantum_sign() {
        // A sawtooth-like tabulated gap is not time-reversal symmetric, so
        // P(q) ≠ P(−q) and the sign of the exchanged quantum matters.
        let tau = 2.0 * PI / 0.8;
        let times: Vec<f64> = (0..=64).map(|k| tau * k as f64 / 64.0).collect();
        let omega: Vec<f64> = times
            .iter()
            .map(|t| 1.0 + 0.3 * (0.8 * t).sin() + 0.2 * (1.6 * t).cos())
            .collect();
        let profile = ModulationProfile::tabulated(times, omega).unwrap();
        assert!((pq(&profile, 1).unwrap() - pq(&profile, -1).unwrap()).abs() > 1e-4);

        // Direct Fourier series of the interaction-picture σ⁻ phase:
        // e^{−i∫ω} = Σ_k c_k e^{−i(ω₀ + kΩ)t}, c_k = (1/τ)∫ e^{−iφ} e^{ikΩt} dt.
        let big = profile.drive_frequency();
        let omega0 = profile.omega0();
        for k in -3i64..=3 {
            let ck = integrate(
                |t| Complex64::from_polar(1.0 / tau, -profile.phase(t) + k as f64 * big * t),
                0.0,
                tau,
                &profile.breakpoints(),
                1e-13,
            )
            .unwrap()
            .value;
            // c_k exchanges ω₀ + kΩ = ω₀ − qΩ with q = −k
            assert!((ck.norm_sqr() - pq(&profile, -k).unwrap()).abs() < 1e-10);
            let m = QubitModel::new(profile.clone(), vec![make_flat_bath("h", 1.0, 1.0).unwrap()], Some(4)).unwrap();
            assert!((m.quantum(-k) - (omega0 + k as f64 * big)).abs() < 1e-12);
        }
    }

    #[test]
    fn qubit_current_vanishes_at_equilibrium() {
        let m = QubitModel::new(
            ModulationProfile::constant(1.0, 1.0).unwrap(),
            vec![make_flat_bath("h", 0.8, 0.2).unwrap()],
            Some(0),
        )
        .unwrap();
        let rho = analytic_steady_state(&m).unwrap();
        let gibbs = DensityMatrix::gibbs(&m.reference_hamiltonian(), 0.8);
        assert!((rho.matrix() - gibbs.matrix()).norm() < 1e-14);
        assert!(single_harmonic_current(&m, &rho, "h", 0).unwrap().abs() < 1e-15);
        assert!(single_harmonic_current(&m, &rho, "x", 0).is_err());
    }
}
