//! Davies generators assembled channel by channel.
//!
//! A channel couples one bath `j` to one harmonic `q` and one (quasi-)Bohr
//! frequency `ω ≥ 0`. It exchanges the quantum `x = ω + qΩ` and reads
//!
//! `ℒ ρ = G_j(x) D[S_{ωq}] ρ + G_j(−x) D[S_{ωq}†] ρ`,  `D[A]ρ = AρA† − ½{A†A, ρ}`,
//!
//! which is the symmetric commutator form `½G(x){([S,ρS†] + [Sρ,S†]) +
//! e^{−x/T}([S†,ρS] + [S†ρ,S])}` once KMS is used for `G(−x)`. Channels are
//! kept individually because heat currents are defined per channel.

use std::collections::HashSet;

use crate::bath::BathSpec;
use crate::floquet::FloquetDecomposition;
use crate::operator::{
    bohr_components, c, dissipator, spectral_decompose, DensityMatrix, HermitianOperator, Superoperator,
    UnitaryOperator,
};
use crate::parallel::{map_slice, Execution};
use crate::{CMatrix, Error, Result};

/// Channels whose up and down rates are both below this are dropped.
pub const RATE_FLOOR: f64 = 1e-14;
/// Frequencies within this of zero are treated as zero.
pub const ZERO_FREQUENCY_TOL: f64 = 1e-9;
pub const GENERATOR_TOL: f64 = 1e-12;
pub const LOCAL_GIBBS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Static,
    Floquet { drive_frequency: f64 },
}

/// One LGKS dissipator `ℒ^j_{qω}`.
#[derive(Debug, Clone)]
pub struct ChannelGenerator {
    pub bath: String,
    pub bath_index: usize,
    pub temperature: f64,
    /// Generic harmonic index: the channel exchanges `ω + qΩ`.
    pub q: i64,
    pub omega: f64,
    pub drive_frequency: f64,
    pub jump: CMatrix,
    pub rate_down: f64,
    pub rate_up: f64,
    pub superop: Superoperator,
    /// `∝ exp{−[(ω+qΩ)/ω] H̄/T}`; present iff `ω > 0`.
    pub local_gibbs: Option<DensityMatrix>,
    pub log_local_gibbs: Option<CMatrix>,
}

impl ChannelGenerator {
    /// Builds and validates a channel; `Ok(None)` when both rates fall under
    /// [`RATE_FLOOR`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        bath: &BathSpec,
        bath_index: usize,
        q: i64,
        omega: f64,
        drive_frequency: f64,
        jump: CMatrix,
        averaged_hamiltonian: &HermitianOperator,
    ) -> Result<Option<Self>> {
        let quantum = omega + q as f64 * drive_frequency;
        let zero = omega.abs() <= ZERO_FREQUENCY_TOL;
        if zero && q != 0 {
            return Err(Error::UnsupportedChannel {
                bath: bath.label.clone(),
                q,
            });
        }
        if omega < -ZERO_FREQUENCY_TOL {
            return Err(Error::param("omega", format!("channels need ω ≥ 0, got {omega}")));
        }
        let rate_down = bath.eval_rate(quantum)?;
        let rate_up = bath.eval_rate(-quantum)?;
        if rate_down < RATE_FLOOR && rate_up < RATE_FLOOR {
            return Ok(None);
        }
        // Hermitian dephasing component: a single D[S₀] term.
        let superop = if zero {
            dissipator(&jump, rate_down)
        } else {
            &dissipator(&jump, rate_down) + &dissipator(&jump.adjoint(), rate_up)
        };

        let scale = 1.0f64.max(rate_down.max(rate_up) * jump.norm_squared());
        let defect = superop.trace_annihilation_defect();
        if defect > GENERATOR_TOL * scale {
            return Err(Error::invariant(
                "ChannelGenerator",
                format!("not trace-annihilating: {defect:.3e}"),
            ));
        }

        let (local_gibbs, log_local_gibbs) = if zero {
            (None, None)
        } else {
            let beta = quantum / omega / bath.temperature;
            let (state, log) = gibbs_with_log(averaged_hamiltonian, beta);
            let residual = superop.apply(state.matrix()).norm();
            if residual > LOCAL_GIBBS_TOL * scale {
                return Err(Error::invariant(
                    "ChannelGenerator",
                    format!("local Gibbs state not stationary: residual {residual:.3e}"),
                ));
            }
            (Some(state), Some(log))
        };

        Ok(Some(Self {
            bath: bath.label.clone(),
            bath_index,
            temperature: bath.temperature,
            q,
            omega,
            drive_frequency,
            jump,
            rate_down,
            rate_up,
            superop,
            local_gibbs,
            log_local_gibbs,
        }))
    }

    /// Energy quantum `ω + qΩ` exchanged with the bath.
    pub fn quantum(&self) -> f64 {
        self.omega + self.q as f64 * self.drive_frequency
    }

    pub fn is_dephasing(&self) -> bool {
        self.omega.abs() <= ZERO_FREQUENCY_TOL
    }
}

/// `Z⁻¹ e^{−βH}` and its logarithm `−βH − ln Z`, evaluated with a shifted
/// exponent.
pub fn gibbs_with_log(h: &HermitianOperator, beta: f64) -> (DensityMatrix, CMatrix) {
    let (values, vectors) = crate::operator::eigh(h.matrix());
    let exps: Vec<f64> = values.iter().map(|&e| -beta * e).collect();
    let top = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_z = top + exps.iter().map(|&x| (x - top).exp()).sum::<f64>().ln();
    let diag = |f: &dyn Fn(f64) -> f64| {
        let d = nalgebra::DVector::from_iterator(exps.len(), exps.iter().map(|&x| c(f(x))));
        &vectors * CMatrix::from_diagonal(&d) * vectors.adjoint()
    };
    let state = crate::operator::hermitize(&diag(&|x| (x - log_z).exp()));
    let log = crate::operator::hermitize(&diag(&|x| x - log_z));
    (
        DensityMatrix::normalized(state).expect("Gibbs state is a valid density matrix"),
        log,
    )
}

/// The full generator `ℒ = Σ_j Σ_q Σ_{ω≥0} ℒ^j_{qω}`.
#[derive(Debug, Clone)]
pub struct GeneratorBundle {
    /// Ordered by bath, then `q`, then `ω`.
    pub channels: Vec<ChannelGenerator>,
    pub total: Superoperator,
    pub averaged_hamiltonian: HermitianOperator,
    pub mode: Mode,
    pub baths: Vec<BathSpec>,
}

impl GeneratorBundle {
    pub fn from_channels(
        mut channels: Vec<ChannelGenerator>,
        averaged_hamiltonian: HermitianOperator,
        mode: Mode,
        baths: Vec<BathSpec>,
    ) -> Self {
        channels.sort_by(|a, b| {
            a.bath_index
                .cmp(&b.bath_index)
                .then(a.q.cmp(&b.q))
                .then(a.omega.total_cmp(&b.omega))
        });
        let dim = averaged_hamiltonian.dim();
        let total = Superoperator::sum(dim, channels.iter().map(|ch| &ch.superop));
        Self {
            channels,
            total,
            averaged_hamiltonian,
            mode,
            baths,
        }
    }

    pub fn dim(&self) -> usize {
        self.averaged_hamiltonian.dim()
    }

    pub fn drive_frequency(&self) -> f64 {
        match self.mode {
            Mode::Static => 0.0,
            Mode::Floquet { drive_frequency } => drive_frequency,
        }
    }

    pub fn channels_of(&self, bath_index: usize) -> impl Iterator<Item = &ChannelGenerator> {
        self.channels.iter().filter(move |ch| ch.bath_index == bath_index)
    }
}

fn check_labels(baths: &[&BathSpec]) -> Result<()> {
    let mut seen = HashSet::new();
    for b in baths {
        if !seen.insert(b.label.as_str()) {
            return Err(Error::param("baths", format!("duplicate bath label `{}`", b.label)));
        }
    }
    Ok(())
}

/// Static Davies generator for `H` and one Hermitian coupling per bath.
pub fn build_static(h: &HermitianOperator, couplings: &[(HermitianOperator, BathSpec)]) -> Result<GeneratorBundle> {
    build_static_with(h, couplings, 1e-9, Execution::default())
}

pub fn build_static_with(
    h: &HermitianOperator,
    couplings: &[(HermitianOperator, BathSpec)],
    degeneracy_tol: f64,
    exec: Execution,
) -> Result<GeneratorBundle> {
    check_labels(&couplings.iter().map(|(_, b)| b).collect::<Vec<_>>())?;
    let dec = spectral_decompose(h, degeneracy_tol)?;
    let mut jobs = Vec::new();
    for (j, (s, bath)) in couplings.iter().enumerate() {
        crate::operator::check_same_dim(h.dim(), s.dim())?;
        for comp in bohr_components(s, &dec)?.components {
            if comp.omega >= -ZERO_FREQUENCY_TOL {
                jobs.push((j, bath, comp.omega.max(0.0), comp.op));
            }
        }
    }
    let built = map_slice(exec, &jobs, |(j, bath, omega, op)| {
        ChannelGenerator::new(bath, *j, 0, *omega, 0.0, op.clone(), h)
    });
    let channels = built
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(GeneratorBundle::from_channels(
        channels,
        h.clone(),
        Mode::Static,
        couplings.iter().map(|(_, b)| b.clone()).collect(),
    ))
}

/// Floquet generator from per-coupling harmonic decompositions sharing one drive.
pub fn build_floquet(decompositions: &[(FloquetDecomposition, BathSpec)]) -> Result<GeneratorBundle> {
    build_floquet_with(decompositions, Execution::default())
}

pub fn build_floquet_with(
    decompositions: &[(FloquetDecomposition, BathSpec)],
    exec: Execution,
) -> Result<GeneratorBundle> {
    let Some((first, _)) = decompositions.first() else {
        return Err(Error::param("couplings", "at least one coupling required"));
    };
    check_labels(&decompositions.iter().map(|(_, b)| b).collect::<Vec<_>>())?;
    let drive = first.drive_frequency;
    let h_bar = first.averaged_hamiltonian.clone();
    for (fd, _) in decompositions {
        if (fd.drive_frequency - drive).abs() > 1e-12 * drive
            || (fd.averaged_hamiltonian.matrix() - h_bar.matrix()).norm() > 1e-10
        {
            return Err(Error::param(
                "decompositions",
                "all couplings must be decomposed against the same drive",
            ));
        }
    }
    let mut jobs = Vec::new();
    for (j, (fd, bath)) in decompositions.iter().enumerate() {
        for hm in &fd.harmonics {
            if hm.omega >= -ZERO_FREQUENCY_TOL {
                jobs.push((j, bath, hm.q, hm.omega.max(0.0), &hm.op));
            }
        }
    }
    let built = map_slice(exec, &jobs, |(j, bath, q, omega, op)| {
        ChannelGenerator::new(bath, *j, *q, *omega, drive, (*op).clone(), &h_bar)
    });
    let channels = built
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(GeneratorBundle::from_channels(
        channels,
        h_bar,
        Mode::Floquet { drive_frequency: drive },
        decompositions.iter().map(|(_, b)| b.clone()).collect(),
    ))
}

/// `dρ/dt = −i[H(t), ρ] + ℒ(t)ρ` with `ℒ(t) = 𝒰(t,0) ℒ 𝒰(t,0)†`.
///
/// Pass `frame = None` when the dissipator is time independent in the
/// Schrödinger picture (static Davies generators, the diagonally modulated
/// qubit).
pub fn schroedinger_rhs(
    bundle: &GeneratorBundle,
    hamiltonian: &HermitianOperator,
    frame: Option<&UnitaryOperator>,
    rho: &CMatrix,
) -> Result<CMatrix> {
    crate::operator::check_same_dim(bundle.dim(), rho.nrows())?;
    crate::operator::check_same_dim(bundle.dim(), hamiltonian.dim())?;
    let h = hamiltonian.matrix();
    let coherent = (h * rho - rho * h) * num_complex::Complex64::new(0.0, -1.0);
    let dissipative = match frame {
        None => bundle.total.apply(rho),
        Some(u) => {
            crate::operator::check_same_dim(bundle.dim(), u.dim())?;
            let m = u.matrix();
            m * bundle.total.apply(&(m.adjoint() * rho * m)) * m.adjoint()
        }
    };
    Ok(coherent + dissipative)
}
