//! Thermal baths described by their spectral density `G(ω)`.
//!
//! Only the branch `ω ≥ 0` is modelled; the negative branch is defined by the
//! KMS relation `G(−ω) = e^{−ω/T} G(ω)`, so detailed balance holds exactly
//! rather than to quadrature accuracy. Coupling constants are absorbed into
//! the rate scale, so `G` values are physical transition rates.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectralModel {
    /// `G(ω) = γ₀` for `ω ≥ 0`.
    Flat { gamma0: f64 },
    /// `G(ω) = γ₀ ω e^{−ω/ω_c}` for `ω ≥ 0`.
    Ohmic { gamma0: f64, cutoff: f64 },
    /// Linear interpolation on `(omega, rate)` samples; zero outside the grid.
    Tabulated { omega: Vec<f64>, rate: Vec<f64> },
}

impl SpectralModel {
    fn positive_branch(&self, w: f64) -> f64 {
        match self {
            SpectralModel::Flat { gamma0 } => *gamma0,
            SpectralModel::Ohmic { gamma0, cutoff } => gamma0 * w * (-w / cutoff).exp(),
            SpectralModel::Tabulated { omega, rate } => interpolate(omega, rate, w),
        }
    }

    /// Upper bound of `G` over the whole real line.
    pub fn supremum(&self) -> f64 {
        match self {
            SpectralModel::Flat { gamma0 } => *gamma0,
            SpectralModel::Ohmic { gamma0, cutoff } => gamma0 * cutoff * (-1.0f64).exp(),
            SpectralModel::Tabulated { rate, .. } => rate.iter().cloned().fold(0.0, f64::max),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive and finite, got {v}")))
            }
        };
        match self {
            SpectralModel::Flat { gamma0 } => positive("gamma0", *gamma0),
            SpectralModel::Ohmic { gamma0, cutoff } => {
                positive("gamma0", *gamma0)?;
                positive("cutoff", *cutoff)
            }
            SpectralModel::Tabulated { omega, rate } => {
                if omega.len() != rate.len() || omega.len() < 2 {
                    return Err(Error::param(
                        "tabulated",
                        "needs at least two (omega, rate) pairs of equal length",
                    ));
                }
                if omega.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(Error::param("tabulated.omega", "must be finite and non-negative"));
                }
                if omega.windows(2).any(|p| p[1] <= p[0]) {
                    return Err(Error::param("tabulated.omega", "must be strictly increasing"));
                }
                if rate.iter().any(|r| !r.is_finite() || *r < 0.0) {
                    return Err(Error::param("tabulated.rate", "must be finite and non-negative"));
                }
                Ok(())
            }
        }
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x < xs[0] || x > xs[xs.len() - 1] {
        return 0.0;
    }
    let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1, y0, y1) = (xs[i - 1], xs[i], ys[i - 1], ys[i]);
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// A thermal reservoir: label, temperature and spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub label: String,
    pub temperature: f64,
    #[serde(flatten)]
    pub model: SpectralModel,
}

impl BathSpec {
    pub fn new(label: impl Into<String>, temperature: f64, model: SpectralModel) -> Result<Self> {
        let label = label.into();
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::param(
                "temperature",
                format!("bath `{label}` needs T > 0, got {temperature}"),
            ));
        }
        model.validate()?;
        Ok(Self {
            label,
            temperature,
            model,
        })
    }

    /// `G(ω)`; negative frequencies go through the KMS relation.
    pub fn eval_rate(&self, omega: f64) -> Result<f64> {
        if !omega.is_finite() {
            return Err(Error::param("omega", format!("non-finite frequency {omega}")));
        }
        Ok(if omega >= 0.0 {
            self.model.positive_branch(omega)
        } else {
            (omega / self.temperature).exp() * self.model.positive_branch(-omega)
        })
    }

    pub fn beta(&self) -> f64 {
        1.0 / self.temperature
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(self.label.clone(), temperature, self.model.clone())
    }
}

pub fn make_flat_bath(label: impl Into<String>, temperature: f64, gamma0: f64) -> Result<BathSpec> {
    BathSpec::new(label, temperature, SpectralModel::Flat { gamma0 })
}

pub fn make_ohmic_bath(label: impl Into<String>, temperature: f64, gamma0: f64, cutoff: f64) -> Result<BathSpec> {
    BathSpec::new(label, temperature, SpectralModel::Ohmic { gamma0, cutoff })
}

pub fn make_tabulated_bath(
    label: impl Into<String>,
    temperature: f64,
    omega: Vec<f64>,
    rate: Vec<f64>,
) -> Result<BathSpec> {
    BathSpec::new(label, temperature, SpectralModel::Tabulated { omega, rate })
}
