//! Scenario configuration: a single JSON document, validated and with every
//! default filled in at parse time so that `parse → serialize → parse` is a
//! fixpoint.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use floquet_core::bath::{BathSpec, SpectralModel};
use floquet_core::floquet::{Integrator, MIN_STEPS_PER_PERIOD};
use floquet_core::operator::{hermiticity_defect, HERMITIAN_TOL};
use floquet_core::{CMatrix, Complex64};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Energy-unit label copied into output headers; no conversion is done.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
    pub system: SystemConfig,
    pub baths: Vec<BathConfig>,
    #[serde(default)]
    pub floquet: FloquetConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    /// `H(t) = ½ω(t)σ³`, every bath coupled through `σ¹`.
    Qubit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega0: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        drive_frequency: Option<f64>,
        modulation: ModulationConfig,
    },
    Generic {
        dim: usize,
        hamiltonian: HamiltonianConfig,
        couplings: Vec<CouplingConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModulationConfig {
    Constant,
    Sinusoidal {
        amplitude: f64,
        #[serde(default)]
        phase: f64,
    },
    PulseTrain,
    /// Samples inline, or a two-column `t,omega` CSV (with header) that is
    /// read into the inline form at parse time.
    Tabulated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<String>,
        #[serde(default)]
        times: Vec<f64>,
        #[serde(default)]
        omega: Vec<f64>,
    },
}

/// A complex matrix as row-major real and (optional) imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixConfig {
    pub fn to_matrix(&self) -> CMatrix {
        let n = self.re.len();
        CMatrix::from_fn(n, n, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
            Complex64::new(self.re[i][j], im)
        })
    }

    fn check(&self, dim: usize, path: &str) -> Result<(), ConfigError> {
        let rows_ok = |m: &Vec<Vec<f64>>| m.len() == dim && m.iter().all(|r| r.len() == dim);
        if !rows_ok(&self.re) || self.im.as_ref().is_some_and(|m| !rows_ok(m)) {
            return Err(invalid(path, format!("expected a {dim}×{dim} matrix")));
        }
        if self
            .re
            .iter()
            .chain(self.im.iter().flatten())
            .flatten()
            .any(|x| !x.is_finite())
        {
            return Err(invalid(path, "entries must be finite"));
        }
        let defect = hermiticity_defect(&self.to_matrix());
        if defect > HERMITIAN_TOL {
            return Err(invalid(path, format!("not Hermitian (max |A − A†| = {defect:.3e})")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianConfig {
    Constant {
        matrix: MatrixConfig,
    },
    Piecewise {
        segments: Vec<SegmentConfig>,
    },
    /// `H(t) = H₀ + Σ_k [C_k cos(kΩt) + S_k sin(kΩt)]`, `k = 1, 2, …`.
    Harmonic {
        drive_frequency: f64,
        #[serde(rename = "static")]
        static_part: MatrixConfig,
        #[serde(default)]
        cos: Vec<MatrixConfig>,
        #[serde(default)]
        sin: Vec<MatrixConfig>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub duration: f64,
    pub matrix: MatrixConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    pub bath: String,
    pub operator: MatrixConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    pub label: String,
    pub temperature: f64,
    pub spectrum: SpectralModel,
}

impl BathConfig {
    pub fn to_spec(&self) -> floquet_core::Result<BathSpec> {
        BathSpec::new(self.label.clone(), self.temperature, self.spectrum.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorName {
    Midpoint,
    Magnus4,
}

impl From<IntegratorName> for Integrator {
    fn from(n: IntegratorName) -> Self {
        match n {
            IntegratorName::Midpoint => Integrator::Midpoint,
            IntegratorName::Magnus4 => Integrator::Magnus4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Evolve,
    #[default]
    Steady,
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Basis state `|index⟩`; for the qubit `0` is `|e⟩`.
    Basis {
        index: usize,
    },
    MaximallyMixed,
    Gibbs {
        temperature: f64,
    },
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Basis { index: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "parameter", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepParameter {
    DriveFrequency,
    Omega0,
    Amplitude,
    Temperature { bath: String },
}

impl SweepParameter {
    pub fn column_name(&self) -> String {
        match self {
            SweepParameter::DriveFrequency => "drive_frequency".into(),
            SweepParameter::Omega0 => "omega0".into(),
            SweepParameter::Amplitude => "amplitude".into(),
            SweepParameter::Temperature { bath } => format!("temperature_{bath}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_directory() -> String {
    "out".into()
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_directory(),
            formats: default_formats(),
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

pub const DEFAULT_STEPS_PER_PERIOD: usize = 1024;
pub const DEFAULT_GRID_N: usize = 256;
pub const DEFAULT_RECONSTRUCTION_TOL: f64 = 1e-6;
pub const DEFAULT_GENERIC_Q: usize = 8;

/// Reads, resolves and validates a scenario file.
pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config_str(&text, base)
}

/// Parses a scenario from text; relative CSV paths resolve against `base`.
pub fn parse_config_str(text: &str, base: &Path) -> Result<ScenarioConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut cfg: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::Schema {
            path: if path == "." { "<root>".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })?;
    cfg.resolve(base)?;
    cfg.validate()?;
    Ok(cfg)
}

fn read_modulation_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| invalid("system.modulation.csv", format!("{}: {e}", path.display())))?;
    let mut times = Vec::new();
    let mut omega = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| invalid("system.modulation.csv", e.to_string()))?;
        let field = |k: usize| -> Result<f64, ConfigError> {
            rec.get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| invalid("system.modulation.csv", format!("row {}: expected two numbers", i + 1)))
        };
        times.push(field(0)?);
        omega.push(field(1)?);
    }
    Ok((times, omega))
}

impl ScenarioConfig {
    pub fn is_qubit(&self) -> bool {
        matches!(self.system, SystemConfig::Qubit { .. })
    }

    /// Fills every optional field with its effective value.
    fn resolve(&mut self, base: &Path) -> Result<(), ConfigError> {
        let mut default_q = DEFAULT_GENERIC_Q;
        if let SystemConfig::Qubit {
            omega0,
            drive_frequency,
            modulation,
        } = &mut self.system
        {
            if let ModulationConfig::Tabulated { csv, times, omega } = modulation {
                if let Some(file) = csv.take() {
                    if !times.is_empty() || !omega.is_empty() {
                        return Err(invalid(
                            "system.modulation",
                            "give either `csv` or inline samples, not both",
                        ));
                    }
                    (*times, *omega) = read_modulation_csv(&base.join(file))?;
                }
                if times.len() >= 2 && times.len() == omega.len() {
                    let period = times[times.len() - 1];
                    let area: f64 = (1..times.len())
                        .map(|k| 0.5 * (omega[k] + omega[k - 1]) * (times[k] - times[k - 1]))
                        .sum();
                    omega0.get_or_insert(area / period);
                    drive_frequency.get_or_insert(2.0 * PI / period);
                }
            }
            if matches!(modulation, ModulationConfig::Constant) {
                drive_frequency.get_or_insert(1.0);
            }
            default_q = match modulation {
                ModulationConfig::PulseTrain => 31,
                ModulationConfig::Constant => 0,
                _ => 8,
            };
        }
        let f = &mut self.floquet;
        let q = *f.q_max.get_or_insert(default_q);
        f.grid_n
            .get_or_insert(DEFAULT_GRID_N.max((4 * q + 4).next_power_of_two()));
        f.steps_per_period.get_or_insert(DEFAULT_STEPS_PER_PERIOD);
        f.integrator.get_or_insert(IntegratorName::Magnus4);
        f.reconstruction_tol.get_or_insert(DEFAULT_RECONSTRUCTION_TOL);

        let r = &mut self.run;
        if r.mode == RunMode::Evolve || r.t_end.is_some() || r.dt.is_some() {
            let t_end = *r.t_end.get_or_insert(50.0);
            r.dt.get_or_insert(t_end / 100.0);
        }
        let mut formats: Vec<Format> = self
            .output
            .formats
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        std::mem::swap(&mut self.output.formats, &mut formats);
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.baths.is_empty() {
            return Err(invalid("baths", "at least one bath is required"));
        }
        for (i, b) in self.baths.iter().enumerate() {
            let path = format!("baths[{i}]");
            if self.baths[..i].iter().any(|o| o.label == b.label) {
                return Err(invalid(path, format!("duplicate bath label `{}`", b.label)));
            }
            b.to_spec()
                .map_err(|e| invalid(format!("{path} (`{}`)", b.label), e.to_string()))?;
        }

        match &self.system {
            SystemConfig::Qubit {
                omega0,
                drive_frequency,
                modulation,
            } => {
                let Some(w0) = omega0 else {
                    return Err(invalid("system.omega0", "required for this modulation shape"));
                };
                let Some(big) = drive_frequency else {
                    return Err(invalid("system.drive_frequency", "required for a driven qubit"));
                };
                if !(w0.is_finite() && *w0 > 0.0) {
                    return Err(invalid("system.omega0", "must be positive"));
                }
                if !(big.is_finite() && *big > 0.0) {
                    return Err(invalid("system.drive_frequency", "must be positive"));
                }
                if let ModulationConfig::Tabulated { times, omega, .. } = modulation {
                    if times.len() < 2 || times.len() != omega.len() {
                        return Err(invalid("system.modulation", "needs at least two (t, omega) samples"));
                    }
                }
            }
            SystemConfig::Generic {
                dim,
                hamiltonian,
                couplings,
            } => {
                let dim = *dim;
                if dim < 2 {
                    return Err(invalid("system.dim", "must be at least 2"));
                }
                match hamiltonian {
                    HamiltonianConfig::Constant { matrix } => matrix.check(dim, "system.hamiltonian.matrix")?,
                    HamiltonianConfig::Piecewise { segments } => {
                        if segments.is_empty() {
                            return Err(invalid("system.hamiltonian.segments", "at least one segment required"));
                        }
                        for (i, s) in segments.iter().enumerate() {
                            if !(s.duration.is_finite() && s.duration > 0.0) {
                                return Err(invalid(
                                    format!("system.hamiltonian.segments[{i}].duration"),
                                    "must be positive",
                                ));
                            }
                            s.matrix
                                .check(dim, &format!("system.hamiltonian.segments[{i}].matrix"))?;
                        }
                    }
                    HamiltonianConfig::Harmonic {
                        drive_frequency,
                        static_part,
                        cos,
                        sin,
                    } => {
                        if !(drive_frequency.is_finite() && *drive_frequency > 0.0) {
                            return Err(invalid("system.hamiltonian.drive_frequency", "must be positive"));
                        }
                        static_part.check(dim, "system.hamiltonian.static")?;
                        for (i, m) in cos.iter().enumerate() {
                            m.check(dim, &format!("system.hamiltonian.cos[{i}]"))?;
                        }
                        for (i, m) in sin.iter().enumerate() {
                            m.check(dim, &format!("system.hamiltonian.sin[{i}]"))?;
                        }
                    }
                }
                for (i, c) in couplings.iter().enumerate() {
                    if !self.baths.iter().any(|b| b.label == c.bath) {
                        return Err(invalid(
                            format!("system.couplings[{i}].bath"),
                            format!("no bath labelled `{}`", c.bath),
                        ));
                    }
                    if couplings[..i].iter().any(|o| o.bath == c.bath) {
                        return Err(invalid(
                            format!("system.couplings[{i}].bath"),
                            format!("bath `{}` already has a coupling", c.bath),
                        ));
                    }
                    c.operator.check(dim, &format!("system.couplings[{i}].operator"))?;
                }
                for b in &self.baths {
                    if !couplings.iter().any(|c| c.bath == b.label) {
                        return Err(invalid(
                            "system.couplings",
                            format!("bath `{}` has no coupling operator", b.label),
                        ));
                    }
                }
            }
        }

        let f = &self.floquet;
        let (q, n, steps) = (
            f.q_max.unwrap_or(0),
            f.grid_n.unwrap_or(0),
            f.steps_per_period.unwrap_or(0),
        );
        if n < 4 * q + 4 {
            return Err(invalid(
                "floquet.grid_n",
                format!("needs grid_n >= 4 q_max + 4 = {}", 4 * q + 4),
            ));
        }
        if steps < MIN_STEPS_PER_PERIOD {
            return Err(invalid(
                "floquet.steps_per_period",
                format!("must be at least {MIN_STEPS_PER_PERIOD}"),
            ));
        }
        if !f.reconstruction_tol.is_some_and(|t| t > 0.0) {
            return Err(invalid("floquet.reconstruction_tol", "must be positive"));
        }

        let r = &self.run;
        if let Some(t) = r.t_end {
            if !(t.is_finite() && t >= 0.0) {
                return Err(invalid("run.t_end", "must be non-negative"));
            }
        }
        if let Some(dt) = r.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(invalid("run.dt", "must be positive"));
            }
        }
        if let InitialState::Basis { index } = r.initial_state {
            if index >= self.dim() {
                return Err(invalid(
                    "run.initial_state.index",
                    format!("must be below {}", self.dim()),
                ));
            }
        }
        if let InitialState::Gibbs { temperature } = r.initial_state {
            if !(temperature.is_finite() && temperature > 0.0) {
                return Err(invalid("run.initial_state.temperature", "must be positive"));
            }
        }
        match (&r.mode, &r.sweep) {
            (RunMode::Sweep, None) => return Err(invalid("run.sweep", "required when mode is `sweep`")),
            (_, Some(s)) => self.validate_sweep(s)?,
            _ => {}
        }
        if self.output.formats.is_empty() {
            return Err(invalid("output.formats", "at least one format required"));
        }
        Ok(())
    }

    fn validate_sweep(&self, s: &SweepConfig) -> Result<(), ConfigError> {
        if s.values.is_empty() || s.values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("run.sweep.values", "need at least one finite value"));
        }
        let applicable = match (&s.axis, &self.system) {
            (SweepParameter::DriveFrequency, SystemConfig::Qubit { modulation, .. }) => {
                !matches!(modulation, ModulationConfig::Tabulated { .. })
            }
            (SweepParameter::DriveFrequency, SystemConfig::Generic { hamiltonian, .. }) => {
                !matches!(hamiltonian, HamiltonianConfig::Constant { .. })
            }
            (SweepParameter::Omega0, SystemConfig::Qubit { modulation, .. }) => {
                !matches!(modulation, ModulationConfig::Tabulated { .. })
            }
            (SweepParameter::Amplitude, SystemConfig::Qubit { modulation, .. }) => {
                matches!(modulation, ModulationConfig::Sinusoidal { .. })
            }
            (SweepParameter::Temperature { bath }, _) => self.baths.iter().any(|b| &b.label == bath),
            _ => false,
        };
        if !applicable {
            return Err(invalid(
                "run.sweep.axis",
                format!("`{}` cannot be swept for this system", s.axis.column_name()),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match &self.system {
            SystemConfig::Qubit { .. } => 2,
            SystemConfig::Generic { dim, .. } => *dim,
        }
    }

    /// A copy with one sweep parameter replaced.
    pub fn with_parameter(&self, axis: &SweepParameter, value: f64) -> Result<ScenarioConfig, ConfigError> {
        let mut cfg = self.clone();
        match (axis, &mut cfg.system) {
            (SweepParameter::DriveFrequency, SystemConfig::Qubit { drive_frequency, .. }) => {
                *drive_frequency = Some(value)
            }
            (SweepParameter::DriveFrequency, SystemConfig::Generic { hamiltonian, .. }) => match hamiltonian {
                HamiltonianConfig::Harmonic { drive_frequency, .. } => *drive_frequency = value,
                HamiltonianConfig::Piecewise { segments } => {
                    let period: f64 = segments.iter().map(|s| s.duration).sum();
                    let scale = 2.0 * PI / value / period;
                    for s in segments.iter_mut() {
                        s.duration *= scale;
                    }
                }
                HamiltonianConfig::Constant { .. } => {}
            },
            (SweepParameter::Omega0, SystemConfig::Qubit { omega0, .. }) => *omega0 = Some(value),
            (
                SweepParameter::Amplitude,
                SystemConfig::Qubit {
                    modulation: ModulationConfig::Sinusoidal { amplitude, .. },
                    ..
                },
            ) => *amplitude = value,
            (SweepParameter::Temperature { bath }, _) => {
                for b in cfg.baths.iter_mut().filter(|b| &b.label == bath) {
                    b.temperature = value;
                }
            }
            _ => {}
        }
        cfg.run.sweep = None;
        cfg.run.mode = RunMode::Steady;
        cfg.validate()?;
        Ok(cfg)
    }
}
