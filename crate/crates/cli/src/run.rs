//! Scenario execution: steady state, relaxation trajectory or parameter sweep.

use std::path::PathBuf;

use anyhow::{Context, Result};
use floquet_core::dynamics::{evolve, steady_state};
use floquet_core::parallel::{map_slice, Execution};
use floquet_core::qubit::{t_eff, Temperature};
use floquet_core::thermo::{entropy_production, steady_report, ThermoReport, SECOND_LAW_TOL};
use floquet_core::Error;
use serde::Serialize;

use crate::config::{Format, RunMode, ScenarioConfig};
use crate::model::{initial_state, prepare, Prepared};
use crate::output::{energy_col, num, Writer};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub mode: Option<RunMode>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    /// Law checks that failed beyond tolerance; empty on a clean run.
    pub violations: Vec<String>,
    pub summary: Vec<String>,
}

#[derive(Serialize)]
struct SteadyStateFile<'a> {
    scenario: Option<&'a str>,
    units: Option<&'a str>,
    /// States are reported in the interaction picture, where they are stationary.
    frame: &'static str,
    dim: usize,
    real: Vec<Vec<f64>>,
    imag: Vec<Vec<f64>>,
    populations: Vec<f64>,
    entropy: f64,
    purity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_eff: Option<Temperature>,
    #[serde(skip_serializing_if = "Option::is_none")]
    captured_mass: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reconstruction_error: Option<f64>,
    channels: usize,
}

#[derive(Serialize)]
struct ReportFile<'a> {
    scenario: Option<&'a str>,
    units: Option<&'a str>,
    drive_frequency: f64,
    report: &'a ThermoReport,
}

fn law_violations(report: &ThermoReport, context: &str) -> Vec<String> {
    let mut v = Vec::new();
    if !report.second_law_ok {
        v.push(format!(
            "{context}second law: Σ J/T = {:.3e} > 0",
            report.second_law_margin
        ));
    }
    if !report.first_law_ok {
        v.push(format!(
            "{context}first law: energy-balance residual {:.3e}",
            report.first_law_residual
        ));
    }
    v
}

fn qubit_t_eff(p: &Prepared) -> Result<Option<Temperature>> {
    p.qubit
        .as_ref()
        .map(|m| t_eff(m).context("qubit-workbench: effective temperature"))
        .transpose()
}

pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let mode = opts.mode.unwrap_or(cfg.run.mode);
    let dir = opts
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    let mut writer = Writer::new(&dir)?;
    let mut outcome = RunOutcome {
        files: Vec::new(),
        violations: Vec::new(),
        summary: Vec::new(),
    };
    match mode {
        RunMode::Steady => {
            run_steady(cfg, &mut writer, &mut outcome)?;
        }
        RunMode::Evolve => {
            let p = run_steady(cfg, &mut writer, &mut outcome)?;
            run_evolve(cfg, &p, &mut writer, &mut outcome)?;
        }
        RunMode::Sweep => run_sweep(cfg, &mut writer, &mut outcome)?,
    }
    outcome.files = writer.into_files();
    Ok(outcome)
}

fn run_steady(cfg: &ScenarioConfig, writer: &mut Writer, outcome: &mut RunOutcome) -> Result<Prepared> {
    let p = prepare(cfg, Execution::Parallel)?;
    let rho = steady_state(&p.bundle).context("dynamics-solver: steady state")?;
    let report = steady_report(&p.bundle, &rho).context("thermo-analyzer: steady report")?;
    let units = cfg.units.as_deref();
    let n = rho.dim();
    let m = rho.matrix();
    let t_eff = qubit_t_eff(&p)?;

    if cfg.output.wants(Format::Json) {
        writer.json(
            "steady_state.json",
            &SteadyStateFile {
                scenario: cfg.name.as_deref(),
                units,
                frame: "interaction",
                dim: n,
                real: (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect(),
                imag: (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect(),
                populations: rho.populations(),
                entropy: rho.entropy(),
                purity: rho.purity(),
                t_eff,
                captured_mass: p.qubit.as_ref().map(|q| q.table.captured_mass),
                reconstruction_error: p.reconstruction_error,
                channels: p.bundle.channels.len(),
            },
        )?;
        writer.json(
            "thermo_report.json",
            &ReportFile {
                scenario: cfg.name.as_deref(),
                units,
                drive_frequency: p.bundle.drive_frequency(),
                report: &report,
            },
        )?;
    }
    if cfg.output.wants(Format::Csv) {
        let header: Vec<String> = vec![
            "row_type".into(),
            "bath".into(),
            "q".into(),
            energy_col("omega", units),
            energy_col("quantum", units),
            energy_col("value", units),
        ];
        let mut rows = Vec::new();
        for c in &report.per_channel {
            rows.push(vec![
                "channel".into(),
                c.bath.clone(),
                c.q.to_string(),
                num(c.omega),
                num(c.quantum),
                num(c.current),
            ]);
        }
        for b in &report.per_bath {
            rows.push(vec![
                "bath".into(),
                b.bath.clone(),
                String::new(),
                String::new(),
                String::new(),
                num(b.current),
            ]);
        }
        let scalar = |name: &str, x: f64| {
            vec![
                name.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                num(x),
            ]
        };
        rows.push(scalar("total_heat", report.total_heat));
        rows.push(scalar("power", report.power));
        rows.push(scalar("entropy_production", report.entropy_production));
        rows.push(scalar("second_law_margin", report.second_law_margin));
        rows.push(scalar("first_law_residual", report.first_law_residual));
        writer.csv("thermo_report.csv", &header, &rows)?;
    }

    outcome.violations.extend(law_violations(&report, ""));
    for b in &report.per_bath {
        outcome.summary.push(format!("J[{}] = {:+.6e}", b.bath, b.current));
    }
    outcome.summary.push(format!("P = {:+.6e}", report.power));
    outcome
        .summary
        .push(format!("Σ J/T = {:+.6e}", report.second_law_margin));
    if let Some(t) = t_eff {
        outcome.summary.push(format!("T_eff = {:.6e}", t.value()));
    }
    Ok(p)
}

fn run_evolve(cfg: &ScenarioConfig, p: &Prepared, writer: &mut Writer, outcome: &mut RunOutcome) -> Result<()> {
    let t_end = cfg.run.t_end.unwrap_or(50.0);
    let dt = cfg.run.dt.unwrap_or(t_end / 100.0);
    let rho0 = initial_state(cfg, p)?;
    let interaction = evolve(&p.bundle, None, &rho0, t_end, dt).context("dynamics-solver: evolution")?;
    let lab = interaction
        .to_schroedinger(&p.hamiltonian, &p.propagation)
        .context("dynamics-solver: lab-frame rotation")?;

    let n = p.bundle.dim();
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|k| format!("p{k}")));
    header.push("entropy".into());
    header.push("sigma".into());
    let mut rows = Vec::with_capacity(lab.len());
    let mut worst = f64::INFINITY;
    for ((t, lab_rho), rho) in lab.times.iter().zip(&lab.states).zip(&interaction.states) {
        // σ is frame independent; it is evaluated where ℒ is time independent.
        let sigma = match entropy_production(&p.bundle, rho) {
            Ok(ep) => ep.sigma,
            Err(Error::SecondLaw { sigma, .. }) => sigma,
            Err(e) => return Err(e).context("thermo-analyzer: entropy production"),
        };
        worst = worst.min(sigma);
        let mut row = vec![num(*t)];
        row.extend(lab_rho.populations().into_iter().map(num));
        row.push(num(lab_rho.entropy()));
        row.push(num(sigma));
        rows.push(row);
    }
    if worst < -SECOND_LAW_TOL {
        outcome
            .violations
            .push(format!("transient second law: min σ(t) = {worst:.3e}"));
    }
    writer.csv("trajectory.csv", &header, &rows)?;
    outcome
        .summary
        .push(format!("trajectory: {} samples, min σ = {worst:.3e}", rows.len()));
    Ok(())
}

struct SweepPoint {
    value: f64,
    report: ThermoReport,
    t_eff: Option<Temperature>,
}

fn run_sweep(cfg: &ScenarioConfig, writer: &mut Writer, outcome: &mut RunOutcome) -> Result<()> {
    let sweep = cfg.run.sweep.as_ref().context("run.sweep missing")?;
    let mut values = sweep.values.clone();
    values.sort_by(f64::total_cmp);
    let points = map_slice(Execution::Parallel, &values, |&v| -> Result<SweepPoint> {
        let point = cfg.with_parameter(&sweep.axis, v)?;
        let p = prepare(&point, Execution::Sequential)?;
        let rho = steady_state(&p.bundle).context("dynamics-solver: steady state")?;
        let report = steady_report(&p.bundle, &rho).context("thermo-analyzer: steady report")?;
        Ok(SweepPoint {
            value: v,
            report,
            t_eff: qubit_t_eff(&p)?,
        })
    });
    let points = points
        .into_iter()
        .zip(&values)
        .map(|(r, v)| r.with_context(|| format!("sweep point {} = {v}", sweep.axis.column_name())))
        .collect::<Result<Vec<_>>>()?;

    let units = cfg.units.as_deref();
    let mut header = vec![sweep.axis.column_name()];
    header.extend(cfg.baths.iter().map(|b| energy_col(&format!("J_{}", b.label), units)));
    header.push(energy_col("power", units));
    header.push("second_law_margin".into());
    header.push("first_law_residual".into());
    if cfg.is_qubit() {
        header.push("t_eff".into());
    }
    header.push("regime".into());

    let mut rows = Vec::with_capacity(points.len());
    for pt in &points {
        let mut row = vec![num(pt.value)];
        row.extend(pt.report.per_bath.iter().map(|b| num(b.current)));
        row.push(num(pt.report.power));
        row.push(num(pt.report.second_law_margin));
        row.push(num(pt.report.first_law_residual));
        if cfg.is_qubit() {
            row.push(pt.t_eff.map_or_else(String::new, |t| num(t.value())));
        }
        row.push(
            serde_json::to_value(pt.report.regime)?
                .as_str()
                .unwrap_or_default()
                .to_string(),
        );
        rows.push(row);
        let at = format!("{} = {}: ", sweep.axis.column_name(), pt.value);
        outcome.violations.extend(law_violations(&pt.report, &at));
    }
    writer.csv("sweep.csv", &header, &rows)?;
    outcome.summary.push(format!("sweep: {} points", rows.len()));
    Ok(())
}
