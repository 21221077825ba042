use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use floquet_core::bath::make_flat_bath;
use floquet_core::dynamics::steady_state;
use floquet_core::floquet::{FloquetEngine, FloquetOptions, PeriodicHamiltonian};
use floquet_core::operator::{c, HermitianOperator};
use floquet_core::parallel::{try_map_range, Execution};
use floquet_core::qubit::{build_qubit_bundle_with, pq_table, ModulationProfile, QubitModel};
use floquet_core::CMatrix;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn qutrit_drive() -> (PeriodicHamiltonian, HermitianOperator) {
    let a = CMatrix::from_fn(3, 3, |i, j| c(0.3 * (i + 2 * j) as f64 - 0.4));
    let b = CMatrix::from_fn(3, 3, |i, j| c(((i * j) as f64).cos()));
    let h = PeriodicHamiltonian::piecewise(vec![
        (0.6, HermitianOperator::hermitized(a)),
        (0.9, HermitianOperator::hermitized(b)),
    ])
    .unwrap();
    let s = HermitianOperator::hermitized(CMatrix::from_fn(3, 3, |i, j| c(1.0 / (1 + i + j) as f64)));
    (h, s)
}

fn bench_pq_table(cr: &mut Criterion) {
    let profile = ModulationProfile::pulse_train(1.0, 2.0 * PI / 0.7).unwrap();
    let mut group = cr.benchmark_group("pq_table_q31");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |bch, &exec| {
            bch.iter(|| pq_table(black_box(&profile), 31, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_decompose(cr: &mut Criterion) {
    let (h, s) = qutrit_drive();
    let mut group = cr.benchmark_group("floquet_decompose_q511");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = FloquetOptions {
            q_max: 511,
            grid_n: 4096,
            reconstruction_tol: f64::INFINITY,
            execution: exec,
            ..FloquetOptions::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &opts, |bch, opts| {
            bch.iter(|| {
                FloquetEngine::new(h.clone(), *opts)
                    .unwrap()
                    .decompose(black_box(&s))
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_sweep(cr: &mut Criterion) {
    let omegas: Vec<f64> = (0..32).map(|k| 0.2 + 0.1 * k as f64).collect();
    let mut group = cr.benchmark_group("steady_sweep_32");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |bch, &exec| {
            bch.iter(|| {
                try_map_range(exec, omegas.len(), |k| {
                    let profile = ModulationProfile::pulse_train(1.0, 2.0 * PI / omegas[k])?;
                    let model = QubitModel::with_execution(
                        profile,
                        vec![make_flat_bath("h", 2.0, 0.1)?, make_flat_bath("c", 0.3, 0.1)?],
                        None,
                        Execution::Sequential,
                    )?;
                    steady_state(&build_qubit_bundle_with(&model, Execution::Sequential)?)
                })
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_pq_table, bench_decompose, bench_sweep);
criterion_main!(benches);
