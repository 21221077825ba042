mod common;

use std::f64::consts::PI;

use floquet_core::bath::{make_flat_bath, make_ohmic_bath};
use floquet_core::dynamics::steady_state;
use floquet_core::floquet::{FloquetEngine, FloquetOptions, PeriodicHamiltonian};
use floquet_core::generator::build_static;
use floquet_core::operator::{
    bohr_components, choi_positivity_check, spectral_decompose, vectorize, DensityMatrix, Superoperator,
};
use floquet_core::parallel::Execution;
use floquet_core::qubit::{pq_table, ModulationProfile};
use floquet_core::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kms_ratio_holds(w in 0.01f64..20.0, t in 0.05f64..10.0, g in 0.01f64..2.0, cut in 0.5f64..30.0) {
        for bath in [make_flat_bath("f", t, g).unwrap(), make_ohmic_bath("o", t, g, cut).unwrap()] {
            let up = bath.eval_rate(-w).unwrap();
            let down = bath.eval_rate(w).unwrap();
            if down > 0.0 {
                let ratio = up / down;
                prop_assert!((ratio / (-w / t).exp() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bohr_components_resum(seed in any::<u64>(), n in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = common::random_hermitian(&mut rng, n, 1.0);
        let s = common::random_hermitian(&mut rng, n, 1.0);
        let comps = bohr_components(&s, &spectral_decompose(&h, 1e-9).unwrap()).unwrap();
        prop_assert!((comps.reconstruct().unwrap() - s.matrix()).norm() < 1e-12);
        for comp in &comps.components {
            let partner = comps.get(-comp.omega, 1e-9).expect("S_{−ω} present");
            prop_assert!((partner - comp.op.adjoint()).norm() < 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn static_generator_invariants(seed in any::<u64>(), n in 2usize..5, t in 0.2f64..4.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = common::random_hermitian(&mut rng, n, 1.0);
        let s = common::random_hermitian(&mut rng, n, 1.0);
        let b = build_static(&h, &[(s, make_ohmic_bath("o", t, 0.3, 3.0).unwrap())]).unwrap();
        prop_assert!(b.total.is_trace_annihilating(1e-12));
        prop_assert!(b.total.apply(DensityMatrix::gibbs(&h, t).matrix()).norm() < 1e-10);
        prop_assert!(choi_positivity_check(&b.total, 1e-3).min_eigenvalue >= -1e-8);
        let ad = Superoperator::hamiltonian(h.matrix());
        let comm = &b.total.compose(&ad) - &ad.compose(&b.total);
        prop_assert!(comm.matrix().norm() < 1e-10);
        let rho = steady_state(&b).unwrap();
        prop_assert!((rho.matrix() - DensityMatrix::gibbs(&h, t).matrix()).norm() < 1e-9);
    }

    #[test]
    fn semigroup_property(seed in any::<u64>(), t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = common::random_hermitian(&mut rng, 3, 1.0);
        let s = common::random_hermitian(&mut rng, 3, 1.0);
        let b = build_static(&h, &[(s, make_flat_bath("f", 0.9, 0.4).unwrap())]).unwrap();
        let rho = vectorize(&common::random_density(&mut rng, 3));
        let joint = b.total.exp(t1 + t2).apply_vec(&rho);
        let split = b.total.exp(t2).apply_vec(&b.total.exp(t1).apply_vec(&rho));
        prop_assert!((joint - split).norm() < 1e-10);
    }

    #[test]
    fn harmonic_weights_are_probabilities(ratio in 0.0f64..1.0, big in 0.5f64..3.0, phase in -PI..PI) {
        let w0 = 4.0;
        let p = ModulationProfile::sinusoidal(w0, 2.0 * PI / big, ratio * big, phase).unwrap();
        let t = pq_table(&p, 8, Execution::Sequential).unwrap();
        prop_assert!(t.entries.iter().all(|e| e.p >= 0.0));
        prop_assert!(t.captured_mass <= 1.0 + 1e-10);
        prop_assert!(t.captured_mass >= 1.0 - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn floquet_harmonics_pair_hermitian(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h0 = common::random_hermitian(&mut rng, 2, 1.0).into_matrix();
        let v = common::random_hermitian(&mut rng, 2, 0.3).into_matrix();
        let s = common::random_hermitian(&mut rng, 2, 1.0);
        let big = 2.3;
        let h = PeriodicHamiltonian::smooth(2, 2.0 * PI / big, move |t| &h0 + &v * Complex64::new((big * t).sin(), 0.0)).unwrap();
        let engine = FloquetEngine::new(h, FloquetOptions { q_max: 12, grid_n: 128, ..FloquetOptions::default() }).unwrap();
        let fd = engine.decompose(&s).unwrap();
        for hm in &fd.harmonics {
            if let Some(partner) = fd.get(-hm.omega, -hm.q, 1e-9) {
                prop_assert!((partner - hm.op.adjoint()).norm() < 1e-10);
            } else {
                prop_assert!(hm.op.norm() < 1e-10);
            }
        }
    }
}
