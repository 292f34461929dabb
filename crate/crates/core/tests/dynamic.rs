use num_complex::Complex64 as C64;
use proptest::prelude::*;
use starkqfi::dynamic::{dh_state_spectral, evolve, initial_state, qfi_dynamic, DynamicEvaluator, InitialState, StatePair};
use starkqfi::model::{ProbeModel, ProbeSpec};
use starkqfi::spectral::eigendecompose;

fn sp(len: usize, rate: f64) -> ProbeModel {
    ProbeModel::new(&ProbeSpec::single_particle(len, rate, 0.0).unwrap()).unwrap()
}

fn evolved(model: &ProbeModel, field: f64, psi0: &[C64], t: f64) -> Vec<C64> {
    evolve(&eigendecompose(&model.hamiltonian(field)).unwrap(), psi0, t).unwrap()
}

/// `d psi / dh` by central differences with one Richardson step.
fn fd_derivative(model: &ProbeModel, h: f64, psi0: &[C64], t: f64, d: f64) -> Vec<C64> {
    let central = |d: f64| -> Vec<C64> {
        let p = evolved(model, h + d, psi0, t);
        let m = evolved(model, h - d, psi0, t);
        p.iter().zip(&m).map(|(p, m)| (p - m) / (2.0 * d)).collect()
    };
    let (c1, c2) = (central(d), central(d / 2.0));
    c1.iter().zip(&c2).map(|(a, b)| (4.0 * b - a) / 3.0).collect()
}

fn superposition(weights: &[f64]) -> Vec<C64> {
    let n: f64 = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    weights.iter().map(|w| C64::new(w / n, 0.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn evolution_preserves_norm(len in 2usize..80, rate in 0.0f64..0.2, h in 0.0f64..1.0, t in 0.0f64..1000.0) {
        let model = sp(len, rate);
        let psi0 = initial_state(model.spec(), InitialState::CenterSite).unwrap();
        let psi = evolved(&model, h, &psi0, t);
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn global_phase_does_not_matter(len in 2usize..60, rate in 0.0f64..0.2, h in 0.0f64..0.5, t in 0.0f64..200.0, phi in 0.0f64..6.3) {
        let model = sp(len, rate);
        let dec = eigendecompose(&model.hamiltonian(h)).unwrap();
        let psi0 = initial_state(model.spec(), InitialState::CenterSite).unwrap();
        let rotated: Vec<C64> = psi0.iter().map(|z| z * C64::from_polar(1.0, phi)).collect();
        let a = DynamicEvaluator::new(&dec, model.generator(), &psi0).unwrap().qfi(t).unwrap();
        let b = DynamicEvaluator::new(&dec, model.generator(), &rotated).unwrap().qfi(t).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn evaluator_matches_direct_pair_sum(len in 2usize..60, rate in 0.0f64..0.1, h in 0.0f64..0.1, t in 0.0f64..100.0) {
        let model = sp(len, rate);
        let dec = eigendecompose(&model.hamiltonian(h)).unwrap();
        let psi0 = initial_state(model.spec(), InitialState::CenterSite).unwrap();
        let direct = qfi_dynamic(&dh_state_spectral(&dec, model.generator(), &psi0, t).unwrap()).unwrap();
        let fast = DynamicEvaluator::new(&dec, model.generator(), &psi0).unwrap().qfi(t).unwrap();
        prop_assert!((direct - fast).abs() <= 1e-8 * direct.max(1.0), "{direct} vs {fast}");
    }

    #[test]
    fn spectral_derivative_matches_finite_differences(len in 2usize..31, rate in 0.0f64..0.1, h in 0.0f64..0.1, t in 0.1f64..20.0) {
        let model = sp(len, rate);
        let dec = eigendecompose(&model.hamiltonian(h)).unwrap();
        let psi0 = initial_state(model.spec(), InitialState::CenterSite).unwrap();
        let spectral = dh_state_spectral(&dec, model.generator(), &psi0, t).unwrap();
        let fd = fd_derivative(&model, h, &psi0, t, 1e-4);
        let scale: f64 = spectral.dpsi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let err: f64 = fd.iter().zip(&spectral.dpsi).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err <= 1e-5 * scale.max(1e-3), "err {err} scale {scale}");
        let q_fd = qfi_dynamic(&StatePair { psi: spectral.psi.clone(), dpsi: fd }).unwrap();
        let q = qfi_dynamic(&spectral).unwrap();
        prop_assert!((q - q_fd).abs() <= 1e-5 * q.max(1e-6));
    }

    #[test]
    fn short_time_variance_law(len in 2usize..40, rate in 0.0f64..0.2, h in 0.0f64..1.0, w in prop::collection::vec(0.1f64..1.0, 40)) {
        let model = sp(len, rate);
        let dec = eigendecompose(&model.hamiltonian(h)).unwrap();
        let psi0 = superposition(&w[..len]);
        let g = model.generator();
        let mean: f64 = psi0.iter().zip(g).map(|(z, g)| z.norm_sqr() * g).sum();
        let second: f64 = psi0.iter().zip(g).map(|(z, g)| z.norm_sqr() * g * g).sum();
        let var = second - mean * mean;
        let t = 1e-3;
        let q = DynamicEvaluator::new(&dec, g, &psi0).unwrap().qfi(t).unwrap();
        prop_assert!((q / (t * t) - 4.0 * var).abs() <= 1e-4 * (4.0 * var) + 1e-9, "{} vs {}", q / (t * t), 4.0 * var);
    }
}
