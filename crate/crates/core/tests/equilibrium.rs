use proptest::prelude::*;
use starkqfi::bound::appendix_qfi_sum;
use starkqfi::equilibrium::{qfi_at, qfi_eigen_sum, FieldSign, QfiMethod};
use starkqfi::model::{ProbeModel, ProbeSpec};
use starkqfi::spectral::{eigendecompose, StateSelector};

fn sp(len: usize, rate: f64) -> ProbeModel {
    ProbeModel::new(&ProbeSpec::single_particle(len, rate, 0.0).unwrap()).unwrap()
}

fn mb(len: usize, rate: f64) -> ProbeModel {
    ProbeModel::new(&ProbeSpec::many_body(len, rate, 0.0).unwrap()).unwrap()
}

#[test]
fn plateau_below_the_transition() {
    let model = sp(100, 0.04);
    let values: Vec<f64> = [1e-9, 1e-8, 1e-7]
        .iter()
        .map(|&h| qfi_at(&model, h, FieldSign::Negative, StateSelector::Ground, QfiMethod::EigenSum).unwrap().value)
        .collect();
    let spread = values.iter().fold(0.0f64, |m, v| m.max((v / values[0] - 1.0).abs()));
    assert!(spread < 0.01, "{values:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn eigen_sum_matches_fidelity(len in 4usize..41, rate in 0.01f64..0.2, lh in -3.0f64..0.5, neg in any::<bool>()) {
        let model = sp(len, rate);
        let sign = if neg { FieldSign::Negative } else { FieldSign::Positive };
        let h = 10f64.powf(lh);
        let es = qfi_at(&model, h, sign, StateSelector::Ground, QfiMethod::EigenSum).unwrap().value;
        let fd = qfi_at(&model, h, sign, StateSelector::Ground, QfiMethod::FidelityFd).unwrap().value;
        prop_assert!((es - fd).abs() <= 1e-4 * es, "eigen-sum {es} fd {fd}");
    }

    #[test]
    fn many_body_methods_agree(half in 2usize..5, rate in 0.02f64..0.15, h in 0.05f64..3.0) {
        let model = mb(2 * half, rate);
        let es = qfi_at(&model, h, FieldSign::Positive, StateSelector::Ground, QfiMethod::EigenSum).unwrap().value;
        let fd = qfi_at(&model, h, FieldSign::Positive, StateSelector::Ground, QfiMethod::FidelityFd).unwrap().value;
        prop_assert!((es - fd).abs() <= 1e-4 * es, "eigen-sum {es} fd {fd}");
    }

    #[test]
    fn zero_field_equals_closed_spectral_sum(len in 3usize..200, rate in 0.005f64..0.3) {
        let q = qfi_at(&sp(len, rate), 0.0, FieldSign::Positive, StateSelector::Ground, QfiMethod::EigenSum).unwrap().value;
        let closed = appendix_qfi_sum(len, rate).unwrap();
        prop_assert!((q - closed).abs() <= 1e-8 * closed);
    }

    #[test]
    fn scaled_generator_scales_quadratically(len in 4usize..60, rate in 0.01f64..0.2, h in 0.0f64..1.0, c in 0.1f64..10.0) {
        let model = sp(len, rate);
        let dec = eigendecompose(&model.hamiltonian(h)).unwrap();
        let g: Vec<f64> = model.generator().to_vec();
        let scaled: Vec<f64> = g.iter().map(|x| c * x).collect();
        let f1 = qfi_eigen_sum(&dec, &g, 0).unwrap().value;
        let fc = qfi_eigen_sum(&dec, &scaled, 0).unwrap().value;
        prop_assert!((fc - c * c * f1).abs() <= 1e-10 * fc);
    }

    #[test]
    fn qfi_is_non_negative(len in 2usize..50, rate in 0.0f64..0.3, h in -2.0f64..2.0, pick in 0.0f64..1.0) {
        let model = sp(len, rate);
        let k = ((len - 1) as f64 * pick) as usize;
        let q = qfi_at(&model, h, FieldSign::Positive, StateSelector::Index(k), QfiMethod::EigenSum);
        if let Ok(q) = q {
            prop_assert!(q.value >= 0.0 && q.value.is_finite());
        }
    }
}

#[test]
fn large_sector_uses_the_sparse_path() {
    let model = mb(16, 0.1);
    assert!(model.decompose(0.0).is_err());
    let q = qfi_at(&model, 0.0, FieldSign::Positive, StateSelector::Ground, QfiMethod::FidelityFd).unwrap();
    assert!(q.value > 1e4 && q.value < 2e4, "{}", q.value);
}
