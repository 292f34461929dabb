use proptest::prelude::*;
use starkqfi::scaling::{fit_exponential_in_l, fit_power_law, meta_fit_linear_in_a};

proptest! {
    #[test]
    fn exact_exponential_is_recovered(beta in -0.5f64..0.5, c in 1e-6f64..1e6, start in 2usize..100, n in 3usize..30) {
        let lens: Vec<f64> = (0..n).map(|i| (start + 10 * i) as f64).collect();
        let values: Vec<f64> = lens.iter().map(|l| c * (beta * l).exp()).collect();
        let fit = fit_exponential_in_l(&lens, &values).unwrap();
        prop_assert!((fit.slope - beta).abs() <= 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() <= 1e-8);
        prop_assert!(fit.r_squared > 1.0 - 1e-12 || beta.abs() < 1e-9);
    }

    #[test]
    fn exact_power_law_is_recovered(p in -4.0f64..4.0, c in 1e-3f64..1e3, n in 3usize..20) {
        let x: Vec<f64> = (1..=n).map(|i| 5.0 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|x| c * x.powf(p)).collect();
        prop_assert!((fit_power_law(&x, &y).unwrap().slope - p).abs() <= 1e-10);
    }

    #[test]
    fn proportional_exponents_have_zero_offset(c in 0.1f64..5.0) {
        let a = [0.02, 0.03, 0.04, 0.05];
        let b: Vec<f64> = a.iter().map(|a| c * a).collect();
        let fit = meta_fit_linear_in_a(&a, &b).unwrap();
        prop_assert!((fit.slope - c).abs() <= 1e-10);
        prop_assert!(fit.intercept.abs() <= 1e-12);
    }
}
