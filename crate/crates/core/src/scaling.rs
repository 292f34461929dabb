//! Least-squares fits in log space and the derived figures of merit.

use crate::error::{invalid, Error, Result};

/// Outcome of an ordinary least-squares line fit `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Smallest and largest abscissa in the original (untransformed) units.
    pub window: (f64, f64),
    pub n_points: usize,
}

impl FitResult {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Plain OLS on already-transformed coordinates. `window` is taken from `raw_x`.
pub fn linear_fit(x: &[f64], y: &[f64], raw_x: &[f64]) -> Result<FitResult> {
    if x.len() != y.len() {
        return Err(invalid("y", format!("length {} does not match x length {}", y.len(), x.len())));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(invalid("x", "all abscissae coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    let lo = raw_x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = raw_x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        window: (lo, hi),
        n_points: n,
    })
}

fn logs(v: &[f64]) -> Result<Vec<f64>> {
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            if x > 0.0 && x.is_finite() {
                Ok(x.ln())
            } else {
                Err(Error::NonPositive { index: i, value: x })
            }
        })
        .collect()
}

/// `ln F = beta * L + c`.
pub fn fit_exponential_in_l(lens: &[f64], values: &[f64]) -> Result<FitResult> {
    linear_fit(lens, &logs(values)?, lens)
}

/// Same as [`fit_exponential_in_l`] for values already given as natural logs.
pub fn fit_log_values_in_l(lens: &[f64], log_values: &[f64]) -> Result<FitResult> {
    linear_fit(lens, log_values, lens)
}

/// `ln y = p * ln x + c`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<FitResult> {
    linear_fit(&logs(x)?, &logs(y)?, x)
}

/// `beta = c1 * a + c0`; slope is `c1`, intercept `c0`.
pub fn meta_fit_linear_in_a(rates: &[f64], betas: &[f64]) -> Result<FitResult> {
    linear_fit(rates, betas, rates)
}

/// `ln h_max = a' * L + c`.
pub fn fit_hmax_scaling(lens: &[f64], h_max: &[f64]) -> Result<FitResult> {
    fit_exponential_in_l(lens, h_max)
}

/// `ln F = beta * L + p * ln L + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPowerFit {
    pub beta: f64,
    pub power: f64,
    pub intercept: f64,
    pub n_points: usize,
}

/// Exponential fit in `L` with an algebraic prefactor `L^p` fitted alongside.
pub fn fit_exponential_with_power(lens: &[f64], values: &[f64]) -> Result<ExpPowerFit> {
    let n = lens.len();
    if values.len() != n {
        return Err(invalid("values", "length does not match L"));
    }
    if n < 4 {
        return Err(Error::TooFewPoints { needed: 4, got: n });
    }
    let y = logs(values)?;
    let u = logs(lens)?;
    let nf = n as f64;
    let (mx, mu, my) = (
        lens.iter().sum::<f64>() / nf,
        u.iter().sum::<f64>() / nf,
        y.iter().sum::<f64>() / nf,
    );
    let (mut sxx, mut sxu, mut suu, mut sxy, mut suy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, du, dy) = (lens[i] - mx, u[i] - mu, y[i] - my);
        sxx += dx * dx;
        sxu += dx * du;
        suu += du * du;
        sxy += dx * dy;
        suy += du * dy;
    }
    let det = sxx * suu - sxu * sxu;
    if !(det.abs() > 1e-12 * sxx * suu) {
        return Err(invalid("L", "L and ln L are collinear on this grid"));
    }
    let beta = (sxy * suu - suy * sxu) / det;
    let power = (suy * sxx - sxy * sxu) / det;
    Ok(ExpPowerFit {
        beta,
        power,
        intercept: my - beta * mx - power * mu,
        n_points: n,
    })
}

/// Common slope for several groups of `(x, y)` points, each with its own intercept.
///
/// Returns the shared slope, the per-group intercepts, and the pooled r².
pub fn fit_shared_slope(groups: &[(Vec<f64>, Vec<f64>)]) -> Result<(f64, Vec<f64>, f64)> {
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    let mut total = 0;
    let mut means = Vec::with_capacity(groups.len());
    for (x, y) in groups {
        if x.len() != y.len() || x.len() < 2 {
            return Err(Error::TooFewPoints { needed: 2, got: x.len().min(y.len()) });
        }
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        for (xi, yi) in x.iter().zip(y) {
            sxx += (xi - mx) * (xi - mx);
            sxy += (xi - mx) * (yi - my);
            syy += (yi - my) * (yi - my);
        }
        total += x.len();
        means.push((mx, my));
    }
    if total < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: total });
    }
    if sxx == 0.0 {
        return Err(invalid("x", "all abscissae coincide within groups"));
    }
    let slope = sxy / sxx;
    let intercepts = means.iter().map(|(mx, my)| my - slope * mx).collect();
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok((slope, intercepts, r2))
}

/// `F * gap`, i.e. the QFI per unit adiabatic preparation time `1 / gap`.
pub fn rescaled_fom(qfi: f64, gap: f64) -> Result<f64> {
    if gap <= 0.0 || !gap.is_finite() {
        return Err(Error::NonPositive { index: 0, value: gap });
    }
    Ok(qfi * gap)
}

/// Cramér–Rao limit `1 / sqrt(M F)` on the field uncertainty.
pub fn precision_bound(qfi: f64, repetitions: u64) -> Result<f64> {
    if qfi <= 0.0 || !qfi.is_finite() {
        return Err(Error::NonPositive { index: 0, value: qfi });
    }
    if repetitions == 0 {
        return Err(invalid("repetitions", "must be at least 1"));
    }
    Ok(1.0 / (repetitions as f64 * qfi).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let l: Vec<f64> = (10..20).map(f64::from).collect();
        let f: Vec<f64> = l.iter().map(|x| (0.1 * x).exp()).collect();
        let fit = fit_exponential_in_l(&l, &f).unwrap();
        assert!((fit.slope - 0.1).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert_eq!(fit.window, (10.0, 19.0));
        let flat = fit_exponential_in_l(&l, &vec![3.0; l.len()]).unwrap();
        assert!(flat.slope.abs() < 1e-14);
    }

    #[test]
    fn power_law_and_meta() {
        let x = [1.0, 2.0, 5.0, 10.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.powi(-2)).collect();
        assert!((fit_power_law(&x, &y).unwrap().slope + 2.0).abs() < 1e-12);
        let a = [0.02, 0.03, 0.04];
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let m = meta_fit_linear_in_a(&a, &b).unwrap();
        assert!((m.slope - 2.0).abs() < 1e-12 && m.intercept.abs() < 1e-14);
        let h: Vec<f64> = [50.0, 60.0, 70.0].to_vec();
        let hm: Vec<f64> = h.iter().map(|l| (-0.05 * l).exp()).collect();
        assert!((fit_hmax_scaling(&h, &hm).unwrap().slope + 0.05).abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            fit_power_law(&[1.0, 2.0, 3.0], &[1.0, 0.0, 2.0]),
            Err(Error::NonPositive { index: 1, .. })
        ));
        assert!(matches!(
            fit_exponential_in_l(&[1.0], &[1.0]),
            Err(Error::TooFewPoints { needed: 3, got: 1 })
        ));
    }

    #[test]
    fn exponential_with_power() {
        let l: Vec<f64> = (5..30).map(|v| f64::from(v) * 10.0).collect();
        let f: Vec<f64> = l.iter().map(|x| 3.0 * (0.08 * x).exp() * x.powf(-2.0)).collect();
        let fit = fit_exponential_with_power(&l, &f).unwrap();
        assert!((fit.beta - 0.08).abs() < 1e-12);
        assert!((fit.power + 2.0).abs() < 1e-10);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-9);
        assert!(fit_exponential_with_power(&l[..3], &f[..3]).is_err());
    }

    #[test]
    fn shared_slope_recovers_common_exponent() {
        let groups: Vec<(Vec<f64>, Vec<f64>)> = (0..3)
            .map(|g| {
                let x: Vec<f64> = (1..6).map(f64::from).collect();
                let y = x.iter().map(|v| 0.9 * v + g as f64).collect();
                (x, y)
            })
            .collect();
        let (s, c, r2) = fit_shared_slope(&groups).unwrap();
        assert!((s - 0.9).abs() < 1e-12);
        assert!((c[2] - 2.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fom_and_precision() {
        assert_eq!(rescaled_fom(10.0, 0.5).unwrap(), 5.0);
        assert!(rescaled_fom(1.0, 0.0).is_err());
        assert_eq!(precision_bound(1.0, 1).unwrap(), 1.0);
        assert!((precision_bound(100.0, 4).unwrap() - 0.05).abs() < 1e-15);
        let r = precision_bound(7.0, 3).unwrap() / precision_bound(7.0, 12).unwrap();
        assert!((r - 2.0).abs() < 1e-14);
    }
}
