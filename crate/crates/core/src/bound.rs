//! Free-chain analysis at `h -> 0`: the geometric cosine sum `C_L(alpha)`, the
//! `N(k) / D(k)` representation of the ground-state QFI, the prefactor
//! `Theta(a, L)`, its large-`L` limit, and the resulting lower bound.

use crate::error::{invalid, Error, Result};
use std::f64::consts::PI;

/// Neumaier-compensated sum.
#[derive(Debug, Default, Clone, Copy)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// `pi / (L + 1)`.
pub fn angle(len: usize) -> f64 {
    PI / (len as f64 + 1.0)
}

/// `sum_{j=1}^{L} e^{a j} cos(j alpha)`, summed term by term.
pub fn c_sum_direct(len: usize, rate: f64, alpha: f64) -> f64 {
    let mut acc = KahanSum::default();
    for j in 1..=len {
        let j = j as f64;
        acc.add((rate * j).exp() * (j * alpha).cos());
    }
    acc.value()
}

/// Geometric-series closed form of [`c_sum_direct`].
pub fn c_sum_closed(len: usize, rate: f64, alpha: f64) -> Result<f64> {
    let r = rate.exp();
    let l = len as f64;
    let den = 1.0 - 2.0 * r * alpha.cos() + r * r;
    if den <= 1e-14 {
        return Err(Error::SingularDenominator { value: den });
    }
    let num = r * alpha.cos() - r * r - (rate * (l + 1.0)).exp() * ((l + 1.0) * alpha).cos()
        + (rate * (l + 2.0)).exp() * (l * alpha).cos();
    Ok(num / den)
}

/// Closed form at `alpha = m pi / (L + 1)` for odd `m`, where
/// `cos((L+1) alpha) = -1` and `cos(L alpha) = -cos(alpha)`.
pub fn c_sum_odd_multiple(len: usize, rate: f64, m: usize) -> Result<f64> {
    if m % 2 == 0 {
        return Err(invalid("m", "the simplification needs an odd multiple of the angle"));
    }
    let r = rate.exp();
    let alpha = m as f64 * angle(len);
    let den = 1.0 - 2.0 * r * alpha.cos() + r * r;
    if den <= 1e-14 {
        return Err(Error::SingularDenominator { value: den });
    }
    let big = (rate * (len as f64 + 1.0)).exp();
    Ok((r * alpha.cos() * (1.0 - big) + (big - r * r)) / den)
}

/// `N(k) = [sum_j e^{a j} sin(j k theta) sin(j theta)]^2`.
pub fn n_term(len: usize, rate: f64, k: usize) -> f64 {
    let th = angle(len);
    let mut acc = KahanSum::default();
    for j in 1..=len {
        let jf = j as f64;
        acc.add((rate * jf).exp() * (jf * k as f64 * th).sin() * (jf * th).sin());
    }
    acc.value().powi(2)
}

/// `D(k) = [cos(k theta) - cos(theta)]^2`, written as a product of sines.
pub fn d_term(len: usize, k: usize) -> f64 {
    let th = angle(len);
    let k = k as f64;
    (2.0 * ((k + 1.0) * th / 2.0).sin() * ((k - 1.0) * th / 2.0).sin()).powi(2)
}

/// `4 / (L+1)^2 * sum_{k=2}^{L} N(k) / D(k)`: the ground-state QFI of the
/// free chain at `h = 0` in closed spectral form.
pub fn appendix_qfi_sum(len: usize, rate: f64) -> Result<f64> {
    if len < 2 {
        return Err(invalid("L", "need at least two sites"));
    }
    let mut acc = KahanSum::default();
    for k in 2..=len {
        acc.add(n_term(len, rate, k) / d_term(len, k));
    }
    Ok(4.0 / (len as f64 + 1.0).powi(2) * acc.value())
}

/// The `k = 2` summand alone, `4 / (L+1)^2 * N(2) / D(2)`.
pub fn k2_term(len: usize, rate: f64) -> Result<f64> {
    if len < 2 {
        return Err(invalid("L", "need at least two sites"));
    }
    Ok(4.0 / (len as f64 + 1.0).powi(2) * n_term(len, rate, 2) / d_term(len, 2))
}

/// `Theta(a, L) = [f(theta) - f(3 theta)]^2 / (cos 2theta - cos theta)^2` with
/// `f(x) = (1 - e^a cos x) / (1 - 2 e^a cos x + e^{2a})`.
///
/// The difference and both denominators are rewritten with half-angle sines so
/// nothing cancels for small `theta`.
pub fn theta_factor(rate: f64, len: usize) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(invalid("a", "Theta needs a > 0"));
    }
    if len < 2 {
        return Err(invalid("L", "need at least two sites"));
    }
    let th = angle(len);
    let r = rate.exp();
    let den = |x: f64| (1.0 - r).powi(2) + 4.0 * r * (x / 2.0).sin().powi(2);
    // f(theta) - f(3 theta) = r (1 - r^2) (cos theta - cos 3theta) / (den1 den3)
    let diff = r * (1.0 - r * r) * 2.0 * (2.0 * th).sin() * th.sin() / (den(th) * den(3.0 * th));
    let gap = 2.0 * (1.5 * th).sin() * (0.5 * th).sin();
    Ok((diff / gap).powi(2))
}

/// `Theta` evaluated literally from the printed expression; reference only.
pub fn theta_factor_naive(rate: f64, len: usize) -> f64 {
    let th = angle(len);
    let r = rate.exp();
    let f = |x: f64| (1.0 - r * x.cos()) / (1.0 - 2.0 * r * x.cos() + r * r);
    ((f(th) - f(3.0 * th)) / ((2.0 * th).cos() - th.cos())).powi(2)
}

/// `(64/9) e^{2a} (e^a + 1)^2 / (e^a - 1)^6`.
pub fn theta_limit(rate: f64) -> Result<f64> {
    if !(rate > 0.0) {
        return Err(invalid("a", "the limit has a pole at a = 0"));
    }
    let r = rate.exp();
    Ok(64.0 / 9.0 * r * r * (r + 1.0).powi(2) / rate.exp_m1().powi(6))
}

/// A positive number carried as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub ln: f64,
}

impl LogValue {
    /// The plain value when it fits in an `f64`.
    pub fn value(self) -> Option<f64> {
        let v = self.ln.exp();
        v.is_finite().then_some(v)
    }

    pub fn log10(self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }

    /// `(m, e)` with `value = m * 10^e` and `1 <= m < 10`.
    pub fn mantissa_exponent(self) -> (f64, i64) {
        let l10 = self.log10();
        let e = l10.floor();
        (10f64.powf(l10 - e), e as i64)
    }
}

/// `4 e^{2a(L+1)} Theta(a, L) / (J^2 (L+1)^2)`.
pub fn qfi_lower_bound(rate: f64, len: usize, hopping: f64) -> Result<LogValue> {
    if !(hopping > 0.0) {
        return Err(invalid("J", "hopping must be positive"));
    }
    let th = theta_factor(rate, len)?;
    let l1 = len as f64 + 1.0;
    Ok(LogValue {
        ln: 4f64.ln() + 2.0 * rate * l1 + th.ln() - 2.0 * hopping.ln() - 2.0 * l1.ln(),
    })
}

/// The same large-`L` estimate of the `k = 2` term with the factor 1/4 from
/// `sin(2x) sin(x) = [cos(x) - cos(3x)] / 2` kept: `e^{2a(L+1)} Theta / (J (L+1))^2`.
pub fn qfi_lower_bound_k2(rate: f64, len: usize, hopping: f64) -> Result<LogValue> {
    let b = qfi_lower_bound(rate, len, hopping)?;
    Ok(LogValue { ln: b.ln - 4f64.ln() })
}
