//! QFI of a single eigenstate: eigenbasis sum, fidelity finite differences,
//! field sweeps and transition-point extraction.

use crate::error::{invalid, Error, Result};
use crate::model::{ProbeModel, ProbeSpec};
use crate::scaling::{fit_power_law, FitResult};
use crate::spectral::{dot, lowest_eigenpair, EigenDecomposition, StateSelector};

pub use crate::model::DENSE_LIMIT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QfiMethod {
    EigenSum,
    FidelityFd,
    Dynamic,
}

impl QfiMethod {
    pub fn label(self) -> &'static str {
        match self {
            Self::EigenSum => "eigen-sum",
            Self::FidelityFd => "fidelity-fd",
            Self::Dynamic => "dynamic",
        }
    }
}

impl std::str::FromStr for QfiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eigen-sum" | "eigensum" => Ok(Self::EigenSum),
            "fidelity-fd" | "fd" => Ok(Self::FidelityFd),
            "dynamic" => Ok(Self::Dynamic),
            other => Err(invalid("method", format!("unknown method `{other}`"))),
        }
    }
}

/// Orientation of the applied field: the Hamiltonian is built at `sign * h`.
///
/// The QFI with respect to `h` does not depend on the sign, but which eigenstate
/// is the ground state does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FieldSign {
    #[default]
    Positive,
    Negative,
}

impl FieldSign {
    pub fn factor(self) -> f64 {
        match self {
            Self::Positive => 1.0,
            Self::Negative => -1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Positive => "+1",
            Self::Negative => "-1",
        }
    }
}

impl std::str::FromStr for FieldSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+1" | "1" | "+" | "positive" => Ok(Self::Positive),
            "-1" | "-" | "negative" => Ok(Self::Negative),
            other => Err(invalid("field_sign", format!("expected +1 or -1, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSumQfi {
    pub value: f64,
    /// Degenerate partners with vanishing coupling that were left out of the sum.
    pub excluded: usize,
}

/// `4 sum_{k != l} |<k|H0|l>|^2 / (E_k - E_l)^2`.
pub fn qfi_eigen_sum(decomp: &EigenDecomposition, generator: &[f64], l: usize) -> Result<EigenSumQfi> {
    let n = decomp.dim();
    if l >= n {
        return Err(Error::IndexOutOfRange { index: l, dim: n });
    }
    if generator.len() != n {
        return Err(invalid("generator", format!("length {} does not match dimension {n}", generator.len())));
    }
    let tol = decomp.degeneracy_tolerance();
    let gmax = generator.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let elems = decomp.diagonal_matrix_elements(generator, l);
    let el = decomp.energy(l);
    let mut multiplet = vec![];
    let mut excluded = 0;
    let mut sum = 0.0;
    for (k, m) in elems.iter().enumerate() {
        if k == l {
            continue;
        }
        let w = decomp.energy(k) - el;
        if w.abs() < tol {
            if m.abs() > 1e-10 * gmax {
                multiplet.push(k);
            } else {
                excluded += 1;
            }
            continue;
        }
        sum += (m / w) * (m / w);
    }
    if !multiplet.is_empty() {
        multiplet.push(l);
        multiplet.sort_unstable();
        return Err(Error::DegenerateState { target: l, multiplet });
    }
    Ok(EigenSumQfi {
        value: 4.0 * sum,
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdQfi {
    pub value: f64,
    pub dh: f64,
}

pub fn default_fd_step(h: f64) -> f64 {
    1e-6f64.max(1e-4 * h.abs())
}

const FD_AGREEMENT: f64 = 1e-4;
/// Absolute noise floor below which two finite-difference estimates are both zero.
const FD_FLOOR: f64 = 1e-10;

/// Fidelity susceptibility from eigenvectors at `h +- dh` and `h +- dh/2`,
/// combined by one Richardson step.
///
/// Uses `2 (1 - |<a|b>|) = ||a - s b||^2` with `s = sign <a|b>` so the small
/// infidelity is never formed by cancellation.
pub fn fidelity_fd_with<F>(state_at: F, h: f64, dh: f64) -> Result<FdQfi>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    if !(dh > 0.0 && dh.is_finite()) {
        return Err(invalid("dh", format!("must be positive, got {dh}")));
    }
    let estimate = |d: f64| -> Result<f64> {
        let minus = state_at(h - d)?;
        let plus = state_at(h + d)?;
        let overlap = dot(&minus, &plus);
        if overlap.abs() < 0.5 {
            return Err(Error::LevelCrossing { overlap: overlap.abs(), dh: d });
        }
        let s = overlap.signum();
        let dist2: f64 = plus.iter().zip(&minus).map(|(p, m)| (p - s * m).powi(2)).sum();
        Ok(dist2 / (d * d))
    };
    let coarse = estimate(dh)?;
    let fine = estimate(dh / 2.0)?;
    if (coarse - fine).abs() > FD_AGREEMENT * coarse.max(fine) + FD_FLOOR {
        return Err(Error::FiniteDifferenceMismatch { coarse, fine });
    }
    Ok(FdQfi {
        value: ((4.0 * fine - coarse) / 3.0).max(0.0),
        dh,
    })
}

/// Selected eigenvector of `H(field)`; Lanczos for the ground state of large sectors.
pub fn state_vector(model: &ProbeModel, field: f64, which: StateSelector) -> Result<Vec<f64>> {
    if model.dim() > DENSE_LIMIT {
        if which.index(model.dim())? != 0 {
            return Err(invalid("state", "only the ground state is available above the dense limit"));
        }
        let h = model
            .sparse_hamiltonian(field)
            .ok_or_else(|| invalid("dim", "single-particle chain above the dense limit"))?;
        let norm = h.norm_inf();
        let start: Vec<f64> = (0..model.dim()).map(|i| 1.0 + 0.1 * (i as f64).sin()).collect();
        let (_, v) = lowest_eigenpair(model.dim(), norm, |x, y| h.apply(x, y), &start)?;
        return Ok(v);
    }
    let dec = model.decompose(field)?;
    let k = which.index(dec.dim())?;
    Ok(dec.vector(k).to_vec())
}

pub fn qfi_fidelity_fd(model: &ProbeModel, field: f64, dh: Option<f64>, which: StateSelector) -> Result<FdQfi> {
    let dh = dh.unwrap_or_else(|| default_fd_step(field));
    fidelity_fd_with(|x| state_vector(model, x, which), field, dh)
}

/// One equilibrium evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointQfi {
    pub value: f64,
    pub excluded: usize,
    pub dh: Option<f64>,
}

/// QFI of the selected eigenstate at field magnitude `h` oriented by `sign`.
pub fn qfi_at(model: &ProbeModel, h: f64, sign: FieldSign, which: StateSelector, method: QfiMethod) -> Result<PointQfi> {
    let field = sign.factor() * h;
    match method {
        QfiMethod::EigenSum => {
            if model.dim() > DENSE_LIMIT {
                return Err(invalid("method", "eigen-sum needs a full decomposition; use fidelity-fd"));
            }
            let dec = model.decompose(field)?;
            let l = which.index(dec.dim())?;
            let q = qfi_eigen_sum(&dec, model.generator(), l)?;
            Ok(PointQfi {
                value: q.value,
                excluded: q.excluded,
                dh: None,
            })
        }
        QfiMethod::FidelityFd => {
            let q = qfi_fidelity_fd(model, field, None, which)?;
            Ok(PointQfi {
                value: q.value,
                excluded: 0,
                dh: Some(q.dh),
            })
        }
        QfiMethod::Dynamic => Err(invalid("method", "dynamic QFI is not an equilibrium method")),
    }
}

/// Sampled `h -> F_Q` for one probe.
#[derive(Debug, Clone, PartialEq)]
pub struct QfiCurve {
    pub spec: ProbeSpec,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub method: QfiMethod,
}

impl QfiCurve {
    pub fn new(spec: ProbeSpec, grid: Vec<f64>, values: Vec<f64>, method: QfiMethod) -> Result<Self> {
        check_grid(&grid)?;
        if grid.len() != values.len() {
            return Err(invalid("values", "grid and values differ in length"));
        }
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0)) {
            return Err(Error::NegativeQfi { value: values[i] });
        }
        Ok(Self {
            spec,
            grid,
            values,
            method,
        })
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("h_grid", "grid is empty"));
    }
    if grid.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(invalid("h_grid", "grid values must be positive"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("h_grid", "grid must be strictly ascending"));
    }
    Ok(())
}

pub fn sweep_equilibrium(
    template: &ProbeSpec,
    grid: &[f64],
    which: StateSelector,
    method: QfiMethod,
    sign: FieldSign,
) -> Result<QfiCurve> {
    check_grid(grid)?;
    let model = ProbeModel::new(template)?;
    let values = grid
        .iter()
        .map(|&h| {
            qfi_at(&model, h, sign, which, method)
                .map(|p| p.value)
                .map_err(|e| Error::AtField { h, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    QfiCurve::new(*template, grid.to_vec(), values, method)
}

/// Peak position from a three-point parabola in `(ln h, ln F)` around the grid maximum.
pub fn find_transition(curve: &QfiCurve) -> Result<f64> {
    let n = curve.values.len();
    let mut best = 0;
    for (i, v) in curve.values.iter().enumerate() {
        if *v > curve.values[best] {
            best = i;
        }
    }
    if best == 0 || best + 1 == n {
        return Err(Error::PeakOnBoundary { index: best });
    }
    let x: Vec<f64> = curve.grid[best - 1..=best + 1].iter().map(|h| h.ln()).collect();
    let mut y = [0.0; 3];
    for (i, v) in curve.values[best - 1..=best + 1].iter().enumerate() {
        if *v <= 0.0 {
            return Ok(curve.grid[best]);
        }
        y[i] = v.ln();
    }
    Ok(parabola_vertex(&x, &y).exp())
}

fn parabola_vertex(x: &[f64], y: &[f64; 3]) -> f64 {
    let (x0, x1, x2) = (x[0], x[1], x[2]);
    let (y0, y1, y2) = (y[0], y[1], y[2]);
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 {
        return x1;
    }
    let v = x1 - 0.5 * num / den;
    v.clamp(x0, x2)
}

/// Golden-section maximization of `f` over `ln h` in `[lo, hi]`.
///
/// Returns `(h_max, f(h_max))` once the bracket is narrower than `rel_tol` in `ln h`.
pub fn refine_peak<F>(mut f: F, lo: f64, hi: f64, rel_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo > 0.0 && hi > lo) {
        return Err(invalid("bracket", format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c.exp())?;
    let mut fd = f(d.exp())?;
    while b - a > rel_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c.exp())?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d.exp())?;
        }
    }
    Ok(if fc >= fd { (c.exp(), fc) } else { (d.exp(), fd) })
}

/// How the coarse maximum of a sampled curve is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeakRule {
    /// Grid argmax; an error if it sits on the boundary.
    GlobalMax,
    /// Highest interior point that beats both neighbours by a relative margin.
    /// Picks the transition bump even when a plateau at small `h` is higher.
    HighestInterior,
}

const PROMINENCE: f64 = 1e-8;

/// Index of the coarse peak of `values` under `rule`.
pub fn coarse_peak(values: &[f64], rule: PeakRule) -> Result<usize> {
    let n = values.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    match rule {
        PeakRule::GlobalMax => {
            let mut best = 0;
            for (i, v) in values.iter().enumerate() {
                if *v > values[best] {
                    best = i;
                }
            }
            if best == 0 || best + 1 == n {
                return Err(Error::PeakOnBoundary { index: best });
            }
            Ok(best)
        }
        PeakRule::HighestInterior => {
            let mut best: Option<usize> = None;
            for i in 1..n - 1 {
                let v = values[i];
                let margin = PROMINENCE * v.abs();
                if v > values[i - 1] + margin && v > values[i + 1] + margin {
                    if best.map_or(true, |b| v > values[b]) {
                        best = Some(i);
                    }
                }
            }
            best.ok_or(Error::PeakOnBoundary { index: 0 })
        }
    }
}

/// A located maximum of `h -> F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub h_max: f64,
    pub value: f64,
    /// Grid index of the coarse maximum.
    pub index: usize,
}

/// Coarse scan of `f` over `grid`, then golden-section refinement in `ln h`
/// between the neighbours of the coarse maximum.
pub fn locate_peak<F>(f: F, grid: &[f64], rule: PeakRule, rel_tol: f64) -> Result<Peak>
where
    F: Fn(f64) -> Result<f64>,
{
    check_grid(grid)?;
    let values = grid
        .iter()
        .map(|&h| f(h).map_err(|e| Error::AtField { h, source: Box::new(e) }))
        .collect::<Result<Vec<_>>>()?;
    let i = coarse_peak(&values, rule)?;
    let (h, v) = refine_peak(|h| f(h).map(|v| v.max(f64::MIN_POSITIVE).ln()), grid[i - 1], grid[i + 1], rel_tol)?;
    let v = v.exp();
    if v >= values[i] {
        Ok(Peak { h_max: h, value: v, index: i })
    } else {
        Ok(Peak {
            h_max: grid[i],
            value: values[i],
            index: i,
        })
    }
}

/// Slope of `ln F` against `ln (h - h_max)` inside `[window.0, window.1]`.
pub fn fit_localized_decay(curve: &QfiCurve, h_max: f64, window: (f64, f64)) -> Result<FitResult> {
    if window.0 <= h_max || window.1 <= window.0 {
        return Err(invalid("window", "window must lie strictly above h_max"));
    }
    let (mut x, mut y) = (vec![], vec![]);
    for (&h, &v) in curve.grid.iter().zip(&curve.values) {
        if h >= window.0 && h <= window.1 {
            x.push(h - h_max);
            y.push(v);
        }
    }
    if x.len() < 5 {
        return Err(Error::TooFewPoints { needed: 5, got: x.len() });
    }
    fit_power_law(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::log_grid;
    use crate::model::ProbeSpec;

    #[test]
    fn two_site_closed_form() {
        for a in [0.0, 0.3, 2f64.ln()] {
            let want = ((a as f64).exp() - (2.0 * a as f64).exp()).powi(2) / 4.0;
            for spec in [
                ProbeSpec::single_particle(2, a, 0.0).unwrap(),
                ProbeSpec::many_body(2, a, 0.0).unwrap(),
            ] {
                let model = ProbeModel::new(&spec).unwrap();
                let q = qfi_at(&model, 0.0, FieldSign::Positive, StateSelector::Ground, QfiMethod::EigenSum).unwrap();
                assert!((q.value - want).abs() <= 1e-14 * want.max(1.0), "a = {a}");
            }
        }
    }

    #[test]
    fn fd_two_site() {
        let spec = ProbeSpec::single_particle(2, 2f64.ln(), 0.0).unwrap();
        let model = ProbeModel::new(&spec).unwrap();
        let q = qfi_fidelity_fd(&model, 0.0, Some(1e-4), StateSelector::Ground).unwrap();
        assert!((q.value - 1.0).abs() < 1e-6);
        let flat = ProbeModel::new(&ProbeSpec::single_particle(6, 0.0, 0.0).unwrap()).unwrap();
        let z = qfi_fidelity_fd(&flat, 1e-8, None, StateSelector::Ground).unwrap();
        assert!(z.value.abs() < 1e-6);
    }

    #[test]
    fn fd_matches_eigen_sum() {
        let model = ProbeModel::new(&ProbeSpec::single_particle(50, 0.04, 0.0).unwrap()).unwrap();
        let e = qfi_at(&model, 1e-6, FieldSign::Positive, StateSelector::Ground, QfiMethod::EigenSum).unwrap();
        let f = qfi_at(&model, 1e-6, FieldSign::Positive, StateSelector::Ground, QfiMethod::FidelityFd).unwrap();
        assert!(((e.value - f.value) / e.value).abs() < 1e-6, "{} vs {}", e.value, f.value);
    }

    #[test]
    fn degenerate_target_is_an_error() {
        let dec = crate::spectral::eigendecompose(&crate::matrix::SymMatrix::diagonal(&[1.0, 1.0, 2.0]).into()).unwrap();
        let mut g = vec![0.0; 3];
        g[0] = 1.0;
        // diagonal generator: the degenerate partner is uncoupled, so it is excluded
        let ok = qfi_eigen_sum(&dec, &g, 0).unwrap();
        assert_eq!(ok.excluded, 1);
        assert_eq!(ok.value, 0.0);
        let t = crate::matrix::Tridiagonal::new(vec![0.0, 0.0, 5.0], vec![1e-30, 0.0]).unwrap();
        let dec = crate::spectral::eigendecompose_tridiagonal(&t).unwrap();
        let g = [1.0, -1.0, 0.0];
        match qfi_eigen_sum(&dec, &g, 0) {
            Err(Error::DegenerateState { target: 0, multiplet }) => assert_eq!(multiplet, vec![0, 1]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn transition_of_synthetic_peak() {
        let grid = log_grid(1e-4, 1.0, 41).unwrap();
        let values: Vec<f64> = grid.iter().map(|h| (-(h.ln() - 0.01f64.ln()).powi(2)).exp()).collect();
        let spec = ProbeSpec::single_particle(2, 0.1, 0.0).unwrap();
        let curve = QfiCurve::new(spec, grid.clone(), values, QfiMethod::EigenSum).unwrap();
        let h = find_transition(&curve).unwrap();
        assert!((h.ln() - 0.01f64.ln()).abs() < 1e-10);
        let mono = QfiCurve::new(spec, grid.clone(), grid.clone(), QfiMethod::EigenSum).unwrap();
        assert!(matches!(find_transition(&mono), Err(Error::PeakOnBoundary { index: 40 })));
        let (hp, _) = refine_peak(|h| Ok(-(h.ln() - 0.01f64.ln()).powi(2)), 1e-4, 1.0, 1e-8).unwrap();
        assert!((hp / 0.01 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn peak_rules() {
        let plateau_then_bump = [5.0, 5.0, 4.9, 3.0, 4.0, 1.0, 0.5];
        assert!(matches!(coarse_peak(&plateau_then_bump, PeakRule::GlobalMax), Err(Error::PeakOnBoundary { .. })));
        assert_eq!(coarse_peak(&plateau_then_bump, PeakRule::HighestInterior).unwrap(), 4);
        let grid = log_grid(1e-3, 1e3, 25).unwrap();
        let f = |h: f64| Ok((-(h.ln() - 2f64.ln()).powi(2) / 4.0).exp());
        let p = locate_peak(f, &grid, PeakRule::GlobalMax, 1e-9).unwrap();
        assert!((p.h_max / 2.0 - 1.0).abs() < 1e-4);
        assert!((p.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn decay_fit_on_exact_law() {
        let hm = 0.01;
        let grid = log_grid(0.1, 10.0, 20).unwrap();
        let values = grid.iter().map(|h| (h - hm).powi(-2)).collect();
        let spec = ProbeSpec::single_particle(2, 0.1, 0.0).unwrap();
        let curve = QfiCurve::new(spec, grid, values, QfiMethod::EigenSum).unwrap();
        let fit = fit_localized_decay(&curve, hm, (0.1, 10.0)).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-10);
        assert!(matches!(
            fit_localized_decay(&curve, hm, (0.1, 0.2)),
            Err(Error::TooFewPoints { needed: 5, .. })
        ));
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let spec = ProbeSpec::single_particle(4, 0.1, 0.0).unwrap();
        for g in [vec![], vec![1.0, 0.5], vec![-1.0, 1.0]] {
            assert!(sweep_equilibrium(&spec, &g, StateSelector::Ground, QfiMethod::EigenSum, FieldSign::Positive).is_err());
        }
        let flat = ProbeSpec::single_particle(5, 0.0, 0.0).unwrap();
        let c = sweep_equilibrium(&flat, &[0.1, 1.0], StateSelector::Ground, QfiMethod::EigenSum, FieldSign::Positive)
            .unwrap();
        assert!(c.values.iter().all(|v| *v < 1e-20));
    }
}
