//! Exact spectral time evolution, the field derivative of the evolved state and
//! the time-dependent QFI.

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::model::{ProbeClass, ProbeModel, ProbeSpec, SectorBasis};
use crate::spectral::EigenDecomposition;

/// `|omega t|` below which `(e^{i omega t} - 1) / (i omega)` switches to its series.
pub const SERIES_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// Single excitation on site `ceil(L / 2)`.
    CenterSite,
    /// `up, down, up, ...` with site 1 up.
    Neel,
}

impl std::str::FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "center" | "center-site" => Ok(Self::CenterSite),
            "neel" => Ok(Self::Neel),
            other => Err(invalid("initial", format!("unknown initial state `{other}`"))),
        }
    }
}

impl InitialState {
    pub fn label(self) -> &'static str {
        match self {
            Self::CenterSite => "center-site",
            Self::Neel => "neel",
        }
    }

    pub fn default_for(class: ProbeClass) -> Self {
        match class {
            ProbeClass::SingleParticle => Self::CenterSite,
            ProbeClass::ManyBody => Self::Neel,
        }
    }
}

/// Index of the initial basis state in the working basis.
pub fn initial_index(spec: &ProbeSpec, kind: InitialState) -> Result<usize> {
    match (spec.class, kind) {
        (ProbeClass::SingleParticle, InitialState::CenterSite) => Ok(spec.len.div_ceil(2) - 1),
        (ProbeClass::ManyBody, InitialState::Neel) => {
            let basis = SectorBasis::new(spec.len)?;
            let sites: Vec<usize> = (1..=spec.len).step_by(2).collect();
            let pattern = SectorBasis::pattern_from_sites(&sites);
            basis
                .index_of(pattern)
                .ok_or_else(|| invalid("initial", "Neel pattern is outside the sector"))
        }
        (ProbeClass::SingleParticle, InitialState::Neel) => Err(Error::WrongProbeClass { expected: "many-body" }),
        (ProbeClass::ManyBody, InitialState::CenterSite) => Err(Error::WrongProbeClass {
            expected: "single-particle",
        }),
    }
}

pub fn initial_state(spec: &ProbeSpec, kind: InitialState) -> Result<Vec<C64>> {
    let idx = initial_index(spec, kind)?;
    let dim = match spec.class {
        ProbeClass::SingleParticle => spec.len,
        ProbeClass::ManyBody => SectorBasis::new(spec.len)?.dim(),
    };
    let mut v = vec![C64::new(0.0, 0.0); dim];
    v[idx] = C64::new(1.0, 0.0);
    Ok(v)
}

fn check_state(decomp: &EigenDecomposition, psi0: &[C64]) -> Result<()> {
    if psi0.len() != decomp.dim() {
        return Err(invalid("psi0", format!("length {} does not match dimension {}", psi0.len(), decomp.dim())));
    }
    let norm: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(invalid("psi0", format!("state is not normalized: |psi0|^2 = {norm}")));
    }
    Ok(())
}

/// Eigenbasis coefficients `<E_k|psi>` of a complex vector.
pub fn coefficients(decomp: &EigenDecomposition, psi: &[C64]) -> Vec<C64> {
    (0..decomp.dim())
        .map(|k| {
            decomp
                .vector(k)
                .iter()
                .zip(psi)
                .fold(C64::new(0.0, 0.0), |acc, (u, z)| acc + z * *u)
        })
        .collect()
}

fn to_site_basis(decomp: &EigenDecomposition, coeffs: &[C64]) -> Vec<C64> {
    let n = decomp.dim();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (k, c) in coeffs.iter().enumerate() {
        for (o, u) in out.iter_mut().zip(decomp.vector(k)) {
            *o += c * *u;
        }
    }
    out
}

/// `psi(t) = sum_k e^{-i E_k t} <E_k|psi0> |E_k>`.
pub fn evolve(decomp: &EigenDecomposition, psi0: &[C64], t: f64) -> Result<Vec<C64>> {
    check_state(decomp, psi0)?;
    if t == 0.0 {
        return Ok(psi0.to_vec());
    }
    let c: Vec<C64> = coefficients(decomp, psi0)
        .into_iter()
        .zip(decomp.energies())
        .map(|(c, e)| c * C64::from_polar(1.0, -e * t))
        .collect();
    Ok(to_site_basis(decomp, &c))
}

/// `(e^{i w t} - 1) / (i w)`.
pub fn tau(omega: f64, t: f64) -> C64 {
    let x = omega * t;
    if x.abs() < SERIES_GUARD {
        C64::new(t, omega * t * t / 2.0)
    } else {
        (C64::from_polar(1.0, x) - 1.0) / C64::new(0.0, omega)
    }
}

/// Evolved state and its derivative with respect to the field.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePair {
    pub psi: Vec<C64>,
    pub dpsi: Vec<C64>,
}

/// `d/dh psi(t)` from the exact spectral Duhamel formula, summing every pair directly.
pub fn dh_state_spectral(decomp: &EigenDecomposition, generator: &[f64], psi0: &[C64], t: f64) -> Result<StatePair> {
    check_state(decomp, psi0)?;
    let n = decomp.dim();
    if generator.len() != n {
        return Err(invalid("generator", "length does not match dimension"));
    }
    let c = coefficients(decomp, psi0);
    let m = decomp.transform_diagonal(generator);
    let e = decomp.energies();
    let mut g = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for l in 0..n {
            acc += c[l] * (m[k * n + l] * tau(e[k] - e[l], t));
        }
        g[k] = acc;
    }
    let phase: Vec<C64> = e.iter().map(|ek| C64::from_polar(1.0, -ek * t)).collect();
    let psi_c: Vec<C64> = c.iter().zip(&phase).map(|(c, p)| c * p).collect();
    let dpsi_c: Vec<C64> = g.iter().zip(&phase).map(|(g, p)| C64::new(0.0, -1.0) * p * g).collect();
    Ok(StatePair {
        psi: to_site_basis(decomp, &psi_c),
        dpsi: to_site_basis(decomp, &dpsi_c),
    })
}

const NEGATIVE_SLACK: f64 = 1e-9;

fn clip_qfi(raw: f64, scale: f64) -> Result<f64> {
    if raw >= 0.0 {
        Ok(raw)
    } else if raw >= -NEGATIVE_SLACK * scale.max(1.0) {
        Ok(0.0)
    } else {
        Err(Error::NegativeQfi { value: raw })
    }
}

/// `4 [<dpsi|dpsi> - |<dpsi|psi>|^2]`.
pub fn qfi_dynamic(pair: &StatePair) -> Result<f64> {
    let dd: f64 = pair.dpsi.iter().map(|z| z.norm_sqr()).sum();
    let dp: C64 = pair.dpsi.iter().zip(&pair.psi).map(|(d, p)| d.conj() * p).sum();
    clip_qfi(4.0 * (dd - dp.norm_sqr()), 4.0 * dd)
}

/// `F_Q(t)` at ascending times.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(invalid("values", "times and values differ in length"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("times", "times must be strictly ascending"));
        }
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0)) {
            return Err(Error::NegativeQfi { value: *v });
        }
        Ok(Self { times, values })
    }

    pub fn value_at(&self, t: f64) -> Option<f64> {
        self.times
            .binary_search_by(|x| x.total_cmp(&t))
            .ok()
            .map(|i| self.values[i])
    }
}

/// `1 / (t_max - t_min) * sum_{t = t_min}^{t_max} F_Q(t)` over integer `t`.
///
/// The sum has `t_max - t_min + 1` terms while the prefactor counts intervals.
pub fn time_average(series: &TimeSeries, t_min: u32, t_max: u32) -> Result<f64> {
    if t_max <= t_min {
        return Err(invalid("t_max", "averaging window is empty"));
    }
    let mut sum = 0.0;
    for t in t_min..=t_max {
        sum += series
            .value_at(f64::from(t))
            .ok_or(Error::CoverageGap { missing: f64::from(t) })?;
    }
    Ok(sum / f64::from(t_max - t_min))
}

/// `F_Q(t) / t^2`, dropping `t = 0`.
pub fn normalized_qfi(series: &TimeSeries) -> TimeSeries {
    let (times, values) = series
        .times
        .iter()
        .zip(&series.values)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, v)| (*t, v / (t * t)))
        .unzip();
    TimeSeries { times, values }
}

/// Mean of `F_Q / t^2` over the samples with `t` in `[lo, hi]`.
pub fn late_normalized_qfi(series: &TimeSeries, lo: f64, hi: f64) -> Result<f64> {
    let n = normalized_qfi(series);
    let picked: Vec<f64> = n
        .times
        .iter()
        .zip(&n.values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(_, v)| *v)
        .collect();
    if picked.is_empty() {
        return Err(Error::CoverageGap { missing: lo });
    }
    Ok(picked.iter().sum::<f64>() / picked.len() as f64)
}

/// Pairs closer than this are summed directly instead of through the split form.
const NEAR_PAIR: f64 = 1e-4;

/// Fast evaluation of `F_Q(t)` at many times for one `(H, H0, psi0)`.
///
/// For well-separated pairs `tau_kl = (e^{iE_k t} e^{-iE_l t} - 1) / (i w_kl)`
/// factorizes, so `g(t) = -i e^{iEt} R (c e^{-iEt}) + i R c` with
/// `R_kl = M_kl / w_kl`; the remaining near-degenerate pairs use `tau` directly.
/// Batches of times are one matrix product each.
#[derive(Debug, Clone)]
pub struct DynamicEvaluator {
    energies: Vec<f64>,
    coeffs: Vec<C64>,
    r: faer::Mat<f64>,
    rc: Vec<C64>,
    near: Vec<(usize, usize, f64)>,
}

impl DynamicEvaluator {
    pub fn new(decomp: &EigenDecomposition, generator: &[f64], psi0: &[C64]) -> Result<Self> {
        check_state(decomp, psi0)?;
        let n = decomp.dim();
        if generator.len() != n {
            return Err(invalid("generator", "length does not match dimension"));
        }
        let u = faer::Mat::<f64>::from_fn(n, n, |i, k| decomp.vector(k)[i]);
        let wu = faer::Mat::<f64>::from_fn(n, n, |i, k| generator[i] * decomp.vector(k)[i]);
        let m = u.transpose() * &wu;
        let e = decomp.energies().to_vec();
        let mut near = Vec::new();
        let r = faer::Mat::<f64>::from_fn(n, n, |k, l| {
            let w = e[k] - e[l];
            if w.abs() < NEAR_PAIR {
                0.0
            } else {
                m[(k, l)] / w
            }
        });
        for k in 0..n {
            for l in 0..n {
                if (e[k] - e[l]).abs() < NEAR_PAIR {
                    let mk = m[(k, l)];
                    if mk != 0.0 {
                        near.push((k, l, mk));
                    }
                }
            }
        }
        let coeffs = coefficients(decomp, psi0);
        let rc = matvec_complex(&r, &coeffs);
        Ok(Self {
            energies: e,
            coeffs,
            r,
            rc,
            near,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Number of pairs handled outside the factorized product.
    pub fn near_pairs(&self) -> usize {
        self.near.len()
    }

    fn g_from(&self, t: f64, rv: &[C64]) -> Vec<C64> {
        let mi = C64::new(0.0, -1.0);
        let mut g: Vec<C64> = (0..self.dim())
            .map(|k| mi * C64::from_polar(1.0, self.energies[k] * t) * rv[k] - mi * self.rc[k])
            .collect();
        for &(k, l, m) in &self.near {
            g[k] += self.coeffs[l] * (m * tau(self.energies[k] - self.energies[l], t));
        }
        g
    }

    fn qfi_from_g(&self, g: &[C64]) -> Result<f64> {
        let gg: f64 = g.iter().map(|z| z.norm_sqr()).sum();
        let gc: C64 = g.iter().zip(&self.coeffs).map(|(g, c)| g.conj() * c).sum();
        clip_qfi(4.0 * (gg - gc.norm_sqr()), 4.0 * gg)
    }

    /// Direct pair sum; used when `t` times the bandwidth is small and the
    /// factorized form would cancel.
    fn g_direct(&self, t: f64) -> Vec<C64> {
        let n = self.dim();
        let mut g = vec![C64::new(0.0, 0.0); n];
        for (k, gk) in g.iter_mut().enumerate() {
            for l in 0..n {
                let w = self.energies[k] - self.energies[l];
                let m = if w.abs() < NEAR_PAIR { 0.0 } else { self.r[(k, l)] * w };
                if m != 0.0 {
                    *gk += self.coeffs[l] * (m * tau(w, t));
                }
            }
        }
        for &(k, l, m) in &self.near {
            g[k] += self.coeffs[l] * (m * tau(self.energies[k] - self.energies[l], t));
        }
        g
    }

    fn bandwidth(&self) -> f64 {
        self.energies.last().unwrap_or(&0.0) - self.energies.first().unwrap_or(&0.0)
    }

    pub fn qfi(&self, t: f64) -> Result<f64> {
        Ok(self.qfi_many(&[t])?[0])
    }

    /// `F_Q` at each time; evaluated in blocks of columns.
    pub fn qfi_many(&self, times: &[f64]) -> Result<Vec<f64>> {
        const BLOCK: usize = 128;
        let n = self.dim();
        let mut out = Vec::with_capacity(times.len());
        for chunk in times.chunks(BLOCK) {
            let w = chunk.len();
            // real parts in columns [0, w), imaginary parts in [w, 2w)
            let v = faer::Mat::<f64>::from_fn(n, 2 * w, |l, j| {
                let t = chunk[j % w];
                let z = self.coeffs[l] * C64::from_polar(1.0, -self.energies[l] * t);
                if j < w {
                    z.re
                } else {
                    z.im
                }
            });
            let rv = &self.r * &v;
            for (j, &t) in chunk.iter().enumerate() {
                if t == 0.0 {
                    out.push(0.0);
                    continue;
                }
                if t * self.bandwidth() < 1.0 {
                    out.push(self.qfi_from_g(&self.g_direct(t))?);
                    continue;
                }
                let col: Vec<C64> = (0..n).map(|k| C64::new(rv[(k, j)], rv[(k, j + w)])).collect();
                let g = self.g_from(t, &col);
                out.push(self.qfi_from_g(&g)?);
            }
        }
        Ok(out)
    }

    pub fn series(&self, times: &[f64]) -> Result<TimeSeries> {
        TimeSeries::new(times.to_vec(), self.qfi_many(times)?)
    }
}

fn matvec_complex(r: &faer::Mat<f64>, x: &[C64]) -> Vec<C64> {
    let n = x.len();
    (0..n)
        .map(|k| (0..n).fold(C64::new(0.0, 0.0), |acc, l| acc + x[l] * r[(k, l)]))
        .collect()
}

/// Decomposes `H(field)` and prepares the evaluator for the default initial state.
pub fn evaluator_for(model: &ProbeModel, field: f64, kind: InitialState) -> Result<DynamicEvaluator> {
    let dec = model.decompose(field)?;
    let psi0 = initial_state(model.spec(), kind)?;
    DynamicEvaluator::new(&dec, model.generator(), &psi0)
}

/// Integer times `0, 1, ..., t_max`.
pub fn integer_times(t_max: u32) -> Vec<f64> {
    (0..=t_max).map(f64::from).collect()
}
