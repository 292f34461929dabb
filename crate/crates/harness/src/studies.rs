//! Per-point computations behind the sweeps and the scaling studies.

use starkqfi::bound::{qfi_lower_bound, qfi_lower_bound_k2};
use starkqfi::dynamic::{initial_state, late_normalized_qfi, time_average, DynamicEvaluator, InitialState};
use starkqfi::equilibrium::{locate_peak, qfi_at, qfi_fidelity_fd, FieldSign, Peak, PeakRule, QfiMethod};
use starkqfi::model::{ProbeClass, ProbeModel, ProbeSpec};
use starkqfi::scaling::{fit_exponential_in_l, fit_hmax_scaling, meta_fit_linear_in_a, FitResult};
use starkqfi::spectral::{energy_gap, StateSelector};
use starkqfi::Result;

use crate::config::{BoundVariant, MethodChoice};

pub fn probe_spec(probe: ProbeClass, len: usize, rate: f64) -> Result<ProbeSpec> {
    match probe {
        ProbeClass::SingleParticle => ProbeSpec::single_particle(len, rate, 0.0),
        ProbeClass::ManyBody => ProbeSpec::many_body(len, rate, 0.0),
    }
}

pub fn probe_model(probe: ProbeClass, len: usize, rate: f64) -> Result<ProbeModel> {
    ProbeModel::new(&probe_spec(probe, len, rate)?)
}

/// How an equilibrium QFI value is obtained.
#[derive(Debug, Clone, Copy)]
pub struct EqSettings {
    pub state: StateSelector,
    pub sign: FieldSign,
    pub method: MethodChoice,
    pub fd_dh: Option<f64>,
}

impl EqSettings {
    pub fn ground(sign: FieldSign) -> Self {
        Self {
            state: StateSelector::Ground,
            sign,
            method: MethodChoice::Auto,
            fd_dh: None,
        }
    }

    pub fn method_for(&self, model: &ProbeModel) -> QfiMethod {
        self.method.resolve(model.dim())
    }

    pub fn qfi(&self, model: &ProbeModel, h: f64) -> Result<f64> {
        let method = self.method_for(model);
        match (method, self.fd_dh) {
            (QfiMethod::FidelityFd, Some(dh)) => {
                Ok(qfi_fidelity_fd(model, self.sign.factor() * h, Some(dh), self.state)?.value)
            }
            _ => Ok(qfi_at(model, h, self.sign, self.state, method)?.value),
        }
    }
}

/// Figure of merit extracted from a dynamic `F_Q(t)` series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DynFom {
    /// Time average over integer `t` in `[t_min, t_max]`.
    Average { t_min: u32, t_max: u32 },
    /// Mean of `F_Q / t^2` over integer `t` in `[lo, hi]`.
    LateNormalized { lo: f64, hi: f64 },
}

impl DynFom {
    pub fn column(&self) -> &'static str {
        match self {
            Self::Average { .. } => "qfi_avg",
            Self::LateNormalized { .. } => "qfi_over_t2_peak",
        }
    }

    pub fn times(&self) -> Vec<f64> {
        match *self {
            Self::Average { t_min, t_max } => (t_min..=t_max).map(f64::from).collect(),
            Self::LateNormalized { lo, hi } => {
                let (a, b) = (lo.ceil() as u64, hi.floor() as u64);
                (a..=b).map(|t| t as f64).collect()
            }
        }
    }

    pub fn eval(&self, ev: &DynamicEvaluator) -> Result<f64> {
        let series = ev.series(&self.times())?;
        match *self {
            Self::Average { t_min, t_max } => time_average(&series, t_min, t_max),
            Self::LateNormalized { lo, hi } => late_normalized_qfi(&series, lo, hi),
        }
    }
}

/// Dynamic setup for one probe class.
#[derive(Debug, Clone, Copy)]
pub struct DynSettings {
    pub initial: InitialState,
    pub sign: FieldSign,
    pub fom: DynFom,
}

impl DynSettings {
    pub fn evaluator(&self, model: &ProbeModel, h: f64) -> Result<DynamicEvaluator> {
        let dec = model.decompose(self.sign.factor() * h)?;
        let psi0 = initial_state(model.spec(), self.initial)?;
        DynamicEvaluator::new(&dec, model.generator(), &psi0)
    }

    pub fn fom(&self, model: &ProbeModel, h: f64) -> Result<f64> {
        self.fom.eval(&self.evaluator(model, h)?)
    }
}

/// Peak search settings: coarse grid, selection rule and refinement width in `ln h`.
#[derive(Debug, Clone)]
pub struct PeakSearch {
    pub grid: Vec<f64>,
    pub rule: PeakRule,
    pub tol: f64,
}

/// One `(a, L)` point of a scaling study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub rate: f64,
    pub len: usize,
    pub value_h0: f64,
    pub peak: Option<Peak>,
}

pub fn eq_scaling_point(
    probe: ProbeClass,
    rate: f64,
    len: usize,
    settings: &EqSettings,
    h_zero: f64,
    search: Option<&PeakSearch>,
) -> Result<ScalingRow> {
    let model = probe_model(probe, len, rate)?;
    let value_h0 = settings.qfi(&model, h_zero)?;
    let peak = search
        .map(|s| locate_peak(|h| settings.qfi(&model, h), &s.grid, s.rule, s.tol))
        .transpose()?;
    Ok(ScalingRow {
        rate,
        len,
        value_h0,
        peak,
    })
}

pub fn dyn_scaling_point(
    probe: ProbeClass,
    rate: f64,
    len: usize,
    settings: &DynSettings,
    h_zero: f64,
    search: Option<&PeakSearch>,
) -> Result<ScalingRow> {
    let model = probe_model(probe, len, rate)?;
    let value_h0 = settings.fom(&model, h_zero)?;
    let peak = search
        .map(|s| locate_peak(|h| settings.fom(&model, h), &s.grid, s.rule, s.tol))
        .transpose()?;
    Ok(ScalingRow {
        rate,
        len,
        value_h0,
        peak,
    })
}

/// Ground-state gap at field `sign * h`.
pub fn gap_point(probe: ProbeClass, rate: f64, len: usize, sign: FieldSign, h: f64) -> Result<f64> {
    let model = probe_model(probe, len, rate)?;
    let dec = model.decompose(sign.factor() * h)?;
    Ok(energy_gap(&dec)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub rate: f64,
    pub len: usize,
    pub bound_log10: f64,
    pub qfi_log10: f64,
}

impl BoundRow {
    pub fn ok(&self) -> bool {
        self.bound_log10 < self.qfi_log10
    }
}

/// Analytic lower bound against the exact ground-state QFI of the free chain.
pub fn bound_point(rate: f64, len: usize, variant: BoundVariant) -> Result<BoundRow> {
    let bound = match variant {
        BoundVariant::Printed => qfi_lower_bound(rate, len, 1.0)?,
        BoundVariant::K2 => qfi_lower_bound_k2(rate, len, 1.0)?,
    };
    let model = probe_model(ProbeClass::SingleParticle, len, rate)?;
    let q = qfi_at(&model, 0.0, FieldSign::Positive, StateSelector::Ground, QfiMethod::EigenSum)?;
    Ok(BoundRow {
        rate,
        len,
        bound_log10: bound.log10(),
        qfi_log10: q.value.log10(),
    })
}

/// A fit labelled by its group and kind, as written to `fits.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub group: String,
    pub kind: String,
    pub fit: FitResult,
}

pub const FIT_HEADER: [&str; 8] = ["group", "kind", "slope", "intercept", "r2", "win_lo", "win_hi", "n"];

impl FitRow {
    pub fn record(&self) -> Vec<String> {
        use crate::output::fmt_f64;
        vec![
            self.group.clone(),
            self.kind.clone(),
            fmt_f64(self.fit.slope),
            fmt_f64(self.fit.intercept),
            fmt_f64(self.fit.r_squared),
            fmt_f64(self.fit.window.0),
            fmt_f64(self.fit.window.1),
            self.fit.n_points.to_string(),
        ]
    }
}

fn rates_of(rows: &[ScalingRow]) -> Vec<f64> {
    let mut rates: Vec<f64> = rows.iter().map(|r| r.rate).collect();
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    rates
}

/// Per-rate exponential fits in `L` and linear meta-fits of the exponents in `a`.
///
/// Kinds: `beta-h0`, `beta-hmax` (for `ln F`), `hmax` (for `ln h_max`); meta rows
/// use group `meta` and kind `<kind>-vs-a`. Groups with too few points are skipped
/// and reported in the second return value.
pub fn scaling_fits(rows: &[ScalingRow]) -> (Vec<FitRow>, Vec<String>) {
    let mut fits = vec![];
    let mut skipped = vec![];
    let kinds: [(&str, fn(&ScalingRow) -> Option<f64>); 3] = [
        ("beta-h0", |r| Some(r.value_h0)),
        ("beta-hmax", |r| r.peak.map(|p| p.value)),
        ("hmax", |r| r.peak.map(|p| p.h_max)),
    ];
    for (kind, pick) in kinds {
        let mut per_a = vec![];
        for rate in rates_of(rows) {
            let (lens, ys): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.rate == rate)
                .filter_map(|r| pick(r).map(|y| (r.len as f64, y)))
                .unzip();
            if lens.is_empty() {
                continue;
            }
            let fit = if kind == "hmax" {
                fit_hmax_scaling(&lens, &ys)
            } else {
                fit_exponential_in_l(&lens, &ys)
            };
            match fit {
                Ok(fit) => {
                    per_a.push((rate, fit.slope));
                    fits.push(FitRow {
                        group: rate.to_string(),
                        kind: kind.to_string(),
                        fit,
                    });
                }
                Err(e) => skipped.push(format!("{kind} a={rate}: {e}")),
            }
        }
        if per_a.len() >= 3 {
            let (a, s): (Vec<f64>, Vec<f64>) = per_a.into_iter().unzip();
            match meta_fit_linear_in_a(&a, &s) {
                Ok(fit) => fits.push(FitRow {
                    group: "meta".to_string(),
                    kind: format!("{kind}-vs-a"),
                    fit,
                }),
                Err(e) => skipped.push(format!("{kind} meta: {e}")),
            }
        }
    }
    (fits, skipped)
}
