//! Plain-Rust computations behind the page; the wasm exports wrap these.

use starkqfi::bound::{appendix_qfi_sum, qfi_lower_bound, qfi_lower_bound_k2};
use starkqfi::dynamic::{evaluator_for, InitialState};
use starkqfi::equilibrium::{qfi_at, FieldSign, QfiMethod};
use starkqfi::grid::log_grid;
use starkqfi::model::{ProbeModel, ProbeSpec};
use starkqfi::spectral::StateSelector;

const MAX_SP: usize = 400;
const MAX_MB: usize = 12;

fn model(probe: &str, len: usize, rate: f64) -> Result<ProbeModel, String> {
    let spec = match probe {
        "sp" => {
            if len > MAX_SP {
                return Err(format!("L is capped at {MAX_SP} in the browser"));
            }
            ProbeSpec::single_particle(len, rate, 0.0)
        }
        "mb" => {
            if len > MAX_MB {
                return Err(format!("L is capped at {MAX_MB} for the interacting chain"));
            }
            ProbeSpec::many_body(len, rate, 0.0)
        }
        other => return Err(format!("unknown probe `{other}`")),
    };
    spec.and_then(|s| ProbeModel::new(&s)).map_err(|e| e.to_string())
}

/// `[h_0, F_0, h_1, F_1, ...]` on a log grid.
pub fn qfi_curve(probe: &str, len: usize, rate: f64, h_min: f64, h_max: f64, count: usize, mid: bool) -> Result<Vec<f64>, String> {
    let m = model(probe, len, rate)?;
    let (state, sign) = match (mid, probe) {
        (true, _) => (StateSelector::MidSpectrum, FieldSign::Positive),
        (false, "sp") => (StateSelector::Ground, FieldSign::Negative),
        (false, _) => (StateSelector::Ground, FieldSign::Positive),
    };
    let grid = log_grid(h_min, h_max, count).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * count);
    for h in grid {
        let q = qfi_at(&m, h, sign, state, QfiMethod::EigenSum).map_err(|e| e.to_string())?;
        out.extend([h, q.value]);
    }
    Ok(out)
}

/// `[t_0, F_0, t_1, F_1, ...]` for `t = 0, step, ..., t_max` after a quench from
/// the center site (single particle) or the Neel state (interacting).
pub fn dynamic_series(probe: &str, len: usize, rate: f64, h: f64, t_max: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(step > 0.0 && t_max >= 0.0) {
        return Err("need step > 0 and t_max >= 0".into());
    }
    let m = model(probe, len, rate)?;
    let initial = InitialState::default_for(m.spec().class);
    let ev = evaluator_for(&m, h, initial).map_err(|e| e.to_string())?;
    let n = (t_max / step).floor() as usize;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    let values = ev.qfi_many(&times).map_err(|e| e.to_string())?;
    Ok(times.into_iter().zip(values).flat_map(|(t, f)| [t, f]).collect())
}

/// `[L, log10 bound, log10 k2 bound, log10 F]` per length, free chain at `h = 0`.
pub fn bound_table(rate: f64, l_min: usize, l_max: usize, step: usize) -> Result<Vec<f64>, String> {
    if step == 0 || l_min < 3 || l_max < l_min || l_max > 2000 {
        return Err("need 3 <= L_min <= L_max <= 2000 and step >= 1".into());
    }
    let mut out = vec![];
    for len in (l_min..=l_max).step_by(step) {
        let b = qfi_lower_bound(rate, len, 1.0).map_err(|e| e.to_string())?;
        let k2 = qfi_lower_bound_k2(rate, len, 1.0).map_err(|e| e.to_string())?;
        let f = appendix_qfi_sum(len, rate).map_err(|e| e.to_string())?;
        out.extend([len as f64, b.log10(), k2.log10(), f.log10()]);
    }
    Ok(out)
}
