//! Parameter grids.

use crate::error::{invalid, Result};

/// `count` points from `min` to `max` inclusive, equally spaced in `ln`.
pub fn log_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && min.is_finite() && max.is_finite()) {
        return Err(invalid("h_min", format!("log grid needs 0 < min <= max, got [{min}, {max}]")));
    }
    if count == 0 {
        return Err(invalid("h_count", "grid is empty"));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let (lo, hi) = (min.ln(), max.ln());
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i + 1 == count { max } else { (lo + step * i as f64).exp() })
        .collect())
}

pub fn linear_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(max >= min && min.is_finite() && max.is_finite()) {
        return Err(invalid("h_min", format!("linear grid needs min <= max, got [{min}, {max}]")));
    }
    if count == 0 {
        return Err(invalid("h_count", "grid is empty"));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    let step = (max - min) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i + 1 == count { max } else { min + step * i as f64 })
        .collect())
}

/// Integers `start, start + step, ..., <= stop`.
pub fn int_range(start: usize, stop: usize, step: usize) -> Result<Vec<usize>> {
    if step == 0 || stop < start {
        return Err(invalid("range", format!("bad range {start}:{stop}:{step}")));
    }
    Ok((start..=stop).step_by(step).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = log_grid(1e-3, 1e3, 7).unwrap();
        assert_eq!(g.len(), 7);
        assert!((g[3] - 1.0).abs() < 1e-14);
        assert_eq!(*g.last().unwrap(), 1e3);
        assert!(log_grid(0.0, 1.0, 3).is_err());
        assert!(log_grid(1.0, 2.0, 0).is_err());
        assert_eq!(linear_grid(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(int_range(50, 80, 10).unwrap(), vec![50, 60, 70, 80]);
    }
}
