//! WebAssembly bindings for the static demo page in `www/`.

pub mod demo;

use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub fn qfi_curve(probe: &str, len: usize, rate: f64, h_min: f64, h_max: f64, count: usize, mid: bool) -> Result<Vec<f64>, JsValue> {
    demo::qfi_curve(probe, len, rate, h_min, h_max, count, mid).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn dynamic_series(probe: &str, len: usize, rate: f64, h: f64, t_max: f64, step: f64) -> Result<Vec<f64>, JsValue> {
    demo::dynamic_series(probe, len, rate, h, t_max, step).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn bound_table(rate: f64, l_min: usize, l_max: usize, step: usize) -> Result<Vec<f64>, JsValue> {
    demo::bound_table(rate, l_min, l_max, step).map_err(|e| JsValue::from_str(&e))
}
