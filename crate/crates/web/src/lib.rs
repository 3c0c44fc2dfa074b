//! Browser bindings for three small experiments on CP¹:
//!
//! * `bergman_profile`: Bergman density, metric ratio and `P^k − ϕ` of the
//!   test potential `(1 − s)φ_FS(t) + s·φ_FS(t − c)` along the t-line;
//! * `measure_quantization`: target density of a translated-FS or Hölder
//!   measure against the density of its level-k Bergman measure;
//! * `ot_table`: the optimal extension constants and their tightness.
//!
//! Every export returns a flat `Float64Array`; the plain `*_rows` functions
//! behind them are usable natively.

use wasm_bindgen::prelude::*;

use bergquant::estimates;
use bergquant::measure_quant::{self, RadonMeasure1D};
use bergquant::toric_cp1::{self, TWO_PI};
use bergquant::weights::{default_grid, fs_curvature, linspace, make_test_potential, TestPotentialParams};

/// Largest level accepted from the page.
pub const MAX_K: usize = 400;

fn check_k(k: usize) -> Result<(), String> {
    if k == 0 || k > MAX_K {
        return Err(format!("k must lie in 1..={MAX_K}"));
    }
    Ok(())
}

fn check_samples(t_lo: f64, t_hi: f64, samples: usize) -> Result<(), String> {
    if !(t_lo < t_hi) || samples < 2 || samples > 5000 {
        return Err("need t_lo < t_hi and 2..=5000 samples".into());
    }
    Ok(())
}

/// Rows `[t, M-density, metric ratio, P^k − ϕ]`, flattened.
pub fn bergman_profile_rows(s: f64, c: f64, k: usize, t_lo: f64, t_hi: f64, samples: usize) -> Result<Vec<f64>, String> {
    check_k(k)?;
    check_samples(t_lo, t_hi, samples)?;
    let tp = make_test_potential(TestPotentialParams { s, c }).map_err(|e| e.to_string())?;
    let spec = toric_cp1::hilbert_norms(&tp.potential, k).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(4 * samples);
    for t in linspace(t_lo, t_hi, samples) {
        let d = toric_cp1::bergman_density(&spec, t);
        out.extend([t, d.m_density, d.metric_ratio, d.potential_error]);
    }
    Ok(out)
}

/// Rows `[t, target density, level-k density]` against `ω_FS`, followed by
/// one trailer row `[NaN, k, Σ|error| of the weak-convergence family]`.
/// `kind` 0 is the FS measure translated by `p1`; kind 1 is the Hölder
/// measure with centre `p1`, half width `p2` and exponent `p3`.
pub fn measure_quantization_rows(
    kind: u32,
    p1: f64,
    p2: f64,
    p3: f64,
    k: usize,
    t_lo: f64,
    t_hi: f64,
    samples: usize,
) -> Result<Vec<f64>, String> {
    check_k(k)?;
    check_samples(t_lo, t_hi, samples)?;
    let nu = match kind {
        0 => RadonMeasure1D::translated_fs(p1),
        1 => {
            if !(p2 > 0.0 && p3 > 0.0 && p3 <= 1.0) {
                return Err("Hölder measure needs half width > 0 and exponent in (0, 1]".into());
            }
            RadonMeasure1D::holder(p1, p2, p3)
        }
        _ => return Err(format!("unknown measure kind {kind}")),
    };
    let grid = default_grid();
    let q = measure_quant::quantize_measure(&nu, k, &grid).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * samples + 3);
    // densities relative to ω_FS = 2π φ_FS″ dt, target by central differences of the CDF
    let h = 1e-4;
    for t in linspace(t_lo, t_hi, samples) {
        let target = (nu.cdf(t + h) - nu.cdf(t - h)) / (2.0 * h) / (TWO_PI * fs_curvature(t));
        let quantum = q.spectrum.log_m_density(t).exp();
        out.extend([t, target, quantum]);
    }
    let family = bergquant::line_fn::LineFunction::weak_convergence_family();
    let r = measure_quant::weak_convergence_report(&nu, &family, &[k], &grid).map_err(|e| e.to_string())?;
    out.extend([f64::NAN, k as f64, r.rows.iter().map(|x| x.error).sum()]);
    Ok(out)
}

/// Rows `[m, C_a, K^{(m)}(0)·C_a]` for `m = 0..=m_max`.
pub fn ot_table_rows(a: f64, m_max: u32) -> Result<Vec<f64>, String> {
    if !(a.is_finite() && a >= 0.0) || m_max > 8 {
        return Err("need a ≥ 0 and m_max ≤ 8".into());
    }
    let mut out = Vec::new();
    for m in 0..=m_max {
        let r = estimates::ot_tightness(a, m, 1e-8).map_err(|e| e.to_string())?;
        out.extend([m as f64, estimates::ot_constant(a, m), r.value]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn bergman_profile(s: f64, c: f64, k: usize, t_lo: f64, t_hi: f64, samples: usize) -> Result<Vec<f64>, JsValue> {
    bergman_profile_rows(s, c, k, t_lo, t_hi, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn measure_quantization(
    kind: u32,
    p1: f64,
    p2: f64,
    p3: f64,
    k: usize,
    t_lo: f64,
    t_hi: f64,
    samples: usize,
) -> Result<Vec<f64>, JsValue> {
    measure_quantization_rows(kind, p1, p2, p3, k, t_lo, t_hi, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn ot_table(a: f64, m_max: u32) -> Result<Vec<f64>, JsValue> {
    ot_table_rows(a, m_max).map_err(|e| JsValue::from_str(&e))
}
