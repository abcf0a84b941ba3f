//! WebAssembly bindings behind `www/index.html`: fixture documents, the full
//! analysis report, θ evaluation and the coefficient table.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use qdiff_lab::apnum::{APComplex, Real};
use qdiff_lab::model::{instance_to_json, parse_instance};
use qdiff_lab::pipeline::{analyze, input_hash, report};
use qdiff_lab::recurrence::taylor_coefficients;
use qdiff_lab::theta::theta_eval;
use qdiff_lab::fixtures;

/// Precision used by the demo; high enough for every fixture, low enough to stay interactive.
pub const DEMO_BITS: usize = 256;

/// Names of the instance fixtures, newline separated.
#[wasm_bindgen]
pub fn fixture_names() -> String {
    fixtures::INSTANCE_NAMES.join("\n")
}

/// Instance document of a fixture at the demo precision.
#[wasm_bindgen]
pub fn fixture(name: &str) -> Result<String, JsError> {
    let mut inst = fixtures::by_name(name, 2 * DEMO_BITS).ok_or_else(|| JsError::new(&format!("unknown fixture {name}")))?;
    inst.options.precision_bits = DEMO_BITS;
    Ok(serde_json::to_string_pretty(&instance_to_json(&inst)).expect("instance serializes"))
}

/// Runs the whole pipeline on an instance document and returns the report
/// plus a `plot` section with zeros and coefficient magnitudes in `f64`.
pub fn analyze_document(text: &str) -> Result<Value, String> {
    let inst = parse_instance(text, None).map_err(|e| e.to_string())?;
    let a = analyze(&inst);
    let mut rep = report(&a, "analyze", &input_hash(text), &[inst.options.precision_bits]);
    let zeros: Vec<[f64; 2]> = a
        .zeros
        .iter()
        .flat_map(|z| z.zeros.iter().map(|(v, _)| {
            let (re, im) = v.to_c64();
            [re, im]
        }))
        .collect();
    let logs: Vec<Option<f64>> = a.coeffs.iter().flat_map(|c| c.log_abs()).map(|l| l.is_finite().then_some(l)).collect();
    let growth: Vec<[f64; 2]> = a.growth.iter().flat_map(|g| g.rows.iter().map(|r| [r.r.ln(), r.e])).collect();
    rep["plot"] = json!({
        "zeros": zeros,
        "trust_radius": a.zeros.as_ref().map(|z| z.trust_radius),
        "log_abs_alpha": logs,
        "growth": growth,
    });
    Ok(rep)
}

#[wasm_bindgen]
pub fn analyze_json(text: &str) -> Result<String, JsError> {
    analyze_document(text).map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

/// `θ_κ(z, q)` for real `q`; returns `[re, im]` as decimal strings.
pub fn theta_value(q: &str, re: &str, im: &str, kappa: f64, digits: usize) -> Result<[String; 2], String> {
    let p = DEMO_BITS;
    let parse = |s: &str, what: &str| Real::parse(s, p).ok_or_else(|| format!("{what} is not a decimal number"));
    let z = APComplex::new(parse(re, "Re z")?, parse(im, "Im z")?);
    let q = APComplex::from_real(parse(q, "q")?);
    let v = theta_eval(&z, &q, kappa).map_err(|e| e.to_string())?.value;
    let cut = |s: String| if s.len() > digits + 8 { format!("{:.*e}", digits, s.parse::<f64>().unwrap_or(f64::NAN)) } else { s };
    let [a, b] = v.to_pair();
    Ok([cut(a), cut(b)])
}

#[wasm_bindgen]
pub fn theta(q: &str, re: &str, im: &str, kappa: f64) -> Result<String, JsError> {
    theta_value(q, re, im, kappa, 15).map(|v| json!(v).to_string()).map_err(|e| JsError::new(&e))
}

/// `n, ln|α_n|` for an instance document, as CSV.
#[wasm_bindgen]
pub fn coefficients_csv(text: &str) -> Result<String, JsError> {
    let inst = parse_instance(text, None).map_err(|e| JsError::new(&e.to_string()))?;
    let c = taylor_coefficients(&inst.qde, &inst.options).map_err(|e| JsError::new(&e.to_string()))?;
    let mut s = String::from("n,log_abs_alpha\n");
    for (n, l) in c.log_abs().iter().enumerate() {
        s.push_str(&format!("{n},{l:e}\n"));
    }
    Ok(s)
}
