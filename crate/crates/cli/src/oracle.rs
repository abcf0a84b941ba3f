//! The exactly solvable perturbed recurrence
//! `2^{-(2n+1)} y(n) - (1 + 2^{-4n}) y(n-1) + 2^{-(2n+1)} y(n-2) = 0`.

use serde_json::{json, Value};

use qdiff_lab::apnum::{APComplex, Real};
use qdiff_lab::fixtures::fast_growth_recurrence;
use qdiff_lab::recurrence::solve_perturbed;
use qdiff_lab::Error;

use crate::Exit;

pub const NAME: &str = "eq4j_oracle";
const KIND: &str = "perturbed_recurrence";

pub fn document() -> Value {
    json!({
        "name": NAME,
        "kind": KIND,
        "recurrence": "2^-(2n+1) y(n) - (1 + 2^-4n) y(n-1) + 2^-(2n+1) y(n-2) = 0",
        "start": 1,
        "initial": ["16", "512"],
        "n_max": 20,
        "solution": "y(n) = 2^((n+1)^2)",
    })
}

pub fn is_recurrence(text: &str) -> bool {
    serde_json::from_str::<Value>(text).is_ok_and(|v| v.get("kind").and_then(Value::as_str) == Some(KIND))
}

/// CSV `n, y, exact` and whether every value equals `2^{(n+1)²}`.
pub fn solve(text: &str, prec: usize) -> Result<(String, bool), Exit> {
    let bad = |m: &str| Exit::from(Error::Schema(m.to_string()));
    let doc: Value = serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?;
    let start = doc["start"].as_u64().ok_or_else(|| bad("start must be an integer"))? as usize;
    let n_max = doc["n_max"].as_u64().ok_or_else(|| bad("n_max must be an integer"))? as usize;
    let initial = doc["initial"]
        .as_array()
        .ok_or_else(|| bad("initial must be a list"))?
        .iter()
        .map(|v| v.as_str().and_then(|s| Real::parse(s, prec)).map(APComplex::from_real).ok_or_else(|| bad("initial values must be decimal strings")))
        .collect::<Result<Vec<_>, _>>()?;
    if start < 1 || initial.len() != 2 {
        return Err(bad("the recurrence needs two initial values from n >= 1"));
    }
    let y = solve_perturbed(&fast_growth_recurrence(prec), start, &initial, n_max)?;
    let two = Real::from_i64(2, prec);
    let mut csv = String::from("n,y,exact\n");
    let mut all = true;
    for (i, v) in y.iter().enumerate() {
        let n = (start + i) as i64;
        let exact = *v == APComplex::from_real(two.powi((n + 1) * (n + 1)));
        all &= exact;
        csv.push_str(&format!("{n},{},{exact}\n", v.re.to_decimal()));
    }
    Ok((csv, all))
}
