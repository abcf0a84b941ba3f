//! Equation instances, analysis options and their JSON form.

use serde_json::{json, Map, Value};

use crate::apnum::{APComplex, APPoly, Real};
use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: usize = 512;
pub const DEFAULT_N_MAX: usize = 200;

/// `Σ_{j=0}^m a_j(z) f(q^j z) = b(z)` with `0 < |q| < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct QDE {
    pub q: APComplex,
    pub a: Vec<APPoly>,
    pub b: APPoly,
    prec: usize,
}

impl QDE {
    pub fn new(q: APComplex, a: Vec<APPoly>, b: APPoly) -> Result<Self> {
        let prec = q.prec();
        if a.len() < 2 {
            return Err(Error::Domain("order m must be at least 1".into()));
        }
        if a.last().is_some_and(|p| p.is_zero()) {
            return Err(Error::Domain("leading coefficient a_m is identically zero".into()));
        }
        let modulus = q.abs();
        if modulus.is_zero() || modulus >= Real::one(prec) {
            return Err(Error::Domain(format!("|q| = {} is not in (0, 1)", modulus.to_short(12))));
        }
        Ok(QDE { q, a, b, prec })
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    /// Order `m`.
    pub fn order(&self) -> usize {
        self.a.len() - 1
    }

    /// `d(j)`, with `-1` for identically zero `a_j`.
    pub fn degrees(&self) -> Vec<i64> {
        self.a.iter().map(|p| p.degree() as i64).collect()
    }

    /// `max_j d(j)`.
    pub fn depth(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0).max(0) as usize
    }

    /// `a_{j,i}`.
    pub fn coeff(&self, j: usize, i: usize) -> APComplex {
        self.a[j].coeff(i)
    }

    pub fn with_prec(&self, prec: usize) -> QDE {
        QDE {
            q: self.q.with_prec(prec),
            a: self.a.iter().map(|p| p.with_prec(prec)).collect(),
            b: self.b.with_prec(prec),
            prec,
        }
    }
}

/// How coefficients at resonant indices are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum FreeCoeffPolicy {
    Zero,
    /// Values consumed in order of the resonances met; zero once exhausted.
    UserList(Vec<APComplex>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisOptions {
    pub precision_bits: usize,
    pub n_max: usize,
    pub r_max: Option<f64>,
    pub snap_tol: f64,
    pub unity_tol: f64,
    pub l_max: u32,
    pub free_coeffs: FreeCoeffPolicy,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            precision_bits: DEFAULT_PRECISION,
            n_max: DEFAULT_N_MAX,
            r_max: None,
            snap_tol: 0.05,
            unity_tol: 1e-9,
            l_max: 64,
            free_coeffs: FreeCoeffPolicy::Zero,
        }
    }
}

impl AnalysisOptions {
    pub fn validate(&self) -> Result<()> {
        if self.precision_bits < 128 {
            return Err(Error::Domain("precision_bits must be at least 128".into()));
        }
        if self.n_max < 16 {
            return Err(Error::Domain("n_max must be at least 16".into()));
        }
        if self.l_max < 1 {
            return Err(Error::Domain("L_max must be at least 1".into()));
        }
        if !(self.snap_tol > 0.0 && self.unity_tol > 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        if self.r_max.is_some_and(|r| !(r > 1.0 && r.is_finite())) {
            return Err(Error::Domain("r_max must be a finite number above 1".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("precision_bits".into(), json!(self.precision_bits));
        m.insert("n_max".into(), json!(self.n_max));
        if let Some(r) = self.r_max {
            m.insert("r_max".into(), json!(format_f64(r)));
        }
        m.insert("snap_tol".into(), json!(format_f64(self.snap_tol)));
        m.insert("unity_tol".into(), json!(format_f64(self.unity_tol)));
        m.insert("L_max".into(), json!(self.l_max));
        let free: Vec<Value> = match &self.free_coeffs {
            FreeCoeffPolicy::Zero => Vec::new(),
            FreeCoeffPolicy::UserList(v) => v.iter().map(|c| json!(c.to_pair())).collect(),
        };
        m.insert("free_coeffs".into(), Value::Array(free));
        Value::Object(m)
    }
}

/// Shortest decimal form that reads back to the same `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:e}")
}

/// A parsed instance file: the equation plus its options.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub qde: QDE,
    pub options: AnalysisOptions,
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}

fn parse_dec(v: &Value, what: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        _ => Err(schema(format!("{what}: expected a decimal string"))),
    }
}

fn parse_scalar(v: &Value, prec: usize, what: &str) -> Result<APComplex> {
    let pair = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| schema(format!("{what}: expected [\"re\",\"im\"]")))?;
    let re = parse_dec(&pair[0], what)?;
    let im = parse_dec(&pair[1], what)?;
    APComplex::parse(&re, &im, prec).ok_or_else(|| schema(format!("{what}: malformed decimal")))
}

fn parse_poly(v: &Value, prec: usize, what: &str) -> Result<APPoly> {
    let items = v.as_array().ok_or_else(|| schema(format!("{what}: expected a coefficient list")))?;
    let coeffs = items
        .iter()
        .enumerate()
        .map(|(i, c)| parse_scalar(c, prec, &format!("{what}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Ok(APPoly::new(coeffs, prec))
}

fn parse_f64(v: &Value, what: &str) -> Result<f64> {
    parse_dec(v, what)?.trim().parse::<f64>().map_err(|_| schema(format!("{what}: malformed decimal")))
}

fn parse_uint(v: &Value, what: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| schema(format!("{what}: expected a non-negative integer")))
}

fn parse_options(v: Option<&Value>, prec_override: Option<usize>) -> Result<AnalysisOptions> {
    let mut o = AnalysisOptions::default();
    if let Some(v) = v {
        let m = v.as_object().ok_or_else(|| schema("options: expected an object"))?;
        for (k, val) in m {
            match k.as_str() {
                "precision_bits" => o.precision_bits = parse_uint(val, k)? as usize,
                "n_max" => o.n_max = parse_uint(val, k)? as usize,
                "r_max" => o.r_max = Some(parse_f64(val, k)?),
                "snap_tol" => o.snap_tol = parse_f64(val, k)?,
                "unity_tol" => o.unity_tol = parse_f64(val, k)?,
                "L_max" => o.l_max = parse_uint(val, k)? as u32,
                "free_coeffs" => {}
                other => return Err(schema(format!("options: unknown key {other:?}"))),
            }
        }
    }
    if let Some(p) = prec_override {
        o.precision_bits = p;
    }
    if let Some(list) = v.and_then(|v| v.get("free_coeffs")) {
        let items = list.as_array().ok_or_else(|| schema("free_coeffs: expected a list"))?;
        if !items.is_empty() {
            let vals = items
                .iter()
                .enumerate()
                .map(|(i, c)| parse_scalar(c, o.precision_bits, &format!("free_coeffs[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            o.free_coeffs = FreeCoeffPolicy::UserList(vals);
        }
    }
    o.validate()?;
    Ok(o)
}

/// Parses an instance document; decimals are read at the options' precision
/// unless `prec_override` is given.
pub fn parse_instance(text: &str, prec_override: Option<usize>) -> Result<Instance> {
    let doc: Value = serde_json::from_str(text).map_err(|e| schema(format!("invalid JSON: {e}")))?;
    let obj = doc.as_object().ok_or_else(|| schema("top level must be an object"))?;
    for k in obj.keys() {
        if !matches!(k.as_str(), "q" | "a" | "b" | "options" | "name" | "description") {
            return Err(schema(format!("unknown key {k:?}")));
        }
    }
    let options = parse_options(obj.get("options"), prec_override)?;
    let prec = options.precision_bits;
    let q = parse_scalar(obj.get("q").ok_or_else(|| schema("missing q"))?, prec, "q")?;
    let a_list = obj.get("a").and_then(Value::as_array).ok_or_else(|| schema("missing coefficient list a"))?;
    let a = a_list
        .iter()
        .enumerate()
        .map(|(j, p)| parse_poly(p, prec, &format!("a[{j}]")))
        .collect::<Result<Vec<_>>>()?;
    let b = match obj.get("b") {
        Some(v) => parse_poly(v, prec, "b")?,
        None => APPoly::zero(prec),
    };
    Ok(Instance { qde: QDE::new(q, a, b)?, options })
}

/// Parses only the equation part of a document.
pub fn parse_qde(text: &str, prec: usize) -> Result<QDE> {
    parse_instance(text, Some(prec)).map(|i| i.qde)
}

pub fn qde_to_json(e: &QDE) -> Value {
    json!({
        "q": e.q.to_pair(),
        "a": e.a.iter().map(APPoly::to_pairs).collect::<Vec<_>>(),
        "b": e.b.to_pairs(),
    })
}

pub fn instance_to_json(inst: &Instance) -> Value {
    let mut v = qde_to_json(&inst.qde);
    v["options"] = inst.options.to_json();
    v
}

/// Outcome of the solvability screen.
#[derive(Clone, Debug, PartialEq)]
pub struct SolvabilityReport {
    pub warnings: Vec<String>,
    /// Indices `n ≤ n_max` where the forward pivot `c_0(n)` vanishes.
    pub resonances: Vec<usize>,
}

pub const NO_TRANSCENDENTAL_WARNING: &str = "no transcendental entire solution: no j >= 1 has d(j) > d(0)";

/// `c_0(n) = Σ_j a_{j,0} q^{jn}` together with its absolute scale `Σ_j |a_{j,0}| |q|^{jn}`.
pub(crate) fn pivot(e: &QDE, qpow: &[APComplex], n: usize) -> (APComplex, Real) {
    let prec = e.prec();
    let mut c = APComplex::zero(prec);
    let mut scale = Real::zero(prec);
    for j in 0..=e.order() {
        let a = e.coeff(j, 0);
        if a.is_zero() {
            continue;
        }
        let t = &a * &qpow[j * n];
        scale = scale + t.abs();
        c = &c + &t;
    }
    (c, scale)
}

/// `q^k` for `k = 0..=k_max`, each to full precision.
pub(crate) fn q_powers(q: &APComplex, k_max: usize) -> Vec<APComplex> {
    (0..=k_max).map(|k| q.powi(k as i64)).collect()
}

/// Relative size below which a computed quantity counts as zero.
pub(crate) fn zero_threshold(prec: usize) -> f64 {
    -((prec / 2) as f64) * std::f64::consts::LN_2
}

pub(crate) fn is_negligible(v: &APComplex, scale: &Real, prec: usize) -> bool {
    v.is_zero() || scale.is_zero() || v.ln_abs_f64() - scale.ln_abs_f64() <= zero_threshold(prec)
}

pub fn validate_solvability(e: &QDE, n_max: usize) -> SolvabilityReport {
    let d = e.degrees();
    let mut warnings = Vec::new();
    if !d.iter().skip(1).any(|&dj| dj > d[0]) {
        warnings.push(NO_TRANSCENDENTAL_WARNING.to_string());
    }
    let qpow = q_powers(&e.q, e.order() * n_max);
    let resonances = (0..=n_max)
        .filter(|&n| {
            let (c, scale) = pivot(e, &qpow, n);
            is_negligible(&c, &scale, e.prec())
        })
        .collect();
    SolvabilityReport { warnings, resonances }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(q: &str, a: &str, b: &str) -> String {
        format!(r#"{{"q":{q},"a":{a},"b":{b},"options":{{"precision_bits":256}}}}"#)
    }

    #[test]
    fn partial_theta_instance() {
        let text = doc(r#"["0.5","0"]"#, r#"[[["1","0"]],[["0","0"],["-1","0"]]]"#, r#"[["1","0"]]"#);
        let inst = parse_instance(&text, None).unwrap();
        assert_eq!(inst.qde.order(), 1);
        assert_eq!(inst.qde.degrees(), vec![0, 1]);
        assert!(validate_solvability(&inst.qde, 50).warnings.is_empty());
    }

    #[test]
    fn q_outside_unit_disc_is_rejected() {
        let text = doc(r#"["1.5","0"]"#, r#"[[["1","0"]],[["0","0"],["-1","0"]]]"#, "[]");
        assert!(matches!(parse_instance(&text, None), Err(Error::Domain(_))));
        let zero_lead = doc(r#"["0.5","0"]"#, r#"[[["1","0"]],[["0","0"]]]"#, "[]");
        assert!(matches!(parse_instance(&zero_lead, None), Err(Error::Domain(_))));
    }

    #[test]
    fn malformed_documents() {
        assert!(matches!(parse_instance("{", None), Err(Error::Schema(_))));
        let float_on_wire = doc("[0.5, 0]", r#"[[["1","0"]],[["0","0"],["-1","0"]]]"#, "[]");
        assert!(matches!(parse_instance(&float_on_wire, None), Err(Error::Schema(_))));
    }

    #[test]
    fn degree_warning() {
        let p = 128;
        let q = APComplex::from_f64(0.5, 0.0, p);
        let a = vec![APPoly::from_f64(&[0.0, 0.0, 1.0], p), APPoly::from_f64(&[1.0], p)];
        let e = QDE::new(q, a, APPoly::zero(p)).unwrap();
        assert_eq!(validate_solvability(&e, 20).warnings, vec![NO_TRANSCENDENTAL_WARNING.to_string()]);
    }

    #[test]
    fn resonance_at_five() {
        let p = 256;
        let q = APComplex::from_f64(0.5, 0.0, p);
        let a1 = -q.powi(-5);
        let a = vec![APPoly::from_f64(&[1.0], p), APPoly::new(vec![a1, APComplex::one(p)], p)];
        let e = QDE::new(q, a, APPoly::zero(p)).unwrap();
        assert_eq!(validate_solvability(&e, 30).resonances, vec![5]);
    }

    #[test]
    fn serialization_round_trip() {
        let text = doc(r#"["0.16","0"]"#, r#"[[["1","0"]],[["0","0"],["-0.8","0.1"]],[["0","0"],["0","0"],["0.0256","0"]]]"#, r#"[["0.4","0"]]"#);
        let inst = parse_instance(&text, None).unwrap();
        let again = parse_instance(&instance_to_json(&inst).to_string(), None).unwrap();
        assert_eq!(inst, again);
    }
}
