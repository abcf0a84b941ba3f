//! End-to-end analysis of an instance and its JSON report.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::asymfit::{estimate_mu, estimate_sigma, fit_polynomials, AsymptoticFit, SigmaEstimate};
use crate::diagram::{build_diagram, characteristic, sector_data, CharPoly, NPDiagram, SectorData};
use crate::error::{Error, Result};
use crate::growth::{growth_residual, log_grid, residual_period, GrowthReport, ScaledSeries};
use crate::model::{instance_to_json, validate_solvability, Instance, SolvabilityReport};
use crate::recurrence::{normalize, taylor_coefficients, CoeffSequence, NormalizedSequence};
use crate::theta::{build_comparison_f, ComparisonF};
use crate::zeros::{case2_correction, default_r_max, detect_unity_period, find_zeros, match_progressions, ProgressionFit, ZeroSet};

pub const SCHEMA: &str = "qdiff-lab/1";
/// Highest precision reached by automatic escalation.
pub const MAX_ESCALATED_BITS: usize = 2048;
const GRID_STEPS: usize = 12;
const MAX_GRID_POINTS: usize = 4000;

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Pass,
    Fail(String),
    Skipped(String),
}

impl Status {
    fn to_json(&self) -> Value {
        match self {
            Status::Pass => json!({"status": "pass"}),
            Status::Fail(m) => json!({"status": "fail", "reason": m}),
            Status::Skipped(m) => json!({"status": "skipped", "reason": m}),
        }
    }
}

/// Every stage result that could be computed; later stages never modify earlier ones.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub instance: Instance,
    pub solvability: SolvabilityReport,
    pub diagram: NPDiagram,
    pub coeffs: Option<CoeffSequence>,
    pub sigma: Option<SigmaEstimate>,
    pub sector: Option<SectorData>,
    pub charpoly: Option<CharPoly>,
    pub normalized: Option<NormalizedSequence>,
    pub fit: Option<AsymptoticFit>,
    pub period: Option<u32>,
    pub comparison: Option<ComparisonF>,
    pub zeros: Option<ZeroSet>,
    pub progressions: Option<ProgressionFit>,
    /// `n·(1 - z_n/ξ_n)` for double dominant roots with `M = 2`.
    pub correction: Option<Vec<(i64, f64)>>,
    pub growth: Option<GrowthReport>,
    pub stages: Vec<(&'static str, Status)>,
    pub errors: Vec<Error>,
}

impl Analysis {
    /// Process exit code: 0 all stages passed, 3 inconsistent resonance,
    /// 4 no commensuration, 5 precision exhausted, 1 any other stage failure.
    pub fn exit_code(&self) -> i32 {
        if self.errors.iter().any(|e| matches!(e, Error::ResonanceInconsistent { .. })) {
            3
        } else if self.errors.iter().any(|e| matches!(e, Error::NoCommensuration { .. })) {
            4
        } else if self.errors.iter().any(|e| matches!(e, Error::PrecisionExhausted(_))) {
            5
        } else if self.stages.iter().any(|s| matches!(s.1, Status::Fail(_))) {
            1
        } else {
            0
        }
    }

    pub fn stage(&self, name: &str) -> Option<&Status> {
        self.stages.iter().find(|s| s.0 == name).map(|s| &s.1)
    }
}

fn record<T>(a: &mut Analysis, name: &'static str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => {
            a.stages.push((name, Status::Pass));
            Some(v)
        }
        Err(e) => {
            a.stages.push((name, Status::Fail(e.to_string())));
            a.errors.push(e);
            None
        }
    }
}

fn skip(a: &mut Analysis, name: &'static str, why: &str) {
    a.stages.push((name, Status::Skipped(why.to_string())));
}

/// Results of the stages up to the asymptotic fit.
#[derive(Clone, Debug)]
pub struct Fitted {
    pub coeffs: CoeffSequence,
    pub diagram: NPDiagram,
    pub sector: SectorData,
    pub charpoly: CharPoly,
    pub normalized: NormalizedSequence,
    pub fit: AsymptoticFit,
}

/// Coefficients, sector, characteristic polynomial and asymptotic fit.
pub fn fit_instance(inst: &Instance) -> Result<Fitted> {
    let e = &inst.qde;
    let opts = &inst.options;
    let diagram = build_diagram(&e.degrees());
    let coeffs = taylor_coefficients(e, opts)?;
    let sig = estimate_sigma(&coeffs, &diagram, e.q.ln_abs_f64(), opts.snap_tol)?;
    let sector = sector_data(e, &diagram, sig.k);
    let charpoly = characteristic(e, &sector)?;
    let normalized = normalize(&coeffs, &sector);
    let mu = estimate_mu(&normalized, &charpoly, opts.snap_tol)?;
    let fit = fit_polynomials(&normalized, &charpoly, &mu, opts.snap_tol)?;
    Ok(Fitted { coeffs, diagram, sector, charpoly, normalized, fit })
}

/// Runs diagram → coefficients → sector → characteristic polynomial →
/// asymptotic fit → comparison function → zeros → progressions → growth.
pub fn analyze(inst: &Instance) -> Analysis {
    let e = &inst.qde;
    let opts = &inst.options;
    let diagram = build_diagram(&e.degrees());
    let solvability = validate_solvability(e, opts.n_max);
    let mut a = Analysis {
        instance: inst.clone(),
        solvability,
        diagram: diagram.clone(),
        coeffs: None,
        sigma: None,
        sector: None,
        charpoly: None,
        normalized: None,
        fit: None,
        period: None,
        comparison: None,
        zeros: None,
        progressions: None,
        correction: None,
        growth: None,
        stages: vec![("diagram", Status::Pass)],
        errors: Vec::new(),
    };
    let Some(c) = record(&mut a, "coefficients", taylor_coefficients(e, opts)) else { return a };
    a.coeffs = Some(c.clone());
    if diagram.k() == 0 {
        skip(&mut a, "sector", "the diagram has no segment of positive slope");
        return a;
    }
    let Some(sig) = record(&mut a, "sector", estimate_sigma(&c, &diagram, e.q.ln_abs_f64(), opts.snap_tol)) else { return a };
    let s = sector_data(e, &diagram, sig.k);
    a.sigma = Some(sig);
    a.sector = Some(s.clone());
    let Some(cp) = record(&mut a, "characteristic", characteristic(e, &s)) else { return a };
    a.charpoly = Some(cp.clone());
    let y = normalize(&c, &s);
    a.normalized = Some(y.clone());
    let fit = estimate_mu(&y, &cp, opts.snap_tol).and_then(|m| fit_polynomials(&y, &cp, &m, opts.snap_tol));
    let Some(fit) = record(&mut a, "asymptotics", fit) else { return a };
    a.fit = Some(fit.clone());
    if !fit.pass {
        a.stages.pop();
        a.stages.push(("asymptotics", Status::Fail("remainder decays slower than the bound δ".into())));
    }

    let r_max = opts.r_max.unwrap_or_else(|| default_r_max(&e.q, s.n));
    let q_pow_n = (s.n as f64 * e.q.ln_abs_f64()).exp();
    a.zeros = record(&mut a, "zeros", find_zeros(&c, r_max, q_pow_n));

    match record(&mut a, "period", detect_unity_period(&fit, s.m, opts.l_max, opts.unity_tol)) {
        Some(l) => {
            a.period = Some(l);
            a.comparison = record(&mut a, "comparison", build_comparison_f(&fit, &s, l, opts.unity_tol));
            match a.zeros.clone() {
                Some(zs) => {
                    match match_progressions(&zs, &e.q, s.n, s.m, l, &fit) {
                        Ok(p) => {
                            let verdict = p.verdict();
                            a.progressions = Some(p);
                            record(&mut a, "progressions", verdict);
                        }
                        Err(err) => {
                            record::<()>(&mut a, "progressions", Err(err));
                        }
                    }
                }
                None => skip(&mut a, "progressions", "no zero set"),
            }
        }
        None => {
            skip(&mut a, "comparison", "no commensuration period");
            skip(&mut a, "progressions", "withheld: dominant roots are not commensurate");
        }
    }
    if fit.kappa >= 1 && fit.dominant.len() == 1 && s.m == 2 {
        if let Some(zs) = &a.zeros {
            a.correction = Some(case2_correction(zs, &s.rho.powi(s.n)));
        }
    }

    let period = residual_period(&fit, &s, &e.q, opts.l_max * s.m as u32, opts.unity_tol);
    let step_period = period.unwrap_or(-e.q.ln_abs_f64() * s.n as f64 / s.m as f64);
    let r_lo = 10f64.max(10.0 / fit.mu.to_f64());
    let r_hi = opts.r_max.unwrap_or_else(|| ScaledSeries::new(&c).radius_for_peak(c.n_max() * 3 / 5));
    if r_hi > r_lo * 1e4 {
        let h = (step_period / GRID_STEPS as f64).max((r_hi / r_lo).ln() / MAX_GRID_POINTS as f64);
        let grid = log_grid(r_lo, r_hi, h * GRID_STEPS as f64, GRID_STEPS);
        let g = growth_residual(&c, &fit, &s, &e.q, &grid, period);
        if let Some(g) = record(&mut a, "growth", g) {
            if !g.pass() {
                a.stages.pop();
                a.stages.push(("growth", Status::Fail("growth residual criteria not met".into())));
            }
            a.growth = Some(g);
        }
    } else {
        skip(&mut a, "growth", "the usable radius spans fewer than four decades");
    }
    a
}

/// Reruns at doubled precision while a stage reports exhausted precision.
pub fn analyze_escalating(inst: &Instance) -> (Analysis, Vec<usize>) {
    let mut history = vec![inst.options.precision_bits];
    let mut a = analyze(inst);
    while a.exit_code() == 5 && *history.last().unwrap() * 2 <= MAX_ESCALATED_BITS {
        let p = history.last().unwrap() * 2;
        history.push(p);
        let mut next = Instance { qde: inst.qde.with_prec(p), options: inst.options.clone() };
        next.options.precision_bits = p;
        a = analyze(&next);
    }
    (a, history)
}

pub fn input_hash(text: &str) -> String {
    let d = Sha256::digest(text.as_bytes());
    d.iter().map(|b| format!("{b:02x}")).collect()
}

/// Provenance block embedded in every report.
pub fn manifest(command: &str, inst: &Instance, hash: &str, history: &[usize], stages: &[(&'static str, Status)]) -> Value {
    let mut st = Map::new();
    for (k, s) in stages {
        st.insert((*k).to_string(), s.to_json());
    }
    json!({
        "command": command,
        "options": inst.options.to_json(),
        "input_sha256": hash,
        "precision_history": history,
        "stages": Value::Object(st),
    })
}

/// The full report; keys are emitted in sorted order.
pub fn report(a: &Analysis, command: &str, hash: &str, history: &[usize]) -> Value {
    let mut r = Map::new();
    r.insert("schema".into(), json!(SCHEMA));
    r.insert("manifest".into(), manifest(command, &a.instance, hash, history, &a.stages));
    r.insert("instance".into(), instance_to_json(&a.instance));
    r.insert("diagram".into(), a.diagram.to_json());
    r.insert(
        "solvability".into(),
        json!({"warnings": a.solvability.warnings, "resonances": a.solvability.resonances}),
    );
    r.insert("exit_code".into(), json!(a.exit_code()));
    r.insert("errors".into(), json!(a.errors.iter().map(|e| e.to_string()).collect::<Vec<_>>()));
    if let Some(c) = &a.coeffs {
        r.insert(
            "coefficients".into(),
            json!({
                "n_max": c.n_max(),
                "resonances": c.resonances,
                "free_choices": c.free_choices.iter().map(|(n, v)| json!({"n": n, "value": v.to_pair()})).collect::<Vec<_>>(),
                "max_residual_ln": format!("{:.3}", c.max_residual),
            }),
        );
    }
    if let (Some(sig), Some(s)) = (&a.sigma, &a.sector) {
        let mut v = s.to_json();
        v["sigma_estimate"] = json!(format!("{:e}", sig.sigma_hat));
        r.insert("sector".into(), v);
    }
    if let Some(cp) = &a.charpoly {
        r.insert("characteristic".into(), cp.to_json());
    }
    if let Some(f) = &a.fit {
        r.insert("asymptotics".into(), f.to_json());
    }
    if let Some(l) = a.period {
        r.insert("L".into(), json!(l));
    }
    if let Some(cf) = &a.comparison {
        r.insert("comparison".into(), cf.to_json());
    }
    if let Some(z) = &a.zeros {
        r.insert("zeros".into(), z.to_json());
    }
    if let Some(p) = &a.progressions {
        r.insert("progressions".into(), p.to_json());
    }
    if let Some(t) = &a.correction {
        r.insert(
            "correction".into(),
            json!(t.iter().map(|(n, v)| json!({"n": n, "value": format!("{v:e}")})).collect::<Vec<_>>()),
        );
    }
    if let Some(g) = &a.growth {
        r.insert("growth".into(), g.to_json());
    }
    Value::Object(r)
}
