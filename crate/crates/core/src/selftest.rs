//! Built-in oracle suite: every check compares computed values against a
//! closed form with tolerances scaled to the working precision.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::apnum::{APComplex, Real};
use crate::asymfit::estimate_mu_from;
use crate::error::{Error, Result};
use crate::fixtures;
use crate::pipeline::fit_instance;
use crate::recurrence::solve_perturbed;
use crate::theta::{build_comparison_f, theta, triple_product};
use crate::zeros::detect_unity_period;

const SEED: u64 = 0x7165_6466;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn from(name: &'static str, r: Result<String>) -> Self {
        match r {
            Ok(detail) => Check { name, pass: true, detail },
            Err(e) => Check { name, pass: false, detail: e.to_string() },
        }
    }
}

fn fail(msg: String) -> Error {
    Error::Domain(msg)
}

/// Runs the full suite at `prec` bits.
pub fn run(prec: usize) -> Vec<Check> {
    vec![
        Check::from("theta-triple-product", theta_triple_product(prec, 100)),
        Check::from("exact-perturbed-recurrence", exact_recurrence(prec)),
        Check::from("partial-theta-convention", convention_guard(prec)),
        Check::from("case1-coefficient-oracle", coefficient_oracle(prec)),
        Check::from("comparison-product-identity", product_identity(prec)),
    ]
}

pub fn summary(checks: &[Check]) -> Value {
    json!({
        "pass": checks.iter().all(|c| c.pass),
        "checks": checks.iter().map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail})).collect::<Vec<_>>(),
    })
}

/// Relative tolerance `2^{-k}` with `k = p·100/256`: about `10⁻³⁰` at 256 bits.
pub fn theta_tolerance_bits(prec: usize) -> f64 {
    prec as f64 * 100.0 / 256.0
}

/// Bilateral series against Jacobi's triple product at seeded random points
/// with `|q| ≤ 0.8` and `10⁻² ≤ |z| ≤ 10²`; returns the worst `log2` relative difference.
pub fn theta_worst_defect(prec: usize, points: usize) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..points {
        let qm: f64 = rng.gen_range(0.05..0.8);
        let qa: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let zm: f64 = 10f64.powf(rng.gen_range(-2.0..2.0));
        let za: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let q = APComplex::from_f64(qm * qa.cos(), qm * qa.sin(), prec);
        let z = APComplex::from_f64(zm * za.cos(), zm * za.sin(), prec);
        let d = APComplex::rel_dist(&theta(&z, &q)?, &triple_product(&z, &q)?);
        if !d.is_zero() {
            worst = worst.max(d.ln_abs_f64() / std::f64::consts::LN_2);
        }
    }
    Ok(worst)
}

fn theta_triple_product(prec: usize, points: usize) -> Result<String> {
    let worst = theta_worst_defect(prec, points)?;
    let bound = -theta_tolerance_bits(prec);
    if worst == f64::NEG_INFINITY {
        Ok(format!("{points} points, all agree to the last bit"))
    } else if worst <= bound {
        Ok(format!("{points} points, worst log2 relative difference {worst:.1} ≤ {bound:.1}"))
    } else {
        Err(fail(format!("log2 relative difference {worst:.1} exceeds {bound:.1}")))
    }
}

/// `y(n) = 2^{(n+1)²}` for `1 ≤ n ≤ n_max` from `y(1) = 16`, `y(2) = 512`.
pub fn exact_recurrence_values(prec: usize, n_max: usize) -> Result<Vec<APComplex>> {
    let lre = fixtures::fast_growth_recurrence(prec);
    let init = [APComplex::from_i64(16, prec), APComplex::from_i64(512, prec)];
    solve_perturbed(&lre, 1, &init, n_max)
}

fn exact_recurrence(prec: usize) -> Result<String> {
    let y = exact_recurrence_values(prec, 20)?;
    let two = Real::from_i64(2, prec);
    for (i, v) in y.iter().enumerate() {
        let n = i as i64 + 1;
        let expect = APComplex::from_real(two.powi((n + 1) * (n + 1)));
        if *v != expect {
            return Err(fail(format!("y({n}) differs from 2^{}", (n + 1) * (n + 1))));
        }
    }
    let mut logs = vec![f64::NEG_INFINITY];
    logs.extend(y.iter().map(|v| v.ln_abs_f64()));
    match estimate_mu_from(&logs, &[Real::one(prec)], 0.05) {
        Err(Error::GrowthRestrictionViolated { limit }) => Ok(format!("exact for n ≤ 20; fit refused, n² coefficient {limit:.4}")),
        Err(e) => Err(fail(format!("expected a growth restriction refusal, got: {e}"))),
        Ok(_) => Err(fail("the fit accepted a sequence growing like 2^{n²}".into())),
    }
}

fn convention_guard(prec: usize) -> Result<String> {
    let inst = fixtures::partial_theta(prec);
    let f = fit_instance(&inst)?;
    let sqrt2 = Real::from_i64(2, prec).sqrt();
    let raw_gap = ((f.fit.mu_raw - sqrt2.to_f64()) / sqrt2.to_f64()).abs();
    let snapped = (&f.fit.mu - &sqrt2).abs();
    if raw_gap > 1e-6 || !(snapped.is_zero() || snapped.ln_abs_f64() < -(prec as f64 / 2.0) * std::f64::consts::LN_2) {
        return Err(fail(format!("μ estimate {} is not √2 (relative gap {raw_gap:e})", f.fit.mu_raw)));
    }
    let unreversed: Vec<Real> = f.charpoly.roots_pk.iter().map(|r| r.value.abs()).collect();
    match estimate_mu_from(&f.normalized.log_abs(), &unreversed, inst.options.snap_tol) {
        Err(Error::NoModulusMatch { .. }) => Ok(format!("μ = √2 (relative gap {raw_gap:.1e}); unreversed roots rejected")),
        other => Err(fail(format!("unreversed characteristic roots were not rejected: {other:?}"))),
    }
}

fn coefficient_oracle(prec: usize) -> Result<String> {
    let inst = fixtures::case1_gamma2_single(prec);
    let mut opts = inst.options.clone();
    opts.n_max = 80;
    let c = crate::recurrence::taylor_coefficients(&inst.qde, &opts)?;
    let (l1, _) = fixtures::case1_roots(&APComplex::from_i64(2, prec));
    let root_q = inst.qde.q.sqrt();
    let mut worst = f64::NEG_INFINITY;
    for n in 0..=80i64 {
        let expect = &l1.powi(n) * &root_q.powi(n * n);
        let d = APComplex::rel_dist(&c.values[n as usize], &expect);
        if !d.is_zero() {
            worst = worst.max(d.ln_abs_f64() / std::f64::consts::LN_2);
        }
    }
    let bound = -(prec as f64) / 2.0;
    if worst <= bound {
        Ok(format!("n ≤ 80, worst log2 relative error {worst:.1} ≤ {bound:.1}"))
    } else {
        Err(fail(format!("log2 relative error {worst:.1} exceeds {bound:.1}")))
    }
}

/// Comparison function of the two-progression fixture: the worst functional
/// equation residual over 20 seeded points and the product defect, both in `log2`.
pub fn comparison_defects(prec: usize) -> Result<(f64, f64)> {
    let inst = fixtures::case1_gamma2(prec);
    let f = fit_instance(&inst)?;
    let l = detect_unity_period(&f.fit, f.sector.m, inst.options.l_max, inst.options.unity_tol)?;
    let cf = build_comparison_f(&f.fit, &f.sector, l, inst.options.unity_tol)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 1);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let m: f64 = 10f64.powf(rng.gen_range(-1.0..1.0));
        let a: f64 = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        worst = worst.max(cf.functional_equation_residual(&APComplex::from_f64(m * a.cos(), m * a.sin(), prec))?);
    }
    Ok((worst, cf.product_defect()))
}

fn product_identity(prec: usize) -> Result<String> {
    let (fe, prod) = comparison_defects(prec)?;
    let bound = -(prec as f64) / 4.0;
    if fe <= bound && prod <= bound {
        Ok(format!("functional equation {fe:.1}, product identity {prod:.1} (log2, bound {bound:.1})"))
    } else {
        Err(fail(format!("functional equation {fe:.1}, product identity {prod:.1} exceed {bound:.1}")))
    }
}
