//! Taylor coefficients by forward recurrence, normalization, and the
//! perturbed linear recurrence satisfied by the normalized coefficients.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::apnum::{APComplex, LogComplex, Real};
use crate::diagram::{CharPoly, SectorData};
use crate::error::{Error, Result};
use crate::model::{is_negligible, pivot, q_powers, zero_threshold, AnalysisOptions, FreeCoeffPolicy, QDE};

/// Taylor coefficients `α_0..α_{n_max}`.
#[derive(Clone, Debug)]
pub struct CoeffSequence {
    pub alpha: Vec<LogComplex>,
    /// The same coefficients in rectangular form.
    pub values: Vec<APComplex>,
    pub resonances: Vec<usize>,
    pub free_choices: Vec<(usize, APComplex)>,
    /// `ln` of the worst relative defect of the coefficient identity.
    pub max_residual: f64,
    prec: usize,
}

impl CoeffSequence {
    /// Wraps an externally given coefficient list.
    pub fn from_values(values: Vec<APComplex>, prec: usize) -> Self {
        let alpha = values.iter().map(LogComplex::from_complex).collect();
        CoeffSequence { alpha, values, resonances: Vec::new(), free_choices: Vec::new(), max_residual: f64::NEG_INFINITY, prec }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn n_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// `ln|α_n|` as f64, `-inf` for zero coefficients.
    pub fn log_abs(&self) -> Vec<f64> {
        self.alpha.iter().map(LogComplex::log_mag_f64).collect()
    }
}

/// Forward solution of `Σ_i α_{n-i} c_i(n) = b_n`, `c_i(n) = Σ_j a_{j,i} q^{j(n-i)}`.
pub fn taylor_coefficients(e: &QDE, opts: &AnalysisOptions) -> Result<CoeffSequence> {
    let prec = e.prec();
    let n_max = opts.n_max;
    let m = e.order();
    let d = e.depth();
    let qpow = q_powers(&e.q, m * n_max);
    let mut free = match &opts.free_coeffs {
        FreeCoeffPolicy::Zero => Vec::new(),
        FreeCoeffPolicy::UserList(v) => v.clone(),
    }
    .into_iter();
    let mut values: Vec<APComplex> = Vec::with_capacity(n_max + 1);
    let mut resonances = Vec::new();
    let mut free_choices = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for n in 0..=n_max {
        let b_n = e.b.coeff(n);
        let mut acc = b_n.clone();
        let mut scale = b_n.abs();
        for i in 1..=n.min(d) {
            let c_i = c_in(e, &qpow, i, n);
            if c_i.is_zero() {
                continue;
            }
            let t = &values[n - i] * &c_i;
            scale = scale + t.abs();
            acc = &acc - &t;
        }
        let (c0, c0_scale) = pivot(e, &qpow, n);
        let alpha = if is_negligible(&c0, &c0_scale, prec) {
            resonances.push(n);
            if !is_negligible(&acc, &scale, prec) {
                let defect = if scale.is_zero() { f64::INFINITY } else { (acc.ln_abs_f64() - scale.ln_abs_f64()).exp() };
                return Err(Error::ResonanceInconsistent { n, defect });
            }
            let v = free.next().unwrap_or_else(|| APComplex::zero(prec));
            free_choices.push((n, v.clone()));
            v
        } else {
            let a = &acc / &c0;
            let lhs_scale = scale + (&a * &c0).abs();
            let defect = &(&a * &c0) - &acc;
            if !defect.is_zero() && !lhs_scale.is_zero() {
                worst = worst.max(defect.ln_abs_f64() - lhs_scale.ln_abs_f64());
            }
            a
        };
        values.push(alpha);
    }
    if worst > zero_threshold(prec) {
        return Err(Error::PrecisionExhausted(format!("coefficient defect exp({worst:.1}) exceeds budget")));
    }
    let alpha = values.iter().map(LogComplex::from_complex).collect();
    Ok(CoeffSequence { alpha, values, resonances, free_choices, max_residual: worst, prec })
}

fn c_in(e: &QDE, qpow: &[APComplex], i: usize, n: usize) -> APComplex {
    let mut c = APComplex::zero(e.prec());
    for j in 0..=e.order() {
        let a = e.coeff(j, i);
        if !a.is_zero() {
            c = &c + &(&a * &qpow[j * (n - i)]);
        }
    }
    c
}

/// Residual of the functional equation for the truncated series at `z`,
/// relative to `Σ_j |a_j(z)| Σ_n |α_n| |q^j z|^n + |b(z)|`.
pub fn defect_at(e: &QDE, c: &CoeffSequence, z: &APComplex) -> f64 {
    let eval = |w: &APComplex| {
        let mut v = APComplex::zero(c.prec);
        let mut s = Real::zero(c.prec);
        let r = w.abs();
        for a in c.values.iter().rev() {
            v = &(&v * w) + a;
            s = &s * &r + a.abs();
        }
        (v, s)
    };
    let mut total = -e.b.eval(z);
    let mut scale = e.b.abs_eval(z);
    let mut qj = APComplex::one(c.prec);
    for a in &e.a {
        let (f, fs) = eval(&(&qj * z));
        total = &total + &(&a.eval(z) * &f);
        scale = scale + a.abs_eval(z) * fs;
        qj = &qj * &e.q;
    }
    if total.is_zero() {
        return f64::NEG_INFINITY;
    }
    total.ln_abs_f64() - scale.ln_abs_f64()
}

/// `y(n) = α_n ρ^{-N n²}`.
#[derive(Clone, Debug)]
pub struct NormalizedSequence {
    pub y: Vec<LogComplex>,
    pub sector: SectorData,
}

impl NormalizedSequence {
    pub fn values(&self) -> Vec<APComplex> {
        self.y.iter().map(LogComplex::to_complex).collect()
    }

    pub fn log_abs(&self) -> Vec<f64> {
        self.y.iter().map(LogComplex::log_mag_f64).collect()
    }
}

pub fn normalize(c: &CoeffSequence, s: &SectorData) -> NormalizedSequence {
    let y = normalize_log(&c.alpha, &s.rho, s.n);
    NormalizedSequence { y, sector: s.clone() }
}

pub(crate) fn normalize_log(alpha: &[LogComplex], rho: &APComplex, n_exp: i64) -> Vec<LogComplex> {
    let prec = rho.prec();
    let log_rho = rho.with_prec(prec + 64).ln();
    alpha
        .iter()
        .enumerate()
        .map(|(n, a)| {
            let k = Real::from_i64(-n_exp * (n * n) as i64, prec + 64);
            a.shift(&(&k * &log_rho.re), &(&k * &log_rho.im))
        })
        .collect()
}

type CoeffFn = Arc<dyn Fn(usize) -> Vec<APComplex> + Send + Sync>;

/// `Σ_{i=0}^d B_i(n) y(n-i) = g_n`.
#[derive(Clone)]
pub struct PerturbedLRE {
    pub depth: usize,
    coeffs: CoeffFn,
    /// Right-hand side `g_n`; zero past the end.
    pub rhs: Vec<APComplex>,
    pub limits: Vec<APComplex>,
    pub s: usize,
    pub t: usize,
    pub tau: Real,
}

impl std::fmt::Debug for PerturbedLRE {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PerturbedLRE")
            .field("depth", &self.depth)
            .field("limits", &self.limits)
            .field("s", &self.s)
            .field("t", &self.t)
            .field("tau", &self.tau)
            .finish()
    }
}

impl PerturbedLRE {
    /// A recurrence from an explicit coefficient function; `s` and `t` are the
    /// first and last indices with nonzero limit.
    pub fn from_fn(
        limits: Vec<APComplex>,
        tau: Real,
        coeffs: impl Fn(usize) -> Vec<APComplex> + Send + Sync + 'static,
    ) -> Self {
        let s = limits.iter().position(|a| !a.is_zero()).unwrap_or(0);
        let t = limits.iter().rposition(|a| !a.is_zero()).unwrap_or(0);
        PerturbedLRE { depth: limits.len() - 1, coeffs: Arc::new(coeffs), rhs: Vec::new(), limits, s, t, tau }
    }

    /// Constant coefficients equal to `limits`.
    pub fn constant(limits: Vec<APComplex>) -> Self {
        let prec = limits[0].prec();
        let l = limits.clone();
        Self::from_fn(limits, Real::zero(prec), move |_| l.clone())
    }

    /// `(B_0(n), …, B_d(n))`.
    pub fn coeffs(&self, n: usize) -> Vec<APComplex> {
        (self.coeffs)(n)
    }

    /// `ln max_i |B_i(n) - a_i|`.
    pub fn limit_defect(&self, n: usize) -> f64 {
        self.coeffs(n)
            .iter()
            .zip(&self.limits)
            .map(|(b, a)| {
                let d = b - a;
                if d.is_zero() {
                    f64::NEG_INFINITY
                } else {
                    d.ln_abs_f64()
                }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `B_i(n) = Σ_j c_{j,i} ρ^{2n(ℓ + Mj - Ni)}`, right-hand side `b_n ρ^{2nℓ - N n²}`.
pub fn build_perturbed(e: &QDE, s: &SectorData, cp: &CharPoly) -> PerturbedLRE {
    let prec = e.prec();
    let depth = e.depth();
    let rho2 = &s.rho * &s.rho;
    let mut terms: Vec<Vec<(APComplex, i64)>> = vec![Vec::new(); depth + 1];
    for (&(j, i), c) in &cp.c {
        terms[i].push((c.clone(), s.weight(j, i)));
    }
    let mut limits = vec![APComplex::zero(prec); depth + 1];
    for &j in &s.i_k {
        let d = e.a[j].degree() as usize;
        limits[d] = &limits[d] + &cp.c[&(j, d)];
    }
    let rhs = e
        .b
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, b)| {
            let ni = n as i64;
            b * &s.rho.powi(2 * ni * s.ell - s.n * ni * ni)
        })
        .collect();
    let rho2_c = rho2.clone();
    let coeffs = move |n: usize| -> Vec<APComplex> {
        terms
            .iter()
            .map(|list| {
                list.iter().fold(APComplex::zero(prec), |acc, (c, w)| {
                    let f = if *w == 0 { APComplex::one(prec) } else { rho2_c.powi(n as i64 * w) };
                    &acc + &(c * &f)
                })
            })
            .collect()
    };
    let tau = rho2.abs();
    let mut lre = PerturbedLRE::from_fn(limits, tau, coeffs);
    lre.s = s.left.1 as usize;
    lre.t = s.right.1 as usize;
    lre.rhs = rhs;
    lre
}

/// Extends `y` forward from `initial = (y(start), y(start+1), …)`, solving each
/// step for the newest term. Terms before `start` count as zero.
pub fn solve_perturbed(lre: &PerturbedLRE, start: usize, initial: &[APComplex], n_max: usize) -> Result<Vec<APComplex>> {
    let mut y: Vec<APComplex> = initial.to_vec();
    let prec = initial.first().map_or(lre.tau.prec(), |v| v.prec()).max(lre.tau.prec());
    for n in start + initial.len()..=n_max {
        let b = lre.coeffs(n);
        let mut acc = lre.rhs.get(n).cloned().unwrap_or_else(|| APComplex::zero(prec));
        for (i, bi) in b.iter().enumerate().skip(1) {
            if n < start + i {
                break;
            }
            let idx = n - i - start;
            acc = &acc - &(bi * &y[idx]);
        }
        if b[0].is_zero() {
            return Err(Error::SingularStep(n));
        }
        y.push(&acc / &b[0]);
    }
    Ok(y)
}

/// CSV with columns `n, log_mag(α_n), arg(α_n), log_mag(y_n), arg(y_n)`.
pub fn coeffs_csv(c: &CoeffSequence, y: Option<&NormalizedSequence>) -> String {
    let mut out = String::from("n,log_mag_alpha,arg_alpha,log_mag_y,arg_y\n");
    let fmt = |x: f64| if x.is_finite() { format!("{x:.17e}") } else { "-inf".to_string() };
    for (n, a) in c.alpha.iter().enumerate() {
        let (ly, ay) = match y {
            Some(y) => (fmt(y.y[n].log_mag_f64()), fmt(y.y[n].arg_f64())),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(out, "{n},{},{},{ly},{ay}", fmt(a.log_mag_f64()), fmt(a.arg_f64()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apnum::APPoly;
    use crate::diagram::{build_diagram, characteristic, sector_data};

    fn partial_theta(prec: usize) -> QDE {
        let q = APComplex::from_f64(0.5, 0.0, prec);
        let a = vec![APPoly::from_f64(&[1.0], prec), APPoly::from_f64(&[0.0, -1.0], prec)];
        QDE::new(q, a, APPoly::from_f64(&[1.0], prec)).unwrap()
    }

    fn opts(n_max: usize) -> AnalysisOptions {
        AnalysisOptions { n_max, ..AnalysisOptions::default() }
    }

    #[test]
    fn partial_theta_coefficients() {
        let e = partial_theta(256);
        let c = taylor_coefficients(&e, &opts(40)).unwrap();
        assert_eq!(c.values[3].to_c64(), (0.125, 0.0));
        for n in 0..=40i64 {
            let expect = Real::from_f64(0.5, 256).powi(n * (n - 1) / 2);
            assert_eq!(c.values[n as usize].re, expect, "n = {n}");
        }
        let s = sector_data(&e, &build_diagram(&e.degrees()), 1);
        let y = normalize(&c, &s);
        for (n, v) in y.log_abs().iter().enumerate() {
            assert!((v - n as f64 * 0.5 * 2f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_tail_stays_zero() {
        let p = 128;
        let c = CoeffSequence::from_values(vec![APComplex::one(p), APComplex::zero(p)], p);
        let rho = APComplex::from_f64(0.5, 0.0, p);
        let y = normalize_log(&c.alpha, &rho, 1);
        assert!(y[1].is_zero());
    }

    #[test]
    fn perturbed_partial_theta() {
        let e = partial_theta(256);
        let s = sector_data(&e, &build_diagram(&e.degrees()), 1);
        let cp = characteristic(&e, &s).unwrap();
        let lre = build_perturbed(&e, &s, &cp);
        assert_eq!((lre.depth, lre.s, lre.t), (1, 0, 1));
        let b = lre.coeffs(7);
        assert_eq!(b[0].to_c64(), (1.0, 0.0));
        let inv = -s.rho.recip();
        assert!(APComplex::rel_dist(&b[1], &inv).ln_abs_f64() < -200.0);
    }

    #[test]
    fn one_term_recurrence() {
        let p = 256;
        let rho = APComplex::from_f64(0.5f64.sqrt(), 0.0, p);
        let lre = PerturbedLRE::constant(vec![APComplex::one(p), -rho.recip()]);
        let y = solve_perturbed(&lre, 0, &[APComplex::one(p)], 30).unwrap();
        let expect = rho.powi(-30);
        assert!(APComplex::rel_dist(&y[30], &expect).ln_abs_f64() < -230.0 * std::f64::consts::LN_2);
    }

    #[test]
    fn two_root_mixture() {
        // reversed (z-2)(z-3): y(n) - 5 y(n-1) + 6 y(n-2) = 0, y = A 2^n + B 3^n
        let p = 256;
        let c = |x: f64| APComplex::from_f64(x, 0.0, p);
        let lre = PerturbedLRE::constant(vec![c(1.0), c(-5.0), c(6.0)]);
        let y = solve_perturbed(&lre, 0, &[c(1.0), c(4.0)], 20).unwrap();
        // A + B = 1, 2A + 3B = 4 -> A = -1, B = 2
        let expect = -2f64.powi(20) + 2.0 * 3f64.powi(20);
        assert_eq!(y[20].to_c64().0, expect);
    }

    #[test]
    fn singular_step_is_reported() {
        let p = 128;
        let c = |x: f64| APComplex::from_f64(x, 0.0, p);
        let lre = PerturbedLRE::constant(vec![c(0.0), c(1.0)]);
        assert_eq!(solve_perturbed(&lre, 0, &[c(1.0)], 3).unwrap_err(), Error::SingularStep(1));
    }
}
