//! Maximum modulus, the two-term growth law and the order functional.

use std::f64::consts::PI;

use serde_json::{json, Value};

use crate::apnum::APComplex;
use crate::asymfit::{lstsq, upper_hull, AsymptoticFit};
use crate::diagram::SectorData;
use crate::error::{Error, Result};
use crate::recurrence::CoeffSequence;
use crate::theta::drift;

/// Terms more than this many nats below the largest one are dropped.
const TERM_CUTOFF: f64 = 40.0;
const LOG_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct MaxModulus {
    pub log_m: f64,
    pub log_max_term: f64,
    pub angle: f64,
}

/// Taylor coefficients in polar form, `α_n = e^{l_n + iφ_n}`, for evaluating
/// `f(z)/(max term)` in double precision at any radius.
#[derive(Clone, Debug)]
pub struct ScaledSeries {
    logs: Vec<f64>,
    args: Vec<f64>,
}

impl ScaledSeries {
    pub fn new(c: &CoeffSequence) -> Self {
        let logs = c.log_abs();
        let args = c.values.iter().map(|v| if v.is_zero() { 0.0 } else { v.arg().to_f64() }).collect();
        ScaledSeries { logs, args }
    }

    /// Index of the maximal term and its log at `ln r`.
    pub fn peak(&self, lr: f64) -> (usize, f64) {
        self.logs
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_finite())
            .map(|(n, l)| (n, l + n as f64 * lr))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
    }

    /// Largest `r` whose maximal term has index at most `n`.
    pub fn radius_for_peak(&self, n: usize) -> f64 {
        let (mut lo, mut hi) = (-50.0f64, 700.0f64);
        if self.peak(hi).0 <= n {
            return hi.exp();
        }
        for _ in 0..80 {
            let mid = (lo + hi) / 2.0;
            if self.peak(mid).0 <= n {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo.exp()
    }

    /// `ln M(r, f)` from `2D` equally spaced angles refined by golden-section
    /// search, together with the log of the maximal term.
    pub fn max_modulus(&self, r: f64) -> Result<MaxModulus> {
        let lr = r.ln();
        let (_, top) = self.peak(lr);
        if !top.is_finite() {
            return Ok(MaxModulus { log_m: f64::NEG_INFINITY, log_max_term: top, angle: 0.0 });
        }
        let kept: Vec<usize> = (0..self.logs.len()).filter(|&n| self.logs[n] + n as f64 * lr >= top - TERM_CUTOFF).collect();
        let (lo, hi) = (kept[0], *kept.last().unwrap());
        if hi + 4 >= self.logs.len() && self.logs.len() > 8 {
            return Err(Error::PrecisionExhausted(format!("coefficients up to n = {} do not reach r = {r:e}", self.logs.len() - 1)));
        }
        let w: Vec<(f64, f64)> = (lo..=hi)
            .map(|n| {
                let t = self.logs[n] + n as f64 * lr - top;
                if t < -TERM_CUTOFF - 1.0 {
                    (0.0, 0.0)
                } else {
                    let m = t.exp();
                    (m * self.args[n].cos(), m * self.args[n].sin())
                }
            })
            .collect();
        let eval = |theta: f64| -> f64 {
            let (c, s) = (theta.cos(), theta.sin());
            let (mut re, mut im) = (0.0, 0.0);
            for &(a, b) in w.iter().rev() {
                let nr = re * c - im * s + a;
                im = re * s + im * c + b;
                re = nr;
            }
            top + (re * re + im * im).sqrt().ln()
        };
        let k = (2 * (hi - lo).max(8)).max(16);
        let h = 2.0 * PI / k as f64;
        let samples: Vec<f64> = (0..k).map(|i| eval(i as f64 * h)).collect();
        let (best, _) = samples.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
        let (mut a, mut b) = ((best as f64 - 1.0) * h, (best as f64 + 1.0) * h);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let mut f1 = eval(x1);
        let mut f2 = eval(x2);
        let mut best_v = samples[best];
        let mut best_t = best as f64 * h;
        for _ in 0..200 {
            let (v, t) = if f1 > f2 { (f1, x1) } else { (f2, x2) };
            let gain = v - best_v;
            if v > best_v {
                best_v = v;
                best_t = t;
            }
            if (b - a) < 1e-12 || (gain.abs() < LOG_TOL * best_v.abs().max(1.0) && (b - a) < h * 1e-3) {
                break;
            }
            if f1 > f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = eval(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = eval(x2);
            }
        }
        Ok(MaxModulus { log_m: best_v, log_max_term: top, angle: best_t.rem_euclid(2.0 * PI) })
    }
}

pub fn max_modulus(c: &CoeffSequence, r: f64) -> Result<MaxModulus> {
    ScaledSeries::new(c).max_modulus(r)
}

/// Geometric grid with `steps` points per multiplicative period `e^{period}`.
pub fn log_grid(r_min: f64, r_max: f64, period: f64, steps: usize) -> Vec<f64> {
    let h = period / steps as f64;
    let count = ((r_max.ln() - r_min.ln()) / h).floor() as usize;
    (0..=count).map(|i| (r_min.ln() + i as f64 * h).exp()).collect()
}

#[derive(Clone, Debug)]
pub struct GrowthRow {
    pub r: f64,
    pub log_m: f64,
    pub log_max_term: f64,
    pub e: f64,
}

#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    pub sigma: f64,
    pub mu: f64,
    pub kappa: usize,
    /// Period of the residual in `ln r`.
    pub period: Option<f64>,
    pub range_first: f64,
    pub range_top: f64,
    pub periodicity_defect: Option<f64>,
    pub drift_slope: f64,
    pub order_lhs: f64,
    pub order_rhs: f64,
    pub pass_range: bool,
    pub pass_periodic: bool,
    pub pass_drift: bool,
}

impl GrowthReport {
    pub fn pass(&self) -> bool {
        self.pass_range && self.pass_periodic && self.pass_drift
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,logM,log_max_term,E\n");
        for row in &self.rows {
            s.push_str(&format!("{:e},{:e},{:e},{:e}\n", row.r, row.log_m, row.log_max_term, row.e));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let f = |x: f64| format!("{x:e}");
        json!({
            "sigma": f(self.sigma),
            "mu": f(self.mu),
            "kappa": self.kappa,
            "period": self.period.map(f),
            "range_first": f(self.range_first),
            "range_top": f(self.range_top),
            "periodicity_defect": self.periodicity_defect.map(f),
            "drift_slope": f(self.drift_slope),
            "order_lhs": f(self.order_lhs),
            "order_rhs": f(self.order_rhs),
            "pass_range": self.pass_range,
            "pass_periodic": self.pass_periodic,
            "pass_drift": self.pass_drift,
            "pass": self.pass(),
        })
    }
}

/// Period of `E(r)` in `ln r`: `ord·(-ln|q|)/σ`, where `ord` is the order of
/// the group generated by the dominant root ratios (`None` when they are not
/// roots of unity of order at most `max_order`).
pub fn residual_period(fit: &AsymptoticFit, s: &SectorData, q: &APComplex, max_order: u32, tol: f64) -> Option<f64> {
    let lambda = &fit.dominant[0].0;
    let fracs: Vec<f64> = fit.dominant.iter().map(|(l, _)| (l / lambda).arg().to_f64() / (2.0 * PI)).collect();
    let ord = (1..=max_order).find(|&k| fracs.iter().all(|f| {
        let x = k as f64 * f;
        (x - x.round()).abs() <= tol
    }))?;
    let sigma = s.m as f64 / s.n as f64;
    Some(ord as f64 * -q.ln_abs_f64() / sigma)
}

/// Two-term growth law residual
/// `E(r) = ln M(r) - [σ/(-2 ln|q|)(ln μr)² + κ ln ln r]` and its pass criteria.
pub fn growth_residual(c: &CoeffSequence, fit: &AsymptoticFit, s: &SectorData, q: &APComplex, r_grid: &[f64], period: Option<f64>) -> Result<GrowthReport> {
    let sigma = s.m as f64 / s.n as f64;
    let lq = q.ln_abs_f64();
    let mu = fit.mu.to_f64();
    let kappa = fit.kappa;
    let e_of = |r: f64, log_m: f64| {
        let x = (mu * r).ln();
        log_m - (sigma / (-2.0 * lq) * x * x + kappa as f64 * r.ln().ln())
    };
    let series = ScaledSeries::new(c);
    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let m = series.max_modulus(r)?;
        rows.push(GrowthRow { r, log_m: m.log_m, log_max_term: m.log_max_term, e: e_of(r, m.log_m) });
    }
    let (r_lo, r_hi) = (r_grid[0], r_grid[r_grid.len() - 1]);
    let range = |lo: f64, hi: f64| {
        let v: Vec<f64> = rows.iter().filter(|w| w.r >= lo && w.r <= hi).map(|w| w.e).collect();
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let range_first = range(r_lo, r_lo * 100.0);
    let range_top = range(r_hi / 100.0, r_hi);
    let pass_range = range_top <= range_first * 1.1 + 1e-9;

    let half = rows.len() / 2;
    let (periodicity_defect, pass_periodic) = match period {
        Some(per) => {
            let mut d: f64 = 0.0;
            for row in &rows[half..] {
                let r2 = row.r * per.exp();
                if r2 > r_hi {
                    continue;
                }
                let m2 = series.max_modulus(r2)?;
                d = d.max((row.e - e_of(r2, m2.log_m)).abs());
            }
            (Some(d), d <= 0.01)
        }
        None => (None, true),
    };
    let top: Vec<(f64, f64)> = rows[half..].iter().map(|w| (w.r, w.e)).collect();
    let drift_slope = drift(&top);
    let pass_drift = drift_slope.abs() < 0.05;
    let table: Vec<(f64, f64)> = rows.iter().map(|w| (w.r, w.log_m)).collect();
    let (order_lhs, order_rhs) = order_functional(c, &table);
    Ok(GrowthReport {
        rows,
        sigma,
        mu,
        kappa,
        period,
        range_first,
        range_top,
        periodicity_defect,
        drift_slope,
        order_lhs,
        order_rhs,
        pass_range,
        pass_periodic,
        pass_drift,
    })
}

/// `lim sup ln M/(ln r)²` and `(1/4) lim sup n²/(-ln|α_n|)`, each estimated
/// as the leading coefficient of a quadratic fit on the upper half of its data.
pub fn order_functional(c: &CoeffSequence, log_m: &[(f64, f64)]) -> (f64, f64) {
    let quad = |pts: &[(f64, f64)]| -> f64 {
        if pts.len() < 3 {
            return 0.0;
        }
        let s = pts.iter().map(|p| p.0.abs()).fold(1.0, f64::max);
        let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![1.0, p.0 / s, (p.0 / s).powi(2)]).collect();
        let rhs: Vec<f64> = pts.iter().map(|p| p.1).collect();
        lstsq(&rows, &rhs).map_or(0.0, |c| c[2] / (s * s))
    };
    let upper = |v: &[(f64, f64)]| v[v.len() / 2..].to_vec();
    let lm: Vec<(f64, f64)> = log_m.iter().filter(|p| p.1.is_finite()).map(|&(r, m)| (r.ln(), m)).collect();
    let lhs = if lm.is_empty() { 0.0 } else { quad(&upper(&lm)) };
    let logs = c.log_abs();
    let nonzero: Vec<(f64, f64)> = logs.iter().enumerate().filter(|(_, l)| l.is_finite()).map(|(n, &l)| (n as f64, -l)).collect();
    // finitely many nonzero coefficients: n²/(-ln|α_n|) = 0 from some index on
    let last_nonzero = nonzero.last().map_or(0.0, |p| p.0);
    let rhs = if nonzero.len() < 8 || last_nonzero < (logs.len() - 1) as f64 * 0.75 {
        0.0
    } else {
        let hull = upper_hull(&upper(&nonzero).iter().map(|&(n, l)| (n, -l)).collect::<Vec<_>>());
        let pts: Vec<(f64, f64)> = if hull.len() >= 3 { hull.iter().map(|&(n, l)| (n, -l)).collect() } else { upper(&nonzero) };
        let a = quad(&pts);
        if a > 0.0 { 0.25 / a } else { f64::INFINITY }
    };
    let clean = |x: f64| if x.abs() < 1e-9 { 0.0 } else { x };
    (clean(lhs), clean(rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(f: impl Fn(usize) -> f64, n: usize) -> CoeffSequence {
        let p = 192;
        CoeffSequence::from_values((0..=n).map(|k| APComplex::from_f64(f(k), 0.0, p)).collect(), p)
    }

    #[test]
    fn positive_coefficients_peak_at_angle_zero() {
        let c = seq(|n| 0.5f64.powi((n * n) as i32 / 2), 60);
        let m = max_modulus(&c, 30.0).unwrap();
        assert!(m.angle < 1e-9 || (2.0 * PI - m.angle) < 1e-9);
        let direct: f64 = (0..=60).map(|n| 0.5f64.powi((n * n) as i32 / 2) * 30f64.powi(n as i32)).sum();
        assert!((m.log_m - direct.ln()).abs() < 1e-9);
        assert!(m.log_max_term <= m.log_m);
    }

    #[test]
    fn polynomial_order_is_zero() {
        let c = seq(|n| if n < 4 { 1.0 } else { 0.0 }, 40);
        let table: Vec<(f64, f64)> = (1..20).map(|i| {
            let r = 10f64.powi(i);
            (r, max_modulus(&c, r).unwrap().log_m)
        }).collect();
        assert_eq!(order_functional(&c, &table), (0.0, 0.0));
    }
}
