//! Empirical asymptotics of the Taylor coefficients: sector, dominant
//! modulus, polynomial amplitudes and remainder rate.

use serde_json::{json, Value};

use crate::apnum::{APComplex, Real};
use crate::diagram::{CharPoly, NPDiagram};
use crate::error::{Error, Result};
use crate::recurrence::{CoeffSequence, NormalizedSequence};

/// Quadratic coefficient of `ln|y(n)|` above which the growth restriction
/// `limsup ln|y(n)|/n² = 0` is considered violated.
pub const GROWTH_QUAD_TOL: f64 = 1e-2;
const MIN_TAIL: usize = 32;
const MIN_RESIDUAL_POINTS: usize = 8;

/// Tail window `[n_max/2, n_max]`.
pub fn tail_window(len: usize) -> (usize, usize) {
    let n_max = len.saturating_sub(1);
    (n_max / 2, n_max)
}

/// Upper convex hull of points sorted by abscissa.
pub fn upper_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut h: Vec<(f64, f64)> = Vec::new();
    for &p in pts {
        while h.len() >= 2 {
            let (a, b) = (h[h.len() - 2], h[h.len() - 1]);
            if (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0) >= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(p);
    }
    h
}

/// Least squares for `Σ_k c_k f_k(x) ≈ y` via normal equations.
pub fn lstsq(rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let k = rows.first()?.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for (r, &y) in rows.iter().zip(rhs) {
        for i in 0..k {
            for j in 0..k {
                a[i][j] += r[i] * r[j];
            }
            a[i][k] += r[i] * y;
        }
    }
    gauss(a)
}

fn gauss(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let k = a.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for row in 0..k {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..=k {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    Some((0..k).map(|i| a[i][k] / a[i][i]).collect())
}

/// Quadratic `a x² + b x + c` fitted through the upper envelope.
fn envelope_quadratic(pts: &[(f64, f64)]) -> Option<[f64; 3]> {
    let hull = upper_hull(pts);
    let use_pts = if hull.len() >= 3 { hull } else { pts.to_vec() };
    if use_pts.len() < 3 {
        return None;
    }
    // centred and scaled abscissa keeps the normal equations well conditioned
    let x0 = use_pts.iter().map(|p| p.0).sum::<f64>() / use_pts.len() as f64;
    let s = use_pts.iter().map(|p| (p.0 - x0).abs()).fold(1.0, f64::max);
    let rows: Vec<Vec<f64>> = use_pts.iter().map(|p| {
        let u = (p.0 - x0) / s;
        vec![u * u, u, 1.0]
    }).collect();
    let rhs: Vec<f64> = use_pts.iter().map(|p| p.1).collect();
    let c = lstsq(&rows, &rhs)?;
    let a = c[0] / (s * s);
    let b = c[1] / s - 2.0 * a * x0;
    let c0 = c[2] - c[1] * x0 / s + a * x0 * x0;
    Some([a, b, c0])
}

fn window_points(logs: &[f64]) -> Vec<(f64, f64)> {
    let (lo, hi) = tail_window(logs.len());
    (lo..=hi).filter(|&n| logs[n].is_finite()).map(|n| (n as f64, logs[n])).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaEstimate {
    pub k: usize,
    pub sigma_hat: f64,
}

/// Sector selection from the `n²` coefficient of `ln|α_n|`:
/// `ln|α_n| ≈ n² ln|q| / (2σ)`.
pub fn estimate_sigma(c: &CoeffSequence, diag: &NPDiagram, ln_abs_q: f64, snap_tol: f64) -> Result<SigmaEstimate> {
    let pts = window_points(&c.log_abs());
    if pts.len() < MIN_TAIL {
        return Err(Error::IllConditioned(format!(
            "only {} nonzero tail coefficients, need {MIN_TAIL}",
            pts.len()
        )));
    }
    let [a, _, _] = envelope_quadratic(&pts).ok_or_else(|| Error::IllConditioned("tail regression failed".into()))?;
    let sigma_hat = if a < 0.0 { ln_abs_q / (2.0 * a) } else { f64::INFINITY };
    let best = diag
        .slopes
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let sv = *s.numer() as f64 / *s.denom() as f64;
            (i + 1, ((sigma_hat - sv) / sv).abs())
        })
        .min_by(|x, y| x.1.total_cmp(&y.1));
    match best {
        Some((k, gap)) if gap < snap_tol => Ok(SigmaEstimate { k, sigma_hat }),
        _ => Err(Error::NoSectorMatch { estimate: sigma_hat }),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MuEstimate {
    /// Snapped modulus, an exact root modulus.
    pub mu: Real,
    /// Regression estimate before snapping.
    pub mu_raw: f64,
    /// Fitted `n²` coefficient of `ln|y(n)|`.
    pub quadratic: f64,
}

/// Dominant modulus from the envelope of `ln|y(n)|`, snapped to the moduli
/// of the roots of `Pk_rev`.
pub fn estimate_mu(y: &NormalizedSequence, cp: &CharPoly, snap_tol: f64) -> Result<MuEstimate> {
    let moduli: Vec<Real> = cp.roots.iter().map(|r| r.value.abs()).collect();
    estimate_mu_from(&y.log_abs(), &moduli, snap_tol)
}

/// [`estimate_mu`] on raw `ln|y(n)|` values (index = n) against candidate moduli.
pub fn estimate_mu_from(logs: &[f64], candidates: &[Real], snap_tol: f64) -> Result<MuEstimate> {
    let pts = window_points(logs);
    if pts.len() < 3 {
        return Err(Error::IllConditioned("fewer than 3 nonzero tail values".into()));
    }
    let [quadratic, _, _] = envelope_quadratic(&pts).ok_or_else(|| Error::IllConditioned("tail regression failed".into()))?;
    if quadratic.abs() > GROWTH_QUAD_TOL {
        return Err(Error::GrowthRestrictionViolated { limit: quadratic });
    }
    let hull = upper_hull(&pts);
    let use_pts = if hull.len() >= 4 { hull } else { pts };
    // ln|y| ≈ c + n ln μ; a κ ln n term shifts the slope by κ/n only
    let rows: Vec<Vec<f64>> = use_pts.iter().map(|p| vec![1.0, p.0]).collect();
    let rhs: Vec<f64> = use_pts.iter().map(|p| p.1).collect();
    let coef = lstsq(&rows, &rhs).ok_or_else(|| Error::IllConditioned("modulus regression failed".into()))?;
    let mu_raw = coef[1].exp();
    let best = candidates
        .iter()
        .map(|m| (m, ((m.to_f64() - mu_raw) / m.to_f64()).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1));
    match best {
        Some((m, gap)) if gap < snap_tol => Ok(MuEstimate { mu: m.clone(), mu_raw, quadratic }),
        _ => Err(Error::NoModulusMatch { estimate: mu_raw }),
    }
}

#[derive(Clone, Debug)]
pub struct AsymptoticFit {
    pub k: usize,
    pub mu: Real,
    pub mu_raw: f64,
    /// Dominant roots `λ_j` with `|λ_j| = μ` and their multiplicities.
    pub dominant: Vec<(APComplex, usize)>,
    /// `Q_j` coefficients in ascending powers of `n`, trimmed at the noise floor.
    pub q: Vec<Vec<APComplex>>,
    pub kappa: usize,
    pub delta: Real,
    /// Fitted exponential rate of the remainder, `None` when it sits at the noise floor.
    pub residual_rate: Option<f64>,
    pub pass: bool,
}

impl AsymptoticFit {
    /// `Σ_j Q_j(n) λ_j^n`.
    pub fn model(&self, n: usize) -> APComplex {
        let prec = self.mu.prec();
        let nn = APComplex::from_i64(n as i64, prec);
        let mut total = APComplex::zero(prec);
        for ((lam, _), q) in self.dominant.iter().zip(&self.q) {
            let mut poly = APComplex::zero(prec);
            for c in q.iter().rev() {
                poly = &(&poly * &nn) + c;
            }
            total = &total + &(&poly * &lam.powi(n as i64));
        }
        total
    }

    /// Leading coefficients `γ_j` of the `Q_j` of degree `κ` (zero otherwise).
    pub fn leading(&self) -> Vec<APComplex> {
        let prec = self.mu.prec();
        self.q.iter().map(|q| if q.len() == self.kappa + 1 { q[self.kappa].clone() } else { APComplex::zero(prec) }).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "mu": self.mu.to_decimal(),
            "mu_estimate": format!("{:e}", self.mu_raw),
            "dominant": self.dominant.iter().map(|(l, m)| json!({"value": l.to_pair(), "multiplicity": m})).collect::<Vec<_>>(),
            "Q": self.q.iter().map(|q| q.iter().map(APComplex::to_pair).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "kappa": self.kappa,
            "delta": self.delta.to_decimal(),
            "residual_rate": self.residual_rate.map_or_else(|| "noise-floor".to_string(), |r| format!("{r:e}")),
            "pass": self.pass,
        })
    }
}

/// Complex Gaussian elimination with partial pivoting.
fn solve_complex(mut a: Vec<Vec<APComplex>>, mut b: Vec<APComplex>) -> Option<Vec<APComplex>> {
    let k = b.len();
    let scale = a.iter().flatten().map(|x| x.ln_abs_f64()).fold(f64::NEG_INFINITY, f64::max);
    let prec = b[0].prec();
    let tiny = scale - (prec as f64 / 2.0) * std::f64::consts::LN_2;
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].ln_abs_f64().total_cmp(&a[j][col].ln_abs_f64()))?;
        if a[piv][col].is_zero() || a[piv][col].ln_abs_f64() < tiny {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..k {
            let f = &a[row][col] / &a[col][col];
            for c in col..k {
                let t = &f * &a[col][c];
                a[row][c] = &a[row][c] - &t;
            }
            let t = &f * &b[col];
            b[row] = &b[row] - &t;
        }
    }
    let mut x = vec![APComplex::zero(prec); k];
    for i in (0..k).rev() {
        let mut s = b[i].clone();
        for j in i + 1..k {
            s = &s - &(&a[i][j] * &x[j]);
        }
        x[i] = &s / &a[i][i];
    }
    Some(x)
}

/// Least-squares fit of `y(n)` against `n^e λ_j^n` over the tail window,
/// with the remainder rate compared against `δ`.
pub fn fit_polynomials(y: &NormalizedSequence, cp: &CharPoly, mu: &MuEstimate, snap_tol: f64) -> Result<AsymptoticFit> {
    let prec = mu.mu.prec();
    let rel_tol = -((prec / 2) as f64) * std::f64::consts::LN_2;
    let same = |a: &Real, b: &Real| {
        let d = (a - b).abs();
        d.is_zero() || d.ln_abs_f64() - b.ln_abs_f64() < rel_tol
    };
    let dominant: Vec<(APComplex, usize)> =
        cp.roots.iter().filter(|r| same(&r.value.abs(), &mu.mu)).map(|r| (r.value.clone(), r.multiplicity)).collect();
    let sub = cp
        .roots
        .iter()
        .map(|r| r.value.abs())
        .filter(|m| *m < mu.mu && !same(m, &mu.mu))
        .fold(Real::zero(prec), Real::max);
    let tau_mu = y.sector.rho.norm_sqr().sqrt() * &mu.mu;
    let delta = sub.max(tau_mu).mul_f64(1.0 + 2f64.powi(-10));

    let values = y.values();
    let (mut lo, hi) = tail_window(values.len());
    let cols: usize = dominant.iter().map(|d| d.1).sum();
    // amplitudes come from the end of the window, where the remainder is smallest,
    // so the residual on the rest of the window measures the remainder itself
    let mut width = (4 * cols).max(16);
    let solved = loop {
        let fit_lo = hi.saturating_sub(width).max(lo);
        match fit_window(&values, &dominant, &mu.mu, lo, fit_lo, hi) {
            Some(s) => break (s, fit_lo),
            None if fit_lo > lo => width *= 2,
            None if lo > hi / 4 => lo = hi / 4,
            None => return Err(Error::IllConditioned("basis {n^e λ^n} is collinear on the window".into())),
        }
    };
    let ((beta, n_mid, resid, t_scale), fit_lo) = solved;

    let beta_max = beta.iter().flatten().map(|b| b.ln_abs_f64()).fold(f64::NEG_INFINITY, f64::max);
    let floor_q = beta_max - (prec as f64 / 4.0) * std::f64::consts::LN_2;
    let mut q = Vec::new();
    let mut kappa = 0;
    let nm = Real::from_i64(n_mid as i64, prec);
    for coeffs in &beta {
        let mut qj: Vec<APComplex> = coeffs
            .iter()
            .enumerate()
            .map(|(e, b)| if b.is_zero() || b.ln_abs_f64() < floor_q { APComplex::zero(prec) } else { b.scale(&nm.powi(-(e as i64))) })
            .collect();
        while qj.last().is_some_and(|c| c.is_zero()) {
            qj.pop();
        }
        if !qj.is_empty() {
            kappa = kappa.max(qj.len() - 1);
        }
        q.push(qj);
    }
    if q.iter().all(|qj| qj.is_empty()) {
        return Err(Error::IllConditioned("all fitted amplitudes vanish".into()));
    }

    // remainder rate relative to μ^n, ignoring values at the noise floor
    let noise = t_scale - (3.0 * prec as f64 / 4.0) * std::f64::consts::LN_2 + 8.0 * std::f64::consts::LN_2;
    let pts: Vec<(f64, f64)> =
        resid.iter().filter(|(n, r)| r.is_finite() && *r > noise && (*n < fit_lo || fit_lo == lo)).map(|&(n, r)| (n as f64, r)).collect();
    let residual_rate = if pts.len() < MIN_RESIDUAL_POINTS {
        None
    } else {
        let hull = upper_hull(&pts);
        let use_pts = if hull.len() >= 2 { hull } else { pts };
        let rows: Vec<Vec<f64>> = use_pts.iter().map(|p| vec![1.0, p.0]).collect();
        let rhs: Vec<f64> = use_pts.iter().map(|p| p.1).collect();
        lstsq(&rows, &rhs).map(|c| mu.mu.to_f64() * c[1].exp())
    };
    let pass = match residual_rate {
        None => true,
        Some(r) => r <= delta.to_f64() * (1.0 + snap_tol),
    };
    Ok(AsymptoticFit {
        k: y.sector.k,
        mu: mu.mu.clone(),
        mu_raw: mu.mu_raw,
        dominant,
        q,
        kappa,
        delta,
        residual_rate,
        pass,
    })
}

type WindowFit = (Vec<Vec<APComplex>>, usize, Vec<(usize, f64)>, f64);

/// Fits `y(n)/μ^n ≈ Σ β_{j,e} (n/n_mid)^e ω_j^n`, `ω_j = λ_j/μ`, on
/// `[fit_lo, hi]` and reports residuals on `[lo, hi]`.
fn fit_window(values: &[APComplex], dominant: &[(APComplex, usize)], mu: &Real, lo: usize, fit_lo: usize, hi: usize) -> Option<WindowFit> {
    let prec = mu.prec();
    let n_mid = (lo + hi) / 2;
    let nm = Real::from_i64(n_mid.max(1) as i64, prec);
    let omega: Vec<APComplex> = dominant.iter().map(|(l, _)| l.scale(&(Real::one(prec) / mu))).collect();
    let inv_mu = Real::one(prec) / mu;
    let cols: usize = dominant.iter().map(|d| d.1).sum();
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for n in lo..=hi {
        let t = values[n].scale(&inv_mu.powi(n as i64));
        let x = Real::from_i64(n as i64, prec) / &nm;
        let mut row = Vec::with_capacity(cols);
        for ((_, m), w) in dominant.iter().zip(&omega) {
            let wn = w.powi(n as i64);
            let mut xe = Real::one(prec);
            for _ in 0..*m {
                row.push(wn.scale(&xe));
                xe = &xe * &x;
            }
        }
        rows.push(row);
        targets.push(t);
    }
    // normal equations A^H A β = A^H t
    let mut ata = vec![vec![APComplex::zero(prec); cols]; cols];
    let mut atb = vec![APComplex::zero(prec); cols];
    for (row, t) in rows.iter().zip(&targets).skip(fit_lo - lo) {
        for i in 0..cols {
            let ci = row[i].conj();
            for j in 0..cols {
                ata[i][j] = &ata[i][j] + &(&ci * &row[j]);
            }
            atb[i] = &atb[i] + &(&ci * t);
        }
    }
    let flat = solve_complex(ata, atb)?;
    let mut beta = Vec::new();
    let mut it = flat.into_iter();
    for (_, m) in dominant {
        beta.push((0..*m).map(|_| it.next().unwrap()).collect::<Vec<_>>());
    }
    let t_scale = targets.iter().map(|t| t.ln_abs_f64()).fold(f64::NEG_INFINITY, f64::max);
    let resid = rows
        .iter()
        .zip(&targets)
        .enumerate()
        .map(|(i, (row, t))| {
            let model = row.iter().zip(beta.iter().flatten()).fold(APComplex::zero(prec), |s, (r, b)| &s + &(r * b));
            let r = t - &model;
            (lo + i, if r.is_zero() { f64::NEG_INFINITY } else { r.ln_abs_f64() })
        })
        .collect();
    Some((beta, n_mid, resid, t_scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_keeps_peaks() {
        let pts = [(0.0, 0.0), (1.0, 5.0), (2.0, 1.0), (3.0, 6.0), (4.0, 0.0)];
        let h = upper_hull(&pts);
        assert_eq!(h, vec![(0.0, 0.0), (1.0, 5.0), (3.0, 6.0), (4.0, 0.0)]);
    }

    #[test]
    fn quadratic_envelope_recovers_coefficients() {
        let pts: Vec<(f64, f64)> = (100..=200).map(|n| {
            let x = n as f64;
            (x, -0.3 * x * x + 2.0 * x + 7.0)
        }).collect();
        let [a, b, c] = envelope_quadratic(&pts).unwrap();
        assert!((a + 0.3).abs() < 1e-9 && (b - 2.0).abs() < 1e-6 && (c - 7.0).abs() < 1e-3);
    }

    #[test]
    fn mu_from_pure_geometric() {
        let prec = 128;
        let logs: Vec<f64> = (0..=100).map(|n| n as f64 * 3f64.ln()).collect();
        let cands = [Real::from_f64(3.0, prec), Real::from_f64(0.5, prec)];
        let m = estimate_mu_from(&logs, &cands, 0.05).unwrap();
        assert_eq!(m.mu.to_f64(), 3.0);
        assert!((m.mu_raw - 3.0).abs() < 1e-9);
    }

    #[test]
    fn superexponential_growth_is_refused() {
        let logs: Vec<f64> = (0..=20).map(|n| ((n + 1) * (n + 1)) as f64 * 2f64.ln()).collect();
        let cands = [Real::from_f64(1.0, 128)];
        assert!(matches!(estimate_mu_from(&logs, &cands, 0.05), Err(Error::GrowthRestrictionViolated { .. })));
    }

    use crate::diagram::{build_diagram, characteristic, sector_data};
    use crate::fixtures;
    use crate::recurrence::{normalize, taylor_coefficients};

    fn run(name: &str, prec: usize) -> (Result<AsymptoticFit>, CharPoly) {
        let inst = fixtures::by_name(name, prec).unwrap();
        let e = &inst.qde;
        let c = taylor_coefficients(e, &inst.options).unwrap();
        let diag = build_diagram(&e.degrees());
        let sig = estimate_sigma(&c, &diag, e.q.ln_abs_f64(), 0.05).unwrap();
        let s = sector_data(e, &diag, sig.k);
        let cp = characteristic(e, &s).unwrap();
        let y = normalize(&c, &s);
        let fit = estimate_mu(&y, &cp, 0.05).and_then(|m| fit_polynomials(&y, &cp, &m, 0.05));
        (fit, cp)
    }

    #[test]
    fn partial_theta_fits_exactly() {
        let (fit, _) = run("partial_theta", 256);
        let fit = fit.unwrap();
        assert!((fit.mu.to_f64() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(fit.kappa, 0);
        assert!(fit.pass);
    }

    #[test]
    fn case1_single_root() {
        let (fit, _) = run("case1_gamma2_single", 256);
        let fit = fit.unwrap();
        assert!((fit.mu.to_f64() - (2.0 + 3f64.sqrt())).abs() < 1e-13);
        assert_eq!(fit.kappa, 0);
        let g = fit.leading()[0].to_c64();
        assert!((g.0 - 1.0).abs() < 1e-15 && g.1.abs() < 1e-15);
        assert!(fit.pass);
    }

    #[test]
    fn case2_double_root() {
        let (fit, _) = run("case2_kappa1", 256);
        let fit = fit.unwrap();
        assert_eq!(fit.kappa, 1);
        assert_eq!(fit.dominant.len(), 1);
        assert_eq!(fit.dominant[0].1, 2);
        assert!(fit.pass);
        let (fit0, _) = run("case2_kappa0", 256);
        assert_eq!(fit0.unwrap().kappa, 0);
    }

    #[test]
    fn unreversed_roots_do_not_match() {
        let inst = fixtures::partial_theta(256);
        let e = &inst.qde;
        let c = taylor_coefficients(e, &inst.options).unwrap();
        let diag = build_diagram(&e.degrees());
        let s = sector_data(e, &diag, 1);
        let cp = characteristic(e, &s).unwrap();
        let y = normalize(&c, &s);
        let moduli: Vec<Real> = cp.roots_pk.iter().map(|r| r.value.abs()).collect();
        assert!(matches!(estimate_mu_from(&y.log_abs(), &moduli, 0.05), Err(Error::NoModulusMatch { .. })));
    }
}
