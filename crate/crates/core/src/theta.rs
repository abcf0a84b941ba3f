//! Theta functions, Jacobi's triple product, growth of `θ_κ`, and the
//! comparison function `F` with its theta-product factorization.

use std::f64::consts::LN_2;

use serde_json::{json, Value};

use crate::apnum::{default_eps, roots_all, APComplex, APPoly, Real};
use crate::asymfit::{lstsq, AsymptoticFit};
use crate::contour::winding_number;
use crate::diagram::SectorData;
use crate::error::{Error, Result};

const GUARD: usize = 32;

/// Bilateral series `Σ w(n) g^{n²} (h z)^n` with `w(n) = η_{n mod len} · n^{(k)} · n^s`,
/// where `n^{(k)}` is the falling factorial and `n^s` the principal power.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussSeries {
    pub g: APComplex,
    pub h: APComplex,
    pub weights: Vec<APComplex>,
    pub falling: usize,
    pub power: f64,
    /// `Some(n0)` restricts the sum to `n ≥ n0`.
    pub lower: Option<i64>,
}

/// Value and derivative of a series together with its truncation record.
#[derive(Clone, Debug)]
pub struct SeriesEval {
    pub value: APComplex,
    pub derivative: APComplex,
    /// Index range actually summed.
    pub range: (i64, i64),
    /// `ln` of the bound on the omitted terms.
    pub tail_ln: f64,
}

impl GaussSeries {
    pub fn theta(q: &APComplex, kappa: f64) -> Self {
        let prec = q.prec();
        GaussSeries {
            g: q.clone(),
            h: APComplex::one(prec),
            weights: vec![APComplex::one(prec)],
            falling: 0,
            power: kappa,
            lower: None,
        }
    }

    pub fn prec(&self) -> usize {
        self.g.prec()
    }

    /// Coefficient of `z^n`.
    pub fn coeff(&self, n: i64) -> APComplex {
        if self.lower.is_some_and(|l| n < l) {
            return APComplex::zero(self.prec());
        }
        &self.weight(n) * &(&self.g.powi(n * n) * &self.h.powi(n))
    }

    fn weight(&self, n: i64) -> APComplex {
        let prec = self.prec();
        let len = self.weights.len() as i64;
        let mut w = self.weights[n.rem_euclid(len) as usize].clone();
        for i in 0..self.falling as i64 {
            w = w.scale(&Real::from_i64(n - i, prec));
        }
        if self.power != 0.0 {
            if n == 0 {
                return if self.power > 0.0 { APComplex::zero(prec) } else { w };
            }
            let base = APComplex::from_i64(n, prec);
            w = &w * &base.powr(&Real::from_f64(self.power, prec));
        }
        w
    }

    fn weight_bound_ln(&self, n: i64, wmax_ln: f64) -> f64 {
        let a = n.unsigned_abs() as f64 + self.falling as f64 + 1.0;
        wmax_ln + self.falling as f64 * a.ln() + self.power.max(0.0) * a.ln()
    }

    /// Coefficientwise `n(n-1)…(n-κ+1)`: the series of `z^κ F^{(κ)}(z)`.
    pub fn derivative_series(&self, kappa: usize) -> Self {
        GaussSeries { falling: self.falling + kappa, ..self.clone() }
    }

    pub fn eval(&self, z: &APComplex) -> Result<APComplex> {
        Ok(self.eval_full(z)?.value)
    }

    /// Sum from the peak index outward in both directions until the omitted
    /// terms fall below `2^{-p-32}` of the largest term.
    pub fn eval_full(&self, z: &APComplex) -> Result<SeriesEval> {
        let prec = self.prec();
        if z.is_zero() {
            return Err(Error::Domain("series evaluated at z = 0".into()));
        }
        let wp = prec + GUARD;
        let g = self.g.with_prec(wp);
        let hz = &self.h.with_prec(wp) * &z.with_prec(wp);
        let lg = g.ln_abs_f64();
        if !(lg < 0.0) {
            return Err(Error::Domain("series base must satisfy |g| < 1".into()));
        }
        let lhz = hz.ln_abs_f64();
        let mut n0 = (-lhz / (2.0 * lg)).round() as i64;
        if let Some(l) = self.lower {
            n0 = n0.max(l);
        }
        let wmax_ln = self.weights.iter().map(APComplex::ln_abs_f64).fold(f64::NEG_INFINITY, f64::max);
        let drop = (wp as f64 + 8.0) * LN_2;
        let g2 = &g * &g;
        let u0 = &g.powi(n0 * n0) * &hz.powi(n0);
        let r0 = &g.powi(2 * n0 + 1) * &hz;

        let mut value = APComplex::zero(wp);
        let mut deriv = APComplex::zero(wp);
        let mut reference = f64::NEG_INFINITY;
        let add = |n: i64, u: &APComplex, value: &mut APComplex, deriv: &mut APComplex| {
            let w = self.weight(n).with_prec(wp);
            if !w.is_zero() {
                let t = &w * u;
                *deriv = &*deriv + &t.scale(&Real::from_i64(n, wp));
                *value = &*value + &t;
            }
        };

        let (mut u, mut r, mut n) = (u0.clone(), r0.clone(), n0);
        let hi;
        let mut tail_ln = f64::NEG_INFINITY;
        loop {
            add(n, &u, &mut value, &mut deriv);
            let b = u.ln_abs_f64() + self.weight_bound_ln(n, wmax_ln);
            reference = reference.max(b);
            let rl = r.ln_abs_f64();
            if b < reference - drop && rl < -LN_2 {
                hi = n;
                tail_ln = tail_ln.max(b + 2.0 * LN_2 + (self.falling as f64 + self.power.max(0.0)) * LN_2);
                break;
            }
            u = &u * &r;
            r = &r * &g2;
            n += 1;
        }

        let mut lo = n0;
        if self.lower != Some(n0) {
            let mut u = u0;
            let mut inv_r = r0.recip();
            let mut n = n0;
            loop {
                inv_r = &inv_r * &g2;
                u = &u * &inv_r;
                n -= 1;
                add(n, &u, &mut value, &mut deriv);
                let b = u.ln_abs_f64() + self.weight_bound_ln(n, wmax_ln);
                reference = reference.max(b);
                if self.lower == Some(n) {
                    lo = n;
                    break;
                }
                if b < reference - drop && inv_r.ln_abs_f64() < -LN_2 {
                    lo = n;
                    tail_ln = tail_ln.max(b + 2.0 * LN_2 + (self.falling as f64 + self.power.max(0.0)) * LN_2);
                    break;
                }
            }
        }
        let derivative = &deriv / &z.with_prec(wp);
        Ok(SeriesEval { value: value.with_prec(prec), derivative: derivative.with_prec(prec), range: (lo, hi), tail_ln })
    }

    /// Laurent truncation `Σ_{n=lo}^{hi} c_n z^n` as the polynomial `z^{-lo}·(…)`.
    pub fn laurent_poly(&self, lo: i64, hi: i64) -> APPoly {
        APPoly::new((lo..=hi).map(|n| self.coeff(n)).collect(), self.prec())
    }

    /// Newton refinement of a zero on the full series.
    pub fn newton(&self, z: &APComplex, steps: usize) -> Result<APComplex> {
        let prec = self.prec();
        let mut z = z.clone();
        for _ in 0..steps {
            let e = self.eval_full(&z)?;
            if e.derivative.is_zero() {
                break;
            }
            let dz = &e.value / &e.derivative;
            z = &z - &dz;
            let rel = dz.ln_abs_f64() - z.ln_abs_f64();
            if rel < -((prec - 8) as f64) * LN_2 {
                break;
            }
        }
        Ok(z)
    }
}

fn check_q(q: &APComplex) -> Result<()> {
    let l = q.ln_abs_f64();
    if q.is_zero() || !(l < 0.0) {
        return Err(Error::Domain("theta functions need 0 < |q| < 1".into()));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ThetaEval {
    pub q: APComplex,
    pub kappa: f64,
    /// Summed index range.
    pub truncation: (i64, i64),
    pub value: APComplex,
    pub tail_ln: f64,
}

/// `θ_κ(z, q) = Σ n^κ q^{n²} z^n`; `κ = 0` gives `θ`.
pub fn theta_eval(z: &APComplex, q: &APComplex, kappa: f64) -> Result<ThetaEval> {
    check_q(q)?;
    if z.is_zero() {
        return Err(Error::Domain("theta evaluated at z = 0".into()));
    }
    let e = GaussSeries::theta(q, kappa).eval_full(z)?;
    Ok(ThetaEval { q: q.clone(), kappa, truncation: e.range, value: e.value, tail_ln: e.tail_ln })
}

pub fn theta(z: &APComplex, q: &APComplex) -> Result<APComplex> {
    Ok(theta_eval(z, q, 0.0)?.value)
}

/// `Π (1 - q^{2n})(1 + q^{2n-1}/z)(1 + q^{2n-1} z)`, truncated once
/// `|q|^{2n-1}·max(|z|, 1/|z|) < 2^{-p-10}`.
pub fn triple_product(z: &APComplex, q: &APComplex) -> Result<APComplex> {
    check_q(q)?;
    if z.is_zero() {
        return Err(Error::Domain("triple product at z = 0".into()));
    }
    let prec = q.prec();
    let wp = prec + GUARD;
    let (z, q) = (z.with_prec(wp), q.with_prec(wp));
    let zi = z.recip();
    let one = APComplex::one(wp);
    let q2 = &q * &q;
    let spread = z.ln_abs_f64().abs();
    let stop = -((prec + 10) as f64) * LN_2;
    let mut qo = q.clone();
    let mut qe = q2.clone();
    let mut acc = one.clone();
    loop {
        let f = &(&(&one - &qe) * &(&one + &(&qo * &zi))) * &(&one + &(&qo * &z));
        acc = &acc * &f;
        if qo.ln_abs_f64() + spread < stop && qe.ln_abs_f64() < stop {
            break;
        }
        qo = &qo * &q2;
        qe = &qe * &q2;
    }
    Ok(acc.with_prec(prec))
}

/// `ln|θ(z,q)| - (ln|z|)²/(-4 ln|q|) - ln|1 + q^{2ν-1} z|` with `ν` chosen so
/// that `|q|^{2-2ν} < |z| ≤ |q|^{-2ν}`; bounded as `z → ∞`.
pub fn asymptheta_defect(z: &APComplex, q: &APComplex) -> Result<f64> {
    let lq = q.ln_abs_f64();
    let lz = z.ln_abs_f64();
    let nu = (lz / (-2.0 * lq)).ceil() as i64;
    let th = theta(z, q)?;
    let factor = &APComplex::one(q.prec()) + &(&q.powi(2 * nu - 1) * z);
    Ok(th.ln_abs_f64() - lz * lz / (-4.0 * lq) - factor.ln_abs_f64())
}

/// Geometric grid on `[r_min, r_max]` with `steps` points per period `q^{-2}`.
pub fn period_grid(q: f64, r_min: f64, r_max: f64, steps: usize) -> Vec<f64> {
    let h = -2.0 * q.ln() / steps as f64;
    let count = ((r_max.ln() - r_min.ln()) / h).floor() as usize;
    (0..=count).map(|i| (r_min.ln() + i as f64 * h).exp()).collect()
}

#[derive(Clone, Debug)]
pub struct ThetaGrowth {
    /// `(r, ln M(r), E(r))`.
    pub rows: Vec<(f64, f64, f64)>,
    /// `max |E(r) - E(q^{-2} r)|` over the top half of the grid.
    pub periodicity_defect: f64,
    /// Regression slope of `E` against `ln ln r`.
    pub drift_slope: f64,
}

impl ThetaGrowth {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,logM,E\n");
        for (r, m, e) in &self.rows {
            s.push_str(&format!("{r:e},{m:e},{e:e}\n"));
        }
        s
    }
}

/// `E(r) = ln M(r, θ_κ) - [(ln r)²/(-4 ln q) + κ ln ln r]` for `0 < q < 1`.
/// The coefficients of positive index are positive, so `M(r)` is attained at `z = r`.
pub fn theta_growth_residual(q: f64, kappa: f64, r_grid: &[f64], prec: usize) -> Result<ThetaGrowth> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain("growth table needs 0 < q < 1".into()));
    }
    let qa = APComplex::from_f64(q, 0.0, prec);
    let series = GaussSeries::theta(&qa, kappa);
    let e_at = |r: f64| -> Result<(f64, f64)> {
        let m = series.eval(&APComplex::from_f64(r, 0.0, prec))?.ln_abs_f64();
        let lr = r.ln();
        Ok((m, m - (lr * lr / (-4.0 * q.ln()) + kappa * lr.ln())))
    };
    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let (m, e) = e_at(r)?;
        rows.push((r, m, e));
    }
    let mut defect: f64 = 0.0;
    for &(r, _, e) in &rows[rows.len() / 2..] {
        let (_, e2) = e_at(r / (q * q))?;
        defect = defect.max((e - e2).abs());
    }
    let drift_slope = drift(&rows.iter().map(|&(r, _, e)| (r, e)).collect::<Vec<_>>());
    Ok(ThetaGrowth { rows, periodicity_defect: defect, drift_slope })
}

/// Regression slope of `E` against `ln ln r`.
pub fn drift(points: &[(f64, f64)]) -> f64 {
    let rows: Vec<Vec<f64>> = points.iter().map(|&(r, _)| vec![1.0, r.ln().ln()]).collect();
    let rhs: Vec<f64> = points.iter().map(|p| p.1).collect();
    lstsq(&rows, &rhs).map_or(f64::NAN, |c| c[1])
}

/// Comparison function `F(z) = Σ η_{n mod M₀} ρ^{N n²} λ^n z^n` and its
/// factorization `F(z) = C Π θ(-z/(p z_l), p)`.
#[derive(Clone, Debug)]
pub struct ComparisonF {
    pub eta: Vec<APComplex>,
    pub lambda: APComplex,
    pub rho: APComplex,
    pub n: i64,
    pub m: i64,
    pub l_period: u32,
    pub m0: usize,
    pub n0: i64,
    pub a: APComplex,
    /// `p = ρ^{M N₀}`, so `p² = q^{N₀}`.
    pub p: APComplex,
    pub z: Vec<APComplex>,
    pub c: APComplex,
    /// Degree `κ` of the amplitude polynomials; zeros of `f` track `F^{(κ)}`.
    pub kappa: usize,
    /// Inner radius of the fundamental annulus holding `z_l`.
    pub r0: Real,
}

impl ComparisonF {
    pub fn series(&self) -> GaussSeries {
        GaussSeries {
            g: self.rho.powi(self.n),
            h: self.lambda.clone(),
            weights: self.eta.clone(),
            falling: 0,
            power: 0.0,
            lower: None,
        }
    }

    /// Series of `z^κ F^{(κ)}(z)`.
    pub fn derivative_series(&self) -> GaussSeries {
        self.series().derivative_series(self.kappa)
    }

    pub fn eval(&self, z: &APComplex) -> Result<APComplex> {
        self.series().eval(z)
    }

    /// `C Π θ(-z/(p z_l), p)`.
    pub fn product_eval(&self, z: &APComplex) -> Result<APComplex> {
        product_with(&self.c, &self.p, &self.z, z)
    }

    /// `q^{N₀}` as derived from `ρ`.
    pub fn shift(&self) -> APComplex {
        self.rho.powi(2 * self.m * self.n0)
    }

    /// `log2` of `|F(z) - A z^{M₀} F(q^{N₀} z)| / S(z)` where `S` sums the term moduli.
    pub fn functional_equation_residual(&self, z: &APComplex) -> Result<f64> {
        let s = self.series();
        let lhs = s.eval(z)?;
        let rhs = &(&self.a * &z.powi(self.m0 as i64)) * &s.eval(&(&self.shift() * z))?;
        let scale = abs_series(&s).eval(&APComplex::from_real(z.abs()))?;
        let d = &lhs - &rhs;
        Ok(if d.is_zero() { f64::NEG_INFINITY } else { (d.ln_abs_f64() - scale.ln_abs_f64()) / LN_2 })
    }

    /// `log2 |Π z_l · A - (-1)^{M₀}|`.
    pub fn product_defect(&self) -> f64 {
        let prec = self.a.prec();
        let prod = self.z.iter().fold(APComplex::one(prec), |acc, z| &acc * z);
        let target = APComplex::from_i64(if self.m0 % 2 == 0 { 1 } else { -1 }, prec);
        let d = &(&prod * &self.a) - &target;
        if d.is_zero() {
            f64::NEG_INFINITY
        } else {
            d.ln_abs_f64() / LN_2
        }
    }

    /// Zeros of `F` with `|z| ≤ r_max`, the progressions `z_l p^{2j}`.
    pub fn zeros_up_to(&self, r_max: f64) -> Vec<APComplex> {
        let lp2 = 2.0 * self.p.ln_abs_f64();
        let mut out = Vec::new();
        for zl in &self.z {
            let lz = zl.ln_abs_f64();
            let j_min = ((r_max.ln() - lz) / lp2).ceil() as i64;
            for j in j_min..=j_min + 64 {
                let w = zl * &self.p.powi(2 * j);
                if w.ln_abs_f64() > r_max.ln() {
                    continue;
                }
                out.push(w);
                if lz + j as f64 * lp2 < -r_max.ln() {
                    break;
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "eta": self.eta.iter().map(APComplex::to_pair).collect::<Vec<_>>(),
            "lambda": self.lambda.to_pair(),
            "rho": self.rho.to_pair(),
            "N": self.n,
            "M": self.m,
            "L": self.l_period,
            "M0": self.m0,
            "N0": self.n0,
            "A": self.a.to_pair(),
            "p": self.p.to_pair(),
            "z": self.z.iter().map(APComplex::to_pair).collect::<Vec<_>>(),
            "C": self.c.to_pair(),
            "kappa": self.kappa,
            "product_defect_log2": format!("{:.3}", self.product_defect()),
        })
    }
}

fn product_with(c: &APComplex, p: &APComplex, zs: &[APComplex], z: &APComplex) -> Result<APComplex> {
    let mut acc = c.clone();
    for zl in zs {
        let w = -(z / &(p * zl));
        acc = &acc * &theta(&w, p)?;
    }
    Ok(acc)
}

/// The same series with every coefficient replaced by its modulus.
fn abs_series(s: &GaussSeries) -> GaussSeries {
    GaussSeries {
        g: APComplex::from_real(s.g.abs()),
        h: APComplex::from_real(s.h.abs()),
        weights: s.weights.iter().map(|w| APComplex::from_real(w.abs())).collect(),
        falling: 0,
        power: 0.0,
        lower: s.lower,
    }
}

/// Builds `F` from the dominant part of an asymptotic fit. The dominant roots
/// must agree after `L·M`-th powers.
pub fn build_comparison_f(fit: &AsymptoticFit, s: &SectorData, l_period: u32, unity_tol: f64) -> Result<ComparisonF> {
    let prec = fit.mu.prec();
    let m0 = l_period as usize * s.m as usize;
    let n0 = l_period as i64 * s.n;
    let lambda = fit.dominant[0].0.clone();
    let gammas = fit.leading();
    let mut eta = vec![APComplex::zero(prec); m0];
    for ((lj, _), gj) in fit.dominant.iter().zip(&gammas) {
        let w = lj / &lambda;
        let defect = (&w.powi(m0 as i64) - &APComplex::one(prec)).abs().to_f64();
        if defect > unity_tol {
            return Err(Error::UnityHypothesisFailed(format!(
                "dominant root ratio is not an {m0}-th root of unity (defect {defect:e})"
            )));
        }
        let mut wr = APComplex::one(prec);
        for e in eta.iter_mut() {
            *e = &*e + &(gj * &wr);
            wr = &wr * &w;
        }
    }
    if eta.iter().all(APComplex::is_zero) {
        return Err(Error::IllConditioned("all comparison coefficients vanish".into()));
    }
    let rho = s.rho.clone();
    let a = &lambda.powi(m0 as i64) * &rho.powi(s.n * (m0 * m0) as i64);
    let p = rho.powi(s.m * n0);
    let mut cf = ComparisonF {
        eta,
        lambda,
        rho,
        n: s.n,
        m: s.m,
        l_period,
        m0,
        n0,
        a,
        p,
        z: Vec::new(),
        c: APComplex::one(prec),
        kappa: fit.kappa,
        r0: Real::one(prec),
    };
    let (zs, r0) = annulus_zeros(&cf)?;
    cf.z = zs;
    cf.r0 = r0;
    normalize_base_zeros(&mut cf);
    cf.c = fit_constant(&cf)?;
    Ok(cf)
}

/// Zeros of `F` in `{r0 ≤ |w| < r0 |p|^{-2}}` from the Laurent truncation,
/// polished on the full series and counted by the argument principle.
fn annulus_zeros(cf: &ComparisonF) -> Result<(Vec<APComplex>, Real)> {
    let prec = cf.p.prec();
    let series = cf.series();
    let lg = series.g.ln_abs_f64();
    let width = -2.0 * cf.p.ln_abs_f64();
    let centre = -cf.lambda.ln_abs_f64();
    let t = (((prec + 64) as f64 * LN_2 / -lg).sqrt()).ceil() as i64 + 2 * cf.m0 as i64 + 2;
    let poly = series.laurent_poly(-t, t);
    let roots = roots_all(&poly, &default_eps(prec))?;
    let near: Vec<(APComplex, usize)> = roots
        .into_iter()
        .filter(|r| (r.value.ln_abs_f64() - centre).abs() <= 1.5 * width)
        .map(|r| (r.value, r.multiplicity))
        .collect();
    // cut the circle of log-moduli mod width at its largest gap
    let mut phases: Vec<f64> = near.iter().map(|(z, _)| (z.ln_abs_f64() - centre).rem_euclid(width)).collect();
    phases.sort_by(f64::total_cmp);
    let cut = if phases.is_empty() {
        0.0
    } else {
        let mut best = (phases[0] + width - phases[phases.len() - 1], (phases[phases.len() - 1] + phases[0] + width) / 2.0);
        for w in phases.windows(2) {
            if w[1] - w[0] > best.0 {
                best = (w[1] - w[0], (w[0] + w[1]) / 2.0);
            }
        }
        best.1.rem_euclid(width)
    };
    let lo = centre + cut - width;
    let inside: Vec<(APComplex, usize)> =
        near.into_iter().filter(|(z, _)| (lo..lo + width).contains(&z.ln_abs_f64())).collect();
    let mut zs = Vec::new();
    for (z, m) in &inside {
        let refined = if *m == 1 { series.newton(z, 30)? } else { z.clone() };
        for _ in 0..*m {
            zs.push(refined.clone());
        }
    }
    let r0 = Real::from_f64(lo.exp(), prec);
    let r1 = Real::from_f64((lo + width).exp(), prec);
    let f = |w: &APComplex| series.eval(w).unwrap_or_else(|_| APComplex::zero(prec));
    let count = winding_number(f, &r1, 64)? - winding_number(f, &r0, 64)?;
    if count != cf.m0 as i64 || zs.len() != cf.m0 {
        return Err(Error::ZeroCountMismatch { found: count.min(zs.len() as i64), expected: cf.m0 as i64 });
    }
    Ok((zs, r0))
}

/// Shifts one base zero by a power of `p²` so that `Π z_l · A = (-1)^{M₀}`.
fn normalize_base_zeros(cf: &mut ComparisonF) {
    let prec = cf.p.prec();
    let prod = cf.z.iter().fold(APComplex::one(prec), |acc, z| &acc * z);
    let x = &prod * &cf.a;
    let j = (x.ln_abs_f64() / (2.0 * cf.p.ln_abs_f64())).round() as i64;
    if j != 0 {
        cf.z[0] = &cf.z[0] * &cf.p.powi(-2 * j);
    }
}

/// `C = F(w)/Π θ(-w/(p z_l), p)` at the sampled point farthest from the zeros.
fn fit_constant(cf: &ComparisonF) -> Result<APComplex> {
    let prec = cf.p.prec();
    let width = -2.0 * cf.p.ln_abs_f64();
    let lo = cf.r0.ln_abs_f64();
    let mut best: Option<(f64, APComplex)> = None;
    for i in 0..4 {
        let r = Real::from_f64((lo + width * (i as f64 + 0.5) / 4.0).exp(), prec);
        for w in crate::contour::circle_points(&r, 16) {
            let d = cf
                .z
                .iter()
                .map(|z| (&w - z).abs().to_f64() / r.to_f64())
                .fold(f64::INFINITY, f64::min);
            if best.as_ref().map_or(true, |b| d > b.0) {
                best = Some((d, w));
            }
        }
    }
    let w = best.expect("sample points").1;
    let unit = product_with(&APComplex::one(prec), &cf.p, &cf.z, &w)?;
    Ok(&cf.eval(&w)? / &unit)
}
