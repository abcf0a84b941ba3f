//! Zeros of the entire solution: truncation, root finding, argument-principle
//! audits and geometric progressions.

use std::f64::consts::{LN_2, PI};

use serde_json::{json, Value};

use crate::apnum::{default_eps, polish, roots_all, APComplex, APPoly, Real, Root};
use crate::asymfit::{lstsq, AsymptoticFit};
use crate::contour::winding_number;
use crate::error::{Error, Result};
use crate::recurrence::CoeffSequence;

/// Log gap between consecutive zero moduli above which an audit circle is placed.
const AUDIT_GAP: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct Audit {
    pub radius: f64,
    pub winding: i64,
    pub listed: i64,
}

#[derive(Clone, Debug)]
pub struct ZeroSet {
    /// Zeros sorted by modulus, with multiplicities.
    pub zeros: Vec<(APComplex, usize)>,
    pub trust_radius: f64,
    pub truncation_degree: usize,
    /// `ln` of the bound on `Σ_{n>D} |α_n| r_maxⁿ` relative to the largest term.
    pub tail_bound: f64,
    pub audits: Vec<Audit>,
}

impl ZeroSet {
    pub fn count(&self) -> usize {
        self.zeros.iter().map(|z| z.1).sum()
    }

    /// Columns `re, im, abs, multiplicity`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("re,im,abs,multiplicity\n");
        for (z, m) in &self.zeros {
            let (re, im) = z.to_c64();
            s.push_str(&format!("{re:e},{im:e},{:e},{m}\n", re.hypot(im)));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "trust_radius": format!("{:e}", self.trust_radius),
            "truncation_degree": self.truncation_degree,
            "tail_bound_ln": format!("{:.3}", self.tail_bound),
            "zeros": self.zeros.iter().map(|(z, m)| json!({"value": z.to_pair(), "multiplicity": m})).collect::<Vec<_>>(),
            "audits": self.audits.iter().map(|a| json!({"radius": format!("{:e}", a.radius), "winding": a.winding, "listed": a.listed})).collect::<Vec<_>>(),
        })
    }
}

/// Default search radius `|q|^{-8N}(1 + |q|^N)`, giving a trust radius of `|q|^{-8N}`.
pub fn default_r_max(q: &APComplex, n: i64) -> f64 {
    let lq = q.ln_abs_f64();
    (-8.0 * n as f64 * lq).exp() * (1.0 + (n as f64 * lq).exp())
}

/// Zeros of the entire solution with `|z| ≤ r_max/(1 + |q|^N)`.
pub fn find_zeros(c: &CoeffSequence, r_max: f64, q_pow_n: f64) -> Result<ZeroSet> {
    let prec = c.prec();
    let lr = r_max.ln();
    let logs = c.log_abs();
    let terms: Vec<f64> = logs.iter().enumerate().map(|(n, l)| l + n as f64 * lr).collect();
    let (peak, top) = terms
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_finite())
        .fold((0, f64::NEG_INFINITY), |acc, (n, &t)| if t > acc.1 { (n, t) } else { acc });
    if !top.is_finite() {
        return Err(Error::Domain("the solution vanishes identically".into()));
    }
    let cutoff = top - (prec as f64 + 16.0) * LN_2;
    // D: first index past the peak after which every term stays below the cutoff
    let mut d = terms.len();
    for n in (peak..terms.len()).rev() {
        if terms[n] >= cutoff {
            break;
        }
        d = n;
    }
    let n_max = terms.len() - 1;
    if d + 8 > n_max {
        return Err(Error::PrecisionExhausted(format!(
            "n_max = {n_max} too small for r_max = {r_max:e}: truncation needs degree {d} + 8"
        )));
    }
    let degree = d.saturating_sub(1).max(1);
    let tail_bound = terms[d..].iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * LN_2 - top;
    let poly = APPoly::new(c.values[..=degree].to_vec(), prec);
    let fine = APPoly::new(c.values[..=(degree + 16).min(n_max)].to_vec(), prec);
    let roots = roots_all(&poly, &default_eps(prec))?;
    let trust_radius = clear_circle(&roots, (r_max / (1.0 + q_pow_n)).ln()).exp();
    let mut zeros: Vec<(APComplex, usize)> = Vec::new();
    for r in roots {
        if r.value.is_zero() || r.value.ln_abs_f64() <= trust_radius.ln() {
            let v = if r.multiplicity == 1 && !r.value.is_zero() { polish(&fine, &[r.value.clone()]).remove(0) } else { r.value };
            zeros.push((v, r.multiplicity));
        }
    }
    zeros.sort_by(|a, b| a.0.ln_abs_f64().total_cmp(&b.0.ln_abs_f64()));
    let audits = audit(&fine, &zeros, trust_radius)?;
    Ok(ZeroSet { zeros, trust_radius, truncation_degree: degree, tail_bound, audits })
}

/// Moves a circle of log-radius `lr` inward until no root lies within
/// `AUDIT_GAP / 2` of it.
fn clear_circle(roots: &[Root], mut lr: f64) -> f64 {
    let mut lm: Vec<f64> = roots.iter().filter(|r| !r.value.is_zero()).map(|r| r.value.ln_abs_f64()).collect();
    lm.sort_by(|a, b| b.total_cmp(a));
    for l in lm {
        if (lr - l).abs() < AUDIT_GAP / 2.0 {
            lr = l - AUDIT_GAP / 2.0;
        }
    }
    lr
}

/// Argument-principle counts on circles between well-separated zero moduli
/// and on the trust circle.
fn audit(poly: &APPoly, zeros: &[(APComplex, usize)], trust: f64) -> Result<Vec<Audit>> {
    let prec = poly.prec();
    let lm: Vec<f64> = zeros.iter().map(|(z, _)| z.ln_abs_f64()).collect();
    let mut radii: Vec<f64> = lm.windows(2).filter(|w| w[1] - w[0] > AUDIT_GAP && w[0].is_finite()).map(|w| (w[0] + w[1]) / 2.0).collect();
    let outer = match lm.last() {
        Some(&l) if trust.ln() - l < AUDIT_GAP / 2.0 => (l + trust.ln()) / 2.0 + AUDIT_GAP / 4.0,
        _ => trust.ln(),
    };
    radii.push(outer.min(trust.ln()));
    let start = 2 * poly.degree().max(8) as usize;
    let mut out = Vec::new();
    for lr in radii {
        let r = Real::from_f64(lr.exp(), prec);
        let winding = winding_number(|z| poly.eval(z), &r, start)?;
        let listed = zeros.iter().filter(|(z, _)| z.ln_abs_f64() < lr).map(|z| z.1 as i64).sum();
        if winding != listed {
            return Err(Error::AuditMismatch { annulus: format!("|z| = {:e}", lr.exp()), winding, listed });
        }
        out.push(Audit { radius: lr.exp(), winding, listed });
    }
    Ok(out)
}

/// Smallest `L ≤ L_max` such that `λ_j^{LM} = λ_0^{LM}` for every dominant root,
/// tested as `M·L·arg(λ_j/λ_0)/(2π)` lying within `unity_tol` of an integer.
pub fn detect_unity_period(fit: &AsymptoticFit, m: i64, l_max: u32, unity_tol: f64) -> Result<u32> {
    let lambda = &fit.dominant[0].0;
    let fracs: Vec<f64> = fit.dominant.iter().map(|(l, _)| (l / lambda).arg().to_f64() / (2.0 * PI)).collect();
    for l in 1..=l_max {
        let ok = fracs.iter().all(|f| {
            let x = m as f64 * l as f64 * f;
            (x - x.round()).abs() <= unity_tol
        });
        if ok {
            return Ok(l);
        }
    }
    Err(Error::NoCommensuration { l_max })
}

#[derive(Clone, Debug)]
pub struct Member {
    /// Power of the ratio: `z ≈ A_ν·ratioⁿ`.
    pub n: i64,
    /// 1-based generation counted from the smallest zeros.
    pub generation: i64,
    pub z: APComplex,
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct ProgressionClass {
    pub nu: usize,
    pub a: APComplex,
    pub members: Vec<Member>,
}

#[derive(Clone, Debug)]
pub struct ProgressionFit {
    pub l_period: u32,
    /// `q^{-LN}`.
    pub ratio: APComplex,
    pub classes: Vec<ProgressionClass>,
    /// Fitted per-generation factor of the residuals.
    pub decay_rate: f64,
    /// `δ/μ` when all dominant roots are simple.
    pub rate_bound: Option<f64>,
    pub pass: bool,
}

impl ProgressionFit {
    /// `Err(NonConvergentResiduals)` unless the fit passed.
    pub fn verdict(&self) -> Result<()> {
        if self.pass {
            Ok(())
        } else {
            Err(Error::NonConvergentResiduals(format!(
                "residual factor per generation {:.4} (bound {})",
                self.decay_rate,
                self.rate_bound.map_or("< 1".to_string(), |b| format!("{:.4}", b.powf(0.8)))
            )))
        }
    }

    pub fn members(&self) -> impl Iterator<Item = (usize, &Member)> {
        self.classes.iter().flat_map(|c| c.members.iter().map(move |m| (c.nu, m)))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("class,n,re,im,residual\n");
        for (nu, m) in self.members() {
            let (re, im) = m.z.to_c64();
            s.push_str(&format!("{nu},{},{re:e},{im:e},{:e}\n", m.n, m.residual));
        }
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "L": self.l_period,
            "ratio": self.ratio.to_pair(),
            "classes": self.classes.iter().map(|c| json!({
                "nu": c.nu,
                "A": c.a.to_pair(),
                "members": c.members.iter().map(|m| json!({
                    "n": m.n,
                    "generation": m.generation,
                    "z": m.z.to_pair(),
                    "residual": format!("{:e}", m.residual),
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "decay_rate": format!("{:e}", self.decay_rate),
            "rate_bound": self.rate_bound.map(|b| format!("{b:e}")),
            "pass": self.pass,
        })
    }
}

/// Groups zeros into progressions `A_ν·q^{-LNn}`.
///
/// Each zero is divided by the power of the ratio that moves it into a
/// fundamental annulus whose boundary sits in the widest empty band of
/// log-moduli. Class representatives are the members of the highest
/// complete generation; every other zero is attached to the nearest one.
pub fn match_progressions(zs: &ZeroSet, q: &APComplex, n_sector: i64, m_sector: i64, l_period: u32, fit: &AsymptoticFit) -> Result<ProgressionFit> {
    let prec = q.prec();
    let ratio = q.powi(-(l_period as i64) * n_sector);
    let lrat = ratio.ln_abs_f64();
    let pts: Vec<APComplex> = zs
        .zeros
        .iter()
        .filter(|(z, _)| !z.is_zero())
        .flat_map(|(z, m)| std::iter::repeat(z.clone()).take(*m))
        .collect();
    let pos: Vec<f64> = pts.iter().map(|z| z.ln_abs_f64() / lrat).collect();
    let mut fr: Vec<f64> = pos.iter().map(|g| g.rem_euclid(1.0)).collect();
    fr.sort_by(f64::total_cmp);
    let cut = if fr.is_empty() {
        0.0
    } else {
        let mut best = (fr[0] + 1.0 - fr[fr.len() - 1], (fr[fr.len() - 1] + fr[0] + 1.0) / 2.0);
        for w in fr.windows(2) {
            if w[1] - w[0] > best.0 {
                best = (w[1] - w[0], (w[0] + w[1]) / 2.0);
            }
        }
        best.1.rem_euclid(1.0)
    };
    let ns: Vec<i64> = pos.iter().map(|g| (g - cut).floor() as i64).collect();
    let n_first = *ns.iter().min().ok_or_else(|| Error::IllConditioned("no zeros inside the trust radius".into()))?;
    let n_last = *ns.iter().max().unwrap();
    if n_last - n_first < 2 {
        return Err(Error::IllConditioned("fewer than 3 generations of zeros".into()));
    }
    let count = |n: i64| ns.iter().filter(|&&x| x == n).count();
    let k = (n_first + 2..=n_last).map(count).max().unwrap_or(0);
    let bound = (l_period as i64 * m_sector) as usize;
    if k > bound {
        return Err(Error::ClusterCountExceeded { found: k, bound });
    }
    let n_top = (n_first + 2..=n_last).rev().find(|&n| count(n) == k).unwrap();
    let w: Vec<APComplex> = pts.iter().zip(&ns).map(|(z, &n)| z / &ratio.powi(n)).collect();
    let mut classes: Vec<ProgressionClass> = w
        .iter()
        .zip(&ns)
        .filter(|(_, &n)| n == n_top)
        .enumerate()
        .map(|(i, (a, _))| ProgressionClass { nu: i + 1, a: a.clone(), members: Vec::new() })
        .collect();
    for ((z, wz), &n) in pts.iter().zip(&w).zip(&ns) {
        let (best, res) = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (&(wz / &c.a) - &APComplex::one(prec)).abs().to_f64()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        classes[best].members.push(Member { n, generation: n - n_first + 1, z: z.clone(), residual: res });
    }

    // residual decay over generations 3.. excluding the representatives and the precision floor
    let floor = (-(prec as f64) / 3.0 * LN_2).exp();
    let pts_fit: Vec<(f64, f64)> = classes
        .iter()
        .flat_map(|c| c.members.iter())
        .filter(|m| m.generation >= 3 && m.n != n_top && m.residual > floor)
        .map(|m| (m.n as f64, m.residual.ln()))
        .collect();
    let slope = if pts_fit.len() >= 2 {
        let rows: Vec<Vec<f64>> = pts_fit.iter().map(|p| vec![1.0, p.0]).collect();
        let rhs: Vec<f64> = pts_fit.iter().map(|p| p.1).collect();
        lstsq(&rows, &rhs).map_or(f64::NAN, |c| c[1])
    } else {
        f64::NEG_INFINITY
    };
    let decay_rate = slope.exp();
    let simple = fit.dominant.iter().all(|d| d.1 == 1);
    let rate_bound = simple.then(|| fit.delta.to_f64() / fit.mu.to_f64());
    let pass = match rate_bound {
        Some(b) => slope <= b.ln() * 0.8,
        None => slope < 0.0,
    };
    Ok(ProgressionFit { l_period, ratio, classes, decay_rate, rate_bound, pass })
}

/// `n·(1 - z_n/ξ_n)` with `ξ_n = -p^{-2n-1}` the zeros of the comparison
/// function, i.e. `n·(1 + z_n p^{2n+1})`.
pub fn case2_correction(zs: &ZeroSet, p: &APComplex) -> Vec<(i64, f64)> {
    let lp = p.ln_abs_f64();
    let one = APComplex::one(p.prec());
    let mut out: Vec<(i64, f64)> = zs
        .zeros
        .iter()
        .filter(|(z, _)| !z.is_zero())
        .filter_map(|(z, _)| {
            let n = ((z.ln_abs_f64() / -lp - 1.0) / 2.0).round() as i64;
            (n >= 1).then(|| {
                let v = &one + &(z * &p.powi(2 * n + 1));
                (n, v.to_c64().0 * n as f64)
            })
        })
        .collect();
    out.sort_by_key(|x| x.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_of_two_factor_product() {
        let p = 256;
        // (1 - z)(1 - z/4) padded with zero coefficients
        let mut v = vec![APComplex::from_f64(1.0, 0.0, p), APComplex::from_f64(-1.25, 0.0, p), APComplex::from_f64(0.25, 0.0, p)];
        v.extend((0..30).map(|_| APComplex::zero(p)));
        let c = CoeffSequence::from_values(v, p);
        let zs = find_zeros(&c, 10.0, 0.0).unwrap();
        let got: Vec<f64> = zs.zeros.iter().map(|z| z.0.to_c64().0).collect();
        assert_eq!(zs.count(), 2);
        assert!((got[0] - 1.0).abs() < 1e-30 && (got[1] - 4.0).abs() < 1e-30);
        assert!(zs.audits.iter().all(|a| a.winding == a.listed));
    }

    #[test]
    fn synthetic_correction_values() {
        let prec = 192;
        let p = APComplex::parse("0.4", "0", prec).unwrap();
        let mk = |f: &dyn Fn(i64) -> APComplex| ZeroSet {
            zeros: (1..10).map(|n| (f(n), 1)).collect(),
            trust_radius: 1e30,
            truncation_degree: 0,
            tail_bound: 0.0,
            audits: Vec::new(),
        };
        let xi = |n: i64| -p.powi(-2 * n - 1);
        let exact = mk(&|n| &xi(n) * &(&APComplex::one(prec) - &APComplex::from_i64(n, prec).recip()));
        for (_, v) in case2_correction(&exact, &p) {
            assert!((v - 1.0).abs() < 1e-30);
        }
        for (_, v) in case2_correction(&mk(&xi), &p) {
            assert!(v.abs() < 1e-30);
        }
    }
}
