use std::f64::consts::PI;

use super::complex::APComplex;
use super::poly::APPoly;
use super::real::Real;
use crate::error::{Error, Result};

/// A root together with its multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub value: APComplex,
    pub multiplicity: usize,
}

const MAX_DOUBLINGS: u32 = 4;
const COARSE_PREC: usize = 128;

/// Default residual target `2^{-p/2}`.
pub fn default_eps(prec: usize) -> Real {
    Real::one(prec).mul_f64(2f64.powi(-((prec / 2) as i32)))
}

/// All roots of `p`, clustered into multiplicities.
///
/// Aberth–Ehrlich iteration from Newton-polygon starting points. A root is
/// accepted when its backward error `|p(z)| / Σ|a_k||z|^k` is below `eps`;
/// roots closer than `eps^{1/m}` (relative) are merged into one root of
/// multiplicity `m`. On failure the working precision is doubled up to four
/// times before reporting [`Error::NonConvergence`].
pub fn roots_all(p: &APPoly, eps: &Real) -> Result<Vec<Root>> {
    if p.degree() < 1 {
        return Err(Error::Domain("root finding needs degree >= 1".into()));
    }
    let base = p.prec();
    let zeros_at_origin = p.coeffs().iter().take_while(|c| c.is_zero()).count();
    let stripped = APPoly::new(p.coeffs()[zeros_at_origin..].to_vec(), base);

    let mut found = Vec::new();
    if stripped.degree() >= 1 {
        let mut prec = base;
        let mut ok_prec = base;
        let mut last_err = f64::INFINITY;
        let mut ok = None;
        for _ in 0..=MAX_DOUBLINGS {
            let work = stripped.with_prec(prec);
            let approx = aberth(&work, None);
            let worst = approx
                .iter()
                .map(|z| backward_error(&work, z))
                .fold(f64::NEG_INFINITY, f64::max);
            if worst <= eps.ln_abs_f64() {
                ok = Some(approx);
                ok_prec = prec;
                break;
            }
            last_err = worst;
            prec *= 2;
        }
        let approx = ok.ok_or_else(|| {
            Error::NonConvergence(format!(
                "root residual exp({last_err:.1}) above target after {MAX_DOUBLINGS} precision doublings"
            ))
        })?;
        found = cluster(approx, eps)
            .into_iter()
            .map(|r| Root { value: refine_multiple(&stripped.with_prec(ok_prec), r.value, r.multiplicity).with_prec(base), ..r })
            .collect();
    }
    if zeros_at_origin > 0 {
        found.push(Root { value: APComplex::zero(base), multiplicity: zeros_at_origin });
    }
    sort_roots(&mut found);
    Ok(found)
}

/// Roots listed with repetition, without clustering.
pub fn roots_simple(p: &APPoly, eps: &Real) -> Result<Vec<APComplex>> {
    let r = roots_all(p, eps)?;
    Ok(r.into_iter().flat_map(|r| std::iter::repeat(r.value).take(r.multiplicity)).collect())
}

/// Polishes approximate roots of `p` at the precision of `p`: Aberth on a
/// full set of guesses, Newton on each guess otherwise.
pub fn polish(p: &APPoly, guesses: &[APComplex]) -> Vec<APComplex> {
    if guesses.len() == p.degree().max(0) as usize {
        aberth(p, Some(guesses))
    } else {
        guesses.iter().map(|z| newton_root(p, z, 40)).collect()
    }
}

/// Newton iteration from `z` until the step is below the working precision.
pub fn newton_root(p: &APPoly, z: &APComplex, steps: usize) -> APComplex {
    let tol = -((p.prec() as f64) - 6.0) * std::f64::consts::LN_2;
    let mut z = z.with_prec(p.prec());
    for _ in 0..steps {
        let (v, d) = p.eval_with_derivative(&z);
        if v.is_zero() || d.is_zero() {
            break;
        }
        let w = &v / &d;
        z = &z - &w;
        if w.ln_abs_f64() - z.ln_abs_f64() < tol {
            break;
        }
    }
    z
}

fn sort_roots(r: &mut [Root]) {
    r.sort_by(|a, b| {
        let (ma, mb) = (a.value.ln_abs_f64(), b.value.ln_abs_f64());
        ma.partial_cmp(&mb)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.value.arg().to_f64().total_cmp(&b.value.arg().to_f64()))
    });
}

/// `ln` of the backward error at `z`.
fn backward_error(p: &APPoly, z: &APComplex) -> f64 {
    let v = p.eval(z);
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    v.ln_abs_f64() - p.abs_eval(z).ln_abs_f64()
}

/// Starting points spread on circles whose radii come from the upper convex
/// hull of `(k, ln|a_k|)`.
fn initial_guesses(p: &APPoly) -> Vec<APComplex> {
    let prec = p.prec();
    let pts: Vec<(usize, f64)> = p
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| (k, c.ln_abs_f64()))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &pt in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 as f64 - a.0 as f64) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 as f64 - a.0 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    let mut out = Vec::with_capacity(p.degree() as usize);
    for (e, w) in hull.windows(2).enumerate() {
        let (k0, l0) = w[0];
        let (k1, l1) = w[1];
        let count = k1 - k0;
        let log_r = (l0 - l1) / count as f64;
        let r = Real::from_f64(log_r, prec).exp();
        let offset = 0.4 + 0.9 * e as f64;
        for i in 0..count {
            let theta = Real::from_f64(2.0 * PI * i as f64 / count as f64 + offset, prec);
            out.push(APComplex::from_polar(&r, &theta));
        }
    }
    out
}

/// Gauss–Seidel Aberth iteration; frozen roots stop moving once their update
/// is below the working precision.
fn aberth(p: &APPoly, start: Option<&[APComplex]>) -> Vec<APComplex> {
    let prec = p.prec();
    let n = p.degree() as usize;
    if n == 1 {
        let c = p.coeffs();
        return vec![-(&c[0] / &c[1])];
    }
    let mut z = match start {
        Some(s) => s.iter().map(|x| x.with_prec(prec)).collect(),
        None if prec > COARSE_PREC * 2 => {
            let coarse = aberth(&p.with_prec(COARSE_PREC), None);
            coarse.into_iter().map(|x| x.with_prec(prec)).collect()
        }
        None => initial_guesses(p),
    };
    let tol = -((prec as f64) - 6.0) * std::f64::consts::LN_2;
    let mut frozen = vec![false; n];
    let max_iter = 60 + 6 * n;
    for _ in 0..max_iter {
        let mut moving = false;
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            let (v, d) = p.eval_with_derivative(&z[i]);
            if v.is_zero() {
                frozen[i] = true;
                continue;
            }
            let newton = &v / &d;
            let mut s = APComplex::zero(prec);
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    let diff = &z[i] - zj;
                    if !diff.is_zero() {
                        s = &s + &diff.recip();
                    }
                }
            }
            let denom = APComplex::one(prec) - &newton * &s;
            let w = if denom.is_zero() { newton } else { &newton / &denom };
            if !w.is_finite() {
                continue;
            }
            let rel = w.ln_abs_f64() - z[i].ln_abs_f64();
            z[i] = &z[i] - &w;
            if rel < tol || backward_error(p, &z[i]) < tol {
                frozen[i] = true;
            } else {
                moving = true;
            }
        }
        if !moving {
            break;
        }
    }
    z
}

/// Newton on `p^{(m-1)}`, where a root of multiplicity `m` is simple.
fn refine_multiple(p: &APPoly, z: APComplex, m: usize) -> APComplex {
    if m < 2 {
        return z;
    }
    let mut d = p.clone();
    for _ in 1..m {
        d = d.derivative();
    }
    let tol = -((p.prec() as f64) - 4.0) * std::f64::consts::LN_2;
    let mut z = z;
    for _ in 0..12 {
        let (v, dv) = d.eval_with_derivative(&z);
        if v.is_zero() || dv.is_zero() {
            break;
        }
        let step = &v / &dv;
        z = &z - &step;
        if step.ln_abs_f64() - z.ln_abs_f64() < tol {
            break;
        }
    }
    z
}

/// Agglomerative clustering: two clusters merge when their centroids lie
/// within `eps^{1/m}` relative distance, `m` being the merged size.
fn cluster(points: Vec<APComplex>, eps: &Real) -> Vec<Root> {
    let log_eps = eps.ln_abs_f64();
    let mut groups: Vec<(APComplex, Vec<APComplex>)> =
        points.into_iter().map(|z| (z.clone(), vec![z])).collect();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..groups.len() {
            for b in a + 1..groups.len() {
                let d = APComplex::rel_dist(&groups[a].0, &groups[b].0);
                let ld = if d.is_zero() { f64::NEG_INFINITY } else { d.ln_abs_f64() };
                let m = (groups[a].1.len() + groups[b].1.len()) as f64;
                let slack = ld - log_eps / m;
                if slack <= 0.0 && best.map_or(true, |(_, _, s)| slack < s) {
                    best = Some((a, b, slack));
                }
            }
        }
        let Some((a, b, _)) = best else { break };
        let (_, members) = groups.swap_remove(b);
        groups[a].1.extend(members);
        let prec = groups[a].0.prec();
        let sum = groups[a].1.iter().fold(APComplex::zero(prec), |s, z| &s + z);
        groups[a].0 = sum.scale(&(Real::one(prec) / Real::from_i64(groups[a].1.len() as i64, prec)));
    }
    groups.into_iter().map(|(value, m)| Root { value, multiplicity: m.len() }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &APComplex, b: &APComplex, bits: f64) -> bool {
        let d = APComplex::rel_dist(a, b);
        d.is_zero() || d.ln_abs_f64() < -bits * std::f64::consts::LN_2
    }

    #[test]
    fn unit_imaginary_pair() {
        let p = 256;
        let poly = APPoly::from_f64(&[1.0, 0.0, 1.0], p);
        let r = roots_all(&poly, &default_eps(p)).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|x| x.multiplicity == 1));
        let i = APComplex::i(p);
        assert!(r.iter().any(|x| close(&x.value, &i, 200.0)));
        assert!(r.iter().any(|x| close(&x.value, &(-&i), 200.0)));
    }

    #[test]
    fn quadratic_with_gamma_two() {
        let p = 256;
        let poly = APPoly::from_f64(&[1.0, -4.0, 1.0], p);
        let r = roots_all(&poly, &default_eps(p)).unwrap();
        let s3 = Real::from_f64(3.0, p).sqrt();
        let big = APComplex::from_real(Real::from_f64(2.0, p) + &s3);
        let small = APComplex::from_real(Real::from_f64(2.0, p) - &s3);
        assert!(close(&r[0].value, &small, 240.0));
        assert!(close(&r[1].value, &big, 240.0));
    }

    #[test]
    fn triple_root_is_clustered() {
        let p = 256;
        let poly = APPoly::from_f64(&[-1.0, 3.0, -3.0, 1.0], p);
        let r = roots_all(&poly, &default_eps(p)).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 3);
        assert!(close(&r[0].value, &APComplex::one(p), 200.0));
    }

    #[test]
    fn zero_roots_and_wide_range() {
        let p = 256;
        // z^2 (z - 1e-30)(z - 1e30)
        let roots = [APComplex::from_f64(1e-30, 0.0, p), APComplex::from_f64(1e30, 0.0, p)];
        let mut poly = APPoly::from_roots(&roots, p).coeffs().to_vec();
        poly.splice(0..0, [APComplex::zero(p), APComplex::zero(p)]);
        let r = roots_all(&APPoly::new(poly, p), &default_eps(p)).unwrap();
        assert_eq!(r.iter().map(|x| x.multiplicity).sum::<usize>(), 4);
        assert!(r[0].value.is_zero() && r[0].multiplicity == 2);
        assert!(close(&r[1].value, &roots[0], 200.0));
        assert!(close(&r[2].value, &roots[1], 200.0));
    }
}
