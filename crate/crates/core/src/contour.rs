//! Winding numbers on circles centred at the origin.

use std::f64::consts::PI;

use crate::apnum::{APComplex, Real};
use crate::error::{Error, Result};

const MAX_SAMPLES: usize = 1 << 14;

/// Points `r·e^{2πik/K}`, `k = 0..K`.
pub fn circle_points(r: &Real, k: usize) -> Vec<APComplex> {
    let prec = r.prec();
    let two_pi = Real::pi(prec).mul_f64(2.0);
    (0..k)
        .map(|j| APComplex::from_polar(r, &(two_pi.clone() * Real::from_i64(j as i64, prec) / Real::from_i64(k as i64, prec))))
        .collect()
}

/// Winding number of `f` around 0 along `|z| = r`. Sampling doubles until no
/// step turns by more than π/3.
pub fn winding_number<F: Fn(&APComplex) -> APComplex>(f: F, r: &Real, start: usize) -> Result<i64> {
    let mut k = start.max(16);
    loop {
        let args: Vec<f64> = circle_points(r, k)
            .iter()
            .map(|z| {
                let v = f(z);
                if v.is_zero() {
                    Err(Error::IllConditioned(format!("function vanishes on the circle |z| = {}", r.to_short(8))))
                } else {
                    Ok(v.arg().to_f64())
                }
            })
            .collect::<Result<_>>()?;
        let mut total = 0.0;
        let mut smooth = true;
        for i in 0..k {
            let mut d = args[(i + 1) % k] - args[i];
            while d > PI {
                d -= 2.0 * PI;
            }
            while d <= -PI {
                d += 2.0 * PI;
            }
            if d.abs() > PI / 3.0 {
                smooth = false;
                break;
            }
            total += d;
        }
        if smooth {
            return Ok((total / (2.0 * PI)).round() as i64);
        }
        if k >= MAX_SAMPLES {
            return Err(Error::PrecisionExhausted(format!("winding number on |z| = {} not resolved", r.to_short(8))));
        }
        k *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_windings() {
        let p = 128;
        let f = |z: &APComplex| (z - &APComplex::one(p)) * (z - &APComplex::from_f64(4.0, 0.0, p));
        assert_eq!(winding_number(f, &Real::from_f64(0.5, p), 16).unwrap(), 0);
        assert_eq!(winding_number(f, &Real::from_f64(2.0, p), 16).unwrap(), 1);
        assert_eq!(winding_number(f, &Real::from_f64(9.0, p), 16).unwrap(), 2);
        let g = |z: &APComplex| z.powi(-3);
        assert_eq!(winding_number(g, &Real::one(p), 16).unwrap(), -3);
    }
}
