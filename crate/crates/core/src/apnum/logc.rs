use std::fmt;

use super::complex::APComplex;
use super::real::Real;

/// Guard bits carried on `log_mag` and `arg` so that `exp` of a large
/// logarithm keeps full relative precision.
const LOG_GUARD: usize = 64;

/// Complex number stored as `(ln|x|, arg x)`.
///
/// Holds values such as `ρ^{N n²}` whose magnitude spans `e^{±Θ(n²)}`.
/// `log_mag == None` encodes zero.
#[derive(Clone, PartialEq)]
pub struct LogComplex {
    pub log_mag: Option<Real>,
    pub arg: Real,
    prec: usize,
}

fn wrap_arg(a: Real) -> Real {
    let p = a.prec();
    let pi = Real::pi(p);
    let two_pi = &pi + &pi;
    let mut a = a;
    // at most a couple of turns after one addition
    while a > pi {
        a = &a - &two_pi;
    }
    while a <= -&pi {
        a = &a + &two_pi;
    }
    a
}

impl LogComplex {
    pub fn zero(prec: usize) -> Self {
        LogComplex { log_mag: None, arg: Real::zero(prec + LOG_GUARD), prec }
    }

    pub fn from_parts(log_mag: Real, arg: Real) -> Self {
        let prec = arg.prec();
        LogComplex {
            log_mag: Some(log_mag.with_prec(prec + LOG_GUARD)),
            arg: wrap_arg(arg.with_prec(prec + LOG_GUARD)),
            prec,
        }
    }

    /// `to_log`: logarithmic representation of `x`.
    pub fn from_complex(x: &APComplex) -> Self {
        let prec = x.prec();
        if x.is_zero() {
            return Self::zero(prec);
        }
        let wide = x.with_prec(prec + LOG_GUARD);
        let log_mag = wide.norm_sqr().ln().mul_f64(0.5);
        LogComplex { log_mag: Some(log_mag), arg: wide.arg(), prec }
    }

    /// `from_log`: back to rectangular form at the stored precision.
    pub fn to_complex(&self) -> APComplex {
        match &self.log_mag {
            None => APComplex::zero(self.prec),
            Some(l) => {
                let m = l.exp();
                APComplex::from_polar(&m, &self.arg).with_prec(self.prec)
            }
        }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag.is_none()
    }

    pub fn mul(&self, other: &LogComplex) -> LogComplex {
        let prec = self.prec.max(other.prec);
        match (&self.log_mag, &other.log_mag) {
            (Some(a), Some(b)) => {
                LogComplex { log_mag: Some(a + b), arg: wrap_arg(&self.arg + &other.arg), prec }
            }
            _ => Self::zero(prec),
        }
    }

    pub fn div(&self, other: &LogComplex) -> LogComplex {
        let prec = self.prec.max(other.prec);
        match (&self.log_mag, &other.log_mag) {
            (Some(a), Some(b)) => {
                LogComplex { log_mag: Some(a - b), arg: wrap_arg(&self.arg - &other.arg), prec }
            }
            (None, _) => Self::zero(prec),
            // division by zero is never requested by the crate
            (Some(_), None) => panic!("LogComplex division by zero"),
        }
    }

    /// Multiplies by `exp(shift)` for a complex shift given as (real, imaginary) parts.
    pub fn shift(&self, log_mag: &Real, arg: &Real) -> LogComplex {
        match &self.log_mag {
            None => self.clone(),
            Some(l) => LogComplex {
                log_mag: Some(l + log_mag.with_prec(self.prec + LOG_GUARD)),
                arg: wrap_arg(&self.arg + arg.with_prec(self.prec + LOG_GUARD)),
                prec: self.prec,
            },
        }
    }

    pub fn log_mag_f64(&self) -> f64 {
        self.log_mag.as_ref().map_or(f64::NEG_INFINITY, |l| l.to_f64())
    }

    pub fn arg_f64(&self) -> f64 {
        self.arg.to_f64()
    }

    /// Wire form `{"log_mag": "...", "arg": "..."}`.
    pub fn to_json(&self) -> serde_json::Value {
        let lm = match &self.log_mag {
            None => "-inf".to_string(),
            Some(l) => l.with_prec(self.prec).to_decimal(),
        };
        serde_json::json!({ "log_mag": lm, "arg": self.arg.with_prec(self.prec).to_decimal() })
    }
}

impl fmt::Debug for LogComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({:.6} + {:.6}i)", self.log_mag_f64(), self.arg_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ulps(a: &APComplex, b: &APComplex) -> f64 {
        let d = APComplex::rel_dist(a, b);
        if d.is_zero() {
            0.0
        } else {
            (d.ln_abs_f64() / std::f64::consts::LN_2 + a.prec() as f64).exp2()
        }
    }

    #[test]
    fn representation_examples() {
        let p = 128;
        assert!(LogComplex::from_complex(&APComplex::zero(p)).log_mag.is_none());
        assert!(LogComplex::zero(p).to_complex().is_zero());
        let one = LogComplex::from_complex(&APComplex::one(p));
        assert!(one.log_mag.as_ref().unwrap().is_zero());
        assert!(one.arg.is_zero());
        let e = Real::one(p).exp();
        let minus_e = LogComplex::from_complex(&APComplex::from_real(-e));
        assert!((minus_e.log_mag_f64() - 1.0).abs() < 1e-15);
        assert_eq!(minus_e.arg.with_prec(p), Real::pi(p));
    }

    #[test]
    fn round_trip_huge_and_tiny() {
        let p = 256;
        for (m, a) in [(1e-3, 0.4), (7.5, -2.9), (1.0, 3.0)] {
            let base = APComplex::from_polar(&Real::from_f64(m, p), &Real::from_f64(a, p));
            for k in [1i64, 37, 1001, -2500] {
                let x = base.powi(k);
                let back = LogComplex::from_complex(&x).to_complex();
                assert!(ulps(&x, &back) <= 2.0, "k={k} ulps={}", ulps(&x, &back));
            }
        }
    }
}
