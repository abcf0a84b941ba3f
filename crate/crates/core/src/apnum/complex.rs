use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::real::Real;

/// Complex number with arbitrary-precision parts.
#[derive(Clone, PartialEq)]
pub struct APComplex {
    pub re: Real,
    pub im: Real,
}

impl APComplex {
    pub fn new(re: Real, im: Real) -> Self {
        let p = re.prec().max(im.prec());
        APComplex { re: re.with_prec(p), im: im.with_prec(p) }
    }

    pub fn from_real(re: Real) -> Self {
        let p = re.prec();
        APComplex { re, im: Real::zero(p) }
    }

    pub fn zero(prec: usize) -> Self {
        APComplex { re: Real::zero(prec), im: Real::zero(prec) }
    }

    pub fn one(prec: usize) -> Self {
        APComplex { re: Real::one(prec), im: Real::zero(prec) }
    }

    pub fn i(prec: usize) -> Self {
        APComplex { re: Real::zero(prec), im: Real::one(prec) }
    }

    pub fn from_f64(re: f64, im: f64, prec: usize) -> Self {
        APComplex { re: Real::from_f64(re, prec), im: Real::from_f64(im, prec) }
    }

    pub fn from_i64(re: i64, prec: usize) -> Self {
        APComplex { re: Real::from_i64(re, prec), im: Real::zero(prec) }
    }

    pub fn parse(re: &str, im: &str, prec: usize) -> Option<Self> {
        Some(APComplex { re: Real::parse(re, prec)?, im: Real::parse(im, prec)? })
    }

    pub fn from_polar(modulus: &Real, arg: &Real) -> Self {
        APComplex { re: modulus * arg.cos(), im: modulus * arg.sin() }
    }

    pub fn prec(&self) -> usize {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(&self, prec: usize) -> Self {
        APComplex { re: self.re.with_prec(prec), im: self.im.with_prec(prec) }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn conj(&self) -> Self {
        APComplex { re: self.re.clone(), im: -&self.im }
    }

    pub fn norm_sqr(&self) -> Real {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> Real {
        if self.im.is_zero() {
            return self.re.abs();
        }
        if self.re.is_zero() {
            return self.im.abs();
        }
        self.norm_sqr().sqrt()
    }

    /// Principal argument in (-π, π].
    pub fn arg(&self) -> Real {
        Real::atan2(&self.im, &self.re)
    }

    pub fn scale(&self, s: &Real) -> Self {
        APComplex { re: &self.re * s, im: &self.im * s }
    }

    pub fn mul_f64(&self, s: f64) -> Self {
        self.scale(&Real::from_f64(s, self.prec()))
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        APComplex { re: self.abs().ln(), im: self.arg() }
    }

    pub fn exp(&self) -> Self {
        APComplex::from_polar(&self.re.exp(), &self.im)
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let p = self.prec();
        let r = self.abs();
        let half = Real::from_f64(0.5, p);
        // numerically stable form avoiding cancellation
        let t = ((&r + self.re.abs()) * &half).sqrt();
        if !self.re.is_negative() {
            APComplex { re: t.clone(), im: &self.im / (&t + &t) }
        } else {
            let im = if self.im.is_negative() { -&t } else { t.clone() };
            APComplex { re: &self.im.abs() / (&t + &t), im }
        }
    }

    /// Principal power `self^w = exp(w·Log self)`; `0^w = 0`.
    pub fn powc(&self, w: &APComplex) -> Self {
        if self.is_zero() {
            return APComplex::zero(self.prec());
        }
        let p = self.prec().max(w.prec());
        let wide = self.with_prec(p + 32);
        (&wide.ln() * &w.with_prec(p + 32)).exp().with_prec(p)
    }

    /// Principal real power.
    pub fn powr(&self, w: &Real) -> Self {
        self.powc(&APComplex::from_real(w.clone()))
    }

    /// Integer power by binary powering with 64 guard bits.
    pub fn powi(&self, n: i64) -> Self {
        let p = self.prec();
        if self.im.is_zero() {
            return APComplex::from_real(self.re.powi(n));
        }
        let mut base = self.with_prec(p + 64);
        let mut acc = APComplex::one(p + 64);
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        if n < 0 {
            acc = APComplex::one(p + 64) / acc;
        }
        acc.with_prec(p)
    }

    pub fn recip(&self) -> Self {
        APComplex::one(self.prec()) / self
    }

    pub fn to_c64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// `ln|z|` as f64; works for moduli outside the f64 range.
    pub fn ln_abs_f64(&self) -> f64 {
        let a = self.re.ln_abs_f64();
        let b = self.im.ln_abs_f64();
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        if hi == f64::NEG_INFINITY {
            return hi;
        }
        hi + 0.5 * (1.0 + (2.0 * (lo - hi)).exp()).ln()
    }

    /// `|a - b| / max(|a|, |b|)`, zero when both vanish.
    pub fn rel_dist(a: &APComplex, b: &APComplex) -> Real {
        let scale = a.abs().max(b.abs());
        if scale.is_zero() {
            return scale;
        }
        (a - b).abs() / scale
    }

    /// Decimal pair `["re", "im"]` as used on the wire.
    pub fn to_pair(&self) -> [String; 2] {
        [self.re.to_decimal(), self.im.to_decimal()]
    }
}

impl fmt::Debug for APComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.re, self.im)
    }
}

impl Add<&APComplex> for &APComplex {
    type Output = APComplex;
    fn add(self, rhs: &APComplex) -> APComplex {
        APComplex { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Sub<&APComplex> for &APComplex {
    type Output = APComplex;
    fn sub(self, rhs: &APComplex) -> APComplex {
        APComplex { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Mul<&APComplex> for &APComplex {
    type Output = APComplex;
    fn mul(self, rhs: &APComplex) -> APComplex {
        if self.im.is_zero() && rhs.im.is_zero() {
            let re = &self.re * &rhs.re;
            let p = re.prec();
            return APComplex { re, im: Real::zero(p) };
        }
        APComplex {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Div<&APComplex> for &APComplex {
    type Output = APComplex;
    fn div(self, rhs: &APComplex) -> APComplex {
        if rhs.im.is_zero() {
            return APComplex { re: &self.re / &rhs.re, im: &self.im / &rhs.re };
        }
        let d = rhs.norm_sqr();
        APComplex {
            re: (&self.re * &rhs.re + &self.im * &rhs.im) / &d,
            im: (&self.im * &rhs.re - &self.re * &rhs.im) / &d,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<APComplex> for APComplex {
            type Output = APComplex;
            fn $m(self, rhs: APComplex) -> APComplex {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&APComplex> for APComplex {
            type Output = APComplex;
            fn $m(self, rhs: &APComplex) -> APComplex {
                (&self).$m(rhs)
            }
        }
        impl $tr<APComplex> for &APComplex {
            type Output = APComplex;
            fn $m(self, rhs: APComplex) -> APComplex {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for &APComplex {
    type Output = APComplex;
    fn neg(self) -> APComplex {
        APComplex { re: -&self.re, im: -&self.im }
    }
}

impl Neg for APComplex {
    type Output = APComplex;
    fn neg(self) -> APComplex {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &APComplex, b: &APComplex, bits: f64) -> bool {
        let d = APComplex::rel_dist(a, b);
        d.is_zero() || d.ln_abs_f64() < -bits * std::f64::consts::LN_2
    }

    #[test]
    fn field_ops() {
        let p = 256;
        let a = APComplex::from_f64(1.5, -2.0, p);
        let b = APComplex::from_f64(-0.25, 3.0, p);
        let q = &(&a * &b) / &b;
        assert!(close(&q, &a, 250.0));
        assert!(close(&(&a - &a), &APComplex::zero(p), 250.0));
        assert_eq!((&APComplex::i(p) * &APComplex::i(p)).to_c64(), (-1.0, 0.0));
    }

    #[test]
    fn principal_branches() {
        let p = 256;
        let minus_one = APComplex::from_f64(-1.0, 0.0, p);
        let s = minus_one.sqrt();
        assert!(close(&s, &APComplex::i(p), 250.0));
        let l = minus_one.ln();
        assert!(l.re.is_zero());
        assert_eq!(l.im, Real::pi(p));
        // (-4)^(1/2) principal = 2i
        let r = APComplex::from_f64(-4.0, 0.0, p).powr(&Real::from_f64(0.5, p));
        assert!(close(&r, &APComplex::from_f64(0.0, 2.0, p), 240.0));
        let z = APComplex::from_f64(0.3, -1.7, p);
        assert!(close(&z.sqrt().powi(2), &z, 250.0));
        assert!(close(&z.ln().exp(), &z, 248.0));
    }

    #[test]
    fn powi_agrees_with_exp_log() {
        let p = 320;
        let z = APComplex::from_f64(0.9, 0.2, p);
        let a = z.powi(-173);
        let b = z.powr(&Real::from_f64(-173.0, p));
        assert!(close(&a, &b, 280.0));
    }
}
