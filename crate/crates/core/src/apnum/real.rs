use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign, WORD_BIT_SIZE};

pub(crate) const RM: RoundingMode = RoundingMode::ToEven;

/// Smallest precision accepted anywhere in the crate.
pub const MIN_PRECISION: usize = 64;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

pub(crate) fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Binary floating point number with an explicit working precision in bits.
///
/// All binary operations round to the larger of the two operand precisions
/// using round-to-nearest-even.
#[derive(Clone)]
pub struct Real {
    v: BigFloat,
    prec: usize,
}

impl Real {
    pub fn zero(prec: usize) -> Self {
        Self::from_f64(0.0, prec)
    }

    pub fn one(prec: usize) -> Self {
        Self::from_f64(1.0, prec)
    }

    pub fn from_f64(x: f64, prec: usize) -> Self {
        let prec = prec.max(MIN_PRECISION);
        Real { v: BigFloat::from_f64(x, prec), prec }
    }

    pub fn from_i64(x: i64, prec: usize) -> Self {
        let prec = prec.max(MIN_PRECISION);
        Real { v: BigFloat::from_i64(x, prec), prec }
    }

    /// Parses a decimal string such as `"-1.25e-3"`. Returns `None` on malformed input.
    pub fn parse(s: &str, prec: usize) -> Option<Self> {
        let t = s.trim();
        if t.is_empty() {
            return None;
        }
        let ok = t
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'));
        if !ok || !t.chars().any(|c| c.is_ascii_digit()) {
            return None;
        }
        let prec = prec.max(MIN_PRECISION);
        let v = with_consts(|cc| BigFloat::parse(t, Radix::Dec, prec, RM, cc));
        if v.is_nan() || v.is_inf() {
            return None;
        }
        Some(Real { v, prec })
    }

    pub fn pi(prec: usize) -> Self {
        let prec = prec.max(MIN_PRECISION);
        Real { v: with_consts(|cc| cc.pi(prec, RM)), prec }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    /// Rounds (or widens) to a new working precision.
    pub fn with_prec(&self, prec: usize) -> Self {
        let prec = prec.max(MIN_PRECISION);
        let mut v = self.v.clone();
        if !v.is_zero() {
            // set_precision only fails for p == 0 or p > max, both excluded above
            let _ = v.set_precision(prec, RM);
        }
        Real { v, prec }
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.is_zero() && self.v.is_negative()
    }

    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    pub fn abs(&self) -> Self {
        Real { v: self.v.abs(), prec: self.prec }
    }

    pub fn sqrt(&self) -> Self {
        Real { v: self.v.sqrt(self.prec, RM), prec: self.prec }
    }

    /// Natural logarithm; `-inf` for zero, NaN for negative input.
    pub fn ln(&self) -> Self {
        let p = self.prec;
        Real { v: with_consts(|cc| self.v.ln(p, RM, cc)), prec: p }
    }

    pub fn exp(&self) -> Self {
        let p = self.prec;
        Real { v: with_consts(|cc| self.v.exp(p, RM, cc)), prec: p }
    }

    pub fn sin(&self) -> Self {
        let p = self.prec;
        Real { v: with_consts(|cc| self.v.sin(p, RM, cc)), prec: p }
    }

    pub fn cos(&self) -> Self {
        let p = self.prec;
        Real { v: with_consts(|cc| self.v.cos(p, RM, cc)), prec: p }
    }

    /// Four-quadrant arctangent with range (-π, π].
    pub fn atan2(y: &Real, x: &Real) -> Real {
        let p = y.prec.max(x.prec);
        if x.is_zero() {
            if y.is_zero() {
                return Real::zero(p);
            }
            let half_pi = Real::pi(p).mul_f64(0.5);
            return if y.is_negative() { -half_pi } else { half_pi };
        }
        let t = y / x;
        let a = Real { v: with_consts(|cc| t.v.atan(p, RM, cc)), prec: p };
        if !x.is_negative() {
            a
        } else if y.is_negative() {
            a - Real::pi(p)
        } else {
            a + Real::pi(p)
        }
    }

    /// Integer power by binary powering, evaluated with 64 guard bits.
    pub fn powi(&self, n: i64) -> Self {
        let p = self.prec;
        let wide = self.with_prec(p + 64);
        let mut base = wide.clone();
        let mut acc = Real::one(p + 64);
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
            acc = Real::one(p + 64) / acc;
        }
        acc.with_prec(p)
    }

    pub fn mul_f64(&self, x: f64) -> Self {
        self * &Real::from_f64(x, self.prec)
    }

    pub fn max(self, other: Real) -> Real {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Real) -> Real {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Binary exponent `e` with `|x| = m·2^e`, `m ∈ [1/2, 1)`. `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        self.v.exponent().map(|e| e as i64)
    }

    /// Nearest f64; saturates to ±inf / 0 outside the f64 range.
    pub fn to_f64(&self) -> f64 {
        let Some((words, _, sign, exp, _)) = self.v.as_raw_parts() else {
            return if self.v.is_inf_pos() {
                f64::INFINITY
            } else if self.v.is_inf_neg() {
                f64::NEG_INFINITY
            } else {
                f64::NAN
            };
        };
        let top = match words.last() {
            Some(&w) if w != 0 => w,
            _ => return 0.0,
        };
        let next = if words.len() >= 2 { words[words.len() - 2] } else { 0 };
        let base = 2f64.powi(WORD_BIT_SIZE as i32);
        let m = top as f64 / base + next as f64 / base / base;
        let e = exp as i64;
        let mag = if e > 1100 {
            f64::INFINITY
        } else if e < -1200 {
            0.0
        } else {
            m * 2f64.powi(e as i32)
        };
        if sign == Sign::Neg {
            -mag
        } else {
            mag
        }
    }

    /// `ln|x|` as f64, valid far outside the f64 exponent range. `-inf` for zero.
    pub fn ln_abs_f64(&self) -> f64 {
        let Some((words, _, _, exp, _)) = self.v.as_raw_parts() else {
            return if self.v.is_inf() { f64::INFINITY } else { f64::NAN };
        };
        match words.last() {
            Some(&w) if w != 0 => {
                let m = w as f64 / 2f64.powi(WORD_BIT_SIZE as i32);
                m.ln() + exp as f64 * std::f64::consts::LN_2
            }
            _ => f64::NEG_INFINITY,
        }
    }

    /// Decimal string with enough digits to round-trip at this precision.
    pub fn to_decimal(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let s = with_consts(|cc| self.v.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into());
        // prefer a shorter form when it reads back within 2 ulp
        let digits = ((self.prec - 2) as f64 * std::f64::consts::LOG10_2).floor() as usize;
        if let Some(short) = round_significant(&s, digits.max(1)) {
            if let Some(back) = Real::parse(&short, self.prec) {
                let close = match ((&back - self).exponent(), self.exponent()) {
                    (None, _) => true,
                    (Some(d), Some(e)) => d <= e - (self.prec as i64 - 2),
                    _ => false,
                };
                if close && short.len() < s.len() {
                    return short;
                }
            }
        }
        trim_decimal(&s)
    }

    /// Short decimal for human-facing summaries.
    pub fn to_short(&self, digits: usize) -> String {
        let x = self.to_f64();
        if x.is_finite() && x != 0.0 {
            format!("{:.*e}", digits, x)
        } else {
            self.to_decimal()
        }
    }
}

/// Rounds `[-]d.ddd…e±x` half-up to `n` significant digits.
fn round_significant(s: &str, n: usize) -> Option<String> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (mant, exp) = body.split_once('e')?;
    let mut exp: i64 = exp.trim_start_matches('+').parse().ok()?;
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.len() != 1 {
        return None;
    }
    let mut digits: Vec<u8> = int.bytes().chain(frac.bytes()).map(|b| b.wrapping_sub(b'0')).collect();
    if digits.iter().any(|&d| d > 9) || digits.len() <= n {
        return None;
    }
    let up = digits[n] >= 5;
    digits.truncate(n);
    if up {
        let mut i = n;
        loop {
            if i == 0 {
                digits.insert(0, 1);
                digits.pop();
                exp += 1;
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let text: String = digits.iter().map(|d| char::from(b'0' + d)).collect();
    let out = format!("{}{}.{}e{}", if neg { "-" } else { "" }, &text[..1], &text[1..], exp);
    Some(trim_decimal(&out))
}

fn trim_decimal(s: &str) -> String {
    // "1.2500000e+0" -> "1.25e0"
    let (mant, exp) = match s.find('e') {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let mant = if mant.contains('.') {
        let t = mant.trim_end_matches('0');
        t.trim_end_matches('.')
    } else {
        mant
    };
    match exp {
        Some(e) => {
            let e = e.trim_start_matches('+');
            if e == "0" || e == "-0" {
                mant.to_string()
            } else {
                format!("{mant}e{e}")
            }
        }
        None => mant.to_string(),
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_short(6))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.partial_cmp(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.is_zero() && other.is_zero() {
            return Some(Ordering::Equal);
        }
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

macro_rules! real_binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                let p = self.prec.max(rhs.prec);
                Real { v: self.v.$f(&rhs.v, p, RM), prec: p }
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $m(self, rhs: &Real) -> Real {
                (&self).$m(rhs)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $m(self, rhs: Real) -> Real {
                self.$m(&rhs)
            }
        }
    };
}

real_binop!(Add, add, add);
real_binop!(Sub, sub, sub);
real_binop!(Mul, mul, mul);
real_binop!(Div, div, div);

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { v: self.v.clone().neg(), prec: self.prec }
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_bridge() {
        for x in [1.0, -0.75, 3.0, 5.5e-10, 1e300, -2.5e-300] {
            assert_eq!(Real::from_f64(x, 128).to_f64(), x);
        }
        let huge = Real::from_f64(2.0, 128).powi(5000);
        assert!(huge.to_f64().is_infinite());
        assert!((huge.ln_abs_f64() - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert_eq!(Real::zero(128).ln_abs_f64(), f64::NEG_INFINITY);
    }

    #[test]
    fn decimal_round_trip() {
        let x = Real::from_f64(2.0, 512).sqrt();
        let s = x.to_decimal();
        assert_eq!(Real::parse(&s, 512).unwrap(), x);
        assert_eq!(Real::from_f64(1.25, 128).to_decimal(), "1.25");
        assert_eq!(Real::from_f64(-0.001, 64).to_decimal().parse::<f64>().unwrap(), -0.001);
        assert!(Real::parse("abc", 128).is_none());
        assert!(Real::parse("", 128).is_none());
    }

    #[test]
    fn atan2_quadrants() {
        let p = 128;
        let one = Real::one(p);
        let pi = Real::pi(p);
        let a = Real::atan2(&Real::zero(p), &-&one);
        assert_eq!(a, pi);
        let b = Real::atan2(&-&one, &-&one).to_f64();
        assert!((b + 0.75 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = Real::from_f64(1.1, 256);
        let mut acc = Real::one(256);
        for _ in 0..37 {
            acc = &acc * &x;
        }
        let d = (&acc - &x.powi(37)).abs() / acc.abs();
        assert!(d.ln_abs_f64() < -240.0 * std::f64::consts::LN_2);
        assert!((x.powi(-2).to_f64() - 1.0 / 1.21).abs() < 1e-15);
    }
}
