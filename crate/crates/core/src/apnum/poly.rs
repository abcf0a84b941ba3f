use super::complex::APComplex;
use super::real::Real;

/// Dense polynomial with ascending coefficients; trailing zeros are trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct APPoly {
    coeffs: Vec<APComplex>,
    prec: usize,
}

impl APPoly {
    pub fn new(mut coeffs: Vec<APComplex>, prec: usize) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        let prec = coeffs.iter().map(|c| c.prec()).max().unwrap_or(prec).max(prec);
        APPoly { coeffs, prec }
    }

    pub fn zero(prec: usize) -> Self {
        APPoly { coeffs: Vec::new(), prec }
    }

    pub fn constant(c: APComplex) -> Self {
        let p = c.prec();
        APPoly::new(vec![c], p)
    }

    pub fn from_f64(coeffs: &[f64], prec: usize) -> Self {
        APPoly::new(coeffs.iter().map(|&c| APComplex::from_f64(c, 0.0, prec)).collect(), prec)
    }

    /// Monic polynomial `Π (z - r)`.
    pub fn from_roots(roots: &[APComplex], prec: usize) -> Self {
        let mut c = vec![APComplex::one(prec)];
        for r in roots {
            let mut next = vec![APComplex::zero(prec); c.len() + 1];
            for (k, ck) in c.iter().enumerate() {
                next[k + 1] = &next[k + 1] + ck;
                next[k] = &next[k] - &(ck * r);
            }
            c = next;
        }
        APPoly::new(c, prec)
    }

    pub fn coeffs(&self) -> &[APComplex] {
        &self.coeffs
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    /// Coefficient of `z^i`, zero past the degree.
    pub fn coeff(&self, i: usize) -> APComplex {
        self.coeffs.get(i).cloned().unwrap_or_else(|| APComplex::zero(self.prec))
    }

    /// Degree, `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<&APComplex> {
        self.coeffs.last()
    }

    /// Horner evaluation.
    pub fn eval(&self, z: &APComplex) -> APComplex {
        let mut acc = APComplex::zero(self.prec.max(z.prec()));
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * z) + c;
        }
        acc
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: &APComplex) -> (APComplex, APComplex) {
        let p = self.prec.max(z.prec());
        let mut v = APComplex::zero(p);
        let mut d = APComplex::zero(p);
        for c in self.coeffs.iter().rev() {
            d = &(&d * z) + &v;
            v = &(&v * z) + c;
        }
        (v, d)
    }

    /// `Σ |a_k| |z|^k`, the natural scale for backward-error residuals.
    pub fn abs_eval(&self, z: &APComplex) -> Real {
        let r = z.abs();
        let mut acc = Real::zero(self.prec.max(z.prec()));
        for c in self.coeffs.iter().rev() {
            acc = &acc * &r + c.abs();
        }
        acc
    }

    pub fn derivative(&self) -> APPoly {
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, ck)| ck.scale(&Real::from_i64(k as i64, self.prec)))
            .collect();
        APPoly::new(c, self.prec)
    }

    /// Coefficient reversal `z^deg · p(1/z)`.
    pub fn reversed(&self) -> APPoly {
        let mut c = self.coeffs.clone();
        c.reverse();
        APPoly::new(c, self.prec)
    }

    pub fn with_prec(&self, prec: usize) -> APPoly {
        APPoly { coeffs: self.coeffs.iter().map(|c| c.with_prec(prec)).collect(), prec }
    }

    /// Largest coefficient modulus.
    pub fn norm_inf(&self) -> Real {
        self.coeffs
            .iter()
            .map(|c| c.abs())
            .fold(Real::zero(self.prec), |a, b| a.max(b))
    }

    pub fn scale(&self, s: &APComplex) -> APPoly {
        APPoly::new(self.coeffs.iter().map(|c| c * s).collect(), self.prec)
    }

    pub fn to_pairs(&self) -> Vec<[String; 2]> {
        self.coeffs.iter().map(|c| c.to_pair()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let p = 256;
        let sq = APPoly::from_f64(&[1.0, -2.0, 1.0], p);
        assert!(sq.eval(&APComplex::one(p)).is_zero());
        let c = APPoly::from_f64(&[1.0], p);
        assert_eq!(c.eval(&APComplex::from_f64(1e9, 0.0, p)).to_c64(), (1.0, 0.0));
        // z^2 - 4z + 1 at 2 + sqrt 3
        let quad = APPoly::from_f64(&[1.0, -4.0, 1.0], p);
        let root = APComplex::from_real(Real::from_f64(2.0, p) + Real::from_f64(3.0, p).sqrt());
        let v = quad.eval(&root).abs();
        assert!(v.is_zero() || v.ln_abs_f64() < -248.0 * std::f64::consts::LN_2);
    }

    #[test]
    fn trimming_and_degree() {
        let p = 128;
        assert_eq!(APPoly::from_f64(&[0.0, 0.0], p).degree(), -1);
        assert_eq!(APPoly::from_f64(&[1.0, 2.0, 0.0], p).degree(), 1);
        let r = APPoly::from_f64(&[3.0, 0.0, 1.0], p).reversed();
        assert_eq!(r.coeff(0).to_c64(), (1.0, 0.0));
        assert_eq!(r.coeff(2).to_c64(), (3.0, 0.0));
        let d = APPoly::from_f64(&[5.0, 1.0, 3.0], p).derivative();
        assert_eq!(d.coeff(1).to_c64(), (6.0, 0.0));
    }

    #[test]
    fn expansion_from_roots() {
        let p = 128;
        let one = APComplex::one(p);
        let poly = APPoly::from_roots(&[one.clone(), one.clone(), one], p);
        let got: Vec<f64> = poly.coeffs().iter().map(|c| c.to_c64().0).collect();
        assert_eq!(got, vec![-1.0, 3.0, -3.0, 1.0]);
    }
}
