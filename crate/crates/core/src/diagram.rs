//! Newton–Puiseux diagram, sector data and characteristic polynomials.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde_json::{json, Value};

use crate::apnum::{default_eps, roots_all, APComplex, APPoly, Real, Root};
use crate::error::Result;
use crate::model::QDE;

#[derive(Clone, Debug, PartialEq)]
pub struct NPDiagram {
    /// Points `(j, d(j))` with `d(j) ≥ 0`.
    pub points: Vec<(usize, i64)>,
    /// Vertices `(j_k, d(j_k))`, `k = 0..=K`.
    pub vertices: Vec<(usize, i64)>,
    /// `σ_1 > … > σ_K > 0`.
    pub slopes: Vec<Ratio<i64>>,
}

impl NPDiagram {
    /// Number of segments `K`.
    pub fn k(&self) -> usize {
        self.slopes.len()
    }

    /// Degree of `a_j` as recorded in the point set, `-1` when absent.
    pub fn degree(&self, j: usize) -> i64 {
        self.points.iter().find(|p| p.0 == j).map_or(-1, |p| p.1)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vertices": self.vertices.iter().map(|&(j, d)| json!([j, d])).collect::<Vec<_>>(),
            "slopes": self.slopes.iter().map(|s| format!("{}/{}", s.numer(), s.denom())).collect::<Vec<_>>(),
        })
    }
}

/// Upper-left hull of `{(j, d(j))}`: from the leftmost point, repeatedly take
/// the point of largest positive slope, the farthest one on ties.
pub fn build_diagram(degrees: &[i64]) -> NPDiagram {
    let points: Vec<(usize, i64)> =
        degrees.iter().enumerate().filter(|(_, &d)| d >= 0).map(|(j, &d)| (j, d)).collect();
    let mut vertices = Vec::new();
    let mut slopes = Vec::new();
    if let Some(&first) = points.first() {
        vertices.push(first);
        let mut cur = first;
        loop {
            let mut best: Option<((usize, i64), Ratio<i64>)> = None;
            for &p in points.iter().filter(|p| p.0 > cur.0) {
                let s = Ratio::new(p.1 - cur.1, (p.0 - cur.0) as i64);
                if s <= Ratio::from_integer(0) {
                    continue;
                }
                if best.map_or(true, |(_, b)| s >= b) {
                    best = Some((p, s));
                }
            }
            match best {
                Some((p, s)) => {
                    vertices.push(p);
                    slopes.push(s);
                    cur = p;
                }
                None => break,
            }
        }
    }
    NPDiagram { points, vertices, slopes }
}

/// Per-segment data of sector `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorData {
    pub k: usize,
    /// `d(j_k) - d(j_{k-1})`, not reduced.
    pub m: i64,
    /// `j_k - j_{k-1}`, not reduced.
    pub n: i64,
    pub sigma: Ratio<i64>,
    /// `q^{1/(2M)}`, principal branch.
    pub rho: APComplex,
    pub ell: i64,
    pub i_k: Vec<usize>,
    /// `(j_{k-1}, d(j_{k-1}))` and `(j_k, d(j_k))`.
    pub left: (usize, i64),
    pub right: (usize, i64),
}

impl SectorData {
    /// `ℓ + M j - N i`, the exponent weight of position `(j, i)`.
    pub fn weight(&self, j: usize, i: usize) -> i64 {
        self.ell + self.m * j as i64 - self.n * i as i64
    }

    pub fn to_json(&self) -> Value {
        json!({
            "k": self.k,
            "M": self.m,
            "N": self.n,
            "ell": self.ell,
            "I_k": self.i_k,
            "rho": self.rho.to_pair(),
            "rho_branch": "principal",
        })
    }
}

/// Sector data for `1 ≤ k ≤ K`.
pub fn sector_data(e: &QDE, diag: &NPDiagram, k: usize) -> SectorData {
    assert!(k >= 1 && k <= diag.k(), "sector index {k} outside 1..={}", diag.k());
    let left = diag.vertices[k - 1];
    let right = diag.vertices[k];
    let m = right.1 - left.1;
    let n = (right.0 - left.0) as i64;
    let ell = n * right.1 - m * right.0 as i64;
    let i_k = diag.points.iter().filter(|&&(j, d)| n * d - m * j as i64 == ell).map(|p| p.0).collect();
    let prec = e.prec();
    let rho = e.q.powr(&(Real::one(prec) / Real::from_i64(2 * m, prec)));
    SectorData { k, m, n, sigma: Ratio::new(m, n), rho, ell, i_k, left, right }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharPoly {
    /// `c_{j,i} = a_{j,i} ρ^{N i² - 2 M j i}` for every stored position.
    pub c: BTreeMap<(usize, usize), APComplex>,
    pub pk: APPoly,
    pub pk_rev: APPoly,
    /// Roots of `Pk_rev`, the asymptotic bases.
    pub roots: Vec<Root>,
    /// Roots of `Pk`.
    pub roots_pk: Vec<Root>,
}

impl CharPoly {
    /// Whether `Pk` equals its reversal up to a scalar factor.
    pub fn is_self_reciprocal(&self) -> bool {
        let d = self.pk.degree();
        if d != self.pk_rev.degree() || d < 0 {
            return false;
        }
        let prec = self.pk.prec();
        let tol = (-((prec / 2) as f64)) * std::f64::consts::LN_2;
        let lead = self.pk.leading().unwrap();
        let lead_rev = self.pk_rev.leading().unwrap();
        let scale = self.pk.norm_inf();
        self.pk.coeffs().iter().zip(self.pk_rev.coeffs()).all(|(a, b)| {
            let diff = a * lead_rev - b * lead;
            diff.is_zero() || diff.ln_abs_f64() - 2.0 * scale.ln_abs_f64() < tol
        })
    }

    /// Moduli of the roots of `Pk_rev`.
    pub fn moduli(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.value.abs().to_f64()).collect()
    }

    pub fn to_json(&self) -> Value {
        let roots = |rs: &[Root]| {
            rs.iter().map(|r| json!({"value": r.value.to_pair(), "multiplicity": r.multiplicity})).collect::<Vec<_>>()
        };
        json!({
            "Pk": self.pk.to_pairs(),
            "Pk_rev": self.pk_rev.to_pairs(),
            "roots": roots(&self.roots),
            "roots_Pk": roots(&self.roots_pk),
            "self_reciprocal": self.is_self_reciprocal(),
        })
    }
}

pub fn characteristic(e: &QDE, s: &SectorData) -> Result<CharPoly> {
    let prec = e.prec();
    let mut c = BTreeMap::new();
    for (j, a) in e.a.iter().enumerate() {
        for (i, aji) in a.coeffs().iter().enumerate() {
            if aji.is_zero() {
                continue;
            }
            let (ii, jj) = (i as i64, j as i64);
            let expo = s.n * ii * ii - 2 * s.m * jj * ii;
            c.insert((j, i), aji * &s.rho.powi(expo));
        }
    }
    let base = s.left.1;
    let mut coeffs = vec![APComplex::zero(prec); (s.m + 1) as usize];
    for &j in &s.i_k {
        let d = e.a[j].degree() as i64;
        coeffs[(d - base) as usize] = c[&(j, d as usize)].clone();
    }
    let pk = APPoly::new(coeffs, prec);
    let pk_rev = pk.reversed();
    let eps = default_eps(prec);
    let roots = roots_all(&pk_rev, &eps)?;
    let roots_pk = roots_all(&pk, &eps)?;
    Ok(CharPoly { c, pk, pk_rev, roots, roots_pk })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apnum::APPoly;

    fn r(a: i64, b: i64) -> Ratio<i64> {
        Ratio::new(a, b)
    }

    #[test]
    fn figure_one_degrees() {
        let d = build_diagram(&[0, 1, 2, 1, 3]);
        assert_eq!(d.vertices, vec![(0, 0), (2, 2), (4, 3)]);
        assert_eq!(d.slopes, vec![r(1, 1), r(1, 2)]);
    }

    #[test]
    fn small_diagrams() {
        let d = build_diagram(&[0, 1]);
        assert_eq!(d.vertices, vec![(0, 0), (1, 1)]);
        assert_eq!(d.slopes, vec![r(1, 1)]);
        let d = build_diagram(&[2, 0, 3]);
        assert_eq!(d.vertices, vec![(0, 2), (2, 3)]);
        assert_eq!(d.slopes, vec![r(1, 2)]);
        assert_eq!(build_diagram(&[3, 1]).k(), 0);
    }

    fn poly_of_degree(d: i64, prec: usize) -> APPoly {
        if d < 0 {
            return APPoly::zero(prec);
        }
        let mut c = vec![0.0; d as usize + 1];
        c[d as usize] = 1.0;
        c[0] = 1.0;
        APPoly::from_f64(&c, prec)
    }

    #[test]
    fn figure_one_sectors() {
        let p = 128;
        let degs = [0, 1, 2, 1, 3];
        let a = degs.iter().map(|&d| poly_of_degree(d, p)).collect();
        let e = QDE::new(APComplex::from_f64(0.3, 0.0, p), a, APPoly::zero(p)).unwrap();
        let diag = build_diagram(&e.degrees());
        let s1 = sector_data(&e, &diag, 1);
        assert_eq!((s1.m, s1.n, s1.ell), (2, 2, 0));
        assert_eq!(s1.i_k, vec![0, 1, 2]);
        let s2 = sector_data(&e, &diag, 2);
        assert_eq!((s2.m, s2.n, s2.ell), (1, 2, 2));
        assert_eq!(s2.i_k, vec![2, 4]);
    }

    #[test]
    fn partial_theta_convention() {
        let p = 256;
        let q = APComplex::from_f64(0.5, 0.0, p);
        let a = vec![APPoly::from_f64(&[1.0], p), APPoly::from_f64(&[0.0, -1.0], p)];
        let e = QDE::new(q, a, APPoly::from_f64(&[1.0], p)).unwrap();
        let diag = build_diagram(&e.degrees());
        let s = sector_data(&e, &diag, 1);
        assert_eq!((s.m, s.n, s.ell, s.i_k.clone()), (1, 1, 0, vec![0, 1]));
        let cp = characteristic(&e, &s).unwrap();
        let rho = s.rho.to_c64().0;
        assert!((rho - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((cp.roots_pk[0].value.to_c64().0 - rho).abs() < 1e-15);
        assert!((cp.roots[0].value.to_c64().0 - 1.0 / rho).abs() < 1e-14);
        assert!(!cp.is_self_reciprocal());
    }

    #[test]
    fn theta_equation_in_base_q_squared() {
        // f(z) - q z f(q^2 z) = 0 written with base Q = q^2
        let p = 256;
        let big_q = APComplex::from_f64(0.09, 0.0, p);
        let q = big_q.sqrt();
        let a = vec![APPoly::from_f64(&[1.0], p), APPoly::new(vec![APComplex::zero(p), -q], p)];
        let e = QDE::new(big_q, a, APPoly::zero(p)).unwrap();
        let s = sector_data(&e, &build_diagram(&e.degrees()), 1);
        let cp = characteristic(&e, &s).unwrap();
        assert!(cp.is_self_reciprocal());
        assert_eq!(cp.roots.len(), 1);
        let (re, im) = cp.roots[0].value.to_c64();
        assert!((re - 1.0).abs() < 1e-15 && im.abs() < 1e-15);
    }
}
