//! Built-in instances with closed-form solutions.

use crate::apnum::{APComplex, APPoly, Real};
use crate::model::{AnalysisOptions, Instance, QDE};
use crate::recurrence::PerturbedLRE;

fn real(x: f64, prec: usize) -> APComplex {
    APComplex::from_f64(x, 0.0, prec)
}

fn dec(s: &str, prec: usize) -> APComplex {
    APComplex::parse(s, "0", prec).expect("literal decimal")
}

fn instance(q: APComplex, a: Vec<APPoly>, b: APPoly, options: AnalysisOptions) -> Instance {
    let qde = QDE::new(q, a, b).expect("fixture is a valid equation");
    Instance { qde, options }
}

fn options(prec: usize) -> AnalysisOptions {
    AnalysisOptions { precision_bits: prec, ..AnalysisOptions::default() }
}

/// Degrees `(0, 1, 2, 1, 3)`: two sectors with slopes 1 and 1/2.
pub fn figure1_degrees(prec: usize) -> Instance {
    let z = |c: &[f64]| APPoly::from_f64(c, prec);
    let a = vec![z(&[1.0]), z(&[0.0, -1.0]), z(&[0.0, 0.0, 1.0]), z(&[0.0, -1.0]), z(&[0.0, 0.0, 0.0, 1.0])];
    instance(dec("0.5", prec), a, z(&[1.0]), options(prec))
}

/// `f(z) - z f(qz) = 1`, solved by `α_n = q^{n(n-1)/2}`.
pub fn partial_theta(prec: usize) -> Instance {
    let a = vec![APPoly::from_f64(&[1.0], prec), APPoly::from_f64(&[0.0, -1.0], prec)];
    instance(dec("0.5", prec), a, APPoly::from_f64(&[1.0], prec), options(prec))
}

/// `f(z) - 2γρ²z f(qz) + q²z² f(q²z) = b(z)` with `b` chosen so that
/// `α_n = (c_1 λ_1^n + c_2 λ_2^n) ρ^{2n²}`, `λ_{1,2} = γ ± √(γ²-1)`.
pub fn case1(q: &APComplex, gamma: &APComplex, c1: &APComplex, c2: &APComplex) -> Instance {
    let prec = q.prec();
    let rho2 = q.sqrt();
    let s = (gamma * gamma - APComplex::one(prec)).sqrt();
    let two = real(2.0, prec);
    let zero = APComplex::zero(prec);
    let a1 = -(&(&two * gamma) * &rho2);
    let a = vec![
        APPoly::constant(APComplex::one(prec)),
        APPoly::new(vec![zero.clone(), a1], prec),
        APPoly::new(vec![zero.clone(), zero, q * q], prec),
    ];
    let sum = c1 + c2;
    let b1 = &(&(-(gamma * &sum)) + &((c1 - c2) * &s)) * &rho2;
    let b = APPoly::new(vec![sum, b1], prec);
    instance(q.clone(), a, b, options(prec))
}

/// Case 1 roots `(λ_1, λ_2)` for given `γ`.
pub fn case1_roots(gamma: &APComplex) -> (APComplex, APComplex) {
    let s = (gamma * gamma - APComplex::one(gamma.prec())).sqrt();
    (gamma + &s, gamma - &s)
}

/// `q = 0.2`, `γ = 2`, `c_1 = c_2 = 1`.
pub fn case1_gamma2(prec: usize) -> Instance {
    let one = APComplex::one(prec);
    case1(&dec("0.2", prec), &real(2.0, prec), &one, &one)
}

/// `q = 0.2`, `γ = 2`, `c_1 = 1`, `c_2 = 0`: `α_n = λ_1^n ρ^{2n²}`.
pub fn case1_gamma2_single(prec: usize) -> Instance {
    case1(&dec("0.2", prec), &real(2.0, prec), &APComplex::one(prec), &APComplex::zero(prec))
}

/// `η = √2 - 1` as used by the irrational Case 1 instance.
pub fn irrational_eta(prec: usize) -> Real {
    Real::from_i64(2, prec).sqrt() - Real::one(prec)
}

/// `q = 0.2`, `γ = cos(ηπ)` with `η = √2 - 1`, `c_1 = 1`, `c_2 = 1/2`.
pub fn case1_irrational(prec: usize) -> Instance {
    let gamma = APComplex::from_real((irrational_eta(prec) * Real::pi(prec)).cos());
    case1(&dec("0.2", prec), &gamma, &APComplex::one(prec), &dec("0.5", prec))
}

/// Case 2 family with `p = ρ²`, `q = p²`: `α_n = (c_1 n + c_2) p^{n²}`,
/// `b(z) = c_2 + p (c_1 - c_2) z`.
pub fn case2_family(p: &APComplex, c1: &APComplex, c2: &APComplex) -> Instance {
    let prec = p.prec();
    let q = p * p;
    let zero = APComplex::zero(prec);
    let a = vec![
        APPoly::constant(APComplex::one(prec)),
        APPoly::new(vec![zero.clone(), -(p + p)], prec),
        APPoly::new(vec![zero.clone(), zero, &q * &q], prec),
    ];
    let b = APPoly::new(vec![c2.clone(), p * &(c1 - c2)], prec);
    instance(q, a, b, options(prec))
}

/// `p = 0.4`: `α_n = p^{n²+1}(n+1)`, `b = p`.
pub fn case2(prec: usize) -> Instance {
    let p = dec("0.4", prec);
    case2_family(&p, &p, &p)
}

/// Perturbed recurrence `2^{-(2n+1)} y(n) - (1 + 2^{-4n}) y(n-1) + 2^{-(2n+1)} y(n-2) = 0`,
/// solved by `y(n) = 2^{(n+1)²}`.
pub fn fast_growth_recurrence(prec: usize) -> PerturbedLRE {
    let limits = vec![APComplex::zero(prec), real(-1.0, prec), APComplex::zero(prec)];
    let tau = Real::from_f64(0.25, prec);
    PerturbedLRE::from_fn(limits, tau, move |n| {
        let two = Real::from_i64(2, prec);
        let outer = APComplex::from_real(two.powi(-(2 * n as i64 + 1)));
        let mid = APComplex::from_real(-(Real::one(prec) + two.powi(-4 * n as i64)));
        vec![outer.clone(), mid, outer]
    })
}

/// `f(z) - q z f(q² z) = 1` in base `Q = q²`: the non-negative part of `θ(z, q)`.
pub fn theta_base(prec: usize) -> Instance {
    let q = dec("0.3", prec);
    let a = vec![APPoly::from_f64(&[1.0], prec), APPoly::new(vec![APComplex::zero(prec), -q.clone()], prec)];
    instance(&q * &q, a, APPoly::from_f64(&[1.0], prec), options(prec))
}

/// Instance fixtures by name (the recurrence oracle is not an instance).
pub fn by_name(name: &str, prec: usize) -> Option<Instance> {
    Some(match name {
        "figure1_degrees" => figure1_degrees(prec),
        "partial_theta" => partial_theta(prec),
        "case1_gamma2" => case1_gamma2(prec),
        "case1_gamma2_single" => case1_gamma2_single(prec),
        "case1_irrational" => case1_irrational(prec),
        "case2" => case2(prec),
        "case2_kappa1" => {
            let p = dec("0.4", prec);
            case2_family(&p, &APComplex::one(prec), &APComplex::one(prec))
        }
        "case2_kappa0" => {
            let p = dec("0.4", prec);
            case2_family(&p, &APComplex::zero(prec), &APComplex::one(prec))
        }
        "theta_base" => theta_base(prec),
        _ => return None,
    })
}

/// Every instance fixture shipped as a file.
pub const INSTANCE_NAMES: [&str; 9] = [
    "figure1_degrees",
    "partial_theta",
    "case1_gamma2",
    "case1_gamma2_single",
    "case1_irrational",
    "case2",
    "case2_kappa1",
    "case2_kappa0",
    "theta_base",
];
