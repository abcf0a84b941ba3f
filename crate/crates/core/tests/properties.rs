use num_rational::Ratio;
use proptest::prelude::*;
use qdiff_lab::apnum::{default_eps, roots_all, APComplex, APPoly, LogComplex, Real};
use qdiff_lab::asymfit::estimate_mu_from;
use qdiff_lab::diagram::build_diagram;
use qdiff_lab::fixtures::{self, INSTANCE_NAMES};
use qdiff_lab::growth::max_modulus;
use qdiff_lab::model::{instance_to_json, parse_instance};
use qdiff_lab::pipeline::{analyze, fit_instance};
use qdiff_lab::recurrence::CoeffSequence;
use qdiff_lab::theta::theta;

const PREC: usize = 192;

fn log2_rel(a: &APComplex, b: &APComplex) -> f64 {
    let d = APComplex::rel_dist(a, b);
    if d.is_zero() {
        f64::NEG_INFINITY
    } else {
        d.ln_abs_f64() / std::f64::consts::LN_2
    }
}

fn decimal() -> impl Strategy<Value = String> {
    (-999_999i64..1_000_000, 0u32..8).prop_map(|(m, e)| {
        let s = format!("{}", m.abs());
        let e = e as usize;
        let body = if e == 0 {
            s
        } else if s.len() > e {
            format!("{}.{}", &s[..s.len() - e], &s[s.len() - e..])
        } else {
            format!("0.{}{}", "0".repeat(e - s.len()), s)
        };
        if m < 0 { format!("-{body}") } else { body }
    })
}

fn pair() -> impl Strategy<Value = String> {
    (decimal(), decimal()).prop_map(|(a, b)| format!("[\"{a}\",\"{b}\"]"))
}

fn poly() -> impl Strategy<Value = String> {
    prop::collection::vec(pair(), 0..4).prop_map(|v| format!("[{}]", v.join(",")))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn roots_reproduce_coefficients(
        spec in prop::collection::vec((0.2f64..1.8, -3.1f64..3.1, 1usize..=2), 1..=6),
    ) {
        // distinct moduli keep the roots well separated
        let mut roots = Vec::new();
        for (k, &(r, t, m)) in spec.iter().enumerate() {
            let z = APComplex::from_f64((k as f64 * 2.0 + r) * t.cos(), (k as f64 * 2.0 + r) * t.sin(), PREC);
            roots.extend(std::iter::repeat(z).take(m));
        }
        let p = APPoly::from_roots(&roots, PREC);
        let found = roots_all(&p, &default_eps(PREC)).unwrap();
        let total: usize = found.iter().map(|r| r.multiplicity).sum();
        prop_assert_eq!(total as isize, p.degree());
        let mut expanded = Vec::new();
        for r in &found {
            expanded.extend(std::iter::repeat(r.value.clone()).take(r.multiplicity));
        }
        let back = APPoly::from_roots(&expanded, PREC);
        let scale = p.norm_inf().to_f64();
        for i in 0..=p.degree() as usize {
            let d = (&back.coeff(i) - &p.coeff(i)).abs().to_f64() / scale;
            prop_assert!(d <= 2f64.powi(-(PREC as i32) / 2) * 4.0, "coefficient {} off by {:e}", i, d);
        }
    }

    #[test]
    fn log_product_matches_direct_product(
        a in (-1e6f64..1e6, -1e6f64..1e6),
        b in (-1e6f64..1e6, -1e6f64..1e6),
    ) {
        prop_assume!(a.0.hypot(a.1) > 1e-6 && b.0.hypot(b.1) > 1e-6);
        let x = APComplex::from_f64(a.0, a.1, PREC);
        let y = APComplex::from_f64(b.0, b.1, PREC);
        let via_log = LogComplex::from_complex(&x).mul(&LogComplex::from_complex(&y)).to_complex();
        prop_assert!(log2_rel(&via_log, &(&x * &y)) <= 2.0 - PREC as f64);
    }

    #[test]
    fn diagram_is_upper_hull(degrees in prop::collection::vec(-1i64..10, 2..9)) {
        prop_assume!(degrees.iter().any(|&d| d >= 0));
        let d = build_diagram(&degrees);
        prop_assert!(d.slopes.windows(2).all(|w| w[0] > w[1]));
        prop_assert!(d.slopes.iter().all(|s| *s > Ratio::from_integer(0)));
        for (seg, s) in d.slopes.iter().enumerate() {
            let (jl, dl) = d.vertices[seg];
            for &(j, dj) in &d.points {
                let line = Ratio::from_integer(dl) + *s * Ratio::from_integer(j as i64 - jl as i64);
                prop_assert!(Ratio::from_integer(dj) <= line, "point ({}, {}) above segment {}", j, dj, seg + 1);
            }
        }
        for &(j, dj) in &d.points {
            if j > d.vertices.last().unwrap().0 {
                prop_assert!(dj <= d.vertices.last().unwrap().1);
            }
        }
    }

    #[test]
    fn parse_serialize_parse_is_identity(q in (0.01f64..0.95, -3.1f64..3.1), a in prop::collection::vec(poly(), 1..4), a_last in pair(), b in poly()) {
        let (r, t) = q;
        let qs = format!("[\"{:.6}\",\"{:.6}\"]", r * t.cos(), r * t.sin());
        let doc = format!("{{\"q\":{qs},\"a\":[{},[{a_last}]],\"b\":{b},\"options\":{{\"precision_bits\":160,\"n_max\":40}}}}", a.join(","));
        let first = match parse_instance(&doc, None) {
            Ok(i) => i,
            Err(e) => {
                prop_assume!(false, "rejected: {}", e);
                unreachable!()
            }
        };
        let text = serde_json::to_string(&instance_to_json(&first)).unwrap();
        let second = parse_instance(&text, None).unwrap();
        prop_assert!(second == first);
        prop_assert!(first.qde.q.abs() < Real::one(160));
        prop_assert!(first.qde.order() >= 1);
    }

    #[test]
    fn theta_quasi_periodicity(r in 0.05f64..0.8, t in -3.1f64..3.1, lz in -1.5f64..1.5, tz in -3.1f64..3.1) {
        let q = APComplex::from_f64(r * t.cos(), r * t.sin(), PREC);
        let z = APComplex::from_f64(10f64.powf(lz) * tz.cos(), 10f64.powf(lz) * tz.sin(), PREC);
        // θ(q²z) = θ(z)/(qz)
        let lhs = theta(&(&(&q * &q) * &z), &q).unwrap();
        let rhs = &theta(&z, &q).unwrap() * &(&q * &z).recip();
        let scale = theta(&z, &q).unwrap().abs().to_f64() / (r * 10f64.powf(lz)) + 1.0;
        let d = (&lhs - &rhs).abs().to_f64() / scale;
        prop_assert!(d <= 2f64.powi(-(PREC as i32) / 2), "defect {:e}", d);
    }

    #[test]
    fn max_modulus_sandwich(coeffs in prop::collection::vec((-1f64..1.0, -1f64..1.0), 4..30), lr in -2f64..4.0) {
        prop_assume!(coeffs.iter().any(|c| c.0.hypot(c.1) > 1e-3));
        let vals: Vec<APComplex> = coeffs.iter().map(|c| APComplex::from_f64(c.0, c.1, 128)).collect();
        let c = CoeffSequence::from_values(vals, 128);
        let mut padded = c.values.clone();
        padded.extend((0..8).map(|_| APComplex::zero(128)));
        let c = CoeffSequence::from_values(padded, 128);
        let m = max_modulus(&c, lr.exp()).unwrap();
        let d = coeffs.len() as f64;
        prop_assert!(m.log_m - m.log_max_term >= -1e-9, "{:?}", m);
        prop_assert!(m.log_m - m.log_max_term <= (2.0 * d).ln() + 1e-9, "{:?}", m);
    }
}

/// Fit-level invariants on every built-in instance whose asymptotics pass.
#[test]
fn fixture_fit_invariants() {
    let mut checked = 0;
    for name in INSTANCE_NAMES {
        let inst = fixtures::by_name(name, 512).unwrap();
        let Ok(f) = fit_instance(&inst) else { continue };
        if !f.fit.pass {
            continue;
        }
        let mu = f.fit.mu.to_f64();
        let rho2 = f.sector.rho.abs().to_f64().powi(2);
        let sub = f.charpoly.moduli().into_iter().filter(|&m| m < mu * (1.0 - 1e-12)).fold(0.0, f64::max);
        let delta = f.fit.delta.to_f64();
        assert!(delta > sub && delta > rho2 * mu && delta < mu, "{name}: δ = {delta} outside ({sub}, {mu})");

        // refitting the model sequence reproduces the snapped modulus
        let logs: Vec<f64> = (0..f.normalized.values().len()).map(|n| f.fit.model(n).ln_abs_f64()).collect();
        let moduli: Vec<Real> = f.charpoly.roots.iter().map(|r| r.value.abs()).collect();
        let again = estimate_mu_from(&logs, &moduli, inst.options.snap_tol).unwrap();
        assert_eq!(again.mu, f.fit.mu, "{name}: snap not idempotent");

        if !f.charpoly.is_self_reciprocal() {
            let unreversed: Vec<Real> = f.charpoly.roots_pk.iter().map(|r| r.value.abs()).collect();
            assert!(estimate_mu_from(&f.normalized.log_abs(), &unreversed, inst.options.snap_tol).is_err(), "{name}: fit accepted Pk roots");
        }
        checked += 1;
    }
    assert!(checked >= 5, "only {checked} fixtures reached a passing fit");
}

#[test]
fn class_count_bounded_by_l_m() {
    let mut seen = 0;
    for name in ["case1_gamma2", "theta_base", "partial_theta"] {
        let a = analyze(&fixtures::by_name(name, 512).unwrap());
        let (Some(p), Some(s)) = (a.progressions.as_ref(), a.sector.as_ref()) else { continue };
        let lm = p.l_period as usize * s.m as usize;
        assert!(p.classes.len() <= lm, "{name}: {} classes, L·M = {lm}", p.classes.len());
        seen += 1;
    }
    assert!(seen >= 1);
}
