//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use num_rational::Ratio;
use qdiff_lab::apnum::{APComplex, Real};
use qdiff_lab::asymfit::estimate_mu_from;
use qdiff_lab::diagram::{build_diagram, sector_data};
use qdiff_lab::pipeline::{analyze, fit_instance, Status};
use qdiff_lab::recurrence::taylor_coefficients;
use qdiff_lab::selftest::{comparison_defects, exact_recurrence_values, theta_worst_defect};
use qdiff_lab::theta::{period_grid, theta_growth_residual};
use qdiff_lab::zeros::match_progressions;
use qdiff_lab::{fixtures, Error};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn newton_puiseux() -> Outcome {
    let inst = fixtures::figure1_degrees(128);
    let t = Instant::now();
    let d = build_diagram(&[0, 1, 2, 1, 3]);
    let elapsed = t.elapsed();
    let i1 = sector_data(&inst.qde, &d, 1).i_k;
    let i2 = sector_data(&inst.qde, &d, 2).i_k;
    let ok = d.k() == 2
        && d.vertices == vec![(0, 0), (2, 2), (4, 3)]
        && d.slopes == vec![Ratio::from_integer(1), Ratio::new(1, 2)]
        && i1 == vec![0, 1, 2]
        && i2 == vec![2, 4]
        && elapsed < Duration::from_millis(1);
    let slopes: Vec<String> = d.slopes.iter().map(|s| s.to_string()).collect();
    check(ok, format!("K = {}, vertices {:?}, slopes [{}], I_1 = {i1:?}, I_2 = {i2:?}, {elapsed:?}", d.k(), d.vertices, slopes.join(", ")))
}

fn coefficient_oracle() -> Outcome {
    let prec = 512;
    let t = Instant::now();
    let inst = fixtures::case1_gamma2_single(prec);
    let mut opts = inst.options.clone();
    opts.n_max = 80;
    let c = taylor_coefficients(&inst.qde, &opts).map_err(|e| e.to_string())?;
    // α_n = λ_1ⁿ q^{n²/2}, λ_1 = 2 + √3
    let lambda = APComplex::from_real(Real::from_i64(2, prec) + Real::from_i64(3, prec).sqrt());
    let root_q = APComplex::from_real(Real::parse("0.2", prec).unwrap().sqrt());
    let mut worst = f64::NEG_INFINITY;
    for n in 0..=80i64 {
        let d = APComplex::rel_dist(&c.values[n as usize], &(&lambda.powi(n) * &root_q.powi(n * n)));
        if !d.is_zero() {
            worst = worst.max(d.ln_abs_f64() / std::f64::consts::LN_2);
        }
    }
    let elapsed = t.elapsed();
    check(worst <= -256.0 && elapsed < Duration::from_secs(5), format!("worst log2 relative error {worst:.1} for n ≤ 80, {elapsed:.2?}"))
}

fn convention_guard() -> Outcome {
    let t = Instant::now();
    let inst = fixtures::partial_theta(512);
    let f = fit_instance(&inst).map_err(|e| e.to_string())?;
    let sqrt2 = 2f64.sqrt();
    let gap = (f.fit.mu_raw - sqrt2).abs() / sqrt2;
    let snapped = (f.fit.mu.to_f64() - sqrt2).abs();
    let root = f.charpoly.roots.iter().map(|r| r.value.abs().to_f64()).fold(0.0, f64::max);
    let unreversed: Vec<Real> = f.charpoly.roots_pk.iter().map(|r| r.value.abs()).collect();
    let pk_mod = unreversed[0].to_f64();
    let rejected = matches!(estimate_mu_from(&f.normalized.log_abs(), &unreversed, 0.05), Err(Error::NoModulusMatch { .. }));
    let elapsed = t.elapsed();
    check(
        gap <= 1e-6 && snapped < 1e-15 && (root - sqrt2).abs() < 1e-15 && (pk_mod - 0.5f64.sqrt()).abs() < 1e-15 && rejected && elapsed < Duration::from_secs(1),
        format!("μ estimate {:.12} (relative gap {gap:.1e}), unreversed root modulus {pk_mod:.6} rejected: {rejected}, {elapsed:.2?}", f.fit.mu_raw),
    )
}

fn exact_recurrence() -> Outcome {
    let prec = 512;
    let y = exact_recurrence_values(prec, 20).map_err(|e| e.to_string())?;
    let two = Real::from_i64(2, prec);
    let exact = y.iter().enumerate().all(|(i, v)| {
        let n = i as i64 + 1;
        *v == APComplex::from_real(two.powi((n + 1) * (n + 1)))
    });
    let mut logs = vec![f64::NEG_INFINITY];
    logs.extend(y.iter().map(|v| v.ln_abs_f64()));
    let refused = estimate_mu_from(&logs, &[Real::one(prec)], 0.05);
    let ok = exact && y.len() == 20 && matches!(refused, Err(Error::GrowthRestrictionViolated { .. }));
    check(ok, format!("y(n) = 2^((n+1)²) exactly for 1 ≤ n ≤ 20: {exact}; fit: {:?}", refused.map(|m| m.mu_raw)))
}

fn theta_equivalence() -> Outcome {
    let t = Instant::now();
    let worst = theta_worst_defect(256, 100).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let bound = 1e-30f64.log2();
    check(worst <= bound && elapsed < Duration::from_secs(10), format!("100 points at 256 bits, worst log2 relative difference {worst:.1} (bound {bound:.1}), {elapsed:.2?}"))
}

fn theta_growth() -> Outcome {
    let grid = period_grid(0.3, 1e3, 1e9, 24);
    let mut parts = Vec::new();
    let mut ok = true;
    for kappa in [0.0, 1.0, 2.0] {
        let g = theta_growth_residual(0.3, kappa, &grid, 192).map_err(|e| e.to_string())?;
        ok &= g.periodicity_defect <= 0.01 && g.drift_slope.abs() < 0.05;
        parts.push(format!("κ={kappa}: defect {:.2e}, drift {:.2e}", g.periodicity_defect, g.drift_slope));
    }
    check(ok, parts.join("; "))
}

fn simple_root_progressions() -> Outcome {
    let inst = fixtures::case1_gamma2(512);
    let a = analyze(&inst);
    let zs = a.zeros.as_ref().ok_or("no zero set")?;
    let p = a.progressions.as_ref().ok_or("no progression fit")?;
    let fit = a.fit.as_ref().ok_or("no asymptotic fit")?;
    let q = 0.2f64;
    let r16 = q.powi(-16);
    let ratio = p.ratio.to_c64();
    let all_members: usize = p.classes.iter().map(|c| c.members.len()).sum();
    let late: Vec<f64> = p.members().filter(|(_, m)| m.generation >= 4).map(|(_, m)| m.residual).collect();
    let worst_late = late.iter().cloned().fold(0.0, f64::max);
    let bound = (fit.delta.to_f64() / fit.mu.to_f64()).ln() * 0.8;
    let slope = p.decay_rate.ln();
    let audits_ok = !zs.audits.is_empty() && zs.audits.iter().all(|x| x.winding == x.listed);
    let trust_ok = zs.trust_radius >= r16 * (1.0 - 1e-9);
    let ok = p.classes.len() == 2
        && (ratio.0 - q.powi(-2)).abs() < 1e-9
        && ratio.1.abs() < 1e-9
        && all_members == zs.count()
        && worst_late <= 0.01
        && slope <= bound
        && audits_ok
        && trust_ok
        && matches!(a.stage("zeros"), Some(Status::Pass));
    check(
        ok,
        format!(
            "{} zeros within {:.3e} in {} classes, ratio {:.6}, worst residual from generation 4 {worst_late:.2e}, slope {slope:.3} ≤ {bound:.3}, {} audits match",
            zs.count(),
            zs.trust_radius,
            p.classes.len(),
            ratio.0,
            zs.audits.len()
        ),
    )
}

fn multiple_root_correction() -> Outcome {
    let a = analyze(&fixtures::case2(512));
    let table = a.correction.as_ref().ok_or("no correction table")?;
    let window: Vec<(i64, f64)> = table.iter().cloned().filter(|(n, _)| (8..=14).contains(n)).collect();
    let in_range = window.len() == 7 && window.iter().all(|(_, v)| (0.7..=1.3).contains(v));
    let trending = window.windows(2).all(|w| (w[1].1 - 1.0).abs() <= (w[0].1 - 1.0).abs());
    let shown: Vec<String> = window.iter().map(|(n, v)| format!("{n}:{v:.4}")).collect();
    check(in_range && trending, format!("n·(1 - z_n/ξ_n) = {}", shown.join(" ")))
}

fn growth_law() -> Outcome {
    let a1 = analyze(&fixtures::case2(512));
    let a0 = analyze(&fixtures::by_name("case2_kappa0", 512).unwrap());
    let g1 = a1.growth.as_ref().ok_or("no growth report for c_1 ≠ 0")?;
    let g0 = a0.growth.as_ref().ok_or("no growth report for c_1 = 0")?;
    let ok = g1.pass() && g1.kappa == 1 && g0.pass() && g0.kappa == 0 && g0.mu == 1.0;
    check(
        ok,
        format!(
            "c_1≠0: κ={} μ={} range {:.2e}/{:.2e} defect {:.2e} drift {:.2e}; c_1=0: κ={} μ={} defect {:.2e} drift {:.2e}",
            g1.kappa,
            g1.mu,
            g1.range_top,
            g1.range_first,
            g1.periodicity_defect.unwrap_or(f64::NAN),
            g1.drift_slope,
            g0.kappa,
            g0.mu,
            g0.periodicity_defect.unwrap_or(f64::NAN),
            g0.drift_slope
        ),
    )
}

fn comparison_identities() -> Outcome {
    let (fe, prod) = comparison_defects(512).map_err(|e| e.to_string())?;
    check(fe <= -128.0 && prod <= -128.0, format!("functional equation residual 2^{fe:.1} over 20 points, product identity defect 2^{prod:.1}"))
}

fn negative_control() -> Outcome {
    let inst = fixtures::case1_irrational(512);
    let a = analyze(&inst);
    let no_comm = a.errors.iter().any(|e| matches!(e, Error::NoCommensuration { .. }));
    let (zs, fit, s) = (a.zeros.as_ref().ok_or("no zero set")?, a.fit.as_ref().ok_or("no fit")?, a.sector.as_ref().ok_or("no sector")?);
    let forced = match match_progressions(zs, &inst.qde.q, s.n, s.m, 1, fit) {
        Ok(p) if p.pass => Err(format!("progressions forced with L = 1 passed (rate {:.3})", p.decay_rate)),
        Ok(p) => Ok(format!("forced L = 1 residual factor {:.3} per generation", p.decay_rate)),
        Err(e) => Ok(format!("forced L = 1 refused: {e}")),
    };
    match forced {
        Ok(msg) => check(no_comm && a.exit_code() == 4 && a.progressions.is_none(), format!("exit code {}, {msg}", a.exit_code())),
        Err(msg) => Err(msg),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("newton-puiseux diagram", newton_puiseux),
        ("coefficient oracle", coefficient_oracle),
        ("convention guard", convention_guard),
        ("exact perturbed recurrence", exact_recurrence),
        ("theta triple product", theta_equivalence),
        ("theta_kappa growth", theta_growth),
        ("simple-root progressions", simple_root_progressions),
        ("multiple-root correction", multiple_root_correction),
        ("two-term growth law", growth_law),
        ("comparison function identities", comparison_identities),
        ("incommensurate negative control", negative_control),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("PASS {:>2} {name}: {d} [{secs:.2}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
