//! Runs every acceptance criterion at its stated tolerance and time budget,
//! printing one PASS/FAIL line each. Exits nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_rational::BigRational;
use shortcycles::dickman::{rho, theorem3_estimate};
use shortcycles::exactcount::{
    brute_force_count, coefficient_oracle, exact_count, ln_biguint, nu_log, poisson_local_prob_log,
};
use shortcycles::numeric::gamma::ln_factorial;
use shortcycles::saddle::{q_decomposition_check, solve_saddle, theorem2_estimate, DEFAULT_TOL};
use shortcycles::series::{build_coeff_table, d_coeff_exact, theorem1_estimate, x_expansion};

type Check = Result<String, String>;

/// Name, time budget and check.
type Criterion = (&'static str, Duration, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(estimate_ln: f64, exact_ln: f64) -> f64 {
    (estimate_ln - exact_ln).exp_m1().abs()
}

fn involutions() -> Check {
    let reference = common::involutions(20);
    for n in 1..=20u64 {
        // r ≤ n is a precondition; at n = 1 every permutation already has cycles ≤ 1.
        let count = exact_count(n, n.min(2)).map_err(|e| e.to_string())?.count;
        ensure(count == reference[n as usize], || {
            format!("n={n}: {count} vs {}", reference[n as usize])
        })?;
    }
    Ok("n = 1..20 exact".into())
}

fn brute_force() -> Check {
    let mut pairs = 0;
    for n in 1..=8u64 {
        for r in 1..=n {
            let exact = exact_count(n, r).map_err(|e| e.to_string())?.count;
            let brute = BigUint::from(brute_force_count(n, r).map_err(|e| e.to_string())?);
            ensure(exact == brute, || {
                format!("n={n} r={r}: {exact} vs {brute}")
            })?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} pairs exact"))
}

fn oracle_equivalence() -> Check {
    let mut worst = 0f64;
    for n in [50u64, 500, 2000] {
        for r in [2, 5, (n as f64).sqrt().ceil() as u64, n] {
            let float = nu_log(n, r).map_err(|e| e.to_string())?.ln();
            let big =
                ln_biguint(&exact_count(n, r).map_err(|e| e.to_string())?.count) - ln_factorial(n);
            let oracle = coefficient_oracle(n, r, 30)
                .map_err(|e| e.to_string())?
                .ln();
            let gap = (float - big).abs().max((float - oracle).abs());
            ensure(gap <= 1e-10, || format!("n={n} r={r}: gap {gap:e}"))?;
            worst = worst.max(gap);
        }
    }
    Ok(format!("max gap {worst:.1e} <= 1e-10"))
}

fn small_r_expansion() -> Check {
    let q = |a: i64, b: i64| BigRational::new(a.into(), b.into());
    let d = |r: u64| {
        (0..=r)
            .map(|k| d_coeff_exact(r, k))
            .collect::<Result<Vec<_>, _>>()
    };
    ensure(
        d(2).map_err(|e| e.to_string())? == vec![q(-1, 2), q(1, 1), q(-1, 4)],
        || "r=2 d-table".into(),
    )?;
    ensure(
        d(3).map_err(|e| e.to_string())? == vec![q(-2, 3), q(1, 2), q(5, 6), q(-5, 18)],
        || "r=3 d-table".into(),
    )?;
    let n = 10_000u64;
    let nf = n as f64;
    let exact = nu_log(n, 2).map_err(|e| e.to_string())?.ln() + ln_factorial(n);
    let classical = 0.5 * nf * nf.ln() - 0.5 * 2f64.ln() - nf / 2.0 + nf.sqrt() - 0.25;
    let err = rel_err(classical, exact);
    ensure(err <= 5.0 / nf.sqrt(), || {
        format!("Moser–Wyman error {err:e}")
    })?;
    // Error times n^{1/r} must stay bounded as n grows.
    for r in 2..=5u64 {
        for n in [1_000u64, 10_000, 100_000] {
            let est = theorem1_estimate(n, r)
                .map_err(|e| e.to_string())?
                .value
                .ln();
            let exact = nu_log(n, r).map_err(|e| e.to_string())?.ln() + ln_factorial(n);
            let product = rel_err(est, exact) * (n as f64).powf(1.0 / r as f64);
            ensure(product <= 5.0, || {
                format!("n={n} r={r}: error·n^(1/r) = {product}")
            })?;
        }
    }
    Ok(format!("d-tables exact, Moser–Wyman error {err:.1e}"))
}

fn saddle_accuracy() -> Check {
    let n = 5000u64;
    let mut report = Vec::new();
    for r in [10u64, 50, 100] {
        let est = theorem2_estimate(n, r).map_err(|e| e.to_string())?.ln();
        let exact = poisson_local_prob_log(n, r)
            .map_err(|e| e.to_string())?
            .ln();
        let err = rel_err(est, exact);
        let bound = 5.0 * r as f64 / n as f64;
        ensure(err <= bound, || format!("r={r}: {err:e} > {bound:e}"))?;
        report.push(format!("r={r}: {err:.1e}"));
    }
    // Error times n/r must stay bounded as n grows at fixed u.
    for n in [1_000u64, 5_000, 20_000] {
        let r = n / 50;
        let est = theorem2_estimate(n, r).map_err(|e| e.to_string())?.ln();
        let exact = poisson_local_prob_log(n, r)
            .map_err(|e| e.to_string())?
            .ln();
        let product = rel_err(est, exact) * n as f64 / r as f64;
        ensure(product <= 5.0, || {
            format!("n={n} r={r}: error·n/r = {product}")
        })?;
    }
    Ok(report.join(", "))
}

fn dickman_accuracy() -> Check {
    let n = 10_000u64;
    let nf = n as f64;
    let mut report = Vec::new();
    for r in [500u64, 1000, 2500, 5000, 10_000] {
        let rf = r as f64;
        let est = theorem3_estimate(n, r).map_err(|e| e.to_string())?.ln();
        let exact = poisson_local_prob_log(n, r)
            .map_err(|e| e.to_string())?
            .ln();
        let err = rel_err(est, exact);
        let bound = 5.0 * nf * (nf / rf + 1.0).ln() / (rf * rf);
        ensure(err <= bound, || format!("r={r}: {err:e} > {bound:e}"))?;
        report.push(format!("r={r}: {err:.1e}"));
    }
    for n in [1_000u64, 10_000, 100_000] {
        let (nf, rf) = (n as f64, (n / 4) as f64);
        let est = theorem3_estimate(n, n / 4).map_err(|e| e.to_string())?.ln();
        let exact = poisson_local_prob_log(n, n / 4)
            .map_err(|e| e.to_string())?
            .ln();
        let product = rel_err(est, exact) * rf * rf / (nf * (nf / rf + 1.0).ln());
        ensure(product <= 5.0, || format!("n={n}: scaled error {product}"))?;
    }
    Ok(report.join(", "))
}

fn dickman_function() -> Check {
    let log_rho = |u: f64| rho(u).map(|c| c.log_rho).map_err(|e| e.to_string());
    for u in [0.0, 0.5, 1.0] {
        ensure(log_rho(u)? == 0.0, || format!("ρ({u}) != 1"))?;
    }
    let two = (log_rho(2.0)?.exp() - (1.0 - 2f64.ln())).abs();
    ensure(two <= 1e-12, || format!("ρ(2) off by {two:e}"))?;
    let oracle = common::rho_three_by_quadrature();
    let three = (log_rho(3.0)?.exp() - oracle).abs() / oracle;
    ensure(three <= 1e-10, || format!("ρ(3) off by {three:e}"))?;
    let h = 1e-3;
    let mut worst = 0f64;
    for i in 0..100 {
        let u = 1.0 + 49.0 * (i as f64 + 0.5) / 100.0;
        let log_slope = (log_rho(u + h)? - log_rho(u - h)?) / (2.0 * h);
        let residual = (u * log_slope * (log_rho(u)? - log_rho(u - 1.0)?).exp() + 1.0).abs();
        worst = worst.max(residual);
    }
    ensure(worst <= 1e-6, || {
        format!("delay-equation residual {worst:e}")
    })?;
    Ok(format!("ρ(3) rel {three:.1e}, residual {worst:.1e}"))
}

fn saddle_identities() -> Check {
    let mut cells = 0;
    for n in [10u64, 100, 1_000, 10_000, 100_000] {
        let nf = n as f64;
        for r in [
            1,
            2,
            3,
            nf.ln().ceil() as u64,
            nf.sqrt().ceil() as u64,
            n.div_ceil(2),
            n,
        ] {
            let s = solve_saddle(n, r, DEFAULT_TOL).map_err(|e| e.to_string())?;
            let residual = (common::power_sum(s.log_x, r) - nf).abs() / nf;
            ensure(residual <= 1e-12, || {
                format!("n={n} r={r}: residual {residual:e}")
            })?;
            let rf = r as f64;
            if s.u > 1.0 {
                let (lo, hi) = (s.u.powf(1.0 / rf), s.u.powf(2.0 / (rf + 1.0)));
                let slack = 4.0 * f64::EPSILON * hi;
                ensure(s.x >= lo - slack && s.x <= hi + slack, || {
                    format!("n={n} r={r}: bracket")
                })?;
            }
            if s.x > 1.0 + 1e-6 {
                let closed = rf * rf * s.u + rf * (s.x - s.u) / (s.x - 1.0);
                let gap = (s.lambda2() - closed).abs() / closed;
                ensure(gap <= 1e-9, || format!("n={n} r={r}: λ identity {gap:e}"))?;
            }
            let q = q_decomposition_check(n, r).map_err(|e| e.to_string())?;
            ensure(q <= 1e-9, || {
                format!("n={n} r={r}: log Q decomposition {q:e}")
            })?;
            cells += 1;
        }
    }
    Ok(format!("{cells} cells"))
}

fn series_oracle() -> Check {
    let mut worst = 0f64;
    for r in [2usize, 3, 5, 8] {
        let oracle = common::series_oracle(r, 41);
        let table = build_coeff_table(r as u64, 40).map_err(|e| e.to_string())?;
        let mut compare = |name: &str, n: i64, ours: f64, theirs: f64| {
            let gap = (ours - theirs).abs() / theirs.abs().max(1.0);
            worst = worst.max(gap);
            ensure(gap <= 1e-10, || {
                format!("r={r} {name}_{n}: {ours} vs {theirs}")
            })
        };
        for n in 0..=40usize {
            compare("g", n as i64, table.g[n], oracle.g[n])?;
            compare("Λ", n as i64, table.lambda[n], oracle.lambda[n])?;
            if n >= 1 {
                compare("b", n as i64, table.b[n], oracle.b[n])?;
            }
        }
        for shifted in 0..=40 - r {
            let n = shifted as i64 - r as i64;
            compare("h", n, table.h(n).unwrap_or(f64::NAN), oracle.h[shifted])?;
        }
    }
    Ok(format!("max gap {worst:.1e}"))
}

fn x_expansion_check() -> Check {
    let mut report = Vec::new();
    for (n, r) in [(1_000_000u64, 2u64), (100_000_000, 3), (1_000_000, 5)] {
        let expansion = x_expansion(n, r).map_err(|e| e.to_string())?.value;
        let x = solve_saddle(n, r, DEFAULT_TOL)
            .map_err(|e| e.to_string())?
            .x;
        let gap = (expansion - x).abs();
        ensure(gap <= 50.0 / n as f64, || {
            format!("n={n} r={r}: gap {gap:e}")
        })?;
        report.push(format!("({n},{r}): {gap:.1e}"));
    }
    for n in [10_000u64, 1_000_000, 100_000_000] {
        let expansion = x_expansion(n, 3).map_err(|e| e.to_string())?.value;
        let x = solve_saddle(n, 3, DEFAULT_TOL)
            .map_err(|e| e.to_string())?
            .x;
        let product = (expansion - x).abs() * n as f64;
        ensure(product <= 50.0, || format!("n={n}: gap·n = {product}"))?;
    }
    Ok(report.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 involution sequence", Duration::from_secs(1), involutions),
        (
            "2 brute-force equivalence",
            Duration::from_secs(10),
            brute_force,
        ),
        (
            "3 oracle equivalence",
            Duration::from_secs(30),
            oracle_equivalence,
        ),
        (
            "4 small-r expansion",
            Duration::from_secs(5),
            small_r_expansion,
        ),
        (
            "5 saddle-point accuracy",
            Duration::from_secs(10),
            saddle_accuracy,
        ),
        (
            "6 Dickman-regime accuracy",
            Duration::from_secs(60),
            dickman_accuracy,
        ),
        (
            "7 Dickman function",
            Duration::from_secs(10),
            dickman_function,
        ),
        (
            "8 saddle identities",
            Duration::from_secs(5),
            saddle_identities,
        ),
        ("9 series oracle", Duration::from_secs(5), series_oracle),
        (
            "10 saddle-point expansion",
            Duration::from_secs(1),
            x_expansion_check,
        ),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {elapsed:.2?} > {budget:?}"))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} [{elapsed:.2?}]");
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
