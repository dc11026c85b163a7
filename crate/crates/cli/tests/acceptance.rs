//! End-to-end acceptance run. Registered with `harness = false` so the
//! per-criterion status lines are always printed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use irrmeter::{
    default_integrality_grid, denominator_trace, index_sweep, integrality_suite, random_pairs, run_command, table_rows,
    RunConfig,
};
use irrmeter_core::exactmath::{int, parse_rational, rat, Gn};
use irrmeter_core::interval::parse_decimal;
use irrmeter_core::measure::{self, Conclusion, DeltaMode, MeasureReport};
use irrmeter_core::pade::{pade_general, verify_det_m2, verify_recurrence, verify_weight};
use irrmeter_core::recurrence::{char_roots, ratio_estimate};
use irrmeter_core::series::{f_coeffs, rd_oracle, HypergeomParams, Poly};
use irrmeter_core::{Interval, Rational};

type Outcome = Result<String, String>;

fn presets() -> Vec<(&'static str, HypergeomParams)> {
    vec![
        ("binomial 1/3", HypergeomParams::binomial(rat(1, 3)).unwrap()),
        ("binomial -2/5", HypergeomParams::binomial(rat(-2, 5)).unwrap()),
        ("shifted-log 0", HypergeomParams::shifted_log(int(0)).unwrap()),
        ("shifted-log 1/2", HypergeomParams::shifted_log(rat(1, 2)).unwrap()),
        ("shifted-exp -1", HypergeomParams::shifted_exp(int(-1)).unwrap()),
        ("shifted-exp 1/2", HypergeomParams::shifted_exp(rat(1, 2)).unwrap()),
        ("general (2,1/3,1/5)", HypergeomParams::general(int(2), rat(1, 3), rat(1, 5)).unwrap()),
    ]
}

fn cli(args: &[&str]) -> irrmeter::Outcome {
    let mut v = vec!["irrmeter"];
    v.extend_from_slice(args);
    run_command(&RunConfig::from_args(v).expect("arguments parse"))
}

fn within(t: Duration, limit: Duration, what: &str) -> Result<(), String> {
    if t > limit {
        return Err(format!("{what} took {t:?}, limit {limit:?}"));
    }
    Ok(())
}

fn c1() -> Outcome {
    let t = Instant::now();
    let out = cli(&["mu", "--preset", "binomial", "--omega", "1/3", "--beta", "9", "--delta-mode", "bennett"]);
    let el = t.elapsed();
    if out.code != 0 {
        return Err(format!("exit {} ({})", out.code, out.stderr.trim()));
    }
    let v: serde_json::Value = serde_json::from_str(&out.stdout).map_err(|e| e.to_string())?;
    let lo = parse_decimal(v["result"]["mu"]["lo"].as_str().ok_or("mu.lo missing")?).map_err(|e| e.to_string())?;
    let hi = parse_decimal(v["result"]["mu"]["hi"].as_str().ok_or("mu.hi missing")?).map_err(|e| e.to_string())?;
    let target = parse_decimal("2.7428036524").unwrap();
    let tol = rat(1, 1_000_000_000);
    if (&lo - &target).abs() > tol || (&hi - &target).abs() > tol {
        return Err(format!("mu = [{lo}, {hi}] is not within 1e-9 of 2.7428036524"));
    }
    within(el, Duration::from_secs(1), "mu")?;
    Ok(format!("mu in [{}, {}] in {el:?}", v["result"]["mu"]["lo"], v["result"]["mu"]["hi"]))
}

fn c2() -> Outcome {
    let t = Instant::now();
    let rows = table_rows(DeltaMode::Bennett, 128).map_err(|e| e.to_string())?;
    let el = t.elapsed();
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !r.matches())
        .map(|r| format!("{}: {:?} vs {}", r.label, r.truncated, r.printed))
        .collect();
    if rows.len() != 18 || !bad.is_empty() {
        return Err(format!("{} rows, mismatches: {}", rows.len(), bad.join("; ")));
    }
    // the command path must agree with the library path
    let out = cli(&["table"]);
    let matches = out.stdout.lines().skip(1).filter(|l| l.ends_with(",true")).count();
    if out.code != 0 || matches != 18 {
        return Err(format!("table command: exit {}, {matches} matching rows", out.code));
    }
    within(el, Duration::from_secs(10), "table")?;
    Ok(format!("18/18 rows match by truncation in {el:?}"))
}

fn c3() -> Outcome {
    let mut count = 0;
    for (name, p) in presets() {
        for n in 1..=30 {
            let rep = verify_weight(n, &p);
            if !rep.ok {
                return Err(format!("{name}, n = {n}: {:?}", rep.first_violation()));
            }
            count += 1;
        }
    }
    Ok(format!("{count} (preset, n) cases exact"))
}

fn c4() -> Outcome {
    let mut count = 0;
    for (name, p) in presets() {
        for n in 1..=30 {
            let c = verify_recurrence(n, &p, n as usize + 4).map_err(|e| format!("{name}, n = {n}: {e}"))?;
            if !(c.ok && c.p0_residual.is_zero() && c.p1_residual.is_zero()) {
                return Err(format!("{name}, n = {n}: nonzero residual"));
            }
            count += 1;
        }
    }
    Ok(format!("{count} (preset, n) cases, P0 and P1 residuals zero"))
}

fn c5() -> Outcome {
    let mut count = 0;
    for (name, p) in presets() {
        if !p.nondegenerate() {
            return Err(format!("{name} unexpectedly degenerate"));
        }
        for n in 0..=30 {
            let c = verify_det_m2(n, &p).map_err(|e| format!("{name}, n = {n}: {e}"))?;
            if !c.ok || c.closed_form.is_zero() || c.symbolic != Poly::constant(c.closed_form.clone()) {
                return Err(format!("{name}, n = {n}: expanded {} vs {}", c.symbolic, c.closed_form));
            }
            count += 1;
        }
    }
    // degenerate parameters are rejected rather than reported as zero
    let deg = HypergeomParams::general(int(1), int(0), int(2)).unwrap();
    if verify_det_m2(3, &deg).is_ok() {
        return Err("delta in alpha*N was not rejected".into());
    }
    Ok(format!("{count} determinants equal the closed form and are nonzero"))
}

/// `P_{n,0}` from the `n` orthogonality equations, with `P_{n,1}` read off
/// as the polynomial part of `P_{n,0} f`.
fn linear_solve_pade(n: usize, p: &HypergeomParams, lead: &Rational) -> Option<(Poly, Poly)> {
    let c = f_coeffs(p, 2 * n + 1);
    let mut m: Vec<Vec<Rational>> = (0..n)
        .map(|k| {
            let mut row: Vec<Rational> = (0..n).map(|j| c[j + k].clone()).collect();
            row.push(-(lead * &c[n + k]));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let inv = m[col][col].recip();
        for x in m[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for j in col..=n {
                    let v = &m[col][j] * &f;
                    m[r][j] -= v;
                }
            }
        }
    }
    let mut a: Vec<Rational> = m.iter().map(|r| r[n].clone()).collect();
    a.push(lead.clone());
    let p1: Vec<Rational> = (0..n)
        .map(|k| (k + 1..=n).map(|j| &a[j] * &c[j - k - 1]).fold(Rational::zero(), |s, v| s + v))
        .collect();
    Some((Poly::new(a), Poly::new(p1)))
}

fn c6() -> Outcome {
    for (name, p) in presets() {
        for n in 0..=15u64 {
            if rd_oracle(n, &p) != pade_general(n, &p).p0 {
                return Err(format!("{name}: Rodrigues oracle differs at n = {n}"));
            }
        }
        for n in 1..=8usize {
            let pair = pade_general(n as u64, &p);
            let lead = pair.p0.leading().cloned().ok_or("zero P0")?;
            let (p0, p1) = linear_solve_pade(n, &p, &lead).ok_or_else(|| format!("{name}: singular system at n = {n}"))?;
            if p0 != pair.p0 || p1 != pair.p1 {
                return Err(format!("{name}: linear-solve oracle differs at n = {n}"));
            }
        }
    }
    Ok("Rodrigues n <= 15 and linear solve n <= 8 agree for 7 parameter sets".into())
}

fn c7() -> Outcome {
    let grid = default_integrality_grid();
    if grid.len() < 12 {
        return Err(format!("grid has only {} combinations", grid.len()));
    }
    for (r, p, b) in &grid {
        let s = integrality_suite(*r, p, b, 30);
        if !s.ok() {
            return Err(format!("{}: {:?}", s.label, s.failures.first()));
        }
    }
    Ok(format!("{} (regime, params, beta) combinations integral for n <= 30", grid.len()))
}

fn c8() -> Outcome {
    let t = Instant::now();
    let omega = rat(1, 3);
    let mut worst = (0u64, Rational::zero());
    for n in 1..=40u64 {
        let g = Gn(&omega, n).map_err(|e| e.to_string())?;
        let lhs = BigInt::from(5563) * &g;
        let rhs = BigInt::one() << n;
        if lhs < rhs {
            return Err(format!("5563 G_{n} = {lhs} < 2^{n}"));
        }
        let r = Rational::new(lhs, rhs);
        if n == 1 || r < worst.1 {
            worst = (n, r);
        }
    }
    within(t.elapsed(), Duration::from_secs(30), "G_n")?;
    Ok(format!("holds for 1 <= n <= 40; tightest at n = {} in {:?}", worst.0, t.elapsed()))
}

fn c9() -> Outcome {
    let p = HypergeomParams::binomial(rat(1, 3)).unwrap();
    let beta = int(9);
    let roots = char_roots(&p.alpha, &beta).map_err(|e| e.to_string())?;
    let trace = denominator_trace(&p, &beta, 401).map_err(|e| e.to_string())?;
    let prec = 256;
    let vals = trace.to_intervals(prec);
    let rho2 = roots.rho2.to_interval(prec);
    let root = vals[200].abs().ln().map_err(|e| e.to_string())?.scale(&rat(1, 200)).exp();
    let rel = root.sub(&rho2).abs().div(&rho2).map_err(|e| e.to_string())?;
    if rel.hi > rat(2, 100) {
        return Err(format!("|P_200,0(9)|^(1/200) = {root} is {rel} away from rho2 relatively"));
    }
    let rep = ratio_estimate(&vals, &roots.lambda2, (50, 400), prec).map_err(|e| e.to_string())?;
    let s1 = rep.sup_over(50, 225).ok_or("empty first half")?;
    let s2 = rep.sup_over(226, 400).ok_or("empty second half")?;
    let top = s1.clone().max(s2.clone());
    if (&s1 - &s2).abs() > &top * rat(1, 10) {
        return Err(format!("n^2 r_n sup {} vs {} not within 10%", f(&s1), f(&s2)));
    }
    Ok(format!(
        "relative gap {:.4} at n = 200; sup n^2 r_n = {:.4} on [50,225], {:.4} on [226,400]",
        rel.to_f64(),
        f(&s1),
        f(&s2)
    ))
}

fn f(q: &Rational) -> f64 {
    irrmeter_core::interval::rational_to_f64(q)
}

fn c10() -> Outcome {
    let p = HypergeomParams::binomial(rat(1, 3)).unwrap();
    let pairs = random_pairs(20241014, 100, 10_000);
    let res = index_sweep(&p, &int(9), &pairs, 120).map_err(|e| e.to_string())?;
    let bad: usize = res.iter().map(|(_, v)| v.len()).sum();
    let n_max = res.iter().map(|(n, _)| *n).max().unwrap_or(0);
    if bad != 0 {
        return Err(format!("{bad} index decreases after N"));
    }
    Ok(format!("{} random pairs, N <= {n_max}, zero violations up to n = 120", pairs.len()))
}

fn c11() -> Outcome {
    let fixtures = [(rat(1, 3), rat(1, 5), 5), (rat(1, 2), rat(1, 8), 2), (rat(1, 3), rat(1, 27), 3)];
    let mut checked = 0;
    for (w, b, p) in &fixtures {
        let pb = BigInt::from(*p);
        for n in 1..=20 {
            let c = measure::verify_padic_remainder(w, b, &pb, n).map_err(|e| e.to_string())?;
            let need = -&c.bound.exponent;
            let proven = match c.valuation {
                Some(v) => Rational::from_integer(BigInt::from(v)) >= need,
                None => c.lower >= need,
            };
            if !(c.ok && proven) {
                return Err(format!("omega = {w}, beta = {b}, p = {p}, n = {n}: valuation {:?}, bound exponent {}", c.valuation, c.bound.exponent));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (fixture, n) cases within the bound"))
}

fn c12() -> Outcome {
    let mut exp_cases = 0;
    for g in ["-1", "0", "1/2", "3", "7/3"] {
        for b in ["2", "-3", "5/2", "10", "-7/4"] {
            let (g, b) = (parse_rational(g).unwrap(), parse_rational(b).unwrap());
            let r = measure::mu_exp(&g, &b).map_err(|e| e.to_string())?;
            let mu = r.mu.as_ref().ok_or("mu_exp gave no value")?;
            if r.conclusion != Conclusion::ExactTwo || mu.lo != int(2) || mu.hi != int(2) {
                return Err(format!("mu_exp({g}, {b}) = {mu}"));
            }
            exp_cases += 1;
        }
    }
    let mut reports: Vec<MeasureReport> = table_rows(DeltaMode::Bennett, 128)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|r| r.report)
        .collect();
    for b in ["9", "-8", "27/2", "100"] {
        let b = parse_rational(b).unwrap();
        for w in [rat(1, 3), rat(1, 2), rat(-2, 5)] {
            reports.push(measure::mu_binomial(&w, &b, DeltaMode::Simple, 128).map_err(|e| e.to_string())?);
        }
        reports.push(measure::mu_log(&int(0), &b, 128).map_err(|e| e.to_string())?);
        reports.push(
            measure::mu_main(&HypergeomParams::general(int(2), rat(1, 3), rat(1, 5)).unwrap(), &(&b * int(40)), 128)
                .map_err(|e| e.to_string())?,
        );
    }
    let certified: Vec<&Interval> = reports.iter().filter(|r| r.certified).filter_map(|r| r.mu.as_ref()).collect();
    if let Some(m) = certified.iter().find(|m| m.lo < int(2)) {
        return Err(format!("certified mu {m} below 2"));
    }
    Ok(format!("{exp_cases} exp cases exactly 2; {} certified intervals from other routes all >= 2", certified.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("1 cube root of 3", c1),
        ("2 cubic-root table", c2),
        ("3 Padé weight", c3),
        ("4 recurrence identity", c4),
        ("5 determinant law", c5),
        ("6 oracle agreement", c6),
        ("7 integrality", c7),
        ("8 G_n inequality", c8),
        ("9 asymptotics", c9),
        ("10 index monotonicity", c10),
        ("11 p-adic bound", c11),
        ("12 exp case and floor", c12),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let res = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match res {
            Ok(msg) => println!("criterion {name}: PASS ({msg}) [{:.2?}]", t.elapsed()),
            Err(msg) => {
                failed += 1;
                println!("criterion {name}: FAIL ({msg}) [{:.2?}]", t.elapsed());
            }
        }
    }
    println!("acceptance: {}/12 criteria pass", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
