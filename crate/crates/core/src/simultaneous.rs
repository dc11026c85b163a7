//! Certificate checks for simultaneous approximation: integer matrix
//! sequences `M_n` whose rows are small linear forms in `theta = (1, theta_1,
//! ..., theta_s)`, the exponent bounds they imply, and effective lower bounds
//! in the geometric case. A built-in generator produces such certificates
//! from the binomial Padé pairs.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exactmath::{int, Rational, Regime};
use crate::interval::{exact_decimal, format_decimal, parse_decimal, round_decimal, Interval};
use crate::measure::{evaluate_f, mu_binomial, remainder_at, DeltaMode, EffectiveConstants, Verdict};
use crate::pade::cleared_values;
use crate::series::HypergeomParams;

/// One index of the certificate: `M_n` with its bounds `Q_n`, `E_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CriterionBlock {
    pub n: u64,
    pub matrix: Vec<Vec<BigInt>>,
    pub q: Rational,
    pub e: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionInput {
    pub s: usize,
    pub theta: Vec<Interval>,
    pub blocks: Vec<CriterionBlock>,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_int(tok: &str, line: usize) -> Result<BigInt> {
    tok.parse().map_err(|_| perr(line, format!("not an integer: {tok:?}")))
}

fn parse_dec(tok: &str, line: usize) -> Result<Rational> {
    parse_decimal(tok).map_err(|_| perr(line, format!("not a decimal: {tok:?}")))
}

fn decimal_string(q: &Rational, up: bool) -> String {
    exact_decimal(q).unwrap_or_else(|| format_decimal(q, 80, up))
}

impl CriterionInput {
    /// Reads the line format
    ///
    /// ```text
    /// s 1
    /// theta 1 1
    /// theta 0.1068333 0.1068334
    /// n 0
    /// -1 9
    /// -2 19
    /// Q 40
    /// E 3.5
    /// ```
    ///
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<CriterionInput> {
        let mut s: Option<usize> = None;
        let mut theta = Vec::new();
        let mut blocks: Vec<CriterionBlock> = Vec::new();
        // (n, rows, Q, E) under construction
        let mut cur: Option<(u64, Vec<Vec<BigInt>>, Option<Rational>, Option<Rational>, usize)> = None;
        let flush = |cur: &mut Option<(u64, Vec<Vec<BigInt>>, Option<Rational>, Option<Rational>, usize)>,
                         blocks: &mut Vec<CriterionBlock>,
                         dim: usize|
         -> Result<()> {
            if let Some((n, rows, q, e, line)) = cur.take() {
                if rows.len() != dim + 1 {
                    return Err(perr(line, format!("block n = {n} has {} rows, expected {}", rows.len(), dim + 1)));
                }
                let q = q.ok_or_else(|| perr(line, format!("block n = {n} has no Q line")))?;
                let e = e.ok_or_else(|| perr(line, format!("block n = {n} has no E line")))?;
                blocks.push(CriterionBlock { n, matrix: rows, q, e });
            }
            Ok(())
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            match toks[0] {
                "s" => {
                    if s.is_some() {
                        return Err(perr(line, "repeated s header"));
                    }
                    if toks.len() != 2 {
                        return Err(perr(line, "expected `s <dim>`"));
                    }
                    let d: usize = toks[1].parse().map_err(|_| perr(line, "bad dimension"))?;
                    if d == 0 {
                        return Err(perr(line, "dimension must be positive"));
                    }
                    s = Some(d);
                }
                "theta" => {
                    if toks.len() != 3 {
                        return Err(perr(line, "expected `theta <lo> <hi>`"));
                    }
                    let lo = parse_dec(toks[1], line)?;
                    let hi = parse_dec(toks[2], line)?;
                    if lo > hi {
                        return Err(perr(line, "theta endpoints out of order"));
                    }
                    theta.push(Interval { lo, hi, prec: 512 });
                }
                "n" => {
                    let dim = s.ok_or_else(|| perr(line, "block before the s header"))?;
                    flush(&mut cur, &mut blocks, dim)?;
                    if toks.len() != 2 {
                        return Err(perr(line, "expected `n <idx>`"));
                    }
                    let n: u64 = toks[1].parse().map_err(|_| perr(line, "bad index"))?;
                    cur = Some((n, Vec::new(), None, None, line));
                }
                "Q" | "E" => {
                    let c = cur.as_mut().ok_or_else(|| perr(line, format!("{} outside a block", toks[0])))?;
                    if toks.len() != 2 {
                        return Err(perr(line, format!("expected `{} <decimal>`", toks[0])));
                    }
                    let v = parse_dec(toks[1], line)?;
                    if toks[0] == "Q" {
                        c.2 = Some(v);
                    } else {
                        c.3 = Some(v);
                    }
                }
                _ => {
                    let dim = s.ok_or_else(|| perr(line, "matrix row before the s header"))?;
                    let c = cur.as_mut().ok_or_else(|| perr(line, "matrix row outside a block"))?;
                    if toks.len() != dim + 1 {
                        return Err(perr(line, format!("row has {} entries, expected {}", toks.len(), dim + 1)));
                    }
                    let row = toks.iter().map(|t| parse_int(t, line)).collect::<Result<Vec<_>>>()?;
                    c.1.push(row);
                }
            }
        }
        let dim = s.ok_or_else(|| perr(text.lines().count().max(1), "missing s header"))?;
        flush(&mut cur, &mut blocks, dim)?;
        let input = CriterionInput { s: dim, theta, blocks };
        Ok(input)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "s {}", self.s);
        for t in &self.theta {
            let _ = writeln!(out, "theta {} {}", decimal_string(&t.lo, false), decimal_string(&t.hi, true));
        }
        for b in &self.blocks {
            let _ = writeln!(out, "n {}", b.n);
            for row in &b.matrix {
                let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(out, "{}", cells.join(" "));
            }
            let _ = writeln!(out, "Q {}", decimal_string(&b.q, true));
            let _ = writeln!(out, "E {}", decimal_string(&b.e, false));
        }
        out
    }

    /// Structural checks: shapes, `theta_0 = 1`, nonzero determinants and
    /// strictly increasing `Q_n, E_n >= 1`.
    pub fn validate(&self) -> Result<()> {
        if self.theta.len() != self.s + 1 {
            return invalid(format!("theta has {} entries, expected {}", self.theta.len(), self.s + 1));
        }
        let one = Rational::one();
        if self.theta[0].lo != one || self.theta[0].hi != one {
            return invalid("theta_0 must be exactly 1");
        }
        if self.blocks.is_empty() {
            return invalid("no matrix blocks");
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if b.matrix.len() != self.s + 1 || b.matrix.iter().any(|r| r.len() != self.s + 1) {
                return invalid(format!("M_{} is not {}x{}", b.n, self.s + 1, self.s + 1));
            }
            if determinant(&b.matrix).is_zero() {
                return invalid(format!("det M_{} = 0", b.n));
            }
            if b.q < one || b.e < one {
                return invalid(format!("Q_{} and E_{} must be >= 1", b.n, b.n));
            }
            if i > 0 {
                let p = &self.blocks[i - 1];
                if b.n <= p.n {
                    return invalid(format!("indices must increase, got {} after {}", b.n, p.n));
                }
                if b.q <= p.q || b.e <= p.e {
                    return invalid(format!("Q_n and E_n must increase strictly at n = {}", b.n));
                }
            }
        }
        Ok(())
    }

    /// Same matrices with `Q_n = a alpha^n`, `E_n = beta^n / b`.
    pub fn with_geometric(&self, g: &Geometric) -> CriterionInput {
        let blocks = self
            .blocks
            .iter()
            .map(|b| CriterionBlock {
                n: b.n,
                matrix: b.matrix.clone(),
                q: g.q_at(b.n),
                e: g.e_at(b.n),
            })
            .collect();
        CriterionInput { s: self.s, theta: self.theta.clone(), blocks }
    }
}

/// Fraction-free Gaussian elimination.
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionMode {
    /// `|x_1| + ... + |x_s| <= Q_n`, `|x . theta| <= 1/E_n`.
    TypeI,
    /// `|x_0| <= Q_n`, `max_i |x_0 theta_i - x_i| <= 1/E_n`.
    TypeII,
}

impl CriterionMode {
    pub fn parse(text: &str) -> Result<CriterionMode> {
        match text {
            "type1" | "typeI" | "type-i" | "i" => Ok(CriterionMode::TypeI),
            "type2" | "typeII" | "type-ii" | "ii" | "dual" => Ok(CriterionMode::TypeII),
            _ => invalid(format!("unknown criterion mode {text:?} (expected type1 or type2)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowVerdict {
    pub n: u64,
    pub row: usize,
    pub verdict: Verdict,
    /// Size side: measured value, bound, verdict.
    pub size: Rational,
    pub size_bound: Rational,
    pub size_verdict: Verdict,
    /// Upper end of the enclosed linear form and the bound `1/E_n`.
    pub form: Interval,
    pub form_bound: Rational,
    pub form_verdict: Verdict,
}

fn compare_le(v: &Interval, bound: &Rational) -> Verdict {
    if &v.hi <= bound {
        Verdict::Pass
    } else if &v.lo > bound {
        Verdict::Fail
    } else {
        Verdict::Indeterminate
    }
}

fn combine(a: Verdict, b: Verdict) -> Verdict {
    match (a, b) {
        (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
        (Verdict::Indeterminate, _) | (_, Verdict::Indeterminate) => Verdict::Indeterminate,
        _ => Verdict::Pass,
    }
}

fn int_point(x: &BigInt, prec: u32) -> Interval {
    Interval::point(&Rational::from_integer(x.clone()), prec)
}

/// One verdict per `(n, row)`; structural problems are errors.
pub fn verify_matrix_hypotheses(input: &CriterionInput, mode: CriterionMode) -> Result<Vec<RowVerdict>> {
    input.validate()?;
    let prec = input.theta.iter().map(|t| t.prec).max().unwrap_or(512);
    let mut out = Vec::new();
    for b in &input.blocks {
        let inv_e = b.e.recip();
        for (r, x) in b.matrix.iter().enumerate() {
            let (size, form) = match mode {
                CriterionMode::TypeI => {
                    let size: BigInt = x[1..].iter().map(|v| v.abs()).sum();
                    let mut f = Interval::zero(prec);
                    for (xi, ti) in x.iter().zip(&input.theta) {
                        f = f.add(&ti.mul(&int_point(xi, prec)));
                    }
                    (size, f.abs())
                }
                CriterionMode::TypeII => {
                    let mut worst = Interval::zero(prec);
                    for i in 1..=input.s {
                        let d = input.theta[i].mul(&int_point(&x[0], prec)).sub(&int_point(&x[i], prec)).abs();
                        worst = worst.max(&d);
                    }
                    (x[0].abs(), worst)
                }
            };
            let size = Rational::from_integer(size);
            let size_verdict = if size <= b.q { Verdict::Pass } else { Verdict::Fail };
            let form_verdict = compare_le(&form, &inv_e);
            out.push(RowVerdict {
                n: b.n,
                row: r,
                verdict: combine(size_verdict, form_verdict),
                size,
                size_bound: b.q.clone(),
                size_verdict,
                form,
                form_bound: inv_e.clone(),
                form_verdict,
            });
        }
    }
    Ok(out)
}

/// `Q_n = a alpha^n`, `E_n = b^-1 beta^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Geometric {
    pub a: Rational,
    pub b: Rational,
    pub alpha: Rational,
    pub beta: Rational,
}

impl Geometric {
    pub fn q_at(&self, n: u64) -> Rational {
        &self.a * num_traits::pow(self.alpha.clone(), n as usize)
    }

    pub fn e_at(&self, n: u64) -> Rational {
        num_traits::pow(self.beta.clone(), n as usize) / &self.b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairsMode {
    /// `1 + max_window log Q_{n+1} / log E_{n-1}`.
    Window { lo: u64, hi: u64 },
    /// Declared `Q_n ~ alpha^n`, `E_n ~ beta^n`: the limit `1 + log alpha / log beta`.
    Geometric,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MuBound {
    pub mu: Interval,
    pub certified: bool,
    /// Index attaining the window maximum.
    pub argmax: Option<u64>,
    pub warnings: Vec<String>,
}

/// Bound on `mu(theta)` from pairs `(p_n, q_n)` with `|q_n| <= Q_n`,
/// `|q_n theta - p_n| <= 1/E_n`; `pairs[i]` has index `n0 + i`.
/// In geometric mode `alpha`, `beta` enclose the growth bases.
pub fn mu_from_pairs(
    pairs: &[(BigInt, BigInt)],
    n0: u64,
    qseq: &[Rational],
    eseq: &[Rational],
    mode: PairsMode,
    geometric: Option<(&Interval, &Interval)>,
    prec: u32,
) -> Result<MuBound> {
    if qseq.len() != pairs.len() || eseq.len() != pairs.len() {
        return invalid("pairs, Q and E must have the same length");
    }
    for i in 1..pairs.len() {
        let (p0, q0) = &pairs[i - 1];
        let (p1, q1) = &pairs[i];
        if (p0 * q1 - p1 * q0).is_zero() {
            return Err(Error::Hypothesis(format!(
                "pairs at n = {} and n = {} are linearly dependent",
                n0 + i as u64 - 1,
                n0 + i as u64
            )));
        }
    }
    let wp = prec + 32;
    match mode {
        PairsMode::Geometric => {
            let (al, be) = geometric.ok_or_else(|| Error::InvalidArgument("geometric mode needs growth bases".into()))?;
            let one = Interval::one(wp);
            if !al.definitely_gt(&one) || !be.definitely_gt(&one) {
                return invalid("growth bases must exceed 1");
            }
            let mu = one.add(&al.with_prec(wp).ln()?.div(&be.with_prec(wp).ln()?)?).with_prec(prec);
            let mut warnings = Vec::new();
            if mu.hi < int(2) {
                warnings.push("formula value is below 2; every irrational has exponent >= 2".to_string());
            }
            Ok(MuBound { mu, certified: true, argmax: None, warnings })
        }
        PairsMode::Window { lo, hi } => {
            let mut best: Option<(u64, Interval)> = None;
            let last = n0 + pairs.len() as u64 - 1;
            let one = Rational::one();
            for n in lo.max(n0 + 1)..=hi.min(last.saturating_sub(1)) {
                let i = (n - n0) as usize;
                let e = &eseq[i - 1];
                if e <= &one {
                    continue;
                }
                let r = Interval::ln_rational(&qseq[i + 1], wp).div(&Interval::ln_rational(e, wp))?;
                best = match best {
                    Some((m, b)) if b.hi >= r.hi => Some((m, b)),
                    _ => Some((n, r)),
                };
            }
            let (m, r) = best.ok_or_else(|| Error::InvalidArgument("window has no usable index".into()))?;
            let mu = Interval::one(wp).add(&r).with_prec(prec);
            Ok(MuBound {
                mu,
                certified: false,
                argmax: Some(m),
                warnings: vec!["finite-window proxy for the limsup; not certified".to_string()],
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBound {
    pub mode: CriterionMode,
    /// `y_0` for type I, `Y = sum_{i>=1} |y_i|` for type II.
    pub scale: Rational,
    pub bound: Interval,
    pub constants: EffectiveConstants,
}

/// Effective lower bound at an integer point.
/// Type I: `max_i |y_0 theta_i - y_i| >= 1/(c y_0^lambda)` for `2 b y_0 >= 1`.
/// Type II: `|y . theta| >= 1/(c Y^omega)` for `Y >= 1/(2b)`.
/// The rows of `input` are first checked against the declared geometric bounds.
pub fn effective_lower_bound(
    input: &CriterionInput,
    point: &[BigInt],
    mode: CriterionMode,
    geometric: &Geometric,
    prec: u32,
) -> Result<LowerBound> {
    if point.len() != input.s + 1 {
        return invalid(format!("point has {} coordinates, expected {}", point.len(), input.s + 1));
    }
    let verdicts = verify_matrix_hypotheses(&input.with_geometric(geometric), mode)?;
    if let Some(v) = verdicts.iter().find(|v| v.verdict != Verdict::Pass) {
        return Err(Error::Hypothesis(format!(
            "row {} of M_{} does not meet the declared geometric bounds ({:?})",
            v.row, v.n, v.verdict
        )));
    }
    let c = crate::measure::effective_constants(&geometric.a, &geometric.b, &geometric.alpha, &geometric.beta, prec)?;
    let scale = match mode {
        CriterionMode::TypeI => Rational::from_integer(point[0].clone()),
        CriterionMode::TypeII => Rational::from_integer(point[1..].iter().map(|v| v.abs()).sum()),
    };
    if scale < c.y0_floor {
        return Err(Error::Hypothesis(format!(
            "validity floor unmet: need {} >= 1/(2b) = {}",
            scale, c.y0_floor
        )));
    }
    let wp = prec + 32;
    let pow = Interval::ln_rational(&scale, wp).mul(&c.lambda_exp.with_prec(wp)).exp();
    let bound = c.c.with_prec(wp).mul(&pow).recip()?.with_prec(prec);
    Ok(LowerBound { mode, scale, bound, constants: c })
}

/// Certificate built from the binomial Padé pairs at `z = beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pipeline {
    pub omega: Rational,
    pub beta: Rational,
    /// `(p_n, q_n) = (kappa_n P_{n,1}(beta), kappa_n P_{n,0}(beta))` for `n = n0..`.
    pub pairs: Vec<(BigInt, BigInt)>,
    pub n0: u64,
    /// Pair-level bounds `Q'_n = a Q^n`, `E'_n = E^n / b`.
    pub pair_q: Vec<Rational>,
    pub pair_e: Vec<Rational>,
    /// Bases `Q >= rho2 Delta` and `E <= rho2 / Delta`, as decimals.
    pub growth_q: Rational,
    pub growth_e: Rational,
    /// Block rows `(-p_n, q_n)`, `(-p_{n+1}, q_{n+1})` with `Q_n = Q'_{n+1}`, `E_n = E'_n`.
    pub input: CriterionInput,
    pub geometric: Geometric,
}

/// Builds the `s = 1` certificate for `theta = f(beta) = (1/beta)(1-1/beta)^omega`
/// with the Bennett `Delta` when `|omega| = 1/3` and the simple one otherwise.
/// Blocks run over `n0..=nmax`, `n0` the first index with `E'_n >= 1`.
pub fn binomial_pipeline(omega: &Rational, beta: &Rational, nmax: u64, prec: u32) -> Result<Pipeline> {
    let mode = if omega.abs() == crate::exactmath::rat(1, 3) { DeltaMode::Bennett } else { DeltaMode::Simple };
    let rep = mu_binomial(omega, beta, mode, prec)?;
    let (Some(qg), Some(eg)) = (rep.q.clone(), rep.e.clone()) else {
        return Err(Error::Hypothesis(format!("E > 1 fails for omega = {omega}, beta = {beta}")));
    };
    let sig = 30;
    let growth_q = round_decimal(&qg.hi, sig, true);
    let growth_e = round_decimal(&eg.lo, sig, false);
    let params = HypergeomParams::binomial(omega.clone())?;
    let theta = evaluate_f(&params, beta, prec)?;
    let top = nmax + 1;
    let mut pairs = Vec::new();
    let mut rems = Vec::new();
    for n in 1..=top {
        let (q, p) = cleared_values(&params, beta, n, Regime::Binomial)?;
        let kappa = crate::exactmath::kappa_n(&params, beta, n, Regime::Binomial)?.kappa;
        let r = remainder_at(n, &params, beta, prec)?.scale(&kappa).abs();
        let direct = theta.mul(&int_point(&q, prec)).sub(&int_point(&p, prec)).abs();
        if !r.overlaps(&direct) {
            return Err(Error::Invariant(format!("remainder and q_n theta - p_n disagree at n = {n}")));
        }
        pairs.push((p, q));
        rems.push(r.hi);
    }
    // a = max |q_n| / Q^n and b = max |kappa_n R_n| E^n over the window
    let mut a = Rational::zero();
    let mut b = Rational::zero();
    for (i, ((_, q), r)) in pairs.iter().zip(&rems).enumerate() {
        let n = i + 1;
        let qa = Rational::from_integer(q.abs()) / num_traits::pow(growth_q.clone(), n);
        let rb = r * num_traits::pow(growth_e.clone(), n);
        a = a.max(qa);
        b = b.max(rb);
    }
    let a = round_decimal(&a, sig, true);
    let b = round_decimal(&b, sig, true);
    let geo_pairs = Geometric { a: a.clone(), b: b.clone(), alpha: growth_q.clone(), beta: growth_e.clone() };
    let n0 = (1..=nmax)
        .find(|&n| geo_pairs.e_at(n) >= Rational::one())
        .ok_or_else(|| Error::InvalidArgument(format!("nmax = {nmax} is too small for E'_n >= 1")))?;
    let idx = |n: u64| (n - 1) as usize;
    let pair_q: Vec<Rational> = (n0..=top).map(|n| geo_pairs.q_at(n)).collect();
    let pair_e: Vec<Rational> = (n0..=top).map(|n| round_decimal(&geo_pairs.e_at(n), 40, false)).collect();
    let mut blocks = Vec::new();
    for n in n0..=nmax {
        let (p, q) = &pairs[idx(n)];
        let (p1, q1) = &pairs[idx(n + 1)];
        blocks.push(CriterionBlock {
            n,
            matrix: vec![vec![-p, q.clone()], vec![-p1, q1.clone()]],
            q: pair_q[(n + 1 - n0) as usize].clone(),
            e: pair_e[(n - n0) as usize].clone(),
        });
    }
    let theta_dec = Interval {
        lo: round_decimal(&theta.lo, 90, false),
        hi: round_decimal(&theta.hi, 90, true),
        prec: theta.prec,
    };
    let input = CriterionInput { s: 1, theta: vec![Interval::one(prec), theta_dec], blocks };
    let geometric = Geometric { a: &a * &growth_q, b, alpha: growth_q.clone(), beta: growth_e.clone() };
    Ok(Pipeline {
        omega: omega.clone(),
        beta: beta.clone(),
        pairs: pairs[idx(n0)..].to_vec(),
        n0,
        pair_q,
        pair_e,
        growth_q,
        growth_e,
        input,
        geometric,
    })
}
