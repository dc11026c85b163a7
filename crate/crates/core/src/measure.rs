//! Irrationality-measure bounds `mu(f(beta)) <= 1 + log Q / log E` built from
//! the denominator growth `Delta` and the characteristic moduli `rho1 < rho2`,
//! together with certified evaluation of `f(beta)` and `R_n(beta)`, the
//! effective constants of the geometric criterion and the `p`-adic remainder
//! bound for the binomial family.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exactmath::{
    den, factorize, int, is_integer, kappa_n, nu, padic_valuation, rat, totient, FactoredRadical, Gn,
    Rational, Regime,
};
use crate::interval::Interval;
use crate::pade::{lambda_nn, pade_general};
use crate::recurrence::{char_roots, CharRoots, QuadraticNumber};
use crate::series::HypergeomParams;

/// Refinement stops here when a comparison is still undecided.
pub const MAX_PREC: u32 = 16_384;

/// Upper limit on series terms summed by [`evaluate_f`] and [`remainder_at`].
pub const TERM_CAP: u64 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

impl HypothesisCheck {
    fn new(name: &str, ok: bool, detail: impl Into<String>) -> HypothesisCheck {
        HypothesisCheck {
            name: name.to_string(),
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            detail: detail.into(),
        }
    }
}

/// How `Delta` is bounded on the binomial route.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaMode {
    /// `nu(omega) den(beta)`.
    Simple,
    /// `(3 sqrt 3 / 2) den(beta)`, only for `|omega| = 1/3`.
    Bennett,
    /// `nu(omega) den(beta) max_{n0 <= n <= n1} G_n^(-1/n)`: a finite-window
    /// proxy for the limsup, never certified.
    Window { n0: u64, n1: u64 },
}

impl DeltaMode {
    /// Parses `simple`, `bennett` or `window:n0:n1`.
    pub fn parse(text: &str) -> Result<DeltaMode> {
        let t = text.trim();
        match t {
            "simple" => return Ok(DeltaMode::Simple),
            "bennett" => return Ok(DeltaMode::Bennett),
            _ => {}
        }
        let parts: Vec<&str> = t.split(':').collect();
        if parts.len() == 3 && parts[0] == "window" {
            let n0: u64 = parts[1].parse().map_err(|_| Error::InvalidArgument(format!("bad n0 in {t:?}")))?;
            let n1: u64 = parts[2].parse().map_err(|_| Error::InvalidArgument(format!("bad n1 in {t:?}")))?;
            if n0 == 0 || n1 < n0 {
                return invalid(format!("window needs 1 <= n0 <= n1, got {n0}..{n1}"));
            }
            return Ok(DeltaMode::Window { n0, n1 });
        }
        invalid(format!("unknown delta mode {t:?} (expected simple, bennett or window:n0:n1)"))
    }

    pub fn name(&self) -> String {
        match self {
            DeltaMode::Simple => "simple".to_string(),
            DeltaMode::Bennett => "bennett".to_string(),
            DeltaMode::Window { n0, n1 } => format!("window:{n0}:{n1}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Main,
    Log,
    Binomial,
    Exp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    /// `mu <= 1 + log Q / log E`.
    Bound,
    /// A hypothesis failed, typically `E <= 1`.
    NoConclusion,
    /// `alpha = 0`: the exponent is exactly 2.
    ExactTwo,
}

/// `Delta = rational * radical * exp(exp_arg)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaParts {
    pub rational: Rational,
    pub radical: FactoredRadical,
    pub exp_arg: Rational,
}

impl DeltaParts {
    pub fn enclose(&self, prec: u32) -> Interval {
        let wp = prec + 16;
        let mut v = self.radical.enclose(wp).scale(&self.rational);
        if !self.exp_arg.is_zero() {
            v = v.mul(&Interval::exp_rational(&self.exp_arg, wp));
        }
        v.with_prec(prec)
    }

    pub fn ln_enclose(&self, prec: u32) -> Interval {
        let wp = prec + 16;
        let l = Interval::ln_rational(&self.rational, wp)
            .add(&self.radical.ln_enclose(wp))
            .add(&Interval::point(&self.exp_arg, wp));
        l.with_prec(prec)
    }
}

impl fmt::Display for DeltaParts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rational)?;
        if !self.radical.is_one() {
            write!(f, " * {}", self.radical)?;
        }
        if !self.exp_arg.is_zero() {
            write!(f, " * exp({})", self.exp_arg)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureReport {
    pub route: Route,
    pub regime: Regime,
    pub delta_mode: Option<String>,
    pub prec: u32,
    pub delta_parts: Option<DeltaParts>,
    pub delta: Option<Interval>,
    pub rho1: Option<QuadraticNumber>,
    pub rho2: Option<QuadraticNumber>,
    pub q: Option<Interval>,
    pub e: Option<Interval>,
    pub mu: Option<Interval>,
    pub hypotheses: Vec<HypothesisCheck>,
    pub conclusion: Conclusion,
    pub certified: bool,
    pub warnings: Vec<String>,
}

impl MeasureReport {
    pub fn all_pass(&self) -> bool {
        self.hypotheses.iter().all(|h| h.verdict == Verdict::Pass)
    }

    pub fn failures(&self) -> Vec<&HypothesisCheck> {
        self.hypotheses.iter().filter(|h| h.verdict != Verdict::Pass).collect()
    }
}

/// Which of the two equivalent forms of `E` a route uses.
#[derive(Clone, Copy, PartialEq, Eq)]
enum EForm {
    /// `E = (rho1 Delta)^-1`.
    General,
    /// `E = rho2 / Delta`, valid when `rho1 rho2 = 1`.
    Unit,
}

struct Draft {
    route: Route,
    regime: Regime,
    delta_mode: Option<String>,
    hypotheses: Vec<HypothesisCheck>,
    roots: Option<CharRoots>,
    delta: Option<DeltaParts>,
    form: EForm,
    certified: bool,
    warnings: Vec<String>,
}

fn abs_gt(a: &Rational, b: &Rational) -> bool {
    a.abs() > b.abs()
}

/// `exp(den(y)/phi(den(y)))` as an exponent.
fn totient_exp_arg(y: &Rational) -> Result<Rational> {
    let d = den(y);
    Ok(Rational::new(d.clone(), totient(&d)?))
}

/// Exact decision of `x * Delta < 1` for a positive quadratic `x`.
fn product_below_one(x: &QuadraticNumber, delta: &DeltaParts, prec: u32) -> Result<bool> {
    if delta.exp_arg.is_zero() {
        let m = delta.radical.exponent_lcm();
        if let Some(mu) = m.to_u64().filter(|&m| m <= 512) {
            let rad = delta.radical.pow_rational(&m).ok_or_else(|| {
                Error::Invariant(format!("radical {} not rational at power {m}", delta.radical))
            })?;
            let lhs = x.scale(&delta.rational).pow(mu).scale(&rad);
            return Ok(lhs.cmp_exact(&QuadraticNumber::rational(Rational::one())) == Ordering::Less);
        }
    }
    // A nonzero rational exp argument makes x * Delta transcendental, so it
    // never equals 1 and refinement terminates.
    let one = Rational::one();
    let mut p = prec.max(64);
    loop {
        let v = x.to_interval(p).mul(&delta.enclose(p));
        if v.hi < one {
            return Ok(true);
        }
        if v.lo >= one {
            return Ok(false);
        }
        if p >= MAX_PREC {
            return Err(Error::Indeterminate { what: "E > 1".to_string(), prec: p });
        }
        p = (2 * p).min(MAX_PREC);
    }
}

fn finish(d: Draft, prec: u32) -> Result<MeasureReport> {
    let mut rep = MeasureReport {
        route: d.route,
        regime: d.regime,
        delta_mode: d.delta_mode,
        prec,
        delta: d.delta.as_ref().map(|x| x.enclose(prec)),
        delta_parts: d.delta.clone(),
        rho1: d.roots.as_ref().map(|r| r.rho1.clone()),
        rho2: d.roots.as_ref().map(|r| r.rho2.clone()),
        q: None,
        e: None,
        mu: None,
        hypotheses: d.hypotheses,
        conclusion: Conclusion::NoConclusion,
        certified: false,
        warnings: d.warnings,
    };
    let (Some(roots), Some(delta)) = (d.roots, d.delta) else {
        return Ok(rep);
    };
    if !rep.all_pass() {
        return Ok(rep);
    }
    let x = match d.form {
        EForm::General => roots.rho1.clone(),
        EForm::Unit => roots.rho2.recip()?,
    };
    let e_gt_one = product_below_one(&x, &delta, prec)?;
    rep.hypotheses.push(HypothesisCheck::new(
        "E > 1",
        e_gt_one,
        if e_gt_one { "decided exactly or by refinement" } else { "E <= 1: no conclusion" },
    ));
    if !e_gt_one {
        return Ok(rep);
    }
    let mut wp = prec + 32;
    loop {
        let ln_d = delta.ln_enclose(wp);
        let ln_r2 = roots.rho2.to_interval(wp).ln()?;
        let ln_q = ln_r2.add(&ln_d);
        let ln_e = match d.form {
            EForm::General => roots.rho1.to_interval(wp).ln()?.add(&ln_d).neg(),
            EForm::Unit => ln_r2.sub(&ln_d),
        };
        if ln_e.is_positive() {
            let mu = Interval::one(wp).add(&ln_q.div(&ln_e)?);
            rep.q = Some(ln_q.exp().with_prec(prec));
            rep.e = Some(ln_e.exp().with_prec(prec));
            rep.mu = Some(mu.with_prec(prec));
            break;
        }
        if wp >= MAX_PREC {
            return Err(Error::Indeterminate { what: "log E > 0".to_string(), prec: wp });
        }
        wp = (2 * wp).min(MAX_PREC);
    }
    rep.conclusion = Conclusion::Bound;
    rep.certified = d.certified;
    Ok(rep)
}

/// The general bound for `alpha != 0`; `alpha = 0` goes to the exact-2 route.
pub fn mu_main(params: &HypergeomParams, beta: &Rational, prec: u32) -> Result<MeasureReport> {
    let (alpha, gamma, delta) = (&params.alpha, &params.gamma, &params.delta);
    if alpha.is_zero() {
        return mu_alpha_zero(gamma, delta, beta, prec);
    }
    let hyps = vec![
        HypothesisCheck::new("|beta| > |alpha|", abs_gt(beta, alpha), format!("beta = {beta}, alpha = {alpha}")),
        HypothesisCheck::new("gamma >= -1", gamma >= &int(-1), format!("gamma = {gamma}")),
        HypothesisCheck::new("delta not in alpha*N", !params.delta_in_alpha_n(), format!("delta = {delta}")),
        HypothesisCheck::new(
            "-(alpha*gamma + delta) not in alpha*N",
            !params.neg_alpha_gamma_delta_in_alpha_n(),
            format!("-(alpha*gamma + delta) = {}", -(alpha * gamma + delta)),
        ),
    ];
    let roots = if abs_gt(beta, alpha) { Some(char_roots(alpha, beta)?) } else { None };
    let radical = nu(gamma).mul(&nu(&(delta / alpha)));
    let parts = DeltaParts {
        rational: Rational::from_integer(den(alpha) * den(beta)),
        radical,
        exp_arg: totient_exp_arg(gamma)?,
    };
    let mut warnings = Vec::new();
    if is_integer(gamma) {
        warnings.push("Delta keeps the factor exp(1) for integral gamma".to_string());
    }
    finish(
        Draft {
            route: Route::Main,
            regime: Regime::General,
            delta_mode: None,
            hypotheses: hyps,
            roots,
            delta: Some(parts),
            form: EForm::General,
            certified: true,
            warnings,
        },
        prec,
    )
}

/// Shifted logarithm `Phi_1(x, 1/beta)`.
pub fn mu_log(x: &Rational, beta: &Rational, prec: u32) -> Result<MeasureReport> {
    let one = Rational::one();
    let x_ok = !x.is_negative() && x < &one;
    let b_ok = abs_gt(beta, &one);
    let hyps = vec![
        HypothesisCheck::new("0 <= x < 1", x_ok, format!("x = {x}")),
        HypothesisCheck::new("|beta| > 1", b_ok, format!("beta = {beta}")),
    ];
    let roots = if b_ok { Some(char_roots(&one, beta)?) } else { None };
    let mut warnings = Vec::new();
    let delta = if x_ok {
        let parts = DeltaParts {
            rational: Rational::from_integer(den(beta)),
            radical: nu(x),
            exp_arg: totient_exp_arg(x)?,
        };
        // The finite-n denominator next to its asymptotic replacement.
        if let Ok(params) = HypergeomParams::shifted_log(x.clone()) {
            let n = 20;
            if let Ok(prof) = kappa_n(&params, beta, n, Regime::ShiftedLog) {
                let k = Interval::point(&prof.kappa, 64).ln()?.scale(&rat(1, n as i64)).exp();
                warnings.push(format!(
                    "Delta uses the limsup of kappa_n^(1/n); at n = {n}, kappa_n^(1/n) lies in [{}, {}]",
                    k.lo_decimal(6),
                    k.hi_decimal(6)
                ));
            }
        }
        Some(parts)
    } else {
        None
    };
    finish(
        Draft {
            route: Route::Log,
            regime: Regime::ShiftedLog,
            delta_mode: None,
            hypotheses: hyps,
            roots,
            delta,
            form: EForm::Unit,
            certified: true,
            warnings,
        },
        prec,
    )
}

/// Radical `G^(-1/n)`, exactly.
fn inverse_root(g: &BigInt, n: u64) -> FactoredRadical {
    let mut f = BTreeMap::new();
    for (p, e) in factorize(g.magnitude()) {
        f.insert(p, Rational::new(BigInt::from(-(e as i64)), BigInt::from(n)));
    }
    FactoredRadical::from_factors(f)
}

/// `(1 - 1/beta)^omega`.
pub fn mu_binomial(omega: &Rational, beta: &Rational, mode: DeltaMode, prec: u32) -> Result<MeasureReport> {
    let one = Rational::one();
    if mode == DeltaMode::Bennett && omega.abs() != rat(1, 3) {
        return invalid(format!("bennett mode needs |omega| = 1/3, got omega = {omega}"));
    }
    let w_ok = !is_integer(omega);
    let b_ok = abs_gt(beta, &one);
    let hyps = vec![
        HypothesisCheck::new("omega not an integer", w_ok, format!("omega = {omega}")),
        HypothesisCheck::new("|beta| > 1", b_ok, format!("beta = {beta}")),
    ];
    let roots = if b_ok { Some(char_roots(&one, beta)?) } else { None };
    let dbeta = Rational::from_integer(den(beta));
    let mut warnings = Vec::new();
    let mut certified = true;
    let parts = match mode {
        DeltaMode::Simple => DeltaParts { rational: dbeta, radical: nu(omega), exp_arg: Rational::zero() },
        DeltaMode::Bennett => {
            let mut f = BTreeMap::new();
            f.insert(BigUint::from(3u32), rat(1, 2));
            DeltaParts {
                rational: rat(3, 2) * dbeta,
                radical: FactoredRadical::from_factors(f),
                exp_arg: Rational::zero(),
            }
        }
        DeltaMode::Window { n0, n1 } => {
            if !w_ok {
                return invalid(format!("window mode needs a non-integral omega, got {omega}"));
            }
            // max G_n^(-1/n) is min G_n^(1/n); compare G_a^b with G_b^a exactly.
            let mut best: Option<(u64, BigInt)> = None;
            for n in n0..=n1 {
                let g = Gn(omega, n)?;
                best = match best {
                    None => Some((n, g)),
                    Some((m, h)) => {
                        let lhs = num_traits::pow(g.clone(), m as usize);
                        let rhs = num_traits::pow(h.clone(), n as usize);
                        if lhs < rhs {
                            Some((n, g))
                        } else {
                            Some((m, h))
                        }
                    }
                };
            }
            let (n, g) = best.expect("window is nonempty");
            certified = false;
            warnings.push(format!(
                "window mode: Delta uses max of G_n^(-1/n) over n in [{n0}, {n1}] (attained at n = {n}, G_n = {g}) as a proxy for the limsup; not certified"
            ));
            DeltaParts { rational: dbeta, radical: nu(omega).mul(&inverse_root(&g, n)), exp_arg: Rational::zero() }
        }
    };
    finish(
        Draft {
            route: Route::Binomial,
            regime: Regime::Binomial,
            delta_mode: Some(mode.name()),
            hypotheses: hyps,
            roots,
            delta: Some(parts),
            form: EForm::Unit,
            certified,
            warnings,
        },
        prec,
    )
}

/// Shifted exponential `exp_gamma(1/beta)`, `(alpha, delta) = (0, -1)`.
pub fn mu_exp(gamma: &Rational, beta: &Rational) -> Result<MeasureReport> {
    mu_alpha_zero(gamma, &int(-1), beta, crate::interval::DEFAULT_PREC)
}

fn mu_alpha_zero(gamma: &Rational, delta: &Rational, beta: &Rational, prec: u32) -> Result<MeasureReport> {
    if beta.is_zero() {
        return invalid("beta must be nonzero");
    }
    let hyps = vec![
        HypothesisCheck::new("beta != 0", true, format!("beta = {beta}")),
        HypothesisCheck::new("gamma >= -1", gamma >= &int(-1), format!("gamma = {gamma}")),
        HypothesisCheck::new("delta != 0", !delta.is_zero(), format!("delta = {delta}")),
    ];
    let ok = hyps.iter().all(|h| h.verdict == Verdict::Pass);
    Ok(MeasureReport {
        route: Route::Exp,
        regime: Regime::AlphaZero,
        delta_mode: None,
        prec,
        delta_parts: None,
        delta: None,
        rho1: None,
        rho2: None,
        q: None,
        e: None,
        mu: if ok { Some(Interval::from_int(2, prec)) } else { None },
        hypotheses: hyps,
        conclusion: if ok { Conclusion::ExactTwo } else { Conclusion::NoConclusion },
        certified: ok,
        warnings: vec![
            "alpha = 0: kappa_n contains den(delta)^n den(beta)^n n! while R_n(beta) decays like delta^(2n)/(2n)!, so mu = 2"
                .to_string(),
        ],
    })
}

/// Sums `t_0 + t_1 + ...` given `t_{k+1} = t_k * ratio(k)` and a bound
/// `sup(K) >= |ratio(k)|` for all `k >= K`, once such a bound exists.
fn sum_certified(
    first: &Rational,
    start: u64,
    ratio: impl Fn(u64) -> Rational,
    sup: impl Fn(u64) -> Option<Rational>,
    prec: u32,
    what: &str,
) -> Result<Interval> {
    let wp = prec + 48;
    let one = Rational::one();
    let mut s = Interval::zero(wp);
    let mut t = Interval::point(first, wp);
    let mut k = start;
    let limit = start + TERM_CAP;
    loop {
        if t.lo.is_zero() && t.hi.is_zero() {
            return Ok(s.with_prec(prec));
        }
        if let Some(r) = sup(k).filter(|r| r < &one) {
            let tmax = t.abs().hi;
            let bound = tmax / (&one - r);
            let mag = s.abs().lo;
            let tol = Interval::one(prec).scale(&if mag.is_zero() { one.clone() } else { mag }).hi
                / Rational::from_integer(BigInt::one() << (prec as usize + 4));
            if bound <= tol {
                return Ok(s.add(&Interval::ball(&bound, wp)).with_prec(prec));
            }
        }
        if k >= limit {
            return Err(Error::ScanCap { what: what.to_string(), cap: TERM_CAP });
        }
        s = s.add(&t);
        t = t.scale(&ratio(k));
        k += 1;
    }
}

/// `f(beta)` from the defining series with a certified geometric tail.
/// Binomial, `x = 0` logarithm and `gamma = -1` exponential parameters are
/// cross-checked against their closed forms.
pub fn evaluate_f(params: &HypergeomParams, beta: &Rational, prec: u32) -> Result<Interval> {
    let (alpha, gamma, delta) = (params.alpha.clone(), params.gamma.clone(), params.delta.clone());
    if !abs_gt(beta, &alpha) {
        return Err(Error::Hypothesis(format!("|beta| > |alpha| fails for alpha = {alpha}, beta = {beta}")));
    }
    let g2 = &gamma + int(2);
    let ab = beta.abs();
    let ratio = |k: u64| {
        let k1 = int(k as i64 + 1);
        (&alpha * &k1 - &delta) / ((&g2 + int(k as i64)) * beta)
    };
    // m(k) = (alpha(k+1) - delta)/(k + gamma + 2) is monotone for k + gamma + 2 > 0
    let sup = |k: u64| {
        let d = &g2 + int(k as i64);
        if !d.is_positive() {
            return None;
        }
        let m = ((&alpha * int(k as i64 + 1) - &delta) / d).abs();
        Some(m.max(alpha.abs()) / &ab)
    };
    let v = sum_certified(&beta.recip(), 0, ratio, sup, prec, "summing f(beta)")?;
    if let Some(c) = closed_form_f(params, beta, prec) {
        if !v.overlaps(&c) {
            return Err(Error::Invariant(format!("series and closed form of f({beta}) disagree")));
        }
    }
    Ok(v)
}

/// Closed form of `f(beta)` where one is known.
pub fn closed_form_f(params: &HypergeomParams, beta: &Rational, prec: u32) -> Option<Interval> {
    let one = Rational::one();
    if beta.abs() <= one {
        return None;
    }
    let wp = prec + 16;
    let binv = beta.recip();
    let u = &one - &binv;
    if let Some(omega) = params.omega() {
        return Some(Interval::rational_power(&u, &omega, wp).scale(&binv).with_prec(prec));
    }
    let (a, g, d) = (&params.alpha, &params.gamma, &params.delta);
    if a.is_one() && g.is_zero() && d.is_zero() {
        return Some(Interval::ln_rational(&u, wp).neg().with_prec(prec));
    }
    if a.is_zero() && g == &int(-1) && d == &int(-1) {
        return Some(Interval::exp_rational(&binv, wp).scale(&binv).with_prec(prec));
    }
    None
}

/// `R_n(beta) = sum_{k>=n} lambda_{n,k} beta^-(k+1)` with a certified tail.
pub fn remainder_at(n: u64, params: &HypergeomParams, beta: &Rational, prec: u32) -> Result<Interval> {
    let (alpha, gamma, delta) = (params.alpha.clone(), params.gamma.clone(), params.delta.clone());
    if !abs_gt(beta, &alpha) {
        return Err(Error::Hypothesis(format!("|beta| > |alpha| fails for alpha = {alpha}, beta = {beta}")));
    }
    let first = lambda_nn(n, params) / num_traits::pow(beta.clone(), n as usize + 1);
    let ab = beta.abs();
    let ratio = |k: u64| {
        let k1 = int(k as i64 + 1);
        &k1 * (&alpha * &k1 - &delta) / (int((k + 1 - n) as i64) * (&gamma + int((n + k + 2) as i64)) * beta)
    };
    let sup = |k: u64| {
        let d = &gamma + int((n + k + 2) as i64);
        if !d.is_positive() {
            return None;
        }
        let m = ((&alpha * int(k as i64 + 1) - &delta) / d).abs();
        let lead = Rational::new(BigInt::from(k + 1), BigInt::from(k + 1 - n));
        Some(lead * m.max(alpha.abs()) / &ab)
    };
    sum_certified(&first, n, ratio, sup, prec, "summing R_n(beta)")
}

/// Constants of the geometric criterion with `Q_n = a alpha^n`,
/// `E_n = b^-1 beta^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveConstants {
    pub a: Rational,
    pub b: Rational,
    pub alpha_growth: Rational,
    pub beta_growth: Rational,
    /// `log alpha / log beta`.
    pub lambda_exp: Interval,
    /// `2 a alpha (2b)^lambda`.
    pub c: Interval,
    /// The bound is valid for `y0 >= 1/(2b)`.
    pub y0_floor: Rational,
}

pub fn effective_constants(
    a: &Rational,
    b: &Rational,
    alpha_growth: &Rational,
    beta_growth: &Rational,
    prec: u32,
) -> Result<EffectiveConstants> {
    let one = Rational::one();
    if alpha_growth <= &one || beta_growth <= &one {
        return invalid(format!("growth bases must exceed 1, got alpha = {alpha_growth}, beta = {beta_growth}"));
    }
    if !a.is_positive() || !b.is_positive() {
        return invalid(format!("a and b must be positive, got a = {a}, b = {b}"));
    }
    let wp = prec + 32;
    let lambda = Interval::ln_rational(alpha_growth, wp).div(&Interval::ln_rational(beta_growth, wp))?;
    let two_b = int(2) * b;
    let c = Interval::ln_rational(&two_b, wp).mul(&lambda).exp().scale(&(int(2) * a * alpha_growth));
    Ok(EffectiveConstants {
        a: a.clone(),
        b: b.clone(),
        alpha_growth: alpha_growth.clone(),
        beta_growth: beta_growth.clone(),
        lambda_exp: lambda.with_prec(prec),
        c: c.with_prec(prec),
        y0_floor: two_b.recip(),
    })
}

/// `|x|_p <= p^exponent` for `x = kappa_n R_n(beta)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicBound {
    pub p: BigInt,
    pub n: u64,
    pub exponent: Rational,
}

impl PadicBound {
    /// The bound as an exact rational when the exponent is integral.
    pub fn value(&self) -> Option<Rational> {
        if !is_integer(&self.exponent) {
            return None;
        }
        let e = self.exponent.to_integer().to_i64()?;
        let pe = Rational::from_integer(num_traits::pow(self.p.clone(), e.unsigned_abs() as usize));
        Some(if e < 0 { pe.recip() } else { pe })
    }
}

fn require_prime(p: &BigInt) -> Result<()> {
    let f = p.to_biguint().map(|u| factorize(&u));
    match f.as_deref() {
        Some([(_, 1)]) => Ok(()),
        _ => invalid(format!("{p} is not a prime")),
    }
}

fn delta_p(omega: &Rational, p: &BigInt) -> bool {
    (den(omega) % p).is_zero()
}

/// Bound on `|nu_n(omega) den(beta)^n G_n(omega)^-1 R_n(beta)|_p` for the
/// binomial series, or a rejection when `|beta|_p` is too small.
pub fn padic_remainder_bound(omega: &Rational, beta: &Rational, p: &BigInt, n: u64) -> Result<PadicBound> {
    require_prime(p)?;
    if is_integer(omega) {
        return invalid(format!("omega must not be an integer, got {omega}"));
    }
    let vb = padic_valuation(beta, p).ok_or_else(|| Error::InvalidArgument("beta must be nonzero".into()))?;
    let dp = delta_p(omega, p);
    if dp && padic_valuation(&Rational::from_integer(den(omega)), p).unwrap_or(0) > 1 {
        return invalid(format!("{p}^2 divides den(omega) = {}; the bound assumes p || den(omega)", den(omega)));
    }
    let pm1 = p - BigInt::one();
    // |beta|_p = p^-vb must exceed p^threshold
    let threshold = if dp { Rational::new(p.clone(), pm1.clone()) } else { Rational::zero() };
    if Rational::from_integer(BigInt::from(-vb)) <= threshold {
        return Err(Error::Hypothesis(format!(
            "|beta|_{p} = {p}^{} must exceed {p}^({threshold})",
            -vb
        )));
    }
    let vden = padic_valuation(&Rational::from_integer(den(beta)), p).unwrap_or(0);
    let shift = if dp { Rational::new(BigInt::from(2) * p, pm1) } else { Rational::zero() };
    let per_n = shift + Rational::from_integer(BigInt::from(vb - vden));
    Ok(PadicBound { p: p.clone(), n, exponent: per_n * Rational::from_integer(BigInt::from(n)) })
}

/// Outcome of the truncated `p`-adic summation of `kappa_n R_n(beta)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicCheck {
    pub bound: PadicBound,
    /// Terms `k = n .. n + terms - 1` were summed exactly.
    pub terms: u64,
    /// `v_p(kappa_n R_n(beta))` when the tail is provably smaller.
    pub valuation: Option<i64>,
    /// Proven lower bound on the valuation.
    pub lower: Rational,
    pub ok: bool,
}

/// Verifies [`padic_remainder_bound`] by summing `kappa_n lambda_{n,k}
/// beta^-(k+1)` exactly and bounding the tail valuation from below through
/// `lambda_{n,k} = sum_j p_j c_{k+j}` with `v_p(c_m) >= -a m - v_p(m!)`,
/// `a = v_p(den omega)`.
pub fn verify_padic_remainder(omega: &Rational, beta: &Rational, p: &BigInt, n: u64) -> Result<PadicCheck> {
    let bound = padic_remainder_bound(omega, beta, p, n)?;
    let need = -&bound.exponent;
    let params = HypergeomParams::binomial(omega.clone())?;
    let kappa = kappa_n(&params, beta, n, Regime::Binomial)?.kappa;
    let vk = padic_valuation(&kappa, p).ok_or_else(|| Error::Invariant("kappa_n vanished".into()))?;
    let pair = pade_general(n, &params);
    let m0 = pair
        .p0
        .coeffs()
        .iter()
        .filter_map(|c| padic_valuation(c, p))
        .min()
        .ok_or_else(|| Error::Invariant("P_{n,0} vanished".into()))?;
    let a = padic_valuation(&Rational::from_integer(den(omega)), p).unwrap_or(0);
    let vb = padic_valuation(beta, p).expect("beta nonzero");
    let inv_pm1 = Rational::new(BigInt::one(), p - BigInt::one());
    let fact_slope = if a > 0 { inv_pm1 } else { Rational::zero() };
    let nn = n as i64;
    // L(k) = v(kappa) + m0 - a(k+n) - [a>0](k+n-1)/(p-1) - (k+1) v(beta)
    let lower_at = |k: u64| {
        let k = k as i64;
        Rational::from_integer(BigInt::from(vk + m0 - a * (k + nn) - (k + 1) * vb))
            - &fact_slope * Rational::from_integer(BigInt::from(k + nn - 1))
    };
    let slope = Rational::from_integer(BigInt::from(-a - vb)) - &fact_slope;
    if !slope.is_positive() {
        return Err(Error::Hypothesis(format!(
            "tail valuations of R_{n}({beta}) are not increasing for p = {p}; |beta|_p is too small"
        )));
    }
    let (alpha, gamma, delta) = (&params.alpha, &params.gamma, &params.delta);
    let mut lam = lambda_nn(n, &params);
    let binv = beta.recip();
    let mut bpow = num_traits::pow(binv.clone(), n as usize + 1);
    let mut s = Rational::zero();
    let cap = n + 10_000;
    let mut k = n;
    loop {
        let tail = lower_at(k);
        let vs = padic_valuation(&s, p);
        if let Some(v) = vs {
            if tail > Rational::from_integer(BigInt::from(v)) {
                let vr = Rational::from_integer(BigInt::from(v));
                return Ok(PadicCheck { ok: vr >= need, bound, terms: k - n, valuation: Some(v), lower: vr });
            }
        }
        if k >= cap {
            let lower = match vs {
                Some(v) => tail.min(Rational::from_integer(BigInt::from(v))),
                None => tail,
            };
            return Ok(PadicCheck { ok: lower >= need, bound, terms: k - n, valuation: None, lower });
        }
        s += &kappa * &lam * &bpow;
        let k1 = int(k as i64 + 1);
        lam = lam * &k1 * (alpha * &k1 - delta) / (int((k + 1 - n) as i64) * (gamma + int((n + k + 2) as i64)));
        bpow *= &binv;
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mu_of(r: &MeasureReport) -> Interval {
        r.mu.clone().expect("mu present")
    }

    #[test]
    fn bennett_cubic_root_of_three() {
        let r = mu_binomial(&rat(1, 3), &int(9), DeltaMode::Bennett, 128).unwrap();
        assert_eq!(r.conclusion, Conclusion::Bound);
        assert!(r.certified);
        let mu = mu_of(&r);
        let t = crate::interval::parse_decimal("2.7428036524").unwrap();
        assert!((mu.mid() - t).abs() <= rat(1, 1_000_000_000));
        assert!(mu.width() < rat(1, 1_000_000_000_000));
    }

    #[test]
    fn simple_mode_is_weaker() {
        let s = mu_of(&mu_binomial(&rat(1, 3), &int(9), DeltaMode::Simple, 128).unwrap());
        let b = mu_of(&mu_binomial(&rat(1, 3), &int(9), DeltaMode::Bennett, 128).unwrap());
        assert!(s.definitely_gt(&b));
        assert_eq!(s.lo_decimal(6), "3.755368");
    }

    #[test]
    fn log_routes() {
        let r = mu_log(&int(0), &int(9), 128).unwrap();
        assert_eq!(mu_of(&r).lo_decimal(10), "2.7919241638");
        let g = mu_main(&HypergeomParams::general(int(1), int(0), int(0)).unwrap(), &int(9), 128).unwrap();
        assert!(mu_of(&g).overlaps(&mu_of(&r)));
        let r = mu_log(&rat(1, 2), &int(9), 128).unwrap();
        assert_eq!(mu_of(&r).lo_decimal(4), "50.6536");
        let r = mu_log(&rat(1, 2), &int(2), 128).unwrap();
        assert_eq!(r.conclusion, Conclusion::NoConclusion);
        assert!(r.mu.is_none());
        assert_eq!(r.hypotheses.last().unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn main_no_conclusion_binomial_half() {
        let p = HypergeomParams::binomial(rat(1, 2)).unwrap();
        let r = mu_main(&p, &int(2), 128).unwrap();
        assert_eq!(r.conclusion, Conclusion::NoConclusion);
    }

    #[test]
    fn exp_route() {
        let r = mu_exp(&int(-1), &int(2)).unwrap();
        assert_eq!(r.conclusion, Conclusion::ExactTwo);
        assert_eq!(mu_of(&r), Interval::from_int(2, 128));
        assert!(mu_exp(&int(0), &int(0)).is_err());
    }

    #[test]
    fn f_values() {
        let v = evaluate_f(&HypergeomParams::binomial(rat(1, 3)).unwrap(), &int(9), 96).unwrap();
        assert_eq!(v.lo_decimal(8), "0.10683330");
        let v = evaluate_f(&HypergeomParams::shifted_exp(int(-1)).unwrap(), &int(1), 96).unwrap();
        assert_eq!(v.lo_decimal(7), "2.7182818");
        let v = evaluate_f(&HypergeomParams::shifted_log(int(0)).unwrap(), &int(2), 96).unwrap();
        assert_eq!(v.lo_decimal(7), "0.6931471");
    }

    #[test]
    fn constants() {
        let c = effective_constants(&int(1), &int(1), &int(4), &int(2), 64).unwrap();
        assert!(c.lambda_exp.contains(&int(2)) && c.c.contains(&int(32)));
        let c = effective_constants(&int(1), &rat(1, 2), &int(3), &int(3), 64).unwrap();
        assert!(c.lambda_exp.contains(&int(1)) && c.c.contains(&int(6)));
        assert_eq!(c.y0_floor, int(1));
        assert!(effective_constants(&int(1), &int(1), &int(1), &int(2), 64).is_err());
    }

    #[test]
    fn padic_fixtures() {
        for (w, b, p, per) in [(rat(1, 3), rat(1, 5), 5, 25), (rat(1, 2), rat(1, 8), 2, 4), (rat(1, 3), rat(1, 27), 3, 27)] {
            for n in 1..=6 {
                let bd = padic_remainder_bound(&w, &b, &BigInt::from(p), n).unwrap();
                assert_eq!(bd.value().unwrap(), Rational::new(BigInt::one(), num_traits::pow(BigInt::from(per), n as usize)));
                let chk = verify_padic_remainder(&w, &b, &BigInt::from(p), n).unwrap();
                assert!(chk.ok, "{w} {b} {p} {n}: {chk:?}");
            }
        }
        assert!(padic_remainder_bound(&rat(1, 2), &rat(1, 2), &BigInt::from(2), 3).is_err());
    }
}
