//! Effective Poincaré–Perron analysis of linear recurrences
//!
//! ```text
//! X_{n+1} + c_{k-1}(n) X_n + ... + c_0(n) X_{n-k+1} = 0,   c_i(n) -> a_i,
//! ```
//!
//! with exact arithmetic in `Q(sqrt d)` for order two and certified root
//! enclosures for higher orders.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Error, Result};
use crate::exactmath::{int, Rational};
use crate::interval::Interval;
use crate::series::{HypergeomParams, Poly};

/// `a + b sqrt(d)` with `d` a nonnegative integer free of small square
/// factors. When `d` is a perfect square the value is folded into `a`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticNumber {
    pub a: Rational,
    pub b: Rational,
    pub d: BigInt,
}

impl QuadraticNumber {
    pub fn new(a: Rational, b: Rational, d: Rational) -> Result<QuadraticNumber> {
        if d.is_negative() {
            return invalid(format!("sqrt of negative {d}"));
        }
        // sqrt(p/q) = sqrt(p q)/q
        let q = d.denom().clone();
        let mut di = d.numer() * &q;
        let mut b = b / Rational::from_integer(q);
        if b.is_zero() || di.is_zero() {
            return Ok(QuadraticNumber::rational(a));
        }
        let mut p = BigInt::from(2);
        let limit = BigInt::from(20_000);
        while &p * &p <= di && p < limit {
            let p2 = &p * &p;
            while (&di % &p2).is_zero() {
                di /= &p2;
                b *= Rational::from_integer(p.clone());
            }
            p += 1;
        }
        let r = di.sqrt();
        if &r * &r == di {
            return Ok(QuadraticNumber::rational(a + b * Rational::from_integer(r)));
        }
        Ok(QuadraticNumber { a, b, d: di })
    }

    pub fn rational(a: Rational) -> QuadraticNumber {
        QuadraticNumber { a, b: Rational::zero(), d: BigInt::zero() }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        if self.is_rational() {
            Some(&self.a)
        } else {
            None
        }
    }

    fn field(&self, o: &QuadraticNumber) -> BigInt {
        match (self.is_rational(), o.is_rational()) {
            (true, _) => o.d.clone(),
            (_, true) => self.d.clone(),
            _ => {
                assert_eq!(self.d, o.d, "quadratic numbers from different fields");
                self.d.clone()
            }
        }
    }

    fn make(a: Rational, b: Rational, d: BigInt) -> QuadraticNumber {
        if b.is_zero() {
            QuadraticNumber::rational(a)
        } else {
            QuadraticNumber { a, b, d }
        }
    }

    pub fn add(&self, o: &QuadraticNumber) -> QuadraticNumber {
        let d = self.field(o);
        Self::make(&self.a + &o.a, &self.b + &o.b, d)
    }

    pub fn sub(&self, o: &QuadraticNumber) -> QuadraticNumber {
        let d = self.field(o);
        Self::make(&self.a - &o.a, &self.b - &o.b, d)
    }

    pub fn neg(&self) -> QuadraticNumber {
        Self::make(-&self.a, -&self.b, self.d.clone())
    }

    pub fn mul(&self, o: &QuadraticNumber) -> QuadraticNumber {
        let d = self.field(o);
        let dr = Rational::from_integer(d.clone());
        let a = &self.a * &o.a + &self.b * &o.b * dr;
        let b = &self.a * &o.b + &self.b * &o.a;
        Self::make(a, b, d)
    }

    pub fn scale(&self, q: &Rational) -> QuadraticNumber {
        Self::make(&self.a * q, &self.b * q, self.d.clone())
    }

    pub fn add_rational(&self, q: &Rational) -> QuadraticNumber {
        Self::make(&self.a + q, self.b.clone(), self.d.clone())
    }

    pub fn conj(&self) -> QuadraticNumber {
        Self::make(self.a.clone(), -&self.b, self.d.clone())
    }

    /// `a^2 - b^2 d`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * Rational::from_integer(self.d.clone())
    }

    pub fn recip(&self) -> Result<QuadraticNumber> {
        let n = self.norm();
        if n.is_zero() {
            return invalid("reciprocal of zero in a quadratic field");
        }
        Ok(self.conj().scale(&n.recip()))
    }

    pub fn div(&self, o: &QuadraticNumber) -> Result<QuadraticNumber> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn pow(&self, mut k: u64) -> QuadraticNumber {
        let mut base = self.clone();
        let mut acc = QuadraticNumber::rational(Rational::one());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Exact sign of `a + b sqrt(d)`.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&Rational::zero());
        let sb = self.b.cmp(&Rational::zero());
        if sb == Ordering::Equal || sa == sb {
            return if sa == Ordering::Equal { sb } else { sa };
        }
        if sa == Ordering::Equal {
            return sb;
        }
        // opposite signs: compare a^2 with b^2 d
        match self.norm().cmp(&Rational::zero()) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.signum() == Ordering::Equal
    }

    pub fn abs(&self) -> QuadraticNumber {
        if self.signum() == Ordering::Less {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn cmp_exact(&self, o: &QuadraticNumber) -> Ordering {
        self.sub(o).signum()
    }

    pub fn to_interval(&self, prec: u32) -> Interval {
        let wp = prec + 16;
        let a = Interval::point(&self.a, wp);
        if self.is_rational() {
            return a.with_prec(prec);
        }
        let s = Interval::point(&Rational::from_integer(self.d.clone()), wp).sqrt().expect("d >= 0");
        a.add(&s.scale(&self.b)).with_prec(prec)
    }

    pub fn to_f64(&self) -> f64 {
        self.to_interval(64).to_f64()
    }
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.a)
        } else if self.b.is_negative() {
            write!(f, "{} - {}*sqrt({})", self.a, -&self.b, self.d)
        } else {
            write!(f, "{} + {}*sqrt({})", self.a, self.b, self.d)
        }
    }
}

/// Roots of a real quadratic with distinct moduli, `rho1 < rho2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharRoots {
    pub lambda1: QuadraticNumber,
    pub lambda2: QuadraticNumber,
    pub rho1: QuadraticNumber,
    pub rho2: QuadraticNumber,
}

impl CharRoots {
    pub fn lambda(&self, i: u8) -> &QuadraticNumber {
        if i == 1 {
            &self.lambda1
        } else {
            &self.lambda2
        }
    }

    pub fn rho(&self, i: u8) -> &QuadraticNumber {
        if i == 1 {
            &self.rho1
        } else {
            &self.rho2
        }
    }
}

/// Roots of `X^2 + a1 X + a0`, ordered by modulus.
pub fn order2_roots(a1: &Rational, a0: &Rational) -> Result<CharRoots> {
    let disc = a1 * a1 - int(4) * a0;
    if !disc.is_positive() {
        return invalid(format!("X^2 + ({a1})X + ({a0}) has no pair of distinct real roots"));
    }
    if a1.is_zero() {
        return invalid("characteristic roots have equal moduli");
    }
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let c = -a1 * &half;
    let plus = QuadraticNumber::new(c.clone(), half.clone(), disc.clone())?;
    let minus = QuadraticNumber::new(c, -half, disc)?;
    let (l1, l2) = if plus.abs().cmp_exact(&minus.abs()) == Ordering::Less { (plus, minus) } else { (minus, plus) };
    Ok(CharRoots { rho1: l1.abs(), rho2: l2.abs(), lambda1: l1, lambda2: l2 })
}

/// Roots `(2 beta - alpha) +- 2 sqrt(beta^2 - alpha beta)` of
/// `X^2 - 2(2 beta - alpha) X + alpha^2`.
pub fn char_roots(alpha: &Rational, beta: &Rational) -> Result<CharRoots> {
    if beta.abs() <= alpha.abs() {
        return Err(Error::Hypothesis(format!("|beta| > |alpha| fails for alpha = {alpha}, beta = {beta}")));
    }
    let a1 = int(-2) * (int(2) * beta - alpha);
    let a0 = alpha * alpha;
    order2_roots(&a1, &a0)
}

/// Quotient of polynomials in `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<RatFunc> {
        if den.is_zero() {
            return invalid("rational function with zero denominator");
        }
        Ok(RatFunc { num, den })
    }

    pub fn constant(c: Rational) -> RatFunc {
        RatFunc { num: Poly::constant(c), den: Poly::one() }
    }

    pub fn eval(&self, n: &Rational) -> Result<Rational> {
        let d = self.den.eval(n);
        if d.is_zero() {
            return Err(Error::Hypothesis(format!("coefficient denominator vanishes at n = {n}")));
        }
        Ok(self.num.eval(n) / d)
    }

    /// `c - self`.
    pub fn from_const_minus(&self, c: &Rational) -> RatFunc {
        RatFunc { num: &self.den.scale(c) - &self.num, den: self.den.clone() }
    }

    /// `true` when the function tends to zero as `n -> infinity`.
    pub fn vanishes_at_infinity(&self) -> bool {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => true,
            (Some(a), Some(b)) => a < b,
            _ => false,
        }
    }
}

/// Poincaré-type recurrence `X_{n+1} + sum_i c_i(n) X_{n-k+1+i} = 0` for
/// `n >= start`, with `c_i(n) -> a_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceSpec {
    pub order: usize,
    pub coeffs: Vec<RatFunc>,
    pub char_consts: Vec<Rational>,
    pub start: u64,
}

impl RecurrenceSpec {
    pub fn new(coeffs: Vec<RatFunc>, char_consts: Vec<Rational>, start: u64) -> Result<RecurrenceSpec> {
        let order = coeffs.len();
        if order == 0 || char_consts.len() != order {
            return invalid("recurrence needs matching nonempty coefficient and constant lists");
        }
        if (start as usize) + 1 < order {
            return invalid("recurrence start index too small for its order");
        }
        let spec = RecurrenceSpec { order, coeffs, char_consts, start };
        for i in 0..order {
            if !spec.epsilon(i).vanishes_at_infinity() {
                return invalid(format!("coefficient {i} does not converge to its characteristic constant"));
            }
        }
        Ok(spec)
    }

    /// Constant-coefficient recurrence with characteristic polynomial
    /// `X^k + a_{k-1} X^{k-1} + ... + a_0`.
    pub fn constant(char_consts: Vec<Rational>) -> Result<RecurrenceSpec> {
        let k = char_consts.len() as u64;
        let coeffs = char_consts.iter().cloned().map(RatFunc::constant).collect();
        RecurrenceSpec::new(coeffs, char_consts, k.saturating_sub(1))
    }

    /// `epsilon_i(n) = a_i - c_i(n)`.
    pub fn epsilon(&self, i: usize) -> RatFunc {
        self.coeffs[i].from_const_minus(&self.char_consts[i])
    }

    pub fn coeff_at(&self, i: usize, n: u64) -> Result<Rational> {
        self.coeffs[i].eval(&int(n as i64))
    }

    pub fn char_poly(&self) -> Poly {
        let mut v = self.char_consts.clone();
        v.push(Rational::one());
        Poly::new(v)
    }

    pub fn order2_roots(&self) -> Result<CharRoots> {
        if self.order != 2 {
            return invalid("order-2 roots requested for a recurrence of another order");
        }
        order2_roots(&self.char_consts[1], &self.char_consts[0])
    }

    /// Forward iteration from `X_0..X_{start}`... given as `initial`, which
    /// must contain exactly `start + 1` values.
    pub fn iterate(&self, initial: &[Rational], nmax: u64) -> Result<SolutionTrace> {
        if initial.len() != self.start as usize + 1 {
            return invalid(format!("expected {} initial values, got {}", self.start + 1, initial.len()));
        }
        let mut values = initial.to_vec();
        let k = self.order;
        let mut n = self.start;
        while (values.len() as u64) <= nmax {
            let mut s = Rational::zero();
            for i in 0..k {
                let idx = n as usize + 1 + i - k;
                s += self.coeff_at(i, n)? * &values[idx];
            }
            values.push(-s);
            n += 1;
        }
        values.truncate(nmax as usize + 1);
        Ok(SolutionTrace { values })
    }
}

/// The recurrence `A_n X_{n+1} - (beta - B_n) X_n + C_n X_{n-1} = 0` in
/// monic form `X_{n+1} + a_n X_n + b_n X_{n-1} = 0`, `n >= 1`.
pub fn pade_recurrence(params: &HypergeomParams, beta: &Rational) -> Result<RecurrenceSpec> {
    let (al, g, d) = (&params.alpha, &params.gamma, &params.delta);
    if g < &int(-1) {
        return Err(Error::Hypothesis(format!("gamma >= -1 fails for gamma = {g}")));
    }
    let lin = |c0: Rational, c1: i64| Poly::linear(c0, int(c1));
    let two = int(2);
    let e0 = lin(g.clone(), 2); // 2n + gamma
    let e1 = lin(g + int(1), 2);
    let e2 = lin(g + &two, 2);
    let np = lin(g + int(1), 1); // n + gamma + 1
    let n1 = lin(int(1), 1); // n + 1
    // B_n numerator: 2 alpha n^2 + 2 alpha (1 + gamma) n + gamma (alpha - delta)
    let bnum = Poly::new(vec![g * (al - d), &two * al * (int(1) + g), &two * al]);
    let cnum = &lin(-d, 0).add_linear(al) * &Poly::linear(al * g + d, al.clone());
    // a_n = -(beta (2n+g)(2n+g+2) - Bnum)(2n+g+1) / ((2n+g)(n+g+1)(n+1))
    let quad = (&e0 * &e2).scale(beta);
    let an_num = -&(&(&quad - &bnum) * &e1);
    let den = &(&e0 * &np) * &n1;
    // b_n = Cnum (2n+g+2) / ((2n+g)(n+g+1)(n+1))
    let bn_num = &cnum * &e2;
    let a1 = int(-2) * (&two * beta - al);
    let a0 = al * al;
    RecurrenceSpec::new(vec![RatFunc::new(bn_num, den.clone())?, RatFunc::new(an_num, den)?], vec![a0, a1], 1)
}

trait AddLinear {
    fn add_linear(&self, c1: &Rational) -> Poly;
}

impl AddLinear for Poly {
    /// Adds `c1 * n`.
    fn add_linear(&self, c1: &Rational) -> Poly {
        self + &Poly::monomial(c1.clone(), 1)
    }
}

/// Exact values `X_0..X_nmax`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionTrace {
    pub values: Vec<Rational>,
}

impl SolutionTrace {
    pub fn nmax(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    pub fn initial(&self) -> &[Rational] {
        &self.values[..2.min(self.values.len())]
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// First `n` with `X_n = X_{n+1} = 0`.
    pub fn consecutive_zeros(&self) -> Option<u64> {
        self.values.windows(2).position(|w| w[0].is_zero() && w[1].is_zero()).map(|p| p as u64)
    }

    pub fn to_intervals(&self, prec: u32) -> Vec<Interval> {
        self.values.iter().map(|v| Interval::point(v, prec)).collect()
    }
}

/// Solution of the Padé recurrence at `beta` from `(X_0, X_1)`.
pub fn evaluate_solution(
    params: &HypergeomParams,
    beta: &Rational,
    x0: &Rational,
    x1: &Rational,
    nmax: u64,
) -> Result<SolutionTrace> {
    let spec = pade_recurrence(params, beta)?;
    if nmax == 0 {
        return Ok(SolutionTrace { values: vec![x0.clone()] });
    }
    spec.iterate(&[x0.clone(), x1.clone()], nmax)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdReport {
    /// Smallest `N` with the defining inequality for every `n` in `[N, horizon]`.
    pub n_threshold: u64,
    pub horizon: u64,
    /// `(n, i_n)` for `N <= n < nmax`.
    pub indices: Vec<(u64, u8)>,
    /// Limit index `i`, taken as the last computed `i_n`.
    pub limit_index: u8,
    /// First `n >= N` from which `i_n` is constant on the trace.
    pub n2: u64,
    /// Indices `n` with `i_n < i_{n-1}`; empty when the monotonicity law holds.
    pub violations: Vec<u64>,
}

/// Exact test of `(2/|l2-l1|)(2|b_n - l1 l2| + (r1+r2)|a_n + l1 + l2|) <= r2 - r1`.
pub fn threshold_holds(spec: &RecurrenceSpec, roots: &CharRoots, n: u64) -> Result<bool> {
    let eps0 = spec.epsilon(0).eval(&int(n as i64))?.abs();
    let eps1 = spec.epsilon(1).eval(&int(n as i64))?.abs();
    let gap = roots.lambda2.sub(&roots.lambda1).abs();
    let rsum = roots.rho1.add(&roots.rho2);
    let rdiff = roots.rho2.sub(&roots.rho1);
    let lhs = rsum.scale(&eps1).add_rational(&(int(2) * eps0)).scale(&int(2));
    let rhs = rdiff.mul(&gap);
    Ok(lhs.cmp_exact(&rhs) != Ordering::Greater)
}

/// Scans for the threshold `N`: the smallest `n >= 1` at which the
/// inequality holds and keeps holding up to a horizon of at least `4N` and
/// `min_horizon`.
pub fn find_threshold(spec: &RecurrenceSpec, roots: &CharRoots, min_horizon: u64, cap: u64) -> Result<(u64, u64)> {
    let mut n = spec.start.max(1);
    'outer: loop {
        while !threshold_holds(spec, roots, n)? {
            n += 1;
            if n > cap {
                return Err(Error::ScanCap { what: "searching for the Poincaré–Perron threshold".into(), cap });
            }
        }
        let horizon = min_horizon.max(4 * n).min(cap);
        for m in n + 1..=horizon {
            if !threshold_holds(spec, roots, m)? {
                n = m + 1;
                continue 'outer;
            }
        }
        return Ok((n, horizon));
    }
}

pub const DEFAULT_SCAN_CAP: u64 = 1_000_000;

/// Largest index attaining `min_j |X_{n+1} - lambda_j X_n|`.
pub fn index_at(roots: &CharRoots, x: &Rational, x_next: &Rational) -> u8 {
    let q = |v: &Rational| QuadraticNumber::rational(v.clone());
    let r1 = q(x_next).sub(&roots.lambda1.mul(&q(x))).abs();
    let r2 = q(x_next).sub(&roots.lambda2.mul(&q(x))).abs();
    if r2.cmp_exact(&r1) != Ordering::Greater {
        2
    } else {
        1
    }
}

pub fn poincare_threshold(spec: &RecurrenceSpec, trace: &SolutionTrace) -> Result<ThresholdReport> {
    poincare_threshold_with_cap(spec, trace, DEFAULT_SCAN_CAP)
}

pub fn poincare_threshold_with_cap(spec: &RecurrenceSpec, trace: &SolutionTrace, cap: u64) -> Result<ThresholdReport> {
    let roots = spec.order2_roots()?;
    let nmax = trace.nmax();
    let (n_threshold, horizon) = find_threshold(spec, &roots, nmax.max(64), cap)?;
    let mut indices = Vec::new();
    let mut violations = Vec::new();
    for n in n_threshold..nmax {
        let i = index_at(&roots, &trace.values[n as usize], &trace.values[n as usize + 1]);
        if let Some(&(_, prev)) = indices.last() {
            if i < prev {
                violations.push(n);
            }
        }
        indices.push((n, i));
    }
    let limit_index = indices.last().map(|&(_, i)| i).unwrap_or(2);
    let n2 = indices
        .iter()
        .rev()
        .take_while(|&&(_, i)| i == limit_index)
        .last()
        .map(|&(n, _)| n)
        .unwrap_or(n_threshold);
    Ok(ThresholdReport { n_threshold, horizon, indices, limit_index, n2, violations })
}

/// Index rule on enclosed values; `None` when the comparison is undecided.
pub fn index_at_enclosed(roots: &CharRoots, x: &Interval, x_next: &Interval, prec: u32) -> Option<u8> {
    let l1 = roots.lambda1.to_interval(prec);
    let l2 = roots.lambda2.to_interval(prec);
    let r1 = x_next.sub(&l1.mul(x)).abs();
    let r2 = x_next.sub(&l2.mul(x)).abs();
    if r2.hi <= r1.lo {
        Some(2)
    } else if r1.hi < r2.lo {
        Some(1)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioRow {
    pub n: u64,
    pub residual: Interval,
    pub scaled: Interval,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioReport {
    pub rows: Vec<RatioRow>,
    /// Upper bound for `sup n^2 r_n` over the window.
    pub sup_scaled: Rational,
}

impl RatioReport {
    pub fn sup_over(&self, lo: u64, hi: u64) -> Option<Rational> {
        self.rows.iter().filter(|r| r.n >= lo && r.n <= hi).map(|r| r.scaled.hi.clone()).max()
    }
}

/// `r_n = |X_{n+1}/X_n - lambda (1 - 1/(2n))|` for `n` in `[n0, n1]`.
pub fn ratio_estimate(values: &[Interval], lambda: &QuadraticNumber, window: (u64, u64), prec: u32) -> Result<RatioReport> {
    let (n0, n1) = window;
    if n0 == 0 || n0 > n1 {
        return invalid(format!("bad window [{n0}, {n1}]"));
    }
    if n1 as usize + 1 >= values.len() {
        return invalid(format!("window [{n0}, {n1}] exceeds the trace length {}", values.len()));
    }
    let lam = lambda.to_interval(prec);
    let mut rows = Vec::new();
    let mut sup = Rational::zero();
    for n in n0..=n1 {
        let x = &values[n as usize];
        if x.contains_zero() {
            return invalid(format!("trace value at n = {n} is not bounded away from zero"));
        }
        let ratio = values[n as usize + 1].div(x)?;
        let corr = Rational::one() - Rational::new(BigInt::one(), BigInt::from(2 * n));
        let residual = ratio.sub(&lam.scale(&corr)).abs();
        let scaled = residual.scale(&int((n * n) as i64));
        if scaled.hi > sup {
            sup = scaled.hi.clone();
        }
        rows.push(RatioRow { n, residual, scaled });
    }
    Ok(RatioReport { rows, sup_scaled: sup })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthReport {
    /// Enclosure of `max_{1<=n<=nmax} |X_n| sqrt(n) / rho^n`; `hi` is the
    /// certified constant on the prefix.
    pub c: Interval,
    pub argmax: u64,
    pub nmax: u64,
    /// The bound is only machine-checked on `1..=nmax`.
    pub prefix_only: bool,
}

pub fn growth_bound(values: &[Interval], rho: &QuadraticNumber, prec: u32) -> Result<GrowthReport> {
    if rho.signum() != Ordering::Greater {
        return invalid("growth base must be positive");
    }
    let r = rho.to_interval(prec + 32);
    let mut pw = Interval::one(prec + 32);
    let mut best = Interval::zero(prec);
    let mut argmax = 0;
    for (n, x) in values.iter().enumerate().skip(1) {
        pw = pw.mul(&r);
        let sq = Interval::from_int(n as i64, prec + 32).sqrt()?;
        let v = x.abs().mul(&sq).div(&pw)?.with_prec(prec);
        if v.hi > best.hi {
            argmax = n as u64;
        }
        best = best.max(&v);
    }
    Ok(GrowthReport { c: best, argmax, nmax: values.len() as u64 - 1, prefix_only: true })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UDecomposition {
    Exact(Vec<QuadraticNumber>),
    Enclosed(Vec<Interval>),
}

/// `u_j(n) = Q_j(tau) g(n) / P'(lambda_j)`, where `P(X) = (X - lambda_j) Q_j(X)`.
pub fn u_decompose(spec: &RecurrenceSpec, g: &[Rational], n: usize, prec: u32) -> Result<UDecomposition> {
    let k = spec.order;
    if n + k > g.len() {
        return invalid("not enough solution values for the decomposition");
    }
    if k == 2 {
        let roots = spec.order2_roots()?;
        let q = |v: &Rational| QuadraticNumber::rational(v.clone());
        let (g0, g1) = (q(&g[n]), q(&g[n + 1]));
        let d12 = roots.lambda1.sub(&roots.lambda2);
        let u1 = g1.sub(&roots.lambda2.mul(&g0)).div(&d12)?;
        let u2 = g1.sub(&roots.lambda1.mul(&g0)).div(&d12.neg())?;
        return Ok(UDecomposition::Exact(vec![u1, u2]));
    }
    let p = spec.char_poly();
    let roots = real_roots(&p, prec)?;
    if roots.len() != k {
        return invalid("characteristic polynomial has non-real roots; only real simple roots are supported");
    }
    let mods: Vec<Interval> = roots.iter().map(|r| r.abs()).collect();
    for w in mods.windows(2) {
        if !w[0].definitely_lt(&w[1]) {
            return invalid("characteristic roots do not have separated moduli");
        }
    }
    let dp = p.derivative();
    let mut out = Vec::with_capacity(k);
    for lam in &roots {
        // synthetic division of P by (X - lambda)
        let coeffs = p.coeffs();
        let mut q = vec![Interval::zero(prec); k];
        q[k - 1] = Interval::one(prec);
        for i in (1..k).rev() {
            q[i - 1] = Interval::point(&coeffs[i], prec).add(&lam.mul(&q[i]));
        }
        let mut s = Interval::zero(prec);
        for (l, ql) in q.iter().enumerate() {
            s = s.add(&ql.mul(&Interval::point(&g[n + l], prec)));
        }
        out.push(s.div(&dp.eval_interval(lam))?);
    }
    Ok(UDecomposition::Enclosed(out))
}

/// Maximal residual of `sum_j lambda_j^l u_j(n) - g(n+l)` for `l < k`,
/// together with whether every reconstruction encloses the exact value.
pub fn reconstruction_check(spec: &RecurrenceSpec, g: &[Rational], n: usize, prec: u32) -> Result<bool> {
    match u_decompose(spec, g, n, prec)? {
        UDecomposition::Exact(u) => {
            let roots = spec.order2_roots()?;
            let ls = [&roots.lambda1, &roots.lambda2];
            Ok((0..2).all(|l| {
                let s = ls[0].pow(l).mul(&u[0]).add(&ls[1].pow(l).mul(&u[1]));
                s == QuadraticNumber::rational(g[n + l as usize].clone())
            }))
        }
        UDecomposition::Enclosed(u) => {
            let roots = real_roots(&spec.char_poly(), prec)?;
            Ok((0..spec.order).all(|l| {
                let mut s = Interval::zero(prec);
                for (lam, uj) in roots.iter().zip(&u) {
                    s = s.add(&lam.powi(l as u64).mul(uj));
                }
                s.contains(&g[n + l])
            }))
        }
    }
}

/// Sturm sequence of a squarefree polynomial.
fn sturm_sequence(p: &Poly) -> Vec<Poly> {
    let mut seq = vec![p.clone(), p.derivative()];
    loop {
        let len = seq.len();
        if seq[len - 1].is_zero() {
            seq.pop();
            break;
        }
        let (_, r) = seq[len - 2].div_rem(&seq[len - 1]);
        if r.is_zero() {
            break;
        }
        seq.push(-&r);
    }
    seq
}

fn sign_changes(seq: &[Poly], x: &Rational) -> usize {
    let signs: Vec<Ordering> = seq
        .iter()
        .map(|q| q.eval(x).cmp(&Rational::zero()))
        .filter(|s| *s != Ordering::Equal)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Certified enclosures of the real roots of a squarefree rational
/// polynomial, sorted by modulus, each of width below `2^-prec`.
pub fn real_roots(p: &Poly, prec: u32) -> Result<Vec<Interval>> {
    let deg = p.degree().unwrap_or(0);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let g = gcd_poly(p, &p.derivative());
    if g.degree().unwrap_or(0) > 0 {
        return invalid("characteristic polynomial has a repeated root");
    }
    let seq = sturm_sequence(p);
    let lead = p.leading().expect("nonzero").abs();
    let bound = int(1) + p.coeffs()[..deg].iter().map(|c| c.abs() / &lead).max().unwrap_or_else(Rational::zero);
    let mut stack = vec![(-&bound, bound.clone())];
    let mut isolated = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let count = sign_changes(&seq, &lo) - sign_changes(&seq, &hi);
        match count {
            0 => {}
            1 => isolated.push((lo, hi)),
            _ => {
                let mid = (&lo + &hi) / int(2);
                stack.push((lo, mid.clone()));
                stack.push((mid, hi));
            }
        }
    }
    let eps = Rational::new(BigInt::one(), BigInt::one() << prec.to_usize().unwrap_or(128));
    let mut out = Vec::new();
    for (mut lo, mut hi) in isolated {
        // root lies in (lo, hi]
        if p.eval(&hi).is_zero() {
            out.push(Interval::point(&hi, prec));
            continue;
        }
        while &hi - &lo > eps {
            let mid = (&lo + &hi) / int(2);
            let pm = p.eval(&mid);
            if pm.is_zero() {
                lo = mid.clone();
                hi = mid;
                break;
            }
            if (pm.is_positive()) == (p.eval(&hi).is_positive()) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(Interval::new(&lo, &hi, prec + 8));
    }
    out.sort_by(|a, b| a.abs().mid().cmp(&b.abs().mid()));
    Ok(out)
}

fn gcd_poly(a: &Poly, b: &Poly) -> Poly {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_zero() {
        let (_, r) = x.div_rem(&y);
        x = y;
        y = r;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rat;
    use crate::pade::pade_general;

    #[test]
    fn quadratic_arithmetic() {
        let s2 = QuadraticNumber::new(int(0), int(1), int(2)).unwrap();
        assert_eq!(s2.mul(&s2).as_rational(), Some(&int(2)));
        let x = QuadraticNumber::new(int(3), int(-2), int(2)).unwrap(); // 3 - 2 sqrt 2 > 0
        assert_eq!(x.signum(), Ordering::Greater);
        let y = QuadraticNumber::new(int(1), int(-1), int(2)).unwrap(); // 1 - sqrt 2 < 0
        assert_eq!(y.signum(), Ordering::Less);
        assert_eq!(x.mul(&x.recip().unwrap()).as_rational(), Some(&int(1)));
        // sqrt(8) = 2 sqrt(2), sqrt(9/4) = 3/2
        let z = QuadraticNumber::new(int(0), int(1), int(8)).unwrap();
        assert_eq!((z.b.clone(), z.d.clone()), (int(2), BigInt::from(2)));
        assert_eq!(QuadraticNumber::new(int(1), int(1), rat(9, 4)).unwrap().as_rational(), Some(&rat(5, 2)));
        assert!(QuadraticNumber::new(int(0), int(1), int(-1)).is_err());
    }

    #[test]
    fn char_roots_examples() {
        let r = char_roots(&int(1), &int(9)).unwrap();
        assert_eq!(r.rho2, QuadraticNumber::new(int(17), int(12), int(2)).unwrap());
        assert_eq!(r.lambda1.mul(&r.lambda2).as_rational(), Some(&int(1)));
        let r = char_roots(&int(0), &int(2)).unwrap();
        assert_eq!(r.lambda1.as_rational(), Some(&int(0)));
        assert_eq!(r.lambda2.as_rational(), Some(&int(8)));
        let r = char_roots(&int(1), &int(-9)).unwrap();
        assert_eq!(r.rho2, QuadraticNumber::new(int(19), int(6), int(10)).unwrap());
        assert!(char_roots(&int(2), &int(-2)).is_err());
    }

    #[test]
    fn solution_examples() {
        let b = HypergeomParams::binomial(rat(1, 3)).unwrap();
        let t = evaluate_solution(&b, &int(9), &int(1), &rat(28, 3), 2).unwrap();
        assert_eq!(t.values[2], rat(2078, 9));
        let l = HypergeomParams::shifted_log(int(0)).unwrap();
        let t = evaluate_solution(&l, &int(9), &int(1), &int(17), 1).unwrap();
        assert_eq!(t.values[1], int(17));
        let t = evaluate_solution(&b, &int(9), &int(0), &int(0), 10).unwrap();
        assert!(t.is_zero());
        let t = evaluate_solution(&b, &int(9), &int(1), &rat(28, 3), 20).unwrap();
        for n in 0..=20u64 {
            assert_eq!(t.values[n as usize], pade_general(n, &b).p0.eval(&int(9)));
        }
    }

    #[test]
    fn constant_coefficients_threshold_is_one() {
        // (X - 1)(X - 3) = X^2 - 4X + 3
        let spec = RecurrenceSpec::constant(vec![int(3), int(-4)]).unwrap();
        let trace = spec.iterate(&[int(1), int(3)], 30).unwrap();
        let rep = poincare_threshold(&spec, &trace).unwrap();
        assert_eq!(rep.n_threshold, 1);
        assert_eq!(rep.limit_index, 2);
        assert!(rep.violations.is_empty());
        // X_n = 3^n: r_n = 3/(2n) exactly
        let vals = trace.to_intervals(128);
        let roots = spec.order2_roots().unwrap();
        let r = ratio_estimate(&vals, &roots.lambda2, (1, 20), 128).unwrap();
        for row in &r.rows {
            assert!(row.residual.contains(&rat(3, 2 * row.n as i64)));
        }
        let g = growth_bound(&vals[..=25], &roots.rho2, 128).unwrap();
        assert!(g.c.contains(&int(5)));
        assert_eq!(g.argmax, 25);
        let z = growth_bound(&[Interval::zero(64), Interval::zero(64)], &roots.rho2, 64).unwrap();
        assert!(z.c.hi.is_zero());
    }

    #[test]
    fn order2_decomposition() {
        let spec = RecurrenceSpec::constant(vec![int(3), int(-4)]).unwrap();
        let t = spec.iterate(&[int(2), int(4)], 6).unwrap(); // 1^n + 3^n
        match u_decompose(&spec, &t.values, 3, 64).unwrap() {
            UDecomposition::Exact(u) => {
                assert_eq!(u[0].as_rational(), Some(&int(1)));
                assert_eq!(u[1].as_rational(), Some(&int(27)));
            }
            _ => panic!("order 2 must be exact"),
        }
        assert!(reconstruction_check(&spec, &t.values, 2, 64).unwrap());
        // irrational roots: g = l1^n + l2^n for X^2 - 4X + 1
        let spec = RecurrenceSpec::constant(vec![int(1), int(-4)]).unwrap();
        let t = spec.iterate(&[int(2), int(4)], 8).unwrap();
        let roots = spec.order2_roots().unwrap();
        if let UDecomposition::Exact(u) = u_decompose(&spec, &t.values, 5, 64).unwrap() {
            assert_eq!(u[0], roots.lambda1.pow(5));
            assert_eq!(u[1], roots.lambda2.pow(5));
        } else {
            panic!("order 2 must be exact");
        }
    }

    #[test]
    fn order3_decomposition() {
        // (X-1)(X-2)(X-4) = X^3 - 7X^2 + 14X - 8
        let spec = RecurrenceSpec::constant(vec![int(-8), int(14), int(-7)]).unwrap();
        let g: Vec<Rational> = (0..10).map(|n| int(4i64.pow(n))).collect();
        let tol = Rational::new(BigInt::one(), BigInt::from(10).pow(20));
        match u_decompose(&spec, &g, 4, 160).unwrap() {
            UDecomposition::Enclosed(u) => {
                assert!(u[0].abs().hi < tol);
                assert!(u[1].abs().hi < tol);
                assert!(u[2].contains(&g[4]) || (u[2].mid() - &g[4]).abs() < tol);
            }
            _ => panic!("order 3 is enclosed"),
        }
        assert!(reconstruction_check(&spec, &g, 4, 160).unwrap());
        // complex roots are rejected
        let c = RecurrenceSpec::constant(vec![int(1), int(0), int(0)]).unwrap();
        assert!(u_decompose(&c, &g, 0, 64).is_err());
    }

    #[test]
    fn pade_recurrence_matches_rec_coeffs() {
        let b = HypergeomParams::binomial(rat(1, 3)).unwrap();
        let spec = pade_recurrence(&b, &int(9)).unwrap();
        for n in 1..10u64 {
            let rc = crate::pade::rec_coeffs(n, &b).unwrap();
            assert_eq!(spec.coeff_at(1, n).unwrap(), -(int(9) - &rc.b) / &rc.a);
            assert_eq!(spec.coeff_at(0, n).unwrap(), &rc.c / &rc.a);
        }
        assert!(spec.epsilon(0).vanishes_at_infinity());
    }
}
