//! Explicit weight-`n` Padé pairs `(P_{n,0}, P_{n,1})` for `f`, their
//! remainders `R_n = P_{n,0} f - P_{n,1} = sum_{k>=n} lambda_{n,k} z^-(k+1)`,
//! and exact checks of the determinant and three-term recurrence laws.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{invalid, Error, Result};
use crate::exactmath::{binom, factorial, from_bigint, gbinom, int, is_integer, kappa_n, pochhammer, Rational, Regime};
use crate::series::{HypergeomParams, LaurentTail, PhiFunctional, Poly};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadePair {
    pub n: u64,
    pub p0: Poly,
    pub p1: Poly,
}

/// Closed-form Padé pair for arbitrary `(alpha, gamma, delta)`.
pub fn pade_general(n: u64, params: &HypergeomParams) -> PadePair {
    let (alpha, gamma, delta) = (&params.alpha, &params.gamma, &params.delta);
    let nn = n as usize;
    let base = gamma + int(n as i64 + 1);
    // poch[j] = (n + gamma + 1)_j
    let mut poch = Vec::with_capacity(nn + 2);
    poch.push(Rational::one());
    for j in 0..=nn {
        let next = &poch[j] * (&base + int(j as i64));
        poch.push(next);
    }
    // prods[k] = prod_{i=0}^{k-1} (alpha (n - i) - delta)
    let mut prods = Vec::with_capacity(nn + 1);
    prods.push(Rational::one());
    for i in 0..nn {
        let next = &prods[i] * (alpha * int((n - i as u64) as i64) - delta);
        prods.push(next);
    }
    let nf = from_bigint(factorial(n));
    let mut c0 = vec![Rational::zero(); nn + 1];
    for k in 0..=nn {
        let sign = if k % 2 == 0 { int(1) } else { int(-1) };
        let v = sign * &poch[nn - k] * from_bigint(binom(n as i64, k as i64)) * &prods[k] / &nf;
        c0[nn - k] = v;
    }

    let mut phi = PhiFunctional::new(params);
    if nn > 0 {
        phi.coeff(nn - 1);
    }
    let facts: Vec<Rational> = (0..=nn + 1).map(|j| from_bigint(factorial(j as u64))).collect();
    // w[k] = (-1)^{n-k-1} (n+gamma+1)_{k+1}/(k+1)! * prod_{i=0}^{n-k-2}(alpha(n-i)-delta)/(n-k-1)!
    let w: Vec<Rational> = (0..nn)
        .map(|k| {
            let m = nn - k - 1;
            let sign = if m % 2 == 0 { int(1) } else { int(-1) };
            sign * &poch[k + 1] / &facts[k + 1] * &prods[m] / &facts[m]
        })
        .collect();
    let mut c1 = vec![Rational::zero(); nn];
    for (l, slot) in c1.iter_mut().enumerate() {
        let mut s = Rational::zero();
        for (k, wk) in w.iter().enumerate().skip(l) {
            s += wk * phi.coeff(k - l);
        }
        *slot = s;
    }
    PadePair { n, p0: Poly::new(c0), p1: Poly::new(c1) }
}

/// Padé pair of `(1/z)(1 - 1/z)^omega` from the binomial coefficient formulas.
pub fn pade_binomial(n: u64, omega: &Rational) -> Result<PadePair> {
    if is_integer(omega) {
        return invalid(format!("pade_binomial needs a non-integral omega, got {omega}"));
    }
    if n == 0 {
        return invalid("pade_binomial needs n >= 1");
    }
    let ni = n as i64;
    let sgn = |e: i64| if e % 2 == 0 { int(1) } else { int(-1) };
    let a = int(ni - 1) - omega;
    let p0: Vec<Rational> = (0..=ni)
        .map(|k| sgn(ni - k) * from_bigint(binom(ni + k - 1, k)) * gbinom(&a, (ni - k) as u64))
        .collect();
    let b = int(ni) + omega;
    let p1: Vec<Rational> = (0..ni)
        .map(|k| sgn(ni - 1 - k) * from_bigint(binom(ni + k, k)) * gbinom(&b, (ni - 1 - k) as u64))
        .collect();
    Ok(PadePair { n, p0: Poly::new(p0), p1: Poly::new(p1) })
}

/// `lambda_{n,n}, ..., lambda_{n,K}`; `lambda_{n,k} = 0` for `k < n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemainderTail {
    pub n: u64,
    pub lambdas: Vec<Rational>,
}

impl RemainderTail {
    pub fn lambda(&self, k: u64) -> Rational {
        if k < self.n {
            return Rational::zero();
        }
        self.lambdas.get((k - self.n) as usize).cloned().unwrap_or_else(Rational::zero)
    }

    /// The remainder as a tail through `z^-(K+1)`.
    pub fn to_laurent(&self) -> LaurentTail {
        let top = self.n as usize + self.lambdas.len();
        let mut v = vec![Rational::zero(); top];
        for (i, l) in self.lambdas.iter().enumerate() {
            v[self.n as usize + i] = l.clone();
        }
        LaurentTail::new(v)
    }
}

pub fn lambda_nn(n: u64, params: &HypergeomParams) -> Rational {
    let (a, g, d) = (&params.alpha, &params.gamma, &params.delta);
    let mut v = Rational::one();
    for i in 1..=n {
        v *= a * int(i as i64) - d;
    }
    for j in 1..=n {
        v *= a * (g + int(j as i64)) + d;
    }
    v / pochhammer(&(g + int(2)), 2 * n)
}

pub fn remainder_coeffs(n: u64, params: &HypergeomParams, kmax: u64) -> Result<RemainderTail> {
    if kmax < n {
        return invalid(format!("remainder_coeffs needs K >= n, got K = {kmax} < n = {n}"));
    }
    let (a, g, d) = (&params.alpha, &params.gamma, &params.delta);
    let mut lambdas = Vec::with_capacity((kmax - n + 1) as usize);
    let mut cur = lambda_nn(n, params);
    lambdas.push(cur.clone());
    for k in n..kmax {
        let k1 = int(k as i64 + 1);
        let num = &k1 * (a * &k1 - d);
        let den = int((k + 1 - n) as i64) * (g + int((n + k + 2) as i64));
        cur = cur * num / den;
        lambdas.push(cur.clone());
    }
    Ok(RemainderTail { n, lambdas })
}

fn require_nondegenerate(params: &HypergeomParams) -> Result<()> {
    if params.delta_in_alpha_n() {
        return Err(Error::Hypothesis(format!(
            "delta = {} lies in alpha*N for alpha = {}",
            params.delta, params.alpha
        )));
    }
    if params.neg_alpha_gamma_delta_in_alpha_n() {
        return Err(Error::Hypothesis(format!(
            "-(alpha*gamma + delta) = {} lies in alpha*N for alpha = {}",
            -(&params.alpha * &params.gamma + &params.delta),
            params.alpha
        )));
    }
    Ok(())
}

/// Closed form of `P_{n,0} P_{n+1,1} - P_{n+1,0} P_{n,1}`.
pub fn det_m2(n: u64, params: &HypergeomParams) -> Result<Rational> {
    require_nondegenerate(params)?;
    let g = &params.gamma;
    let lead = pochhammer(&(g + int(n as i64 + 2)), n + 1) / from_bigint(factorial(n + 1));
    let rest = lambda_nn(n, params);
    Ok(lead * rest)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetCheck {
    pub n: u64,
    pub symbolic: Poly,
    pub closed_form: Rational,
    pub ok: bool,
}

/// Expands the 2x2 determinant and compares it with the closed form.
pub fn verify_det_m2(n: u64, params: &HypergeomParams) -> Result<DetCheck> {
    let closed_form = det_m2(n, params)?;
    let a = pade_general(n, params);
    let b = pade_general(n + 1, params);
    let symbolic = &(&a.p0 * &b.p1) - &(&b.p0 * &a.p1);
    let ok = symbolic == Poly::constant(closed_form.clone()) && !closed_form.is_zero();
    Ok(DetCheck { n, symbolic, closed_form, ok })
}

/// `A_n X_{n+1} - (z - B_n) X_n + C_n X_{n-1} = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceCoeffs {
    pub n: u64,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

pub fn rec_coeffs(n: u64, params: &HypergeomParams) -> Result<RecurrenceCoeffs> {
    if n == 0 {
        return invalid("rec_coeffs needs n >= 1");
    }
    let (al, g, d) = (&params.alpha, &params.gamma, &params.delta);
    let nr = int(n as i64);
    let two_n_g = int(2 * n as i64) + g;
    let den_a = (&two_n_g + int(1)) * (&two_n_g + int(2));
    let den_b = &two_n_g * (&two_n_g + int(2));
    let den_c = &two_n_g * (&two_n_g + int(1));
    if den_a.is_zero() || den_b.is_zero() || den_c.is_zero() {
        return Err(Error::Hypothesis(format!("recurrence denominators vanish at n = {n} for gamma = {g}")));
    }
    let a = (&nr + g + int(1)) * (&nr + int(1)) / den_a;
    if a.is_zero() {
        return Err(Error::Hypothesis(format!("A_{n} = 0 for gamma = {g}")));
    }
    let b = (int(2) * al * &nr * &nr + int(2) * al * &nr * (int(1) + g) + g * (al - d)) / den_b;
    let c = (al * &nr - d) * (al * (g + &nr) + d) / den_c;
    Ok(RecurrenceCoeffs { n, a, b, c })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceCheck {
    pub n: u64,
    pub p0_residual: Poly,
    pub p1_residual: Poly,
    /// `A_n R_{n+1} - (z - B_n) R_n + C_n R_{n-1}`, through the checked order.
    pub remainder_residual: LaurentTail,
    pub ok: bool,
}

/// Exact check of the three-term recurrence at index `n` for the
/// denominators, numerators, and remainders (tails through `z^-tail_order`).
pub fn verify_recurrence(n: u64, params: &HypergeomParams, tail_order: usize) -> Result<RecurrenceCheck> {
    let rc = rec_coeffs(n, params)?;
    let prev = pade_general(n - 1, params);
    let cur = pade_general(n, params);
    let next = pade_general(n + 1, params);
    let zb = Poly::linear(-&rc.b, Rational::one());
    let comb = |x: &Poly, y: &Poly, w: &Poly| &(&x.scale(&rc.a) - &(&zb * y)) + &w.scale(&rc.c);
    let p0_residual = comb(&next.p0, &cur.p0, &prev.p0);
    let p1_residual = comb(&next.p1, &cur.p1, &prev.p1);
    let kmax = tail_order.max(n as usize + 2) as u64;
    let tail = |m: u64| -> Result<LaurentTail> { Ok(remainder_coeffs(m, params, kmax.max(m))?.to_laurent()) };
    let (rn1, rn, rp) = (tail(n + 1)?, tail(n)?, tail(n - 1)?);
    let (head, zr) = rn.mul_linear(&rc.b);
    let remainder_residual = rn1.scale(&rc.a).sub(&zr).add(&rp.scale(&rc.c));
    let ok = p0_residual.is_zero()
        && p1_residual.is_zero()
        && head.is_zero()
        && remainder_residual.coeffs().iter().all(|c| c.is_zero());
    Ok(RecurrenceCheck { n, p0_residual, p1_residual, remainder_residual, ok })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightViolation {
    /// `phi_f(t^k P_{n,0}) != 0`.
    Orthogonality { k: usize },
    /// `P_{n,0} f - P_{n,1}` has a nonzero coefficient at `z^power`.
    PolynomialPart { power: usize },
    /// Nonzero coefficient at `z^-index` with `index <= n`.
    Tail { index: usize },
    /// Coefficient at `z^-(n+1)` differs from `lambda_{n,n}`.
    LeadingRemainder { expected: Rational, found: Rational },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightReport {
    pub n: u64,
    pub ok: bool,
    pub violations: Vec<WeightViolation>,
}

impl WeightReport {
    pub fn first_violation(&self) -> Option<&WeightViolation> {
        self.violations.first()
    }
}

pub fn verify_weight(n: u64, params: &HypergeomParams) -> WeightReport {
    verify_weight_pair(&pade_general(n, params), params)
}

/// Checks the orthogonality relations, the vanishing of the polynomial part
/// and of the first `n` tail coefficients, and the leading remainder term.
pub fn verify_weight_pair(pair: &PadePair, params: &HypergeomParams) -> WeightReport {
    let n = pair.n as usize;
    let mut violations = Vec::new();
    let mut phi = PhiFunctional::new(params);
    for k in 0..n {
        if !phi.apply(&pair.p0.shift(k)).is_zero() {
            violations.push(WeightViolation::Orthogonality { k });
            break;
        }
    }
    let deg = pair.p0.degree().unwrap_or(0);
    let f = phi.tail(deg + n + 1);
    let (poly, tail) = pair.p0.mul_tail(&f);
    let diff = &poly - &pair.p1;
    if let Some(power) = diff.coeffs().iter().position(|c| !c.is_zero()) {
        violations.push(WeightViolation::PolynomialPart { power });
    }
    if let Some(i) = tail.coeffs().iter().take(n).position(|c| !c.is_zero()) {
        violations.push(WeightViolation::Tail { index: i + 1 });
    }
    let expected = lambda_nn(pair.n, params);
    let found = tail.get(n + 1).cloned().unwrap_or_else(Rational::zero);
    if found != expected {
        violations.push(WeightViolation::LeadingRemainder { expected, found });
    }
    WeightReport { n: pair.n, ok: violations.is_empty(), violations }
}

/// `kappa_n P_{n,0}(beta)` and `kappa_n P_{n,1}(beta)` as integers, or an
/// error naming the first non-integral value.
pub fn cleared_values(
    params: &HypergeomParams,
    beta: &Rational,
    n: u64,
    regime: Regime,
) -> Result<(BigInt, BigInt)> {
    let prof = kappa_n(params, beta, n, regime)?;
    let pair = pade_general(n, params);
    let v0 = &prof.kappa * pair.p0.eval(beta);
    let v1 = &prof.kappa * pair.p1.eval(beta);
    for (name, v) in [("P_{n,0}", &v0), ("P_{n,1}", &v1)] {
        if !is_integer(v) {
            return Err(Error::Invariant(format!(
                "kappa_{n} {name}({beta}) = {v} is not an integer in regime {}",
                regime.name()
            )));
        }
    }
    Ok((v0.to_integer(), v1.to_integer()))
}
