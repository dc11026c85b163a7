//! Dense polynomials over Q, truncated Laurent tails in `1/z`, and the
//! coefficient functional `phi_f` of the series
//!
//! ```text
//! f(z) = sum_{k>=0} c_k z^-(k+1),   c_k = prod_{i=1..k}(alpha i - delta) / (gamma+2)_k.
//! ```
//!
//! `phi_f(t^k) = c_k`, so `f(z) = phi_f(1/(z - t))`. The operators `E` and
//! `RD_n` give independent routes to the Padé denominators.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exactmath::{int, is_integer, is_nonpositive_integer, is_positive_integer, Rational};
use crate::interval::Interval;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Poly {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Poly {
        Poly { coeffs: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Poly {
        Poly::new(vec![c])
    }

    pub fn monomial(c: Rational, k: usize) -> Poly {
        let mut v = vec![Rational::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    /// `a + b z`.
    pub fn linear(a: Rational, b: Rational) -> Poly {
        Poly::new(vec![a, b])
    }

    pub fn from_ints(cs: &[i64]) -> Poly {
        Poly::new(cs.iter().map(|&c| int(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, z: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn eval_interval(&self, z: &Interval) -> Interval {
        let mut acc = Interval::zero(z.prec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(z).add(&Interval::point(c, z.prec));
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * int(i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Multiplies by `z^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![Rational::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        Poly { coeffs: v }
    }

    pub fn pow(&self, k: u32) -> Poly {
        (0..k).fold(Poly::one(), |acc, _| &acc * self)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.coeffs[dd].clone();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &r[i + dd] / &lead;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    r[i + j] -= &c * dc;
                }
            }
            q[i] = c;
        }
        (Poly::new(q), Poly::new(r))
    }

    pub fn div_exact(&self, d: &Poly) -> Result<Poly> {
        let (q, r) = self.div_rem(d);
        if !r.is_zero() {
            return Err(Error::NotDivisible(format!("{self} is not divisible by {d} (remainder {r})")));
        }
        Ok(q)
    }

    /// Substitutes `z -> a z + b`.
    pub fn compose_linear(&self, a: &Rational, b: &Rational) -> Poly {
        let lin = Poly::linear(b.clone(), a.clone());
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &Poly::constant(c.clone());
        }
        acc
    }

    /// Product with a Laurent tail `sum c_j z^-j`. Returns the polynomial part
    /// and the tail, valid through `z^-(L - deg self)`.
    pub fn mul_tail(&self, tail: &LaurentTail) -> (Poly, LaurentTail) {
        let Some(d) = self.degree() else {
            return (Poly::zero(), LaurentTail::zeros(tail.order().max(1)));
        };
        let l = tail.order();
        // coefficient of z^m is sum_i p_i c_{i-m}, for -(l-d) <= m <= d-1
        let mut poly = vec![Rational::zero(); d];
        for (m, slot) in poly.iter_mut().enumerate() {
            for i in (m + 1)..=d {
                if let Some(c) = tail.get(i - m) {
                    *slot += &self.coeffs[i] * c;
                }
            }
        }
        let valid = l.saturating_sub(d);
        let mut out = Vec::with_capacity(valid);
        for j in 1..=valid {
            let mut s = Rational::zero();
            for i in 0..=d {
                if let Some(c) = tail.get(i + j) {
                    s += &self.coeffs[i] * c;
                }
            }
            out.push(s);
        }
        (Poly::new(poly), LaurentTail { coeffs: out })
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "z")?,
                (1, false) => write!(f, "{a}*z")?,
                (_, true) => write!(f, "z^{i}")?,
                (_, false) => write!(f, "{a}*z^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::new(v)
    }
}

/// `sum_{j=1..L} c_j z^-j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentTail {
    coeffs: Vec<Rational>,
}

impl LaurentTail {
    /// `coeffs[0]` is the coefficient of `1/z`.
    pub fn new(coeffs: Vec<Rational>) -> LaurentTail {
        LaurentTail { coeffs }
    }

    pub fn zeros(l: usize) -> LaurentTail {
        LaurentTail { coeffs: vec![Rational::zero(); l] }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `z^-j`, `j >= 1`.
    pub fn get(&self, j: usize) -> Option<&Rational> {
        j.checked_sub(1).and_then(|i| self.coeffs.get(i))
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn sub(&self, o: &LaurentTail) -> LaurentTail {
        let l = self.order().min(o.order());
        LaurentTail { coeffs: (0..l).map(|i| &self.coeffs[i] - &o.coeffs[i]).collect() }
    }

    pub fn add(&self, o: &LaurentTail) -> LaurentTail {
        let l = self.order().min(o.order());
        LaurentTail { coeffs: (0..l).map(|i| &self.coeffs[i] + &o.coeffs[i]).collect() }
    }

    pub fn scale(&self, c: &Rational) -> LaurentTail {
        LaurentTail { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// Product with `(z - b)`: the `z^0` coefficient is returned separately.
    pub fn mul_linear(&self, b: &Rational) -> (Rational, LaurentTail) {
        let head = self.get(1).cloned().unwrap_or_else(Rational::zero);
        let l = self.order().saturating_sub(1);
        let coeffs = (1..=l)
            .map(|j| &self.coeffs[j] - b * &self.coeffs[j - 1])
            .collect();
        (head, LaurentTail { coeffs })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Preset {
    Binomial { omega: String },
    ShiftedLog { x: String },
    ShiftedExp { gamma: String },
}

/// Parameters `(alpha, gamma, delta)` of the series. The preset, if any, is
/// derived from the values rather than stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HypergeomParams {
    pub alpha: Rational,
    pub gamma: Rational,
    pub delta: Rational,
}

impl HypergeomParams {
    /// Formal layer: only `(gamma + 2)_k != 0` is required.
    pub fn general(alpha: Rational, gamma: Rational, delta: Rational) -> Result<Self> {
        if is_nonpositive_integer(&(&gamma + int(2))) {
            return invalid(format!("gamma = {gamma} makes (gamma + 2)_k vanish"));
        }
        Ok(HypergeomParams { alpha, gamma, delta })
    }

    /// `f(z) = (1/z)(1 - 1/z)^omega`.
    pub fn binomial(omega: Rational) -> Result<Self> {
        if is_integer(&omega) {
            return invalid(format!("binomial preset needs a non-integral omega, got {omega}"));
        }
        Ok(HypergeomParams { alpha: int(1), gamma: int(-1), delta: int(1) + omega })
    }

    /// `(alpha, gamma, delta) = (1, x, -x)`, the Lerch function at `s = 1`.
    pub fn shifted_log(x: Rational) -> Result<Self> {
        if x.is_negative() || x >= int(1) {
            return invalid(format!("shifted_log preset needs 0 <= x < 1, got {x}"));
        }
        Ok(HypergeomParams { alpha: int(1), delta: -&x, gamma: x })
    }

    /// `(alpha, gamma, delta) = (0, gamma, -1)`.
    pub fn shifted_exp(gamma: Rational) -> Result<Self> {
        Self::general(int(0), gamma, int(-1))
    }

    pub fn preset(&self) -> Option<Preset> {
        let one = Rational::one();
        if self.alpha == one && self.gamma == int(-1) {
            let omega = &self.delta - &one;
            if !is_integer(&omega) {
                return Some(Preset::Binomial { omega: omega.to_string() });
            }
        }
        if self.alpha == one && self.delta == -&self.gamma && !self.gamma.is_negative() && self.gamma < one {
            return Some(Preset::ShiftedLog { x: self.gamma.to_string() });
        }
        if self.alpha.is_zero() && self.delta == -one {
            return Some(Preset::ShiftedExp { gamma: self.gamma.to_string() });
        }
        None
    }

    /// `omega` when these are binomial parameters.
    pub fn omega(&self) -> Option<Rational> {
        match self.preset() {
            Some(Preset::Binomial { .. }) => Some(&self.delta - int(1)),
            _ => None,
        }
    }

    /// Exact test for `delta in alpha N`, with `N = {1, 2, ...}`.
    pub fn delta_in_alpha_n(&self) -> bool {
        in_alpha_n(&self.delta, &self.alpha)
    }

    /// Exact test for `-(alpha gamma + delta) in alpha N`.
    pub fn neg_alpha_gamma_delta_in_alpha_n(&self) -> bool {
        in_alpha_n(&-(&self.alpha * &self.gamma + &self.delta), &self.alpha)
    }

    /// Both membership tests fail, so `det M_{2,n} != 0` for every `n`.
    pub fn nondegenerate(&self) -> bool {
        !self.delta_in_alpha_n() && !self.neg_alpha_gamma_delta_in_alpha_n()
    }

    pub fn kernel_factor(&self) -> Poly {
        // t (t - alpha)
        Poly::new(vec![Rational::zero(), -&self.alpha, Rational::one()])
    }
}

impl fmt::Display for HypergeomParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(alpha, gamma, delta) = ({}, {}, {})", self.alpha, self.gamma, self.delta)
    }
}

fn in_alpha_n(v: &Rational, alpha: &Rational) -> bool {
    if alpha.is_zero() {
        return false;
    }
    is_positive_integer(&(v / alpha))
}

/// Memoized coefficients `c_k = phi_f(t^k)`, extended by the one-step
/// recurrence `c_{k+1} = c_k (alpha(k+1) - delta)/(gamma + k + 2)`.
#[derive(Clone, Debug)]
pub struct PhiFunctional {
    params: HypergeomParams,
    coeffs: Vec<Rational>,
}

impl PhiFunctional {
    pub fn new(params: &HypergeomParams) -> PhiFunctional {
        PhiFunctional { params: params.clone(), coeffs: vec![Rational::one()] }
    }

    pub fn params(&self) -> &HypergeomParams {
        &self.params
    }

    pub fn coeff(&mut self, k: usize) -> &Rational {
        while self.coeffs.len() <= k {
            let j = self.coeffs.len() as i64; // computing c_j from c_{j-1}
            let p = &self.params;
            let num = &p.alpha * int(j) - &p.delta;
            let den = &p.gamma + int(j + 1);
            let next = &self.coeffs[j as usize - 1] * num / den;
            self.coeffs.push(next);
        }
        &self.coeffs[k]
    }

    pub fn apply(&mut self, p: &Poly) -> Rational {
        if let Some(d) = p.degree() {
            self.coeff(d);
        }
        p.coeffs().iter().zip(self.coeffs.iter()).map(|(a, c)| a * c).sum()
    }

    /// Tail `f(z) = sum_{k<L} c_k z^-(k+1)`.
    pub fn tail(&mut self, l: usize) -> LaurentTail {
        if l > 0 {
            self.coeff(l - 1);
        }
        LaurentTail::new(self.coeffs[..l].to_vec())
    }
}

pub fn phi_f(p: &Poly, params: &HypergeomParams) -> Rational {
    PhiFunctional::new(params).apply(p)
}

/// `c_0, ..., c_K`.
pub fn f_coeffs(params: &HypergeomParams, k: usize) -> Vec<Rational> {
    let mut phi = PhiFunctional::new(params);
    phi.coeff(k);
    phi.coeffs
}

/// `E(P) = P' + (gamma t + delta) P / (t (t - alpha))` for `P` in the ideal
/// generated by `t(t - alpha)`.
pub fn apply_e(p: &Poly, params: &HypergeomParams) -> Result<Poly> {
    let q = p.div_exact(&params.kernel_factor())?;
    let lin = Poly::linear(params.delta.clone(), params.gamma.clone());
    Ok(&p.derivative() + &(&lin * &q))
}

/// `RD_1 P = d/dz((z - alpha) z P) + (gamma z + delta) P`.
fn rd1(p: &Poly, params: &HypergeomParams) -> Poly {
    let w = params.kernel_factor();
    let lin = Poly::linear(params.delta.clone(), params.gamma.clone());
    &(&w * p).derivative() + &(&lin * p)
}

/// `RD_n(1)` through the factorization
/// `RD_n = (1/n!) RD_1 (RD_1 + (2z - alpha)) ... (RD_1 + (n-1)(2z - alpha))`.
pub fn rd_oracle(n: u64, params: &HypergeomParams) -> Poly {
    let two_z_minus_alpha = Poly::linear(-&params.alpha, int(2));
    let mut p = Poly::one();
    for k in (0..n).rev() {
        let shifted = (&two_z_minus_alpha * &p).scale(&int(k as i64));
        p = &rd1(&p, params) + &shifted;
    }
    let nf = Rational::from_integer(crate::exactmath::factorial(n));
    p.scale(&nf.recip())
}

/// `(P(z) - P(t))/(z - t)` as a list of polynomials in `t`: entry `l` is the
/// coefficient of `z^l`.
pub fn divided_difference(p: &Poly) -> Vec<Poly> {
    let Some(d) = p.degree() else { return Vec::new() };
    let c = p.coeffs();
    // (z^m - t^m)/(z - t) = sum_{l=0}^{m-1} z^l t^{m-1-l}
    (0..d)
        .map(|l| {
            let v: Vec<Rational> = (0..d - l).map(|j| c[l + j + 1].clone()).collect();
            Poly::new(v)
        })
        .collect()
}

/// `phi_f` applied in `t` to the divided difference: the numerator partner of
/// a denominator `P` with `P f - Q` small.
pub fn numerator_from_divided_difference(p: &Poly, params: &HypergeomParams) -> Poly {
    let mut phi = PhiFunctional::new(params);
    Poly::new(divided_difference(p).iter().map(|q| phi.apply(q)).collect())
}

/// Closed form of `phi_f(t^m (t - alpha)^n)`.
pub fn phi_closed_form(m: u64, n: u64, params: &HypergeomParams) -> Rational {
    let (a, g, d) = (&params.alpha, &params.gamma, &params.delta);
    let mut v = if n % 2 == 0 { Rational::one() } else { -Rational::one() };
    for i in 1..=m {
        v *= a * int(i as i64) - d;
    }
    for j in 1..=n {
        v *= a * (g + int(j as i64)) + d;
    }
    v / crate::exactmath::pochhammer(&(g + int(2)), m + n)
}

/// Convenience: `t - alpha` as a polynomial.
pub fn t_minus(a: &Rational) -> Poly {
    Poly::linear(-a, Rational::one())
}

pub fn bigint_poly(p: &Poly) -> Option<Vec<BigInt>> {
    p.coeffs().iter().map(|c| if c.is_integer() { Some(c.to_integer()) } else { None }).collect()
}
