//! Rationals and the denominator bookkeeping used to clear the Padé
//! approximants: `den`, `nu`, `nu_n`, Pochhammer symbols, generalized
//! binomials, and the integers `D_n`, `d_n`, `G_n`, `kappa_n`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::interval::{Interval, DEFAULT_PREC};
use crate::series::{HypergeomParams, Preset};

/// Arbitrary precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn from_bigint(n: BigInt) -> Rational {
    Rational::from_integer(n)
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

/// `true` when `q` is one of 0, -1, -2, ...
pub fn is_nonpositive_integer(q: &Rational) -> bool {
    is_integer(q) && !q.is_positive()
}

/// `true` when `q` is one of 1, 2, 3, ...
pub fn is_positive_integer(q: &Rational) -> bool {
    is_integer(q) && q.is_positive()
}

/// Parses `p`, `p/q`, `a^k`, `a^k/b^m` with an optional leading sign; a base
/// may be parenthesized, as in `-(253)^3/19`.
/// The sign binds to the whole expression, so `-8^3` is `-(8^3)`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() {
        return invalid(format!("empty rational in {text:?}"));
    }
    let mut parts = body.splitn(2, '/');
    let num = parse_power(parts.next().unwrap_or(""), text)?;
    let den = match parts.next() {
        Some(d) => parse_power(d, text)?,
        None => BigInt::one(),
    };
    if den.is_zero() {
        return invalid(format!("zero denominator in {text:?}"));
    }
    let q = Rational::new(num, den);
    Ok(if neg { -q } else { q })
}

fn parse_power(part: &str, whole: &str) -> Result<BigInt> {
    let mut it = part.trim().splitn(2, '^');
    let base: BigInt = it
        .next()
        .unwrap_or("")
        .trim()
        .trim_start_matches('(')
        .trim_end_matches(')')
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("not a rational: {whole:?}")))?;
    match it.next() {
        None => Ok(base),
        Some(e) => {
            let e: u32 = e
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad exponent in {whole:?}")))?;
            Ok(num_traits::pow(base, e as usize))
        }
    }
}

/// Positive denominator of a single rational.
pub fn den(q: &Rational) -> BigInt {
    q.denom().clone()
}

/// Least `m >= 1` with `m*v` integral for every `v`. The empty set gives 1.
pub fn den_set(values: &[Rational]) -> BigInt {
    values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Prime factorization by trial division. Intended for the small
/// denominators that occur as `den(gamma)`, `den(omega)` and friends.
pub fn factorize(m: &BigUint) -> Vec<(BigUint, u32)> {
    let mut out = Vec::new();
    if m.is_zero() || m.is_one() {
        return out;
    }
    if let Some(mut v) = m.to_u128() {
        let mut p: u128 = 2;
        while p * p <= v {
            if v % p == 0 {
                let mut e = 0;
                while v % p == 0 {
                    v /= p;
                    e += 1;
                }
                out.push((BigUint::from(p), e));
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if v > 1 {
            out.push((BigUint::from(v), 1));
        }
        return out;
    }
    let mut v = m.clone();
    let mut p = BigUint::from(2u32);
    while &p * &p <= v {
        if (&v % &p).is_zero() {
            let mut e = 0;
            while (&v % &p).is_zero() {
                v /= &p;
                e += 1;
            }
            out.push((p.clone(), e));
        }
        p += if p == BigUint::from(2u32) { 1u32 } else { 2u32 };
    }
    if !v.is_one() {
        out.push((v, 1));
    }
    out
}

fn primes_of(m: &BigInt) -> Vec<BigUint> {
    factorize(m.magnitude()).into_iter().map(|(p, _)| p).collect()
}

/// Euler's totient.
pub fn totient(m: &BigInt) -> Result<BigInt> {
    if !m.is_positive() {
        return invalid(format!("totient needs m >= 1, got {m}"));
    }
    let mut phi = m.clone();
    for p in primes_of(m) {
        let p = BigInt::from(p);
        phi = phi / &p * (&p - 1);
    }
    Ok(phi)
}

/// A positive real of the form `prod p^e` with rational exponents, kept
/// exactly. `hull` encloses the value at [`DEFAULT_PREC`] bits.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredRadical {
    pub factors: BTreeMap<BigUint, Rational>,
    pub hull: Interval,
}

impl FactoredRadical {
    pub fn one() -> Self {
        Self::from_factors(BTreeMap::new())
    }

    /// Zero exponents are dropped; keys must be primes (not re-checked).
    pub fn from_factors(mut factors: BTreeMap<BigUint, Rational>) -> Self {
        factors.retain(|_, e| !e.is_zero());
        let mut r = FactoredRadical { factors, hull: Interval::one(DEFAULT_PREC) };
        r.hull = r.enclose(DEFAULT_PREC);
        r
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn mul(&self, other: &FactoredRadical) -> FactoredRadical {
        let mut f = self.factors.clone();
        for (p, e) in &other.factors {
            *f.entry(p.clone()).or_insert_with(Rational::zero) += e;
        }
        Self::from_factors(f)
    }

    /// Lcm of the exponent denominators: the smallest `m` with `self^m`
    /// rational.
    pub fn exponent_lcm(&self) -> BigInt {
        den_set(&self.factors.values().cloned().collect::<Vec<_>>())
    }

    /// `self^m` as an exact rational when every `m*e` is an integer.
    pub fn pow_rational(&self, m: &BigInt) -> Option<Rational> {
        let mut acc = Rational::one();
        for (p, e) in &self.factors {
            let me = e * Rational::from_integer(m.clone());
            if !is_integer(&me) {
                return None;
            }
            let k = me.to_integer();
            let pk = num_traits::pow(BigInt::from(p.clone()), k.magnitude().to_usize()?);
            if k.is_negative() {
                acc /= Rational::from_integer(pk);
            } else {
                acc *= Rational::from_integer(pk);
            }
        }
        Some(acc)
    }

    /// Outward-rounded enclosure of the value at `prec` bits.
    pub fn enclose(&self, prec: u32) -> Interval {
        let mut acc = Interval::one(prec);
        for (p, e) in &self.factors {
            let base = Rational::from_integer(BigInt::from(p.clone()));
            acc = acc.mul(&Interval::rational_power(&base, e, prec));
        }
        acc
    }

    /// Enclosure of the natural logarithm, `sum e * ln p`.
    pub fn ln_enclose(&self, prec: u32) -> Interval {
        let mut acc = Interval::zero(prec);
        for (p, e) in &self.factors {
            let lp = Interval::ln_rational(&Rational::from_integer(BigInt::from(p.clone())), prec);
            acc = acc.add(&lp.mul(&Interval::point(e, prec)));
        }
        acc
    }
}

impl fmt::Display for FactoredRadical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().map(|(p, e)| format!("{p}^({e})")).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// `nu(y) = prod_{q^a || den(y)} q^(a + 1/(q-1))`; for squarefree
/// denominators this is `prod q^(q/(q-1))`.
pub fn nu(y: &Rational) -> FactoredRadical {
    let mut f = BTreeMap::new();
    for (q, a) in factorize(y.denom().magnitude()) {
        let qi = BigInt::from(q.clone());
        let qm1 = &qi - 1;
        f.insert(q, Rational::new(BigInt::from(a) * &qm1 + 1, qm1));
    }
    FactoredRadical::from_factors(f)
}

/// `nu_n(y) = prod_{q^a || den(y)} q^(a n + floor(n/(q-1)))`, the smallest
/// such product clearing `(y)_k / k!` for every `k <= n`. For squarefree
/// denominators the exponent is `n + floor(n/(q-1))`.
pub fn nu_n(y: &Rational, n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for (q, a) in factorize(y.denom().magnitude()) {
        let qm1 = &q - 1u32;
        let e = BigUint::from(n) * a + BigUint::from(n) / qm1;
        let e = e.to_usize().expect("nu_n exponent fits in usize");
        acc *= num_traits::pow(BigInt::from(q), e);
    }
    acc
}

/// Rising factorial `(a)_k`.
pub fn pochhammer(a: &Rational, k: u64) -> Rational {
    let mut acc = Rational::one();
    let mut t = a.clone();
    for _ in 0..k {
        acc *= &t;
        if acc.is_zero() {
            return acc;
        }
        t += Rational::one();
    }
    acc
}

/// Generalized binomial `a(a-1)...(a-k+1)/k!`.
pub fn gbinom(a: &Rational, k: u64) -> Rational {
    let mut acc = Rational::one();
    let mut t = a.clone();
    for i in 1..=k {
        acc *= &t;
        acc /= Rational::from_integer(BigInt::from(i));
        t -= Rational::one();
    }
    acc
}

/// Integer binomial coefficient; zero outside `0 <= k <= n`.
pub fn binom(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Prefix table of `(a)_0, (a)_1, ...`, extended on demand. Owned per
/// caller, so no synchronization is involved.
#[derive(Clone, Debug)]
pub struct PochhammerTable {
    a: Rational,
    vals: Vec<Rational>,
}

impl PochhammerTable {
    pub fn new(a: Rational) -> Self {
        PochhammerTable { a, vals: vec![Rational::one()] }
    }

    pub fn get(&mut self, k: usize) -> &Rational {
        while self.vals.len() <= k {
            let j = self.vals.len() - 1;
            let next = &self.vals[j] * (&self.a + Rational::from_integer(BigInt::from(j)));
            self.vals.push(next);
        }
        &self.vals[k]
    }
}

/// `D_n(gamma) = den(0!/(gamma+2)_0, ..., (n-1)!/(gamma+2)_(n-1))`.
#[allow(non_snake_case)]
pub fn Dn(gamma: &Rational, n: u64) -> Result<BigInt> {
    if gamma < &int(-1) {
        return invalid(format!("D_n needs gamma >= -1, got {gamma}"));
    }
    let g2 = gamma + int(2);
    let mut acc = BigInt::one();
    let mut q = Rational::one(); // k!/(gamma+2)_k
    for k in 0..n {
        if k > 0 {
            q = q * int(k as i64) / (&g2 + int(k as i64 - 1));
        }
        acc = acc.lcm(q.denom());
    }
    Ok(acc)
}

/// `d_n(x) = den(1/(1+x), ..., 1/(n+x))`.
pub fn dn(x: &Rational, n: u64) -> Result<BigInt> {
    if x.is_negative() || x >= &int(1) {
        return invalid(format!("d_n needs 0 <= x < 1, got {x}"));
    }
    let mut acc = BigInt::one();
    for k in 1..=n {
        let v = (x + int(k as i64)).recip();
        acc = acc.lcm(v.denom());
    }
    Ok(acc)
}

/// Members of the two integer families whose gcd is `G_n(omega)`, in the
/// order `k = 0..=n` then `k' = 0..n`.
pub fn gn_families(omega: &Rational, n: u64) -> Result<(Vec<BigInt>, Vec<BigInt>)> {
    if is_integer(omega) {
        return invalid(format!("G_n needs a non-integral omega, got {omega}"));
    }
    if n == 0 {
        return invalid("G_n needs n >= 1");
    }
    let v = from_bigint(nu_n(omega, n));
    let ni = n as i64;
    let mut first = Vec::with_capacity(n as usize + 1);
    for k in 0..=ni {
        let x = &v * from_bigint(binom(ni + k - 1, k)) * gbinom(&(int(ni - 1) - omega), (ni - k) as u64);
        first.push(to_integer_checked(&x, "G_n first family")?);
    }
    let mut second = Vec::with_capacity(n as usize);
    for k in 0..ni {
        let x = &v * from_bigint(binom(ni + k, k)) * gbinom(&(int(ni) + omega), (ni - 1 - k) as u64);
        second.push(to_integer_checked(&x, "G_n second family")?);
    }
    Ok((first, second))
}

/// `G_n(omega)`: gcd of both families, each member asserted integral.
#[allow(non_snake_case)]
pub fn Gn(omega: &Rational, n: u64) -> Result<BigInt> {
    let (a, b) = gn_families(omega, n)?;
    let g = a.iter().chain(b.iter()).fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return Err(Error::Invariant(format!("G_{n}({omega}) families vanish identically")));
    }
    Ok(g)
}

fn to_integer_checked(x: &Rational, what: &str) -> Result<BigInt> {
    if !is_integer(x) {
        return Err(Error::Invariant(format!("{what}: {x} is not an integer")));
    }
    Ok(x.to_integer())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    General,
    ShiftedLog,
    Binomial,
    AlphaZero,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::General => "general",
            Regime::ShiftedLog => "shifted_log",
            Regime::Binomial => "binomial",
            Regime::AlphaZero => "alpha_zero",
        }
    }

    /// Sharpest regime available for the given parameters.
    pub fn for_params(p: &HypergeomParams) -> Regime {
        if p.alpha.is_zero() {
            return Regime::AlphaZero;
        }
        match p.preset() {
            Some(Preset::Binomial { .. }) => Regime::Binomial,
            Some(Preset::ShiftedLog { .. }) => Regime::ShiftedLog,
            _ => Regime::General,
        }
    }
}

/// The pieces of the common denominator of `P_{n,0}(beta)`, `P_{n,1}(beta)`.
/// Entries that do not occur in a regime are 1. In the binomial regime
/// `kappa` is `nu_n(omega) den(beta)^n / G_n(omega)`, which need not be an
/// integer, so it is stored as a rational.
#[derive(Clone, Debug, PartialEq)]
pub struct DenominatorProfile {
    pub n: u64,
    pub regime: Regime,
    pub nu_n: BigInt,
    pub dn_gamma: BigInt,
    pub dn_x: BigInt,
    pub gn: BigInt,
    pub kappa: Rational,
}

pub fn kappa_n(params: &HypergeomParams, beta: &Rational, n: u64, regime: Regime) -> Result<DenominatorProfile> {
    let (alpha, gamma, delta) = (&params.alpha, &params.gamma, &params.delta);
    if gamma < &int(-1) {
        return invalid(format!("kappa_n needs gamma >= -1, got {gamma}"));
    }
    let dbn = num_traits::pow(den(beta), n as usize);
    let one = BigInt::one();
    let mut prof = DenominatorProfile {
        n,
        regime,
        nu_n: one.clone(),
        dn_gamma: one.clone(),
        dn_x: one.clone(),
        gn: one.clone(),
        kappa: Rational::one(),
    };
    match regime {
        Regime::General => {
            if alpha.is_zero() {
                return invalid("general regime needs alpha != 0");
            }
            prof.nu_n = nu_n(gamma, n) * nu_n(&(delta / alpha), n);
            prof.dn_gamma = Dn(gamma, n)?;
            let k = &prof.nu_n * &prof.dn_gamma * num_traits::pow(den(alpha), n as usize) * &dbn;
            prof.kappa = from_bigint(k);
        }
        Regime::ShiftedLog => {
            let x = gamma;
            if !(alpha.is_one() && delta == &-x) {
                return invalid("shifted_log regime needs (alpha, gamma, delta) = (1, x, -x)");
            }
            prof.nu_n = nu_n(x, n);
            prof.dn_x = dn(x, n)?;
            prof.kappa = from_bigint(den(x) * &prof.nu_n * &prof.dn_x * &dbn);
        }
        Regime::Binomial => {
            let omega = delta - int(1);
            if !(alpha.is_one() && gamma == &int(-1)) {
                return invalid("binomial regime needs (alpha, gamma, delta) = (1, -1, 1 + omega)");
            }
            prof.nu_n = nu_n(&omega, n);
            prof.gn = if n == 0 { one.clone() } else { Gn(&omega, n)? };
            prof.kappa = Rational::new(&prof.nu_n * &dbn, prof.gn.clone());
        }
        Regime::AlphaZero => {
            if !alpha.is_zero() {
                return invalid("alpha_zero regime needs alpha = 0");
            }
            prof.nu_n = nu_n(gamma, n);
            prof.dn_gamma = Dn(gamma, n)?;
            let k = &prof.nu_n
                * &prof.dn_gamma
                * num_traits::pow(den(delta), n as usize)
                * &dbn
                * factorial(n);
            prof.kappa = from_bigint(k);
        }
    }
    Ok(prof)
}

/// Lcm of a slice of integers (1 for the empty slice).
pub fn lcm_all(values: &[BigInt]) -> BigInt {
    values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v))
}

/// Exact `p`-adic valuation of a nonzero rational.
pub fn padic_valuation(q: &Rational, p: &BigInt) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    let count = |mut m: BigInt| {
        let mut c = 0i64;
        while (&m % p).is_zero() {
            m /= p;
            c += 1;
        }
        c
    };
    Some(count(q.numer().clone()) - count(q.denom().clone()))
}
