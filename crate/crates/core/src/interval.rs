//! Closed intervals with rational endpoints rounded outward to dyadic numbers
//! of a fixed relative precision. Elementary functions are built from exact
//! integer square/nth roots and Taylor series with explicit remainder balls.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};
use crate::exactmath::{int, Rational};

pub const DEFAULT_PREC: u32 = 128;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
    pub prec: u32,
}

fn pow2(k: u64) -> BigInt {
    BigInt::one() << k
}

/// Rough `log2 |q|`, within one of the true floor.
fn log2_estimate(q: &Rational) -> i64 {
    q.numer().bits() as i64 - q.denom().bits() as i64
}

fn scale(q: &Rational, s: i64) -> Rational {
    if s >= 0 {
        q * Rational::from_integer(pow2(s as u64))
    } else {
        q / Rational::from_integer(pow2((-s) as u64))
    }
}

/// Largest dyadic `<= q` with about `prec` significant bits.
pub fn round_down(q: &Rational, prec: u32) -> Rational {
    round(q, prec, false)
}

/// Smallest dyadic `>= q` with about `prec` significant bits.
pub fn round_up(q: &Rational, prec: u32) -> Rational {
    round(q, prec, true)
}

fn round(q: &Rational, prec: u32, up: bool) -> Rational {
    if q.is_zero() || q.denom().is_one() && q.numer().bits() <= prec as u64 {
        return q.clone();
    }
    let s = prec as i64 - log2_estimate(q);
    let scaled = scale(q, s);
    if scaled.is_integer() {
        return q.clone();
    }
    let m = if up { scaled.ceil() } else { scaled.floor() };
    scale(&m, -s)
}

/// Decimal string of `q` with `digits` fractional digits, rounded down
/// (`up = false`) or up.
pub fn format_decimal(q: &Rational, digits: usize, up: bool) -> String {
    let ten = Rational::from_integer(num_traits::pow(BigInt::from(10), digits));
    let scaled = q * &ten;
    let m = if up { scaled.ceil() } else { scaled.floor() }.to_integer();
    let neg = m.is_negative();
    let s = m.abs().to_string();
    let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
    let (ip, fp) = s.split_at(s.len() - digits);
    let body = if digits == 0 { ip.to_string() } else { format!("{ip}.{fp}") };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

/// Exact decimal string of `q` when its denominator is `2^a 5^b`.
pub fn exact_decimal(q: &Rational) -> Option<String> {
    let mut d = q.denom().clone();
    let (mut a, mut b) = (0usize, 0usize);
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    while (&d % &two).is_zero() {
        d /= &two;
        a += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        b += 1;
    }
    if !d.is_one() {
        return None;
    }
    Some(format_decimal(q, a.max(b), false))
}

/// `q` rounded down or up to a decimal with `sig` significant digits.
pub fn round_decimal(q: &Rational, sig: usize, up: bool) -> Rational {
    if q.is_zero() {
        return q.clone();
    }
    let digits_int = (q.abs().floor().to_integer()).to_string().len() as i64;
    let lead = if q.abs() >= Rational::one() {
        digits_int
    } else {
        // leading zeros after the point, as a negative count
        let mut k = 0i64;
        let mut v = q.abs();
        let ten = Rational::from_integer(BigInt::from(10));
        while v < Rational::one() {
            v *= &ten;
            k -= 1;
        }
        k + 1
    };
    let frac = (sig as i64 - lead).max(0) as usize;
    parse_decimal(&format_decimal(q, frac, up)).expect("formatted decimal parses")
}

/// Parses a plain decimal such as `-12.5e-3`, `0.25` or `7` exactly.
pub fn parse_decimal(text: &str) -> Result<Rational> {
    let t = text.trim();
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad_decimal(text))?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if ip.is_empty() && fp.is_empty() || !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad_decimal(text));
    }
    let digits: BigInt = format!("{ip}{fp}0").parse().map_err(|_| bad_decimal(text))?;
    let e10 = exp - fp.len() as i64 - 1;
    let ten = BigInt::from(10);
    let mut q = Rational::from_integer(digits);
    if e10 >= 0 {
        q *= Rational::from_integer(num_traits::pow(ten, e10 as usize));
    } else {
        q /= Rational::from_integer(num_traits::pow(ten, (-e10) as usize));
    }
    Ok(if neg { -q } else { q })
}

fn bad_decimal(text: &str) -> crate::Error {
    crate::Error::InvalidArgument(format!("not a decimal number: {text:?}"))
}

thread_local! {
    static LN2: RefCell<HashMap<u32, Interval>> = RefCell::new(HashMap::new());
}

impl Interval {
    /// Builds `[lo, hi]`, rounding both ends outward.
    pub fn new(lo: &Rational, hi: &Rational, prec: u32) -> Interval {
        debug_assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo: round_down(lo, prec), hi: round_up(hi, prec), prec }
    }

    pub fn point(q: &Rational, prec: u32) -> Interval {
        Interval::new(q, q, prec)
    }

    pub fn zero(prec: u32) -> Interval {
        Interval::point(&Rational::zero(), prec)
    }

    pub fn one(prec: u32) -> Interval {
        Interval::point(&Rational::one(), prec)
    }

    pub fn from_int(n: i64, prec: u32) -> Interval {
        Interval::point(&int(n), prec)
    }

    pub fn with_prec(&self, prec: u32) -> Interval {
        Interval::new(&self.lo, &self.hi, prec)
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn contains_interval(&self, o: &Interval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    pub fn overlaps(&self, o: &Interval) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    /// `self < o` for every choice of points.
    pub fn definitely_lt(&self, o: &Interval) -> bool {
        self.hi < o.lo
    }

    pub fn definitely_gt(&self, o: &Interval) -> bool {
        self.lo > o.hi
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.mid())
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo, prec: self.prec }
    }

    pub fn abs(&self) -> Interval {
        if self.lo.is_negative() && self.hi.is_positive() {
            let m = if -&self.lo > self.hi { -&self.lo } else { self.hi.clone() };
            Interval { lo: Rational::zero(), hi: m, prec: self.prec }
        } else if self.hi.is_positive() || self.hi.is_zero() && !self.lo.is_negative() {
            self.clone()
        } else {
            self.neg()
        }
    }

    fn prec_with(&self, o: &Interval) -> u32 {
        self.prec.min(o.prec)
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval::new(&(&self.lo + &o.lo), &(&self.hi + &o.hi), self.prec_with(o))
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval::new(&(&self.lo - &o.hi), &(&self.hi - &o.lo), self.prec_with(o))
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().expect("four products");
        let hi = c.iter().max().expect("four products");
        Interval::new(lo, hi, self.prec_with(o))
    }

    pub fn scale(&self, q: &Rational) -> Interval {
        let (a, b) = (&self.lo * q, &self.hi * q);
        if a <= b {
            Interval::new(&a, &b, self.prec)
        } else {
            Interval::new(&b, &a, self.prec)
        }
    }

    pub fn recip(&self) -> Result<Interval> {
        if self.contains_zero() {
            return invalid("reciprocal of an interval containing zero");
        }
        Ok(Interval::new(&self.hi.recip(), &self.lo.recip(), self.prec))
    }

    pub fn div(&self, o: &Interval) -> Result<Interval> {
        Ok(self.mul(&o.recip()?))
    }

    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval::new(&(&a.lo * &a.lo), &(&a.hi * &a.hi), self.prec)
    }

    pub fn powi(&self, mut k: u64) -> Interval {
        let mut base = self.clone();
        let mut acc = Interval::one(self.prec);
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

    pub fn max(&self, o: &Interval) -> Interval {
        let lo = if self.lo > o.lo { &self.lo } else { &o.lo };
        let hi = if self.hi > o.hi { &self.hi } else { &o.hi };
        Interval { lo: lo.clone(), hi: hi.clone(), prec: self.prec_with(o) }
    }

    pub fn min(&self, o: &Interval) -> Interval {
        let lo = if self.lo < o.lo { &self.lo } else { &o.lo };
        let hi = if self.hi < o.hi { &self.hi } else { &o.hi };
        Interval { lo: lo.clone(), hi: hi.clone(), prec: self.prec_with(o) }
    }

    pub fn hull(&self, o: &Interval) -> Interval {
        let lo = if self.lo < o.lo { &self.lo } else { &o.lo };
        let hi = if self.hi > o.hi { &self.hi } else { &o.hi };
        Interval { lo: lo.clone(), hi: hi.clone(), prec: self.prec_with(o) }
    }

    /// Symmetric ball `[-r, r]`.
    pub fn ball(r: &Rational, prec: u32) -> Interval {
        let r = r.abs();
        Interval::new(&-&r, &r, prec)
    }

    pub fn sqrt(&self) -> Result<Interval> {
        self.root(2)
    }

    /// Real `b`-th root of a nonnegative interval.
    pub fn root(&self, b: u32) -> Result<Interval> {
        if self.lo.is_negative() {
            return invalid("root of an interval with negative part");
        }
        Ok(Interval {
            lo: root_bound(&self.lo, b, self.prec, false),
            hi: root_bound(&self.hi, b, self.prec, true),
            prec: self.prec,
        })
    }

    /// `q^e` for `q > 0` and rational `e`, via an exact integer `b`-th root.
    pub fn rational_power(q: &Rational, e: &Rational, prec: u32) -> Interval {
        assert!(q.is_positive(), "rational_power needs a positive base");
        let a = e.numer().abs().to_usize().expect("exponent numerator fits in usize");
        let b = e.denom().to_u32().expect("exponent denominator fits in u32");
        let base = if e.is_negative() { q.recip() } else { q.clone() };
        let p = num_traits::pow(base, a);
        let wp = prec + 8;
        let r = Interval {
            lo: root_bound(&p, b, wp, false),
            hi: root_bound(&p, b, wp, true),
            prec: wp,
        };
        r.with_prec(prec)
    }

    pub fn exp(&self) -> Interval {
        let lo = exp_rational(&self.lo, self.prec).lo;
        let hi = if self.lo == self.hi { None } else { Some(exp_rational(&self.hi, self.prec).hi) };
        let hi = hi.unwrap_or_else(|| exp_rational(&self.lo, self.prec).hi);
        Interval { lo, hi, prec: self.prec }
    }

    pub fn ln(&self) -> Result<Interval> {
        if !self.is_positive() {
            return invalid("logarithm of an interval that is not positive");
        }
        let a = Interval::ln_rational(&self.lo, self.prec);
        if self.lo == self.hi {
            return Ok(a);
        }
        let b = Interval::ln_rational(&self.hi, self.prec);
        Ok(Interval { lo: a.lo, hi: b.hi, prec: self.prec })
    }

    /// `self^e` for a positive base, as `exp(e ln self)`.
    pub fn pow(&self, e: &Interval) -> Result<Interval> {
        Ok(self.ln()?.mul(e).exp())
    }

    pub fn ln_rational(q: &Rational, prec: u32) -> Interval {
        assert!(q.is_positive(), "ln needs a positive argument");
        if q.is_one() {
            return Interval::zero(prec);
        }
        let mut e = log2_estimate(q);
        let two = int(2);
        let mut m = scale(q, -e);
        while m >= two {
            e += 1;
            m /= &two;
        }
        while m < Rational::one() {
            e -= 1;
            m *= &two;
        }
        let wp = prec + 16 + (64 - (e.unsigned_abs()).leading_zeros());
        let s = (&m - Rational::one()) / (&m + Rational::one());
        let mut r = atanh_small(&s, wp).scale(&two);
        if e != 0 {
            r = r.add(&ln2(wp).scale(&int(e)));
        }
        r.with_prec(prec)
    }

    pub fn exp_rational(q: &Rational, prec: u32) -> Interval {
        exp_rational(q, prec)
    }

    /// Interval enclosing `pi`, by Machin's formula.
    pub fn pi(prec: u32) -> Interval {
        let wp = prec + 16;
        let a = atan_inverse(5, wp).scale(&int(16));
        let b = atan_inverse(239, wp).scale(&int(4));
        a.sub(&b).with_prec(prec)
    }

    pub fn lo_decimal(&self, digits: usize) -> String {
        format_decimal(&self.lo, digits, false)
    }

    pub fn hi_decimal(&self, digits: usize) -> String {
        format_decimal(&self.hi, digits, true)
    }

    /// Decimal digits implied by the working precision.
    pub fn decimal_digits(&self) -> usize {
        ((self.prec as f64) * std::f64::consts::LOG10_2).floor() as usize
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.decimal_digits().min(40);
        write!(f, "[{}, {}]", self.lo_decimal(d), self.hi_decimal(d))
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let s = 60 - log2_estimate(q);
    let m = scale(q, s).round().to_integer();
    let m = m.to_f64().unwrap_or(f64::NAN);
    if s.abs() < 1000 {
        m * 2f64.powi(-s as i32)
    } else if s > 0 {
        0.0
    } else {
        f64::INFINITY * m.signum()
    }
}

/// Floor (or ceil) of `q^(1/b)` at roughly `prec` bits.
fn root_bound(q: &Rational, b: u32, prec: u32, up: bool) -> Rational {
    if q.is_zero() {
        return Rational::zero();
    }
    if b == 1 {
        return round(q, prec, up);
    }
    // choose s with q * 2^(b s) having about b*(prec+2) bits before the root
    let s = prec as i64 + 2 - log2_estimate(q) / b as i64;
    let scaled = scale(q, s * b as i64);
    let n = if up { scaled.ceil() } else { scaled.floor() }.to_integer();
    let mut r = n.nth_root(b);
    if up && num_traits::pow(r.clone(), b as usize) < n {
        r += 1;
    }
    scale(&Rational::from_integer(r), -s)
}

/// `floor` or `ceil` of `q * 2^wp`.
fn fixed(q: &Rational, wp: u32, up: bool) -> BigInt {
    let s = scale(q, wp as i64);
    if up { s.ceil() } else { s.floor() }.to_integer()
}

fn shr_ceil(a: &BigInt, wp: u32) -> BigInt {
    -((-a) >> wp as usize)
}

fn div_ceil_pos(a: &BigInt, d: i64) -> BigInt {
    let d = BigInt::from(d);
    (a + &d - 1u32) / d
}

fn from_fixed(lo: &BigInt, hi: &BigInt, wp: u32) -> Interval {
    let den = Rational::from_integer(pow2(wp as u64));
    Interval {
        lo: Rational::from_integer(lo.clone()) / &den,
        hi: Rational::from_integer(hi.clone()) / &den,
        prec: wp,
    }
}

/// Enclosure of `sum_j c_j x^(e0 + j step)` for `0 <= x <= 1/2` with positive
/// weights `1/w(j)`, summed in fixed point with a floor chain and a ceil chain.
/// `w` must be increasing with `w(j+1)/w(j) >= 1`, so the tail after a term
/// `t` is at most `t`.
fn positive_series(x: &Rational, wp: u32, e0: u32, step: u32, w: impl Fn(i64) -> i64, cumulative: bool) -> Interval {
    let xl = fixed(x, wp, false);
    let xh = fixed(x, wp, true);
    let mut xs_l = pow2(wp as u64);
    let mut xs_h = pow2(wp as u64);
    for _ in 0..step {
        xs_l = (&xs_l * &xl) >> wp as usize;
        xs_h = shr_ceil(&(&xs_h * &xh), wp);
    }
    let mut pl = pow2(wp as u64);
    let mut ph = pow2(wp as u64);
    for _ in 0..e0 {
        pl = (&pl * &xl) >> wp as usize;
        ph = shr_ceil(&(&ph * &xh), wp);
    }
    // cumulative: the weight divides the running term (as in x^j/j!);
    // otherwise it divides the power only (as in x^(2j+1)/(2j+1)).
    let (mut sl, mut sh) = if cumulative { (pl.clone(), ph.clone()) } else { (&pl / w(0), div_ceil_pos(&ph, w(0))) };
    let mut j: i64 = 1;
    loop {
        pl = (&pl * &xs_l) >> wp as usize;
        ph = shr_ceil(&(&ph * &xs_h), wp);
        let (tl, th) = if cumulative {
            pl = &pl / w(j);
            ph = div_ceil_pos(&ph, w(j));
            (pl.clone(), ph.clone())
        } else {
            (&pl / w(j), div_ceil_pos(&ph, w(j)))
        };
        sl += &tl;
        sh += &th;
        if th <= BigInt::one() {
            sh += 2u32;
            break;
        }
        j += 1;
    }
    from_fixed(&sl, &sh, wp)
}

fn exp_rational(q: &Rational, prec: u32) -> Interval {
    if q.is_zero() {
        return Interval::one(prec);
    }
    let e = log2_estimate(q);
    let k = (e + 2).max(0) as u64;
    let wp = prec + k as u32 + 24;
    let t = scale(q, -(k as i64));
    // exp(|t|) = sum |t|^j / j!
    let mut sum = positive_series(&t.abs(), wp, 0, 1, |j| j.max(1), true);
    if t.is_negative() {
        sum = sum.recip().expect("exp is positive");
    }
    for _ in 0..k {
        sum = sum.sqr();
    }
    sum.with_prec(prec)
}

/// `atanh(s)` for a rational `0 <= s <= 1/3`.
fn atanh_small(s: &Rational, wp: u32) -> Interval {
    if s.is_zero() {
        return Interval::zero(wp);
    }
    let g = wp + 16;
    positive_series(s, g, 1, 2, |j| 2 * j + 1, false).with_prec(wp)
}

/// `atan(1/m)` for an integer `m >= 2`, as the difference of the positive
/// and negative parts of its alternating series.
fn atan_inverse(m: i64, wp: u32) -> Interval {
    let g = wp + 16;
    let x = Rational::new(BigInt::one(), BigInt::from(m));
    let x2 = &x * &x;
    // sum_{j even} x^(4i+1)/(4i+1) minus sum x^(4i+3)/(4i+3)
    let plus = positive_series(&x2, g, 0, 2, |j| 4 * j + 1, false).scale(&x);
    let minus = positive_series(&x2, g, 1, 2, |j| 4 * j + 3, false).scale(&x);
    plus.sub(&minus).with_prec(wp)
}

fn ln2(wp: u32) -> Interval {
    if let Some(v) = LN2.with(|c| c.borrow().get(&wp).cloned()) {
        return v;
    }
    let v = atanh_small(&Rational::new(BigInt::one(), BigInt::from(3)), wp).scale(&int(2));
    LN2.with(|c| c.borrow_mut().insert(wp, v.clone()));
    v
}

/// Ceil of `log2 |q|` for a nonzero integer, used to size working precision.
pub fn bit_length(n: &BigInt) -> u64 {
    n.bits()
}

/// Floor division helper kept here so callers do not need `num_integer`.
pub fn div_floor(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}
