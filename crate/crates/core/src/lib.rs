//! Exact arithmetic toolkit for a three-parameter family of hypergeometric
//! Laurent series
//!
//! ```text
//! f(z) = sum_k  prod_{i=1..k} (alpha*i - delta) / (gamma + 2)_k  *  z^-(k+1)
//! ```
//!
//! The crate builds explicit Padé approximants of type II for `f`, checks the
//! algebraic identities they satisfy, tracks their growth through an effective
//! Poincaré–Perron analysis, and turns all of that into certified upper bounds
//! for the irrationality exponent of `f(beta)`.
//!
//! Everything that decides a hypothesis is exact: rationals, numbers in a real
//! quadratic field, or outward-rounded intervals that are refined until the
//! decision is unambiguous.

pub mod error;
pub mod exactmath;
pub mod interval;
pub mod measure;
pub mod pade;
pub mod recurrence;
pub mod series;
pub mod simultaneous;

pub use error::{Error, Result};
pub use exactmath::Rational;
pub use interval::Interval;
