//! Numeric toolkit for large values of `-ζ'/ζ(σ + it)` and `-L'/L(σ, χ)` just
//! left of the 1-line, detected with a long resonator.
//!
//! The crate is organised bottom-up:
//!
//! * [`numthy`] sieves primes and evaluates `Λ(n)`, `ϑ(x)`, `π(x)` and smooth numbers.
//! * [`zetaref`] is an Euler–Maclaurin reference for `ζ`, `ζ'` and `ζ'/ζ`.
//! * [`dirpoly`] holds the truncated prime-power polynomial `Σ_{n≤Y} Λ(n) n^{-s}`.
//! * [`resonator`] builds the completely multiplicative resonator and its Euler product.
//! * [`moments`] evaluates the Gaussian-weighted moments `I₁, I₂, M₁, M₂`.
//! * [`charmod`] realises the characters mod a prime and the character moments.
//! * [`search`] scans, samples and refines extreme values.

// NaN must fail range checks, hence `!(x > 0.0)` style comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod charmod;
pub mod dirpoly;
pub mod error;
pub mod moments;
pub mod numthy;
pub mod resonator;
pub mod rng;
pub mod search;
pub mod sum;
pub mod zetaref;

mod ddouble;

pub use num_complex::Complex64;

pub use charmod::{CharacterTable, Chi};
pub use dirpoly::{Character, LambdaPolynomial};
pub use error::{Error, Result};
pub use moments::MomentReport;
pub use numthy::PrimeTable;
pub use resonator::{Parameters, ResonatorSpec, Scale};
pub use search::{ExtremeRecord, Method, ThresholdSpec};
pub use zetaref::ComplexPoint;
