//! Reference values of `ζ(s)`, `ζ'(s)` and `ζ'/ζ(s)` for `Re s >= 0.55`.
//!
//! Euler–Maclaurin summation with Bernoulli corrections through `B₁₀`. The
//! derivative is the term-wise derivative of the same expansion. The cutoff
//! `N` starts at `max(10, 2|t|)` and doubles until the remainder estimate
//! meets the requested accuracy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ddouble::{ln_u64, reduced_angle};
use crate::error::{Error, Result};
use crate::sum::ComplexNeumaier;

/// `s = σ + it`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub sigma: f64,
    pub t: f64,
}

impl ComplexPoint {
    pub fn new(sigma: f64, t: f64) -> Self {
        Self { sigma, t }
    }

    fn as_complex(self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ZetaPair {
    pub zeta: Complex64,
    pub dzeta: Complex64,
    /// Bound on `|ζ_computed - ζ|`.
    pub zeta_error: f64,
    /// Bound on `|ζ'_computed - ζ'|`.
    pub dzeta_error: f64,
    /// Euler–Maclaurin cutoff used.
    pub cutoff: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct LogDerivative {
    pub value: Complex64,
    pub error: f64,
    pub zeta_modulus: f64,
}

pub const MIN_SIGMA: f64 = 0.55;
pub const MAX_ABS_T: f64 = 1e8;
pub const MIN_TARGET: f64 = 1e-12;
/// Largest Euler–Maclaurin cutoff attempted before giving up.
const MAX_CUTOFF: u64 = 1 << 29;
/// Beyond this height phases are always built from double-double logarithms.
const EXTENDED_T: f64 = 1e6;

/// `B_{2k} / (2k)!` for `k = 1..=6`; the sixth entry only feeds the remainder.
const BERNOULLI_OVER_FACT: [f64; 6] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
];
const CORRECTIONS: usize = 5;

fn check_point(s: ComplexPoint, target: f64) -> Result<()> {
    if !(s.sigma >= MIN_SIGMA) || !s.sigma.is_finite() {
        return Err(Error::domain(format!("sigma = {} below {MIN_SIGMA}", s.sigma)));
    }
    if !(s.t.abs() <= MAX_ABS_T) {
        return Err(Error::Range { what: "|t|", value: s.t.abs(), limit: MAX_ABS_T });
    }
    if !(target >= MIN_TARGET) {
        return Err(Error::domain(format!("target error {target:e} below {MIN_TARGET:e}")));
    }
    if s.sigma == 1.0 && s.t == 0.0 {
        return Err(Error::domain("pole of zeta at s = 1"));
    }
    Ok(())
}

/// `n^{-s}` and `log n`, with the phase carried in extended precision when asked.
#[inline]
fn power_term(n: u64, s: ComplexPoint, extended: bool) -> (Complex64, f64) {
    let (l_hi, l_lo) = if extended {
        let l = ln_u64(n);
        (l.hi, l.lo)
    } else {
        ((n as f64).ln(), 0.0)
    };
    let mag = (-s.sigma * l_hi).exp();
    let theta = reduced_angle(s.t, l_hi, l_lo);
    let (sin, cos) = theta.sin_cos();
    (Complex64::new(mag * cos, -mag * sin), l_hi)
}

struct Tail {
    zeta: Complex64,
    dzeta: Complex64,
    remainder: f64,
    dremainder: f64,
}

/// Everything from `n = N` on: the integral, the half term and the Bernoulli
/// corrections, plus a bound for what is left.
fn tail(s: ComplexPoint, n_cut: u64, extended: bool) -> Tail {
    let sc = s.as_complex();
    let one = Complex64::new(1.0, 0.0);
    let (n_pow, ln_n) = power_term(n_cut, s, extended); // N^{-s}
    let nf = n_cut as f64;
    let n_one_minus = n_pow * nf; // N^{1-s}
    let sm1 = sc - one;

    let mut zeta = n_one_minus / sm1 + n_pow * 0.5;
    let mut dzeta = -n_one_minus * ln_n / sm1 - n_one_minus / (sm1 * sm1) - n_pow * (0.5 * ln_n);

    // T_k = c_k · s(s+1)…(s+2k-2) · N^{-s-2k+1}
    let mut poly = sc; // s(s+1)...(s+2k-2), starts at k = 1
    let mut dlog_poly = one / sc; // Σ 1/(s+j)
    let mut npow = n_pow / nf; // N^{-s-1}
    let inv_n2 = 1.0 / (nf * nf);
    let mut last = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for (k, &c) in BERNOULLI_OVER_FACT.iter().enumerate() {
        let term = poly * npow * c;
        let dterm = term * (dlog_poly - ln_n);
        if k < CORRECTIONS {
            zeta += term;
            dzeta += dterm;
        } else {
            last = (term, dterm);
        }
        // extend the rising product by (s+2k-1)(s+2k)
        let j1 = sc + (2 * k + 1) as f64;
        let j2 = sc + (2 * k + 2) as f64;
        poly = poly * j1 * j2;
        dlog_poly += one / j1 + one / j2;
        npow *= inv_n2;
    }
    // Remainder after B₁₀: |T₆|·|s+11|/(σ+11).
    let factor = (sc + 11.0).norm() / (s.sigma + 11.0);
    let remainder = last.0.norm() * factor;
    let dremainder = (last.1.norm() + last.0.norm()) * factor;
    Tail { zeta, dzeta, remainder, dremainder }
}

fn evaluate(s: ComplexPoint, n_cut: u64, extended: bool) -> ZetaPair {
    let mut z = ComplexNeumaier::new();
    let mut dz = ComplexNeumaier::new();
    let mut abs_sum = 0.0;
    let mut abs_dsum = 0.0;
    z.add(Complex64::new(1.0, 0.0));
    abs_sum += 1.0;
    for n in 2..n_cut {
        let (term, ln_n) = power_term(n, s, extended);
        z.add(term);
        dz.add(-term * ln_n);
        let m = term.norm();
        abs_sum += m;
        abs_dsum += m * ln_n;
    }
    let tl = tail(s, n_cut, extended);
    let ln_n = (n_cut as f64).ln();
    // Per-term rounding: a few ulps in magnitude, plus the phase error from
    // the rounded logarithm (t·ulp(log n)) when it is only double precision.
    let phase_err = if extended { 0.0 } else { s.t.abs() * ln_n * f64::EPSILON };
    let per_term = 4.0 * f64::EPSILON + phase_err;
    ZetaPair {
        zeta: z.value() + tl.zeta,
        dzeta: dz.value() + tl.dzeta,
        zeta_error: tl.remainder + abs_sum * per_term,
        dzeta_error: tl.dremainder + abs_dsum * per_term,
        cutoff: n_cut,
    }
}

/// `(ζ(s), ζ'(s))` with both errors estimated below `target_abs_error`.
pub fn zeta_and_derivative(s: ComplexPoint, target_abs_error: f64) -> Result<ZetaPair> {
    check_point(s, target_abs_error)?;
    let mut n_cut = (2.0 * s.t.abs()).ceil().max(10.0) as u64;
    let mut extended = s.t.abs() > EXTENDED_T;
    loop {
        let pair = evaluate(s, n_cut, extended);
        let worst = pair.zeta_error.max(pair.dzeta_error);
        if worst <= target_abs_error {
            return Ok(pair);
        }
        let tl = tail(s, n_cut, extended);
        if tl.remainder.max(tl.dremainder) <= target_abs_error / 4.0 {
            // the truncation is fine, only rounding is in the way
            if extended {
                return Err(Error::Accuracy { requested: target_abs_error, achieved: worst });
            }
            extended = true;
            continue;
        }
        if n_cut >= MAX_CUTOFF {
            return Err(Error::Accuracy { requested: target_abs_error, achieved: worst });
        }
        n_cut *= 2;
    }
}

/// `ζ'/ζ(s)` with a propagated error bound.
///
/// Fails with [`Error::NearZero`] when `|ζ(s)| < 10·target_abs_error`.
pub fn log_deriv_zeta(s: ComplexPoint, target_abs_error: f64) -> Result<LogDerivative> {
    let pair = zeta_and_derivative(s, target_abs_error)?;
    let modulus = pair.zeta.norm();
    if modulus < 10.0 * target_abs_error {
        return Err(Error::NearZero { modulus });
    }
    let value = pair.dzeta / pair.zeta;
    let error = (pair.dzeta_error + value.norm() * pair.zeta_error) / (modulus - pair.zeta_error);
    Ok(LogDerivative { value, error, zeta_modulus: modulus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numthy::sieve;
    use std::f64::consts::PI;

    #[test]
    fn zeta_two_is_basel() {
        let v = zeta_and_derivative(ComplexPoint::new(2.0, 0.0), 1e-12).unwrap();
        assert!((v.zeta.re - PI * PI / 6.0).abs() < 1e-13);
        assert!(v.zeta.im.abs() < 1e-15);
    }

    #[test]
    fn zeta_prime_two_against_direct_sum() {
        // -ζ'(2) = Σ log n / n²; the tail beyond N lies between the
        // integrals of log x / x² from N+1 and from N.
        let n_max = 10_000_000u64;
        let partial = crate::sum::compensated_sum((2..=n_max).map(|n| {
            let x = n as f64;
            x.ln() / (x * x)
        }));
        let tail_hi = ((n_max as f64).ln() + 1.0) / n_max as f64;
        let tail_lo = (((n_max + 1) as f64).ln() + 1.0) / (n_max + 1) as f64;
        let v = zeta_and_derivative(ComplexPoint::new(2.0, 0.0), 1e-12).unwrap();
        let minus = -v.dzeta.re;
        assert!(minus >= partial + tail_lo - 1e-11 && minus <= partial + tail_hi + 1e-11);
        assert!((v.dzeta.re + 0.937_548_254_315_843_8).abs() < 1e-12);
    }

    #[test]
    fn log_derivative_at_two_against_mangoldt_series() {
        let table = sieve(10_000_000).unwrap();
        let mut acc = crate::sum::Neumaier::new();
        for (n, lp) in table.prime_powers(10_000_000).unwrap() {
            let x = n as f64;
            acc.add(lp / (x * x));
        }
        // Σ_{n>N} Λ(n)/n² <= 1.04·Σ_{n>N} log n/n² < 1.04 (log N + 1)/N
        let bound = 1.04 * ((1e7f64).ln() + 1.0) / 1e7;
        let v = log_deriv_zeta(ComplexPoint::new(2.0, 0.0), 1e-12).unwrap();
        let gap = -v.value.re - acc.value();
        assert!(gap >= -1e-11 && gap <= bound, "gap {gap:e}");
        assert!(v.value.im.abs() < 1e-15);
    }

    #[test]
    fn real_on_real_axis() {
        for sigma in [1.2, 1.5, 3.0] {
            let v = log_deriv_zeta(ComplexPoint::new(sigma, 0.0), 1e-12).unwrap();
            assert_eq!(v.value.im, 0.0);
        }
    }

    #[test]
    fn conjugate_symmetry_is_exact() {
        for &(sigma, t) in &[(0.6, 14.0), (0.98, 321.25), (1.5, 1000.0), (2.0, 7.5)] {
            let a = log_deriv_zeta(ComplexPoint::new(sigma, t), 1e-10).unwrap();
            let b = log_deriv_zeta(ComplexPoint::new(sigma, -t), 1e-10).unwrap();
            assert_eq!(a.value.re, b.value.re);
            assert_eq!(a.value.im, -b.value.im);
        }
    }

    #[test]
    fn against_frozen_mpmath_values() {
        // mpmath.zeta(s) at 30 digits
        let cases = [
            (0.98, 500.0, (0.798_790_304_915_352_2, -0.797_780_164_160_294_3)),
            (0.6, 100.0, (2.363_697_874_792_86, -0.037_221_942_935_475_49)),
        ];
        for (sigma, t, (re, im)) in cases {
            let v = zeta_and_derivative(ComplexPoint::new(sigma, t), 1e-12).unwrap();
            assert!((v.zeta.re - re).abs() < 1e-11, "{} vs {re}", v.zeta.re);
            assert!((v.zeta.im - im).abs() < 1e-11, "{} vs {im}", v.zeta.im);
        }
    }

    #[test]
    fn mangoldt_series_at_three_fifty() {
        let table = sieve(1_000_000).unwrap();
        let mut acc = crate::sum::ComplexNeumaier::new();
        for (n, lp) in table.prime_powers(1_000_000).unwrap() {
            let x = n as f64;
            let mag = lp * x.powf(-3.0);
            let th = 50.0 * x.ln();
            acc.add(Complex64::new(mag * th.cos(), -mag * th.sin()));
        }
        let v = log_deriv_zeta(ComplexPoint::new(3.0, 50.0), 1e-12).unwrap();
        assert!((v.value + acc.value()).norm() < 1e-4);
    }

    #[test]
    fn tail_bound_in_absolute_convergence_regime() {
        let table = sieve(1000).unwrap();
        for &(sigma, t) in &[(2.0, 3.0), (2.5, 40.0), (3.0, 123.0)] {
            let y = 1000u64;
            let mut acc = crate::sum::ComplexNeumaier::new();
            for (n, lp) in table.prime_powers(y).unwrap() {
                let x = n as f64;
                let mag = lp * x.powf(-sigma);
                let th = t * x.ln();
                acc.add(Complex64::new(mag * th.cos(), -mag * th.sin()));
            }
            let v = log_deriv_zeta(ComplexPoint::new(sigma, t), 1e-12).unwrap();
            let bound = 2.0 * 2f64.powf(-sigma) * (y as f64).powf(1.0 - sigma) * sigma / (sigma - 1.0);
            assert!((v.value + acc.value()).norm() <= bound);
        }
    }

    #[test]
    fn extended_phase_path_agrees_with_double_path() {
        let s = ComplexPoint::new(1.2, 2_000.0);
        let a = evaluate(s, 8_000, false);
        let b = evaluate(s, 8_000, true);
        assert!((a.zeta - b.zeta).norm() < 1e-11);
        assert!((a.dzeta - b.dzeta).norm() < 1e-10);
    }

    #[test]
    fn domain_errors() {
        assert!(zeta_and_derivative(ComplexPoint::new(0.5, 10.0), 1e-8).is_err());
        assert!(zeta_and_derivative(ComplexPoint::new(1.0, 0.0), 1e-8).is_err());
        assert!(zeta_and_derivative(ComplexPoint::new(2.0, 2e8), 1e-8).is_err());
        assert!(zeta_and_derivative(ComplexPoint::new(2.0, 1.0), 1e-13).is_err());
    }

    #[test]
    fn near_zero_is_reported() {
        // first nontrivial zero 0.5 + 14.134725141734693i; at σ = 0.55 the
        // modulus is about 0.039
        let s = ComplexPoint::new(0.55, 14.134_725_141_734_693);
        let err = log_deriv_zeta(s, 0.01).unwrap_err();
        assert!(matches!(err, Error::NearZero { .. }), "{err:?}");
    }
}
