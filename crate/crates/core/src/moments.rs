//! Gaussian-weighted moments of the resonator.
//!
//! With `a = T / log T` and weight `Φ(t/a)`, the four moments are
//!
//! ```text
//! I₁ = ∫_ℝ |R(t)|² Φ(t/a) dt          M₁ = ∫_{T^β}^{T} |R(t)|² Φ(t/a) dt
//! I₂ = ∫_ℝ Re D_Y(t) |R(t)|² Φ(t/a) dt M₂ = ∫_{T^β}^{T} Re D_Y(t) |R(t)|² Φ(t/a) dt
//! ```
//!
//! The whole-line moments expand into pair sums over smooth numbers, each
//! kernel integral being `∫ x^{it} Φ(t/a) dt = a Φ̂(a log x)`. The partial
//! moments are done by quadrature with the exact Euler product.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirpoly::LambdaPolynomial;
use crate::error::{Error, Result};
use crate::resonator::{log_abs_r_squared, ResonatorEntry, ResonatorSpec, TruncatedResonator};
use crate::sum::{compensated_sum, Neumaier};

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Kernel pairs with `a |log(n/m)|` beyond this are dropped; `Φ(40)` is
/// below the smallest normal double.
pub const KERNEL_CUTOFF: f64 = 40.0;

/// Largest `T` accepted by [`m_quadrature`].
pub const MAX_QUADRATURE_T: f64 = 1e6;

/// `Φ(u) = exp(-u²/2)`
pub fn phi(u: f64) -> f64 {
    (-0.5 * u * u).exp()
}

/// `Φ̂(ξ) = ∫ Φ(t) e^{-iξt} dt = √(2π) Φ(ξ)`
pub fn phi_hat(xi: f64) -> f64 {
    SQRT_2PI * phi(xi)
}

/// `a = T / log T`, the Gaussian width.
pub fn gaussian_width(t: f64) -> Result<f64> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::domain(format!("T = {t} must be finite and > 1")));
    }
    Ok(t / t.ln())
}

/// A closed-form moment with a bound on what truncation to `n, m <= Nmax`
/// left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedMoment {
    pub value: f64,
    pub tail_bound: f64,
}

struct PairSums<'a> {
    entries: &'a [ResonatorEntry],
    logs: Vec<f64>,
    a: f64,
    width: f64,
}

impl<'a> PairSums<'a> {
    fn new(trunc: &'a TruncatedResonator, a: f64) -> Self {
        Self {
            entries: &trunc.entries,
            logs: trunc.entries.iter().map(|e| e.log_n).collect(),
            a,
            width: KERNEL_CUTOFF / a,
        }
    }

    /// `Σ_m r(m) a Φ̂(a (log n - log m - shift))` for row `n`.
    fn row(&self, log_n: f64, shift: f64) -> f64 {
        let centre = log_n - shift;
        let lo = self.logs.partition_point(|&l| l < centre - self.width);
        let hi = self.logs.partition_point(|&l| l <= centre + self.width);
        let mut acc = Neumaier::new();
        for e in &self.entries[lo..hi] {
            acc.add(e.r * phi_hat(self.a * (centre - e.log_n)));
        }
        self.a * acc.value()
    }

    /// Per-row sums `r(n) · row(n)` in support order.
    fn rows(&self, shift: f64) -> Vec<f64> {
        self.entries.par_iter().map(|e| e.r * self.row(e.log_n, shift)).collect()
    }

    fn total(&self, shift: f64) -> f64 {
        compensated_sum(self.rows(shift))
    }
}

fn truncation(spec: &ResonatorSpec, nmax: u64) -> Result<TruncatedResonator> {
    if nmax < 1 {
        return Err(Error::domain("Nmax must be at least 1 so that n = 1 is included"));
    }
    TruncatedResonator::new(spec, nmax)
}

/// Bound on `Σ` over pairs with `n > N` or `m > N` of `r(n) r(m) a Φ̂(·)`.
fn dropped_pairs(trunc: &TruncatedResonator, a: f64) -> f64 {
    let total = trunc.partial_r + trunc.tail_r;
    SQRT_2PI * a * trunc.tail_r * (total + trunc.partial_r)
}

/// `I₁` restricted to `n, m <= Nmax`, and a bound for the rest.
pub fn i1_closed(spec: &ResonatorSpec, t: f64, nmax: u64) -> Result<ClosedMoment> {
    let a = gaussian_width(t)?;
    let trunc = truncation(spec, nmax)?;
    let value = PairSums::new(&trunc, a).total(0.0);
    Ok(ClosedMoment { value, tail_bound: dropped_pairs(&trunc, a) })
}

/// `I₂` restricted to `n, m <= Nmax`: every prime power `k <= Y` contributes
/// `Λ(k) k^{-σ} Σ_{n,m} r(n) r(m) a Φ̂(a log(n/(k m)))`.
pub fn i2_closed(spec: &ResonatorSpec, poly: &LambdaPolynomial, t: f64, nmax: u64) -> Result<ClosedMoment> {
    let a = gaussian_width(t)?;
    let trunc = truncation(spec, nmax)?;
    let pairs = PairSums::new(&trunc, a);
    let value = compensated_sum(poly.terms().iter().map(|k| k.coef * pairs.total(k.log_n)));
    let tail_bound = poly.coefficient_sum() * dropped_pairs(&trunc, a);
    Ok(ClosedMoment { value, tail_bound })
}

/// The diagonal restriction: only `k = p <= X` and `n = p k'`, giving
/// `Σ_{p} Λ(p) p^{-σ} r(p) Σ_{k'<=N/p, m<=N} r(k') r(m) a Φ̂(a log(k'/m))`.
/// Every term is also a term of [`i2_closed`], so it never exceeds it.
pub fn i2_restricted(spec: &ResonatorSpec, poly: &LambdaPolynomial, t: f64, nmax: u64) -> Result<f64> {
    let a = gaussian_width(t)?;
    let trunc = truncation(spec, nmax)?;
    let rows = PairSums::new(&trunc, a).rows(0.0);
    Ok(restricted_from_rows(spec, poly, &trunc, &rows))
}

fn restricted_from_rows(
    spec: &ResonatorSpec,
    poly: &LambdaPolynomial,
    trunc: &TruncatedResonator,
    rows: &[f64],
) -> f64 {
    let mut prefix = Vec::with_capacity(rows.len() + 1);
    let mut acc = Neumaier::new();
    prefix.push(0.0);
    for &r in rows {
        acc.add(r);
        prefix.push(acc.value());
    }
    let upto = |bound: u64| prefix[trunc.entries.partition_point(|e| e.n <= bound)];
    compensated_sum(
        poly.terms()
            .iter()
            .filter(|k| k.n as f64 <= spec.x_bound() && k.log_n == k.log_p)
            .map(|p| p.coef * spec.rp() * upto(trunc.nmax / p.n)),
    )
}

/// Composite Simpson values of `M₁` and `M₂` with error estimates from the
/// rule at twice the step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialMoments {
    pub m1: f64,
    pub m2: f64,
    pub m1_error: f64,
    pub m2_error: f64,
    pub step: f64,
    pub intervals: usize,
}

/// Largest step that resolves both `|R|²` and `D_Y`.
pub fn required_step(spec: &ResonatorSpec, poly: &LambdaPolynomial) -> f64 {
    let top = spec.x_bound().max(poly.cutoff() as f64).max(std::f64::consts::E);
    0.1 / top.ln()
}

const QUAD_BLOCK: usize = 65_536;

/// `M₁, M₂` over `[T^β, T]` by composite Simpson with at least
/// `grid_points` intervals (rounded up to a multiple of 4).
pub fn m_quadrature(
    spec: &ResonatorSpec,
    poly: &LambdaPolynomial,
    t: f64,
    beta: f64,
    grid_points: usize,
) -> Result<PartialMoments> {
    let a = gaussian_width(t)?;
    if t > MAX_QUADRATURE_T {
        return Err(Error::Range { what: "T", value: t, limit: MAX_QUADRATURE_T });
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("beta = {beta} outside (0, 1)")));
    }
    let lo = t.powf(beta);
    let intervals = grid_points.max(4).div_ceil(4) * 4;
    let h = (t - lo) / intervals as f64;
    let required = required_step(spec, poly);
    if h > required {
        return Err(Error::Resolution { step: h, required });
    }
    // quick divergence check before the parallel loop
    log_abs_r_squared(lo, spec)?;

    let blocks = (intervals + 1).div_ceil(QUAD_BLOCK);
    let partials: Vec<[f64; 4]> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let k0 = b * QUAD_BLOCK;
            let len = QUAD_BLOCK.min(intervals + 1 - k0);
            let mut re = vec![0.0; len];
            if !poly.is_empty() {
                poly.eval_grid_real_into(lo, h, k0, &mut re).expect("grid step checked above");
            }
            let mut acc = [Neumaier::new(), Neumaier::new(), Neumaier::new(), Neumaier::new()];
            for (i, &d) in re.iter().enumerate() {
                let k = k0 + i;
                let tk = lo + k as f64 * h;
                let f1 = log_abs_r_squared(tk, spec).expect("checked convergent").exp() * phi(tk / a);
                let f2 = d * f1;
                let fine = if k == 0 || k == intervals {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc[0].add(fine * f1);
                acc[1].add(fine * f2);
                if k.is_multiple_of(2) {
                    let coarse = if k == 0 || k == intervals {
                        1.0
                    } else if k % 4 == 2 {
                        4.0
                    } else {
                        2.0
                    };
                    acc[2].add(coarse * f1);
                    acc[3].add(coarse * f2);
                }
            }
            [acc[0].value(), acc[1].value(), acc[2].value(), acc[3].value()]
        })
        .collect();
    let col = |j: usize| compensated_sum(partials.iter().map(|p| p[j]));
    let (m1, m2) = (col(0) * h / 3.0, col(1) * h / 3.0);
    let (c1, c2) = (col(2) * 2.0 * h / 3.0, col(3) * 2.0 * h / 3.0);
    Ok(PartialMoments {
        m1,
        m2,
        m1_error: (m1 - c1).abs() / 15.0,
        m2_error: (m2 - c2).abs() / 15.0,
        step: h,
        intervals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub i1: f64,
    pub i2: f64,
    pub i2_restricted: f64,
    pub m1: f64,
    pub m2: f64,
    pub m1_error: f64,
    pub m2_error: f64,
    /// `r(p) Σ_{p<=X} log p · p^{-σ}`
    pub gain: f64,
    pub ratio_i: f64,
    pub ratio_m: f64,
    pub truncation_nmax: u64,
    /// Bounds `gain·I₁ - I₂` from above for the truncated sums, so that
    /// `I₂ >= gain·I₁ - tail_bound` always holds.
    pub tail_bound: f64,
    /// Bounds for the pairs beyond `Nmax` in `I₁` and `I₂`.
    pub i1_tail: f64,
    pub i2_tail: f64,
}

/// All moments at one parameter point. `M₁, M₂` are skipped (NaN) when
/// `grid_points` is zero.
pub fn moment_report(
    spec: &ResonatorSpec,
    poly: &LambdaPolynomial,
    t: f64,
    beta: f64,
    nmax: u64,
    grid_points: usize,
) -> Result<MomentReport> {
    let a = gaussian_width(t)?;
    let trunc = truncation(spec, nmax)?;
    let pairs = PairSums::new(&trunc, a);
    let rows = pairs.rows(0.0);
    let i1 = compensated_sum(rows.iter().copied());
    let i2 = compensated_sum(poly.terms().iter().map(|k| k.coef * pairs.total(k.log_n)));
    let i2_restricted = restricted_from_rows(spec, poly, &trunc, &rows);
    let gain = crate::resonator::resonance_gain(spec, poly.sigma());

    // gain·I₁ - restricted splits into rows k > N/p (each row <= a√(2π) Σ r)
    // and primes p <= X that D_Y does not reach.
    let row_cap = SQRT_2PI * a * trunc.partial_r;
    let mut tail = Neumaier::new();
    let in_poly = |p: u64| poly.cutoff() >= p;
    for (&p, &lp) in spec.primes().iter().zip(spec.log_primes()) {
        let c = lp * (-poly.sigma() * lp).exp() * spec.rp();
        if in_poly(p) {
            tail.add(c * row_cap * trunc.mass_between((trunc.nmax / p) as f64, trunc.nmax as f64));
        } else {
            tail.add(c * i1);
        }
    }
    let tail_bound = tail.value() * (1.0 + 1e-12) + 1e-12 * gain * i1;

    let (m1, m2, m1_error, m2_error) = if grid_points > 0 {
        let q = m_quadrature(spec, poly, t, beta, grid_points)?;
        (q.m1, q.m2, q.m1_error, q.m2_error)
    } else {
        (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
    };
    let i1_tail = dropped_pairs(&trunc, a);
    Ok(MomentReport {
        i1,
        i2,
        i2_restricted,
        m1,
        m2,
        m1_error,
        m2_error,
        gain,
        ratio_i: i2 / i1,
        ratio_m: m2 / m1,
        truncation_nmax: nmax,
        tail_bound,
        i1_tail,
        i2_tail: poly.coefficient_sum() * i1_tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numthy::{sieve, PrimeTable};
    use proptest::prelude::*;

    fn table() -> PrimeTable {
        sieve(10_000).unwrap()
    }

    fn zero_spec(t: &PrimeTable) -> ResonatorSpec {
        ResonatorSpec::new(10.0, 1.0, t).unwrap()
    }

    #[test]
    fn kernel_values() {
        assert_eq!(phi(0.0), 1.0);
        assert!((phi_hat(0.0) - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
        for u in [0.1, 1.0, 3.3, 30.0] {
            assert_eq!(phi(u), phi(-u));
        }
        assert_eq!(phi(KERNEL_CUTOFF), 0.0);
    }

    #[test]
    fn phi_hat_is_the_fourier_transform() {
        // ∫ e^{-t²/2} cos(ξt) dt by Simpson on [-12, 12]
        for xi in [0.0, 0.7, 2.5] {
            let n = 4800;
            let h = 24.0 / n as f64;
            let mut s = 0.0;
            for k in 0..=n {
                let tk = -12.0 + k as f64 * h;
                let w = if k == 0 || k == n {
                    1.0
                } else if k % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                s += w * phi(tk) * (xi * tk).cos();
            }
            assert!((s * h / 3.0 - phi_hat(xi)).abs() < 1e-12);
        }
    }

    #[test]
    fn i1_with_vanishing_coefficients() {
        let t = table();
        let m = i1_closed(&zero_spec(&t), 1e4, 100).unwrap();
        let expect = SQRT_2PI * 1e4 / 1e4f64.ln();
        assert!((m.value - expect).abs() < 1e-12 * expect);
        assert!(m.tail_bound < 1e-12 * expect);
        assert!(i1_closed(&zero_spec(&t), 1e4, 0).is_err());
    }

    #[test]
    fn i1_dominates_its_diagonal() {
        let t = table();
        for (x, sigma, tt) in [(5.0, 0.8, 1e4), (13.0, 0.7, 1e3), (30.0, 0.9, 1e5)] {
            let spec = ResonatorSpec::new(x, sigma, &t).unwrap();
            let trunc = TruncatedResonator::new(&spec, 10_000).unwrap();
            let diag = SQRT_2PI * gaussian_width(tt).unwrap() * trunc.partial_r2;
            let i1 = i1_closed(&spec, tt, 10_000).unwrap().value;
            assert!(i1 >= diag * (1.0 - 1e-13), "{i1} < {diag}");
        }
    }

    /// `∫ |Σ_{n<=N} r(n) n^{-it}|² Φ(t/a) dt` by brute-force quadrature.
    fn i1_by_quadrature(spec: &ResonatorSpec, tt: f64, nmax: u64) -> f64 {
        let a = gaussian_width(tt).unwrap();
        let trunc = TruncatedResonator::new(spec, nmax).unwrap();
        let half_len = 10.0 * a;
        let n = 2 * ((half_len / 0.004) as usize / 2);
        let h = half_len / n as f64;
        let mut acc = Neumaier::new();
        for k in 0..=n {
            let tk = k as f64 * h;
            let (mut re, mut im) = (0.0, 0.0);
            for e in &trunc.entries {
                let (s, c) = (tk * e.log_n).sin_cos();
                re += e.r * c;
                im -= e.r * s;
            }
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc.add(w * (re * re + im * im) * phi(tk / a));
        }
        // even integrand
        2.0 * acc.value() * h / 3.0
    }

    #[test]
    fn i1_matches_quadrature() {
        let t = table();
        let spec = ResonatorSpec::new(5.0, 0.8, &t).unwrap();
        let closed = i1_closed(&spec, 1e4, 10_000).unwrap().value;
        let quad = i1_by_quadrature(&spec, 1e4, 10_000);
        assert!((closed / quad - 1.0).abs() < 1e-3, "{closed} vs {quad}");
    }

    #[test]
    fn i2_examples() {
        let t = table();
        let spec = ResonatorSpec::new(5.0, 0.8, &t).unwrap();
        let empty = LambdaPolynomial::build(1, 0.8, &t).unwrap();
        assert_eq!(i2_closed(&spec, &empty, 1e4, 1000).unwrap().value, 0.0);

        let poly = LambdaPolynomial::build(10, 0.8, &t).unwrap();
        let a = gaussian_width(1e4).unwrap();
        let expect: f64 = poly.terms().iter().map(|k| k.coef * a * phi_hat(a * k.log_n)).sum();
        let got = i2_closed(&zero_spec(&t), &poly, 1e4, 1000).unwrap().value;
        assert!((got - expect).abs() <= 1e-300_f64.max(expect.abs() * 1e-12));
    }

    #[test]
    fn i2_brackets() {
        let t = table();
        for (x, sigma, y, tt) in [(5.0, 0.8, 50, 1e4), (13.0, 0.7, 30, 1e3), (7.0, 0.6, 5, 1e4)] {
            let spec = ResonatorSpec::new(x, sigma, &t).unwrap();
            let poly = LambdaPolynomial::build(y, sigma, &t).unwrap();
            let rep = moment_report(&spec, &poly, tt, 0.5, 5000, 0).unwrap();
            assert!(rep.i2 >= rep.i2_restricted * (1.0 - 1e-12));
            assert!(rep.i2 >= rep.gain * rep.i1 - rep.tail_bound, "{x}: {rep:?}");
            assert!(rep.i2_restricted >= rep.gain * rep.i1 - rep.tail_bound);
            assert!(rep.i1 > 0.0);
        }
    }

    #[test]
    fn m_with_vanishing_coefficients() {
        let t = table();
        let empty = LambdaPolynomial::build(1, 0.8, &t).unwrap();
        let tt = 1e4;
        let q = m_quadrature(&zero_spec(&t), &empty, tt, 0.5, 400_000).unwrap();
        assert_eq!(q.m2, 0.0);
        // ∫_{100}^{T} Φ(t/a) dt = a √(π/2) (erf(T/(a√2)) - erf(100/(a√2)))
        let a = gaussian_width(tt).unwrap();
        let erf_diff = erf_series(tt / (a * 2f64.sqrt())) - erf_series(100.0 / (a * 2f64.sqrt()));
        let expect = a * (std::f64::consts::PI / 2.0).sqrt() * erf_diff;
        assert!((q.m1 - expect).abs() < 1e-9 * expect, "{} {expect}", q.m1);
    }

    /// Maclaurin series of erf for |x| < 2; beyond 6.5 erf is 1 to 1e-19.
    fn erf_series(x: f64) -> f64 {
        if x > 6.5 {
            return 1.0;
        }
        assert!(x.abs() < 2.0);
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            sum += term / (2 * n + 1) as f64;
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn m_is_self_convergent_and_below_i() {
        let t = table();
        let spec = ResonatorSpec::new(5.0, 0.8, &t).unwrap();
        let poly = LambdaPolynomial::build(50, 0.8, &t).unwrap();
        let tt = 1e4;
        let n = 400_000;
        let q1 = m_quadrature(&spec, &poly, tt, 0.5, n).unwrap();
        let q2 = m_quadrature(&spec, &poly, tt, 0.5, 2 * n).unwrap();
        assert!((q1.m1 / q2.m1 - 1.0).abs() < 1e-4);
        assert!((q1.m2 / q2.m2 - 1.0).abs() < 1e-4);
        let i1 = i1_closed(&spec, tt, 1_000_000).unwrap();
        assert!(q1.m1 <= i1.value + i1.tail_bound);

        // the maximum of Re D_Y over a fine grid is at least M₂/M₁
        let lo = tt.sqrt();
        let steps = 2_000_000;
        let mut grid = vec![0.0; steps + 1];
        poly.eval_grid_real_into(lo, (tt - lo) / steps as f64, 0, &mut grid).unwrap();
        let max = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(max >= q1.m2 / q1.m1 - 1e-6);
    }

    #[test]
    fn m_rejects_coarse_steps_and_large_t() {
        let t = table();
        let spec = ResonatorSpec::new(5.0, 0.8, &t).unwrap();
        let poly = LambdaPolynomial::build(50, 0.8, &t).unwrap();
        assert!(matches!(m_quadrature(&spec, &poly, 1e4, 0.5, 1000), Err(Error::Resolution { .. })));
        assert!(matches!(m_quadrature(&spec, &poly, 1e7, 0.5, 1000), Err(Error::Range { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn dropping_pairs_only_decreases_i1(x in 2.0f64..14.0, sigma in 0.6f64..0.95, n1 in 50u64..400, extra in 1u64..400) {
            let t = sieve(100).unwrap();
            let spec = ResonatorSpec::new(x, sigma, &t).unwrap();
            let small = i1_closed(&spec, 500.0, n1).unwrap();
            let big = i1_closed(&spec, 500.0, n1 + extra).unwrap();
            prop_assert!(big.value >= small.value * (1.0 - 1e-13));
            prop_assert!(big.value <= small.value + small.tail_bound * (1.0 + 1e-9) + 1e-9);
        }
    }
}
