//! The long resonator `R(t) = Π_{p<=X} (1 - r_p p^{-it})^{-1}` with the
//! completely multiplicative coefficients `r(p) = 1 - X^{σ_A - 1}` for
//! `p <= X` and `r(p) = 0` beyond, and the experiment parameters that
//! determine `σ_A`, `X` and `Y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numthy::{smooth_numbers_over, PrimeTable, SmoothNumber};
use crate::sum::Neumaier;

/// Default `E` in `(log T)^{-E}`, a little below 18.
pub const DEFAULT_E: f64 = 17.9;

/// Cap on the default `Y` when `(log T)^{20/ε}` is astronomically large.
pub const DEFAULT_Y_CAP: u64 = 1_000_000;

/// A scale `T` (or a modulus `q`) carried by its natural logarithm, so that
/// heights such as `10^{10^4}` are representable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    log: f64,
}

impl Scale {
    pub fn from_value(value: f64) -> Result<Self> {
        if !(value > 1.0) || !value.is_finite() {
            return Err(Error::domain(format!("scale {value} must be a finite number > 1")));
        }
        Ok(Self { log: value.ln() })
    }

    pub fn from_log(log: f64) -> Result<Self> {
        if !(log > 0.0) || !log.is_finite() {
            return Err(Error::domain(format!("log of scale {log} must be positive and finite")));
        }
        Ok(Self { log })
    }

    /// `T` itself; infinite when it overflows.
    pub fn value(&self) -> f64 {
        self.log.exp()
    }

    /// `log T`
    pub fn log(&self) -> f64 {
        self.log
    }

    /// `log₂ T = log log T`
    pub fn loglog(&self) -> f64 {
        self.log.ln()
    }

    /// `log₃ T = log log log T`
    pub fn logloglog(&self) -> f64 {
        self.loglog().ln()
    }

    /// `f(T) = exp(-log₂ T) = 1/log T`
    pub fn f_value(&self) -> f64 {
        (-self.loglog()).exp()
    }

    /// `T^β`
    pub fn power(&self, beta: f64) -> f64 {
        (beta * self.log).exp()
    }

    /// `σ_A = 1 - A / log₂ T`
    pub fn sigma_a(&self, a: f64) -> f64 {
        1.0 - a / self.loglog()
    }

    /// `X = κ log T log₂ T`
    pub fn x_bound(&self, kappa: f64) -> f64 {
        kappa * self.log * self.loglog()
    }
}

/// Whether the parameters describe a height `T` or a prime modulus `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Zeta,
    Character,
}

/// The resolved experiment tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub side: Side,
    pub scale: Scale,
    pub beta: f64,
    pub a: f64,
    pub epsilon: f64,
    pub kappa: f64,
    /// Polynomial cutoff `Y` in use.
    pub y_cutoff: u64,
    /// `log` of the formula value `(log T)^{20/ε}`.
    pub log_y_formula: f64,
    /// Smoothness bound `X`.
    pub x_bound: f64,
    /// Threshold offset `x`, when set.
    pub x_offset: Option<f64>,
    pub e_exponent: f64,
    pub sigma_a: f64,
}

impl Parameters {
    /// Parameters on the zeta side. Requires `log₂ T > 2A` so that
    /// `σ_A ∈ (1/2, 1)`, and `ε ∈ (0, σ_A - 1/2)`.
    pub fn for_height(scale: Scale, a: f64, beta: f64, epsilon: f64, kappa: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::domain(format!("A = {a} must be positive")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::domain(format!("beta = {beta} outside (0, 1)")));
        }
        if !(scale.loglog() > 2.0 * a) {
            return Err(Error::domain(format!(
                "log log T = {} must exceed 2A = {} for sigma_A in (1/2, 1)",
                scale.loglog(),
                2.0 * a
            )));
        }
        let sigma_a = scale.sigma_a(a);
        Self::finish(Side::Zeta, scale, a, beta, epsilon, kappa, sigma_a)
    }

    /// Parameters on the character side (`β = 0`). Only `σ_A > 0` is
    /// enforced; see [`Parameters::in_critical_regime`].
    pub fn for_modulus(q: u64, a: f64, epsilon: f64, kappa: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::domain(format!("A = {a} must be positive")));
        }
        let scale = Scale::from_value(q as f64)?;
        let sigma_a = modulus_sigma(q, a)?;
        Self::finish(Side::Character, scale, a, 0.0, epsilon, kappa, sigma_a)
    }

    fn finish(side: Side, scale: Scale, a: f64, beta: f64, epsilon: f64, kappa: f64, sigma_a: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::domain(format!("kappa = {kappa} must be positive")));
        }
        if sigma_a > 0.5 && !(epsilon > 0.0 && epsilon < sigma_a - 0.5) {
            return Err(Error::domain(format!(
                "epsilon = {epsilon} outside (0, sigma_A - 1/2) = (0, {})",
                sigma_a - 0.5
            )));
        }
        if !(epsilon > 0.0) {
            return Err(Error::domain(format!("epsilon = {epsilon} must be positive")));
        }
        let log_y_formula = 20.0 / epsilon * scale.loglog();
        let y_cutoff = if log_y_formula < (DEFAULT_Y_CAP as f64).ln() {
            log_y_formula.exp().floor().max(2.0) as u64
        } else {
            DEFAULT_Y_CAP
        };
        Ok(Self {
            side,
            scale,
            beta,
            a,
            epsilon,
            kappa,
            y_cutoff,
            log_y_formula,
            x_bound: scale.x_bound(kappa),
            x_offset: None,
            e_exponent: DEFAULT_E,
            sigma_a,
        })
    }

    pub fn with_y(mut self, y: u64) -> Self {
        self.y_cutoff = y;
        self
    }

    pub fn with_x_bound(mut self, x: f64) -> Self {
        self.x_bound = x;
        self
    }

    pub fn with_offset(mut self, x: f64) -> Self {
        self.x_offset = Some(x);
        self
    }

    pub fn with_e(mut self, e: f64) -> Self {
        self.e_exponent = e;
        self
    }

    /// `σ_A ∈ (1/2, 1)`, the range the asymptotic statements address.
    pub fn in_critical_regime(&self) -> bool {
        self.sigma_a > 0.5 && self.sigma_a < 1.0
    }

    /// `β + 2Aκ < 1`
    pub fn kappa1_holds(&self) -> bool {
        kappa1_margin(self.beta, self.a, self.kappa) > 0.0
    }

    /// `2Aκ + 3(1-σ_A+ε)/(2-σ_A+ε) < 1`
    pub fn kappa2_holds(&self) -> bool {
        kappa2_margin(self.a, self.kappa, self.sigma_a, self.epsilon) > 0.0
    }

    /// With `enforce`, reject parameters violating either κ constraint.
    pub fn validate(&self, enforce: bool) -> Result<()> {
        if enforce {
            if !self.kappa1_holds() {
                return Err(Error::Infeasible { constraint: "kappa1: beta + 2 A kappa < 1" });
            }
            if !self.kappa2_holds() {
                return Err(Error::Infeasible {
                    constraint: "kappa2: 2 A kappa + 3(1-sigma_A+eps)/(2-sigma_A+eps) < 1",
                });
            }
        }
        Ok(())
    }
}

/// `1 - β - 2Aκ`
pub fn kappa1_margin(beta: f64, a: f64, kappa: f64) -> f64 {
    1.0 - beta - 2.0 * a * kappa
}

/// `1 - 2Aκ - 3(1-σ+ε)/(2-σ+ε)`
pub fn kappa2_margin(a: f64, kappa: f64, sigma_a: f64, epsilon: f64) -> f64 {
    1.0 - 2.0 * a * kappa - zero_density_exponent(sigma_a, epsilon)
}

/// `3(1-σ+ε)/(2-σ+ε)`, the exponent of the exceptional set.
pub fn zero_density_exponent(sigma_a: f64, epsilon: f64) -> f64 {
    3.0 * (1.0 - sigma_a + epsilon) / (2.0 - sigma_a + epsilon)
}

/// `σ_A = 1 - A / log log q`, rejected only when it is not positive.
pub fn modulus_sigma(q: u64, a: f64) -> Result<f64> {
    let scale = Scale::from_value(q as f64)?;
    if !(scale.loglog() > 0.0) {
        return Err(Error::domain(format!("log log q <= 0 for q = {q}")));
    }
    let sigma = scale.sigma_a(a);
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("sigma_A = {sigma} <= 0 for q = {q}, A = {a}")));
    }
    Ok(sigma)
}

/// The coefficient system: `r(p) = rp` for primes `p <= X`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonatorSpec {
    x_bound: f64,
    sigma_a: f64,
    rp: f64,
    primes: Vec<u64>,
    log_primes: Vec<f64>,
}

/// Spec for the parameters' `X` and `σ_A`.
pub fn make_spec(params: &Parameters, table: &PrimeTable) -> Result<ResonatorSpec> {
    ResonatorSpec::new(params.x_bound, params.sigma_a, table)
}

impl ResonatorSpec {
    pub fn new(x_bound: f64, sigma_a: f64, table: &PrimeTable) -> Result<Self> {
        if !(sigma_a > 0.0 && sigma_a <= 1.0) {
            return Err(Error::domain(format!("sigma_A = {sigma_a} outside (0, 1]")));
        }
        if !(x_bound >= 0.0) {
            return Err(Error::domain(format!("X = {x_bound} is negative")));
        }
        if x_bound >= (table.limit() + 1) as f64 {
            return Err(Error::Range { what: "X", value: x_bound, limit: table.limit() as f64 });
        }
        let k = table.prime_pi(x_bound);
        let rp = if x_bound > 0.0 { -((sigma_a - 1.0) * x_bound.ln()).exp_m1() } else { 0.0 };
        Ok(Self {
            x_bound,
            sigma_a,
            rp,
            primes: table.primes()[..k].to_vec(),
            log_primes: table.log_primes()[..k].to_vec(),
        })
    }

    pub fn x_bound(&self) -> f64 {
        self.x_bound
    }

    pub fn sigma_a(&self) -> f64 {
        self.sigma_a
    }

    /// Common value `r(p)` at every prime `p <= X`.
    pub fn rp(&self) -> f64 {
        self.rp
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn log_primes(&self) -> &[f64] {
        &self.log_primes
    }

    fn check_convergent(&self) -> Result<()> {
        if !self.primes.is_empty() && !(self.rp < 1.0) {
            return Err(Error::Divergence { rp: self.rp });
        }
        Ok(())
    }

    /// `r(n) = rp^{Ω(n)}` when `n` is `X`-smooth, else 0.
    pub fn r_of_smooth(&self, omega: u32) -> f64 {
        self.rp.powi(omega as i32)
    }
}

/// `r(n)`; uses the sieve when `n` is inside it, trial division by the
/// resonator primes otherwise.
pub fn r_value(n: u64, spec: &ResonatorSpec, table: &PrimeTable) -> f64 {
    assert!(n >= 1, "r(n) is defined for n >= 1");
    let omega = if let Some(factors) = table.factorize(n) {
        if factors.iter().any(|&(p, _)| !spec.primes.contains(&p)) {
            return 0.0;
        }
        factors.iter().map(|&(_, e)| e).sum::<u32>()
    } else {
        let mut m = n;
        let mut omega = 0;
        for &p in &spec.primes {
            while m.is_multiple_of(p) {
                m /= p;
                omega += 1;
            }
        }
        if m != 1 {
            return 0.0;
        }
        omega
    };
    spec.r_of_smooth(omega)
}

/// `log |R(t)|² = -Σ_{p<=X} log |1 - rp e^{-it log p}|²`.
pub fn log_abs_r_squared(t: f64, spec: &ResonatorSpec) -> Result<f64> {
    spec.check_convergent()?;
    let rp = spec.rp;
    let one_minus_sq = (1.0 - rp) * (1.0 - rp);
    let mut acc = Neumaier::new();
    for &lp in &spec.log_primes {
        let half = crate::ddouble::reduced_angle(t, lp, 0.0) * 0.5;
        let s = half.sin();
        // |1 - rp e^{iθ}|² = (1 - rp)² + 4 rp sin²(θ/2)
        acc.add(-(one_minus_sq + 4.0 * rp * s * s).ln());
    }
    Ok(acc.value())
}

/// `2 π(X) (1 - σ_A) log X`, the value at `t = 0` and the maximum over `t`.
pub fn log_abs_r_squared_bound(spec: &ResonatorSpec) -> f64 {
    if spec.primes.is_empty() {
        return 0.0;
    }
    2.0 * spec.primes.len() as f64 * (1.0 - spec.sigma_a) * spec.x_bound.ln()
}

/// `Σ_n r(n)² = Π_{p<=X} (1 - rp²)^{-1}`.
pub fn sum_r_squared(spec: &ResonatorSpec) -> Result<f64> {
    spec.check_convergent()?;
    Ok((1.0 - spec.rp * spec.rp).powi(-(spec.primes.len() as i32)))
}

/// `Σ_n r(n) = Π_{p<=X} (1 - rp)^{-1}`.
pub fn sum_r(spec: &ResonatorSpec) -> Result<f64> {
    spec.check_convergent()?;
    Ok((1.0 - spec.rp).powi(-(spec.primes.len() as i32)))
}

/// `rp · Σ_{p<=X} log p · p^{-σ}`.
pub fn resonance_gain(spec: &ResonatorSpec, sigma: f64) -> f64 {
    spec.rp * prime_log_sum(&spec.primes, &spec.log_primes, sigma)
}

fn prime_log_sum(primes: &[u64], log_primes: &[f64], sigma: f64) -> f64 {
    let mut acc = Neumaier::new();
    for (_, &lp) in primes.iter().zip(log_primes) {
        acc.add(lp * (-sigma * lp).exp());
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimeSumReport {
    pub x: f64,
    pub sigma: f64,
    /// `Σ_{p<=X} log p · p^{-σ}`
    pub exact: f64,
    /// `X^{1-σ} / (1-σ)`
    pub main_term: f64,
    pub relative_deviation: f64,
    pub empty_range: bool,
}

/// Compare the prime sum with its main term `X^{1-σ}/(1-σ)`.
pub fn prime_sum_asymptotic_check(x: f64, sigma: f64, table: &PrimeTable) -> Result<PrimeSumReport> {
    if sigma == 1.0 {
        return Err(Error::SingularMainTerm);
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::domain(format!("sigma = {sigma} outside (0, 1)")));
    }
    if x > table.limit() as f64 {
        return Err(Error::Range { what: "X", value: x, limit: table.limit() as f64 });
    }
    let k = table.prime_pi(x);
    let exact = prime_log_sum(&table.primes()[..k], &table.log_primes()[..k], sigma);
    let empty_range = k == 0;
    let main_term = if x > 0.0 { x.powf(1.0 - sigma) / (1.0 - sigma) } else { 0.0 };
    let relative_deviation = if empty_range { f64::NAN } else { (exact / main_term - 1.0).abs() };
    Ok(PrimeSumReport { x, sigma, exact, main_term, relative_deviation, empty_range })
}

/// `(e^A - 1)/A · log₂ T`, continuous at `A = 0`.
pub fn predicted_bound(a: f64, loglog_t: f64) -> f64 {
    growth_factor(a) * loglog_t
}

/// `(e^A - 1)/A`
pub fn growth_factor(a: f64) -> f64 {
    if a.abs() < 1e-8 {
        1.0 + a / 2.0 + a * a / 6.0
    } else {
        a.exp_m1() / a
    }
}

/// The resonator coefficients on the `X`-smooth `n <= nmax`, sorted by `n`,
/// with the mass of what was cut off.
#[derive(Debug, Clone)]
pub struct TruncatedResonator {
    pub nmax: u64,
    pub entries: Vec<ResonatorEntry>,
    /// `Σ_{n<=nmax} r(n)`
    pub partial_r: f64,
    /// `Σ_{n<=nmax} r(n)²`
    pub partial_r2: f64,
    /// `Σ_{n>nmax} r(n)`
    pub tail_r: f64,
    /// `Σ_{n>nmax} r(n)²`
    pub tail_r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorEntry {
    pub n: u64,
    pub r: f64,
    pub log_n: f64,
}

/// Largest smooth-number enumeration allowed.
pub const MAX_SMOOTH_SUPPORT: usize = 5_000_000;

impl TruncatedResonator {
    /// The tails are the exact complements `Π(1-rp)^{-1} - Σ_{n<=N} r(n)`
    /// (and likewise for `r²`), widened by a rounding allowance.
    pub fn new(spec: &ResonatorSpec, nmax: u64) -> Result<Self> {
        spec.check_convergent()?;
        if nmax < 1 {
            return Err(Error::domain("truncation must include n = 1"));
        }
        let support: Vec<SmoothNumber> = smooth_numbers_over(&spec.primes, nmax);
        if support.len() > MAX_SMOOTH_SUPPORT {
            return Err(Error::Resource(format!("{} smooth numbers exceed {MAX_SMOOTH_SUPPORT}", support.len())));
        }
        let entries: Vec<ResonatorEntry> = support
            .iter()
            .map(|s| ResonatorEntry { n: s.n, r: spec.r_of_smooth(s.omega), log_n: (s.n as f64).ln() })
            .collect();
        let partial_r = crate::sum::compensated_sum(entries.iter().map(|e| e.r));
        let partial_r2 = crate::sum::compensated_sum(entries.iter().map(|e| e.r * e.r));
        let total_r = sum_r(spec)?;
        let total_r2 = sum_r_squared(spec)?;
        let slack = 8.0 * f64::EPSILON * entries.len() as f64;
        let tail_r = (total_r - partial_r).max(0.0) + slack * total_r;
        let tail_r2 = (total_r2 - partial_r2).max(0.0) + slack * total_r2;
        Ok(Self { nmax, entries, partial_r, partial_r2, tail_r, tail_r2 })
    }

    /// `Σ_{lo < n <= hi} r(n)` over the stored support.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        crate::sum::compensated_sum(
            self.entries.iter().filter(|e| (e.n as f64) > lo && (e.n as f64) <= hi).map(|e| e.r),
        )
    }
}

/// Rankin's bound `Σ_{n>N} r(n)^k <= N^{-α} Π_{p<=X} (1 - rp^k p^α)^{-1}`,
/// minimised over admissible `α`. Independent of the complement tails.
pub fn rankin_tail(spec: &ResonatorSpec, nmax: u64, power: i32) -> f64 {
    let c = spec.rp.powi(power);
    if spec.primes.is_empty() || c == 0.0 {
        return 0.0;
    }
    let x_max = *spec.primes.last().unwrap() as f64;
    // need c·p^α < 1 for every p
    let alpha_max = -(c.ln()) / x_max.ln();
    let ln_n = (nmax as f64).ln();
    let bound = |alpha: f64| -> f64 {
        let mut log_b = -alpha * ln_n;
        for &lp in &spec.log_primes {
            log_b -= (1.0 - c * (alpha * lp).exp()).ln();
        }
        log_b.exp()
    };
    (1..200).map(|i| bound(alpha_max * i as f64 / 200.0)).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numthy::sieve;
    use proptest::prelude::*;

    fn table() -> PrimeTable {
        sieve(100_000).unwrap()
    }

    #[test]
    fn spec_examples() {
        let t = table();
        let s = ResonatorSpec::new(100.0, 1.0, &t).unwrap();
        assert_eq!(s.rp(), 0.0);
        assert_eq!(r_value(12, &s, &t), 0.0);
        assert_eq!(r_value(1, &s, &t), 1.0);

        let s = ResonatorSpec::new(1.5, 0.8, &t).unwrap();
        assert!(s.primes().is_empty());
        assert_eq!(log_abs_r_squared(3.0, &s).unwrap(), 0.0);
        assert_eq!(sum_r_squared(&s).unwrap(), 1.0);

        let s = ResonatorSpec::new(100.0, 0.8, &t).unwrap();
        assert!((s.rp() - (1.0 - 100f64.powf(-0.2))).abs() < 1e-15);
        assert!(s.rp() > 0.0 && s.rp() < 1.0);
        assert!(ResonatorSpec::new(200_000.0, 0.8, &t).is_err());
    }

    #[test]
    fn r_values() {
        let t = table();
        let s = ResonatorSpec::new(10.0, 0.8, &t).unwrap();
        let rp = s.rp();
        assert_eq!(r_value(1, &s, &t), 1.0);
        assert_eq!(r_value(49, &s, &t), rp * rp);
        assert_eq!(r_value(6, &s, &t), rp * rp);
        assert_eq!(r_value(11, &s, &t), 0.0);
        let s2 = ResonatorSpec::new(2.0, 0.8, &t).unwrap();
        assert_eq!(r_value(6, &s2, &t), 0.0);
        // beyond the sieve: 2^40·3^2
        assert_eq!(r_value((1u64 << 40) * 9, &s, &t), rp.powi(42));
    }

    #[test]
    fn euler_product_at_zero_is_its_maximum() {
        let t = table();
        let s = ResonatorSpec::new(50.0, 0.7, &t).unwrap();
        let at0 = log_abs_r_squared(0.0, &s).unwrap();
        let bound = log_abs_r_squared_bound(&s);
        assert!((at0 - bound).abs() < 1e-12 * bound);
        for k in 0..500 {
            let v = log_abs_r_squared(0.37 * k as f64 + 0.1, &s).unwrap();
            assert!(v <= bound + 1e-12);
        }
    }

    fn series_abs_sq(spec: &ResonatorSpec, t: f64, nmax: u64) -> (f64, f64) {
        let tr = TruncatedResonator::new(spec, nmax).unwrap();
        let mut re = Neumaier::new();
        let mut im = Neumaier::new();
        for e in &tr.entries {
            let th = t * e.log_n;
            re.add(e.r * th.cos());
            im.add(-e.r * th.sin());
        }
        let (a, b) = (re.value(), im.value());
        ((a * a + b * b).sqrt(), tr.tail_r)
    }

    #[test]
    fn euler_product_matches_series_for_x7() {
        let t = table();
        let s = ResonatorSpec::new(7.0, 0.8, &t).unwrap();
        let (abs_s, tail) = series_abs_sq(&s, 1.3, 1_000_000);
        let euler = log_abs_r_squared(1.3, &s).unwrap().exp().sqrt();
        let lo = (abs_s - tail).max(0.0);
        let hi = abs_s + tail;
        assert!(euler >= lo * (1.0 - 1e-12) && euler <= hi * (1.0 + 1e-12));

        // with r(p) small enough the truncation is invisible at 1e-4
        let s = ResonatorSpec::new(7.0, 0.95, &t).unwrap();
        let (abs_s, _) = series_abs_sq(&s, 1.3, 1_000_000);
        let euler_sq = log_abs_r_squared(1.3, &s).unwrap().exp();
        assert!((euler_sq - abs_s * abs_s).abs() / euler_sq < 1e-4);
    }

    #[test]
    fn complement_tail_is_within_rankin_bound() {
        let t = table();
        for (x, sigma) in [(3.0, 0.7), (5.0, 0.9), (7.0, 0.9)] {
            let s = ResonatorSpec::new(x, sigma, &t).unwrap();
            let tr = TruncatedResonator::new(&s, 100_000).unwrap();
            let rankin = rankin_tail(&s, 100_000, 1);
            assert!(tr.tail_r <= rankin * (1.0 + 1e-9) + 1e-12, "{x} {sigma}: {} vs {rankin}", tr.tail_r);
        }
    }

    #[test]
    fn sum_r_squared_against_brute_force() {
        let t = table();
        let s = ResonatorSpec::new(2.0, 0.8, &t).unwrap();
        let rp = s.rp();
        assert!((sum_r_squared(&s).unwrap() - 1.0 / (1.0 - rp * rp)).abs() < 1e-15);

        let s = ResonatorSpec::new(5.0, 0.8, &t).unwrap();
        let nmax = 1_000_000_000u64;
        let brute: f64 = crate::sum::compensated_sum(
            smooth_numbers_over(s.primes(), nmax).iter().map(|sn| s.r_of_smooth(2 * sn.omega)),
        );
        let tail = rankin_tail(&s, nmax, 2);
        let closed = sum_r_squared(&s).unwrap();
        assert!(closed >= brute - 1e-12 && closed <= brute + tail + 1e-12, "{closed} {brute} {tail}");
    }

    #[test]
    fn divergence_is_reported() {
        let t = table();
        let mut s = ResonatorSpec::new(10.0, 0.8, &t).unwrap();
        s.rp = 1.0;
        assert!(matches!(log_abs_r_squared(0.0, &s), Err(Error::Divergence { .. })));
        assert!(matches!(sum_r_squared(&s), Err(Error::Divergence { .. })));
    }

    #[test]
    fn gain_examples() {
        let t = table();
        let s = ResonatorSpec::new(10.0, 1.0, &t).unwrap();
        assert_eq!(resonance_gain(&s, 1.0), 0.0);
        let s = ResonatorSpec::new(10.0, 0.8, &t).unwrap();
        let direct = s.rp() * (2f64.ln() / 2.0 + 3f64.ln() / 3.0 + 5f64.ln() / 5.0 + 7f64.ln() / 7.0);
        assert!((resonance_gain(&s, 1.0) - direct).abs() < 1e-15);
    }

    #[test]
    fn gain_ratio_at_ten_to_ten_thousand() {
        // Frozen from a 30-digit mpmath evaluation over sympy.primerange:
        // X = 23128.02, σ_A = 0.900442, ratio = 0.57335950858977097
        let table = sieve(30_000).unwrap();
        let scale = Scale::from_log(1e4 * std::f64::consts::LN_10).unwrap();
        let sigma = scale.sigma_a(1.0);
        let spec = ResonatorSpec::new(scale.x_bound(0.1), sigma, &table).unwrap();
        let ratio = resonance_gain(&spec, sigma) / predicted_bound(1.0, scale.loglog());
        assert!((ratio - 0.573_359_508_589_771).abs() < 1e-9, "{ratio}");
    }

    #[test]
    fn prime_sum_examples() {
        let t = table();
        let r = prime_sum_asymptotic_check(1.5, 0.8, &t).unwrap();
        assert!(r.empty_range);
        assert_eq!(r.exact, 0.0);
        assert!(matches!(prime_sum_asymptotic_check(100.0, 1.0, &t), Err(Error::SingularMainTerm)));
        let r = prime_sum_asymptotic_check(10.0, 0.5, &t).unwrap();
        let direct: f64 = [2f64, 3.0, 5.0, 7.0].iter().map(|p| p.ln() / p.sqrt()).sum();
        assert!((r.exact - direct).abs() < 1e-14);
    }

    #[test]
    fn predicted_bound_examples() {
        assert!((predicted_bound(1.0, 10.0) - (std::f64::consts::E - 1.0) * 10.0).abs() < 1e-12);
        assert!((predicted_bound(1e-12, 10.0) - 10.0).abs() < 1e-10);
        assert!((predicted_bound(1e-7, 10.0) - 10.0 * (1.0 + 0.5e-7)).abs() < 1e-12);
    }

    #[test]
    fn parameters_checks() {
        let scale = Scale::from_value(1e100).unwrap();
        let p = Parameters::for_height(scale, 1.0, 0.5, 0.1, 0.1).unwrap();
        assert!((p.sigma_a - (1.0 - 1.0 / scale.loglog())).abs() < 1e-15);
        assert!((p.x_bound - 0.1 * scale.log() * scale.loglog()).abs() < 1e-9);
        assert!(p.in_critical_regime());
        assert!(p.kappa1_holds() && p.kappa2_holds());
        assert!(p.validate(true).is_ok());
        // log log T <= 2A
        assert!(Parameters::for_height(Scale::from_value(100.0).unwrap(), 1.0, 0.5, 0.01, 0.1).is_err());
        // epsilon too large
        assert!(Parameters::for_height(scale, 1.0, 0.5, 0.4, 0.1).is_err());
        let bad = Parameters::for_height(scale, 1.0, 0.9, 0.1, 0.2).unwrap();
        assert!(!bad.kappa1_holds());
        assert!(matches!(bad.validate(true), Err(Error::Infeasible { .. })));
        assert!(bad.validate(false).is_ok());
        let q = Parameters::for_modulus(101, 1.0, 0.01, 0.1).unwrap();
        assert!(!q.in_critical_regime());
        assert!(q.sigma_a > 0.0);
    }

    proptest! {
        #[test]
        fn euler_product_never_exceeds_t0(t in -1e4f64..1e4, x in 2.0f64..200.0, sigma in 0.55f64..0.99) {
            let table = sieve(1000).unwrap();
            let s = ResonatorSpec::new(x, sigma, &table).unwrap();
            prop_assert!(log_abs_r_squared(t, &s).unwrap() <= log_abs_r_squared_bound(&s) * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn growth_factor_increasing(a in 1e-6f64..20.0, da in 1e-6f64..1.0) {
            prop_assert!(growth_factor(a + da) > growth_factor(a));
        }
    }
}
