//! Primes, the von Mangoldt function and friends.

use crate::error::{Error, Result};
use crate::sum::Neumaier;

/// Largest sieve the table will allocate (4 bytes per entry).
pub const MAX_SIEVE_LIMIT: u64 = 200_000_000;

/// Smallest-prime-factor sieve up to `limit`, with the primes and their
/// logarithms cached.
///
/// Immutable after construction and `Sync`, so one table can serve many
/// workers.
#[derive(Debug, Clone)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
    log_primes: Vec<f64>,
    spf: Vec<u32>,
}

/// Linear sieve. Errors on `limit < 2` or beyond [`MAX_SIEVE_LIMIT`].
pub fn sieve(limit: u64) -> Result<PrimeTable> {
    PrimeTable::new(limit)
}

impl PrimeTable {
    pub fn new(limit: u64) -> Result<Self> {
        if limit < 2 {
            return Err(Error::domain(format!("sieve limit {limit} < 2")));
        }
        if limit > MAX_SIEVE_LIMIT {
            return Err(Error::Resource(format!("sieve limit {limit} exceeds the budget of {MAX_SIEVE_LIMIT}")));
        }
        let len = limit as usize + 1;
        let mut spf = vec![0u32; len];
        let mut primes: Vec<u64> = Vec::new();
        for n in 2..len {
            if spf[n] == 0 {
                spf[n] = n as u32;
                primes.push(n as u64);
            }
            let s = spf[n] as u64;
            for &p in &primes {
                if p > s {
                    break;
                }
                let m = n as u64 * p;
                if m > limit {
                    break;
                }
                spf[m as usize] = p as u32;
            }
        }
        let log_primes = primes.iter().map(|&p| (p as f64).ln()).collect();
        Ok(Self { limit, primes, log_primes, spf })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// `log p` for each entry of [`primes`](Self::primes).
    pub fn log_primes(&self) -> &[f64] {
        &self.log_primes
    }

    /// Primes `<= x`, as a prefix of the table.
    pub fn primes_upto(&self, x: f64) -> &[u64] {
        &self.primes[..self.prime_pi(x)]
    }

    /// Number of primes `<= x` (clamped to the table).
    pub fn prime_pi(&self, x: f64) -> usize {
        if x < 2.0 {
            return 0;
        }
        let xf = x.floor();
        if xf >= self.limit as f64 {
            return self.primes.len();
        }
        self.primes.partition_point(|&p| p as f64 <= xf)
    }

    pub fn smallest_prime_factor(&self, n: u64) -> Option<u64> {
        if n < 2 || n > self.limit {
            return None;
        }
        Some(self.spf[n as usize] as u64)
    }

    pub fn is_prime(&self, n: u64) -> bool {
        self.smallest_prime_factor(n) == Some(n)
    }

    /// `Λ(n)` via the sieve; `n` must be within the table.
    pub fn von_mangoldt(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::domain("von Mangoldt function at n = 0"));
        }
        if n > self.limit {
            return Err(Error::Range { what: "n", value: n as f64, limit: self.limit as f64 });
        }
        if n == 1 {
            return Ok(0.0);
        }
        let p = self.spf[n as usize] as u64;
        let mut m = n;
        while m.is_multiple_of(p) {
            m /= p;
        }
        if m != 1 {
            return Ok(0.0);
        }
        let idx = self.primes.binary_search(&p).expect("spf entries are primes");
        Ok(self.log_primes[idx])
    }

    /// Prime factorisation `(p, multiplicity)` in increasing `p`.
    pub fn factorize(&self, mut n: u64) -> Option<Vec<(u64, u32)>> {
        if n == 0 || n > self.limit {
            return None;
        }
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        Some(out)
    }

    /// All prime powers `p^v <= y` as `(p^v, log p)`, sorted by `p^v`.
    pub fn prime_powers(&self, y: u64) -> Result<Vec<(u64, f64)>> {
        if y > self.limit {
            return Err(Error::Range { what: "Y", value: y as f64, limit: self.limit as f64 });
        }
        let mut out = Vec::new();
        for (&p, &lp) in self.primes.iter().zip(&self.log_primes) {
            if p > y {
                break;
            }
            let mut pv = p;
            loop {
                out.push((pv, lp));
                match pv.checked_mul(p) {
                    Some(next) if next <= y => pv = next,
                    _ => break,
                }
            }
        }
        out.sort_unstable_by_key(|&(n, _)| n);
        Ok(out)
    }
}

/// `Λ(n)` by trial division, independent of any table.
pub fn von_mangoldt(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("von Mangoldt function at n = 0"));
    }
    if n == 1 {
        return Ok(0.0);
    }
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut m = n;
            while m.is_multiple_of(p) {
                m /= p;
            }
            return Ok(if m == 1 { (p as f64).ln() } else { 0.0 });
        }
        p += 1;
    }
    Ok((n as f64).ln())
}

/// Chebyshev's `ϑ(x) = Σ_{p<=x} log p`.
pub fn chebyshev_theta(x: f64, table: &PrimeTable) -> Result<f64> {
    if x > table.limit as f64 {
        return Err(Error::Range { what: "x", value: x, limit: table.limit as f64 });
    }
    let k = table.prime_pi(x);
    let mut acc = Neumaier::new();
    for &lp in &table.log_primes[..k] {
        acc.add(lp);
    }
    Ok(acc.value())
}

/// Simple Eratosthenes list of primes `<= x`, for small bounds.
pub fn primes_upto(x: u64) -> Vec<u64> {
    if x < 2 {
        return Vec::new();
    }
    let n = x as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// An `X`-smooth integer together with `Ω(n)`, its number of prime factors
/// counted with multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SmoothNumber {
    pub n: u64,
    pub omega: u32,
}

/// Every `n <= nmax` whose prime factors all lie in `primes`, including 1,
/// sorted ascending.
pub fn smooth_numbers_over(primes: &[u64], nmax: u64) -> Vec<SmoothNumber> {
    fn walk(primes: &[u64], start: usize, n: u64, omega: u32, nmax: u64, out: &mut Vec<SmoothNumber>) {
        out.push(SmoothNumber { n, omega });
        for (i, &p) in primes.iter().enumerate().skip(start) {
            match n.checked_mul(p) {
                Some(m) if m <= nmax => walk(primes, i, m, omega + 1, nmax, out),
                _ => break,
            }
        }
    }
    let mut out = Vec::new();
    if nmax >= 1 {
        walk(primes, 0, 1, 0, nmax, &mut out);
    }
    out.sort_unstable();
    out
}

/// All `n <= nmax` with every prime factor `<= x`, including 1.
pub fn smooth_numbers(x: u64, nmax: u64) -> Result<Vec<u64>> {
    if x < 2 {
        return Err(Error::domain(format!("smoothness bound {x} < 2")));
    }
    if nmax < 1 {
        return Err(Error::domain("nmax must be at least 1"));
    }
    let primes = primes_upto(x);
    Ok(smooth_numbers_over(&primes, nmax).into_iter().map(|s| s.n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn is_prime_trial(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn small_sieves() {
        assert_eq!(sieve(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert_eq!(sieve(2).unwrap().primes(), &[2]);
        assert!(matches!(sieve(1), Err(Error::Domain(_))));
        assert!(matches!(sieve(MAX_SIEVE_LIMIT + 1), Err(Error::Resource(_))));
    }

    #[test]
    fn million_sieve_against_trial_division() {
        let t = sieve(1_000_000).unwrap();
        assert_eq!(t.primes().len(), 78_498);
        // full recount through the spf array, then a sample against trial division
        let recount = (2..=1_000_000u64).filter(|&n| t.smallest_prime_factor(n) == Some(n)).count();
        assert_eq!(recount, 78_498);
        let mut n = 12_345u64;
        for _ in 0..2_000 {
            n = (n * 48_271) % 999_983 + 2;
            assert_eq!(t.is_prime(n), is_prime_trial(n), "n = {n}");
            let s = t.smallest_prime_factor(n).unwrap();
            assert_eq!(n % s, 0);
            assert!((2..s).all(|d| !n.is_multiple_of(d)));
        }
    }

    #[test]
    fn mangoldt_examples() {
        assert_eq!(von_mangoldt(1).unwrap(), 0.0);
        assert_eq!(von_mangoldt(8).unwrap(), 2f64.ln());
        assert_eq!(von_mangoldt(12).unwrap(), 0.0);
        assert!(von_mangoldt(0).is_err());
        let t = sieve(100).unwrap();
        assert!(t.von_mangoldt(0).is_err());
        for n in 1..=100 {
            assert_eq!(t.von_mangoldt(n).unwrap(), von_mangoldt(n).unwrap(), "n={n}");
        }
    }

    #[test]
    fn theta_examples() {
        let t = sieve(1_000_000).unwrap();
        assert_eq!(chebyshev_theta(1.0, &t).unwrap(), 0.0);
        let direct = 2f64.ln() + 3f64.ln() + 5f64.ln() + 7f64.ln();
        assert!((chebyshev_theta(10.0, &t).unwrap() - direct).abs() < 1e-14);
        let th = chebyshev_theta(1e6, &t).unwrap();
        let independent: f64 =
            (2..=1_000_000u64).filter(|&n| is_prime_trial_fast(&t, n)).map(|p| (p as f64).ln()).sum();
        assert!((th - independent).abs() < 1e-6);
        assert!((th / 1e6 - 1.0).abs() < 0.01);
        assert!(chebyshev_theta(1e6 + 1.0, &t).is_err());
    }

    fn is_prime_trial_fast(t: &PrimeTable, n: u64) -> bool {
        // trial division by table primes up to sqrt(n)
        t.primes().iter().take_while(|&&p| p * p <= n).all(|&p| !n.is_multiple_of(p))
    }

    #[test]
    fn mangoldt_sum_two_ways() {
        let t = sieve(100_000).unwrap();
        let y = 100_000u64;
        let by_n: f64 = crate::sum::compensated_sum((1..=y).map(|n| t.von_mangoldt(n).unwrap()));
        let by_powers: f64 = crate::sum::compensated_sum(t.prime_powers(y).unwrap().into_iter().map(|(_, lp)| lp));
        assert_eq!(by_n, by_powers);
    }

    #[test]
    fn smooth_examples() {
        assert_eq!(smooth_numbers(3, 10).unwrap(), vec![1, 2, 3, 4, 6, 8, 9]);
        assert_eq!(smooth_numbers(2, 8).unwrap(), vec![1, 2, 4, 8]);
        // brute-force factorization of 1..=100
        let t = sieve(100).unwrap();
        let brute = (1..=100u64).filter(|&n| t.factorize(n).unwrap().iter().all(|&(p, _)| p <= 5)).count();
        assert_eq!(brute, 34);
        assert_eq!(smooth_numbers(5, 100).unwrap().len(), 34);
        assert!(smooth_numbers(1, 10).is_err());
        assert!(smooth_numbers(5, 0).is_err());
    }

    #[test]
    fn smooth_omega_is_factor_count() {
        let t = sieve(10_000).unwrap();
        for s in smooth_numbers_over(&[2, 3, 5, 7], 10_000) {
            let omega: u32 = t.factorize(s.n).unwrap().iter().map(|&(_, e)| e).sum();
            assert_eq!(omega, s.omega);
        }
    }

    proptest! {
        #[test]
        fn theta_nondecreasing(a in 0.0f64..5000.0, b in 0.0f64..5000.0) {
            let t = sieve(5000).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(chebyshev_theta(lo, &t).unwrap() <= chebyshev_theta(hi, &t).unwrap());
        }

        #[test]
        fn smooth_sets_nest(x in 2u64..30, dx in 0u64..30, nmax in 1u64..5000) {
            let small = smooth_numbers(x, nmax).unwrap();
            let big = smooth_numbers(x + dx, nmax).unwrap();
            prop_assert!(small.iter().all(|n| big.binary_search(n).is_ok()));
        }
    }
}
