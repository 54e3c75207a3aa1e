//! Dirichlet characters modulo a prime `q`, realised through one discrete
//! logarithm table: `χ_a(n) = e^{2πi a·ind(n)/(q-1)}`, with `a = 0` the
//! principal character and `a = (q-1)/2` the quadratic one.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirpoly::{Character, LambdaPolynomial};
use crate::error::{Error, Result};
use crate::resonator::{resonance_gain, ResonatorSpec, TruncatedResonator};
use crate::search::{ExtremeRecord, Method};
use crate::sum::{compensated_sum, ComplexNeumaier, Neumaier};

pub const MAX_MODULUS: u64 = 1_000_000;

/// Largest modulus for which [`s_sums`] enumerates every character.
pub const S_SUMS_MAX_MODULUS: u64 = 3000;

#[derive(Debug, Clone)]
pub struct CharacterTable {
    q: u64,
    g: u64,
    index: Vec<u32>,
    roots: Vec<Complex64>,
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Whether `g` generates `(ℤ/qℤ)^×`.
pub fn is_primitive_root(g: u64, q: u64) -> bool {
    !g.is_multiple_of(q) && distinct_prime_factors(q - 1).iter().all(|&l| pow_mod(g, (q - 1) / l, q) != 1)
}

pub fn build_table(q: u64) -> Result<CharacterTable> {
    CharacterTable::new(q)
}

impl CharacterTable {
    pub fn new(q: u64) -> Result<Self> {
        if !(3..=MAX_MODULUS).contains(&q) {
            return Err(Error::domain(format!("modulus {q} outside [3, {MAX_MODULUS}]")));
        }
        if !is_prime_u64(q) {
            return Err(Error::domain(format!("modulus {q} is not prime")));
        }
        let g = (2..q).find(|&g| is_primitive_root(g, q)).expect("a prime has a primitive root");
        let order = (q - 1) as usize;
        let mut index = vec![u32::MAX; q as usize];
        let mut x = 1u64;
        for k in 0..order {
            index[x as usize] = k as u32;
            x = x * g % q;
        }
        // roots[order - j] = conj(roots[j]) exactly, so that conjugate
        // characters produce conjugate sums bit for bit.
        let mut roots = vec![Complex64::new(0.0, 0.0); order];
        for j in 0..=order / 2 {
            let (s, c) = (std::f64::consts::TAU * j as f64 / order as f64).sin_cos();
            roots[j] = Complex64::new(c, s);
            if j > 0 {
                roots[order - j] = Complex64::new(c, -s);
            }
        }
        if order.is_multiple_of(2) {
            roots[order / 2] = Complex64::new(-1.0, 0.0);
        }
        roots[0] = Complex64::new(1.0, 0.0);
        Ok(Self { q, g, index, roots })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Smallest primitive root.
    pub fn generator(&self) -> u64 {
        self.g
    }

    /// `φ(q) = q - 1`, the number of characters.
    pub fn order(&self) -> u64 {
        self.q - 1
    }

    /// Discrete logarithm of `n` to base `g`, `None` when `q | n`.
    pub fn index(&self, n: u64) -> Option<u32> {
        let r = (n % self.q) as usize;
        (r != 0).then(|| self.index[r])
    }

    /// Character index of the quadratic character.
    pub fn quadratic(&self) -> u64 {
        (self.q - 1) / 2
    }

    /// `e^{2πi j/(q-1)}`
    pub fn root(&self, j: u64) -> Complex64 {
        self.roots[(j % self.order()) as usize]
    }

    pub fn chi(&self, a: u64) -> Chi<'_> {
        assert!(a < self.order(), "character index {a} out of range");
        Chi { table: self, a }
    }

    pub fn value(&self, a: u64, n: u64) -> Complex64 {
        match self.index(n) {
            None => Complex64::new(0.0, 0.0),
            Some(k) => self.roots[((a * k as u64) % self.order()) as usize],
        }
    }
}

/// `χ_a(n)`
pub fn char_value(table: &CharacterTable, a: u64, n: u64) -> Complex64 {
    table.value(a, n)
}

#[derive(Debug, Clone, Copy)]
pub struct Chi<'t> {
    table: &'t CharacterTable,
    a: u64,
}

impl Chi<'_> {
    pub fn index(&self) -> u64 {
        self.a
    }
}

impl Character for Chi<'_> {
    fn value(&self, n: u64) -> Complex64 {
        self.table.value(self.a, n)
    }
}

/// `Σ_a χ_a(n) conj(χ_a(m))` by direct summation.
pub fn orthogonality_sum(table: &CharacterTable, n: u64, m: u64) -> Result<Complex64> {
    if m.is_multiple_of(table.q) {
        return Err(Error::domain(format!("gcd({m}, {}) != 1", table.q)));
    }
    let mut acc = ComplexNeumaier::new();
    for a in 0..table.order() {
        acc.add(table.value(a, n) * table.value(a, m).conj());
    }
    Ok(acc.value())
}

/// `R(χ)` over the truncated support with the mass beyond it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSum {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// The resonator coefficients folded onto discrete-log classes:
/// `w_j = Σ_{n <= Nmax, ind(n) = j} r(n)`, so that `R(χ_a) = Σ_j w_j ω^{aj}`.
#[derive(Debug, Clone)]
pub struct FoldedResonator {
    classes: Vec<(u64, f64)>,
    pub tail: f64,
    pub partial: f64,
    pub nmax: u64,
}

impl FoldedResonator {
    pub fn new(table: &CharacterTable, trunc: &TruncatedResonator) -> Self {
        let mut w = vec![Neumaier::new(); table.order() as usize];
        for e in &trunc.entries {
            if let Some(k) = table.index(e.n) {
                w[k as usize].add(e.r);
            }
        }
        let classes = w.iter().enumerate().map(|(j, s)| (j as u64, s.value())).filter(|&(_, v)| v != 0.0).collect();
        Self { classes, tail: trunc.tail_r, partial: trunc.partial_r, nmax: trunc.nmax }
    }

    pub fn at(&self, table: &CharacterTable, a: u64) -> Complex64 {
        let mut acc = ComplexNeumaier::new();
        for &(j, w) in &self.classes {
            acc.add(table.root(a * j) * w);
        }
        acc.value()
    }

    /// `Σ_j w_j²`, the congruence-class form of `S₁/(q-1)`.
    pub fn class_square_sum(&self) -> f64 {
        compensated_sum(self.classes.iter().map(|&(_, w)| w * w))
    }
}

/// `R(χ_a) = Σ_{n <= Nmax} r(n) χ_a(n)`.
pub fn r_chi(table: &CharacterTable, a: u64, spec: &ResonatorSpec, nmax: u64) -> Result<ChiSum> {
    let trunc = TruncatedResonator::new(spec, nmax)?;
    let folded = FoldedResonator::new(table, &trunc);
    Ok(ChiSum { value: folded.at(table, a), tail_bound: trunc.tail_r })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SReport {
    /// `Σ_a |R(χ_a)|²`
    pub s1: f64,
    /// `(q-1) Σ_{n ≡ k, q ∤ k} r(n) r(k)`
    pub s1_by_congruence: f64,
    /// `Σ_a Re(Σ Λ(n) χ_a(n) n^{-σ}) |R(χ_a)|²`
    pub s2: f64,
    /// `gain · S₁`
    pub s2_lower: f64,
    pub gain: f64,
    /// `S₂ >= S₂_lower - tail_bound` for the truncated sums.
    pub tail_bound: f64,
    /// Bound on what truncation removed from `S₁`.
    pub s1_tail: f64,
    pub nmax: u64,
}

pub fn s_sums(table: &CharacterTable, spec: &ResonatorSpec, poly: &LambdaPolynomial, nmax: u64) -> Result<SReport> {
    if table.q > S_SUMS_MAX_MODULUS {
        return Err(Error::Resource(format!(
            "S-sums enumerate all characters; q = {} exceeds {S_SUMS_MAX_MODULUS}",
            table.q
        )));
    }
    let trunc = TruncatedResonator::new(spec, nmax)?;
    let folded = FoldedResonator::new(table, &trunc);
    let order = table.order() as f64;
    let per_char: Vec<(f64, f64)> = (0..table.order())
        .into_par_iter()
        .map(|a| {
            let r2 = folded.at(table, a).norm_sqr();
            (r2, poly.eval_char(&table.chi(a)).re * r2)
        })
        .collect();
    let s1 = compensated_sum(per_char.iter().map(|p| p.0));
    let s2 = compensated_sum(per_char.iter().map(|p| p.1));
    let s1_by_congruence = order * folded.class_square_sum();
    let gain = resonance_gain(spec, poly.sigma());

    let mut tail = Neumaier::new();
    for (&p, &lp) in spec.primes().iter().zip(spec.log_primes()) {
        let c = lp * (-poly.sigma() * lp).exp() * spec.rp();
        if p <= poly.cutoff() && p != table.q {
            tail.add(c * order * trunc.partial_r * trunc.mass_between((nmax / p) as f64, nmax as f64));
        } else {
            tail.add(c * s1);
        }
    }
    let s2_lower = gain * s1;
    let total = trunc.partial_r + trunc.tail_r;
    Ok(SReport {
        s1,
        s1_by_congruence,
        s2,
        s2_lower,
        gain,
        tail_bound: tail.value() * (1.0 + 1e-12) + 1e-12 * s2_lower.abs(),
        s1_tail: order * (total * total - trunc.partial_r * trunc.partial_r),
        nmax,
    })
}

/// Objective `Re Σ_{n<=Y} Λ(n) χ_a(n) n^{-σ}` for every `a`.
pub fn character_objectives(table: &CharacterTable, poly: &LambdaPolynomial) -> Vec<f64> {
    // Fold the polynomial onto discrete-log classes once: Σ_j c_j cos(2π a j/(q-1)).
    let mut c = vec![Neumaier::new(); table.order() as usize];
    for term in poly.terms() {
        if let Some(k) = table.index(term.n) {
            c[k as usize].add(term.coef);
        }
    }
    let classes: Vec<(u64, f64)> =
        c.iter().enumerate().map(|(j, s)| (j as u64, s.value())).filter(|&(_, v)| v != 0.0).collect();
    (0..table.order())
        .into_par_iter()
        .map(|a| compensated_sum(classes.iter().map(|&(j, w)| w * table.root(a * j).re)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterScan {
    pub q: u64,
    pub sigma_a: f64,
    pub best: ExtremeRecord,
    pub best_is_quadratic: bool,
    pub mean: f64,
    pub std: f64,
    /// `σ_A ∈ (1/2, 1)`
    pub in_critical_regime: bool,
}

/// Maximise the objective over the non-principal characters.
pub fn scan_characters(table: &CharacterTable, poly: &LambdaPolynomial) -> CharacterScan {
    let values = character_objectives(table, poly);
    let nonprincipal = &values[1..];
    let mut best_a = 1u64;
    for (i, &v) in nonprincipal.iter().enumerate() {
        if v > values[best_a as usize] {
            best_a = i as u64 + 1;
        }
    }
    let n = nonprincipal.len() as f64;
    let mean = compensated_sum(nonprincipal.iter().copied()) / n;
    let var = compensated_sum(nonprincipal.iter().map(|v| (v - mean) * (v - mean))) / n;
    let sigma = poly.sigma();
    CharacterScan {
        q: table.q,
        sigma_a: sigma,
        best: ExtremeRecord {
            location: best_a as f64,
            value: values[best_a as usize],
            method: Method::Grid,
            grid_step: 1.0,
            refined: false,
        },
        best_is_quadratic: best_a == table.quadratic(),
        mean,
        std: var.sqrt(),
        in_critical_regime: sigma > 0.5 && sigma < 1.0,
    }
}

/// Sieve, table and polynomial at `σ_A = 1 - A/log log q`, then scan.
pub fn max_over_characters(q: u64, a: f64, y: u64) -> Result<CharacterScan> {
    let table = build_table(q)?;
    let sigma = crate::resonator::modulus_sigma(q, a)?;
    let primes = crate::numthy::sieve(y.max(2))?;
    let poly = LambdaPolynomial::build(y, sigma, &primes)?;
    Ok(scan_characters(&table, &poly))
}

/// `#{χ mod q : Re Σ Λ(n) χ(n) n^{-σ_A} >= threshold}`.
pub fn count_at_threshold(
    table: &CharacterTable,
    poly: &LambdaPolynomial,
    threshold: f64,
    include_principal: bool,
) -> u64 {
    let values = character_objectives(table, poly);
    let skip = usize::from(!include_principal);
    values[skip..].iter().filter(|&&v| v >= threshold).count() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub q: u64,
    pub sigma_a: f64,
    pub threshold: f64,
    pub count: u64,
    pub characters: u64,
}

/// `#N(q, x)` with the threshold `(log₂q/log₃q)((e^A-1)/A·log₃q - x)`.
pub fn count_exceeding(q: u64, a: f64, x: f64, y: u64, include_principal: bool) -> Result<CountReport> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("x = {x} must be positive")));
    }
    let table = build_table(q)?;
    let sigma = crate::resonator::modulus_sigma(q, a)?;
    let scale = crate::resonator::Scale::from_value(q as f64)?;
    let threshold = crate::search::omega_threshold(scale, a, x)?;
    let primes = crate::numthy::sieve(y.max(2))?;
    let poly = LambdaPolynomial::build(y, sigma, &primes)?;
    let count = count_at_threshold(&table, &poly, threshold, include_principal);
    let characters = table.order() - u64::from(!include_principal);
    Ok(CountReport { q, sigma_a: sigma, threshold, count, characters })
}
