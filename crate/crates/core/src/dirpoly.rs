//! The truncated prime-power polynomial
//! `D_Y(σ + it) = Σ_{n<=Y} Λ(n) n^{-σ-it}`
//! which stands in for `-ζ'/ζ(σ + it)`, and its twisted form
//! `Σ_{n<=Y} Λ(n) χ(n) n^{-σ}` for `-L'/L(σ, χ)`.

use num_complex::Complex64;

use crate::ddouble::reduced_angle;
use crate::error::{Error, Result};
use crate::numthy::PrimeTable;
use crate::sum::{ComplexNeumaier, Neumaier};

/// Grid phasors are recomputed from scratch at every multiple of this index.
pub const ANCHOR_INTERVAL: usize = 1024;

/// Largest grid `eval_grid` will materialise.
pub const MAX_GRID_POINTS: usize = 20_000_000;

/// A Dirichlet character, or anything that can pose as one.
pub trait Character {
    fn value(&self, n: u64) -> Complex64;
}

/// One prime power `n = p^v <= Y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaTerm {
    pub n: u64,
    pub log_p: f64,
    pub log_n: f64,
    /// `Λ(n) n^{-σ}`
    pub coef: f64,
}

#[derive(Debug, Clone)]
pub struct LambdaPolynomial {
    cutoff: u64,
    sigma: f64,
    terms: Vec<LambdaTerm>,
}

impl LambdaPolynomial {
    /// Collect every prime power `<= cutoff` with its weight `Λ(n) n^{-σ}`.
    ///
    /// `sigma` must lie in `(0, 3]`.
    pub fn build(cutoff: u64, sigma: f64, table: &PrimeTable) -> Result<Self> {
        if !(sigma > 0.0 && sigma <= 3.0) {
            return Err(Error::domain(format!("sigma = {sigma} outside (0, 3]")));
        }
        let terms = table
            .prime_powers(cutoff)?
            .into_iter()
            .map(|(n, log_p)| {
                let log_n = (n as f64).ln();
                LambdaTerm { n, log_p, log_n, coef: log_p * (-sigma * log_n).exp() }
            })
            .collect();
        Ok(Self { cutoff, sigma, terms })
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn terms(&self) -> &[LambdaTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ Λ(n) n^{-σ}`, the value at `t = 0` and a bound for `|D_Y|` everywhere.
    pub fn coefficient_sum(&self) -> f64 {
        crate::sum::compensated_sum(self.terms.iter().map(|t| t.coef))
    }

    /// Fastest phase speed `log n` present, 0 for the empty polynomial.
    pub fn max_frequency(&self) -> f64 {
        self.terms.last().map_or(0.0, |t| t.log_n)
    }

    /// `Σ Λ(n) |log n| n^{-σ}`, a Lipschitz constant for `t ↦ D_Y(σ+it)`.
    pub fn lipschitz(&self) -> f64 {
        crate::sum::compensated_sum(self.terms.iter().map(|t| t.coef * t.log_n))
    }

    pub fn eval_at(&self, t: f64) -> Complex64 {
        let mut acc = ComplexNeumaier::new();
        for term in &self.terms {
            let (s, c) = reduced_angle(t, term.log_n, 0.0).sin_cos();
            acc.add(Complex64::new(term.coef * c, -term.coef * s));
        }
        acc.value()
    }

    /// `Re D_Y(σ + it)`, the objective for every large-value search.
    pub fn eval_real(&self, t: f64) -> f64 {
        let mut acc = Neumaier::new();
        for term in &self.terms {
            acc.add(term.coef * reduced_angle(t, term.log_n, 0.0).cos());
        }
        acc.value()
    }

    /// `D_Y` at `t0 + k·dt` for `k = 0..count`.
    pub fn eval_grid(&self, t0: f64, dt: f64, count: usize) -> Result<Vec<Complex64>> {
        check_grid(dt, count)?;
        if count > MAX_GRID_POINTS {
            return Err(Error::Resource(format!("{count} grid points exceed {MAX_GRID_POINTS}")));
        }
        let mut out = Vec::with_capacity(count);
        GridKernel::new(self, dt).run(t0, dt, 0, count, true, |_, re, im| out.push(Complex64::new(re, im)));
        Ok(out)
    }

    /// Real parts on the grid indices `k_start..k_start + out.len()`.
    ///
    /// Phasors are anchored at `k_start` and at every multiple of
    /// [`ANCHOR_INTERVAL`], so blocks starting on a multiple reproduce the
    /// corresponding slice of one long evaluation bit for bit.
    pub fn eval_grid_real_into(&self, t0: f64, dt: f64, k_start: usize, out: &mut [f64]) -> Result<()> {
        check_grid(dt, out.len().max(1))?;
        let n = out.len();
        GridKernel::new(self, dt).run(t0, dt, k_start, n, false, |k, re, _| out[k - k_start] = re);
        Ok(())
    }

    /// `Σ Λ(n) χ(n) n^{-σ}`.
    pub fn eval_char<C: Character + ?Sized>(&self, chi: &C) -> Complex64 {
        let mut acc = ComplexNeumaier::new();
        for term in &self.terms {
            acc.add(chi.value(term.n) * term.coef);
        }
        acc.value()
    }
}

fn check_grid(dt: f64, count: usize) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!("grid step {dt} must be positive")));
    }
    if count == 0 {
        return Err(Error::domain("grid needs at least one point"));
    }
    Ok(())
}

const LANES: usize = 8;

/// Structure-of-arrays state for phase-rotation evaluation.
struct GridKernel {
    coef: Vec<f64>,
    log_n: Vec<f64>,
    rot_re: Vec<f64>,
    rot_im: Vec<f64>,
    ph_re: Vec<f64>,
    ph_im: Vec<f64>,
}

impl GridKernel {
    fn new(poly: &LambdaPolynomial, dt: f64) -> Self {
        let m = poly.terms.len();
        let coef: Vec<f64> = poly.terms.iter().map(|t| t.coef).collect();
        let log_n: Vec<f64> = poly.terms.iter().map(|t| t.log_n).collect();
        let mut rot_re = Vec::with_capacity(m);
        let mut rot_im = Vec::with_capacity(m);
        for &l in &log_n {
            let (s, c) = reduced_angle(dt, l, 0.0).sin_cos();
            rot_re.push(c);
            rot_im.push(-s);
        }
        Self { coef, log_n, rot_re, rot_im, ph_re: vec![0.0; m], ph_im: vec![0.0; m] }
    }

    fn anchor(&mut self, t: f64) {
        for i in 0..self.log_n.len() {
            let (s, c) = reduced_angle(t, self.log_n[i], 0.0).sin_cos();
            self.ph_re[i] = c;
            self.ph_im[i] = -s;
        }
    }

    #[inline]
    fn lane_sum(acc: &[f64; LANES], tail: f64) -> f64 {
        ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail
    }

    fn accumulate(&self, need_im: bool) -> (f64, f64) {
        let m = self.coef.len();
        let body = m - m % LANES;
        let mut acc_re = [0.0; LANES];
        let mut acc_im = [0.0; LANES];
        for ((c, pr), pi) in self.coef[..body]
            .chunks_exact(LANES)
            .zip(self.ph_re[..body].chunks_exact(LANES))
            .zip(self.ph_im[..body].chunks_exact(LANES))
        {
            for j in 0..LANES {
                acc_re[j] += c[j] * pr[j];
            }
            if need_im {
                for j in 0..LANES {
                    acc_im[j] += c[j] * pi[j];
                }
            }
        }
        let mut tail_re = 0.0;
        let mut tail_im = 0.0;
        for i in body..m {
            tail_re += self.coef[i] * self.ph_re[i];
            tail_im += self.coef[i] * self.ph_im[i];
        }
        (Self::lane_sum(&acc_re, tail_re), Self::lane_sum(&acc_im, tail_im))
    }

    fn rotate(&mut self) {
        for (((pr, pi), rr), ri) in self.ph_re.iter_mut().zip(self.ph_im.iter_mut()).zip(&self.rot_re).zip(&self.rot_im)
        {
            let re = *pr * rr - *pi * ri;
            let im = *pr * ri + *pi * rr;
            *pr = re;
            *pi = im;
        }
    }

    fn run(
        &mut self,
        t0: f64,
        dt: f64,
        k_start: usize,
        count: usize,
        need_im: bool,
        mut sink: impl FnMut(usize, f64, f64),
    ) {
        for k in k_start..k_start + count {
            if k == k_start || k % ANCHOR_INTERVAL == 0 {
                self.anchor(t0 + k as f64 * dt);
            }
            let (re, im) = self.accumulate(need_im);
            sink(k, re, im);
            if k + 1 < k_start + count && (k + 1) % ANCHOR_INTERVAL != 0 {
                self.rotate();
            }
        }
    }
}
