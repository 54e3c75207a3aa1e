//! Large values of `Re D_Y(σ_A + it)` on `[T^β, T]`: grid scans with
//! golden-section refinement, a resonator-weighted Metropolis sampler, the
//! Monte-Carlo measure of the large-value set, and the choice of `κ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirpoly::{LambdaPolynomial, ANCHOR_INTERVAL};
use crate::error::{Error, Result};
use crate::moments::gaussian_width;
use crate::resonator::{
    growth_factor, kappa1_margin, kappa2_margin, log_abs_r_squared, zero_density_exponent, Parameters, ResonatorSpec,
    Scale,
};
use crate::rng::{self, CounterRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Grid,
    Refined,
    WeightedSample,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Grid => "grid",
            Method::Refined => "refined",
            Method::WeightedSample => "weighted-sample",
        }
    }
}

/// A witnessed value of the objective. For character scans `location`
/// holds the character index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeRecord {
    pub location: f64,
    pub value: f64,
    pub method: Method,
    pub grid_step: f64,
    pub refined: bool,
}

/// `(log₂T/log₃T)((e^A-1)/A·log₃T - x)`; needs `log₃T > 0`.
pub fn omega_threshold(scale: Scale, a: f64, x: f64) -> Result<f64> {
    let l3 = scale.logloglog();
    if !(l3 > 0.0) {
        return Err(Error::domain(format!("log log log of scale is {l3}; need scale > e^e")));
    }
    Ok(scale.loglog() / l3 * (growth_factor(a) * l3 - x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub x: f64,
    pub e: f64,
    /// `f(T) = exp(-log₂T)`
    pub f_value: f64,
    pub j_x: f64,
    pub j_x_tilde: f64,
    /// `(log₂T/log₃T)·(J̃_x - (log T)^{-E})`
    pub threshold: f64,
    /// `(log₂T/log₃T)·J̃_x`, the boundary between `V_x` and `W_x`.
    pub w_threshold: f64,
}

impl ThresholdSpec {
    pub fn new(scale: Scale, a: f64, x: f64, e: f64) -> Result<Self> {
        if !(x > 0.0) {
            return Err(Error::domain(format!("x = {x} must be positive")));
        }
        let l2 = scale.loglog();
        let l3 = scale.logloglog();
        if !(l3 > 0.0) {
            return Err(Error::domain(format!("log log log of scale is {l3}; need scale > e^e")));
        }
        let power = (-e * l2).exp();
        let f_value = scale.f_value();
        let j_x_tilde = growth_factor(a) * l3 - x + power;
        Ok(Self {
            x,
            e,
            f_value,
            j_x: j_x_tilde + 0.5 * f_value,
            j_x_tilde,
            threshold: l2 / l3 * (j_x_tilde - power),
            w_threshold: l2 / l3 * j_x_tilde,
        })
    }
}

/// Points per scan block; a multiple of [`ANCHOR_INTERVAL`].
pub const SCAN_BLOCK: usize = 64 * ANCHOR_INTERVAL;

/// Largest grid a scan will walk.
pub const MAX_SCAN_POINTS: u64 = 1 << 33;

/// Largest step resolving `Re D_Y`: `0.1 / log Y`.
pub fn max_grid_step(poly: &LambdaPolynomial) -> f64 {
    let f = poly.max_frequency();
    if f > 0.0 {
        0.1 / (poly.cutoff() as f64).ln().max(f)
    } else {
        f64::INFINITY
    }
}

/// The scan range `[T^β, T]`.
pub fn scan_range(t: f64, beta: f64) -> Result<(f64, f64)> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("beta = {beta} outside (0, 1)")));
    }
    let lo = t.powf(beta);
    if !(lo >= 10.0) || !t.is_finite() {
        return Err(Error::domain(format!("T^beta = {lo} must be at least 10 and T finite")));
    }
    Ok((lo, t))
}

/// Golden-section maximisation of `Re D_Y` on `[lo, hi]` down to width
/// `1e-9`; never returns less than the value at `t0`.
pub fn refine_in(poly: &LambdaPolynomial, t0: f64, lo: f64, hi: f64) -> ExtremeRecord {
    let f0 = poly.eval_real(t0);
    let mut best = (t0, f0);
    if hi > lo {
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (poly.eval_real(c), poly.eval_real(d));
        let mut iters = 0;
        while b - a > 1e-9 && iters < 200 {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = poly.eval_real(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = poly.eval_real(d);
            }
            iters += 1;
        }
        for (t, v) in [(c, fc), (d, fd)] {
            if v > best.1 {
                best = (t, v);
            }
        }
    }
    ExtremeRecord { location: best.0, value: best.1, method: Method::Refined, grid_step: 0.0, refined: true }
}

/// [`refine_in`] on `[t0 - window, t0 + window]`.
pub fn refine(poly: &LambdaPolynomial, t0: f64, window: f64) -> ExtremeRecord {
    let w = window.max(0.0);
    refine_in(poly, t0, t0 - w, t0 + w)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    k: u64,
    value: f64,
}

fn better(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    b.value.total_cmp(&a.value).then(a.k.cmp(&b.k))
}

fn keep_top(mut c: Vec<Candidate>, n: usize) -> Vec<Candidate> {
    c.sort_by(better);
    c.truncate(n);
    c
}

/// Local maxima of the grid on the index range `[k0, k1)`, best first.
fn scan_block(
    poly: &LambdaPolynomial,
    lo: f64,
    step: f64,
    count: u64,
    k0: u64,
    k1: u64,
    keep: usize,
) -> Vec<Candidate> {
    let len = (k1 - k0) as usize;
    let mut vals = vec![0.0; len + 2];
    poly.eval_grid_real_into(lo, step, k0 as usize, &mut vals[1..=len]).expect("step checked");
    // halo points, taken from aligned evaluations so they match the
    // neighbouring blocks bit for bit
    vals[0] = if k0 > 0 {
        let start = k0 as usize - ANCHOR_INTERVAL;
        let mut prev = vec![0.0; ANCHOR_INTERVAL];
        poly.eval_grid_real_into(lo, step, start, &mut prev).expect("step checked");
        prev[ANCHOR_INTERVAL - 1]
    } else {
        f64::NEG_INFINITY
    };
    vals[len + 1] = if k1 < count {
        let mut next = [0.0];
        poly.eval_grid_real_into(lo, step, k1 as usize, &mut next).expect("step checked");
        next[0]
    } else {
        f64::NEG_INFINITY
    };
    let mut out = Vec::new();
    for i in 1..=len {
        let v = vals[i];
        if v > vals[i - 1] && v >= vals[i + 1] {
            out.push(Candidate { k: k0 + i as u64 - 1, value: v });
        }
    }
    keep_top(out, keep)
}

/// The `top_k` largest local records of `Re D_Y` on the grid
/// `T^β + k·grid_step`, each refined over two steps either side. The
/// result does not depend on the number of worker threads.
pub fn scan_max(
    poly: &LambdaPolynomial,
    t: f64,
    beta: f64,
    grid_step: f64,
    top_k: usize,
) -> Result<Vec<ExtremeRecord>> {
    let (lo, hi) = scan_range(t, beta)?;
    scan_interval(poly, lo, hi, grid_step, top_k)
}

/// [`scan_max`] over an explicit interval.
pub fn scan_interval(
    poly: &LambdaPolynomial,
    lo: f64,
    hi: f64,
    grid_step: f64,
    top_k: usize,
) -> Result<Vec<ExtremeRecord>> {
    if !(hi > lo) {
        return Err(Error::domain(format!("empty range [{lo}, {hi}]")));
    }
    if !(grid_step > 0.0) {
        return Err(Error::domain(format!("grid step {grid_step} must be positive")));
    }
    let required = max_grid_step(poly);
    if grid_step > required {
        return Err(Error::Resolution { step: grid_step, required });
    }
    if top_k == 0 {
        return Ok(Vec::new());
    }
    let count_f = ((hi - lo) / grid_step).floor() + 1.0;
    if count_f > MAX_SCAN_POINTS as f64 {
        return Err(Error::Resource(format!("{count_f} grid points exceed {MAX_SCAN_POINTS}")));
    }
    let count = count_f as u64;
    let keep = 2 * top_k + 4;
    let blocks = count.div_ceil(SCAN_BLOCK as u64);
    let per_block: Vec<Vec<Candidate>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let k0 = b * SCAN_BLOCK as u64;
            let k1 = (k0 + SCAN_BLOCK as u64).min(count);
            scan_block(poly, lo, grid_step, count, k0, k1, keep)
        })
        .collect();
    let mut merged = keep_top(per_block.into_iter().flatten().collect(), keep);
    if merged.is_empty() {
        // constant objective: the first grid point is as good as any
        merged.push(Candidate { k: 0, value: poly.eval_real(lo) });
    }
    let mut records: Vec<ExtremeRecord> = merged
        .par_iter()
        .map(|c| {
            let t0 = lo + c.k as f64 * grid_step;
            let a = (t0 - 2.0 * grid_step).max(lo);
            let b = (t0 + 2.0 * grid_step).min(hi);
            let mut r = refine_in(poly, t0, a, b);
            r.grid_step = grid_step;
            r
        })
        .collect();
    records.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.location.total_cmp(&b.location)));
    let mut out: Vec<ExtremeRecord> = Vec::with_capacity(top_k);
    for r in records {
        if out.iter().all(|o| (o.location - r.location).abs() >= grid_step) {
            out.push(r);
        }
        if out.len() == top_k {
            break;
        }
    }
    Ok(out)
}

const TAG_WEIGHTED: u64 = 0x5745_4947_4854; // "WEIGHT"
const TAG_UNIFORM: u64 = 0x554e_4946; // "UNIF"
const TAG_MEASURE: u64 = 0x4d45_4153; // "MEAS"

/// Metropolis proposal width `2π / log 2`, one period of the `p = 2` factor.
pub fn proposal_width() -> f64 {
    std::f64::consts::TAU / std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub record: ExtremeRecord,
    /// Objective evaluations spent.
    pub samples: usize,
    /// Metropolis steps taken and accepted (equal for uniform sampling).
    pub steps: usize,
    pub accepted: usize,
    /// Best objective before refinement.
    pub raw_best: f64,
}

/// Chain layout for [`weighted_sample_max`]. The objective is read only on
/// thinned states, so the sample budget counts objective evaluations; the
/// density `|R|²Φ` costs `π(X)` operations and is cheap by comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub samples_per_chain: usize,
    pub thin: usize,
    pub burn_in: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { samples_per_chain: 4, thin: 20, burn_in: 200 }
    }
}

struct ChainResult {
    best: (f64, f64),
    samples: usize,
    steps: usize,
    accepted: usize,
}

/// Metropolis sampling of `|R(t)|² Φ(t log T / T)` restricted to
/// `[T^β, T]` with uniform proposals of width [`proposal_width`].
/// Independent chains start at uniform points, each with its own counter
/// stream; the best sampled objective is refined over one proposal width.
pub fn weighted_sample_max(
    poly: &LambdaPolynomial,
    spec: &ResonatorSpec,
    t: f64,
    beta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<SampleOutcome> {
    weighted_sample_max_with(poly, spec, t, beta, n_samples, seed, SamplerConfig::default())
}

pub fn weighted_sample_max_with(
    poly: &LambdaPolynomial,
    spec: &ResonatorSpec,
    t: f64,
    beta: f64,
    n_samples: usize,
    seed: u64,
    config: SamplerConfig,
) -> Result<SampleOutcome> {
    if n_samples < 1 {
        return Err(Error::domain("at least one sample is required"));
    }
    if config.samples_per_chain < 1 || config.thin < 1 {
        return Err(Error::domain("samples per chain and thinning must be at least 1"));
    }
    let (lo, hi) = scan_range(t, beta)?;
    let a = gaussian_width(t)?;
    // fail early on a divergent product
    log_abs_r_squared(lo, spec)?;
    let log_density = |s: f64| {
        let u = s / a;
        log_abs_r_squared(s, spec).expect("checked convergent") - 0.5 * u * u
    };
    let width = proposal_width();
    let chains = n_samples.div_ceil(config.samples_per_chain);
    let results: Vec<ChainResult> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let quota = config.samples_per_chain.min(n_samples - c * config.samples_per_chain);
            let mut rng = CounterRng::new(seed, TAG_WEIGHTED.wrapping_add(c as u64));
            let mut state = lo + rng.next_f64() * (hi - lo);
            let mut ld = log_density(state);
            let mut out = ChainResult { best: (state, f64::NEG_INFINITY), samples: 0, steps: 0, accepted: 0 };
            let total = config.burn_in + quota * config.thin;
            for step in 0..total {
                let proposal = state + (rng.next_f64() - 0.5) * width;
                let u = rng.next_f64();
                out.steps += 1;
                if proposal >= lo && proposal <= hi {
                    let ld_new = log_density(proposal);
                    if u.ln() < ld_new - ld {
                        state = proposal;
                        ld = ld_new;
                        out.accepted += 1;
                    }
                }
                if step >= config.burn_in && (step - config.burn_in + 1).is_multiple_of(config.thin) {
                    let v = poly.eval_real(state);
                    out.samples += 1;
                    if v > out.best.1 {
                        out.best = (state, v);
                    }
                }
            }
            out
        })
        .collect();
    let mut best = (lo, f64::NEG_INFINITY);
    let (mut samples, mut steps, mut accepted) = (0, 0, 0);
    for r in &results {
        if r.best.1 > best.1 {
            best = r.best;
        }
        samples += r.samples;
        steps += r.steps;
        accepted += r.accepted;
    }
    if accepted == 0 {
        return Err(Error::SamplerStall { proposals: steps });
    }
    let mut record = refine_in(poly, best.0, (best.0 - width / 2.0).max(lo), (best.0 + width / 2.0).min(hi));
    record.method = Method::WeightedSample;
    record.grid_step = width;
    Ok(SampleOutcome { record, samples, steps, accepted, raw_best: best.1 })
}

/// Baseline: `n_samples` uniform draws on `[T^β, T]`, best refined the same
/// way as [`weighted_sample_max`].
pub fn uniform_sample_max(
    poly: &LambdaPolynomial,
    t: f64,
    beta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<SampleOutcome> {
    if n_samples < 1 {
        return Err(Error::domain("at least one sample is required"));
    }
    let (lo, hi) = scan_range(t, beta)?;
    let key = rng::stream_key(seed, TAG_UNIFORM);
    let values: Vec<(f64, f64)> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let s = lo + rng::to_unit(rng::draw(key, i)) * (hi - lo);
            (s, poly.eval_real(s))
        })
        .collect();
    let mut best = values[0];
    for &v in &values[1..] {
        if v.1 > best.1 {
            best = v;
        }
    }
    let width = proposal_width();
    let mut record = refine_in(poly, best.0, (best.0 - width / 2.0).max(lo), (best.0 + width / 2.0).min(hi));
    record.grid_step = width;
    Ok(SampleOutcome { record, samples: n_samples, steps: n_samples, accepted: n_samples, raw_best: best.1 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub fraction: f64,
    pub stderr: f64,
    pub threshold: f64,
    pub hits: u64,
    pub samples: u64,
    /// `1 - (1-β) e^{-x}`, the exponent in the asymptotic lower bound
    /// `meas >= T^{exponent + o(1)}`; reported only.
    pub lower_bound_exponent: f64,
    pub range_length: f64,
}

/// Monte-Carlo estimate of the share of `[T^β, T]` on which
/// `Re D_Y >= (log₂T/log₃T)((e^A-1)/A·log₃T - x)`.
#[allow(clippy::too_many_arguments)]
pub fn measure_estimate(
    poly: &LambdaPolynomial,
    t: f64,
    beta: f64,
    a: f64,
    x: f64,
    e: f64,
    n_samples: u64,
    seed: u64,
) -> Result<MeasureReport> {
    if n_samples < 100 {
        return Err(Error::domain(format!("{n_samples} samples; at least 100 required")));
    }
    let (lo, hi) = scan_range(t, beta)?;
    let spec = ThresholdSpec::new(Scale::from_value(t)?, a, x, e)?;
    let key = rng::stream_key(seed, TAG_MEASURE);
    let hits: u64 = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let s = lo + rng::to_unit(rng::draw(key, i)) * (hi - lo);
            u64::from(poly.eval_real(s) >= spec.threshold)
        })
        .sum();
    let fraction = hits as f64 / n_samples as f64;
    let stderr = (fraction * (1.0 - fraction) / n_samples as f64).sqrt();
    Ok(MeasureReport {
        fraction,
        stderr,
        threshold: spec.threshold,
        hits,
        samples: n_samples,
        lower_bound_exponent: 1.0 - (1.0 - beta) * (-x).exp(),
        range_length: hi - lo,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaPlan {
    pub parameters: Parameters,
    pub kappa1_holds: bool,
    pub kappa2_holds: bool,
    /// Upper limits on `κ` from the two constraints.
    pub kappa1_limit: f64,
    pub kappa2_limit: f64,
    /// Smallest `κ` with `X >= 2`.
    pub kappa_floor: f64,
}

/// Resolution of the κ search.
pub const KAPPA_GRID: f64 = 1e-6;

/// Without `x`: the largest `κ` on a `10^{-6}` grid with both constraints
/// strict, provided it still gives `X >= 2`. With `x`: the closed form
/// `((1-β)/(2A))·exp(-x + (log T)^{-E} + f(T))`, flags reported.
pub fn kappa_plan(a: f64, beta: f64, scale: Scale, epsilon: f64, x: Option<f64>, e: f64) -> Result<KappaPlan> {
    // validates A, β, ε and log₂T > 2A
    let probe = Parameters::for_height(scale, a, beta, epsilon, 1.0)?;
    let sigma = probe.sigma_a;
    let kappa1_limit = (1.0 - beta) / (2.0 * a);
    let kappa2_limit = (1.0 - zero_density_exponent(sigma, epsilon)) / (2.0 * a);
    let kappa_floor = 2.0 / (scale.log() * scale.loglog());
    let kappa = match x {
        Some(x) => {
            if !(x > 0.0) {
                return Err(Error::domain(format!("x = {x} must be positive")));
            }
            kappa1_limit * (-x + (-e * scale.loglog()).exp() + scale.f_value()).exp()
        }
        None => {
            let limit = kappa1_limit.min(kappa2_limit);
            let mut k = (limit / KAPPA_GRID).floor() * KAPPA_GRID;
            while k > 0.0 && (kappa1_margin(beta, a, k) <= 0.0 || kappa2_margin(a, k, sigma, epsilon) <= 0.0) {
                k -= KAPPA_GRID;
            }
            if k <= 0.0 || k < kappa_floor {
                let constraint = if kappa1_limit <= kappa2_limit {
                    "kappa1: beta + 2 A kappa < 1"
                } else {
                    "kappa2: 2 A kappa + 3(1-sigma_A+eps)/(2-sigma_A+eps) < 1"
                };
                return Err(Error::Infeasible { constraint });
            }
            k
        }
    };
    let mut parameters = Parameters::for_height(scale, a, beta, epsilon, kappa)?.with_e(e);
    if let Some(x) = x {
        parameters = parameters.with_offset(x);
    }
    Ok(KappaPlan {
        kappa1_holds: parameters.kappa1_holds(),
        kappa2_holds: parameters.kappa2_holds(),
        parameters,
        kappa1_limit,
        kappa2_limit,
        kappa_floor,
    })
}

/// One sampled height for [`classify_vwz`]. `logderiv` is `-Re ζ'/ζ(σ_A+it)`
/// with its error bound when the reference evaluation succeeded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VwzPoint {
    pub t: f64,
    pub objective: f64,
    pub logderiv: Option<f64>,
    pub logderiv_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VwzCounts {
    pub total: usize,
    pub v: usize,
    pub w: usize,
    /// Points with a reference value, and how many of them are in `Z_x`.
    pub with_reference: usize,
    pub z: usize,
    /// `W`-points whose proxy error is below the gap, and how many of
    /// those are in `Z_x`; the two agree when `W ⊆ Z` is confirmed.
    pub w_checkable: usize,
    pub w_in_z: usize,
}

pub fn classify_vwz(points: &[VwzPoint], scale: Scale, a: f64, x: f64, e: f64) -> Result<VwzCounts> {
    let spec = ThresholdSpec::new(scale, a, x, e)?;
    let gap = spec.w_threshold - spec.threshold;
    let mut c = VwzCounts { total: points.len(), v: 0, w: 0, with_reference: 0, z: 0, w_checkable: 0, w_in_z: 0 };
    for p in points {
        let in_w = p.objective > spec.w_threshold;
        if in_w {
            c.w += 1;
        } else {
            c.v += 1;
        }
        if let Some(l) = p.logderiv {
            c.with_reference += 1;
            let in_z = l > spec.threshold;
            c.z += usize::from(in_z);
            if in_w && (p.objective - l).abs() + p.logderiv_error <= gap {
                c.w_checkable += 1;
                c.w_in_z += usize::from(in_z);
            }
        }
    }
    Ok(c)
}

/// One comparison of `D_Y(σ+it)` against `-ζ'/ζ(σ+it)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyPoint {
    pub t: f64,
    pub proxy_re: f64,
    pub proxy_im: f64,
    pub reference_re: f64,
    pub reference_im: f64,
    /// Error bound of the reference value.
    pub reference_error: f64,
    /// `|D_Y - (-ζ'/ζ)|`
    pub deviation: f64,
    pub zeta_modulus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyReport {
    pub points: Vec<ProxyPoint>,
    /// Heights where the reference refused because `|ζ|` was too small.
    pub near_zero: Vec<f64>,
    pub candidates: usize,
}

const TAG_PROXY: u64 = 0x5052_4f58; // "PROX"

/// Points kept by [`proxy_check`] stay this far from every near-zero flag.
pub const NEAR_ZERO_EXCLUSION: f64 = 0.5;

/// Compare the polynomial with the reference log-derivative at `n_points`
/// uniform heights in `[t_min, t_max]`, discarding heights within
/// [`NEAR_ZERO_EXCLUSION`] of any candidate the reference flagged.
pub fn proxy_check(
    poly: &LambdaPolynomial,
    t_min: f64,
    t_max: f64,
    n_points: usize,
    seed: u64,
    target: f64,
) -> Result<ProxyReport> {
    if !(t_max > t_min) {
        return Err(Error::domain(format!("empty range [{t_min}, {t_max}]")));
    }
    let sigma = poly.sigma();
    let key = rng::stream_key(seed, TAG_PROXY);
    let mut evaluated: Vec<ProxyPoint> = Vec::new();
    let mut near_zero = Vec::new();
    let mut index = 0u64;
    let budget = 100 * n_points.max(1) as u64;
    let kept = |evaluated: &[ProxyPoint], flags: &[f64]| -> Vec<ProxyPoint> {
        evaluated.iter().filter(|p| flags.iter().all(|f| (p.t - f).abs() >= NEAR_ZERO_EXCLUSION)).copied().collect()
    };
    loop {
        let current = kept(&evaluated, &near_zero);
        if current.len() >= n_points {
            return Ok(ProxyReport { points: current[..n_points].to_vec(), near_zero, candidates: index as usize });
        }
        if index >= budget {
            return Err(Error::Resource(format!("{budget} candidates gave only {} usable points", current.len())));
        }
        let t = t_min + rng::to_unit(rng::draw(key, index)) * (t_max - t_min);
        index += 1;
        match crate::zetaref::log_deriv_zeta(crate::zetaref::ComplexPoint::new(sigma, t), target) {
            Ok(ld) => {
                let proxy = poly.eval_at(t);
                let reference = -ld.value;
                evaluated.push(ProxyPoint {
                    t,
                    proxy_re: proxy.re,
                    proxy_im: proxy.im,
                    reference_re: reference.re,
                    reference_im: reference.im,
                    reference_error: ld.error,
                    deviation: (proxy - reference).norm(),
                    zeta_modulus: ld.zeta_modulus,
                });
            }
            Err(Error::NearZero { .. }) => near_zero.push(t),
            Err(e) => return Err(e),
        }
    }
}
