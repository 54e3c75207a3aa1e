use rayon::prelude::*;
use resonance_core::charmod::{count_exceeding, max_over_characters};
use resonance_core::moments::moment_report;
use resonance_core::numthy::sieve;
use resonance_core::resonator::{
    growth_factor, log_abs_r_squared, log_abs_r_squared_bound, predicted_bound, prime_sum_asymptotic_check,
    resonance_gain, sum_r, sum_r_squared, DEFAULT_E,
};
use resonance_core::search::{
    classify_vwz, kappa_plan, max_grid_step, measure_estimate, proxy_check, scan_max, scan_range, ThresholdSpec,
    VwzPoint,
};
use resonance_core::zetaref::{log_deriv_zeta, MIN_SIGMA};
use resonance_core::{rng, ComplexPoint, LambdaPolynomial, PrimeTable, ResonatorSpec, Scale};
use serde_json::{json, Value};

use crate::config::{Command, Height, Params, RunConfig};
use crate::output::{Cell, Table};
use crate::CliError;

/// Accuracy asked of the reference `ζ'/ζ`.
const REFERENCE_TARGET: f64 = 1e-8;
const MAX_ROWS: f64 = 1e6;
/// Heights classified into `V`/`W` by `measure-set`.
const VWZ_POINTS: u64 = 200;
const TAG_VWZ: u64 = 0x5657_5a00;

pub fn run(cfg: &mut RunConfig) -> Result<Table, CliError> {
    let allowed: &[&str] = match cfg.command {
        Command::PredictBound => &["A", "log2_t", "T"],
        Command::PrimeSum => &["X", "sigma"],
        Command::GainTrend => &["A", "kappa", "T"],
        Command::ResonatorStats => &["T", "A", "kappa", "X", "t_min", "t_max", "grid_step"],
        Command::MomentsToy => &["T", "A", "beta", "X", "Y", "nmax", "grid_points", "grid_step"],
        Command::ScanZeta => &["T", "A", "beta", "Y", "grid_step", "top_k", "x", "E"],
        Command::VerifyLemma1 => &["sigma", "Y", "t_min", "t_max", "samples"],
        Command::MeasureSet => &["T", "A", "beta", "Y", "x", "E", "samples"],
        Command::ScanCharacters => &["q", "A", "Y"],
        Command::CountExceeding => &["q", "A", "x", "Y", "include_principal"],
        Command::KappaPlan => &["T", "A", "beta", "epsilon", "x", "E"],
    };
    if let Some(k) = cfg.parameters.keys().into_iter().find(|k| !allowed.contains(&k.as_str())) {
        return Err(CliError::invalid(&k, format!("not a parameter of {}", cfg.command)));
    }
    let p = &mut cfg.parameters;
    let mut derived = serde_json::Map::new();
    let table = match cfg.command {
        Command::PredictBound => predict_bound(p, &mut derived)?,
        Command::PrimeSum => prime_sum(p)?,
        Command::GainTrend => gain_trend(p)?,
        Command::ResonatorStats => resonator_stats(p, &mut derived)?,
        Command::MomentsToy => moments_toy(p, &mut derived)?,
        Command::ScanZeta => scan_zeta(p, &mut derived)?,
        Command::VerifyLemma1 => verify_lemma1(p, cfg.seed, &mut derived)?,
        Command::MeasureSet => measure_set(p, cfg.seed, &mut derived)?,
        Command::ScanCharacters => scan_characters(p)?,
        Command::CountExceeding => count(p)?,
        Command::KappaPlan => kappa(p, &mut derived)?,
    };
    cfg.derived = Value::Object(derived);
    Ok(table)
}

fn get<T: Clone>(slot: &mut Option<T>, default: T) -> T {
    slot.get_or_insert(default).clone()
}

fn height(p: &mut Params, default: &str) -> Result<Scale, CliError> {
    let h = get(&mut p.t, Height::Text(default.into()));
    Ok(Scale::from_log(h.log()?)?)
}

fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::invalid(key, format!("{v} must be positive")))
    }
}

fn table_for(limit: f64) -> Result<PrimeTable, CliError> {
    Ok(sieve((limit.floor() as u64).max(2))?)
}

fn predict_bound(p: &mut Params, d: &mut serde_json::Map<String, Value>) -> Result<Table, CliError> {
    let a = positive("A", get(&mut p.a, 1.0))?;
    let log2 = match (&p.t, p.log2_t) {
        (Some(_), Some(_)) => return Err(CliError::invalid("log2_t", "give either T or log2_t".into())),
        (Some(h), None) => Scale::from_log(h.log()?)?.loglog(),
        (None, _) => get(&mut p.log2_t, 10.0),
    };
    d.insert("growth_factor".into(), json!(growth_factor(a)));
    let mut t = Table::new(&["A", "log2_t", "growth_factor", "value"]);
    t.push(vec![a.into(), log2.into(), growth_factor(a).into(), predicted_bound(a, log2).into()]);
    Ok(t)
}

fn prime_sum(p: &mut Params) -> Result<Table, CliError> {
    let x = positive("X", get(&mut p.x_bound, 1e7))?;
    let sigma = get(&mut p.sigma, 0.8);
    let table = table_for(x + 1.0)?;
    let r = prime_sum_asymptotic_check(x, sigma, &table)?;
    let mut t = Table::new(&["X", "sigma", "exact", "main_term", "relative_deviation", "tolerance", "empty_range"]);
    t.push(vec![
        r.x.into(),
        r.sigma.into(),
        r.exact.into(),
        r.main_term.into(),
        r.relative_deviation.into(),
        (2.0 / x.ln()).into(),
        r.empty_range.into(),
    ]);
    Ok(t)
}

fn gain_trend(p: &mut Params) -> Result<Table, CliError> {
    let a = positive("A", get(&mut p.a, 1.0))?;
    let kappa = positive("kappa", get(&mut p.kappa, 0.1))?;
    let logs = get(&mut p.t, Height::Text("10^10^2,10^10^3,10^10^4".into())).list()?;
    let scales: Vec<Scale> = logs.into_iter().map(Scale::from_log).collect::<Result<_, _>>()?;
    let top = scales.iter().map(|s| s.x_bound(kappa)).fold(2.0, f64::max);
    let table = table_for(top + 1.0)?;
    let mut t =
        Table::new(&["log_t", "loglog_t", "sigma_a", "X", "primes", "rp", "gain", "main_term", "ratio", "deviation"]);
    for s in scales {
        let sigma = s.sigma_a(a);
        let spec = ResonatorSpec::new(s.x_bound(kappa), sigma, &table)?;
        let gain = resonance_gain(&spec, sigma);
        let main = predicted_bound(a, s.loglog());
        t.push(vec![
            s.log().into(),
            s.loglog().into(),
            sigma.into(),
            spec.x_bound().into(),
            spec.primes().len().into(),
            spec.rp().into(),
            gain.into(),
            main.into(),
            (gain / main).into(),
            (gain / main - 1.0).abs().into(),
        ]);
    }
    Ok(t)
}

fn resonator_stats(p: &mut Params, d: &mut serde_json::Map<String, Value>) -> Result<Table, CliError> {
    let scale = height(p, "1e5")?;
    let a = positive("A", get(&mut p.a, 1.0))?;
    let kappa = positive("kappa", get(&mut p.kappa, 0.1))?;
    let x = positive("X", get(&mut p.x_bound, scale.x_bound(kappa)))?;
    let lo = get(&mut p.t_min, 0.0);
    let hi = get(&mut p.t_max, 100.0);
    let step = positive("grid_step", get(&mut p.grid_step, 10.0))?;
    if !(hi >= lo) || (hi - lo) / step > MAX_ROWS {
        return Err(CliError::invalid("t_max", format!("[{lo}, {hi}] with step {step} is empty or too long")));
    }
    let sigma = scale.sigma_a(a);
    let table = table_for(x + 1.0)?;
    let spec = ResonatorSpec::new(x, sigma, &table)?;
    d.insert("sigma_a".into(), json!(sigma));
    d.insert("X".into(), json!(x));
    d.insert("rp".into(), json!(spec.rp()));
    d.insert("primes".into(), json!(spec.primes().len()));
    d.insert("sum_r".into(), json!(sum_r(&spec)?));
    d.insert("sum_r_squared".into(), json!(sum_r_squared(&spec)?));
    d.insert("gain".into(), json!(resonance_gain(&spec, sigma)));
    let bound = log_abs_r_squared_bound(&spec);
    let count = ((hi - lo) / step).floor() as usize + 1;
    let mut t = Table::new(&["t", "log_abs_r_squared", "bound"]);
    for i in 0..count {
        let ti = lo + i as f64 * step;
        t.push(vec![ti.into(), log_abs_r_squared(ti, &spec)?.into(), bound.into()]);
    }
    Ok(t)
}

fn moments_toy(p: &mut Params, d: &mut serde_json::Map<String, Value>) -> Result<Table, CliError> {
    let scale = height(p, "1e4")?;
    let a = positive("A", get(&mut p.a, 1.0))?;
    let beta = get(&mut p.beta, 0.5);
    let x = positive("X", get(&mut p.x_bound, 5.0))?;
    let y = get(&mut p.y, 50);
    let nmax = get(&mut p.nmax, 10_000);
    let grid_points = get(&mut p.grid_points, 1_000_000);
    let sigma = scale.sigma_a(a);
    let t_val = scale.value();
    let table = table_for(x.max(y as f64) + 1.0)?;
    let spec = ResonatorSpec::new(x, sigma, &table)?;
    let poly = LambdaPolynomial::build(y, sigma, &table)?;
    let step = positive("grid_step", get(&mut p.grid_step, max_grid_step(&poly) / 4.0))?;
    let r = moment_report(&spec, &poly, t_val, beta, nmax, grid_points)?;
    let fine = scan_max(&poly, t_val, beta, step, 1)?;
    let fine_max = fine.first().map_or(f64::NAN, |rec| rec.value);
    d.insert("sigma_a".into(), json!(sigma));
    d.insert("rp".into(), json!(spec.rp()));
    let mut t = Table::new(&[
        "X",
        "Y",
        "sigma_a",
        "i1",
        "i1_tail",
        "i2",
        "i2_tail",
        "i2_restricted",
        "gain",
        "tail_bound",
        "ratio_i",
        "m1",
        "m1_error",
        "m2",
        "m2_error",
        "ratio_m",
        "fine_max",
        "fine_step",
    ]);
    t.push(vec![
        x.into(),
        y.into(),
        sigma.into(),
        r.i1.into(),
        r.i1_tail.into(),
        r.i2.into(),
        r.i2_tail.into(),
        r.i2_restricted.into(),
        r.gain.into(),
        r.tail_bound.into(),
        r.ratio_i.into(),
        r.m1.into(),
        r.m1_error.into(),
        r.m2.into(),
        r.m2_error.into(),
        r.ratio_m.into(),
        fine_max.into(),
        step.into(),
    ]);
    Ok(t)
}

fn threshold_spec(p: &mut Params, scale: Scale, a: f64) -> Result<Option<ThresholdSpec>, CliError> {
    match p.x {
        Some(x) => {
            let e = get(&mut p.e, DEFAULT_E);
            Ok(Some(ThresholdSpec::new(scale, a, x, e)?))
        }
        None => Ok(None),
    }
}

fn scan_zeta(p: &mut Params, d: &mut serde_json::Map<String, Value>) -> Result<Table, CliError> {
    let scale = height(p, "1e5")?;
    let a = positive("A", get(&mut p.a, 1.0))?;
    let beta = get(&mut p.beta, 0.5);
    let y = get(&mut p.y, 10_000);
    let top_k = get(&mut p.top_k, 5);
    let sigma = scale.sigma_a(a);
    let table = table_for(y as f64 + 1.0)?;
    let poly = LambdaPolynomial::build(y, sigma, &table)?;
    let step = positive("grid_step", get(&mut p.grid_step, max_grid_step(&poly)))?;
    let threshold = threshold_spec(p, scale, a)?;
    let t_val = scale.value();
    let (lo, hi) = scan_range(t_val, beta)?;
    let records = scan_max(&poly, t_val, beta, step, top_k)?;
    d.insert("sigma_a".into(), json!(sigma));
    d.insert("Y".into(), json!(y));
    d.insert("terms".into(), json!(poly.len()));
    d.insert("t_lo".into(), json!(lo));
    d.insert("t_hi".into(), json!(hi));
    if let Some(th) = &threshold {
        d.insert("threshold".into(), json!(th.threshold));
    }
    let mut t = Table::new(&["rank", "t", "value", "method", "grid_step", "refined", "exceeds_threshold"]);
    for (i, r) in records.iter().enumerate() {
        let exceeds = threshold.as_ref().map_or(Cell::Empty, |th| Cell::B(r.value >= th.threshold));
        t.push(vec![
            (i + 1).into(),
            r.location.into(),
            r.value.into(),
            r.method.as_str().into(),
            r.grid_step.into(),
            r.refined.into(),
            exceeds,
        ]);
    }
    Ok(t)
}

fn verify_lemma1(p: &mut Params, seed: u64, d: &mut serde_json::Map<String, Value>) -> Result<Table, CliError> {
    let sigma = get(&mut p.sigma, 0.98);
    let y = get(&mut p.y, 1_000_000);
    let lo = get(&mut p.t_min, 100.0);
    let hi = get(&mut p.t_max, 1000.0);
    let n = get(&mut p.samples, 20);
    let table = table_for(y as f64 + 1.0)?;
    let poly = LambdaPolynomial::build(y, sigma, &table)?;
    let rep = proxy_check(&poly, lo, hi, n as usize, seed, REFERENCE_TARGET)?;
    let worst = rep.points.iter().map(|q| q.deviation).fold(0.0, f64::max);
    d.insert("terms".into(), json!(poly.len()));
    d.insert("near_zero_flags".into(), json!(rep.near_zero));
    d.insert("candidates".into(), json!(rep.candidates));
    d.insert("max_deviation".into(), json!(worst));
    let mut t = Table::new(&[
        "t",
        "proxy_re",
        "proxy_im",
        "reference_re",
        "reference_im",
        "reference_error",
        "deviation",
        "zeta_modulus",
    ]);
    for q in &rep.points {
        t.push(vec![
            q.t.into(),
            q.proxy_re.into(),
            q.proxy_im.into(),
            q.reference_re.into(),
            q.reference_im.into(),
            q.reference_error.into(),
            q.deviation.into(),
            q.zeta_modulus.into(),
        ]);
    }
    Ok(t)
}

fn measure_set(p: &mut Params, seed: u64, d: &mut serde_json::Map<String, Value>) -> Result<Table, CliError> {
    let scale = height(p, "1e5")?;
    let a = positive("A", get(&mut p.a, 1.0))?;
    let beta = get(&mut p.beta, 0.5);
    let y = get(&mut p.y, 10_000);
    let x = get(&mut p.x, 1.0);
    let e = get(&mut p.e, DEFAULT_E);
    let n = get(&mut p.samples, 10_000);
    let sigma = scale.sigma_a(a);
    let table = table_for(y as f64 + 1.0)?;
    let poly = LambdaPolynomial::build(y, sigma, &table)?;
    let t_val = scale.value();
    let m = measure_estimate(&poly, t_val, beta, a, x, e, n, seed)?;

    // V/W/Z classification on a smaller independent sample
    let (lo, hi) = scan_range(t_val, beta)?;
    let key = rng::stream_key(seed, TAG_VWZ);
    let points: Vec<VwzPoint> = (0..VWZ_POINTS.min(n))
        .into_par_iter()
        .map(|i| {
            let t = lo + rng::to_unit(rng::draw(key, i)) * (hi - lo);
            let reference = if sigma >= MIN_SIGMA {
                log_deriv_zeta(ComplexPoint::new(sigma, t), REFERENCE_TARGET).ok()
            } else {
                None
            };
            VwzPoint {
                t,
                objective: poly.eval_real(t),
                logderiv: reference.as_ref().map(|r| -r.value.re),
                logderiv_error: reference.map_or(f64::NAN, |r| r.error),
            }
        })
        .collect();
    let c = classify_vwz(&points, scale, a, x, e)?;
    d.insert("sigma_a".into(), json!(sigma));
    d.insert("Y".into(), json!(y));
    d.insert("t_lo".into(), json!(lo));
    d.insert("t_hi".into(), json!(hi));
    let mut t = Table::new(&[
        "fraction",
        "stderr",
        "threshold",
        "hits",
        "samples",
        "lower_bound_exponent",
        "range_length",
        "vwz_points",
        "v",
        "w",
        "with_reference",
        "z",
        "w_checkable",
        "w_in_z",
    ]);
    t.push(vec![
        m.fraction.into(),
        m.stderr.into(),
        m.threshold.into(),
        m.hits.into(),
        m.samples.into(),
        m.lower_bound_exponent.into(),
        m.range_length.into(),
        c.total.into(),
        c.v.into(),
        c.w.into(),
        c.with_reference.into(),
        c.z.into(),
        c.w_checkable.into(),
        c.w_in_z.into(),
    ]);
    Ok(t)
}

fn scan_characters(p: &mut Params) -> Result<Table, CliError> {
    let q = get(&mut p.q, 1009);
    let a = positive("A", get(&mut p.a, 1.0))?;
    let y = get(&mut p.y, 1000);
    let s = max_over_characters(q, a, y)?;
    let mut t =
        Table::new(&["q", "sigma_a", "best_index", "value", "best_is_quadratic", "mean", "std", "in_critical_regime"]);
    t.push(vec![
        s.q.into(),
        s.sigma_a.into(),
        (s.best.location as u64).into(),
        s.best.value.into(),
        s.best_is_quadratic.into(),
        s.mean.into(),
        s.std.into(),
        s.in_critical_regime.into(),
    ]);
    Ok(t)
}

fn count(p: &mut Params) -> Result<Table, CliError> {
    let q = get(&mut p.q, 1009);
    let a = positive("A", get(&mut p.a, 1.0))?;
    let x = get(&mut p.x, 3.0);
    let y = get(&mut p.y, 1000);
    let principal = get(&mut p.include_principal, false);
    let r = count_exceeding(q, a, x, y, principal)?;
    let mut t = Table::new(&["q", "sigma_a", "threshold", "count", "characters"]);
    t.push(vec![r.q.into(), r.sigma_a.into(), r.threshold.into(), r.count.into(), r.characters.into()]);
    Ok(t)
}

fn kappa(p: &mut Params, d: &mut serde_json::Map<String, Value>) -> Result<Table, CliError> {
    let scale = height(p, "10^10^3")?;
    let a = positive("A", get(&mut p.a, 1.0))?;
    let beta = get(&mut p.beta, 0.5);
    let sigma = scale.sigma_a(a);
    let epsilon = get(&mut p.epsilon, (sigma - 0.5) / 2.0);
    let e = get(&mut p.e, DEFAULT_E);
    d.insert("sigma_a".into(), json!(sigma));
    let plan = kappa_plan(a, beta, scale, epsilon, p.x, e)?;
    let par = &plan.parameters;
    d.insert("X".into(), json!(par.x_bound));
    d.insert("Y".into(), json!(par.y_cutoff));
    d.insert("log_y_formula".into(), json!(par.log_y_formula));
    let mut t = Table::new(&[
        "kappa",
        "X",
        "sigma_a",
        "kappa1_holds",
        "kappa2_holds",
        "kappa1_limit",
        "kappa2_limit",
        "kappa_floor",
        "Y",
        "log_y_formula",
    ]);
    t.push(vec![
        par.kappa.into(),
        par.x_bound.into(),
        par.sigma_a.into(),
        plan.kappa1_holds.into(),
        plan.kappa2_holds.into(),
        plan.kappa1_limit.into(),
        plan.kappa2_limit.into(),
        plan.kappa_floor.into(),
        par.y_cutoff.into(),
        par.log_y_formula.into(),
    ]);
    Ok(t)
}
