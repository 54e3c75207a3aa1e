use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    PredictBound,
    PrimeSum,
    GainTrend,
    ResonatorStats,
    MomentsToy,
    ScanZeta,
    VerifyLemma1,
    MeasureSet,
    ScanCharacters,
    CountExceeding,
    KappaPlan,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).expect("unit variant");
        f.write_str(v.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A height written as in the CLI: `1e5`, `10^10^3` (right associative),
/// `exp(1000)`. A config file may also give a plain number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Height {
    Number(f64),
    Text(String),
}

impl Height {
    /// `log T`; never forms `T` itself, so `10^10^4` is fine.
    pub fn log(&self) -> Result<f64, CliError> {
        match self {
            Height::Number(v) => log_of_number(*v, &v.to_string()),
            Height::Text(s) => parse_log(s.trim()).map_err(|m| CliError::invalid("T", format!("{s:?}: {m}"))),
        }
    }

    /// Comma separated list of heights.
    pub fn list(&self) -> Result<Vec<f64>, CliError> {
        match self {
            Height::Number(_) => Ok(vec![self.log()?]),
            Height::Text(s) => s.split(',').map(|p| Height::Text(p.trim().to_string()).log()).collect(),
        }
    }
}

fn log_of_number(v: f64, text: &str) -> Result<f64, CliError> {
    if v > 1.0 && v.is_finite() {
        Ok(v.ln())
    } else {
        Err(CliError::invalid("T", format!("{text} must be a finite number > 1")))
    }
}

fn parse_log(s: &str) -> Result<f64, String> {
    if let Some(inner) = s.strip_prefix("exp(").and_then(|r| r.strip_suffix(')')) {
        return parse_value(inner.trim());
    }
    if let Some((base, exp)) = s.split_once('^') {
        let b = parse_number(base.trim())?;
        if !(b > 1.0) {
            return Err(format!("base {b} must exceed 1"));
        }
        let e = parse_value(exp.trim())?;
        return Ok(e * b.ln());
    }
    let v = parse_number(s)?;
    if v > 1.0 && v.is_finite() {
        Ok(v.ln())
    } else {
        Err(format!("{v} must be a finite number > 1"))
    }
}

fn parse_value(s: &str) -> Result<f64, String> {
    if s.contains('^') || s.starts_with("exp(") {
        let l = parse_log(s)?;
        let v = l.exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("{s} overflows as an exponent"))
        }
    } else {
        parse_number(s)
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("cannot read {s:?} as a number"))
}

/// Every experiment parameter, keyed as on the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Height>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    pub e: Option<f64>,
    #[serde(rename = "Y", default, skip_serializing_if = "Option::is_none")]
    pub y: Option<u64>,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmax: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log2_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_principal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_k: Option<usize>,
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl Params {
    /// Keys of `other` that are set win.
    pub fn overlay(&mut self, other: &Params) {
        overlay!(
            self,
            other,
            t,
            q,
            a,
            beta,
            epsilon,
            kappa,
            x,
            e,
            y,
            x_bound,
            sigma,
            t_min,
            t_max,
            nmax,
            grid_points,
            log2_t,
            include_principal,
            grid_step,
            samples,
            top_k
        );
    }

    /// Names of the keys that are set.
    pub fn keys(&self) -> Vec<String> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(m)) => m.keys().cloned().collect(),
            _ => Vec::new(),
        }
    }
}

/// The full description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub parameters: Params,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    #[serde(default)]
    pub output_format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Written on output, ignored on input.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub derived: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tool_version: Option<String>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            parameters: Params::default(),
            seed: 0,
            output_path: None,
            output_format: Format::Csv,
            workers: None,
            derived: serde_json::Value::Null,
            tool_version: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Accepts either a bare config or a JSON output document
    /// (`{"config": ..., "rows": ...}`), so runs can be replayed.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        let value = match value {
            serde_json::Value::Object(mut m) if m.contains_key("rows") && m.contains_key("config") => {
                m.remove("config").unwrap_or_default()
            }
            v => v,
        };
        let mut cfg: RunConfig =
            serde_json::from_value(value).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        cfg.derived = serde_json::Value::Null;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log10_of(s: &str) -> f64 {
        Height::Text(s.into()).log().unwrap() / std::f64::consts::LN_10
    }

    #[test]
    fn heights() {
        assert!((log10_of("1e4") - 4.0).abs() < 1e-12);
        assert!((log10_of("10^5") - 5.0).abs() < 1e-12);
        assert!((log10_of("10^10^3") - 1000.0).abs() < 1e-9);
        assert!((Height::Text("exp(250)".into()).log().unwrap() - 250.0).abs() < 1e-12);
        assert!(Height::Text("0.5".into()).log().is_err());
        assert!(Height::Text("ten".into()).log().is_err());
        assert!(Height::Text("10^10^400".into()).log().is_err());
        assert_eq!(Height::Text("1e2, 1e3".into()).list().unwrap().len(), 2);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::from_json(r#"{"command":"prime-sum","parameters":{"Z":1}}"#).unwrap_err();
        assert!(err.to_string().contains('Z'), "{err}");
        assert!(RunConfig::from_json(r#"{"command":"prime-sum","colour":1}"#).is_err());
        assert!(RunConfig::from_json(r#"{"command":"nope"}"#).is_err());
    }

    #[test]
    fn overlay_prefers_set_keys() {
        let mut base = Params { a: Some(1.0), y: Some(10), ..Default::default() };
        base.overlay(&Params { a: Some(2.0), ..Default::default() });
        assert_eq!(base.a, Some(2.0));
        assert_eq!(base.y, Some(10));
        assert_eq!(base.keys(), vec!["A".to_string(), "Y".to_string()]);
    }
}
