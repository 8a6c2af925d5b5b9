//! The analysis description shared by the JSON spec file and the flags.

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use sharpfid::normal_gibbs::{Param, ScanOrder};
use sharpfid::{BumpDensity, GpdSpec, Tau};
use std::path::PathBuf;
use std::str::FromStr;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    NormalKnown,
    NormalGibbs,
    NormalDirect,
    Binomial,
    RelativeRisk,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::NormalKnown => "normal-known",
            Model::NormalGibbs => "normal-gibbs",
            Model::NormalDirect => "normal-direct",
            Model::Binomial => "binomial",
            Model::RelativeRisk => "relative-risk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Data summaries; which fields are needed depends on the model.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Data {
    pub xbar: Option<f64>,
    /// Standard error of x̄ (normal-known).
    pub se: Option<f64>,
    /// Known σ (normal-known, with n).
    pub sigma: Option<f64>,
    /// Sample standard deviation (normal-direct, normal-gibbs).
    pub sd: Option<f64>,
    pub n: Option<u64>,
    pub x: Option<u64>,
    pub e_t: Option<u64>,
    pub n_t: Option<u64>,
    pub e_c: Option<u64>,
    pub n_c: Option<u64>,
}

/// Either `eps` (about `centre`) or `lo` and `hi`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisSpec {
    pub eps: Option<f64>,
    pub centre: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub prior: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum GpdChoice {
    #[default]
    Flat,
    Smoothed {
        /// Beta shape pair; (4, 4) when absent.
        #[serde(default)]
        bump: Option<[f64; 2]>,
        /// Fixed τ; solved for continuity when absent.
        #[serde(default)]
        tau: Option<f64>,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub samples: Option<usize>,
    pub burn_in: Option<usize>,
    pub seed: Option<u64>,
    pub scan: Option<ScanArg>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    pub schema: u32,
    pub model: Model,
    #[serde(default)]
    pub data: Data,
    #[serde(default)]
    pub hypothesis: HypothesisSpec,
    #[serde(default)]
    pub gpd: GpdChoice,
    #[serde(default)]
    pub mc: McSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

impl AnalysisSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: AnalysisSpec = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("spec: {e}")))?;
        if spec.schema != SCHEMA {
            return Err(CliError::Usage(format!("spec schema {} is not supported (expected {SCHEMA})", spec.schema)));
        }
        Ok(spec)
    }

    pub fn gpd_for(&self, lo: f64, hi: f64) -> GpdSpec {
        match self.gpd {
            GpdChoice::Flat => GpdSpec::Flat,
            GpdChoice::Smoothed { bump, tau } => {
                let [alpha, beta] = bump.unwrap_or([4.0, 4.0]);
                let bump = match (self.model, self.hypothesis.eps) {
                    (Model::RelativeRisk, Some(eps)) => BumpDensity::LogScaleBetaOnRatio { alpha, beta, eps },
                    _ => BumpDensity::BetaOnInterval { alpha, beta, lo, hi },
                };
                GpdSpec::Smoothed { bump, tau: tau.map_or(Tau::Continuity, Tau::Fixed) }
            }
        }
    }
}

/// Scan order as written on the command line or in a spec.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ScanArg(pub ScanOrder);

impl FromStr for ScanArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let order = match s {
            "random" => ScanOrder::UniformRandom,
            "fixed:μσ" | "fixed:mu-sigma" => ScanOrder::Fixed(vec![Param::Mu, Param::Sigma]),
            "fixed:σμ" | "fixed:sigma-mu" => ScanOrder::Fixed(vec![Param::Sigma, Param::Mu]),
            _ => return Err(format!("unknown scan '{s}' (use fixed:μσ, fixed:σμ or random)")),
        };
        Ok(ScanArg(order))
    }
}

impl TryFrom<String> for ScanArg {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<ScanArg> for String {
    fn from(s: ScanArg) -> String {
        match s.0 {
            ScanOrder::UniformRandom => "random".into(),
            ScanOrder::Fixed(v) if v.first() == Some(&Param::Mu) => "fixed:μσ".into(),
            ScanOrder::Fixed(_) => "fixed:σμ".into(),
        }
    }
}

/// "a,b" into a shape pair.
pub fn parse_bump(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || format!("bump '{s}' must be two numbers a,b");
    if parts.len() != 2 {
        return Err(bad());
    }
    let a = parts[0].trim().parse().map_err(|_| bad())?;
    let b = parts[1].trim().parse().map_err(|_| bad())?;
    Ok([a, b])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trip() {
        let text = r#"{"schema":1,"model":"binomial","data":{"x":5,"n":16},
            "hypothesis":{"eps":0.01,"centre":0.5,"prior":0.3},
            "gpd":{"type":"smoothed","bump":[4,4]},"mc":{"samples":1000,"seed":3,"scan":"fixed:σμ"}}"#;
        let s = AnalysisSpec::from_json(text).unwrap();
        assert_eq!(s.model, Model::Binomial);
        assert_eq!(s.mc.scan, Some(ScanArg(ScanOrder::sigma_first())));
        let back = serde_json::to_string(&s).unwrap();
        assert!(AnalysisSpec::from_json(&back).is_ok());
    }

    #[test]
    fn rejects_unknown_fields_and_schema() {
        assert!(AnalysisSpec::from_json(r#"{"schema":1,"model":"binomial","extra":1}"#).is_err());
        assert!(AnalysisSpec::from_json(r#"{"schema":2,"model":"binomial"}"#).is_err());
        assert!(parse_bump("4;4").is_err());
        assert_eq!(parse_bump("2, 3").unwrap(), [2.0, 3.0]);
    }
}
