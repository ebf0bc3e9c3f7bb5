//! Model files.
//!
//! A model file is TOML with a strict schema; unknown keys are errors.
//!
//! ```toml
//! prior = 0.0            # P(change already happened at t = 0), in [0, 1)
//! delta = 0.9            # optional: every transition probability <= 1 - delta
//!
//! [change_point]         # optional, defaults to rule = "markovian"
//! rule = "markovian"     # or "geometric_warmup" with `rate = <in [0, 1)>`
//!
//! [[treatment]]          # one block per treatment, labelled 1, 2, ... in order
//! response = { family = "bernoulli", pre = 0.45 }
//! transition = 0.1       # p_x (the limiting value for geometric_warmup)
//! # initial_transition = 0.3   # geometric_warmup only: value at t = 1
//!
//! [[treatment]]
//! response = { family = "gaussian", mean_pre = 0.0, mean_post = 1.0 }
//! transition = 0.0
//!
//! [[procedure]]          # optional; used when no procedure is given on the command line
//! kind = "proposed:1,2"  # or "static:X" / "optimal"
//! alpha = 1e-3           # calibrate thresholds for this level, or give them:
//! # thresholds = { training = 3.7, detection = 999.0, test = 22.7 }   (proposed)
//! # threshold = 999.0                                                (static)
//! ```
//!
//! A model whose transition probabilities depend on the level is written as
//! one file per level.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::dp::PolicySet;
use crate::error::{Error, Result};
use crate::model::{ChangePointModel, GeometricWarmup, Model, ResponseFamily, ResponseModel};
use crate::procedures::{ProcedureKind, ProcedureSpec, Thresholds, TreatmentQuality};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    prior: f64,
    delta: Option<f64>,
    change_point: Option<RawChangePoint>,
    #[serde(default)]
    treatment: Vec<RawTreatment>,
    #[serde(default)]
    procedure: Vec<RawProcedure>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
enum RawChangePoint {
    Markovian,
    GeometricWarmup { rate: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTreatment {
    response: RawResponse,
    transition: f64,
    initial_transition: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum RawResponse {
    Bernoulli { pre: f64 },
    Gaussian { mean_pre: f64, mean_post: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProcedure {
    kind: String,
    alpha: Option<f64>,
    thresholds: Option<Thresholds>,
    threshold: Option<f64>,
}

/// How a configured procedure gets its thresholds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProcedureSetting {
    Level(f64),
    Thresholds(Thresholds),
    Threshold(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProcedureEntry {
    pub kind: ProcedureKind,
    pub setting: ProcedureSetting,
}

impl ProcedureEntry {
    /// The runnable procedure, with the level it was calibrated for if any.
    pub fn resolve(
        &self,
        quality: &TreatmentQuality,
        policies: Option<&PolicySet>,
    ) -> Result<(ProcedureSpec, Option<f64>)> {
        match (self.kind, self.setting) {
            (kind, ProcedureSetting::Level(alpha)) => {
                Ok((kind.instantiate(alpha, quality, policies)?, Some(alpha)))
            }
            (ProcedureKind::Proposed { train, assess }, ProcedureSetting::Thresholds(t)) => Ok((
                ProcedureSpec::Proposed {
                    train,
                    assess,
                    thresholds: t,
                },
                None,
            )),
            (ProcedureKind::Static { treatment }, ProcedureSetting::Threshold(b)) => Ok((
                ProcedureSpec::Static {
                    treatment,
                    threshold: b,
                },
                None,
            )),
            (kind, _) => Err(Error::Config(format!(
                "procedure '{kind}' does not take that kind of threshold"
            ))),
        }
    }
}

/// A parsed model file.
#[derive(Clone, Debug)]
pub struct ModelFile {
    pub model: Model,
    pub procedures: Vec<ProcedureEntry>,
}

pub fn load_model_file(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_model_file(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_model_file(text: &str) -> Result<ModelFile> {
    let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if raw.treatment.is_empty() {
        return Err(Error::Config(
            "at least one [[treatment]] is required".into(),
        ));
    }
    let families = raw
        .treatment
        .iter()
        .map(|t| match t.response {
            RawResponse::Bernoulli { pre } => ResponseFamily::bernoulli(pre),
            RawResponse::Gaussian {
                mean_pre,
                mean_post,
            } => ResponseFamily::gaussian(mean_pre, mean_post),
        })
        .collect::<Result<Vec<_>>>()?;
    let limits: Vec<f64> = raw.treatment.iter().map(|t| t.transition).collect();

    let change_point = match raw.change_point.unwrap_or(RawChangePoint::Markovian) {
        RawChangePoint::Markovian => {
            if let Some(x) = raw
                .treatment
                .iter()
                .position(|t| t.initial_transition.is_some())
            {
                return Err(Error::Config(format!(
                    "treatment {}: initial_transition is only valid with rule = \
                     \"geometric_warmup\"",
                    x + 1
                )));
            }
            ChangePointModel::markovian(raw.prior, limits)?
        }
        RawChangePoint::GeometricWarmup { rate } => {
            let initial = raw
                .treatment
                .iter()
                .enumerate()
                .map(|(x, t)| {
                    t.initial_transition.ok_or_else(|| {
                        Error::Config(format!(
                            "treatment {}: geometric_warmup needs initial_transition",
                            x + 1
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let rule = GeometricWarmup::new(limits, initial, rate)?;
            ChangePointModel::history_dependent(raw.prior, Arc::new(rule))?
        }
    };
    if let Some(delta) = raw.delta {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("delta = {delta} must lie in (0, 1)")));
        }
        if change_point.delta() < delta {
            return Err(Error::InvalidModel(format!(
                "a transition probability exceeds the declared bound 1 - delta = {}",
                1.0 - delta
            )));
        }
    }
    let model = Model::new(ResponseModel::new(families)?, change_point)?;

    let procedures = raw
        .procedure
        .iter()
        .map(|p| {
            let kind: ProcedureKind = p.kind.parse()?;
            let setting = match (p.alpha, p.thresholds, p.threshold) {
                (Some(a), None, None) => ProcedureSetting::Level(a),
                (None, Some(t), None) => ProcedureSetting::Thresholds(t),
                (None, None, Some(b)) => ProcedureSetting::Threshold(b),
                _ => {
                    return Err(Error::Config(format!(
                        "procedure '{}' needs exactly one of alpha, thresholds, threshold",
                        p.kind
                    )))
                }
            };
            Ok(ProcedureEntry { kind, setting })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModelFile { model, procedures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procedures::quality_metrics;

    const THREE: &str = r#"
prior = 0.0
delta = 0.9

[[treatment]]
response = { family = "bernoulli", pre = 0.45 }
transition = 0.1

[[treatment]]
response = { family = "bernoulli", pre = 0.35 }
transition = 0.05

[[treatment]]
response = { family = "bernoulli", pre = 0.25 }
transition = 0.0

[[procedure]]
kind = "proposed:1,3"
alpha = 1e-3

[[procedure]]
kind = "static:2"
threshold = 99.0
"#;

    #[test]
    fn parses_three_treatment_model() {
        let f = parse_model_file(THREE).unwrap();
        assert_eq!(f.model.treatments(), 3);
        assert!(f.model.change_point().is_markovian());
        let q = quality_metrics(&f.model).unwrap();
        assert!((q.get(2).power - 0.5493).abs() < 1e-4);
        assert_eq!(f.procedures.len(), 2);
        let (spec, alpha) = f.procedures[0].resolve(&q, None).unwrap();
        assert_eq!(alpha, Some(1e-3));
        assert_eq!(spec.label(), "(1,3)");
        let (spec, _) = f.procedures[1].resolve(&q, None).unwrap();
        assert!(
            matches!(spec, ProcedureSpec::Static { treatment: 1, threshold } if threshold == 99.0)
        );
    }

    #[test]
    fn unknown_key_is_named_with_position() {
        let text = THREE.replace("transition = 0.05", "transtion = 0.05");
        let msg = parse_model_file(&text).unwrap_err().to_string();
        assert!(msg.contains("transtion"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn unknown_family_field_rejected() {
        let text = THREE.replace("pre = 0.45", "pre = 0.45, post = 0.55");
        assert!(parse_model_file(&text).is_err());
    }

    #[test]
    fn declared_delta_enforced() {
        let text = THREE.replace("delta = 0.9", "delta = 0.95");
        assert!(matches!(
            parse_model_file(&text),
            Err(Error::InvalidModel(_))
        ));
    }

    #[test]
    fn warmup_model() {
        let text = r#"
[change_point]
rule = "geometric_warmup"
rate = 0.5

[[treatment]]
response = { family = "gaussian", mean_pre = 0.0, mean_post = 1.0 }
transition = 0.1
initial_transition = 0.3
"#;
        let f = parse_model_file(text).unwrap();
        assert!(!f.model.change_point().is_markovian());
        assert!((f.model.change_point().transition_prob(&[0]).unwrap() - 0.3).abs() < 1e-15);
        let missing = text.replace("initial_transition = 0.3", "");
        assert!(parse_model_file(&missing).is_err());
    }

    #[test]
    fn degenerate_family_rejected() {
        let text = THREE.replace("pre = 0.45", "pre = 0.5");
        assert!(matches!(
            parse_model_file(&text),
            Err(Error::InvalidModel(_))
        ));
    }
}
