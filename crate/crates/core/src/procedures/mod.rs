//! Assignment/stopping procedures, treatment quality and threshold
//! calibration.

mod outcome;
mod proposed;
mod quality;
mod thresholds;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use outcome::{Stage, StageTrigger, TrialOutcome};
pub use proposed::run_proposed;
pub use quality::{quality_metrics, TreatmentMetrics, TreatmentQuality, SURVIVAL_CUTOFF};
pub use thresholds::{
    calibrate_thresholds, detection_threshold, lower_bound_value, upper_bound_value, Thresholds,
};

use crate::dp::{run_dp, DpPolicy, PolicySet};
use crate::error::{Error, Result};
use crate::model::{Model, TrialEngine};
use crate::posterior::shiryaev_first_crossing;

/// A fully specified procedure. Treatment indices are 0-based.
#[derive(Clone, Debug)]
pub enum ProcedureSpec {
    /// Alternating training (`train`) and assessment (`assess`) stages.
    Proposed {
        train: usize,
        assess: usize,
        thresholds: Thresholds,
    },
    /// Always assign `treatment`; stop once `Gamma >= threshold`.
    Static { treatment: usize, threshold: f64 },
    /// Follow a solved dynamic-programming policy.
    Optimal(Arc<DpPolicy>),
}

impl ProcedureSpec {
    pub fn validate(&self, model: &Model) -> Result<()> {
        match self {
            ProcedureSpec::Proposed {
                train,
                assess,
                thresholds,
            } => {
                model.check_treatment(*train)?;
                model.check_treatment(*assess)?;
                if train == assess {
                    return Err(Error::invalid(
                        "training and assessment treatments must differ",
                    ));
                }
                thresholds.validate()
            }
            ProcedureSpec::Static {
                treatment,
                threshold,
            } => {
                model.check_treatment(*treatment)?;
                if !(*threshold > 0.0) {
                    return Err(Error::invalid(format!(
                        "static threshold {threshold} must be positive"
                    )));
                }
                Ok(())
            }
            ProcedureSpec::Optimal(policy) => policy.check_model(model),
        }
    }

    /// Runs one replication on `engine`.
    pub fn run(&self, engine: &mut TrialEngine<'_>) -> Result<TrialOutcome> {
        match self {
            ProcedureSpec::Proposed {
                train,
                assess,
                thresholds,
            } => run_proposed(engine, *train, *assess, thresholds),
            ProcedureSpec::Static {
                treatment,
                threshold,
            } => shiryaev_first_crossing(engine, *treatment, *threshold),
            ProcedureSpec::Optimal(policy) => run_dp(engine, policy),
        }
    }

    /// Same labels as [`ProcedureKind::label`].
    pub fn label(&self) -> String {
        match self {
            ProcedureSpec::Proposed { train, assess, .. } => ProcedureKind::Proposed {
                train: *train,
                assess: *assess,
            },
            ProcedureSpec::Static { treatment, .. } => ProcedureKind::Static {
                treatment: *treatment,
            },
            ProcedureSpec::Optimal(_) => ProcedureKind::Optimal,
        }
        .label()
    }

    /// Threshold parameters as `key=value` pairs joined by `;`.
    pub fn threshold_params(&self) -> String {
        match self {
            ProcedureSpec::Proposed { thresholds: t, .. } => {
                format!("b1={};bK={};d={}", t.training, t.detection, t.test)
            }
            ProcedureSpec::Static { threshold, .. } => format!("b={threshold}"),
            ProcedureSpec::Optimal(p) => format!("c={};b_c={}", p.cost, p.threshold),
        }
    }
}

/// A procedure family whose thresholds are set from a level `alpha`.
///
/// Parses from and displays as `proposed:I,J`, `static:X` or `optimal`,
/// with 1-based treatment labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProcedureKind {
    Proposed { train: usize, assess: usize },
    Static { treatment: usize },
    Optimal,
}

impl ProcedureKind {
    /// Short label used in reports: `(1,3)`, `(2)` or `optimal`.
    pub fn label(&self) -> String {
        match self {
            ProcedureKind::Proposed { train, assess } => format!("({},{})", train + 1, assess + 1),
            ProcedureKind::Static { treatment } => format!("({})", treatment + 1),
            ProcedureKind::Optimal => "optimal".into(),
        }
    }

    /// Thresholds for level `alpha`: `b = (1 - alpha) / alpha` for static
    /// rules, calibrated thresholds for the two-stage procedure, and the
    /// policy stored for `alpha` in `policies` for the optimal one.
    pub fn instantiate(
        &self,
        alpha: f64,
        quality: &TreatmentQuality,
        policies: Option<&PolicySet>,
    ) -> Result<ProcedureSpec> {
        match *self {
            ProcedureKind::Proposed { train, assess } => Ok(ProcedureSpec::Proposed {
                train,
                assess,
                thresholds: calibrate_thresholds(alpha, train, assess, quality)?,
            }),
            ProcedureKind::Static { treatment } => {
                if treatment >= quality.treatments.len() {
                    return Err(Error::invalid(format!(
                        "treatment {} does not exist",
                        treatment + 1
                    )));
                }
                Ok(ProcedureSpec::Static {
                    treatment,
                    threshold: detection_threshold(alpha)?,
                })
            }
            ProcedureKind::Optimal => {
                let policies = policies.ok_or_else(|| {
                    Error::Config("the optimal procedure needs a policy file".into())
                })?;
                let policy = policies.find(alpha).ok_or_else(|| {
                    Error::Config(format!("policy file has no policy for alpha = {alpha}"))
                })?;
                Ok(ProcedureSpec::Optimal(policy))
            }
        }
    }
}

impl fmt::Display for ProcedureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcedureKind::Proposed { train, assess } => {
                write!(f, "proposed:{},{}", train + 1, assess + 1)
            }
            ProcedureKind::Static { treatment } => write!(f, "static:{}", treatment + 1),
            ProcedureKind::Optimal => f.write_str("optimal"),
        }
    }
}

impl FromStr for ProcedureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "cannot parse procedure '{s}' (expected proposed:I,J, static:X or optimal)"
            ))
        };
        let label = |t: &str| -> Result<usize> {
            match t.trim().parse::<usize>() {
                Ok(x) if x >= 1 => Ok(x - 1),
                _ => Err(bad()),
            }
        };
        let s = s.trim();
        if s == "optimal" {
            return Ok(ProcedureKind::Optimal);
        }
        let (name, args) = s.split_once(':').ok_or_else(bad)?;
        match name {
            "proposed" => {
                let (i, j) = args.split_once(',').ok_or_else(bad)?;
                Ok(ProcedureKind::Proposed {
                    train: label(i)?,
                    assess: label(j)?,
                })
            }
            "static" => Ok(ProcedureKind::Static {
                treatment: label(args)?,
            }),
            _ => Err(bad()),
        }
    }
}
