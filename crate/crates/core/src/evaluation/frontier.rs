use std::sync::Arc;

use crate::dp::{value_iterate, DpConfig, DpModel};
use crate::error::{Error, Result};
use crate::model::Model;
use crate::procedures::{lower_bound_value, quality_metrics, ProcedureKind, ProcedureSpec};
use crate::stats::Estimate;

use super::{evaluate, RunSettings};

/// One point of an error/sample-size frontier.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontierPoint {
    pub procedure: String,
    pub threshold_params: String,
    pub err: Estimate,
    pub ess: Estimate,
    /// Lower bound on the sample size at error `err`.
    pub lower_bound: f64,
    pub reps: u64,
    pub seed: u64,
}

impl FrontierPoint {
    /// `|log10 Err|`.
    pub fn neg_log10_err(&self) -> f64 {
        self.err.mean.log10().abs()
    }

    /// `ESS` divided by the lower bound at `Err`.
    pub fn ess_normalized(&self) -> f64 {
        self.ess.mean / self.lower_bound
    }
}

/// Evaluates `kind` at every point of `sweep`.
///
/// For threshold procedures the sweep values are levels `alpha`; for the
/// optimal procedure they are observation costs `c`, each solved with `dp`.
/// Points with zero estimated error are skipped.
pub fn frontier(
    kind: ProcedureKind,
    sweep: &[f64],
    model: &Model,
    settings: &RunSettings,
    dp: &DpConfig,
) -> Result<Vec<FrontierPoint>> {
    if sweep.is_empty() {
        return Err(Error::invalid("frontier sweep is empty"));
    }
    let quality = quality_metrics(model)?;
    let dp_model = match kind {
        ProcedureKind::Optimal => Some(DpModel::from_model(model)?),
        _ => None,
    };
    let mut points = Vec::with_capacity(sweep.len());
    for &value in sweep {
        let spec = match &dp_model {
            Some(m) => ProcedureSpec::Optimal(Arc::new(value_iterate(value, m, dp)?.policy)),
            None => kind.instantiate(value, &quality, None)?,
        };
        let report = evaluate(&spec, model, settings)?;
        if !(report.err.mean > 0.0) {
            log::warn!(
                "{} at {}: zero estimated error, point skipped",
                report.procedure,
                report.threshold_params
            );
            continue;
        }
        points.push(FrontierPoint {
            lower_bound: lower_bound_value(report.err.mean.min(1.0), &quality)?,
            procedure: report.procedure,
            threshold_params: report.threshold_params,
            err: report.err,
            ess: report.ess,
            reps: report.reps,
            seed: report.seed,
        });
    }
    Ok(points)
}
