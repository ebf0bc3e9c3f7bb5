use crate::dp::PolicySet;
use crate::error::Result;
use crate::model::Model;
use crate::procedures::{quality_metrics, ProcedureKind};

use super::{evaluate, EvalReport, RunSettings};

/// Levels of the reference comparison.
pub const TABLE2_LEVELS: [f64; 4] = [0.05, 1e-2, 1e-3, 1e-5];

/// `optimal`, `(1,3)`, `(2,3)`, `(1)`, `(2)`.
pub fn table2_procedures() -> Vec<ProcedureKind> {
    vec![
        ProcedureKind::Optimal,
        ProcedureKind::Proposed {
            train: 0,
            assess: 2,
        },
        ProcedureKind::Proposed {
            train: 1,
            assess: 2,
        },
        ProcedureKind::Static { treatment: 0 },
        ProcedureKind::Static { treatment: 1 },
    ]
}

/// One report per (procedure, level), procedures outermost. Optimal rows are
/// skipped with a warning when no policy is available for a level.
pub fn reproduce_table2(
    model: &Model,
    procedures: &[ProcedureKind],
    levels: &[f64],
    policies: Option<&PolicySet>,
    settings: &RunSettings,
) -> Result<Vec<EvalReport>> {
    let quality = quality_metrics(model)?;
    let mut reports = Vec::with_capacity(procedures.len() * levels.len());
    for kind in procedures {
        for &alpha in levels {
            if *kind == ProcedureKind::Optimal && policies.and_then(|p| p.find(alpha)).is_none() {
                log::warn!("no policy for alpha = {alpha}; optimal row skipped");
                continue;
            }
            let spec = kind.instantiate(alpha, &quality, policies)?;
            let mut report = evaluate(&spec, model, settings)?;
            report.alpha = Some(alpha);
            log::info!(
                "{} alpha={alpha:e}: ess {:.3} err {:.3e} ({:.1?})",
                report.procedure,
                report.ess.mean,
                report.err.mean,
                report.wall_time
            );
            reports.push(report);
        }
    }
    Ok(reports)
}
