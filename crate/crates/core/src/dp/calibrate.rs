use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evaluation::{evaluate, RunSettings};
use crate::exec::try_map_indexed;
use crate::model::Model;
use crate::procedures::ProcedureSpec;
use crate::stats::Estimate;

use super::operator::DpModel;
use super::policy::{value_iterate, DpConfig, DpPolicy};

/// `{a * 10^-b : a = 1..9, b = 2..9}` in decreasing order.
pub fn default_cost_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (2..=9)
        .flat_map(|b| (1..=9).map(move |a| a as f64 * 10f64.powi(-b)))
        .collect();
    grid.sort_by(|a, b| b.total_cmp(a));
    grid
}

/// Replication budget for cost calibration.
#[derive(Clone, Copy, Debug)]
pub struct CalibrationSettings {
    /// Replications per cost in the screening pass, with its seed.
    pub screen: RunSettings,
    /// Replications for confirming a candidate. `None` selects directly from
    /// the screening pass.
    pub confirm: Option<RunSettings>,
    pub dp: DpConfig,
}

impl CalibrationSettings {
    /// Screening with `screen_reps` at `seed`, confirmation with
    /// `confirm_reps` at `seed + 1` so the two passes are independent.
    pub fn new(screen_reps: u64, confirm_reps: Option<u64>, seed: u64) -> Self {
        Self {
            screen: RunSettings::new(screen_reps, seed),
            confirm: confirm_reps.map(|r| RunSettings::new(r, seed.wrapping_add(1))),
            dp: DpConfig::default(),
        }
    }
}

/// One simulated cost.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalibrationRow {
    pub cost: f64,
    /// `b_c`.
    pub threshold: f64,
    pub err: Estimate,
    pub ess: Estimate,
    pub reps: u64,
    pub seed: u64,
}

/// Solved and screened policies over a cost grid; shared by every level
/// calibrated against it.
#[derive(Clone, Debug)]
pub struct CostScreen {
    pub policies: Vec<Arc<DpPolicy>>,
    pub rows: Vec<CalibrationRow>,
}

/// Outcome of calibrating `c` for one level.
#[derive(Clone, Debug)]
pub struct Calibration {
    pub alpha: f64,
    pub policy: Arc<DpPolicy>,
    /// The row that certified the policy.
    pub selected: CalibrationRow,
    /// Screening rows followed by every confirmation run.
    pub table: Vec<CalibrationRow>,
}

/// Solves the policy for every cost and estimates its error and sample size.
pub fn screen_costs(
    model: &Model,
    costs: &[f64],
    settings: &CalibrationSettings,
) -> Result<CostScreen> {
    if costs.is_empty() {
        return Err(Error::invalid("cost grid is empty"));
    }
    let dp_model = DpModel::from_model(model)?;
    let policies = try_map_indexed(costs.len(), settings.dp.parallelism, |k| {
        value_iterate(costs[k], &dp_model, &settings.dp).map(|s| Arc::new(s.policy))
    })?;
    let rows = policies
        .iter()
        .map(|p| simulate(model, p, &settings.screen))
        .collect::<Result<Vec<_>>>()?;
    Ok(CostScreen { policies, rows })
}

fn simulate(model: &Model, policy: &Arc<DpPolicy>, run: &RunSettings) -> Result<CalibrationRow> {
    let report = evaluate(&ProcedureSpec::Optimal(policy.clone()), model, run)?;
    Ok(CalibrationRow {
        cost: policy.cost,
        threshold: policy.threshold,
        err: report.err,
        ess: report.ess,
        reps: report.reps,
        seed: report.seed,
    })
}

impl CostScreen {
    /// Picks the cost whose error is largest among those at most `alpha`.
    ///
    /// With a confirmation budget, costs whose screening error is within
    /// three standard errors of `alpha` are confirmed in decreasing order of
    /// screening error and the first confirmed at `<= alpha` is returned.
    pub fn select(
        &self,
        alpha: f64,
        model: &Model,
        settings: &CalibrationSettings,
    ) -> Result<Calibration> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("level {alpha} must lie in (0, 1]")));
        }
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by(|&a, &b| self.rows[b].err.mean.total_cmp(&self.rows[a].err.mean));
        let mut table = self.rows.clone();
        let failure = || Error::CalibrationFailure {
            alpha,
            smallest: self
                .rows
                .iter()
                .map(|r| r.err.mean)
                .fold(f64::INFINITY, f64::min),
        };

        let Some(confirm) = settings.confirm else {
            let k = *order
                .iter()
                .find(|&&k| self.rows[k].err.mean <= alpha)
                .ok_or_else(failure)?;
            return Ok(Calibration {
                alpha,
                policy: self.policies[k].clone(),
                selected: self.rows[k],
                table,
            });
        };
        for &k in &order {
            let screened = self.rows[k].err;
            if screened.mean > alpha + 3.0 * screened.se {
                continue;
            }
            let row = simulate(model, &self.policies[k], &confirm)?;
            table.push(row);
            log::info!(
                "alpha = {alpha}: c = {} confirmed err {:e} (screened {:e})",
                row.cost,
                row.err.mean,
                screened.mean
            );
            if row.err.mean <= alpha {
                return Ok(Calibration {
                    alpha,
                    policy: self.policies[k].clone(),
                    selected: row,
                    table,
                });
            }
        }
        Err(failure())
    }
}

/// Chooses `c(alpha)` over `costs`: the cost whose simulated error is the
/// largest not exceeding `alpha`.
pub fn calibrate_c(
    alpha: f64,
    model: &Model,
    costs: &[f64],
    settings: &CalibrationSettings,
) -> Result<Calibration> {
    screen_costs(model, costs, settings)?.select(alpha, model, settings)
}
