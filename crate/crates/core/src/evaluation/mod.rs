//! Monte Carlo evaluation of procedures.
//!
//! Replication `r` of a run with base seed `s` always uses the random
//! streams of `(s, r)`, so results depend only on `(model, procedure, reps,
//! seed)` and never on thread count or scheduling.

mod frontier;
mod report;
mod table2;

use std::time::{Duration, Instant};

pub use frontier::{frontier, FrontierPoint};
pub use report::{
    write_calibration_csv, write_frontier_csv, write_metrics_csv, write_table2_csv, CsvHeader,
};
pub use table2::{reproduce_table2, table2_procedures, TABLE2_LEVELS};

use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, Parallelism};
use crate::model::{Model, TrialEngine, DEFAULT_MAX_HORIZON};
use crate::procedures::{ProcedureSpec, TrialOutcome};
use crate::rng::ReplicationSeed;
use crate::stats::{CompensatedSum, Estimate, MeanAccumulator};

/// Default replications per cell.
pub const DEFAULT_REPS: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSettings {
    pub reps: u64,
    pub seed: u64,
    pub parallelism: Parallelism,
    pub max_horizon: u64,
}

impl RunSettings {
    pub fn new(reps: u64, seed: u64) -> Self {
        Self {
            reps,
            seed,
            parallelism: Parallelism::Parallel,
            max_horizon: DEFAULT_MAX_HORIZON,
        }
    }

    pub fn with_parallelism(mut self, parallelism: Parallelism) -> Self {
        self.parallelism = parallelism;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Distribution of the cycle count `N` of a staged procedure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleStats {
    pub mean: Estimate,
    /// `P(N > n)` for `n = 1, 2, 3`.
    pub exceed: [Estimate; 3],
}

/// Aggregate operating characteristics of one procedure.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub procedure: String,
    pub threshold_params: String,
    /// Level the procedure was instantiated for, if any.
    pub alpha: Option<f64>,
    /// False-alarm probability from the mean of `1 / (1 + Gamma_T)`.
    pub err: Estimate,
    /// False-alarm probability from the mean of `1{T < Theta}`.
    pub err_indicator: Estimate,
    /// Expected sample size `E[T]`.
    pub ess: Estimate,
    /// `E[min(Theta, T)]`.
    pub mean_theta: f64,
    /// `E[(T - Theta)^+]`; `ess = mean_theta + mean_delay`.
    pub mean_delay: f64,
    pub cycles: Option<CycleStats>,
    pub reps: u64,
    pub seed: u64,
    pub wall_time: Duration,
}

impl EvalReport {
    /// `c E[T] + Err`: the objective the optimal policy minimizes.
    pub fn cost(&self, cost: f64) -> Estimate {
        // T and 1/(1+Gamma_T) are estimated on the same runs; the bound
        // below ignores their covariance, which is negative here.
        Estimate {
            mean: cost * self.ess.mean + self.err.mean,
            se: (cost * self.ess.se).hypot(self.err.se),
        }
    }
}

/// Runs `settings.reps` replications and returns every outcome in
/// replication order.
pub fn simulate(
    spec: &ProcedureSpec,
    model: &Model,
    settings: &RunSettings,
) -> Result<Vec<TrialOutcome>> {
    run_each(spec, model, settings, |o| o)
}

fn run_each<T: Send>(
    spec: &ProcedureSpec,
    model: &Model,
    settings: &RunSettings,
    keep: impl Fn(TrialOutcome) -> T + Sync + Send,
) -> Result<Vec<T>> {
    if settings.reps == 0 {
        return Err(Error::invalid("at least one replication is required"));
    }
    spec.validate(model)?;
    try_map_indexed(settings.reps as usize, settings.parallelism, |r| {
        let seed = ReplicationSeed::new(settings.seed, r as u64);
        let mut engine = TrialEngine::new(model, seed).with_max_horizon(settings.max_horizon);
        spec.run(&mut engine).map(&keep).inspect_err(|e| {
            log::error!(
                "replication {r} (seed {}) of {} failed: {e}",
                settings.seed,
                spec.label()
            )
        })
    })
}

#[derive(Clone, Copy, Debug)]
struct RunSummary {
    stopping_time: u64,
    capped_change_time: u64,
    delay: u64,
    no_change: f64,
    false_alarm: bool,
    cycles: Option<u32>,
}

impl From<TrialOutcome> for RunSummary {
    fn from(o: TrialOutcome) -> Self {
        Self {
            stopping_time: o.stopping_time,
            capped_change_time: o.capped_change_time(),
            delay: o.detection_delay(),
            no_change: o.no_change_probability(),
            false_alarm: o.false_alarm(),
            cycles: o.cycles(),
        }
    }
}

/// Simulates and aggregates.
pub fn evaluate(spec: &ProcedureSpec, model: &Model, settings: &RunSettings) -> Result<EvalReport> {
    let start = Instant::now();
    let runs = run_each(spec, model, settings, RunSummary::from)?;

    let mut err = MeanAccumulator::default();
    let mut err_indicator = MeanAccumulator::default();
    let mut ess = MeanAccumulator::default();
    let mut theta = CompensatedSum::default();
    let mut delay = CompensatedSum::default();
    let mut cycles = MeanAccumulator::default();
    let mut exceed = [MeanAccumulator::default(); 3];
    for run in &runs {
        err.push(run.no_change);
        err_indicator.push(f64::from(u8::from(run.false_alarm)));
        ess.push(run.stopping_time as f64);
        theta.add(run.capped_change_time as f64);
        delay.add(run.delay as f64);
        if let Some(n) = run.cycles {
            cycles.push(f64::from(n));
            for (k, acc) in exceed.iter_mut().enumerate() {
                acc.push(f64::from(u8::from(n as usize > k + 1)));
            }
        }
    }
    let n = runs.len() as f64;
    let cycles = (cycles.count() > 0).then(|| CycleStats {
        mean: cycles.estimate(),
        exceed: exceed.map(|a| a.estimate()),
    });
    Ok(EvalReport {
        procedure: spec.label(),
        threshold_params: spec.threshold_params(),
        alpha: None,
        err: err.estimate(),
        err_indicator: err_indicator.estimate(),
        ess: ess.estimate(),
        mean_theta: theta.value() / n,
        mean_delay: delay.value() / n,
        cycles,
        reps: settings.reps,
        seed: settings.seed,
        wall_time: start.elapsed(),
    })
}
