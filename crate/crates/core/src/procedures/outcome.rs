use crate::model::TrialEngine;
use crate::posterior::no_change_probability;

/// What ended a stage of the two-stage procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageTrigger {
    /// A training stage reached the training threshold.
    Training,
    /// An assessment stage reached the detection threshold; always the last
    /// stage.
    Detection,
    /// An assessment stage's one-sided test fired before detection.
    Test,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stage {
    /// `S_m`: time of the last observation in the stage.
    pub end: u64,
    pub trigger: StageTrigger,
}

/// Record of one replication.
///
/// The change time is only known when it happened by the stopping time, so
/// `change_time` is `Some(Theta)` iff `Theta <= T`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub stopping_time: u64,
    pub change_time: Option<u64>,
    /// `log Gamma_T`.
    pub log_odds: f64,
    /// Stage boundaries; empty for single-stage procedures.
    pub stages: Vec<Stage>,
}

impl TrialOutcome {
    pub(crate) fn single_stage(engine: &TrialEngine<'_>, log_odds: f64) -> Self {
        Self {
            stopping_time: engine.time(),
            change_time: engine.change_time(),
            log_odds,
            stages: Vec::new(),
        }
    }

    /// `T < Theta`.
    pub fn false_alarm(&self) -> bool {
        self.change_time.is_none()
    }

    /// `1 / (1 + Gamma_T)`.
    pub fn no_change_probability(&self) -> f64 {
        no_change_probability(self.log_odds)
    }

    /// `min(Theta, T)`.
    pub fn capped_change_time(&self) -> u64 {
        self.change_time.unwrap_or(self.stopping_time)
    }

    /// `(T - Theta)^+`.
    pub fn detection_delay(&self) -> u64 {
        self.change_time
            .map_or(0, |theta| self.stopping_time - theta)
    }

    /// Number of training/assessment cycles `N`, for staged procedures.
    pub fn cycles(&self) -> Option<u32> {
        if self.stages.is_empty() {
            return None;
        }
        Some(
            self.stages
                .iter()
                .filter(|s| s.trigger != StageTrigger::Training)
                .count() as u32,
        )
    }
}
