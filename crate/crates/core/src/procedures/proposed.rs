use crate::error::Result;
use crate::model::TrialEngine;
use crate::posterior::PosteriorState;

use super::outcome::{Stage, StageTrigger, TrialOutcome};
use super::thresholds::Thresholds;

/// Runs the training/assessment procedure to completion.
///
/// A training stage assigns `train` until `Gamma >= b_1`. An assessment
/// stage assigns `assess` and ends at whichever fires first of
/// `Gamma >= b_K` (stop) and `sum ln(f/g) >= ln d` over the stage (go back to
/// training). Both fire together counts as detection. Every stage takes at
/// least one observation.
pub fn run_proposed(
    engine: &mut TrialEngine<'_>,
    train: usize,
    assess: usize,
    thresholds: &Thresholds,
) -> Result<TrialOutcome> {
    thresholds.validate()?;
    let model = engine.model();
    model.check_treatment(train)?;
    model.check_treatment(assess)?;
    let log_training = thresholds.training.ln();
    let log_detection = thresholds.detection.ln();
    let log_test = thresholds.test.ln();

    let mut state = PosteriorState::from_prior(model.change_point().prior())?;
    let mut stages = Vec::new();
    loop {
        loop {
            let step = engine.step(train)?;
            state.update(step.transition_prob, step.log_likelihood_ratio)?;
            if state.reaches(log_training) {
                break;
            }
        }
        stages.push(Stage {
            end: engine.time(),
            trigger: StageTrigger::Training,
        });

        let mut test_statistic = 0.0;
        loop {
            let step = engine.step(assess)?;
            state.update(step.transition_prob, step.log_likelihood_ratio)?;
            test_statistic -= step.log_likelihood_ratio;
            if state.reaches(log_detection) {
                stages.push(Stage {
                    end: engine.time(),
                    trigger: StageTrigger::Detection,
                });
                let mut outcome = TrialOutcome::single_stage(engine, state.log_odds());
                outcome.stages = stages;
                return Ok(outcome);
            }
            if test_statistic >= log_test {
                stages.push(Stage {
                    end: engine.time(),
                    trigger: StageTrigger::Test,
                });
                break;
            }
        }
    }
}
