//! Response and change-point models and the simulated system.

mod change_point;
mod engine;
mod response;

pub use change_point::{ChangePointModel, GeometricWarmup, TransitionRule, Transitions};
pub use engine::{Step, TrialEngine, DEFAULT_MAX_HORIZON};
pub use response::{
    KlDivergences, ResponseDensity, ResponseFamily, ResponseModel, SupportPoint,
    KL_MONTE_CARLO_DRAWS,
};

use crate::error::{Error, Result};

/// A response model and a change-point model over the same treatments.
#[derive(Clone, Debug)]
pub struct Model {
    responses: ResponseModel,
    change_point: ChangePointModel,
}

impl Model {
    pub fn new(responses: ResponseModel, change_point: ChangePointModel) -> Result<Self> {
        if responses.treatments() != change_point.treatments() {
            return Err(Error::InvalidModel(format!(
                "response model has {} treatments but change-point model has {}",
                responses.treatments(),
                change_point.treatments()
            )));
        }
        Ok(Self {
            responses,
            change_point,
        })
    }

    /// Bernoulli responses (`f_x` before, `1 - f_x` after) with Markovian
    /// transitions; `arms` holds `(f_x, p_x)` pairs.
    pub fn bernoulli_markovian(prior: f64, arms: &[(f64, f64)]) -> Result<Self> {
        let families = arms
            .iter()
            .map(|&(f, _)| ResponseFamily::bernoulli(f))
            .collect::<Result<Vec<_>>>()?;
        let probs = arms.iter().map(|&(_, p)| p).collect();
        Self::new(
            ResponseModel::new(families)?,
            ChangePointModel::markovian(prior, probs)?,
        )
    }

    pub fn treatments(&self) -> usize {
        self.responses.treatments()
    }

    pub fn responses(&self) -> &ResponseModel {
        &self.responses
    }

    pub fn change_point(&self) -> &ChangePointModel {
        &self.change_point
    }

    pub(crate) fn check_treatment(&self, treatment: usize) -> Result<()> {
        if treatment >= self.treatments() {
            return Err(Error::invalid(format!(
                "treatment index {treatment} out of range for {} treatments",
                self.treatments()
            )));
        }
        Ok(())
    }
}

/// Ready-made models.
pub mod presets {
    use super::Model;

    /// Three Bernoulli treatments, `pi_0 = 0`:
    ///
    /// | treatment | f_x  | p_x  |
    /// |-----------|------|------|
    /// | 1         | 0.45 | 0.1  |
    /// | 2         | 0.35 | 0.05 |
    /// | 3         | 0.25 | 0    |
    ///
    /// Treatment 1 is the fastest to trigger the change; treatment 3 is the
    /// most informative but never triggers it.
    pub fn three_treatment_bernoulli() -> Model {
        Model::bernoulli_markovian(0.0, &[(0.45, 0.1), (0.35, 0.05), (0.25, 0.0)])
            .expect("preset parameters are valid")
    }
}
