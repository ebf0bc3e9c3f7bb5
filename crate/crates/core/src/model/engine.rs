use crate::error::{Error, Result};
use crate::rng::{CounterStream, ReplicationSeed, StreamId};

use super::Model;

/// Default cap on the number of observations in one replication.
pub const DEFAULT_MAX_HORIZON: u64 = 10_000_000;

/// What one call to [`TrialEngine::step`] produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub response: f64,
    /// `log Lambda_t = log(g_x(Y_t) / f_x(Y_t))`.
    pub log_likelihood_ratio: f64,
    /// `Pi_t` for the history including this step's treatment.
    pub transition_prob: f64,
    /// Latent state after the step.
    pub changed: bool,
}

/// One replication of the coupled latent/response dynamics.
///
/// The latent state starts at `L_0 = 1{U_0 <= pi_0}`. Step `t` draws `U_t`
/// (always, so stream positions line up with time) and switches to the
/// changed state if `U_t <= Pi_t`; it then draws `Y_t` from `f_x` or `g_x`
/// through `V_t`.
#[derive(Debug)]
pub struct TrialEngine<'m> {
    model: &'m Model,
    latent_stream: CounterStream,
    response_stream: CounterStream,
    changed: bool,
    time: u64,
    change_time: Option<u64>,
    history: Vec<usize>,
    max_horizon: u64,
}

impl<'m> TrialEngine<'m> {
    pub fn new(model: &'m Model, seed: ReplicationSeed) -> Self {
        let mut latent_stream = CounterStream::new(seed, StreamId::Latent);
        let response_stream = CounterStream::new(seed, StreamId::Response);
        let changed = latent_stream.next_uniform() <= model.change_point().prior();
        Self {
            model,
            latent_stream,
            response_stream,
            changed,
            time: 0,
            change_time: changed.then_some(0),
            history: Vec::new(),
            max_horizon: DEFAULT_MAX_HORIZON,
        }
    }

    pub fn with_max_horizon(mut self, max_horizon: u64) -> Self {
        self.max_horizon = max_horizon;
        self
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    /// Current time `t` (number of observations taken).
    pub fn time(&self) -> u64 {
        self.time
    }

    /// The change-point `Theta` if it has happened by now.
    pub fn change_time(&self) -> Option<u64> {
        self.change_time
    }

    pub fn is_changed(&self) -> bool {
        self.changed
    }

    pub fn max_horizon(&self) -> u64 {
        self.max_horizon
    }

    /// Assigns `treatment` at time `t + 1` and observes the response.
    pub fn step(&mut self, treatment: usize) -> Result<Step> {
        let k = self.model.treatments();
        if treatment >= k {
            return Err(Error::invalid(format!(
                "treatment index {treatment} out of range for {k} treatments"
            )));
        }
        if self.time >= self.max_horizon {
            return Err(Error::HorizonExceeded {
                limit: self.max_horizon,
            });
        }
        self.time += 1;
        let change_point = self.model.change_point();
        let transition_prob = match change_point.markov_prob(treatment) {
            Some(p) => p,
            None => {
                self.history.push(treatment);
                change_point.transition_unchecked(&self.history)
            }
        };

        let u = self.latent_stream.next_uniform();
        if !self.changed && u <= transition_prob {
            self.changed = true;
            self.change_time = Some(self.time);
        }

        let family = self.model.responses().family(treatment);
        let response = family.sample(self.changed, self.response_stream.next_uniform());
        Ok(Step {
            response,
            log_likelihood_ratio: family.log_density_ratio(response),
            transition_prob,
            changed: self.changed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChangePointModel, ResponseFamily, ResponseModel};

    fn bernoulli_model(prior: f64, p: f64) -> Model {
        Model::new(
            ResponseModel::new(vec![ResponseFamily::bernoulli(0.25).unwrap()]).unwrap(),
            ChangePointModel::markovian(prior, vec![p]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn forced_transition() {
        let m = bernoulli_model(0.0, 1.0);
        let mut e = TrialEngine::new(&m, ReplicationSeed::new(3, 0));
        assert!(!e.is_changed());
        let s = e.step(0).unwrap();
        assert!(s.changed);
        assert_eq!(e.change_time(), Some(1));
    }

    #[test]
    fn no_change_possible() {
        let m = bernoulli_model(0.0, 0.0);
        let mut e = TrialEngine::new(&m, ReplicationSeed::new(3, 0));
        let mut ones = 0;
        let n = 20_000;
        for _ in 0..n {
            let s = e.step(0).unwrap();
            assert!(!s.changed);
            ones += s.response as u32;
        }
        assert_eq!(e.change_time(), None);
        // pre-change responses ~ Bernoulli(0.25)
        let freq = ones as f64 / n as f64;
        let bound = 3.0 * (0.25f64 * 0.75 / n as f64).sqrt();
        assert!((freq - 0.25).abs() < bound, "{freq}");
    }

    #[test]
    fn horizon_guard() {
        let m = bernoulli_model(0.0, 0.0);
        let mut e = TrialEngine::new(&m, ReplicationSeed::new(3, 0)).with_max_horizon(5);
        for _ in 0..5 {
            e.step(0).unwrap();
        }
        assert!(matches!(
            e.step(0),
            Err(Error::HorizonExceeded { limit: 5 })
        ));
    }

    #[test]
    fn bad_treatment_rejected() {
        let m = bernoulli_model(0.0, 0.1);
        let mut e = TrialEngine::new(&m, ReplicationSeed::new(3, 0));
        assert!(matches!(e.step(1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn prior_one_change_at_zero() {
        let m = bernoulli_model(0.999_999_999, 0.0);
        let e = TrialEngine::new(&m, ReplicationSeed::new(1, 1));
        assert_eq!(e.change_time(), Some(0));
    }

    #[test]
    fn latent_draws_follow_counter_positions() {
        let m = bernoulli_model(0.0, 0.2);
        let seed = ReplicationSeed::new(11, 4);
        let mut e = TrialEngine::new(&m, seed);
        let mut theta = None;
        for t in 1..=60u64 {
            e.step(0).unwrap();
            if theta.is_none() && CounterStream::uniform_at(seed, StreamId::Latent, t) <= 0.2 {
                theta = Some(t);
            }
        }
        assert_eq!(e.change_time(), theta);
    }
}
