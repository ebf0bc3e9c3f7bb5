//! Posterior odds that the change has already happened.
//!
//! With `Gamma_t = P(L_t = 1 | data) / P(L_t = 0 | data)` the odds obey
//!
//! ```text
//! Gamma_0 = pi_0 / (1 - pi_0)
//! Gamma_t = (Gamma_{t-1} + Pi_t) * Lambda_t / (1 - Pi_t)
//! ```
//!
//! where `Lambda_t = g(Y_t) / f(Y_t)` for the assigned treatment. Everything
//! is carried as `log Gamma_t`; `Gamma = 0` is `-inf`.

use crate::error::{Error, Result};
use crate::model::{Model, TrialEngine};
use crate::procedures::TrialOutcome;
use crate::stats::{Estimate, MeanAccumulator};

/// `log(exp(a) + exp(b))`, exact when either side is `-inf`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `1 / (1 + exp(log_odds))`, i.e. the posterior probability of no change.
#[inline]
pub fn no_change_probability(log_odds: f64) -> f64 {
    if log_odds > 0.0 {
        let e = (-log_odds).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + log_odds.exp())
    }
}

/// Log posterior odds at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PosteriorState {
    log_odds: f64,
    time: u64,
}

impl PosteriorState {
    pub fn from_prior(prior: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&prior) {
            return Err(Error::invalid(format!(
                "prior probability {prior} must lie in [0, 1)"
            )));
        }
        Ok(Self {
            log_odds: prior.ln() - (-prior).ln_1p(),
            time: 0,
        })
    }

    pub fn from_log_odds(log_odds: f64, time: u64) -> Self {
        debug_assert!(!log_odds.is_nan());
        Self { log_odds, time }
    }

    pub fn log_odds(&self) -> f64 {
        self.log_odds
    }

    pub fn odds(&self) -> f64 {
        self.log_odds.exp()
    }

    /// `Gamma / (1 + Gamma)`.
    pub fn probability(&self) -> f64 {
        no_change_probability(-self.log_odds)
    }

    /// `1 / (1 + Gamma)`, the per-run term of the false-alarm estimator.
    pub fn no_change_probability(&self) -> f64 {
        no_change_probability(self.log_odds)
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    /// Whether `Gamma >= threshold`, given `log_threshold = ln(threshold)`.
    #[inline]
    pub fn reaches(&self, log_threshold: f64) -> bool {
        self.log_odds >= log_threshold
    }

    /// Advances one step in place; see [`update_odds`].
    #[inline]
    pub fn update(&mut self, transition_prob: f64, log_likelihood_ratio: f64) -> Result<()> {
        if !(0.0..1.0).contains(&transition_prob) {
            return Err(Error::invalid(format!(
                "transition probability {transition_prob} must lie in [0, 1) for the posterior \
                 filter"
            )));
        }
        if !log_likelihood_ratio.is_finite() {
            return Err(Error::invalid(format!(
                "log-likelihood ratio {log_likelihood_ratio} is not finite"
            )));
        }
        self.log_odds = log_add_exp(self.log_odds, transition_prob.ln()) + log_likelihood_ratio
            - (-transition_prob).ln_1p();
        self.time += 1;
        Ok(())
    }
}

/// One step of the odds recursion.
pub fn update_odds(
    state: PosteriorState,
    transition_prob: f64,
    log_likelihood_ratio: f64,
) -> Result<PosteriorState> {
    let mut next = state;
    next.update(transition_prob, log_likelihood_ratio)?;
    Ok(next)
}

/// `Gamma_t` by direct summation over the possible change times,
/// `Gamma_t = sum_{s=0}^{t} Pi_s prod_{j=s}^{t} Lambda_j / (1 - Pi_j)` with
/// `Pi_0 = pi_0` and `Lambda_0 = 1`, in the linear domain.
///
/// Shares no code with [`update_odds`]; it exists to check it.
pub fn brute_force_posterior(
    model: &Model,
    treatments: &[usize],
    responses: &[f64],
) -> Result<f64> {
    if treatments.len() != responses.len() {
        return Err(Error::invalid(
            "treatment and response histories must have the same length",
        ));
    }
    let t = treatments.len();
    let mut pi = Vec::with_capacity(t + 1);
    let mut ratio = Vec::with_capacity(t + 1);
    pi.push(model.change_point().prior());
    ratio.push(1.0);
    for s in 1..=t {
        pi.push(model.change_point().transition_prob(&treatments[..s])?);
        let family = model.responses().family(treatments[s - 1]);
        ratio.push(family.log_density_ratio(responses[s - 1]).exp());
    }
    let mut total = 0.0;
    for s in 0..=t {
        let mut term = pi[s];
        for j in s..=t {
            term *= ratio[j] / (1.0 - pi[j]);
        }
        total += term;
    }
    Ok(total)
}

/// Mean of `1 / (1 + Gamma_T)` over terminal odds, with its standard error.
///
/// Unbiased for the false-alarm probability `P(T < Theta)`.
pub fn false_alarm_estimate(terminal_odds: &[f64]) -> Result<Estimate> {
    if terminal_odds.is_empty() {
        return Err(Error::invalid(
            "false-alarm estimate needs at least one run",
        ));
    }
    if let Some(bad) = terminal_odds.iter().find(|g| !(**g >= 0.0)) {
        return Err(Error::invalid(format!("terminal odds {bad} must be >= 0")));
    }
    Ok(terminal_odds
        .iter()
        .map(|g| 1.0 / (1.0 + g))
        .collect::<MeanAccumulator>()
        .estimate())
}

/// [`false_alarm_estimate`] from log odds.
pub fn false_alarm_estimate_log(terminal_log_odds: &[f64]) -> Result<Estimate> {
    if terminal_log_odds.is_empty() {
        return Err(Error::invalid(
            "false-alarm estimate needs at least one run",
        ));
    }
    Ok(terminal_log_odds
        .iter()
        .map(|&l| no_change_probability(l))
        .collect::<MeanAccumulator>()
        .estimate())
}

/// Shiryaev rule under static assignment: always assign `treatment`, stop at
/// the first `t >= 0` with `Gamma_t >= threshold`.
pub fn shiryaev_first_crossing(
    engine: &mut TrialEngine<'_>,
    treatment: usize,
    threshold: f64,
) -> Result<TrialOutcome> {
    if !(threshold > 0.0) {
        return Err(Error::invalid(format!(
            "odds threshold {threshold} must be positive"
        )));
    }
    engine.model().check_treatment(treatment)?;
    let log_threshold = threshold.ln();
    let mut state = PosteriorState::from_prior(engine.model().change_point().prior())?;
    while !state.reaches(log_threshold) {
        let step = engine.step(treatment)?;
        state.update(step.transition_prob, step.log_likelihood_ratio)?;
    }
    Ok(TrialOutcome::single_stage(engine, state.log_odds()))
}
