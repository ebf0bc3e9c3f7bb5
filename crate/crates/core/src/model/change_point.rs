use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A history-dependent transition function `pi_t(x_1, ..., x_t)` together
/// with the constants the analysis needs but that cannot be derived by
/// evaluating the function.
pub trait TransitionRule: Send + Sync + fmt::Debug {
    fn treatments(&self) -> usize;

    /// `pi_t(x_1, ..., x_t)` with `t = history.len() >= 1`.
    fn probability(&self, history: &[usize]) -> f64;

    /// `zeta_x`: smallest transition probability over all histories ending
    /// in `treatment`.
    fn infimum(&self, treatment: usize) -> f64;

    /// `p_x`: the limiting transition probability of `treatment` as
    /// `t -> infinity`, uniformly over histories.
    fn limit(&self, treatment: usize) -> f64;

    /// `pi*_t`: largest transition probability over all histories of length
    /// `t >= 1`.
    fn maximum(&self, t: usize) -> f64;

    /// `delta` such that every transition probability is at most `1 - delta`.
    fn delta(&self) -> f64;
}

/// Transition probabilities that relax geometrically from `initial[x]` to
/// `limit[x]`: `pi_t(.., x) = p_x + (q_x - p_x) * rate^(t - 1)`.
///
/// Depends on the history only through its length and last element, and
/// converges uniformly, so it is asymptotically Markovian.
#[derive(Clone, Debug, PartialEq)]
pub struct GeometricWarmup {
    limit: Vec<f64>,
    initial: Vec<f64>,
    rate: f64,
}

impl GeometricWarmup {
    pub fn new(limit: Vec<f64>, initial: Vec<f64>, rate: f64) -> Result<Self> {
        if limit.is_empty() || limit.len() != initial.len() {
            return Err(Error::InvalidModel(
                "geometric warm-up needs one initial and one limiting probability per treatment"
                    .into(),
            ));
        }
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::InvalidModel(format!(
                "warm-up rate {rate} must lie in [0, 1)"
            )));
        }
        for &p in limit.iter().chain(&initial) {
            if !(0.0..1.0).contains(&p) {
                return Err(Error::InvalidModel(format!(
                    "transition probability {p} must lie in [0, 1)"
                )));
            }
        }
        Ok(Self {
            limit,
            initial,
            rate,
        })
    }

    fn at(&self, treatment: usize, t: usize) -> f64 {
        let p = self.limit[treatment];
        let q = self.initial[treatment];
        p + (q - p) * self.rate.powi(t as i32 - 1)
    }
}

impl TransitionRule for GeometricWarmup {
    fn treatments(&self) -> usize {
        self.limit.len()
    }

    fn probability(&self, history: &[usize]) -> f64 {
        let x = *history.last().expect("history must be nonempty");
        self.at(x, history.len())
    }

    fn infimum(&self, treatment: usize) -> f64 {
        self.limit[treatment].min(self.initial[treatment])
    }

    fn limit(&self, treatment: usize) -> f64 {
        self.limit[treatment]
    }

    fn maximum(&self, t: usize) -> f64 {
        (0..self.limit.len())
            .map(|x| self.at(x, t))
            .fold(0.0, f64::max)
    }

    fn delta(&self) -> f64 {
        let sup = self
            .limit
            .iter()
            .chain(&self.initial)
            .copied()
            .fold(0.0, f64::max);
        1.0 - sup
    }
}

#[derive(Clone, Debug)]
pub enum Transitions {
    /// `pi_t(.., x) = p_x` for every `t` and history.
    Markovian(Vec<f64>),
    HistoryDependent(Arc<dyn TransitionRule>),
}

/// Prior probability `pi_0` plus the transition functions.
#[derive(Clone, Debug)]
pub struct ChangePointModel {
    prior: f64,
    transitions: Transitions,
}

impl ChangePointModel {
    /// Markovian model. `p_x = 1` is accepted (it forces the change) but the
    /// posterior filter rejects it.
    pub fn markovian(prior: f64, probabilities: Vec<f64>) -> Result<Self> {
        check_prior(prior)?;
        if probabilities.is_empty() {
            return Err(Error::InvalidModel(
                "at least one treatment is required".into(),
            ));
        }
        for &p in &probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidModel(format!(
                    "transition probability {p} must lie in [0, 1]"
                )));
            }
        }
        Ok(Self {
            prior,
            transitions: Transitions::Markovian(probabilities),
        })
    }

    pub fn history_dependent(prior: f64, rule: Arc<dyn TransitionRule>) -> Result<Self> {
        check_prior(prior)?;
        let delta = rule.delta();
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidModel(format!(
                "declared delta {delta} must lie in (0, 1)"
            )));
        }
        if prior > 1.0 - delta {
            return Err(Error::InvalidModel(format!(
                "prior {prior} exceeds the declared bound 1 - delta = {}",
                1.0 - delta
            )));
        }
        Ok(Self {
            prior,
            transitions: Transitions::HistoryDependent(rule),
        })
    }

    pub fn prior(&self) -> f64 {
        self.prior
    }

    pub fn transitions(&self) -> &Transitions {
        &self.transitions
    }

    pub fn treatments(&self) -> usize {
        match &self.transitions {
            Transitions::Markovian(p) => p.len(),
            Transitions::HistoryDependent(rule) => rule.treatments(),
        }
    }

    pub fn is_markovian(&self) -> bool {
        matches!(self.transitions, Transitions::Markovian(_))
    }

    /// `Pi_t = pi_t(x_1, ..., x_t)` with `t = history.len()`.
    pub fn transition_prob(&self, history: &[usize]) -> Result<f64> {
        let Some(&last) = history.last() else {
            return Err(Error::invalid(
                "transition probability needs a nonempty treatment history",
            ));
        };
        if last >= self.treatments() {
            return Err(Error::invalid(format!(
                "treatment index {last} out of range for {} treatments",
                self.treatments()
            )));
        }
        Ok(self.transition_unchecked(history))
    }

    #[inline]
    pub(crate) fn transition_unchecked(&self, history: &[usize]) -> f64 {
        match &self.transitions {
            Transitions::Markovian(p) => p[*history.last().unwrap()],
            Transitions::HistoryDependent(rule) => rule.probability(history),
        }
    }

    /// Markovian shortcut: transition probability when `treatment` is
    /// assigned.
    #[inline]
    pub(crate) fn markov_prob(&self, treatment: usize) -> Option<f64> {
        match &self.transitions {
            Transitions::Markovian(p) => Some(p[treatment]),
            Transitions::HistoryDependent(_) => None,
        }
    }

    /// `zeta_x`.
    pub fn infimum(&self, treatment: usize) -> f64 {
        match &self.transitions {
            Transitions::Markovian(p) => p[treatment],
            Transitions::HistoryDependent(rule) => rule.infimum(treatment),
        }
    }

    /// Limiting `p_x` (equal to the constant for Markovian models).
    pub fn limit(&self, treatment: usize) -> f64 {
        match &self.transitions {
            Transitions::Markovian(p) => p[treatment],
            Transitions::HistoryDependent(rule) => rule.limit(treatment),
        }
    }

    /// `pi*_t`, with `pi*_0 = pi_0`.
    pub fn maximum(&self, t: usize) -> f64 {
        if t == 0 {
            return self.prior;
        }
        match &self.transitions {
            Transitions::Markovian(p) => p.iter().copied().fold(0.0, f64::max),
            Transitions::HistoryDependent(rule) => rule.maximum(t),
        }
    }

    /// `delta` with every transition probability at most `1 - delta`.
    pub fn delta(&self) -> f64 {
        match &self.transitions {
            Transitions::Markovian(p) => 1.0 - p.iter().copied().fold(self.prior, f64::max),
            Transitions::HistoryDependent(rule) => rule.delta(),
        }
    }
}

fn check_prior(prior: f64) -> Result<()> {
    if !(0.0..1.0).contains(&prior) {
        return Err(Error::InvalidModel(format!(
            "prior probability {prior} must lie in [0, 1)"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ChangePointModel {
        ChangePointModel::markovian(0.0, vec![0.1, 0.05, 0.0]).unwrap()
    }

    #[test]
    fn markovian_depends_only_on_last_treatment() {
        let m = table();
        assert_eq!(m.transition_prob(&[0, 0, 0]).unwrap(), 0.1);
        assert_eq!(m.transition_prob(&[2]).unwrap(), 0.0);
        assert_eq!(m.transition_prob(&[2, 2, 0, 1]).unwrap(), 0.05);
    }

    #[test]
    fn empty_history_rejected() {
        assert!(matches!(
            table().transition_prob(&[]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(table().transition_prob(&[3]).is_err());
    }

    #[test]
    fn prior_of_one_rejected() {
        assert!(ChangePointModel::markovian(1.0, vec![0.1]).is_err());
        assert!(ChangePointModel::markovian(-0.1, vec![0.1]).is_err());
        assert!(ChangePointModel::markovian(0.0, vec![1.1]).is_err());
    }

    #[test]
    fn constant_history_rule() {
        let rule = GeometricWarmup::new(vec![0.05, 0.05], vec![0.05, 0.05], 0.5).unwrap();
        let m = ChangePointModel::history_dependent(0.0, Arc::new(rule)).unwrap();
        for h in [&[0][..], &[1, 0, 1], &[0, 0, 0, 0, 0, 0, 0]] {
            assert_eq!(m.transition_prob(h).unwrap(), 0.05);
        }
    }

    #[test]
    fn warmup_relaxes_to_limit() {
        let rule = GeometricWarmup::new(vec![0.1, 0.0], vec![0.3, 0.2], 0.5).unwrap();
        assert!((rule.probability(&[0]) - 0.3).abs() < 1e-15);
        assert!((rule.probability(&[1, 0]) - 0.2).abs() < 1e-15);
        assert!((rule.probability(&[0; 40]) - 0.1).abs() < 1e-10);
        assert_eq!(rule.infimum(0), 0.1);
        assert_eq!(rule.infimum(1), 0.0);
        assert!((rule.maximum(1) - 0.3).abs() < 1e-15);
        assert!((rule.delta() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn markovian_constants() {
        let m = table();
        assert_eq!(m.maximum(0), 0.0);
        assert_eq!(m.maximum(5), 0.1);
        assert_eq!(m.infimum(2), 0.0);
        assert!((m.delta() - 0.9).abs() < 1e-15);
    }
}
