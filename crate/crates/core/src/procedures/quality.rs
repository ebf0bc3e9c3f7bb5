use crate::error::Result;
use crate::model::{ChangePointModel, KlDivergences, Model, Transitions};

/// Survival probability below which the change-time series is truncated.
pub const SURVIVAL_CUTOFF: f64 = 1e-12;
/// Hard cap on series terms, for limits so small the cutoff is out of reach.
const MAX_SERIES_TERMS: u64 = 100_000_000;

/// Per-treatment constants used by calibration, bounds and reports.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TreatmentMetrics {
    /// `I_x = KL(g_x || f_x)` and `J_x = KL(f_x || g_x)`.
    pub kl: KlDivergences,
    /// `D_x = I_x + |ln(1 - p_x)|` with the limiting `p_x`.
    pub power: f64,
    /// `lambda_x`: expected change time when `x` is always assigned.
    /// Infinite when the change can never happen.
    pub mean_change_time: f64,
    /// `zeta_x`.
    pub min_transition: f64,
    /// Limiting `p_x`.
    pub transition: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreatmentQuality {
    pub treatments: Vec<TreatmentMetrics>,
    /// `lambda_*`: expected change time when every step uses the largest
    /// transition probability available.
    pub fastest_change_time: f64,
}

impl TreatmentQuality {
    pub fn get(&self, treatment: usize) -> &TreatmentMetrics {
        &self.treatments[treatment]
    }

    /// Treatment with the largest `D_x` (lowest index on ties).
    pub fn most_powerful(&self) -> usize {
        let mut best = 0;
        for (x, m) in self.treatments.iter().enumerate() {
            if m.power > self.treatments[best].power {
                best = x;
            }
        }
        best
    }

    /// `max_x D_x`.
    pub fn max_power(&self) -> f64 {
        self.treatments[self.most_powerful()].power
    }
}

pub fn quality_metrics(model: &Model) -> Result<TreatmentQuality> {
    let cp = model.change_point();
    let treatments = (0..model.treatments())
        .map(|x| {
            let kl = model.responses().kl_divergences(x)?;
            let p = cp.limit(x);
            Ok(TreatmentMetrics {
                kl,
                power: kl.post_pre + (-p).ln_1p().abs(),
                mean_change_time: static_change_time(cp, x),
                min_transition: cp.infimum(x),
                transition: p,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TreatmentQuality {
        treatments,
        fastest_change_time: fastest_change_time(cp),
    })
}

/// `E[Theta] = sum_{t>=0} prod_{s=0}^{t} (1 - pi_s)` under static
/// assignment of `treatment`.
fn static_change_time(cp: &ChangePointModel, treatment: usize) -> f64 {
    match cp.transitions() {
        Transitions::Markovian(p) => geometric_mean_time(cp.prior(), p[treatment]),
        Transitions::HistoryDependent(rule) => {
            if rule.limit(treatment) == 0.0 {
                return f64::INFINITY;
            }
            let mut history = Vec::new();
            survival_series(cp.prior(), rule.limit(treatment), |t| {
                history.push(treatment);
                debug_assert_eq!(history.len() as u64, t);
                rule.probability(&history)
            })
        }
    }
}

fn fastest_change_time(cp: &ChangePointModel) -> f64 {
    match cp.transitions() {
        Transitions::Markovian(p) => {
            geometric_mean_time(cp.prior(), p.iter().copied().fold(0.0, f64::max))
        }
        Transitions::HistoryDependent(rule) => {
            let limit = (0..rule.treatments())
                .map(|x| rule.limit(x))
                .fold(0.0, f64::max);
            if limit == 0.0 {
                return f64::INFINITY;
            }
            survival_series(cp.prior(), limit, |t| cp.maximum(t as usize))
        }
    }
}

/// `(1 - pi_0) / p`.
fn geometric_mean_time(prior: f64, p: f64) -> f64 {
    if p == 0.0 {
        f64::INFINITY
    } else {
        (1.0 - prior) / p
    }
}

/// Sums `prod_{s=0}^{t} (1 - pi_s)` over `t >= 0` until the product drops
/// below [`SURVIVAL_CUTOFF`]. If the term cap is hit first, the tail is
/// closed with the geometric remainder at rate `limit`.
fn survival_series(prior: f64, limit: f64, mut pi: impl FnMut(u64) -> f64) -> f64 {
    let mut survival = 1.0 - prior;
    let mut total = survival;
    let mut t = 0;
    while survival >= SURVIVAL_CUTOFF {
        t += 1;
        if t > MAX_SERIES_TERMS {
            log::warn!(
                "change-time series not converged after {MAX_SERIES_TERMS} terms; closing the \
                 tail geometrically"
            );
            return total + survival * (1.0 - limit) / limit;
        }
        survival *= 1.0 - pi(t);
        total += survival;
    }
    total
}
