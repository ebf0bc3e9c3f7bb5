use std::f64::consts::E;

use crate::error::{Error, Result};

use super::quality::TreatmentQuality;

/// Odds thresholds of the two-stage procedure.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// `b_1`: a training stage ends once `Gamma >= b_1`.
    pub training: f64,
    /// `b_K`: the procedure stops once `Gamma >= b_K` during assessment.
    pub detection: f64,
    /// `d`: an assessment stage is abandoned once the pre/post likelihood
    /// ratio accumulated in the stage reaches `d`.
    pub test: f64,
}

impl Thresholds {
    /// Requires `b_K > b_1 > 1` and `d > 1`.
    pub fn new(training: f64, detection: f64, test: f64) -> Result<Self> {
        let t = Self {
            training,
            detection,
            test,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.training > 1.0 && self.detection > self.training && self.test > 1.0)
            || !self.detection.is_finite()
            || !self.test.is_finite()
        {
            return Err(Error::invalid(format!(
                "thresholds need detection > training > 1 and test > 1 (got training {}, \
                 detection {}, test {})",
                self.training, self.detection, self.test
            )));
        }
        Ok(())
    }
}

/// `(1 - alpha) / alpha`: the odds threshold guaranteeing false-alarm
/// probability at most `alpha`.
pub fn detection_threshold(alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    Ok((1.0 - alpha) / alpha)
}

fn check_level(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("level {alpha} must lie in (0, 1)")));
    }
    Ok(())
}

/// Thresholds for training treatment `train` and assessment treatment
/// `assess` at level `alpha`:
///
/// ```text
/// b_K = (1 - alpha) / alpha
/// A   = 1/zeta_i + ln(b_K)/D_j
/// b_1 = A / (1/D_i - 1/D_j)
/// d   = b_1 * A / (1/I_j + 1/J_j)
/// ```
///
/// `b_1` (then `d`) is raised to `e` with a warning if the formula gives a
/// value at most 1.
pub fn calibrate_thresholds(
    alpha: f64,
    train: usize,
    assess: usize,
    quality: &TreatmentQuality,
) -> Result<Thresholds> {
    let detection = detection_threshold(alpha)?;
    let k = quality.treatments.len();
    for x in [train, assess] {
        if x >= k {
            return Err(Error::invalid(format!(
                "treatment index {x} out of range for {k} treatments"
            )));
        }
    }
    let ti = quality.get(train);
    let tj = quality.get(assess);
    if !(tj.power > ti.power) {
        return Err(Error::InvalidPairing {
            train,
            assess,
            train_power: ti.power,
            assess_power: tj.power,
        });
    }
    if !(ti.min_transition > 0.0) {
        return Err(Error::InvalidTrainingTreatment { treatment: train });
    }

    let a = 1.0 / ti.min_transition + detection.ln() / tj.power;
    let mut training = a / (1.0 / ti.power - 1.0 / tj.power);
    if training <= 1.0 {
        log::warn!("training threshold {training} <= 1 at alpha = {alpha}; using e");
        training = E;
    }
    let mut test = training * a / (1.0 / tj.kl.post_pre + 1.0 / tj.kl.pre_post);
    if test <= 1.0 {
        log::warn!("test threshold {test} <= 1 at alpha = {alpha}; using e");
        test = E;
    }
    Thresholds::new(training, detection, test).map_err(|_| {
        Error::invalid(format!(
            "alpha = {alpha} is too large: detection threshold {detection} does not exceed \
             training threshold {training}"
        ))
    })
}

/// `lambda_* + |ln(level)| / max_x D_x`: first-order lower bound on the
/// expected sample size of any procedure with false-alarm probability
/// `level`. Natural logarithm throughout.
pub fn lower_bound_value(level: f64, quality: &TreatmentQuality) -> Result<f64> {
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::invalid(format!("level {level} must lie in (0, 1]")));
    }
    Ok(quality.fastest_change_time + level.ln().abs() / quality.max_power())
}

/// Asymptotic upper bound on the expected sample size of the two-stage
/// procedure with the given thresholds (training `i`, assessment `j`):
///
/// ```text
///   (lambda_i + ln b_K / D_j)
/// + (1/zeta_i + ln b_K / D_j) (1/b_1 + 1/d)
/// + |ln zeta_i| / D_i
/// + ln b_1 (1/D_i - 1/D_j)
/// + ln d / b_1 (1/I_j + 1/J_j)
/// ```
pub fn upper_bound_value(
    thresholds: &Thresholds,
    train: usize,
    assess: usize,
    quality: &TreatmentQuality,
) -> Result<f64> {
    let Thresholds {
        training: b1,
        detection: bk,
        test: d,
    } = *thresholds;
    if !(b1 > 1.0 && bk > 1.0 && d > 1.0) {
        return Err(Error::invalid("all thresholds must exceed 1"));
    }
    let ti = quality.get(train);
    let tj = quality.get(assess);
    let detect = bk.ln() / tj.power;
    Ok((ti.mean_change_time + detect)
        + (1.0 / ti.min_transition + detect) * (1.0 / b1 + 1.0 / d)
        + ti.min_transition.ln().abs() / ti.power
        + b1.ln() * (1.0 / ti.power - 1.0 / tj.power)
        + d.ln() / b1 * (1.0 / tj.kl.post_pre + 1.0 / tj.kl.pre_post))
}
