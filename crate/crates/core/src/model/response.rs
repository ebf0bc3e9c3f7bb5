use std::fmt;
use std::sync::Arc;

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::{CounterStream, ReplicationSeed, StreamId};
use crate::stats::MeanAccumulator;

/// A user-supplied pre/post-change response pair.
///
/// `sample` must be a deterministic function of the uniform `v` (an
/// inverse-transform sampler), so that responses stay reproducible under the
/// counter-based streams.
pub trait ResponseDensity: Send + Sync + fmt::Debug {
    fn sample(&self, changed: bool, v: f64) -> f64;
    /// `log(g(y) / f(y))`.
    fn log_density_ratio(&self, y: f64) -> f64;
}

/// Draws used for Monte Carlo KL estimates of custom families.
pub const KL_MONTE_CARLO_DRAWS: usize = 1_000_000;
const KL_MONTE_CARLO_SEED: u64 = 0x6b6c_6469_7665_7267;

/// The pre-change (`f_x`) and post-change (`g_x`) response laws of one
/// treatment.
#[derive(Clone, Debug)]
pub enum ResponseFamily {
    /// `Bernoulli(pre)` before the change and `Bernoulli(1 - pre)` after.
    Bernoulli {
        pre: f64,
    },
    /// Unit-variance normal with a mean shift.
    Gaussian {
        mean_pre: f64,
        mean_post: f64,
    },
    Custom(Arc<dyn ResponseDensity>),
}

/// One atom of a finite response space with its pre/post probabilities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupportPoint {
    pub response: f64,
    pub pre: f64,
    pub post: f64,
}

/// Kullback-Leibler divergences of a treatment, in nats.
///
/// `post_pre` is `I_x = KL(g_x || f_x)` and `pre_post` is
/// `J_x = KL(f_x || g_x)`. Standard errors are zero for closed forms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KlDivergences {
    pub post_pre: f64,
    pub pre_post: f64,
    pub post_pre_se: f64,
    pub pre_post_se: f64,
}

impl ResponseFamily {
    pub fn bernoulli(pre: f64) -> Result<Self> {
        let fam = ResponseFamily::Bernoulli { pre };
        fam.validate()?;
        Ok(fam)
    }

    pub fn gaussian(mean_pre: f64, mean_post: f64) -> Result<Self> {
        let fam = ResponseFamily::Gaussian {
            mean_pre,
            mean_post,
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ResponseFamily::Bernoulli { pre } => {
                if !(pre > 0.0 && pre < 1.0) {
                    return Err(Error::InvalidModel(format!(
                        "Bernoulli parameter {pre} must lie in (0, 1)"
                    )));
                }
                if pre == 0.5 {
                    return Err(Error::InvalidModel(
                        "Bernoulli parameter 0.5 makes pre- and post-change responses identical"
                            .into(),
                    ));
                }
            }
            ResponseFamily::Gaussian {
                mean_pre,
                mean_post,
            } => {
                if !mean_pre.is_finite() || !mean_post.is_finite() {
                    return Err(Error::InvalidModel("Gaussian means must be finite".into()));
                }
                if mean_pre == mean_post {
                    return Err(Error::InvalidModel(
                        "Gaussian pre- and post-change means must differ".into(),
                    ));
                }
            }
            ResponseFamily::Custom(_) => {}
        }
        Ok(())
    }

    /// Inverse-transform draw from `f` (or `g` when `changed`).
    #[inline]
    pub fn sample(&self, changed: bool, v: f64) -> f64 {
        match self {
            ResponseFamily::Bernoulli { pre } => {
                let p_one = if changed { 1.0 - pre } else { *pre };
                if v < p_one {
                    1.0
                } else {
                    0.0
                }
            }
            ResponseFamily::Gaussian {
                mean_pre,
                mean_post,
            } => {
                let mean = if changed { *mean_post } else { *mean_pre };
                mean + standard_normal().inverse_cdf(v)
            }
            ResponseFamily::Custom(d) => d.sample(changed, v),
        }
    }

    /// `log(g(y) / f(y))`.
    #[inline]
    pub fn log_density_ratio(&self, y: f64) -> f64 {
        match self {
            ResponseFamily::Bernoulli { pre } => {
                let r = ((1.0 - pre) / pre).ln();
                if y > 0.5 {
                    r
                } else {
                    -r
                }
            }
            ResponseFamily::Gaussian {
                mean_pre,
                mean_post,
            } => (mean_post - mean_pre) * (y - 0.5 * (mean_pre + mean_post)),
            ResponseFamily::Custom(d) => d.log_density_ratio(y),
        }
    }

    /// The response atoms when the response space is finite.
    pub fn finite_support(&self) -> Option<Vec<SupportPoint>> {
        match *self {
            ResponseFamily::Bernoulli { pre } => Some(vec![
                SupportPoint {
                    response: 0.0,
                    pre: 1.0 - pre,
                    post: pre,
                },
                SupportPoint {
                    response: 1.0,
                    pre,
                    post: 1.0 - pre,
                },
            ]),
            _ => None,
        }
    }

    pub fn kl_divergences(&self) -> KlDivergences {
        match *self {
            ResponseFamily::Bernoulli { pre } => {
                let kl = bernoulli_kl(1.0 - pre, pre);
                KlDivergences {
                    post_pre: kl,
                    pre_post: bernoulli_kl(pre, 1.0 - pre),
                    post_pre_se: 0.0,
                    pre_post_se: 0.0,
                }
            }
            ResponseFamily::Gaussian {
                mean_pre,
                mean_post,
            } => {
                let kl = 0.5 * (mean_post - mean_pre).powi(2);
                KlDivergences {
                    post_pre: kl,
                    pre_post: kl,
                    post_pre_se: 0.0,
                    pre_post_se: 0.0,
                }
            }
            ResponseFamily::Custom(_) => self.kl_monte_carlo(KL_MONTE_CARLO_DRAWS),
        }
    }

    /// Monte Carlo KL estimate from `draws` samples of each density.
    pub fn kl_monte_carlo(&self, draws: usize) -> KlDivergences {
        let seed = ReplicationSeed::new(KL_MONTE_CARLO_SEED, 0);
        let mut post_stream = CounterStream::new(seed, StreamId::Latent);
        let mut pre_stream = CounterStream::new(seed, StreamId::Response);
        let mut post = MeanAccumulator::default();
        let mut pre = MeanAccumulator::default();
        for _ in 0..draws {
            let y = self.sample(true, post_stream.next_uniform());
            post.push(self.log_density_ratio(y));
            let y = self.sample(false, pre_stream.next_uniform());
            pre.push(-self.log_density_ratio(y));
        }
        KlDivergences {
            post_pre: post.mean(),
            pre_post: pre.mean(),
            post_pre_se: post.std_error(),
            pre_post_se: pre.std_error(),
        }
    }
}

fn standard_normal() -> Normal {
    Normal::standard()
}

/// KL(Bernoulli(a) || Bernoulli(b)).
fn bernoulli_kl(a: f64, b: f64) -> f64 {
    a * (a / b).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln()
}

/// Response laws for every treatment.
#[derive(Clone, Debug)]
pub struct ResponseModel {
    families: Vec<ResponseFamily>,
}

impl ResponseModel {
    pub fn new(families: Vec<ResponseFamily>) -> Result<Self> {
        if families.is_empty() {
            return Err(Error::InvalidModel(
                "at least one treatment is required".into(),
            ));
        }
        for f in &families {
            f.validate()?;
        }
        Ok(Self { families })
    }

    pub fn treatments(&self) -> usize {
        self.families.len()
    }

    pub fn family(&self, treatment: usize) -> &ResponseFamily {
        &self.families[treatment]
    }

    pub fn families(&self) -> &[ResponseFamily] {
        &self.families
    }

    /// `(I_x, J_x)` for a treatment.
    pub fn kl_divergences(&self, treatment: usize) -> Result<KlDivergences> {
        self.families
            .get(treatment)
            .map(ResponseFamily::kl_divergences)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "treatment index {treatment} out of range for {} treatments",
                    self.families.len()
                ))
            })
    }
}
