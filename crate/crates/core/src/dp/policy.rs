use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::model::{Model, TrialEngine};
use crate::procedures::TrialOutcome;

use super::grid::Grid;
use super::operator::{argmin, continuation, BellmanOperator, DpModel, ValueFunction};

/// Solver settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpConfig {
    /// Uniform grid size `G` (`G + 1` nodes).
    pub grid_size: usize,
    /// Extra nodes `1 - 10^-s` for `s` from 1 to `tail_decades`; below 1
    /// disables them.
    pub tail_decades: f64,
    pub tail_step: f64,
    /// Sup-norm convergence tolerance; also the slack of the stopping test.
    pub tol: f64,
    pub max_iter: usize,
    #[serde(skip)]
    pub parallelism: Parallelism,
}

impl Default for DpConfig {
    fn default() -> Self {
        Self {
            grid_size: 1000,
            tail_decades: 12.0,
            tail_step: 0.02,
            tol: 1e-9,
            max_iter: 100_000,
            parallelism: Parallelism::Parallel,
        }
    }
}

impl DpConfig {
    /// The plain uniform grid with no tail refinement.
    pub fn uniform(grid_size: usize) -> Self {
        Self {
            grid_size,
            tail_decades: 0.0,
            ..Self::default()
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::refined(self.grid_size, self.tail_decades, self.tail_step)
    }
}

/// Action at a grid node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Stop,
    /// 0-based treatment index.
    Treat(usize),
}

/// How a policy was solved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub config: DpConfig,
    pub iterations: usize,
    pub residual: f64,
}

/// The optimal policy for one observation cost.
///
/// Stops once the posterior probability reaches `threshold` (`b_c`);
/// otherwise assigns the treatment minimizing the interpolated continuation
/// cost at the current posterior.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpPolicy {
    pub cost: f64,
    /// `b_c` on the posterior-probability scale.
    pub threshold: f64,
    /// `1 - b_c`, kept separately for thresholds close to 1.
    pub threshold_complement: f64,
    pub model: DpModel,
    pub grid: Grid,
    /// `J*` at the grid nodes.
    pub values: Vec<f64>,
    pub actions: Vec<Action>,
    pub solver: SolverInfo,
}

impl DpPolicy {
    pub fn value_function(&self) -> ValueFunction {
        ValueFunction {
            grid: self.grid.clone(),
            values: self.values.clone(),
            cost: self.cost,
        }
    }

    /// Treatment to assign at posterior `z` (`w = 1 - z`).
    #[inline]
    pub fn assignment(&self, z: f64, w: f64) -> usize {
        argmin(
            (0..self.model.treatments())
                .map(|x| continuation(&self.grid, &self.model, self.cost, &self.values, z, w, x)),
        )
        .0
    }

    #[inline]
    pub fn stops_at(&self, w: f64) -> bool {
        w <= self.threshold_complement
    }

    pub fn check_model(&self, model: &Model) -> Result<()> {
        if DpModel::from_model(model)? != self.model {
            return Err(Error::Config(
                "policy was solved for a different model".into(),
            ));
        }
        Ok(())
    }
}

/// Result of [`value_iterate`].
#[derive(Clone, Debug)]
pub struct DpSolution {
    pub value: ValueFunction,
    pub policy: DpPolicy,
}

/// Iterates the Bellman operator from `J = 0` until the sup-norm change drops
/// below `config.tol`, then extracts the policy.
pub fn value_iterate(cost: f64, model: &DpModel, config: &DpConfig) -> Result<DpSolution> {
    let grid = config.grid()?;
    let op = BellmanOperator::new(&grid, model, cost)?;
    let mut values = vec![0.0; grid.len()];
    let mut next = vec![0.0; grid.len()];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while residual >= config.tol {
        if iterations == config.max_iter {
            return Err(Error::ConvergenceFailure {
                iterations,
                residual,
            });
        }
        residual = op.apply(&values, &mut next, config.parallelism);
        std::mem::swap(&mut values, &mut next);
        iterations += 1;
    }
    log::debug!("c = {cost}: converged in {iterations} iterations (residual {residual:e})");

    let (actions, threshold, threshold_complement) =
        extract_policy(&op, &grid, &values, config.tol);
    let policy = DpPolicy {
        cost,
        threshold,
        threshold_complement,
        model: model.clone(),
        grid: grid.clone(),
        values: values.clone(),
        actions,
        solver: SolverInfo {
            config: *config,
            iterations,
            residual,
        },
    };
    Ok(DpSolution {
        value: ValueFunction { grid, values, cost },
        policy,
    })
}

/// Stop where `1 - z <= J(z) + tol`, else the argmin treatment. The
/// threshold is the linear root of `J(z) - (1 - z) + tol` between the last
/// continuing node and the first node of the stopping run that ends at 1.
fn extract_policy(
    op: &BellmanOperator<'_>,
    grid: &Grid,
    values: &[f64],
    tol: f64,
) -> (Vec<Action>, f64, f64) {
    let gap = |k: usize| values[k] - grid.complements()[k] + tol;
    let actions: Vec<Action> = (0..grid.len())
        .map(|k| {
            if gap(k) >= 0.0 {
                Action::Stop
            } else {
                Action::Treat(op.best_treatment_at_node(values, k).0)
            }
        })
        .collect();
    let first_stop = actions
        .iter()
        .rposition(|a| *a != Action::Stop)
        .map_or(0, |k| k + 1);
    if actions[..first_stop].contains(&Action::Stop) {
        log::warn!("stopping set on the grid is not an interval; using its right-anchored part");
    }
    if first_stop == 0 {
        return (actions, 0.0, 1.0);
    }
    let (k0, k1) = (first_stop - 1, first_stop);
    let (g0, g1) = (gap(k0), gap(k1));
    let t = -g0 / (g1 - g0);
    let z = grid.nodes()[k0] + t * (grid.nodes()[k1] - grid.nodes()[k0]);
    let w = grid.complements()[k0] + t * (grid.complements()[k1] - grid.complements()[k0]);
    (actions, z, w)
}

/// Follows `policy` on `engine`: stop once the posterior reaches `b_c`,
/// otherwise assign the policy's treatment and update the posterior.
pub fn run_dp(engine: &mut TrialEngine<'_>, policy: &DpPolicy) -> Result<TrialOutcome> {
    let model = &policy.model;
    let mut z = model.prior;
    let mut w = 1.0 - model.prior;
    while !policy.stops_at(w) {
        let x = policy.assignment(z, w);
        let step = engine.step(x)?;
        let atom = model.atom_of(x, step.response).ok_or_else(|| {
            Error::Config(format!(
                "response {} is not in the policy's response space",
                step.response
            ))
        })?;
        let (_, z1, w1) = model.posterior_step(x, atom, z, w);
        z = z1;
        w = w1;
    }
    Ok(TrialOutcome::single_stage(engine, z.ln() - w.ln()))
}

/// Calibrated policies keyed by level, as stored in a policy file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PolicySet {
    pub entries: Vec<PolicyEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyEntry {
    pub alpha: f64,
    pub policy: Arc<DpPolicy>,
}

impl PolicySet {
    /// Replaces any existing entry for the same level.
    pub fn insert(&mut self, alpha: f64, policy: Arc<DpPolicy>) {
        self.entries.retain(|e| !same_level(e.alpha, alpha));
        self.entries.push(PolicyEntry { alpha, policy });
        self.entries.sort_by(|a, b| b.alpha.total_cmp(&a.alpha));
    }

    pub fn find(&self, alpha: f64) -> Option<Arc<DpPolicy>> {
        self.entries
            .iter()
            .find(|e| same_level(e.alpha, alpha))
            .map(|e| e.policy.clone())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut out, self)?;
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }
}

fn same_level(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}
