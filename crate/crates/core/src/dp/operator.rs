use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{fill_indexed, Parallelism};
use crate::model::{Model, Transitions};

use super::grid::Grid;

/// One response atom of a finite response space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub response: f64,
    /// `f_x(y)`.
    pub pre: f64,
    /// `g_x(y)`.
    pub post: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpTreatment {
    /// Markovian `p_x`.
    pub transition: f64,
    pub atoms: Vec<Atom>,
}

/// The part of a [`Model`] the dynamic program needs: a Markovian
/// change-point model with finite response spaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpModel {
    pub prior: f64,
    pub treatments: Vec<DpTreatment>,
}

impl DpModel {
    pub fn from_model(model: &Model) -> Result<Self> {
        let Transitions::Markovian(p) = model.change_point().transitions() else {
            return Err(Error::UnsupportedModel(
                "dynamic programming needs a Markovian change-point model".into(),
            ));
        };
        let treatments = model
            .responses()
            .families()
            .iter()
            .zip(p)
            .enumerate()
            .map(|(x, (family, &transition))| {
                let support = family.finite_support().ok_or_else(|| {
                    Error::UnsupportedResponse(format!(
                        "treatment {} has a continuous response; dynamic programming needs a \
                         finite response space",
                        x + 1
                    ))
                })?;
                if transition >= 1.0 {
                    return Err(Error::UnsupportedModel(format!(
                        "treatment {} forces the change (p = 1)",
                        x + 1
                    )));
                }
                Ok(DpTreatment {
                    transition,
                    atoms: support
                        .into_iter()
                        .map(|s| Atom {
                            response: s.response,
                            pre: s.pre,
                            post: s.post,
                        })
                        .collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            prior: model.change_point().prior(),
            treatments,
        })
    }

    pub fn treatments(&self) -> usize {
        self.treatments.len()
    }

    /// One posterior step from `(z, w = 1 - z)` when `treatment` is assigned
    /// and `atom` observed: returns `(phi, z', w')` with
    ///
    /// ```text
    /// phi = (z + p(1 - z)) g(y) + (1 - p)(1 - z) f(y)
    /// z'  = (z + p(1 - z)) g(y) / phi
    /// ```
    ///
    /// `phi` is the predictive probability of the atom.
    #[inline]
    pub fn posterior_step(&self, treatment: usize, atom: usize, z: f64, w: f64) -> (f64, f64, f64) {
        let x = &self.treatments[treatment];
        let a = &x.atoms[atom];
        let changed = (z + x.transition * w) * a.post;
        let unchanged = (1.0 - x.transition) * w * a.pre;
        let phi = changed + unchanged;
        if phi > 0.0 {
            (phi, changed / phi, unchanged / phi)
        } else {
            (0.0, z, w)
        }
    }

    /// Index of the atom carrying `response`.
    pub fn atom_of(&self, treatment: usize, response: f64) -> Option<usize> {
        self.treatments[treatment]
            .atoms
            .iter()
            .position(|a| a.response == response)
    }
}

/// A cost-to-go `J` on a grid for per-observation cost `cost`.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub cost: f64,
}

impl ValueFunction {
    pub fn zero(grid: Grid, cost: f64) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values, cost }
    }

    pub fn at(&self, z: f64) -> f64 {
        self.grid.interpolate(&self.values, z, 1.0 - z)
    }
}

#[derive(Clone, Copy, Debug)]
struct KernelEntry {
    phi: f64,
    cell: u32,
    weight: f64,
}

/// The Bellman operator
/// `J -> min(1 - z, c + min_x sum_y J(psi(z, x, y)) phi(y; z, x))` on a fixed
/// grid.
///
/// The successor points `psi` of every node do not depend on `J`, so their
/// cells and interpolation weights are computed once.
#[derive(Clone, Debug)]
pub struct BellmanOperator<'a> {
    grid: &'a Grid,
    model: &'a DpModel,
    cost: f64,
    /// Offsets of each treatment's atoms inside a node block.
    offsets: Vec<usize>,
    block: usize,
    entries: Vec<KernelEntry>,
}

impl<'a> BellmanOperator<'a> {
    pub fn new(grid: &'a Grid, model: &'a DpModel, cost: f64) -> Result<Self> {
        if !(cost > 0.0) || !cost.is_finite() {
            return Err(Error::invalid(format!(
                "observation cost {cost} must be positive"
            )));
        }
        let mut offsets = vec![0];
        for t in &model.treatments {
            offsets.push(offsets.last().unwrap() + t.atoms.len());
        }
        let block = *offsets.last().unwrap();
        let mut entries = Vec::with_capacity(block * grid.len());
        for (&z, &w) in grid.nodes().iter().zip(grid.complements()) {
            for (x, t) in model.treatments.iter().enumerate() {
                for a in 0..t.atoms.len() {
                    let (phi, z1, w1) = model.posterior_step(x, a, z, w);
                    let (cell, weight) = grid.locate(z1, w1);
                    entries.push(KernelEntry {
                        phi,
                        cell: cell as u32,
                        weight,
                    });
                }
            }
        }
        Ok(Self {
            grid,
            model,
            cost,
            offsets,
            block,
            entries,
        })
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// `c + sum_y J(psi(z_k, x, y)) phi(y; z_k, x)` at node `k`.
    #[inline]
    pub fn continuation_at_node(&self, values: &[f64], node: usize, treatment: usize) -> f64 {
        let base = node * self.block;
        let mut total = 0.0;
        for e in &self.entries[base + self.offsets[treatment]..base + self.offsets[treatment + 1]] {
            let k = e.cell as usize;
            total += e.phi * (values[k] * (1.0 - e.weight) + values[k + 1] * e.weight);
        }
        self.cost + total
    }

    /// Same as [`Self::continuation_at_node`] at an arbitrary point.
    pub fn continuation(&self, values: &[f64], z: f64, w: f64, treatment: usize) -> f64 {
        continuation(self.grid, self.model, self.cost, values, z, w, treatment)
    }

    /// Writes `T_c J` into `out` and returns `max_k |out_k - J_k|`.
    pub fn apply(&self, values: &[f64], out: &mut [f64], par: Parallelism) -> f64 {
        let k_count = self.model.treatments();
        let complements = self.grid.complements();
        fill_indexed(out, par, |node| {
            let mut best = f64::INFINITY;
            for x in 0..k_count {
                best = best.min(self.continuation_at_node(values, node, x));
            }
            complements[node].min(best)
        });
        out.iter()
            .zip(values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Continuation-minimizing treatment at node `k` (lowest index on ties).
    pub fn best_treatment_at_node(&self, values: &[f64], node: usize) -> (usize, f64) {
        argmin((0..self.model.treatments()).map(|x| self.continuation_at_node(values, node, x)))
    }
}

/// `c + sum_y J(psi(z, x, y)) phi(y; z, x)` with `J` interpolated on `grid`.
#[inline]
pub(crate) fn continuation(
    grid: &Grid,
    model: &DpModel,
    cost: f64,
    values: &[f64],
    z: f64,
    w: f64,
    treatment: usize,
) -> f64 {
    let mut total = 0.0;
    for a in 0..model.treatments[treatment].atoms.len() {
        let (phi, z1, w1) = model.posterior_step(treatment, a, z, w);
        if phi > 0.0 {
            total += phi * grid.interpolate(values, z1, w1);
        }
    }
    cost + total
}

/// First minimum of a nonempty sequence.
pub(crate) fn argmin(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (x, v) in values.enumerate() {
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

/// One application of the Bellman operator with cost `cost`.
pub fn bellman_apply(
    value: &ValueFunction,
    cost: f64,
    model: &DpModel,
    par: Parallelism,
) -> Result<ValueFunction> {
    let op = BellmanOperator::new(&value.grid, model, cost)?;
    let mut out = vec![0.0; value.values.len()];
    op.apply(&value.values, &mut out, par);
    Ok(ValueFunction {
        grid: value.grid.clone(),
        values: out,
        cost,
    })
}
