use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes closer than this are merged.
const MERGE_GAP: f64 = 1e-14;

/// Discretization of the posterior probability `z` on `[0, 1]`.
///
/// Nodes are strictly increasing from 0 to 1. `complements[k] = 1 - nodes[k]`
/// is stored separately because tail nodes `1 - 10^-s` are only
/// representable accurately through their complement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    nodes: Vec<f64>,
    complements: Vec<f64>,
}

impl Grid {
    /// `G + 1` points `k / G`.
    pub fn uniform(size: usize) -> Result<Self> {
        Self::refined(size, 0.0, 1.0)
    }

    /// The uniform grid plus tail nodes `1 - 10^-s` for
    /// `s = 1, 1 + step, ..., tail_decades`. With `tail_decades < 1` this is
    /// the uniform grid.
    pub fn refined(size: usize, tail_decades: f64, step: f64) -> Result<Self> {
        if size < 2 {
            return Err(Error::invalid(format!(
                "grid size {size} must be at least 2"
            )));
        }
        let mut points: Vec<(f64, f64)> = (0..=size)
            .map(|k| {
                let z = k as f64 / size as f64;
                (z, (size - k) as f64 / size as f64)
            })
            .collect();
        if tail_decades >= 1.0 {
            if !(step > 0.0) {
                return Err(Error::invalid(format!("tail step {step} must be positive")));
            }
            let count = ((tail_decades - 1.0) / step + 1e-9).floor() as usize;
            for i in 0..=count {
                let w = 10f64.powf(-(1.0 + i as f64 * step));
                points.push((1.0 - w, w));
            }
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
        let mut nodes: Vec<f64> = Vec::with_capacity(points.len());
        let mut complements: Vec<f64> = Vec::with_capacity(points.len());
        for (z, w) in points {
            if let Some(&last_w) = complements.last() {
                if last_w - w <= MERGE_GAP * last_w.max(1e-300) || z <= *nodes.last().unwrap() {
                    continue;
                }
            }
            nodes.push(z);
            complements.push(w);
        }
        Ok(Self { nodes, complements })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn complements(&self) -> &[f64] {
        &self.complements
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(k, t)` with `z = (1 - t) nodes[k] + t nodes[k + 1]`, `t in [0, 1]`.
    ///
    /// Above one half the cell and weight come from the complement `w = 1 - z`
    /// so that points near 1 keep their resolution.
    #[inline]
    pub fn locate(&self, z: f64, w: f64) -> (usize, f64) {
        let last = self.nodes.len() - 1;
        if z < 0.5 {
            let k = self.nodes.partition_point(|&n| n <= z).clamp(1, last) - 1;
            let t = (z - self.nodes[k]) / (self.nodes[k + 1] - self.nodes[k]);
            (k, t.clamp(0.0, 1.0))
        } else {
            // complements are decreasing
            let k = self.complements.partition_point(|&c| c >= w).clamp(1, last) - 1;
            let t = (self.complements[k] - w) / (self.complements[k] - self.complements[k + 1]);
            (k, t.clamp(0.0, 1.0))
        }
    }

    /// Piecewise-linear interpolant of `values` at `z` (with `w = 1 - z`).
    #[inline]
    pub fn interpolate(&self, values: &[f64], z: f64, w: f64) -> f64 {
        let (k, t) = self.locate(z, w);
        values[k] * (1.0 - t) + values[k + 1] * t
    }
}
