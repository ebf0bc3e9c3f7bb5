//! Optimal assignment and stopping by value iteration, for Markovian
//! change-point models with finite response spaces.
//!
//! The state is the posterior probability `z` that the change has happened.
//! The optimal cost-to-go for observation cost `c` is the fixed point of
//! `J(z) = min(1 - z, c + min_x E[J(z')])`, reached by iterating from
//! `J = 0`. Its stopping region is an interval `[b_c, 1]`.

mod calibrate;
mod grid;
mod operator;
mod policy;

pub use calibrate::{
    calibrate_c, default_cost_grid, screen_costs, Calibration, CalibrationRow, CalibrationSettings,
    CostScreen,
};
pub use grid::Grid;
pub use operator::{bellman_apply, Atom, BellmanOperator, DpModel, DpTreatment, ValueFunction};
pub use policy::{
    run_dp, value_iterate, Action, DpConfig, DpPolicy, DpSolution, PolicyEntry, PolicySet,
    SolverInfo,
};
