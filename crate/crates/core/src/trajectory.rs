//! Time-ordered snapshots produced by the solvers.

use serde::Serialize;

use crate::eos::PressureParams;
use crate::riemann::{EulerianState, LagrangianState};

/// A state at a given time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot<S> {
    pub t: f64,
    pub state: S,
}

/// Run metadata attached to every trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub params: PressureParams,
    /// Viscosity of the run; `None` for inviscid solvers.
    pub mu: Option<f64>,
    pub t_end: f64,
    pub cfl_safety: f64,
    /// Solver-specific settings recorded verbatim.
    pub settings: serde_json::Value,
}

/// Snapshots plus one diagnostics record per snapshot.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory<S, D> {
    pub snapshots: Vec<Snapshot<S>>,
    pub diagnostics: Vec<D>,
    pub meta: RunMeta,
}

impl<S, D> Trajectory<S, D> {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn first(&self) -> &Snapshot<S> {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot<S> {
        self.snapshots.last().expect("trajectory holds at least one snapshot")
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Whether snapshot times are equispaced to relative tolerance `tol`.
    pub fn is_uniformly_spaced(&self, tol: f64) -> bool {
        let t = self.times();
        if t.len() < 2 {
            return true;
        }
        let dt = t[1] - t[0];
        t.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= tol * dt.abs())
    }
}

/// Per-snapshot diagnostics of a viscous Eulerian run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EulerDiagnostics {
    pub t: f64,
    pub margin: f64,
    pub mass: f64,
    pub max_rho: f64,
    pub max_momentum_ratio: f64,
    /// Accumulated space-time integral of the dissipation density of pair 3.
    pub dissipation: f64,
    /// Accumulated mass that left the domain through the left boundary.
    pub left_outflow: f64,
    pub steps: usize,
}

/// Per-snapshot diagnostics of a Lagrangian run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagrangeDiagnostics {
    pub t: f64,
    pub max_grad_v: f64,
    pub max_grad_u: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub max_abs_u: f64,
    pub min_y: f64,
    pub min_q: f64,
    pub dt: f64,
}

pub type EulerianTrajectory = Trajectory<EulerianState, EulerDiagnostics>;
pub type LagrangianTrajectory = Trajectory<LagrangianState, LagrangeDiagnostics>;
