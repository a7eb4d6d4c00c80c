//! Newton-Raphson AC power flow with any number of fixed-angle buses.
//!
//! The unknown vector is `x = [θ_PV; θ_PQ; V_PQ]`, each group in ascending
//! bus id. The residual `f(x)` is scheduled minus computed injection, so its
//! Jacobian is the negated textbook power-flow Jacobian. Equilibria of
//! `ẋ = f(x)` are power-flow solutions; a solution is classified as stable
//! when every eigenvalue of `∂f/∂x` there has a negative real part.

mod equations;
mod layout;
mod newton;
mod pair;
mod report;

pub use equations::{injections, jacobian, mismatch, Residual};
pub use layout::{Layout, State};
pub use newton::{classify, solve, SolverOptions};
pub use pair::{find_pair_solutions, SolutionPair};
pub use report::{BusRow, SolutionReport};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::BusId;

/// Replaces the scheduled active injection of `bus` by `p_max · (1 + λ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Loading {
    pub bus: BusId,
    pub lambda: f64,
    pub p_max: f64,
}

impl Loading {
    pub fn injection(&self) -> f64 {
        self.p_max * (1.0 + self.lambda)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Sep,
    Uep,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerFlowSolution {
    /// Angles (rad) and magnitudes (p.u.) for every bus, by position.
    pub state: State,
    /// Net (P, Q) injection at every bus, by position.
    pub injections: Vec<(f64, f64)>,
    pub iterations: usize,
    /// Infinity norm of the residual at `state`.
    pub final_mismatch: f64,
    pub converged: bool,
    /// The Newton iteration stopped on a singular Jacobian.
    pub singular: bool,
    pub classification: Classification,
}

impl PowerFlowSolution {
    /// Placeholder for a state that was never solved.
    pub fn unsolved(state: State) -> Self {
        let n = state.theta.len();
        PowerFlowSolution {
            state,
            injections: vec![(0.0, 0.0); n],
            iterations: 0,
            final_mismatch: f64::INFINITY,
            converged: false,
            singular: false,
            classification: Classification::Unknown,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("state has {got} buses, network has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bus {0} has no active-power equation (slack or Vθ)")]
    NoActiveRow(BusId),
    #[error("unknown bus {0}")]
    UnknownBus(BusId),
    #[error("loading offset λ = {0} is outside [-1, 0]")]
    LambdaOutOfRange(f64),
    #[error("{which} search did not converge from seed {seed:?}")]
    PairNotFound { which: &'static str, seed: Vec<f64> },
}
