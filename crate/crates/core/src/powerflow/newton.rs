use nalgebra::{DMatrix, DVector};

use super::equations::{injections, jacobian_at, residual_at, scheduled};
use super::{Classification, Layout, Loading, PowerFlowSolution, SolveError, State};
use crate::netmodel::TypedNetwork;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Infinity-norm residual tolerance.
    pub tolerance: f64,
    pub max_iter: usize,
    /// A Newton step longer than this (2-norm) counts as divergence.
    pub max_step: f64,
    /// Number of step halvings tried when the residual does not decrease.
    pub max_halvings: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-8,
            max_iter: 50,
            max_step: 10.0,
            max_halvings: 4,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<(), SolveError> {
        if !(self.tolerance > 0.0) {
            return Err(SolveError::InvalidOptions(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iter == 0 {
            return Err(SolveError::InvalidOptions(
                "max_iter must be at least 1".into(),
            ));
        }
        if !(self.max_step > 0.0) {
            return Err(SolveError::InvalidOptions(
                "max_step must be positive".into(),
            ));
        }
        Ok(())
    }
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Solves the power flow of `tn`.
///
/// Starts from `init` (fixed entries are re-imposed) or from a flat start.
/// Plain non-convergence is not an error: the returned solution carries
/// `converged = false` and the last iterate. The iteration gives up after
/// `max_iter` steps, on a step longer than `max_step`, or on a singular
/// Jacobian (`singular = true`).
pub fn solve(
    tn: &TypedNetwork,
    init: Option<&State>,
    options: &SolverOptions,
    loading: Option<&Loading>,
) -> Result<PowerFlowSolution, SolveError> {
    options.validate()?;
    let n_bus = tn.specs().len();
    let mut state = match init {
        Some(s) if s.theta.len() != n_bus || s.v.len() != n_bus => {
            return Err(SolveError::DimensionMismatch {
                expected: n_bus,
                got: s.theta.len(),
            })
        }
        Some(s) => s.clone(),
        None => State::flat(n_bus),
    };
    state.impose_fixed(tn);

    let layout = Layout::new(tn);
    let (p0, q0) = scheduled(tn, &layout, loading)?;
    let y = tn.admittance();
    let residual = |x: &DVector<f64>, st: &mut State| {
        layout.scatter(x, st);
        residual_at(y, &layout, &p0, &q0, st).values
    };

    let mut x = layout.gather(&state);
    let mut f = residual(&x, &mut state);
    let mut norm = inf_norm(&f);
    let mut iterations = 0;
    let mut singular = false;
    let mut failed = false;

    while norm > options.tolerance && iterations < options.max_iter {
        let jac = jacobian_at(y, &layout, &state);
        let Some(step) = jac.lu().solve(&(-&f)) else {
            singular = true;
            break;
        };
        if !step.iter().all(|s| s.is_finite()) {
            singular = true;
            break;
        }
        if step.norm() > options.max_step {
            failed = true;
            break;
        }
        iterations += 1;

        let mut scale = 1.0;
        let mut trial_state = state.clone();
        let mut accepted = None;
        for attempt in 0..=options.max_halvings {
            let trial = &x + &step * scale;
            let positive = layout
                .voltage_buses
                .iter()
                .enumerate()
                .all(|(k, _)| trial[layout.angle_buses.len() + k] > 0.0);
            if positive {
                let tf = residual(&trial, &mut trial_state);
                let tn_norm = inf_norm(&tf);
                if tn_norm < norm || attempt == options.max_halvings {
                    accepted = Some((trial, tf, tn_norm));
                    break;
                }
            }
            scale *= 0.5;
        }
        let Some((nx, nf, nn)) = accepted else {
            failed = true;
            break;
        };
        x = nx;
        f = nf;
        norm = nn;
        state = trial_state;
        if !norm.is_finite() {
            failed = true;
            break;
        }
    }

    layout.scatter(&x, &mut state);
    let converged = !failed && !singular && norm <= options.tolerance;
    let classification = if converged {
        classify(&jacobian_at(y, &layout, &state))
    } else {
        Classification::Unknown
    };
    Ok(PowerFlowSolution {
        injections: injections(y, &state),
        state,
        iterations,
        final_mismatch: norm,
        converged,
        singular,
        classification,
    })
}

/// Stability of an equilibrium of `ẋ = f(x)` from the eigenvalues of `∂f/∂x`.
pub fn classify(jac: &DMatrix<f64>) -> Classification {
    if jac.nrows() == 0 {
        return Classification::Unknown;
    }
    let scale = jac.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let eps = 1e-10 * scale;
    let eig = jac.complex_eigenvalues();
    if eig.iter().any(|l| l.re > eps) {
        Classification::Uep
    } else if eig.iter().all(|l| l.re < -eps) {
        Classification::Sep
    } else {
        Classification::Unknown
    }
}
