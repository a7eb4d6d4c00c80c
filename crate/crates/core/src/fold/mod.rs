//! Fold (saddle-node) analysis of the loadability limit.
//!
//! Near the limit of a study bus `c`, with the injection written as
//! `P_c = P_max (1 + λ)`, the dynamics of `ẋ = f(x, λ)` reduce on the centre
//! manifold to
//!
//! ```text
//! ż ≈ α λ + β z²,    α = P_max ωᵀ e_c,    β = ½ ωᵀ [νᵀ H_i ν]_i
//! ```
//!
//! where `ν`, `ω` are the right and left null vectors of `J₀ = ∂f/∂x` at the
//! fold and `H_i` is the Hessian of `f_i`. The two equilibria sit at
//! `z = ±√(−αλ/β)`, so the stable/unstable pair is `d = 2√(−αλ/β)` apart.
//! This module locates the fold, builds those quantities, and compares the
//! estimate against the distance between the actual power-flow solutions.

mod coefficients;
mod curvature;
mod distance;
mod nullspace;

pub use coefficients::{estimated_distance, fold_coefficients, FoldCoefficients};
pub use curvature::{curvature, second_directional_derivative};
pub use distance::{distance_curve, exact_distance, DistanceCurve, DistancePoint};
pub use nullspace::{null_vectors, NullPair};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::netmodel::{BusId, TypedNetwork};
use crate::pmr::{pmax_search, PmrError, PmrOptions, Ramp};
use crate::powerflow::{jacobian, solve, Layout, Loading, SolveError, SolverOptions, State};

/// Smallest-to-largest singular value ratio below which the Jacobian counts
/// as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-3;

const FOLD_BRACKET: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FoldError {
    #[error(transparent)]
    Pmr(#[from] PmrError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("search for bus {bus} saturated at {cap_pu} p.u. without reaching a fold")]
    Saturated { bus: BusId, cap_pu: f64 },
    #[error(
        "Jacobian at bus {bus} is not singular enough: sigma_min/sigma_max = {ratio:.3e} \
         with the load bracket at [{lo}, {hi}]"
    )]
    SingularityUnreached {
        bus: BusId,
        ratio: f64,
        lo: f64,
        hi: f64,
    },
    #[error("bus {0} has no active-power unknown")]
    NoActiveRow(BusId),
    #[error("empty Jacobian: no free variables")]
    EmptyJacobian,
    #[error("left and right null vectors are orthogonal (ωᵀν = {0:.3e})")]
    DegeneratePairing(f64),
    #[error("second-difference estimates disagree (relative gap {0:.3e}) at every step tried")]
    CurvatureUnstable(f64),
    #[error("degenerate fold: {0}")]
    DegenerateFold(String),
    #[error("normal-form radicand −αλ/β = {0} is negative")]
    NegativeRadicand(f64),
}

/// Loadability limit of a study bus.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldPoint {
    pub bus: BusId,
    /// Net active injection at the fold.
    pub p_max_pu: f64,
    /// Converged state at the fold.
    pub x_star: State,
    /// The same state as a free-variable vector.
    pub x_free: DVector<f64>,
    pub j0: DMatrix<f64>,
    pub sigma_min: f64,
    /// Scale of the singularity test: the largest singular value of `j0` or
    /// of the base-case Jacobian, whichever is larger.
    pub sigma_max: f64,
    /// Row of the study bus active-power equation.
    pub e_c_row: usize,
    /// Final bracket on the net injection.
    pub bracket: (f64, f64),
}

impl FoldPoint {
    /// `sigma_max / sigma_min`.
    pub fn condition(&self) -> f64 {
        self.sigma_max / self.sigma_min
    }

    pub fn loading(&self, lambda: f64) -> Loading {
        Loading {
            bus: self.bus,
            lambda,
            p_max: self.p_max_pu,
        }
    }
}

fn singular_range(j: &DMatrix<f64>) -> (f64, f64) {
    let sv = j.singular_values();
    let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sv.iter().copied().fold(0.0, f64::max);
    (lo, hi)
}

/// Locates the fold of `bus`: runs the margin search, bisects its bracket
/// down to a relative width of `1e-9`, and checks that the Jacobian at the
/// converged end is singular to [`SINGULARITY_THRESHOLD`].
pub fn fold_point(
    tn: &TypedNetwork,
    bus: BusId,
    options: &PmrOptions,
) -> Result<FoldPoint, FoldError> {
    let layout = Layout::new(tn);
    let e_c_row = layout
        .p_row_of(tn, bus)
        .ok_or(FoldError::NoActiveRow(bus))?;
    if layout.dim() == 0 {
        return Err(FoldError::EmptyJacobian);
    }
    let search = pmax_search(tn, bus, options)?;
    let Some(mut hi) = search.first_failure_pu else {
        return Err(FoldError::Saturated {
            bus,
            cap_pu: search.cap_pu,
        });
    };
    let ramp = Ramp::new(tn, bus, options)?;
    let solver = SolverOptions {
        tolerance: options.solver.tolerance.min(1e-10),
        max_iter: options.solver.max_iter.max(100),
        ..options.solver.clone()
    };
    let mut lo = search.p_max_pu;
    let mut best = search.last_converged_solution;
    // The singularity test is relative to the larger of the current and the
    // base-case spectral norms; on a one-unknown system the ratio of the
    // current singular values alone is always 1.
    let base = solve(tn, Some(&State::initial(tn)), &options.solver, None)?;
    let (_, base_sigma_max) = singular_range(&jacobian(tn, &base.state, None)?);

    // The normal form is only as good as the fold location, so the bracket
    // is always closed down to FOLD_BRACKET; the singularity test then
    // confirms that the converged end really sits at a fold.
    while hi - lo > FOLD_BRACKET * lo.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        let sol = solve(&ramp.apply(tn, mid), Some(&best.state), &solver, None)?;
        if sol.converged {
            lo = mid;
            best = sol;
        } else {
            hi = mid;
        }
    }

    let j0 = jacobian(tn, &best.state, None)?;
    let (sigma_min, current_max) = singular_range(&j0);
    let sigma_max = current_max.max(base_sigma_max);
    if sigma_min > SINGULARITY_THRESHOLD * sigma_max {
        return Err(FoldError::SingularityUnreached {
            bus,
            ratio: sigma_min / sigma_max,
            lo,
            hi,
        });
    }
    Ok(FoldPoint {
        bus,
        p_max_pu: ramp.net(lo),
        x_free: layout.gather(&best.state),
        x_star: best.state,
        j0,
        sigma_min,
        sigma_max,
        e_c_row,
        bracket: (ramp.net(lo), ramp.net(hi)),
    })
}

/// Everything the normal form needs at one fold.
#[derive(Clone, Debug, PartialEq)]
pub struct FoldAnalysis {
    pub fold: FoldPoint,
    pub pair: NullPair,
    /// `[νᵀ H_i ν]_i`.
    pub hessian_contraction: DVector<f64>,
    pub coefficients: FoldCoefficients,
}

/// Fold point, null vectors, curvature and normal-form coefficients for `bus`.
pub fn analyze_fold(
    tn: &TypedNetwork,
    bus: BusId,
    options: &PmrOptions,
) -> Result<FoldAnalysis, FoldError> {
    let fold = fold_point(tn, bus, options)?;
    let pair = null_vectors(&fold.j0, fold.e_c_row)?;
    let hessian_contraction = curvature(tn, &fold.x_star, &pair.nu, &fold.loading(0.0))?;
    let coefficients = fold_coefficients(&pair, &hessian_contraction, fold.p_max_pu, fold.e_c_row)?;
    Ok(FoldAnalysis {
        fold,
        pair,
        hessian_contraction,
        coefficients,
    })
}
