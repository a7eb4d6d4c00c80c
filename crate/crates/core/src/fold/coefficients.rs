use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{FoldError, NullPair};

/// Normal-form coefficients of `ż = αλ + βz²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldCoefficients {
    pub alpha: f64,
    pub beta: f64,
    pub e_c_row: usize,
}

impl FoldCoefficients {
    /// `√(−αλ/β)`, the normal-form offset of each equilibrium from the fold.
    pub fn half_distance(&self, lambda: f64) -> Result<f64, FoldError> {
        let radicand = -self.alpha * lambda / self.beta;
        if radicand < 0.0 {
            return Err(FoldError::NegativeRadicand(radicand));
        }
        Ok(if radicand == 0.0 {
            0.0
        } else {
            radicand.sqrt()
        })
    }
}

/// `α = P_max ω[e_c]` and `β = ½ ωᵀ h` where `h = [νᵀ H_i ν]_i`.
///
/// Fails when `β` vanishes or when `α/β < 0`, either of which leaves the
/// distance estimate undefined for `λ ≤ 0`.
pub fn fold_coefficients(
    pair: &NullPair,
    hess_contraction: &DVector<f64>,
    p_max: f64,
    e_c_row: usize,
) -> Result<FoldCoefficients, FoldError> {
    let n = pair.omega.len();
    if hess_contraction.len() != n || e_c_row >= n {
        return Err(FoldError::DegenerateFold(format!(
            "dimension mismatch: ω has {n} entries, contraction {}, row {e_c_row}",
            hess_contraction.len()
        )));
    }
    let alpha = p_max * pair.omega[e_c_row];
    let beta = 0.5 * pair.omega.dot(hess_contraction);
    let scale = pair.omega.amax() * hess_contraction.amax();
    if beta == 0.0 || beta.abs() <= 1e-12 * scale {
        return Err(FoldError::DegenerateFold(format!(
            "β = {beta:.3e} vanishes (ω = {:?}, νᵀHν = {:?})",
            pair.omega.as_slice(),
            hess_contraction.as_slice()
        )));
    }
    if alpha == 0.0 || alpha / beta < 0.0 {
        return Err(FoldError::DegenerateFold(format!(
            "α = {alpha:.6e} and β = {beta:.6e} give no real equilibria for λ < 0"
        )));
    }
    Ok(FoldCoefficients {
        alpha,
        beta,
        e_c_row,
    })
}

/// `d = 2√(−αλ/β)`.
pub fn estimated_distance(coeffs: &FoldCoefficients, lambda: f64) -> Result<f64, FoldError> {
    Ok(2.0 * coeffs.half_distance(lambda)?)
}
