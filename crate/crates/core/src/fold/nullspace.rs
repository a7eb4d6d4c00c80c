use nalgebra::{DMatrix, DVector};

use super::FoldError;

/// Right (`ν`) and left (`ω`) null vectors of a near-singular Jacobian,
/// normalised so that `‖ν‖ = 1` and `ωᵀν = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct NullPair {
    pub nu: DVector<f64>,
    pub omega: DVector<f64>,
    /// Smallest singular value of the matrix the pair came from.
    pub sigma_min: f64,
}

/// Singular vectors of the smallest singular value of `j0`.
///
/// The sign is fixed so that `ν[sign_index] ≥ 0` (falling back to the first
/// nonzero entry when that one is exactly zero), which makes repeated runs
/// reproduce the same pair.
pub fn null_vectors(j0: &DMatrix<f64>, sign_index: usize) -> Result<NullPair, FoldError> {
    let n = j0.nrows();
    if n == 0 || j0.ncols() != n {
        return Err(FoldError::EmptyJacobian);
    }
    let svd = j0.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty");
    let sigma_min = svd.singular_values[k];

    let mut nu: DVector<f64> = v_t.row(k).transpose();
    let mut left: DVector<f64> = u.column(k).into_owned();
    nu /= nu.norm();

    let pivot = if nu[sign_index.min(n - 1)] != 0.0 {
        nu[sign_index.min(n - 1)]
    } else {
        nu.iter().copied().find(|v| *v != 0.0).unwrap_or(1.0)
    };
    if pivot < 0.0 {
        nu.neg_mut();
        left.neg_mut();
    }

    let pairing = left.dot(&nu);
    if pairing.abs() < 1e-10 {
        return Err(FoldError::DegeneratePairing(pairing));
    }
    Ok(NullPair {
        omega: left / pairing,
        nu,
        sigma_min,
    })
}
