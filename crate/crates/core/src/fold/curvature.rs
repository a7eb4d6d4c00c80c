use nalgebra::DVector;

use super::FoldError;
use crate::netmodel::TypedNetwork;
use crate::powerflow::{mismatch, Layout, Loading, State};

const STEP: f64 = 1e-4;
const FALLBACK_STEP: f64 = 1e-3;
const AGREEMENT: f64 = 1e-3;

fn central(
    f: &impl Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    dir: &DVector<f64>,
    h: f64,
) -> DVector<f64> {
    let fp = f(&(x + dir * h));
    let fm = f(&(x - dir * h));
    (fp - f(x) * 2.0 + fm) / (h * h)
}

fn gap(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let scale = a.amax().max(1.0);
    (a - b).amax() / scale
}

/// Second derivative of every component of `f` along `dir` at `x`, from the
/// central second difference with step `1e-4`. The estimate is accepted when
/// it agrees with the half-step estimate to `1e-3` (relative to the larger of
/// its infinity norm and one); otherwise the pair is retried once at `1e-3`.
pub fn second_directional_derivative(
    f: impl Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    dir: &DVector<f64>,
) -> Result<DVector<f64>, FoldError> {
    let mut worst = 0.0_f64;
    for h in [STEP, FALLBACK_STEP] {
        let full = central(&f, x, dir, h);
        let half = central(&f, x, dir, 0.5 * h);
        let g = gap(&full, &half);
        if g <= AGREEMENT {
            return Ok(full);
        }
        worst = worst.max(g);
    }
    Err(FoldError::CurvatureUnstable(worst))
}

/// `[νᵀ H_i ν]_i` for the power-flow residual of `tn` at `x_star`, with the
/// study bus loaded per `loading`.
pub fn curvature(
    tn: &TypedNetwork,
    x_star: &State,
    nu: &DVector<f64>,
    loading: &Loading,
) -> Result<DVector<f64>, FoldError> {
    let layout = Layout::new(tn);
    // surface dimension/loading errors before the stencil swallows them
    mismatch(tn, x_star, Some(loading))?;
    let x0 = layout.gather(x_star);
    let f = |x: &DVector<f64>| {
        let mut s = x_star.clone();
        layout.scatter(x, &mut s);
        mismatch(tn, &s, Some(loading))
            .expect("checked above")
            .values
    };
    second_directional_derivative(f, &x0, nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pure_quadratic() {
        let d = second_directional_derivative(
            |x| DVector::from_element(1, x[0] * x[0]),
            &DVector::from_element(1, 0.7),
            &DVector::from_element(1, 1.0),
        )
        .unwrap();
        assert_abs_diff_eq!(d[0], 2.0, epsilon = 1e-6);
    }

    #[test]
    fn linear_component_vanishes() {
        let dir = DVector::from_vec(vec![0.6, 0.8]);
        let d = second_directional_derivative(
            |x| DVector::from_vec(vec![3.0 * x[0] - 2.0 * x[1], x[0] * x[1]]),
            &DVector::from_vec(vec![1.0, -2.0]),
            &dir,
        )
        .unwrap();
        assert_abs_diff_eq!(d[0], 0.0, epsilon = 1e-6);
        // d²/dt² of (x0 + 0.6t)(x1 + 0.8t) = 2·0.48
        assert_abs_diff_eq!(d[1], 0.96, epsilon = 1e-6);
    }

    #[test]
    fn sine_at_peak() {
        // −P sin θ at θ = π/2 has second derivative +P
        let p = 1.0 / 0.935;
        let d = second_directional_derivative(
            |x| DVector::from_element(1, p - p * x[0].sin()),
            &DVector::from_element(1, std::f64::consts::FRAC_PI_2),
            &DVector::from_element(1, 1.0),
        )
        .unwrap();
        assert_abs_diff_eq!(d[0], p, epsilon = 1e-6);
    }

    #[test]
    fn wild_function_is_rejected() {
        let r = second_directional_derivative(
            |x| DVector::from_element(1, (1e5 * x[0]).sin()),
            &DVector::from_element(1, 0.3),
            &DVector::from_element(1, 1.0),
        );
        assert!(matches!(r, Err(FoldError::CurvatureUnstable(_))));
    }
}
