use nalgebra::{DMatrix, DVector};

use super::{Layout, Loading, SolveError, State};
use crate::netmodel::{AdmittanceMatrix, TypedNetwork};

/// Power-flow residual in [`Layout`] order: active rows first, then reactive.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub values: DVector<f64>,
    pub n_active: usize,
}

impl Residual {
    pub fn f_p(&self) -> &[f64] {
        &self.values.as_slice()[..self.n_active]
    }

    pub fn f_q(&self) -> &[f64] {
        &self.values.as_slice()[self.n_active..]
    }

    pub fn inf_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Net injections `(P_i, Q_i)` at every bus from the polar power-flow
/// equations.
pub fn injections(y: &AdmittanceMatrix, state: &State) -> Vec<(f64, f64)> {
    let n = y.dim();
    (0..n)
        .map(|i| {
            let (mut p, mut q) = (0.0, 0.0);
            for j in 0..n {
                let (g, b) = (y.g[(i, j)], y.b[(i, j)]);
                if g == 0.0 && b == 0.0 {
                    continue;
                }
                let (s, c) = (state.theta[i] - state.theta[j]).sin_cos();
                p += state.v[j] * (g * c + b * s);
                q += state.v[j] * (g * s - b * c);
            }
            (state.v[i] * p, state.v[i] * q)
        })
        .collect()
}

fn check_dims(tn: &TypedNetwork, state: &State) -> Result<(), SolveError> {
    let n = tn.specs().len();
    if state.theta.len() != n || state.v.len() != n {
        return Err(SolveError::DimensionMismatch {
            expected: n,
            got: state.theta.len(),
        });
    }
    Ok(())
}

/// Scheduled active injection per bus position, with the loading override
/// applied.
pub(crate) fn scheduled(
    tn: &TypedNetwork,
    layout: &Layout,
    loading: Option<&Loading>,
) -> Result<(Vec<f64>, Vec<f64>), SolveError> {
    let mut p: Vec<f64> = layout
        .angle_buses
        .iter()
        .map(|&b| tn.spec(b).scheduled_p().unwrap_or(0.0))
        .collect();
    let q = layout
        .voltage_buses
        .iter()
        .map(|&b| tn.spec(b).scheduled_q().unwrap_or(0.0))
        .collect();
    if let Some(l) = loading {
        let row = layout
            .p_row_of(tn, l.bus)
            .ok_or_else(|| match tn.network().position(l.bus) {
                None => SolveError::UnknownBus(l.bus),
                Some(_) => SolveError::NoActiveRow(l.bus),
            })?;
        p[row] = l.injection();
    }
    Ok((p, q))
}

/// `f_P,i = P_i⁰ − P_i(θ, V)` for PV and PQ buses and `f_Q,i = Q_i⁰ − Q_i`
/// for PQ buses. With `loading`, the study bus uses `P_max(1 + λ)` as its
/// scheduled value.
pub fn mismatch(
    tn: &TypedNetwork,
    state: &State,
    loading: Option<&Loading>,
) -> Result<Residual, SolveError> {
    check_dims(tn, state)?;
    let layout = Layout::new(tn);
    let (p0, q0) = scheduled(tn, &layout, loading)?;
    Ok(residual_at(tn.admittance(), &layout, &p0, &q0, state))
}

pub(crate) fn residual_at(
    y: &AdmittanceMatrix,
    layout: &Layout,
    p0: &[f64],
    q0: &[f64],
    state: &State,
) -> Residual {
    let s = injections(y, state);
    let values = DVector::from_iterator(
        layout.dim(),
        layout
            .angle_buses
            .iter()
            .zip(p0)
            .map(|(&b, p)| p - s[b].0)
            .chain(
                layout
                    .voltage_buses
                    .iter()
                    .zip(q0)
                    .map(|(&b, q)| q - s[b].1),
            ),
    );
    Residual {
        values,
        n_active: layout.angle_buses.len(),
    }
}

/// Analytic `∂f/∂x` in [`Layout`] order. The loading parameter does not
/// enter the derivative; it is accepted for symmetry with [`mismatch`].
pub fn jacobian(
    tn: &TypedNetwork,
    state: &State,
    loading: Option<&Loading>,
) -> Result<DMatrix<f64>, SolveError> {
    check_dims(tn, state)?;
    let layout = Layout::new(tn);
    scheduled(tn, &layout, loading)?;
    Ok(jacobian_at(tn.admittance(), &layout, state))
}

pub(crate) fn jacobian_at(y: &AdmittanceMatrix, layout: &Layout, state: &State) -> DMatrix<f64> {
    let s = injections(y, state);
    let (th, v) = (&state.theta, &state.v);
    let na = layout.angle_buses.len();
    let n = layout.dim();
    let mut jac = DMatrix::zeros(n, n);

    // dP_i/dθ_k, dP_i/dV_k, dQ_i/dθ_k, dQ_i/dV_k of the injections
    let dp_dth = |i: usize, k: usize| {
        if i == k {
            -s[i].1 - y.b[(i, i)] * v[i] * v[i]
        } else {
            let (sn, cs) = (th[i] - th[k]).sin_cos();
            v[i] * v[k] * (y.g[(i, k)] * sn - y.b[(i, k)] * cs)
        }
    };
    let dp_dv = |i: usize, k: usize| {
        if i == k {
            s[i].0 / v[i] + y.g[(i, i)] * v[i]
        } else {
            let (sn, cs) = (th[i] - th[k]).sin_cos();
            v[i] * (y.g[(i, k)] * cs + y.b[(i, k)] * sn)
        }
    };
    let dq_dth = |i: usize, k: usize| {
        if i == k {
            s[i].0 - y.g[(i, i)] * v[i] * v[i]
        } else {
            let (sn, cs) = (th[i] - th[k]).sin_cos();
            -v[i] * v[k] * (y.g[(i, k)] * cs + y.b[(i, k)] * sn)
        }
    };
    let dq_dv = |i: usize, k: usize| {
        if i == k {
            s[i].1 / v[i] - y.b[(i, i)] * v[i]
        } else {
            let (sn, cs) = (th[i] - th[k]).sin_cos();
            v[i] * (y.g[(i, k)] * sn - y.b[(i, k)] * cs)
        }
    };

    for (r, &i) in layout.angle_buses.iter().enumerate() {
        for (c, &k) in layout.angle_buses.iter().enumerate() {
            jac[(r, c)] = -dp_dth(i, k);
        }
        for (c, &k) in layout.voltage_buses.iter().enumerate() {
            jac[(r, na + c)] = -dp_dv(i, k);
        }
    }
    for (r, &i) in layout.voltage_buses.iter().enumerate() {
        for (c, &k) in layout.angle_buses.iter().enumerate() {
            jac[(na + r, c)] = -dq_dth(i, k);
        }
        for (c, &k) in layout.voltage_buses.iter().enumerate() {
            jac[(na + r, na + c)] = -dq_dv(i, k);
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{assign_node_types, Branch, Bus, BusId, ControlType, Network, Plant};
    use approx::assert_relative_eq;

    fn two_bus(x: f64, p: f64) -> TypedNetwork {
        let net = Network::new(
            vec![
                Bus {
                    id: BusId(1),
                    name: "grid".into(),
                },
                Bus {
                    id: BusId(2),
                    name: "ibr".into(),
                },
            ],
            vec![Branch::line(1, 2, x)],
            vec![
                Plant::infinite_bus(1, 1.0),
                Plant::ibr(2, ControlType::GridSupporting, 1.0, p),
            ],
            vec![],
        )
        .unwrap();
        assign_node_types(&net, None).unwrap()
    }

    #[test]
    fn flat_state_without_schedule_is_balanced() {
        let tn = two_bus(0.935, 0.0);
        let r = mismatch(&tn, &State::flat_start(&tn), None).unwrap();
        assert_eq!(r.inf_norm(), 0.0);
    }

    #[test]
    fn arcsin_state_balances_unit_transfer() {
        let tn = two_bus(0.935, 1.0);
        let mut s = State::flat_start(&tn);
        s.theta[1] = 0.935_f64.asin();
        let r = mismatch(&tn, &s, None).unwrap();
        assert!(r.inf_norm() <= 1e-12);
    }

    #[test]
    fn single_unknown_derivative() {
        let tn = two_bus(0.935, 1.0);
        let mut s = State::flat_start(&tn);
        let j = jacobian(&tn, &s, None).unwrap();
        assert_eq!(j.shape(), (1, 1));
        assert_relative_eq!(j[(0, 0)], -1.0 / 0.935, max_relative = 1e-12);
        assert_relative_eq!(j[(0, 0)], -1.0695, epsilon = 1e-4);
        s.theta[1] = std::f64::consts::FRAC_PI_2;
        let j = jacobian(&tn, &s, None).unwrap();
        assert!(j[(0, 0)].abs() < 1e-15);
    }

    #[test]
    fn loading_overrides_study_bus() {
        let tn = two_bus(0.5, 1.0);
        let s = State::flat_start(&tn);
        let l = Loading {
            bus: BusId(2),
            lambda: -0.5,
            p_max: 1.5,
        };
        let r = mismatch(&tn, &s, Some(&l)).unwrap();
        assert_relative_eq!(r.f_p()[0], 0.75, epsilon = 1e-15);
        let bad = Loading { bus: BusId(1), ..l };
        assert_eq!(
            mismatch(&tn, &s, Some(&bad)).unwrap_err(),
            SolveError::NoActiveRow(BusId(1))
        );
    }

    #[test]
    fn wrong_state_size() {
        let tn = two_bus(0.5, 1.0);
        assert!(matches!(
            mismatch(&tn, &State::flat(3), None),
            Err(SolveError::DimensionMismatch {
                expected: 2,
                got: 3
            })
        ));
    }
}
