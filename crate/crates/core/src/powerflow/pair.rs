use super::{solve, Classification, Layout, PowerFlowSolution, SolveError, SolverOptions, State};
use crate::fold::FoldAnalysis;
use crate::netmodel::TypedNetwork;

/// Stable and unstable power-flow solutions at one loading below a fold.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionPair {
    pub lambda: f64,
    pub sep: PowerFlowSolution,
    pub uep: PowerFlowSolution,
    /// Free-variable seed the unstable solve started from.
    pub uep_seed: Vec<f64>,
}

impl SolutionPair {
    /// Euclidean distance between the two solutions over the free variables.
    pub fn distance(&self, tn: &TypedNetwork) -> f64 {
        let layout = Layout::new(tn);
        (layout.gather(&self.sep.state) - layout.gather(&self.uep.state)).norm()
    }
}

fn seeded(fa: &FoldAnalysis, layout: &Layout, offset: f64) -> State {
    let x = &fa.fold.x_free + &fa.pair.nu * offset;
    let mut s = fa.fold.x_star.clone();
    layout.scatter(&x, &mut s);
    s
}

/// Finds the SEP/UEP pair of `tn` with the study bus of `fa` loaded at
/// `P_max (1 + λ)`, `λ ∈ [-1, 0]`.
///
/// The SEP is continued from the base solution; if that lands
/// anywhere but a stable equilibrium, it is retried from the normal-form
/// prediction `x* − sign(β) r ν` with `r = √(−αλ/β)`. The UEP starts from
/// `x* + sign(β) r ν`, widening the offset when Newton falls back onto the
/// SEP.
pub fn find_pair_solutions(
    tn: &TypedNetwork,
    lambda: f64,
    fa: &FoldAnalysis,
    solver: &SolverOptions,
) -> Result<SolutionPair, SolveError> {
    if !(-1.0..=0.0).contains(&lambda) {
        return Err(SolveError::LambdaOutOfRange(lambda));
    }
    let layout = Layout::new(tn);
    let loading = fa.fold.loading(lambda);
    let r = fa
        .coefficients
        .half_distance(lambda)
        .map_err(|_| SolveError::LambdaOutOfRange(lambda))?;
    let side = fa.coefficients.beta.signum();

    if lambda == 0.0 {
        let at_fold = solve(tn, Some(&fa.fold.x_star), solver, Some(&loading))?;
        return Ok(SolutionPair {
            lambda,
            uep: at_fold.clone(),
            sep: at_fold,
            uep_seed: fa.fold.x_free.iter().copied().collect(),
        });
    }

    let base = solve(tn, Some(&State::initial(tn)), solver, None)?;
    let mut sep = solve(tn, Some(&base.state), solver, Some(&loading))?;
    if !(sep.converged && sep.classification == Classification::Sep) {
        let seed = seeded(fa, &layout, -side * r);
        sep = solve(tn, Some(&seed), solver, Some(&loading))?;
    }
    if !sep.converged {
        return Err(SolveError::PairNotFound {
            which: "SEP",
            seed: layout.gather(&base.state).iter().copied().collect(),
        });
    }

    let x_sep = layout.gather(&sep.state);
    let mut first_seed = None;
    for widen in [1.0, 1.5, 2.0, 3.0] {
        let seed = seeded(fa, &layout, side * r * widen);
        let seed_free: Vec<f64> = layout.gather(&seed).iter().copied().collect();
        first_seed.get_or_insert_with(|| seed_free.clone());
        let uep = solve(tn, Some(&seed), solver, Some(&loading))?;
        if !uep.converged {
            continue;
        }
        let gap = (layout.gather(&uep.state) - &x_sep).norm();
        if gap > 1e-3 * r {
            return Ok(SolutionPair {
                lambda,
                sep,
                uep,
                uep_seed: seed_free,
            });
        }
    }
    Err(SolveError::PairNotFound {
        which: "UEP",
        seed: first_seed.unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fold::analyze_fold;
    use crate::netmodel::{assign_node_types, Branch, Bus, BusId, ControlType, Network, Plant};
    use crate::pmr::PmrOptions;
    use approx::assert_abs_diff_eq;

    fn reduced_spib(x: f64) -> TypedNetwork {
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
                Plant::ibr(2, ControlType::GridSupporting, 1.0, 1.0),
            ],
            vec![],
        )
        .unwrap();
        assign_node_types(&net, None).unwrap()
    }

    #[test]
    fn single_line_pair_is_symmetric_about_the_fold() {
        let tn = reduced_spib(0.935);
        let fa = analyze_fold(&tn, BusId(2), &PmrOptions::default()).unwrap();
        let pair = find_pair_solutions(&tn, -0.1, &fa, &SolverOptions::default()).unwrap();
        let delta = (0.9_f64).asin();
        assert_abs_diff_eq!(pair.sep.state.theta[1], delta, epsilon = 1e-6);
        assert_abs_diff_eq!(
            pair.uep.state.theta[1],
            std::f64::consts::PI - delta,
            epsilon = 1e-6
        );
        assert_eq!(pair.sep.classification, Classification::Sep);
        assert_eq!(pair.uep.classification, Classification::Uep);
        assert_abs_diff_eq!(
            pair.distance(&tn),
            std::f64::consts::PI - 2.0 * delta,
            epsilon = 1e-6
        );
    }

    #[test]
    fn lambda_outside_the_range() {
        let tn = reduced_spib(0.935);
        let fa = analyze_fold(&tn, BusId(2), &PmrOptions::default()).unwrap();
        for lam in [0.1, -1.5] {
            assert_eq!(
                find_pair_solutions(&tn, lam, &fa, &SolverOptions::default()).unwrap_err(),
                SolveError::LambdaOutOfRange(lam)
            );
        }
    }
}
