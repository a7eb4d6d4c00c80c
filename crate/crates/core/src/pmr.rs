//! Power margin ratio: the largest active injection at a bus for which the
//! margin power flow still converges, divided by the plant's nominal (or
//! actual) power.
//!
//! The search ramps the study injection upward in coarse steps, warm-starting
//! each solve from the previous converged state. The first failure is
//! bracketed and bisected down to `bisection_tol_pu`. Diverged and
//! iteration-limited solves both count as failures. A search that reaches
//! `cap_multiple × denominator` while still converging stops there and is
//! reported as saturated.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{
    assign_base_types, assign_node_types, BusId, BusRole, Network, NetworkError, TypedNetwork,
};
use crate::powerflow::{solve, PowerFlowSolution, SolveError, SolverOptions, State};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenominatorMode {
    /// Plant nominal power.
    Nominal,
    /// Plant actual output, net of the local load when netting is on.
    Actual,
}

impl fmt::Display for DenominatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DenominatorMode::Nominal => "nominal",
            DenominatorMode::Actual => "actual",
        })
    }
}

/// Reactive setpoint of a PQ study bus while its active power is ramped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QMode {
    HoldBase,
    ConstantPowerFactor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PmrOptions {
    pub coarse_step_pu: f64,
    pub bisection_tol_pu: f64,
    /// Saturation cap as a multiple of the denominator.
    pub cap_multiple: f64,
    pub denominator_mode: DenominatorMode,
    pub q_mode: QMode,
    /// Ramp the net (plant minus local load) injection instead of the plant
    /// output. `None` picks `true` in actual mode and `false` in nominal mode.
    pub net_local_load: Option<bool>,
    pub solver: SolverOptions,
}

impl Default for PmrOptions {
    fn default() -> Self {
        PmrOptions {
            coarse_step_pu: 0.05,
            bisection_tol_pu: 1e-3,
            cap_multiple: 20.0,
            denominator_mode: DenominatorMode::Nominal,
            q_mode: QMode::HoldBase,
            net_local_load: None,
            solver: SolverOptions::default(),
        }
    }
}

impl PmrOptions {
    pub fn nets_local_load(&self) -> bool {
        self.net_local_load
            .unwrap_or(self.denominator_mode == DenominatorMode::Actual)
    }

    fn validate(&self) -> Result<(), PmrError> {
        let bad = |m: &str| Err(PmrError::InvalidOptions(m.to_string()));
        if !(self.coarse_step_pu > 0.0) {
            return bad("coarse step must be positive");
        }
        if !(self.bisection_tol_pu > 0.0) {
            return bad("bisection tolerance must be positive");
        }
        if !(self.cap_multiple > 1.0) {
            return bad("cap multiple must exceed 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Study injection tried, in the same terms as `p_max_pu`.
    pub p_pu: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PmrResult {
    pub bus: BusId,
    pub study_role: BusRole,
    /// Largest converged study injection (plant output, or net injection
    /// when the local load is netted).
    pub p_max_pu: f64,
    /// Net bus injection at `p_max_pu`.
    pub p_max_net_pu: f64,
    /// Smallest injection that failed, when the search bracketed a limit.
    pub first_failure_pu: Option<f64>,
    pub denominator_pu: f64,
    pub denominator_mode: DenominatorMode,
    /// `p_max / denominator`; equals the cap multiple when saturated.
    pub pmr: f64,
    pub saturated: bool,
    pub cap_pu: f64,
    pub last_converged_solution: PowerFlowSolution,
    /// Every solve of the search, sorted by injection.
    pub search_trace: Vec<TracePoint>,
    pub iterations_total: usize,
}

impl PmrResult {
    /// `"1.2034"`, or `"> 20"` for a saturated search.
    pub fn display_pmr(&self) -> String {
        if self.saturated {
            format!("> {}", self.pmr)
        } else {
            format!("{:.4}", self.pmr)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PmrError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("invalid PMR options: {0}")]
    InvalidOptions(String),
    #[error("base case does not converge (mismatch {mismatch:.3e} after {iterations} iterations)")]
    BaseCaseDiverged { mismatch: f64, iterations: usize },
    #[error("bus {0} is the slack; it has no margin")]
    StudyBusIsSlack(BusId),
    #[error("bus {0} has no plant to study")]
    NoStudyInjection(BusId),
    #[error("PMR undefined at bus {bus}: denominator {value} ({detail})")]
    UndefinedDenominator {
        bus: BusId,
        value: f64,
        detail: String,
    },
}

/// Denominator of the ratio at `bus` under `options`.
pub fn denominator(network: &Network, bus: BusId, options: &PmrOptions) -> Result<f64, PmrError> {
    network.require(bus)?;
    let plant = network.plant_at(bus);
    let (p_load, _) = network.load_at(bus);
    let (value, detail) = match options.denominator_mode {
        DenominatorMode::Nominal => {
            let plant = plant.ok_or(PmrError::NoStudyInjection(bus))?;
            (plant.p_nom_pu, format!("nominal power {}", plant.p_nom_pu))
        }
        DenominatorMode::Actual => {
            if plant.is_none() && !(options.nets_local_load() && p_load > 0.0) {
                return Err(PmrError::NoStudyInjection(bus));
            }
            let p_set = plant.map_or(0.0, |p| p.p_set_pu);
            if options.nets_local_load() {
                (
                    (p_set - p_load.abs()).abs(),
                    format!("|{p_set} - |{p_load}||"),
                )
            } else {
                (p_set, format!("actual output {p_set}"))
            }
        }
    };
    if !(value > 0.0) {
        return Err(PmrError::UndefinedDenominator { bus, value, detail });
    }
    Ok(value)
}

/// Ramped quantity and its mapping to the bus spec.
pub(crate) struct Ramp {
    pos: usize,
    /// net injection = ramp value - offset
    offset: f64,
    base_net_p: f64,
    base_q: Option<f64>,
    q_mode: QMode,
}

impl Ramp {
    pub(crate) fn new(
        tn: &TypedNetwork,
        bus: BusId,
        options: &PmrOptions,
    ) -> Result<Self, PmrError> {
        let network = tn.network();
        let pos = network.require(bus)?;
        let spec = tn.spec(pos);
        let (p_load, _) = network.load_at(bus);
        let p_set = network.plant_at(bus).map_or(0.0, |p| p.p_set_pu);
        Ok(Ramp {
            pos,
            offset: if options.nets_local_load() {
                0.0
            } else {
                p_load
            },
            base_net_p: spec.scheduled_p().unwrap_or(p_set - p_load),
            base_q: spec.scheduled_q(),
            q_mode: options.q_mode,
        })
    }

    pub(crate) fn start(&self) -> f64 {
        self.base_net_p + self.offset
    }

    pub(crate) fn net(&self, value: f64) -> f64 {
        value - self.offset
    }

    pub(crate) fn apply(&self, tn: &TypedNetwork, value: f64) -> TypedNetwork {
        let net = self.net(value);
        let q = match (self.q_mode, self.base_q) {
            (QMode::ConstantPowerFactor, Some(q0)) if self.base_net_p != 0.0 => {
                Some(q0 * net / self.base_net_p)
            }
            (_, q0) => q0,
        };
        tn.with_injection(self.pos, net, q)
    }
}

/// Finds the loadability limit of `bus` in the typed network `tn`.
///
/// The study bus keeps its role: a PV bus is ramped at fixed voltage, a PQ
/// bus with its reactive setpoint handled per `q_mode`. A Vθ study bus has no
/// specifiable injection, so every ramp step converges and the search
/// saturates at the cap.
pub fn pmax_search(
    tn: &TypedNetwork,
    bus: BusId,
    options: &PmrOptions,
) -> Result<PmrResult, PmrError> {
    options.validate()?;
    let network = tn.network();
    let pos = network.require(bus)?;
    let spec = tn.spec(pos);
    if spec.role() == BusRole::Slack {
        return Err(PmrError::StudyBusIsSlack(bus));
    }
    let den = denominator(network, bus, options)?;
    let cap = options.cap_multiple * den;

    let ramp = Ramp::new(tn, bus, options)?;
    let start = ramp.start();

    let base = solve(tn, Some(&State::initial(tn)), &options.solver, None)?;
    if !base.converged {
        return Err(PmrError::BaseCaseDiverged {
            mismatch: base.final_mismatch,
            iterations: base.iterations,
        });
    }

    let mut trace = vec![TracePoint {
        p_pu: start,
        converged: true,
        iterations: base.iterations,
    }];
    let mut total = base.iterations;
    let mut lo = start;
    let mut best = base;
    let mut hi = None;
    let mut saturated = start >= cap;

    while !saturated {
        let next = (lo + options.coarse_step_pu).min(cap);
        let sol = solve(
            &ramp.apply(tn, next),
            Some(&best.state),
            &options.solver,
            None,
        )?;
        total += sol.iterations;
        trace.push(TracePoint {
            p_pu: next,
            converged: sol.converged,
            iterations: sol.iterations,
        });
        if !sol.converged {
            hi = Some(next);
            break;
        }
        lo = next;
        best = sol;
        saturated = lo >= cap;
    }

    if let Some(mut upper) = hi {
        while upper - lo > options.bisection_tol_pu {
            let mid = 0.5 * (lo + upper);
            let sol = solve(
                &ramp.apply(tn, mid),
                Some(&best.state),
                &options.solver,
                None,
            )?;
            total += sol.iterations;
            trace.push(TracePoint {
                p_pu: mid,
                converged: sol.converged,
                iterations: sol.iterations,
            });
            if sol.converged {
                lo = mid;
                best = sol;
            } else {
                upper = mid;
            }
        }
        hi = Some(upper);
    }

    trace.sort_by(|a, b| a.p_pu.total_cmp(&b.p_pu));
    let p_max = if saturated { cap } else { lo };
    Ok(PmrResult {
        bus,
        study_role: spec.role(),
        p_max_pu: p_max,
        p_max_net_pu: ramp.net(p_max),
        first_failure_pu: hi,
        denominator_pu: den,
        denominator_mode: options.denominator_mode,
        pmr: if saturated {
            options.cap_multiple
        } else {
            p_max / den
        },
        saturated,
        cap_pu: cap,
        last_converged_solution: best,
        search_trace: trace,
        iterations_total: total,
    })
}

/// Solves the steady-state base case (grid-forming plants as PV buses).
pub fn base_case(
    network: &Network,
    solver: &SolverOptions,
) -> Result<(TypedNetwork, PowerFlowSolution), PmrError> {
    let tn = assign_base_types(network)?;
    let sol = solve(&tn, None, solver, None)?;
    if !sol.converged {
        return Err(PmrError::BaseCaseDiverged {
            mismatch: sol.final_mismatch,
            iterations: sol.iterations,
        });
    }
    Ok((tn, sol))
}

/// Margin-study network: base power flow, then the node typing with
/// grid-forming angles frozen at their base values.
pub fn margin_network(
    network: &Network,
    solver: &SolverOptions,
) -> Result<(TypedNetwork, PowerFlowSolution), PmrError> {
    let (_, base) = base_case(network, solver)?;
    Ok((assign_node_types(network, Some(&base))?, base))
}

/// Power margin ratio of the plant at `bus`.
pub fn pmr(network: &Network, bus: BusId, options: &PmrOptions) -> Result<PmrResult, PmrError> {
    options.validate()?;
    network.require(bus)?;
    if network
        .plant_at(bus)
        .is_some_and(|p| !p.control_type.is_ibr())
    {
        return Err(PmrError::StudyBusIsSlack(bus));
    }
    denominator(network, bus, options)?;
    let (tn, _) = margin_network(network, &options.solver)?;
    pmax_search(&tn, bus, options)
}
