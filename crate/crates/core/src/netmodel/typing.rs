use std::fmt;
use std::sync::Arc;

use super::{build_admittance, AdmittanceMatrix, BusId, ControlType, Network, NetworkError};
use crate::powerflow::{PowerFlowSolution, State};

/// Solver role of a bus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BusRole {
    Slack,
    /// Fixed magnitude and angle, like the slack but not the angle reference.
    Vtheta,
    Pv,
    Pq,
}

impl fmt::Display for BusRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BusRole::Slack => "Slack",
            BusRole::Vtheta => "Vtheta",
            BusRole::Pv => "PV",
            BusRole::Pq => "PQ",
        })
    }
}

/// A bus role together with its setpoints. Injections are net of local load.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BusSpec {
    Slack { v: f64, theta: f64 },
    Vtheta { v: f64, theta: f64 },
    Pv { p: f64, v: f64 },
    Pq { p: f64, q: f64 },
}

impl BusSpec {
    pub fn role(&self) -> BusRole {
        match self {
            BusSpec::Slack { .. } => BusRole::Slack,
            BusSpec::Vtheta { .. } => BusRole::Vtheta,
            BusSpec::Pv { .. } => BusRole::Pv,
            BusSpec::Pq { .. } => BusRole::Pq,
        }
    }

    pub fn scheduled_p(&self) -> Option<f64> {
        match *self {
            BusSpec::Pv { p, .. } | BusSpec::Pq { p, .. } => Some(p),
            _ => None,
        }
    }

    pub fn scheduled_q(&self) -> Option<f64> {
        match *self {
            BusSpec::Pq { q, .. } => Some(q),
            _ => None,
        }
    }

    pub fn fixed_angle(&self) -> Option<f64> {
        match *self {
            BusSpec::Slack { theta, .. } | BusSpec::Vtheta { theta, .. } => Some(theta),
            _ => None,
        }
    }

    pub fn fixed_voltage(&self) -> Option<f64> {
        match *self {
            BusSpec::Slack { v, .. } | BusSpec::Vtheta { v, .. } | BusSpec::Pv { v, .. } => Some(v),
            BusSpec::Pq { .. } => None,
        }
    }
}

/// A network with every bus assigned a solver role and its setpoints.
///
/// Exactly one bus is `Slack`; the roles partition the bus set because
/// `specs` holds one entry per bus position.
#[derive(Clone, Debug)]
pub struct TypedNetwork {
    network: Arc<Network>,
    admittance: Arc<AdmittanceMatrix>,
    specs: Vec<BusSpec>,
    base_state: Option<Arc<State>>,
}

impl TypedNetwork {
    /// Builds a typed network from explicit per-position specs.
    pub fn from_specs(network: Network, specs: Vec<BusSpec>) -> Result<Self, NetworkError> {
        if specs.len() != network.n_buses() {
            return Err(NetworkError::BaseSolutionMismatch(format!(
                "{} specs for {} buses",
                specs.len(),
                network.n_buses()
            )));
        }
        let slacks = specs.iter().filter(|s| s.role() == BusRole::Slack).count();
        if slacks == 0 {
            return Err(NetworkError::MissingSlack);
        }
        if slacks > 1 {
            let ids = specs
                .iter()
                .zip(network.buses())
                .filter(|(s, _)| s.role() == BusRole::Slack)
                .map(|(_, b)| b.id)
                .collect();
            return Err(NetworkError::MultipleSlack(ids));
        }
        let admittance = Arc::new(build_admittance(&network));
        Ok(TypedNetwork {
            network: Arc::new(network),
            admittance,
            specs,
            base_state: None,
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn admittance(&self) -> &AdmittanceMatrix {
        &self.admittance
    }

    pub fn specs(&self) -> &[BusSpec] {
        &self.specs
    }

    pub fn spec(&self, pos: usize) -> BusSpec {
        self.specs[pos]
    }

    pub fn role_of(&self, bus: BusId) -> Option<BusRole> {
        self.network.position(bus).map(|p| self.specs[p].role())
    }

    pub fn slack_position(&self) -> usize {
        self.specs
            .iter()
            .position(|s| s.role() == BusRole::Slack)
            .expect("typed network has a slack")
    }

    pub fn count(&self, role: BusRole) -> usize {
        self.specs.iter().filter(|s| s.role() == role).count()
    }

    /// Copy with the spec at `pos` replaced. The network and admittance
    /// matrix are shared.
    pub fn with_spec(&self, pos: usize, spec: BusSpec) -> Self {
        let mut specs = self.specs.clone();
        specs[pos] = spec;
        TypedNetwork {
            specs,
            ..self.clone()
        }
    }

    /// Solved state the typing was derived from, when there is one. Margin
    /// studies start from it rather than from a flat profile: with buses
    /// frozen at large angles, a flat start can fall into the degenerate
    /// solution where a PQ bus voltage collapses to zero.
    pub fn base_state(&self) -> Option<&State> {
        self.base_state.as_deref()
    }

    /// Copy with the scheduled active (and, for PQ buses, reactive) injection
    /// at `pos` replaced. Buses without a scheduled P are returned unchanged.
    pub fn with_injection(&self, pos: usize, p: f64, q: Option<f64>) -> Self {
        let spec = match self.specs[pos] {
            BusSpec::Pv { v, .. } => BusSpec::Pv { p, v },
            BusSpec::Pq { q: q0, .. } => BusSpec::Pq {
                p,
                q: q.unwrap_or(q0),
            },
            other => other,
        };
        self.with_spec(pos, spec)
    }
}

fn spec_for(
    network: &Network,
    pos: usize,
    gfm_angle: impl Fn(BusId) -> Result<f64, NetworkError>,
    gfm_as_pv: bool,
) -> Result<BusSpec, NetworkError> {
    let bus = network.buses()[pos].id;
    let (p_load, q_load) = network.load_at(bus);
    let Some(plant) = network.plant_at(bus) else {
        return Ok(BusSpec::Pq {
            p: -p_load,
            q: -q_load,
        });
    };
    let p = plant.p_set_pu - p_load;
    Ok(match plant.control_type {
        ControlType::InfiniteBus => BusSpec::Slack {
            v: plant.v_set_pu,
            theta: 0.0,
        },
        ControlType::GridSupporting => BusSpec::Pv {
            p,
            v: plant.v_set_pu,
        },
        ControlType::GflPq => BusSpec::Pq {
            p,
            q: plant.q_set_pu - q_load,
        },
        ControlType::Gfm if gfm_as_pv => BusSpec::Pv {
            p,
            v: plant.v_set_pu,
        },
        ControlType::Gfm => BusSpec::Vtheta {
            v: plant.v_set_pu,
            theta: gfm_angle(bus)?,
        },
    })
}

/// Typing for the steady-state power flow: grid-forming plants behave as PV
/// buses.
pub fn assign_base_types(network: &Network) -> Result<TypedNetwork, NetworkError> {
    let specs = (0..network.n_buses())
        .map(|pos| spec_for(network, pos, |_| Ok(0.0), true))
        .collect::<Result<Vec<_>, _>>()?;
    TypedNetwork::from_specs(network.clone(), specs)
}

/// Typing for margin studies: GFL → PQ, grid-supporting → PV, infinite bus →
/// slack, and GFM → Vθ frozen at the angle it had in `base`. Load-only buses
/// are PQ with the negated demand.
pub fn assign_node_types(
    network: &Network,
    base: Option<&PowerFlowSolution>,
) -> Result<TypedNetwork, NetworkError> {
    if let Some(base) = base {
        if base.state.theta.len() != network.n_buses() {
            return Err(NetworkError::BaseSolutionMismatch(format!(
                "solution has {} buses, network has {}",
                base.state.theta.len(),
                network.n_buses()
            )));
        }
    }
    let angle = |bus: BusId| -> Result<f64, NetworkError> {
        let base = base.ok_or(NetworkError::MissingBaseSolution(bus))?;
        Ok(base.state.theta[network.require(bus)?])
    };
    let specs = (0..network.n_buses())
        .map(|pos| spec_for(network, pos, angle, false))
        .collect::<Result<Vec<_>, _>>()?;
    let mut tn = TypedNetwork::from_specs(network.clone(), specs)?;
    tn.base_state = base.map(|b| Arc::new(b.state.clone()));
    Ok(tn)
}
