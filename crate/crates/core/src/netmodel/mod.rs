//! Network data model in a single per-unit system.
//!
//! A [`Network`] is validated on construction and immutable afterwards. Buses
//! keep the order they were declared in; anything that needs a canonical
//! ordering (the power-flow unknown vector, for instance) sorts by [`BusId`].

mod admittance;
mod case;
mod typing;

pub use admittance::{build_admittance, AdmittanceMatrix};
pub use case::{parse_case, read_case, to_case_string};
pub use typing::{assign_base_types, assign_node_types, BusRole, BusSpec, TypedNetwork};

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// External bus number as written in the case file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BusId(pub u32);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bus {
    pub id: BusId,
    pub name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    Line,
    Transformer,
}

/// Series element between two buses. Transformers are plain series
/// reactances: no taps, no phase shift, no magnetising branch.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub from: BusId,
    pub to: BusId,
    pub r_pu: f64,
    pub x_pu: f64,
    pub kind: BranchKind,
}

impl Branch {
    pub fn line(from: u32, to: u32, x_pu: f64) -> Self {
        Branch {
            from: BusId(from),
            to: BusId(to),
            r_pu: 0.0,
            x_pu,
            kind: BranchKind::Line,
        }
    }

    pub fn transformer(from: u32, to: u32, x_pu: f64) -> Self {
        Branch {
            from: BusId(from),
            to: BusId(to),
            r_pu: 0.0,
            x_pu,
            kind: BranchKind::Transformer,
        }
    }

    pub fn impedance_sq(&self) -> f64 {
        self.r_pu * self.r_pu + self.x_pu * self.x_pu
    }

    /// The bus at the other end, if `bus` is one of the endpoints.
    pub fn other_end(&self, bus: BusId) -> Option<BusId> {
        if self.from == bus {
            Some(self.to)
        } else if self.to == bus {
            Some(self.from)
        } else {
            None
        }
    }
}

/// Plant control type. The solver role each one maps to is decided in
/// [`assign_node_types`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlType {
    /// Grid-following inverter with P/Q control.
    GflPq,
    /// Grid-following inverter with AC voltage control.
    GridSupporting,
    /// Grid-forming inverter.
    Gfm,
    /// Stiff source; the angle reference.
    InfiniteBus,
}

impl ControlType {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControlType::GflPq => "gfl_pq",
            ControlType::GridSupporting => "grid_supporting",
            ControlType::Gfm => "gfm",
            ControlType::InfiniteBus => "infinite_bus",
        }
    }

    pub fn is_ibr(&self) -> bool {
        !matches!(self, ControlType::InfiniteBus)
    }
}

impl fmt::Display for ControlType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plant {
    pub bus: BusId,
    pub control_type: ControlType,
    pub p_nom_pu: f64,
    pub p_set_pu: f64,
    pub q_set_pu: f64,
    pub v_set_pu: f64,
}

impl Plant {
    pub fn infinite_bus(bus: u32, v_set_pu: f64) -> Self {
        Plant {
            bus: BusId(bus),
            control_type: ControlType::InfiniteBus,
            p_nom_pu: 0.0,
            p_set_pu: 0.0,
            q_set_pu: 0.0,
            v_set_pu,
        }
    }

    /// An inverter plant at unity voltage setpoint and zero reactive setpoint.
    pub fn ibr(bus: u32, control_type: ControlType, p_nom_pu: f64, p_set_pu: f64) -> Self {
        Plant {
            bus: BusId(bus),
            control_type,
            p_nom_pu,
            p_set_pu,
            q_set_pu: 0.0,
            v_set_pu: 1.0,
        }
    }
}

/// Constant-power demand. Positive `p_pu` consumes active power.
#[derive(Clone, Debug, PartialEq)]
pub struct Load {
    pub bus: BusId,
    pub p_pu: f64,
    pub q_pu: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("case syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("network has no buses")]
    NoBuses,
    #[error("duplicate bus id {0}")]
    DuplicateBus(BusId),
    #[error("missing slack: no infinite_bus plant")]
    MissingSlack,
    #[error("multiple slack buses: {0:?}")]
    MultipleSlack(Vec<BusId>),
    #[error("dangling endpoint: {element} references unknown bus {bus}")]
    DanglingEndpoint { element: String, bus: BusId },
    #[error("branch {0}-{1} connects a bus to itself")]
    SelfLoop(BusId, BusId),
    #[error("branch {0}-{1} has zero impedance")]
    ZeroImpedance(BusId, BusId),
    #[error("branch {0}-{1} has negative resistance")]
    NegativeResistance(BusId, BusId),
    #[error("more than one plant at bus {0}")]
    DuplicatePlant(BusId),
    #[error("plant at bus {0} needs a positive nominal power")]
    NonPositiveNominal(BusId),
    #[error("plant at bus {0} needs a positive voltage setpoint")]
    NonPositiveVoltage(BusId),
    #[error("load at bus {0} has negative active demand")]
    NegativeDemand(BusId),
    #[error("unknown bus {0}")]
    UnknownBus(BusId),
    #[error("no plant at bus {0}")]
    NoPlant(BusId),
    #[error("grid-forming plant at bus {0} needs a base power-flow solution to fix its angle")]
    MissingBaseSolution(BusId),
    #[error("base solution does not match the network ({0})")]
    BaseSolutionMismatch(String),
    #[error("cannot read case file {path}: {message}")]
    Io { path: String, message: String },
}

/// Buses, branches, plants and loads. Validated on construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    buses: Vec<Bus>,
    branches: Vec<Branch>,
    plants: Vec<Plant>,
    loads: Vec<Load>,
    index: HashMap<BusId, usize>,
}

impl Network {
    pub fn new(
        buses: Vec<Bus>,
        branches: Vec<Branch>,
        plants: Vec<Plant>,
        loads: Vec<Load>,
    ) -> Result<Self, NetworkError> {
        if buses.is_empty() {
            return Err(NetworkError::NoBuses);
        }
        let mut index = HashMap::with_capacity(buses.len());
        for (pos, bus) in buses.iter().enumerate() {
            if index.insert(bus.id, pos).is_some() {
                return Err(NetworkError::DuplicateBus(bus.id));
            }
        }
        let check = |element: String, bus: BusId| {
            if index.contains_key(&bus) {
                Ok(())
            } else {
                Err(NetworkError::DanglingEndpoint { element, bus })
            }
        };
        for br in &branches {
            let label = format!("branch {}-{}", br.from, br.to);
            check(label.clone(), br.from)?;
            check(label, br.to)?;
            if br.from == br.to {
                return Err(NetworkError::SelfLoop(br.from, br.to));
            }
            if br.r_pu < 0.0 {
                return Err(NetworkError::NegativeResistance(br.from, br.to));
            }
            if !(br.impedance_sq() > 0.0) {
                return Err(NetworkError::ZeroImpedance(br.from, br.to));
            }
        }
        let mut seen = HashMap::new();
        for plant in &plants {
            check(format!("plant at bus {}", plant.bus), plant.bus)?;
            if seen.insert(plant.bus, ()).is_some() {
                return Err(NetworkError::DuplicatePlant(plant.bus));
            }
            if plant.control_type.is_ibr() && !(plant.p_nom_pu > 0.0) {
                return Err(NetworkError::NonPositiveNominal(plant.bus));
            }
            if !(plant.v_set_pu > 0.0) {
                return Err(NetworkError::NonPositiveVoltage(plant.bus));
            }
        }
        let slacks: Vec<BusId> = plants
            .iter()
            .filter(|p| p.control_type == ControlType::InfiniteBus)
            .map(|p| p.bus)
            .collect();
        match slacks.len() {
            0 => return Err(NetworkError::MissingSlack),
            1 => {}
            _ => return Err(NetworkError::MultipleSlack(slacks)),
        }
        for load in &loads {
            check(format!("load at bus {}", load.bus), load.bus)?;
            if load.p_pu < 0.0 {
                return Err(NetworkError::NegativeDemand(load.bus));
            }
        }
        Ok(Network {
            buses,
            branches,
            plants,
            loads,
            index,
        })
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn plants(&self) -> &[Plant] {
        &self.plants
    }

    pub fn loads(&self) -> &[Load] {
        &self.loads
    }

    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    /// Position of `bus` in [`Network::buses`].
    pub fn position(&self, bus: BusId) -> Option<usize> {
        self.index.get(&bus).copied()
    }

    pub fn require(&self, bus: BusId) -> Result<usize, NetworkError> {
        self.position(bus).ok_or(NetworkError::UnknownBus(bus))
    }

    pub fn plant_at(&self, bus: BusId) -> Option<&Plant> {
        self.plants.iter().find(|p| p.bus == bus)
    }

    pub fn slack_plant(&self) -> &Plant {
        self.plants
            .iter()
            .find(|p| p.control_type == ControlType::InfiniteBus)
            .expect("validated network has a slack")
    }

    /// Total constant-power demand at a bus as (P, Q).
    pub fn load_at(&self, bus: BusId) -> (f64, f64) {
        self.loads
            .iter()
            .filter(|l| l.bus == bus)
            .fold((0.0, 0.0), |(p, q), l| (p + l.p_pu, q + l.q_pu))
    }

    /// Copy of this network with the plant at `bus` replaced.
    pub fn with_plant(&self, plant: Plant) -> Result<Network, NetworkError> {
        let bus = plant.bus;
        let mut plants = self.plants.clone();
        match plants.iter_mut().find(|p| p.bus == bus) {
            Some(slot) => *slot = plant,
            None => plants.push(plant),
        }
        Network::new(
            self.buses.clone(),
            self.branches.clone(),
            plants,
            self.loads.clone(),
        )
    }

    /// Copy with the plant at `bus` switched to `control_type`, keeping its
    /// operating point: a grid-following plant takes the reactive output and
    /// a voltage-controlling plant the terminal voltage found in `reference`.
    pub fn with_control_type(
        &self,
        bus: BusId,
        control_type: ControlType,
        reference: &crate::powerflow::PowerFlowSolution,
    ) -> Result<Network, NetworkError> {
        let pos = self.require(bus)?;
        let mut plant = self
            .plant_at(bus)
            .cloned()
            .ok_or(NetworkError::NoPlant(bus))?;
        let (_, q_load) = self.load_at(bus);
        let (v, q) = (
            reference.state.v.get(pos).copied(),
            reference.injections.get(pos).map(|s| s.1),
        );
        let (Some(v), Some(q)) = (v, q) else {
            return Err(NetworkError::BaseSolutionMismatch(format!(
                "no entry for bus {bus} in the reference solution"
            )));
        };
        plant.control_type = control_type;
        match control_type {
            ControlType::GflPq => plant.q_set_pu = q + q_load,
            _ => plant.v_set_pu = v,
        }
        self.with_plant(plant)
    }

    pub fn with_loads(&self, loads: Vec<Load>) -> Result<Network, NetworkError> {
        Network::new(
            self.buses.clone(),
            self.branches.clone(),
            self.plants.clone(),
            loads,
        )
    }
}
