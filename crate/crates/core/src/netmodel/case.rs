//! JSON case files.
//!
//! ```json
//! {
//!   "buses":    [{"id": 1, "name": "grid"}],
//!   "branches": [{"from": 1, "to": 2, "r_pu": 0.0, "x_pu": 0.25, "kind": "line"}],
//!   "plants":   [{"bus": 1, "control_type": "infinite_bus", "v_set_pu": 1.0}],
//!   "loads":    [{"bus": 2, "p_pu": 0.5, "q_pu": 0.0}]
//! }
//! ```
//!
//! Angles never appear in a case; they are solved for.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Branch, BranchKind, Bus, BusId, ControlType, Load, Network, NetworkError, Plant};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    buses: Vec<BusRecord>,
    #[serde(default)]
    branches: Vec<BranchRecord>,
    #[serde(default)]
    plants: Vec<PlantRecord>,
    #[serde(default)]
    loads: Vec<LoadRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusRecord {
    id: BusId,
    #[serde(default)]
    name: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchRecord {
    from: BusId,
    to: BusId,
    #[serde(default)]
    r_pu: f64,
    x_pu: f64,
    #[serde(default = "default_kind")]
    kind: BranchKind,
}

fn default_kind() -> BranchKind {
    BranchKind::Line
}

fn unity() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlantRecord {
    bus: BusId,
    control_type: ControlType,
    #[serde(default)]
    p_nom_pu: f64,
    #[serde(default)]
    p_set_pu: f64,
    #[serde(default)]
    q_set_pu: f64,
    #[serde(default = "unity")]
    v_set_pu: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadRecord {
    bus: BusId,
    p_pu: f64,
    #[serde(default)]
    q_pu: f64,
}

/// Parses and validates a case document.
pub fn parse_case(text: &str) -> Result<Network, NetworkError> {
    let file: CaseFile = serde_json::from_str(text).map_err(|e| NetworkError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Network::new(
        file.buses
            .into_iter()
            .map(|b| Bus {
                id: b.id,
                name: b.name,
            })
            .collect(),
        file.branches
            .into_iter()
            .map(|b| Branch {
                from: b.from,
                to: b.to,
                r_pu: b.r_pu,
                x_pu: b.x_pu,
                kind: b.kind,
            })
            .collect(),
        file.plants
            .into_iter()
            .map(|p| Plant {
                bus: p.bus,
                control_type: p.control_type,
                p_nom_pu: p.p_nom_pu,
                p_set_pu: p.p_set_pu,
                q_set_pu: p.q_set_pu,
                v_set_pu: p.v_set_pu,
            })
            .collect(),
        file.loads
            .into_iter()
            .map(|l| Load {
                bus: l.bus,
                p_pu: l.p_pu,
                q_pu: l.q_pu,
            })
            .collect(),
    )
}

pub fn read_case(path: impl AsRef<Path>) -> Result<Network, NetworkError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| NetworkError::Io {
        path: path.display().to_string(),
        message: if e.kind() == std::io::ErrorKind::NotFound {
            "case file not found".to_string()
        } else {
            e.to_string()
        },
    })?;
    parse_case(&text)
}

/// Writes a network back out in the case format.
pub fn to_case_string(network: &Network) -> String {
    let file = CaseFile {
        buses: network
            .buses()
            .iter()
            .map(|b| BusRecord {
                id: b.id,
                name: b.name.clone(),
            })
            .collect(),
        branches: network
            .branches()
            .iter()
            .map(|b| BranchRecord {
                from: b.from,
                to: b.to,
                r_pu: b.r_pu,
                x_pu: b.x_pu,
                kind: b.kind,
            })
            .collect(),
        plants: network
            .plants()
            .iter()
            .map(|p| PlantRecord {
                bus: p.bus,
                control_type: p.control_type,
                p_nom_pu: p.p_nom_pu,
                p_set_pu: p.p_set_pu,
                q_set_pu: p.q_set_pu,
                v_set_pu: p.v_set_pu,
            })
            .collect(),
        loads: network
            .loads()
            .iter()
            .map(|l| LoadRecord {
                bus: l.bus,
                p_pu: l.p_pu,
                q_pu: l.q_pu,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("case records always serialize")
}
