//! Short-circuit capacity and short-circuit ratio from the Thevenin
//! impedance at a bus.
//!
//! Inverter plants are open-circuited (no fault-current contribution) and the
//! infinite bus is an ideal source, so the Thevenin impedance is the
//! driving-point impedance of the passive network with the slack grounded:
//!
//! ```text
//! SCC = |V_s|² / |Z_th|        SCR = SCC / P_nom
//! ```

use std::collections::VecDeque;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{BranchKind, BusId, Network, NetworkError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScrError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("bus {0} is electrically isolated from the slack")]
    Isolated(BusId),
    #[error("bus {0} is the slack; its Thevenin impedance is zero")]
    AtSlack(BusId),
    #[error("nominal power must be positive, got {0}")]
    NonPositiveNominal(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheveninEquivalent {
    pub bus: BusId,
    /// Where the impedance was measured: the study bus, or the far side of
    /// its plant transformer when that transformer is excluded.
    pub measured_at: BusId,
    pub v_source_pu: f64,
    /// `|Z_th|` in p.u.
    pub z_th_pu: f64,
    pub excluded_elements: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScrResult {
    pub bus: BusId,
    pub scc_pu: f64,
    pub p_nom_pu: f64,
    pub scr: f64,
    pub thevenin: TheveninEquivalent,
}

/// Thevenin impedance magnitude seen from `bus`.
///
/// With `exclude_study_transformer`, the single transformer joining the
/// plant at `bus` to the grid is dropped and the impedance is measured at its
/// network side (the point of interconnection).
pub fn thevenin_reactance(
    network: &Network,
    bus: BusId,
    exclude_study_transformer: bool,
) -> Result<TheveninEquivalent, ScrError> {
    network.require(bus)?;
    let slack = network.slack_plant();
    if bus == slack.bus {
        return Err(ScrError::AtSlack(bus));
    }

    let mut excluded_elements: Vec<String> = network
        .plants()
        .iter()
        .filter(|p| p.control_type.is_ibr())
        .map(|p| format!("plant at bus {} ({})", p.bus, p.control_type))
        .collect();

    let mut measured_at = bus;
    let mut skip = None;
    if exclude_study_transformer && network.plant_at(bus).is_some() {
        let candidates: Vec<usize> = network
            .branches()
            .iter()
            .enumerate()
            .filter(|(_, b)| b.kind == BranchKind::Transformer && b.other_end(bus).is_some())
            .map(|(i, _)| i)
            .collect();
        if let [only] = candidates[..] {
            let br = &network.branches()[only];
            measured_at = br.other_end(bus).expect("incident branch");
            skip = Some(only);
            excluded_elements.push(format!("transformer {}-{}", br.from, br.to));
        }
    }
    if measured_at == slack.bus {
        return Err(ScrError::AtSlack(measured_at));
    }

    let branches: Vec<_> = network
        .branches()
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(_, b)| b)
        .collect();

    // buses reachable from the slack through the remaining branches
    let n = network.n_buses();
    let slack_pos = network.require(slack.bus)?;
    let mut reach = vec![false; n];
    reach[slack_pos] = true;
    let mut queue = VecDeque::from([slack_pos]);
    while let Some(p) = queue.pop_front() {
        let id = network.buses()[p].id;
        for br in &branches {
            if let Some(other) = br.other_end(id) {
                let q = network.require(other)?;
                if !reach[q] {
                    reach[q] = true;
                    queue.push_back(q);
                }
            }
        }
    }
    let target = network.require(measured_at)?;
    if !reach[target] {
        return Err(ScrError::Isolated(measured_at));
    }

    // reduced nodal matrix over the reachable non-slack buses
    let mut local = vec![usize::MAX; n];
    let mut m = 0;
    for p in 0..n {
        if reach[p] && p != slack_pos {
            local[p] = m;
            m += 1;
        }
    }
    let mut y = DMatrix::<Complex<f64>>::zeros(m, m);
    for br in &branches {
        let i = network.require(br.from)?;
        let j = network.require(br.to)?;
        if !reach[i] {
            continue;
        }
        let ys = Complex::new(1.0, 0.0) / Complex::new(br.r_pu, br.x_pu);
        let (li, lj) = (local[i], local[j]);
        if li != usize::MAX {
            y[(li, li)] += ys;
        }
        if lj != usize::MAX {
            y[(lj, lj)] += ys;
        }
        if li != usize::MAX && lj != usize::MAX {
            y[(li, lj)] -= ys;
            y[(lj, li)] -= ys;
        }
    }
    let mut rhs = DVector::<Complex<f64>>::zeros(m);
    rhs[local[target]] = Complex::new(1.0, 0.0);
    let z = y.lu().solve(&rhs).ok_or(ScrError::Isolated(measured_at))?;
    let z_th_pu = z[local[target]].norm();

    Ok(TheveninEquivalent {
        bus,
        measured_at,
        v_source_pu: slack.v_set_pu,
        z_th_pu,
        excluded_elements,
    })
}

/// Short-circuit ratio at `bus` for a plant of nominal power `p_nom_pu`.
pub fn scr(
    network: &Network,
    bus: BusId,
    p_nom_pu: f64,
    exclude_study_transformer: bool,
) -> Result<ScrResult, ScrError> {
    if !(p_nom_pu > 0.0) {
        return Err(ScrError::NonPositiveNominal(p_nom_pu));
    }
    let thevenin = thevenin_reactance(network, bus, exclude_study_transformer)?;
    let scc_pu = thevenin.v_source_pu * thevenin.v_source_pu / thevenin.z_th_pu;
    Ok(ScrResult {
        bus,
        scc_pu,
        p_nom_pu,
        scr: scc_pu / p_nom_pu,
        thevenin,
    })
}
