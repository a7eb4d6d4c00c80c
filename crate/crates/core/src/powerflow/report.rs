use serde::{Deserialize, Serialize};

use super::{Classification, PowerFlowSolution};
use crate::netmodel::{BusId, TypedNetwork};

/// One row of a solved-case table: magnitude, angle in degrees and net
/// injection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BusRow {
    pub bus: BusId,
    pub role: String,
    pub v_pu: f64,
    pub delta_deg: f64,
    pub p_pu: f64,
    pub q_pu: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub buses: Vec<BusRow>,
    pub iterations: usize,
    pub final_mismatch: f64,
    pub converged: bool,
    pub classification: Classification,
    /// PV reactive limits are never enforced; kept explicit in every report.
    pub q_limits_enforced: bool,
}

impl SolutionReport {
    /// Rows come out in ascending bus id.
    pub fn new(tn: &TypedNetwork, sol: &PowerFlowSolution) -> Self {
        let mut buses: Vec<BusRow> = tn
            .network()
            .buses()
            .iter()
            .enumerate()
            .map(|(p, b)| BusRow {
                bus: b.id,
                role: tn.spec(p).role().to_string(),
                v_pu: sol.state.v[p],
                delta_deg: sol.state.theta[p].to_degrees(),
                p_pu: sol.injections[p].0,
                q_pu: sol.injections[p].1,
            })
            .collect();
        buses.sort_by_key(|r| r.bus);
        SolutionReport {
            buses,
            iterations: sol.iterations,
            final_mismatch: sol.final_mismatch,
            converged: sol.converged,
            classification: sol.classification,
            q_limits_enforced: false,
        }
    }

    pub fn row(&self, bus: u32) -> Option<&BusRow> {
        self.buses.iter().find(|r| r.bus == BusId(bus))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bus,role,v_pu,delta_deg,p_pu,q_pu\n");
        for r in &self.buses {
            out.push_str(&format!(
                "{},{},{:.4},{:.4},{:.4},{:.4}\n",
                r.bus, r.role, r.v_pu, r.delta_deg, r.p_pu, r.q_pu
            ));
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>5} {:>7} {:>10} {:>10} {:>10} {:>10}\n",
            "bus", "role", "V (pu)", "delta (°)", "P (pu)", "Q (pu)"
        );
        for r in &self.buses {
            out.push_str(&format!(
                "{:>5} {:>7} {:>10.4} {:>10.2} {:>10.4} {:>10.4}\n",
                r.bus, r.role, r.v_pu, r.delta_deg, r.p_pu, r.q_pu
            ));
        }
        out.push_str(&format!(
            "converged: {}  iterations: {}  mismatch: {:.3e}  equilibrium: {:?}  (no Q limits)\n",
            self.converged, self.iterations, self.final_mismatch, self.classification
        ));
        out
    }
}
