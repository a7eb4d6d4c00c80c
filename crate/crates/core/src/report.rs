//! Side-by-side SCR / PMR rows for one or more plant buses.

use serde::{Deserialize, Serialize};

use crate::netmodel::{BusId, ControlType};
use crate::pmr::{DenominatorMode, PmrOptions, PmrResult, QMode, TracePoint};
use crate::scr::ScrResult;

/// Settings a report was produced with, so a row can be traced back to its
/// inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub case: String,
    pub exclude_study_transformer: bool,
    pub denominator_mode: DenominatorMode,
    pub q_mode: QMode,
    pub net_local_load: bool,
    pub coarse_step_pu: f64,
    pub bisection_tol_pu: f64,
    pub cap_multiple: f64,
    pub tolerance: f64,
    pub max_iter: usize,
    /// PV reactive limits are not modelled.
    pub q_limits_enforced: bool,
}

impl Provenance {
    pub fn new(
        case: impl Into<String>,
        exclude_study_transformer: bool,
        options: &PmrOptions,
    ) -> Self {
        Provenance {
            case: case.into(),
            exclude_study_transformer,
            denominator_mode: options.denominator_mode,
            q_mode: options.q_mode,
            net_local_load: options.nets_local_load(),
            coarse_step_pu: options.coarse_step_pu,
            bisection_tol_pu: options.bisection_tol_pu,
            cap_multiple: options.cap_multiple,
            tolerance: options.solver.tolerance,
            max_iter: options.solver.max_iter,
            q_limits_enforced: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrengthRow {
    pub bus: BusId,
    pub control_type: Option<ControlType>,
    pub scr: Option<f64>,
    pub scc: Option<f64>,
    pub z_th: Option<f64>,
    pub pmr: Option<f64>,
    pub pmr_mode: DenominatorMode,
    pub p_max: Option<f64>,
    pub denominator: Option<f64>,
    pub saturated: Option<bool>,
    pub iterations_total: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_trace: Option<Vec<TracePoint>>,
    /// Diagnostics for whichever study could not be completed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

impl StrengthRow {
    pub fn new(
        bus: BusId,
        control_type: Option<ControlType>,
        pmr_mode: DenominatorMode,
        scr: Option<&ScrResult>,
        pmr: Option<&PmrResult>,
    ) -> Self {
        StrengthRow {
            bus,
            control_type,
            scr: scr.map(|s| s.scr),
            scc: scr.map(|s| s.scc_pu),
            z_th: scr.map(|s| s.thevenin.z_th_pu),
            pmr: pmr.map(|p| p.pmr),
            pmr_mode,
            p_max: pmr.map(|p| p.p_max_pu),
            denominator: pmr.map(|p| p.denominator_pu),
            saturated: pmr.map(|p| p.saturated),
            iterations_total: pmr.map(|p| p.iterations_total),
            search_trace: None,
            errors: Vec::new(),
        }
    }

    fn pmr_text(&self) -> String {
        match (self.pmr, self.saturated) {
            (Some(v), Some(true)) => format!("> {v}"),
            (Some(v), _) => format!("{v:.4}"),
            (None, _) => String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrengthReport {
    pub provenance: Provenance,
    pub rows: Vec<StrengthRow>,
}

fn f4(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.4}"))
}

impl StrengthReport {
    pub fn row(&self, bus: u32) -> Option<&StrengthRow> {
        self.rows.iter().find(|r| r.bus == BusId(bus))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "bus,control_type,scr,scc,z_th,pmr,pmr_mode,p_max,denominator,saturated,iterations_total\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                r.bus,
                r.control_type.map_or("", |c| c.as_str()),
                f4(r.scr),
                f4(r.scc),
                f4(r.z_th),
                r.pmr_text(),
                r.pmr_mode,
                f4(r.p_max),
                f4(r.denominator),
                r.saturated.map_or_else(String::new, |s| s.to_string()),
                r.iterations_total
                    .map_or_else(String::new, |s| s.to_string()),
            ));
        }
        out
    }

    /// `(bus, P, converged, iterations)` for every row that carries a trace.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("bus,p_pu,converged,iterations\n");
        for r in &self.rows {
            for t in r.search_trace.iter().flatten() {
                out.push_str(&format!(
                    "{},{:.4},{},{}\n",
                    r.bus, t.p_pu, t.converged, t.iterations
                ));
            }
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:>5} {:>16} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
            "bus", "control", "SCR", "SCC", "Z_th", "PMR", "P_max", "denom"
        );
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        for r in &self.rows {
            let pmr = r.pmr_text();
            out.push_str(&format!(
                "{:>5} {:>16} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
                r.bus,
                r.control_type.map_or("-", |c| c.as_str()),
                cell(r.scr),
                cell(r.scc),
                cell(r.z_th),
                if pmr.is_empty() { "-".to_string() } else { pmr },
                cell(r.p_max),
                cell(r.denominator),
            ));
            for e in &r.errors {
                out.push_str(&format!("      bus {}: {e}\n", r.bus));
            }
        }
        out.push_str(&format!(
            "PMR denominator: {}  SCR measured {}  (no Q limits)\n",
            self.provenance.denominator_mode,
            if self.provenance.exclude_study_transformer {
                "at the grid side of the plant transformer"
            } else {
                "at the plant bus"
            }
        ));
        out
    }
}
