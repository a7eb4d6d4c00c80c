use nalgebra::DVector;

use crate::netmodel::{BusId, BusRole, BusSpec, TypedNetwork};

/// Placement of the free variables of a typed network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    /// Bus positions carrying a free angle: PV buses, then PQ buses, each in
    /// ascending bus id.
    pub angle_buses: Vec<usize>,
    /// Bus positions carrying a free magnitude (PQ buses, ascending id).
    pub voltage_buses: Vec<usize>,
}

impl Layout {
    pub fn new(tn: &TypedNetwork) -> Self {
        let sorted = |role: BusRole| {
            let mut pos: Vec<usize> = (0..tn.specs().len())
                .filter(|&p| tn.spec(p).role() == role)
                .collect();
            pos.sort_by_key(|&p| tn.network().buses()[p].id);
            pos
        };
        let pv = sorted(BusRole::Pv);
        let pq = sorted(BusRole::Pq);
        let mut angle_buses = pv;
        angle_buses.extend_from_slice(&pq);
        Layout {
            angle_buses,
            voltage_buses: pq,
        }
    }

    /// Number of unknowns, `n_PV + 2·n_PQ`.
    pub fn dim(&self) -> usize {
        self.angle_buses.len() + self.voltage_buses.len()
    }

    /// Row of the active-power equation of the bus at `pos`.
    pub fn p_row(&self, pos: usize) -> Option<usize> {
        self.angle_buses.iter().position(|&p| p == pos)
    }

    pub fn p_row_of(&self, tn: &TypedNetwork, bus: BusId) -> Option<usize> {
        tn.network().position(bus).and_then(|pos| self.p_row(pos))
    }

    pub fn gather(&self, state: &State) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.angle_buses
                .iter()
                .map(|&p| state.theta[p])
                .chain(self.voltage_buses.iter().map(|&p| state.v[p])),
        )
    }

    pub fn scatter(&self, x: &DVector<f64>, state: &mut State) {
        let na = self.angle_buses.len();
        for (k, &p) in self.angle_buses.iter().enumerate() {
            state.theta[p] = x[k];
        }
        for (k, &p) in self.voltage_buses.iter().enumerate() {
            state.v[p] = x[na + k];
        }
    }
}

/// Voltage angle (rad) and magnitude (p.u.) for every bus, by position.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub theta: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    /// Zero angles and unit magnitudes.
    pub fn flat(n: usize) -> Self {
        State {
            theta: vec![0.0; n],
            v: vec![1.0; n],
        }
    }

    /// Flat start for `tn`: fixed angles and magnitudes from the specs, zero
    /// angle and unit magnitude elsewhere.
    pub fn flat_start(tn: &TypedNetwork) -> Self {
        let mut s = State::flat(tn.specs().len());
        s.impose_fixed(tn);
        s
    }

    /// The base state of `tn` when it has one, otherwise a flat start; fixed
    /// entries always come from the specs.
    pub fn initial(tn: &TypedNetwork) -> Self {
        let mut s = tn
            .base_state()
            .cloned()
            .unwrap_or_else(|| State::flat(tn.specs().len()));
        s.impose_fixed(tn);
        s
    }

    /// Overwrites the entries that `tn` holds fixed.
    pub fn impose_fixed(&mut self, tn: &TypedNetwork) {
        for (p, spec) in tn.specs().iter().enumerate() {
            match *spec {
                BusSpec::Slack { v, theta } | BusSpec::Vtheta { v, theta } => {
                    self.theta[p] = theta;
                    self.v[p] = v;
                }
                BusSpec::Pv { v, .. } => self.v[p] = v,
                BusSpec::Pq { .. } => {}
            }
        }
    }

    pub fn angles_deg(&self) -> Vec<f64> {
        self.theta.iter().map(|t| t.to_degrees()).collect()
    }
}
