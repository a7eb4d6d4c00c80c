//! Grid-strength metrics for inverter-based resources.
//!
//! * [`scr`] — short-circuit ratio from the Thevenin impedance.
//! * [`pmr`] — power margin ratio: how far a plant's injection can be pushed
//!   before the power flow stops having a solution, with each plant typed by
//!   its control mode.
//! * [`fold`] — the fold at that limit, its normal form, and the distance
//!   between the stable and unstable equilibria near it.
//!
//! [`netmodel`] holds the network, the case-file format and node typing;
//! [`powerflow`] is the Newton solver underneath everything else.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod fold;
pub mod netmodel;
pub mod pmr;
pub mod powerflow;
pub mod report;
pub mod scr;

pub use netmodel::{read_case, BusId, ControlType, Network};
pub use pmr::{pmr, PmrOptions, PmrResult};
pub use scr::{scr, ScrResult};
