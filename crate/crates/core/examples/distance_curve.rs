//! Estimated against exact SEP–UEP distance as the loading approaches the
//! fold, as CSV ready for plotting.
//!
//!     cargo run --example distance_curve > curve.csv

use gridmargin::fold::distance_curve;
use gridmargin::netmodel::{read_case, BusId};
use gridmargin::pmr::{margin_network, PmrOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let network = read_case(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../cases/two_ibr_b.json"
    ))?;
    let options = PmrOptions::default();
    let (tn, _) = margin_network(&network, &options.solver)?;
    let grid: Vec<f64> = (1..=30).map(|k| -0.01 * k as f64).rev().collect();
    let curve = distance_curve(&tn, BusId(2), &grid, &options)?;
    print!("{}", curve.to_csv());
    Ok(())
}
