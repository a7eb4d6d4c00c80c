//! Solves both bundled two-IBR cases and prints them in the layout of the
//! published power-flow tables (angles in degrees).
//!
//!     cargo run --example power_flow_tables

use gridmargin::netmodel::{assign_base_types, read_case};
use gridmargin::powerflow::{solve, SolutionReport, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["two_ibr_a", "two_ibr_b"] {
        let network = read_case(format!(
            "{}/../../cases/{name}.json",
            env!("CARGO_MANIFEST_DIR")
        ))?;
        let tn = assign_base_types(&network)?;
        let sol = solve(&tn, None, &SolverOptions::default(), None)?;
        println!("{name}");
        print!("{}", SolutionReport::new(&tn, &sol).to_table());
        println!();
    }
    Ok(())
}
