//! PMR of buses 3 and 2 of the second two-IBR case for every combination of
//! plant control types, holding each plant at its all-voltage-controlled
//! operating point. Sweeps run in parallel.
//!
//!     cargo run --release --example control_type_tables

use gridmargin::netmodel::{read_case, BusId, ControlType};
use gridmargin::pmr::{base_case, pmr, PmrOptions};
use gridmargin::powerflow::SolverOptions;
use rayon::prelude::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    use ControlType::{GflPq, Gfm, GridSupporting};
    let network = read_case(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../cases/two_ibr_b.json"
    ))?;
    let (_, base) = base_case(&network, &SolverOptions::default())?;

    let studies = [
        (
            3,
            vec![
                (GridSupporting, GridSupporting),
                (GflPq, GridSupporting),
                (Gfm, GridSupporting),
                (GridSupporting, GflPq),
                (GflPq, GflPq),
                (Gfm, GflPq),
            ],
        ),
        (
            2,
            vec![
                (GridSupporting, GridSupporting),
                (GridSupporting, GflPq),
                (GridSupporting, Gfm),
                (GflPq, GridSupporting),
                (GflPq, GflPq),
                (GflPq, Gfm),
            ],
        ),
    ];
    for (study, combos) in studies {
        println!("study bus {study}");
        println!("{:>16} {:>16} {:>8}", "bus 2", "bus 3", "PMR");
        let rows: Vec<String> = combos
            .par_iter()
            .map(|&(c2, c3)| {
                let configured = network
                    .with_control_type(BusId(2), c2, &base)
                    .and_then(|n| n.with_control_type(BusId(3), c3, &base))
                    .expect("plants exist at both buses");
                let text = match pmr(&configured, BusId(study), &PmrOptions::default()) {
                    Ok(r) => r.display_pmr(),
                    Err(e) => e.to_string(),
                };
                format!("{:>16} {:>16} {:>8}", c2.as_str(), c3.as_str(), text)
            })
            .collect();
        rows.iter().for_each(|r| println!("{r}"));
        println!();
    }
    Ok(())
}
