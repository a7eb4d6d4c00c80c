//! Short-circuit ratio with and without the plant transformer, on the
//! single-plant system and on bus 3 of the first two-IBR case.
//!
//!     cargo run --example short_circuit_ratio

use gridmargin::netmodel::{read_case, BusId};
use gridmargin::scr::scr;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../cases");
    for (name, bus) in [("spib", 3), ("two_ibr_a", 3)] {
        let network = read_case(format!("{dir}/{name}.json"))?;
        let p_nom = network.plant_at(BusId(bus)).map_or(1.0, |p| p.p_nom_pu);
        for exclude in [true, false] {
            let r = scr(&network, BusId(bus), p_nom, exclude)?;
            println!(
                "{name:>10} bus {bus}, measured at bus {}: Z_th = {:.4}  SCC = {:.4}  SCR = {:.4}",
                r.thevenin.measured_at, r.thevenin.z_th_pu, r.scc_pu, r.scr
            );
        }
    }
    Ok(())
}
