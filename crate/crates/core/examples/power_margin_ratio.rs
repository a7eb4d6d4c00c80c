//! Power margin ratio of each plant next to its SCR, plus the local-load
//! example showing how the nominal and actual denominators differ.
//!
//!     cargo run --example power_margin_ratio

use gridmargin::netmodel::{read_case, Branch, Bus, BusId, ControlType, Load, Network, Plant};
use gridmargin::pmr::{pmr, DenominatorMode, PmrOptions};
use gridmargin::scr::scr;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let network = read_case(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../cases/two_ibr_a.json"
    ))?;
    for bus in [2, 3] {
        let s = scr(&network, BusId(bus), 1.0, true)?;
        let p = pmr(&network, BusId(bus), &PmrOptions::default())?;
        println!(
            "bus {bus}: SCR {:.3}  PMR {}  (P_max {:.3} p.u., {} solves, {} Newton iterations)",
            s.scr,
            p.display_pmr(),
            p.p_max_pu,
            p.search_trace.len(),
            p.iterations_total
        );
    }

    // A 1.5 p.u. line, a 2 p.u. plant and a 1.5 p.u. load at the plant bus.
    let loaded = Network::new(
        vec![
            Bus {
                id: BusId(1),
                name: "grid".into(),
            },
            Bus {
                id: BusId(2),
                name: "poi".into(),
            },
        ],
        vec![Branch::line(1, 2, 1.0 / 1.5)],
        vec![
            Plant::infinite_bus(1, 1.0),
            Plant::ibr(2, ControlType::GridSupporting, 2.0, 2.0),
        ],
        vec![Load {
            bus: BusId(2),
            p_pu: 1.5,
            q_pu: 0.0,
        }],
    )?;
    for mode in [DenominatorMode::Nominal, DenominatorMode::Actual] {
        let opts = PmrOptions {
            denominator_mode: mode,
            ..Default::default()
        };
        let r = pmr(&loaded, BusId(2), &opts)?;
        println!(
            "local load, {mode} denominator: P_max {:.3} / {:.3} = PMR {:.3}",
            r.p_max_pu, r.denominator_pu, r.pmr
        );
    }
    Ok(())
}
