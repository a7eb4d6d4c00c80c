//! Fold point, null vectors and normal-form coefficients, first on a single
//! line where everything has a closed form, then on bus 2 of the second
//! two-IBR case.
//!
//!     cargo run --example fold_normal_form

use gridmargin::fold::analyze_fold;
use gridmargin::netmodel::{
    assign_node_types, read_case, Branch, Bus, BusId, ControlType, Network, Plant,
};
use gridmargin::pmr::{margin_network, PmrOptions};
use gridmargin::powerflow::SolverOptions;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = 0.935;
    let line = Network::new(
        vec![
            Bus {
                id: BusId(1),
                name: "grid".into(),
            },
            Bus {
                id: BusId(2),
                name: "ibr".into(),
            },
        ],
        vec![Branch::line(1, 2, x)],
        vec![
            Plant::infinite_bus(1, 1.0),
            Plant::ibr(2, ControlType::GridSupporting, 1.0, 1.0),
        ],
        vec![],
    )?;
    let fa = analyze_fold(
        &assign_node_types(&line, None)?,
        BusId(2),
        &PmrOptions::default(),
    )?;
    println!("single line, X = {x}");
    println!("  P_max {:.6}  (1/X = {:.6})", fa.fold.p_max_pu, 1.0 / x);
    println!(
        "  angle at the fold {:.3}°",
        fa.fold.x_star.theta[1].to_degrees()
    );
    println!(
        "  alpha {:.6}  beta {:.6}  (P_max and P_max/2)",
        fa.coefficients.alpha, fa.coefficients.beta
    );

    let network = read_case(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../cases/two_ibr_b.json"
    ))?;
    let (tn, _) = margin_network(&network, &SolverOptions::default())?;
    let fa = analyze_fold(&tn, BusId(2), &PmrOptions::default())?;
    println!("two_ibr_b, bus 2");
    println!(
        "  P_max {:.4}  sigma_min {:.2e}  condition {:.2e}",
        fa.fold.p_max_pu,
        fa.fold.sigma_min,
        fa.fold.condition()
    );
    println!(
        "  nu    {:?}",
        fa.pair
            .nu
            .iter()
            .map(|v| format!("{v:.4}"))
            .collect::<Vec<_>>()
    );
    println!(
        "  omega {:?}",
        fa.pair
            .omega
            .iter()
            .map(|v| format!("{v:.4}"))
            .collect::<Vec<_>>()
    );
    println!(
        "  alpha {:.4}  beta {:.4}",
        fa.coefficients.alpha, fa.coefficients.beta
    );
    Ok(())
}
