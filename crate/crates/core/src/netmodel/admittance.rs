use nalgebra::DMatrix;

use super::{Branch, Network};

/// Bus admittance matrix `Y = G + jB`, indexed by bus position.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmittanceMatrix {
    pub g: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl AdmittanceMatrix {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// Stamps `branches` onto an `n`-bus matrix. `position` maps a branch
    /// endpoint to its row.
    pub(crate) fn from_branches<'a>(
        n: usize,
        branches: impl IntoIterator<Item = &'a Branch>,
        position: impl Fn(&Branch) -> (usize, usize),
    ) -> Self {
        let mut g = DMatrix::zeros(n, n);
        let mut b = DMatrix::zeros(n, n);
        for br in branches {
            let (i, j) = position(br);
            let den = br.impedance_sq();
            let (gs, bs) = (br.r_pu / den, -br.x_pu / den);
            g[(i, i)] += gs;
            g[(j, j)] += gs;
            g[(i, j)] -= gs;
            g[(j, i)] -= gs;
            b[(i, i)] += bs;
            b[(j, j)] += bs;
            b[(i, j)] -= bs;
            b[(j, i)] -= bs;
        }
        AdmittanceMatrix { g, b }
    }
}

/// Series admittance `1 / (r + jx)` of every branch, stamped with the usual
/// two-by-two pattern. No shunts are modelled.
pub fn build_admittance(network: &Network) -> AdmittanceMatrix {
    AdmittanceMatrix::from_branches(network.n_buses(), network.branches(), |br| {
        (
            network.position(br.from).expect("validated endpoint"),
            network.position(br.to).expect("validated endpoint"),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Bus, BusId, Plant};
    use approx::assert_relative_eq;

    fn net(branches: Vec<Branch>) -> Network {
        Network::new(
            vec![
                Bus {
                    id: BusId(1),
                    name: "a".into(),
                },
                Bus {
                    id: BusId(2),
                    name: "b".into(),
                },
            ],
            branches,
            vec![Plant::infinite_bus(1, 1.0)],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn pure_reactance() {
        let y = build_admittance(&net(vec![Branch::line(1, 2, 0.25)]));
        assert!(y.g.iter().all(|&v| v == 0.0));
        assert_eq!(y.b, DMatrix::from_row_slice(2, 2, &[-4.0, 4.0, 4.0, -4.0]));
    }

    #[test]
    fn parallel_branches_add() {
        let y = build_admittance(&net(vec![Branch::line(1, 2, 0.5), Branch::line(1, 2, 0.5)]));
        assert_relative_eq!(y.b[(0, 1)], 4.0, epsilon = 1e-12);
        assert_relative_eq!(y.b[(0, 0)], -4.0, epsilon = 1e-12);
    }

    #[test]
    fn lossy_branch_matches_complex_reciprocal() {
        let mut br = Branch::line(1, 2, 0.1);
        br.r_pu = 0.01;
        let y = build_admittance(&net(vec![br]));
        // independent route: complex division
        let z = nalgebra::Complex::new(0.01, 0.1);
        let ys = nalgebra::Complex::new(1.0, 0.0) / z;
        assert_relative_eq!(y.g[(0, 0)], ys.re, max_relative = 1e-14);
        assert_relative_eq!(y.b[(0, 0)], ys.im, max_relative = 1e-14);
        assert_relative_eq!(y.g[(0, 1)], -ys.re, max_relative = 1e-14);
        assert_relative_eq!(y.b[(1, 0)], -ys.im, max_relative = 1e-14);
    }
}
