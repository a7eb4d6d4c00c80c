//! The `gridmargin` command line.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::fold::{analyze_fold, distance_curve, FoldError};
use crate::netmodel::{read_case, BusId, Network, NetworkError};
use crate::pmr::{
    base_case, margin_network, pmax_search, DenominatorMode, PmrError, PmrOptions, QMode,
};
use crate::powerflow::{SolutionReport, SolveError, SolverOptions};
use crate::report::{Provenance, StrengthReport, StrengthRow};
use crate::scr::{scr, ScrError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_STUDY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Base-case power flow (grid-forming plants as PV buses).
    Solve,
    /// Short-circuit ratio.
    Scr,
    /// Power margin ratio.
    Pmr,
    /// Fold point and normal-form coefficients of one bus.
    Fold,
    /// Estimated and exact SEP-UEP distance over a loading grid.
    DistanceCurve,
    /// SCR and PMR side by side for every inverter plant.
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DenominatorArg {
    Nominal,
    Actual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QModeArg {
    /// Hold the base-case reactive injection.
    Hold,
    /// Scale the reactive injection with the active one.
    Pf,
}

/// Grid-strength studies on a JSON case file.
///
/// All quantities are per unit on the case base. Angles are solved in
/// radians and reported in degrees. PV reactive limits are not enforced.
#[derive(Clone, Debug, Parser)]
#[command(name = "gridmargin", version)]
pub struct StudyConfig {
    pub command: Command,
    /// Case file (JSON).
    pub case_path: PathBuf,
    /// Study bus id. Without it, scr and pmr cover every inverter plant;
    /// fold and distance-curve require it.
    #[arg(long)]
    pub bus: Option<u32>,
    /// Power-flow residual tolerance (infinity norm, p.u.).
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    /// Coarse PMR ramp step (p.u.).
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// PMR bisection tolerance (p.u.).
    #[arg(long, default_value_t = 1e-3)]
    pub bisection_tol: f64,
    /// Saturation cap as a multiple of the PMR denominator.
    #[arg(long, default_value_t = 20.0)]
    pub cap: f64,
    #[arg(long, value_enum, default_value_t = DenominatorArg::Nominal)]
    pub denominator: DenominatorArg,
    /// Reactive setpoint of a PQ study bus during the ramp.
    #[arg(long, value_enum, default_value_t = QModeArg::Hold)]
    pub q_mode: QModeArg,
    /// Emit the PMR search trace (P, converged, iterations).
    #[arg(long)]
    pub trace: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Comma-separated loading offsets λ ≤ 0 for distance-curve.
    #[arg(
        long,
        default_value = "-0.3,-0.2,-0.1,-0.05,-0.02,-0.01",
        allow_hyphen_values = true
    )]
    pub lambda_grid: String,
    /// Measure SCR at the plant bus, through its transformer, instead of at
    /// the grid side of that transformer.
    #[arg(long)]
    pub include_study_transformer: bool,
}

impl StudyConfig {
    pub fn pmr_options(&self) -> PmrOptions {
        PmrOptions {
            coarse_step_pu: self.step,
            bisection_tol_pu: self.bisection_tol,
            cap_multiple: self.cap,
            denominator_mode: match self.denominator {
                DenominatorArg::Nominal => DenominatorMode::Nominal,
                DenominatorArg::Actual => DenominatorMode::Actual,
            },
            q_mode: match self.q_mode {
                QModeArg::Hold => QMode::HoldBase,
                QModeArg::Pf => QMode::ConstantPowerFactor,
            },
            net_local_load: None,
            solver: SolverOptions {
                tolerance: self.tolerance,
                max_iter: self.max_iter,
                ..Default::default()
            },
        }
    }
}

/// A failure with its exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

fn solve_code(e: &SolveError) -> i32 {
    match e {
        SolveError::InvalidOptions(_) | SolveError::UnknownBus(_) | SolveError::NoActiveRow(_) => {
            EXIT_INPUT
        }
        _ => EXIT_STUDY,
    }
}

fn pmr_code(e: &PmrError) -> i32 {
    match e {
        PmrError::Network(_)
        | PmrError::InvalidOptions(_)
        | PmrError::StudyBusIsSlack(_)
        | PmrError::NoStudyInjection(_) => EXIT_INPUT,
        PmrError::Solve(s) => solve_code(s),
        _ => EXIT_STUDY,
    }
}

impl From<NetworkError> for Failure {
    fn from(e: NetworkError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<PmrError> for Failure {
    fn from(e: PmrError) -> Self {
        Failure {
            code: pmr_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<ScrError> for Failure {
    fn from(e: ScrError) -> Self {
        let code = if matches!(e, ScrError::Isolated(_)) {
            EXIT_STUDY
        } else {
            EXIT_INPUT
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<FoldError> for Failure {
    fn from(e: FoldError) -> Self {
        let code = match &e {
            FoldError::Pmr(p) => pmr_code(p),
            FoldError::Solve(s) => solve_code(s),
            FoldError::NoActiveRow(_) => EXIT_INPUT,
            _ => EXIT_STUDY,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn study_bus(config: &StudyConfig) -> Result<BusId, Failure> {
    config
        .bus
        .map(BusId)
        .ok_or_else(|| Failure::input(format!("{:?} needs --bus", config.command).to_lowercase()))
}

fn plant_buses(network: &Network, config: &StudyConfig) -> Result<Vec<BusId>, Failure> {
    if let Some(b) = config.bus {
        network.require(BusId(b))?;
        return Ok(vec![BusId(b)]);
    }
    let mut buses: Vec<BusId> = network
        .plants()
        .iter()
        .filter(|p| p.control_type.is_ibr())
        .map(|p| p.bus)
        .collect();
    buses.sort();
    Ok(buses)
}

fn strength(
    network: &Network,
    config: &StudyConfig,
    with_scr: bool,
    with_pmr: bool,
) -> Result<(StrengthReport, bool), Failure> {
    let options = config.pmr_options();
    let exclude = !config.include_study_transformer;
    let buses = plant_buses(network, config)?;
    let margin = if with_pmr {
        Some(margin_network(network, &options.solver)?)
    } else {
        None
    };

    let rows: Vec<Result<StrengthRow, Failure>> = buses
        .par_iter()
        .map(|&bus| {
            let plant = network.plant_at(bus);
            let mut errors = Vec::new();
            let s = if with_scr {
                let p_nom = plant
                    .map(|p| p.p_nom_pu)
                    .ok_or(PmrError::NoStudyInjection(bus))?;
                match scr(network, bus, p_nom, exclude) {
                    Ok(r) => Some(r),
                    Err(e @ ScrError::Isolated(_)) => {
                        errors.push(e.to_string());
                        None
                    }
                    Err(e) => return Err(e.into()),
                }
            } else {
                None
            };
            let p = match &margin {
                Some((tn, _)) => match pmax_search(tn, bus, &options) {
                    Ok(r) => Some(r),
                    Err(e) if pmr_code(&e) == EXIT_STUDY => {
                        errors.push(e.to_string());
                        None
                    }
                    Err(e) => return Err(e.into()),
                },
                None => None,
            };
            let mut row = StrengthRow::new(
                bus,
                plant.map(|p| p.control_type),
                options.denominator_mode,
                s.as_ref(),
                p.as_ref(),
            );
            if config.trace {
                row.search_trace = p.map(|p| p.search_trace);
            }
            row.errors = errors;
            Ok(row)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let failed = rows.iter().any(|r| !r.errors.is_empty());
    let provenance = Provenance::new(config.case_path.display().to_string(), exclude, &options);
    Ok((StrengthReport { provenance, rows }, failed))
}

fn render_strength(report: &StrengthReport, config: &StudyConfig) -> String {
    match config.format {
        OutputFormat::Json => json(report),
        OutputFormat::Csv if config.trace => format!("{}\n{}", report.to_csv(), report.trace_csv()),
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Table if config.trace => {
            format!("{}\n{}", report.to_table(), report.trace_csv())
        }
        OutputFormat::Table => report.to_table(),
    }
}

#[derive(Serialize)]
struct FoldSummary {
    bus: BusId,
    p_max_pu: f64,
    sigma_min: f64,
    sigma_max: f64,
    alpha: f64,
    beta: f64,
    e_c_row: usize,
    nu: Vec<f64>,
    omega: Vec<f64>,
    hessian_contraction: Vec<f64>,
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Failure::input(format!("invalid λ value {s:?} in --lambda-grid")))
        })
        .collect()
}

fn execute(config: &StudyConfig) -> Result<(String, i32), Failure> {
    let network = read_case(&config.case_path)?;
    match config.command {
        Command::Solve => {
            let options = config.pmr_options();
            let (tn, sol) =
                match base_case(&network, &options.solver) {
                    Ok(ok) => ok,
                    Err(PmrError::BaseCaseDiverged { .. }) => {
                        let tn = crate::netmodel::assign_base_types(&network)?;
                        let sol = crate::powerflow::solve(&tn, None, &options.solver, None)
                            .map_err(|e| Failure {
                                code: solve_code(&e),
                                message: e.to_string(),
                            })?;
                        (tn, sol)
                    }
                    Err(e) => return Err(e.into()),
                };
            let report = SolutionReport::new(&tn, &sol);
            let text = match config.format {
                OutputFormat::Table => report.to_table(),
                OutputFormat::Csv => report.to_csv(),
                OutputFormat::Json => json(&report),
            };
            Ok((text, if sol.converged { EXIT_OK } else { EXIT_STUDY }))
        }
        Command::Scr | Command::Pmr | Command::Sweep => {
            let with_scr = config.command != Command::Pmr;
            let with_pmr = config.command != Command::Scr;
            let (report, failed) = strength(&network, config, with_scr, with_pmr)?;
            Ok((
                render_strength(&report, config),
                if failed { EXIT_STUDY } else { EXIT_OK },
            ))
        }
        Command::Fold => {
            let bus = study_bus(config)?;
            network.require(bus)?;
            let options = config.pmr_options();
            let (tn, _) = margin_network(&network, &options.solver)?;
            let fa = analyze_fold(&tn, bus, &options)?;
            let summary = FoldSummary {
                bus,
                p_max_pu: fa.fold.p_max_pu,
                sigma_min: fa.fold.sigma_min,
                sigma_max: fa.fold.sigma_max,
                alpha: fa.coefficients.alpha,
                beta: fa.coefficients.beta,
                e_c_row: fa.coefficients.e_c_row,
                nu: fa.pair.nu.iter().copied().collect(),
                omega: fa.pair.omega.iter().copied().collect(),
                hessian_contraction: fa.hessian_contraction.iter().copied().collect(),
            };
            let text = match config.format {
                OutputFormat::Json => json(&summary),
                OutputFormat::Csv => format!(
                    "bus,p_max,sigma_min,sigma_max,alpha,beta\n{},{:.4},{:.4e},{:.4},{:.4},{:.4}\n",
                    bus, summary.p_max_pu, summary.sigma_min, summary.sigma_max, summary.alpha, summary.beta
                ),
                OutputFormat::Table => format!(
                    "bus {bus}\n  P_max      {:.4} p.u.\n  sigma_min  {:.3e}  (sigma_max {:.4})\n  alpha      {:.4}\n  beta       {:.4}\n",
                    summary.p_max_pu, summary.sigma_min, summary.sigma_max, summary.alpha, summary.beta
                ),
            };
            Ok((text, EXIT_OK))
        }
        Command::DistanceCurve => {
            let bus = study_bus(config)?;
            network.require(bus)?;
            let grid = parse_grid(&config.lambda_grid)?;
            let options = config.pmr_options();
            let (tn, _) = margin_network(&network, &options.solver)?;
            let curve = distance_curve(&tn, bus, &grid, &options)?;
            let failed = curve.points.iter().any(|p| p.error.is_some());
            let text = match config.format {
                OutputFormat::Json => json(&curve),
                OutputFormat::Csv => curve.to_csv(),
                OutputFormat::Table => curve.to_table(),
            };
            Ok((text, if failed { EXIT_STUDY } else { EXIT_OK }))
        }
    }
}

/// Runs one study. The report goes to `--output` when given and to `out`
/// otherwise; diagnostics go to `err`. Returns the process exit status.
pub fn run(config: &StudyConfig, out: &mut impl Write, err: &mut impl Write) -> i32 {
    match execute(config) {
        Ok((text, code)) => {
            let written = match &config.output {
                Some(path) => std::fs::write(path, &text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    let _ = writeln!(err, "gridmargin: {e}");
                    EXIT_INPUT
                }
            }
        }
        Err(f) => {
            let _ = writeln!(err, "gridmargin: {}", f.message);
            f.code
        }
    }
}
