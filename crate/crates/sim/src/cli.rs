//! The subcommands, as library functions returning their reports.

use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use kcover_core::coverage::{cell_costs, evaluate_h, gradient, partition_moments};
use kcover_core::dynamics::{run_with_state, CoverageProblem};
use kcover_core::geometry::build_partition;
use kcover_core::{CostFunction, OrderKPartition, Point2, SensorConfiguration};
use serde::Serialize;
use thiserror::Error;

use crate::io::{write_trajectory_csv, PartitionDocument, RunSummary};
use crate::oracle::{grid_h, Classifier, GridSpec, OracleError};
use crate::scenario::{Scenario, ScenarioError};
use crate::svg;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Numerical(kcover_core::Error),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: io::Error },
}

impl CliError {
    /// 2 for scenario problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) | CliError::Oracle(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Output { .. } => 1,
        }
    }
}

fn numerical(e: kcover_core::Error) -> CliError {
    CliError::Numerical(e)
}

fn output_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.display().to_string(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(output_error(path))
}

/// Initial positions; failures here mean the scenario itself is unusable.
pub fn initial_state(
    scenario: &Scenario,
) -> Result<(SensorConfiguration, OrderKPartition), CliError> {
    let sensors = scenario.initial_sensors().map_err(ScenarioError::from)?;
    let partition =
        build_partition(&sensors, scenario.order, &scenario.domain).map_err(ScenarioError::from)?;
    Ok((sensors, partition))
}

pub fn partition(scenario: &Scenario) -> Result<PartitionDocument, CliError> {
    let (_, partition) = initial_state(scenario)?;
    Ok(PartitionDocument::from_partition(&partition))
}

/// Output file names written by [`simulate`].
pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const TRAJECTORY_SVG: &str = "trajectory.svg";
pub const H_CURVE_SVG: &str = "h_curve.svg";
pub const PARTITION_JSON: &str = "partition.json";

/// Runs the dynamics and writes the trajectory CSV, the summary, both plots
/// and the final partition into `out_dir`.
pub fn simulate(scenario: &Scenario, out_dir: &Path) -> Result<RunSummary, CliError> {
    let (sensors, _) = initial_state(scenario)?;
    let problem = CoverageProblem {
        domain: &scenario.domain,
        order: scenario.order,
        cost: &scenario.cost,
        density: &scenario.density,
    };
    let (trajectory, state) =
        run_with_state(&sensors, &problem, &scenario.sim).map_err(numerical)?;
    let summary = RunSummary::new(&trajectory, scenario.order, scenario.cost.name());
    if !trajectory.converged {
        log::warn!(
            "no convergence by t = {}; final speed {:.3e}",
            summary.final_time,
            summary.final_speed
        );
    }

    fs::create_dir_all(out_dir).map_err(output_error(out_dir))?;
    let csv_path = out_dir.join(TRAJECTORY_CSV);
    let file = File::create(&csv_path).map_err(output_error(&csv_path))?;
    let mut writer = BufWriter::new(file);
    write_trajectory_csv(&trajectory, &mut writer)
        .and_then(|_| writer.flush())
        .map_err(output_error(&csv_path))?;
    write_file(&out_dir.join(SUMMARY_JSON), &summary.to_json())?;
    write_file(
        &out_dir.join(TRAJECTORY_SVG),
        &svg::trajectory_plot(&trajectory, &state.partition),
    )?;
    write_file(&out_dir.join(H_CURVE_SVG), &svg::h_curve_plot(&trajectory))?;
    write_file(
        &out_dir.join(PARTITION_JSON),
        &PartitionDocument::from_partition(&state.partition).to_json(),
    )?;
    Ok(summary)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellReport {
    pub subset: Vec<usize>,
    pub area: f64,
    pub mass: f64,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub h: f64,
    pub grad_inf_norm: f64,
    pub gradient: Vec<[f64; 2]>,
    pub cells: Vec<CellReport>,
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "H = {:.12e}", self.h)?;
        writeln!(f, "gradient inf-norm = {:.6e}", self.grad_inf_norm)?;
        for (i, g) in self.gradient.iter().enumerate() {
            writeln!(f, "  dH/dp_{i} = ({:.6e}, {:.6e})", g[0], g[1])?;
        }
        writeln!(f, "{} cells", self.cells.len())?;
        for c in &self.cells {
            writeln!(
                f,
                "  {:?}: area {:.6e}, mass {:.6e}, cost {:.6e}",
                c.subset, c.area, c.mass, c.cost
            )?;
        }
        Ok(())
    }
}

pub fn evaluate(scenario: &Scenario) -> Result<Evaluation, CliError> {
    let (sensors, partition) = initial_state(scenario)?;
    let spec = &scenario.sim.quadrature;
    let h = evaluate_h(
        &partition,
        &sensors,
        &scenario.cost,
        &scenario.density,
        spec,
    )
    .map_err(numerical)?;
    let grad = gradient(
        &partition,
        &sensors,
        &scenario.cost,
        &scenario.density,
        spec,
    )
    .map_err(numerical)?;
    let costs = cell_costs(
        &partition,
        &sensors,
        &scenario.cost,
        &scenario.density,
        spec,
    )
    .map_err(numerical)?;
    let moments = partition_moments(&partition, &scenario.density, spec);
    let cells = partition
        .cells
        .iter()
        .zip(moments.iter().zip(&costs))
        .map(|(c, (m, &cost))| CellReport {
            subset: c.subset.members().to_vec(),
            area: c.polygon.area(),
            mass: m.mass,
            cost,
        })
        .collect();
    Ok(Evaluation {
        h,
        grad_inf_norm: grad.inf_norm(),
        gradient: grad.iter().map(|g| [g.x, g.y]).collect(),
        cells,
    })
}

/// Partition-based values against the brute-force grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub resolution: usize,
    pub h_partition: f64,
    pub h_grid: f64,
    pub relative_difference: f64,
    /// Fraction of grid points whose oracle subset matches the cell
    /// containing them.
    pub membership_agreement: f64,
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "grid {0}x{0}", self.resolution)?;
        writeln!(f, "H (partition) = {:.12e}", self.h_partition)?;
        writeln!(f, "H (grid)      = {:.12e}", self.h_grid)?;
        writeln!(f, "relative difference = {:.3e}", self.relative_difference)?;
        writeln!(f, "membership agreement = {:.6}", self.membership_agreement)
    }
}

pub fn oracle(scenario: &Scenario, resolution: usize) -> Result<OracleReport, CliError> {
    let grid = GridSpec::new(resolution, None)?;
    let (sensors, partition) = initial_state(scenario)?;
    let spec = &scenario.sim.quadrature;
    let h_partition = evaluate_h(
        &partition,
        &sensors,
        &scenario.cost,
        &scenario.density,
        spec,
    )
    .map_err(numerical)?;
    let h_grid = grid_h(
        sensors.positions(),
        &scenario.cost,
        &scenario.density,
        scenario.domain.vertices(),
        scenario.order,
        &grid,
    )?;
    let membership_agreement = membership_agreement(
        &partition,
        &sensors,
        &scenario.cost,
        100_000,
        scenario.sim.seed,
    )?;
    Ok(OracleReport {
        resolution,
        h_partition,
        h_grid,
        relative_difference: (h_partition - h_grid).abs()
            / h_partition.abs().max(f64::MIN_POSITIVE),
        membership_agreement,
    })
}

/// Fraction of `samples` uniform points (drawn in the domain's bounding
/// box, kept when inside the domain) located in the cell the oracle picks.
pub fn membership_agreement(
    partition: &OrderKPartition,
    sensors: &SensorConfiguration,
    cost: &dyn CostFunction,
    samples: usize,
    seed: u64,
) -> Result<f64, CliError> {
    use rand::{Rng, SeedableRng};
    let mut classifier = Classifier::new(sensors.positions(), partition.order)?;
    let (lo, hi) = partition.domain.bounding_box().expect("nonempty domain");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (mut hits, mut total) = (0usize, 0usize);
    while total < samples {
        let q = Point2::new(
            lo.x + (hi.x - lo.x) * rng.gen::<f64>(),
            lo.y + (hi.y - lo.y) * rng.gen::<f64>(),
        );
        if !partition.domain.contains(q, 0.0) {
            continue;
        }
        total += 1;
        let (subset, _) = classifier.classify([q.x, q.y], cost);
        if partition
            .locate(q)
            .is_some_and(|c| partition.cells[c].subset.members() == subset)
        {
            hits += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

/// Reads a scenario and applies the `--seed` override.
pub fn load_scenario(path: &Path, seed: Option<u64>) -> Result<Scenario, CliError> {
    let mut scenario = Scenario::load(path)?;
    if let Some(seed) = seed {
        scenario.override_seed(seed);
    }
    Ok(scenario)
}

/// Where `partition` writes: `<out>/partition.json` when `out` is a
/// directory (or has no extension), else `out` itself.
pub fn partition_output_path(out: &Path) -> PathBuf {
    if out.is_dir() || out.extension().is_none() {
        out.join(PARTITION_JSON)
    } else {
        out.to_path_buf()
    }
}

pub fn write_partition(doc: &PartitionDocument, out: &Path) -> Result<PathBuf, CliError> {
    let path = partition_output_path(out);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(output_error(parent))?;
    }
    write_file(&path, &doc.to_json())?;
    Ok(path)
}
