//! End-to-end checks of the `kcover` binary and the library calls behind it.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kcover::cli::{self, SUMMARY_JSON};
use kcover::oracle::{classify_point, mc_moments};
use kcover::{PartitionDocument, Scenario};
use kcover_core::geometry::build_partition;
use kcover_core::quadrature::cell_moments;
use kcover_core::{Point2, QuadratureSpec};
use tempfile::TempDir;

const UNIT_SQUARE: &str = "[domain]\nvertices = [[0, 0], [1, 0], [1, 1], [0, 1]]\n";

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn kcover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcover"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_scenario(dir: &TempDir, body: &str) -> PathBuf {
    let path = dir.path().join("scenario.toml");
    fs::write(&path, body).unwrap();
    path
}

fn stdout_partition(out: &Output) -> PartitionDocument {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    PartitionDocument::from_json(&String::from_utf8(out.stdout.clone()).unwrap()).unwrap()
}

fn random_scenario(order: usize, count: usize) -> String {
    format!("order = {order}\n{UNIT_SQUARE}[cost]\nname = \"sum_distance\"\n[sensors]\ncount = {count}\nseed = 1\n")
}

#[test]
fn two_sensors_of_order_two_share_one_cell() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(
        &dir,
        &format!("order = 2\n{UNIT_SQUARE}[cost]\nname = \"sum_distance\"\n[sensors]\npositions = [[0.2, 0.3], [0.7, 0.6]]\n"),
    );
    let doc = stdout_partition(&kcover(&[
        "partition",
        "--scenario",
        path.to_str().unwrap(),
    ]));
    assert_eq!(doc.order, 2);
    assert_eq!(doc.cells.len(), 1);
    assert_eq!(doc.cells[0].subset, vec![0, 1]);
}

#[test]
fn seeded_cells_tile_the_domain() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(&dir, &random_scenario(2, 10));
    for seed in ["3", "4", "5"] {
        let doc = stdout_partition(&kcover(&[
            "partition",
            "--scenario",
            path.to_str().unwrap(),
            "--seed",
            seed,
        ]));
        let total: f64 = doc.polygons().unwrap().iter().map(|p| p.area()).sum();
        assert!(
            (total - 1.0).abs() < 1e-9,
            "seed {seed}: areas sum to {total}"
        );
    }
}

#[test]
fn order_one_cells_agree_with_nearest_sensor() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(&dir, &random_scenario(1, 10));
    let scenario = Scenario::load(&path).unwrap();
    let (sensors, _) = cli::initial_state(&scenario).unwrap();
    let doc = stdout_partition(&kcover(&[
        "partition",
        "--scenario",
        path.to_str().unwrap(),
    ]));
    assert_eq!(doc.cells.len(), 10);
    for (cell, poly) in doc.cells.iter().zip(doc.polygons().unwrap()) {
        let verts = poly.vertices();
        let mid = verts.iter().fold(Point2::ZERO, |a, &v| a + v) * (1.0 / verts.len() as f64);
        // The vertex average and points halfway from it to each vertex.
        let probes = std::iter::once(mid).chain(verts.iter().map(|&v| (mid + v) * 0.5));
        for q in probes {
            let owner = classify_point(q, sensors.positions(), 1, &scenario.cost).unwrap();
            assert_eq!(owner, cell.subset, "probe ({}, {})", q.x, q.y);
        }
    }
}

#[test]
fn exported_partition_round_trips() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(&dir, &random_scenario(3, 12));
    let scenario = Scenario::load(&path).unwrap();
    let (sensors, _) = cli::initial_state(&scenario).unwrap();
    let partition = build_partition(&sensors, 3, &scenario.domain).unwrap();

    let out = kcover(&[
        "partition",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(cli::partition_output_path(dir.path())).unwrap();
    let doc = PartitionDocument::from_json(&text).unwrap();
    assert_eq!(doc.cells.len(), partition.cells.len());
    for ((cell, poly), original) in doc
        .cells
        .iter()
        .zip(doc.polygons().unwrap())
        .zip(&partition.cells)
    {
        assert_eq!(cell.subset, original.subset.members());
        assert!((poly.area() - original.polygon.area()).abs() < 1e-12);
    }
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let scenario = scenarios_dir().join("collocation_avoidance.toml");
    let runs: Vec<TempDir> = (0..2).map(|_| TempDir::new().unwrap()).collect();
    for run in &runs {
        let out = kcover(&[
            "simulate",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            run.path().to_str().unwrap(),
            "--seed",
            "9",
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for name in [
        cli::TRAJECTORY_CSV,
        SUMMARY_JSON,
        cli::TRAJECTORY_SVG,
        cli::H_CURVE_SVG,
        cli::PARTITION_JSON,
    ] {
        let a = fs::read(runs[0].path().join(name)).unwrap();
        let b = fs::read(runs[1].path().join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn bad_scenarios_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cases = [
        format!("order = 4\n{UNIT_SQUARE}[cost]\nname = \"sum_distance\"\n[sensors]\ncount = 6\n"),
        format!("order = 1\n{UNIT_SQUARE}[cost]\nname = \"no_such_cost\"\n[sensors]\ncount = 6\n"),
        format!("order = 1\n{UNIT_SQUARE}[cost]\nname = \"sum_distance\"\n[sensors]\npositions = [[2, 2]]\n"),
        format!("order = 1\n{UNIT_SQUARE}[cost]\nname = \"sum_distance\"\n[density]\nkind = \"grid-file\"\npath = \"missing.txt\"\n[sensors]\ncount = 3\n"),
        "order = \"one\"".to_owned(),
    ];
    for body in &cases {
        let path = write_scenario(&dir, body);
        let out = kcover(&["evaluate", "--scenario", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{body}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
    let out = kcover(&[
        "evaluate",
        "--scenario",
        dir.path().join("absent.toml").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_integrable_density_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(
        &dir,
        &format!(
            "order = 1\n{UNIT_SQUARE}[cost]\nname = \"sum_squared_half\"\n\
             [density]\nkind = \"expression\"\nexpression = \"1/(x-0.5)^2\"\n\
             [sensors]\npositions = [[0.2, 0.2], [0.8, 0.7]]\n"
        ),
    );
    let out = kcover(&[
        "simulate",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn max_distance_scenarios_match_the_grid() {
    for name in ["supermarket.toml", "tdoa.toml"] {
        let scenario = Scenario::load(&scenarios_dir().join(name)).unwrap();
        let report = cli::oracle(&scenario, 512).unwrap();
        assert!(report.relative_difference < 1e-3, "{name}: {report}");
        assert!(report.membership_agreement > 0.99, "{name}: {report}");
    }
}

#[test]
fn lloyd_scenario_settles_on_centroids() {
    let out_dir = TempDir::new().unwrap();
    let scenario = Scenario::load(&scenarios_dir().join("lloyd.toml")).unwrap();
    let summary = cli::simulate(&scenario, out_dir.path()).unwrap();
    assert!(summary.converged);
    let text = fs::read_to_string(out_dir.path().join(cli::PARTITION_JSON)).unwrap();
    let doc = PartitionDocument::from_json(&text).unwrap();
    let spec = QuadratureSpec::new(8, 2).unwrap();
    for (cell, poly) in doc.cells.iter().zip(doc.polygons().unwrap()) {
        let [x, y] = summary.final_positions[cell.subset[0]];
        let c = cell_moments(&poly, &scenario.density, &spec).centroid;
        assert!(
            c.distance(Point2::new(x, y)) < 1e-6,
            "sensor {}",
            cell.subset[0]
        );
    }
}

#[test]
fn monte_carlo_moments_agree_with_quadrature() {
    let dir = TempDir::new().unwrap();
    let path = write_scenario(
        &dir,
        &format!(
            "order = 2\n{UNIT_SQUARE}[cost]\nname = \"sum_distance\"\n\
             [density]\nkind = \"expression\"\nexpression = \"1 + 0.8*exp(-((x-0.7)^2 + (y-0.35)^2)/0.1)\"\n\
             [sensors]\ncount = 6\nseed = 2\n"
        ),
    );
    let scenario = Scenario::load(&path).unwrap();
    let (_, partition) = cli::initial_state(&scenario).unwrap();
    let spec = QuadratureSpec::default();
    for (i, cell) in partition.cells.iter().enumerate() {
        let exact = cell_moments(&cell.polygon, &scenario.density, &spec);
        let mc = mc_moments(
            cell.polygon.vertices(),
            &scenario.density,
            200_000,
            40 + i as u64,
        )
        .unwrap();
        assert!(
            (mc.mass - exact.mass).abs() <= 3.0 * mc.mass_stderr,
            "cell {i} mass"
        );
        assert!(
            (mc.centroid.x - exact.centroid.x).abs() <= 3.0 * mc.centroid_stderr.x,
            "cell {i} x"
        );
        assert!(
            (mc.centroid.y - exact.centroid.y).abs() <= 3.0 * mc.centroid_stderr.y,
            "cell {i} y"
        );
    }
}
