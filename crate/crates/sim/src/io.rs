//! Partition JSON, trajectory CSV and run summaries.

use std::io::{self, Write};

use kcover_core::dynamics::Trajectory;
use kcover_core::{ConvexPolygon, OrderKPartition, Point2};
use serde::{Deserialize, Serialize};

/// Rounds to 12 significant digits.
pub fn round_sig12(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

fn export_point(p: Point2) -> [f64; 2] {
    [round_sig12(p.x), round_sig12(p.y)]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellDocument {
    pub subset: Vec<usize>,
    pub vertices: Vec<[f64; 2]>,
}

/// Serialized form of an [`OrderKPartition`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionDocument {
    pub order: usize,
    pub domain: Vec<[f64; 2]>,
    pub cells: Vec<CellDocument>,
    pub adjacency: Vec<[usize; 2]>,
}

impl PartitionDocument {
    pub fn from_partition(partition: &OrderKPartition) -> Self {
        Self {
            order: partition.order,
            domain: partition
                .domain
                .vertices()
                .iter()
                .map(|&p| export_point(p))
                .collect(),
            cells: partition
                .cells
                .iter()
                .map(|c| CellDocument {
                    subset: c.subset.members().to_vec(),
                    vertices: c
                        .polygon
                        .vertices()
                        .iter()
                        .map(|&p| export_point(p))
                        .collect(),
                })
                .collect(),
            adjacency: partition
                .adjacency_pairs()
                .into_iter()
                .map(|(a, b)| [a, b])
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("partition document serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Cell polygons, revalidated.
    pub fn polygons(&self) -> kcover_core::Result<Vec<ConvexPolygon>> {
        self.cells
            .iter()
            .map(|c| ConvexPolygon::new(c.vertices.iter().map(|&v| Point2::from(v)).collect()))
            .collect()
    }
}

pub const TRAJECTORY_HEADER: &str = "t,sensor_index,x,y,H,grad_norm";

/// One row per (time, sensor).
pub fn write_trajectory_csv<W: Write>(trajectory: &Trajectory, mut out: W) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for (m, sensors) in trajectory.positions.iter().enumerate() {
        let (t, h, g) = (
            trajectory.times[m],
            trajectory.h_values[m],
            trajectory.grad_norms[m],
        );
        for (i, p) in sensors.positions().iter().enumerate() {
            writeln!(out, "{t},{i},{},{},{h},{g}", p.x, p.y)?;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub converged: bool,
    pub iterations: usize,
    pub final_time: f64,
    pub initial_h: f64,
    pub final_h: f64,
    pub initial_grad_norm: f64,
    pub final_grad_norm: f64,
    pub final_speed: f64,
    pub sensor_count: usize,
    pub order: usize,
    pub cost: String,
    pub final_positions: Vec<[f64; 2]>,
}

impl RunSummary {
    pub fn new(trajectory: &Trajectory, order: usize, cost: &str) -> Self {
        let last = |v: &[f64]| v.last().copied().unwrap_or(f64::NAN);
        let first = |v: &[f64]| v.first().copied().unwrap_or(f64::NAN);
        let finals = trajectory
            .final_positions()
            .map(|s| s.positions().iter().map(|p| [p.x, p.y]).collect())
            .unwrap_or_default();
        Self {
            converged: trajectory.converged,
            iterations: trajectory.iterations(),
            final_time: last(&trajectory.times),
            initial_h: first(&trajectory.h_values),
            final_h: last(&trajectory.h_values),
            initial_grad_norm: first(&trajectory.grad_norms),
            final_grad_norm: last(&trajectory.grad_norms),
            final_speed: last(&trajectory.speeds),
            sensor_count: trajectory.final_positions().map_or(0, |s| s.len()),
            order,
            cost: cost.to_owned(),
            final_positions: finals,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kcover_core::geometry::build_partition;
    use kcover_core::SensorConfiguration;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig12(0.1234567890123456), 0.123456789012);
        assert_eq!(round_sig12(-98765.43210987654), -98765.4321099);
        assert_eq!(round_sig12(0.0), 0.0);
    }

    #[test]
    fn two_sensors_give_one_cell() {
        let q = ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let s =
            SensorConfiguration::new(vec![Point2::new(0.2, 0.3), Point2::new(0.8, 0.6)]).unwrap();
        let doc = PartitionDocument::from_partition(&build_partition(&s, 2, &q).unwrap());
        assert_eq!(doc.cells.len(), 1);
        assert_eq!(doc.cells[0].subset, vec![0, 1]);
        assert!(doc.adjacency.is_empty());
        let back = PartitionDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn csv_has_one_row_per_sensor_and_time() {
        let s =
            SensorConfiguration::new(vec![Point2::new(0.2, 0.3), Point2::new(0.8, 0.6)]).unwrap();
        let trajectory = Trajectory {
            times: vec![0.0, 0.5],
            positions: vec![s.clone(), s],
            h_values: vec![2.0, 1.0],
            grad_norms: vec![0.5, 0.25],
            speeds: vec![0.5, 0.25],
            converged: false,
        };
        let mut buf = Vec::new();
        write_trajectory_csv(&trajectory, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], TRAJECTORY_HEADER);
        assert_eq!(lines[3], "0.5,0,0.2,0.3,1,0.25");
    }
}
