//! The generalized coverage functional and its gradient.
//!
//! With an admissible cost the pointwise minimum over `k`-subsets is attained
//! by the `k` nearest sensors, so `H` decomposes over the order-k partition:
//! `H = Σ_T ∫_{V(T)} f(d_T(q)) φ(q) dq`. The boundary contributions to
//! `∂H/∂p_i` cancel between neighbouring cells, leaving only the interior
//! term integrated by [`gradient`].

pub(crate) mod cost;

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

pub use cost::{
    neg_detection_cost, validate_cost, BuiltinCost, CostFunction, CostValidation,
    COST_VIOLATION_TOLERANCE,
};

use crate::error::{Error, Result};
use crate::geometry::{Combinations, ConvexPolygon, OrderKPartition, Point2, SensorConfiguration};
use crate::quadrature::{cell_moments, union_moments, CellMoments, Density, QuadratureSpec};

/// Per-sensor 2-vectors, typically `∂H/∂p_i`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradientVector(pub Vec<Point2>);

impl GradientVector {
    pub fn zeros(n: usize) -> Self {
        Self(alloc::vec![Point2::ZERO; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `max_i ‖g_i‖`.
    pub fn inf_norm(&self) -> f64 {
        self.0.iter().map(|g| g.norm()).fold(0.0, f64::max)
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Point2> {
        self.0.iter()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|&g| g * factor).collect())
    }
}

impl Index<usize> for GradientVector {
    type Output = Point2;
    fn index(&self, i: usize) -> &Point2 {
        &self.0[i]
    }
}

impl IndexMut<usize> for GradientVector {
    fn index_mut(&mut self, i: usize) -> &mut Point2 {
        &mut self.0[i]
    }
}

fn check_inputs(
    partition: &OrderKPartition,
    sensors: &SensorConfiguration,
    cost: &dyn CostFunction,
) -> Result<()> {
    if cost.arity() != partition.order {
        return Err(Error::ArityMismatch {
            cost: cost.arity(),
            order: partition.order,
        });
    }
    if sensors.len() != partition.sensor_count {
        return Err(Error::InvalidArgument(format!(
            "partition was built for {} sensors, got {}",
            partition.sensor_count,
            sensors.len()
        )));
    }
    Ok(())
}

/// Sensor positions of a cell, used as split points for the quadrature.
fn cell_sensors(sensors: &SensorConfiguration, members: &[usize], out: &mut Vec<Point2>) {
    out.clear();
    out.extend(members.iter().map(|&m| sensors.get(m)));
}

/// `H = Σ_T ∫_{V(T)} f(‖q − p_t‖, t ∈ T) φ(q) dq`.
pub fn evaluate_h(
    partition: &OrderKPartition,
    sensors: &SensorConfiguration,
    cost: &dyn CostFunction,
    density: &dyn Density,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_inputs(partition, sensors, cost)?;
    let mut d = alloc::vec![0.0; partition.order];
    let mut points = Vec::with_capacity(partition.order);
    let eps = partition.tolerances.geom;
    let mut total = 0.0;
    for cell in &partition.cells {
        let members = cell.subset.members();
        cell_sensors(sensors, members, &mut points);
        let mut sum = 0.0;
        spec.for_each_node_split(&cell.polygon, &points, eps, |q, w| {
            for (slot, &p) in d.iter_mut().zip(&points) {
                *slot = q.distance(p);
            }
            sum += w * cost.value(&d) * density.value(q);
        });
        total += sum;
    }
    Ok(total)
}

/// Per-cell contributions to `H`, in cell order.
pub fn cell_costs(
    partition: &OrderKPartition,
    sensors: &SensorConfiguration,
    cost: &dyn CostFunction,
    density: &dyn Density,
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    check_inputs(partition, sensors, cost)?;
    let mut d = alloc::vec![0.0; partition.order];
    let mut points = Vec::new();
    let eps = partition.tolerances.geom;
    Ok(partition
        .cells
        .iter()
        .map(|cell| {
            cell_sensors(sensors, cell.subset.members(), &mut points);
            let mut sum = 0.0;
            spec.for_each_node_split(&cell.polygon, &points, eps, |q, w| {
                for (slot, &p) in d.iter_mut().zip(&points) {
                    *slot = q.distance(p);
                }
                sum += w * cost.value(&d) * density.value(q);
            });
            sum
        })
        .collect())
}

/// `∂H/∂p_i = Σ_{T ∋ i} ∫_{V(T)} ∂f/∂d_i · (p_i − q)/‖p_i − q‖ · φ(q) dq`.
///
/// Quadrature nodes within `ε_coincide` of a sensor contribute no direction
/// for that sensor.
pub fn gradient(
    partition: &OrderKPartition,
    sensors: &SensorConfiguration,
    cost: &dyn CostFunction,
    density: &dyn Density,
    spec: &QuadratureSpec,
) -> Result<GradientVector> {
    check_inputs(partition, sensors, cost)?;
    let k = partition.order;
    let mut grad = GradientVector::zeros(sensors.len());
    let mut d = alloc::vec![0.0; k];
    let mut points = Vec::with_capacity(k);
    let mut acc = alloc::vec![Point2::ZERO; k];
    let eps = partition.tolerances.geom;
    let coincide = partition.tolerances.coincide;
    for cell in &partition.cells {
        let members = cell.subset.members();
        cell_sensors(sensors, members, &mut points);
        acc.iter_mut().for_each(|a| *a = Point2::ZERO);
        spec.for_each_node_split(&cell.polygon, &points, eps, |q, w| {
            for (slot, &p) in d.iter_mut().zip(&points) {
                *slot = q.distance(p);
            }
            let weight = w * density.value(q);
            for m in 0..k {
                if d[m] <= coincide {
                    continue;
                }
                let coef = cost.partial(m, &d) * weight / d[m];
                acc[m] += (points[m] - q) * coef;
            }
        });
        for (m, &i) in members.iter().enumerate() {
            grad[i] += acc[m];
        }
    }
    Ok(grad)
}

/// Moments of every cell of the partition, in cell order.
pub fn partition_moments(
    partition: &OrderKPartition,
    density: &dyn Density,
    spec: &QuadratureSpec,
) -> Vec<CellMoments> {
    partition
        .cells
        .iter()
        .map(|c| cell_moments(&c.polygon, density, spec))
        .collect()
}

/// Mass and centroid of `W_i` for every sensor; `None` when sensor `i`
/// generates no cell.
pub fn region_moments(
    partition: &OrderKPartition,
    cells: &[CellMoments],
) -> Vec<Option<CellMoments>> {
    (0..partition.sensor_count)
        .map(|i| union_moments(partition.cells_of(i).map(|(c, _)| &cells[c])))
        .collect()
}

/// `∂H/∂p_i = −M_{W_i}(C_{W_i} − p_i)`, valid for the half squared-distance
/// sum. Sensors with a massless `W_i` get a zero vector.
pub fn centroid_gradient(
    partition: &OrderKPartition,
    sensors: &SensorConfiguration,
    density: &dyn Density,
    spec: &QuadratureSpec,
) -> Result<GradientVector> {
    if sensors.len() != partition.sensor_count {
        return Err(Error::InvalidArgument(format!(
            "partition was built for {} sensors, got {}",
            partition.sensor_count,
            sensors.len()
        )));
    }
    let cells = partition_moments(partition, density, spec);
    let regions = region_moments(partition, &cells);
    let mut grad = GradientVector::zeros(sensors.len());
    for (i, region) in regions.iter().enumerate() {
        match region {
            Some(m) if !m.zero_mass => {
                grad[i] = (m.centroid - sensors.get(i)) * (-m.mass);
            }
            _ => log::warn!("sensor {i} has a massless region; centroid term set to zero"),
        }
    }
    Ok(grad)
}

/// Brute-force `H`: midpoint rule on a `resolution²` grid over the domain's
/// bounding box, masked to the domain, of the minimum of `f` over every
/// `k`-subset. Independent of the partition.
pub fn evaluate_h_bruteforce(
    sensors: &SensorConfiguration,
    cost: &dyn CostFunction,
    density: &dyn Density,
    domain: &ConvexPolygon,
    order: usize,
    resolution: usize,
) -> Result<f64> {
    if resolution < 64 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution must be at least 64, got {resolution}"
        )));
    }
    if order == 0 || order > sensors.len() {
        return Err(Error::InvalidArgument(format!(
            "order {order} must be in 1..={}",
            sensors.len()
        )));
    }
    if cost.arity() != order {
        return Err(Error::ArityMismatch {
            cost: cost.arity(),
            order,
        });
    }
    let Some((lo, hi)) = domain.bounding_box() else {
        return Ok(0.0);
    };
    let subsets: Vec<Vec<usize>> = Combinations::new(sensors.len(), order).collect();
    let dx = (hi.x - lo.x) / resolution as f64;
    let dy = (hi.y - lo.y) / resolution as f64;
    let verts = domain.vertices();
    let inside = |q: Point2| {
        (0..verts.len()).all(|i| {
            let a = verts[i];
            let b = verts[(i + 1) % verts.len()];
            (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x) >= 0.0
        })
    };
    let mut dist = alloc::vec![0.0; sensors.len()];
    let mut picked = alloc::vec![0.0; order];
    let mut total = 0.0;
    for row in 0..resolution {
        let y = lo.y + (row as f64 + 0.5) * dy;
        let mut row_sum = 0.0;
        for col in 0..resolution {
            let q = Point2::new(lo.x + (col as f64 + 0.5) * dx, y);
            if !inside(q) {
                continue;
            }
            for (slot, p) in dist.iter_mut().zip(sensors.positions()) {
                *slot = q.distance(*p);
            }
            let mut best = f64::INFINITY;
            for s in &subsets {
                for (slot, &m) in picked.iter_mut().zip(s) {
                    *slot = dist[m];
                }
                best = best.min(cost.value(&picked));
            }
            row_sum += best * density.value(q);
        }
        total += row_sum;
    }
    Ok(total * dx * dy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_partition;
    use crate::quadrature::Uniform;
    use alloc::vec;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    fn config(points: &[(f64, f64)]) -> SensorConfiguration {
        SensorConfiguration::new(points.iter().map(|&p| p.into()).collect()).unwrap()
    }

    #[test]
    fn single_pair_matches_closed_form() {
        // H = ½ ∫ (‖q−p0‖² + ‖q−p1‖²) over the unit square.
        // ∫‖q − p‖² = 1/6 + ‖c − p‖² with c the centre.
        let s = config(&[(0.25, 0.5), (0.75, 0.5)]);
        let q = unit_square();
        let part = build_partition(&s, 2, &q).unwrap();
        let cost = BuiltinCost::SumSquaredHalf { arity: 2 };
        let spec = QuadratureSpec::default();
        let h = evaluate_h(&part, &s, &cost, &Uniform(1.0), &spec).unwrap();
        let expected = 0.5 * 2.0 * (1.0 / 6.0 + 0.0625);
        assert!((h - expected).abs() < 1e-14, "{h} vs {expected}");
        let doubled = evaluate_h(&part, &s, &cost, &Uniform(2.0), &spec).unwrap();
        assert!((doubled - 2.0 * h).abs() < 1e-14);
    }

    #[test]
    fn symmetric_pair_has_no_vertical_gradient() {
        let s = config(&[(0.25, 0.5), (0.75, 0.5)]);
        let part = build_partition(&s, 2, &unit_square()).unwrap();
        let cost = BuiltinCost::SumSquaredHalf { arity: 2 };
        let g = gradient(&part, &s, &cost, &Uniform(1.0), &QuadratureSpec::default()).unwrap();
        assert!(g[0].y.abs() < 1e-15 && g[1].y.abs() < 1e-15);
        // Both pulled toward the centre.
        assert!(g[0].x < 0.0 && g[1].x > 0.0);
        assert!((g[0].x + g[1].x).abs() < 1e-15);
    }

    #[test]
    fn centroid_gradient_for_two_sensors() {
        let s = config(&[(0.5, 0.5), (0.2, 0.9)]);
        let part = build_partition(&s, 2, &unit_square()).unwrap();
        let spec = QuadratureSpec::default();
        let g = centroid_gradient(&part, &s, &Uniform(1.0), &spec).unwrap();
        assert!(g[0].norm() < 1e-15);
        assert!((g[1] - Point2::new(0.3, -0.4) * -1.0).norm() < 1e-14);
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let s = config(&[(0.25, 0.5), (0.75, 0.5), (0.5, 0.8)]);
        let part = build_partition(&s, 2, &unit_square()).unwrap();
        let cost = BuiltinCost::SumDistance { arity: 3 };
        let err =
            evaluate_h(&part, &s, &cost, &Uniform(1.0), &QuadratureSpec::default()).unwrap_err();
        assert_eq!(err, Error::ArityMismatch { cost: 3, order: 2 });
        assert!(gradient(&part, &s, &cost, &Uniform(1.0), &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn bruteforce_constant_cost_is_area() {
        struct Constant;
        impl CostFunction for Constant {
            fn arity(&self) -> usize {
                2
            }
            fn value(&self, _d: &[f64]) -> f64 {
                2.5
            }
            fn partial(&self, _m: usize, _d: &[f64]) -> f64 {
                0.0
            }
        }
        let s = config(&[(0.1, 0.1), (0.4, 0.9), (0.8, 0.3)]);
        let q = ConvexPolygon::rectangle(0.0, 0.0, 2.0, 1.0).unwrap();
        let h = evaluate_h_bruteforce(&s, &Constant, &Uniform(1.0), &q, 2, 64).unwrap();
        assert!((h - 5.0).abs() < 1e-12);
        assert!(evaluate_h_bruteforce(&s, &Constant, &Uniform(1.0), &q, 2, 32).is_err());
    }

    #[test]
    fn bruteforce_single_subset_is_plain_integral() {
        let s = config(&[(0.25, 0.5), (0.75, 0.5)]);
        let cost = BuiltinCost::SumSquaredHalf { arity: 2 };
        let h = evaluate_h_bruteforce(&s, &cost, &Uniform(1.0), &unit_square(), 2, 256).unwrap();
        let expected = 1.0 / 6.0 + 0.0625;
        // Midpoint rule error for a quadratic: h²/24 · ∫ΔF = O(1e-6).
        assert!((h - expected).abs() < 1e-5);
    }

    #[test]
    fn gradient_vector_helpers() {
        let g = GradientVector(vec![Point2::new(3.0, 4.0), Point2::new(-1.0, 0.0)]);
        assert_eq!(g.inf_norm(), 5.0);
        assert_eq!(g.scaled(-2.0)[1], Point2::new(2.0, 0.0));
        assert_eq!(GradientVector::zeros(3).len(), 3);
    }
}
