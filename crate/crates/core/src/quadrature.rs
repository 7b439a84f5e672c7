//! Density-weighted integration over convex polygons.
//!
//! Polygons are fan-triangulated and each triangle is integrated with a
//! symmetric Gauss rule after uniform subdivision. Integrands with a cone
//! point (such as `‖q − p‖` at `q = p`) can instead be integrated with the
//! triangulation split at those points: triangles then carry the
//! singular point as a vertex and use a collapsed Gauss–Legendre product
//! rule, whose Jacobian absorbs the singularity.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{clip, ConvexPolygon, HalfPlane, Point2};
use crate::math;

/// A nonnegative density `φ` on the plane.
pub trait Density {
    fn value(&self, q: Point2) -> f64;
}

impl<F: Fn(Point2) -> f64> Density for F {
    fn value(&self, q: Point2) -> f64 {
        self(q)
    }
}

/// Constant density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Uniform(pub f64);

impl Default for Uniform {
    fn default() -> Self {
        Uniform(1.0)
    }
}

impl Density for Uniform {
    #[inline]
    fn value(&self, _q: Point2) -> f64 {
        self.0
    }
}

/// Scales another density by a constant factor.
#[derive(Clone, Copy, Debug)]
pub struct Scaled<D> {
    pub inner: D,
    pub factor: f64,
}

impl<D: Density> Density for Scaled<D> {
    fn value(&self, q: Point2) -> f64 {
        self.factor * self.inner.value(q)
    }
}

/// Barycentric node `(l1, l2, l3)` with a weight; weights of a rule sum to 1.
type Node = ([f64; 3], f64);

fn push_orbit_3(nodes: &mut Vec<Node>, a: f64, w: f64) {
    let b = 0.5 * (1.0 - a);
    nodes.push(([a, b, b], w));
    nodes.push(([b, a, b], w));
    nodes.push(([b, b, a], w));
}

fn push_orbit_6(nodes: &mut Vec<Node>, a: f64, b: f64, w: f64) {
    let c = 1.0 - a - b;
    for l in [
        [a, b, c],
        [a, c, b],
        [b, a, c],
        [b, c, a],
        [c, a, b],
        [c, b, a],
    ] {
        nodes.push((l, w));
    }
}

fn symmetric_rule(degree: u32) -> Option<(u32, Vec<Node>)> {
    let mut nodes = Vec::new();
    let third = 1.0 / 3.0;
    match degree {
        0..=2 => {
            push_orbit_3(&mut nodes, 2.0 / 3.0, third);
            Some((2, nodes))
        }
        3..=5 => {
            // Radon's 7-point rule.
            let s15 = math::sqrt(15.0);
            nodes.push(([third, third, third], 9.0 / 40.0));
            let a1 = (9.0 + 2.0 * s15) / 21.0;
            let a2 = (9.0 - 2.0 * s15) / 21.0;
            push_orbit_3(&mut nodes, a1, (155.0 - s15) / 1200.0);
            push_orbit_3(&mut nodes, a2, (155.0 + s15) / 1200.0);
            Some((5, nodes))
        }
        6..=8 => {
            // Dunavant's 16-point rule of degree 8.
            nodes.push(([third, third, third], 0.144_315_607_677_787));
            push_orbit_3(&mut nodes, 0.081_414_823_414_554, 0.095_091_634_267_285);
            push_orbit_3(&mut nodes, 0.658_861_384_496_480, 0.103_217_370_534_718);
            push_orbit_3(&mut nodes, 0.898_905_543_365_938, 0.032_458_497_623_198);
            push_orbit_6(
                &mut nodes,
                0.008_394_777_409_958,
                0.263_112_829_634_638,
                0.027_230_314_174_435,
            );
            Some((8, nodes))
        }
        _ => None,
    }
}

/// Gauss–Legendre nodes and weights mapped to `[0, 1]` (weights sum to 1).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Newton iteration from the Chebyshev-like initial guess.
        let mut x = math::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut derivative = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            derivative = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / derivative;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out.reverse();
    out
}

/// Quadrature configuration and its precomputed node tables.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    rule_degree: u32,
    max_subdivision: u32,
    /// Symmetric rule, or `None` when a collapsed product rule is used.
    symmetric: Option<Vec<Node>>,
    /// Collapsed product rule for the generic case (`rule_degree > 8`).
    product: Vec<(f64, f64)>,
    /// Collapsed product rule for triangles with a singular apex.
    singular: Vec<(f64, f64)>,
}

impl Default for QuadratureSpec {
    /// Degree-8 rule with one level of uniform subdivision.
    fn default() -> Self {
        Self::new(8, 1).expect("default quadrature spec is valid")
    }
}

impl QuadratureSpec {
    /// `rule_degree ≥ 2` is the polynomial exactness per triangle;
    /// `max_subdivision` levels split every triangle into `4^levels`.
    pub fn new(rule_degree: u32, max_subdivision: u32) -> Result<Self> {
        if rule_degree < 2 {
            return Err(Error::InvalidArgument(format!(
                "rule degree must be at least 2, got {rule_degree}"
            )));
        }
        if max_subdivision > 6 {
            return Err(Error::InvalidArgument(format!(
                "subdivision level {max_subdivision} exceeds 6"
            )));
        }
        let (degree, symmetric) = match symmetric_rule(rule_degree) {
            Some((d, nodes)) => (d, Some(nodes)),
            None => (rule_degree, None),
        };
        // The collapse Jacobian adds one power of t: n ≥ (degree + 2) / 2.
        let per_axis = (degree as usize + 2).div_ceil(2);
        let singular_axis = per_axis << max_subdivision;
        Ok(Self {
            rule_degree: degree,
            max_subdivision,
            symmetric,
            product: gauss_legendre(per_axis),
            singular: gauss_legendre(singular_axis),
        })
    }

    /// Degree actually integrated exactly (at least the requested one).
    pub fn rule_degree(&self) -> u32 {
        self.rule_degree
    }

    pub fn max_subdivision(&self) -> u32 {
        self.max_subdivision
    }

    /// Visits every node of a triangle as `(point, weight)`; weights sum to
    /// the triangle's area.
    pub fn for_each_triangle_node<F: FnMut(Point2, f64)>(&self, tri: &[Point2; 3], f: &mut F) {
        let area = 0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]).abs();
        if area == 0.0 {
            return;
        }
        let m = 1usize << self.max_subdivision;
        let step_u = (tri[1] - tri[0]) * (1.0 / m as f64);
        let step_v = (tri[2] - tri[0]) * (1.0 / m as f64);
        let sub_area = area / (m * m) as f64;
        for i in 0..m {
            for j in 0..m - i {
                let base = tri[0] + step_u * i as f64 + step_v * j as f64;
                let up = [base, base + step_u, base + step_v];
                self.visit_rule(&up, sub_area, f);
                if i + j + 1 < m {
                    let apex = base + step_u + step_v;
                    let down = [apex, base + step_v, base + step_u];
                    self.visit_rule(&down, sub_area, f);
                }
            }
        }
    }

    fn visit_rule<F: FnMut(Point2, f64)>(&self, tri: &[Point2; 3], area: f64, f: &mut F) {
        match &self.symmetric {
            Some(nodes) => {
                for (l, w) in nodes {
                    let q = Point2::new(
                        l[0] * tri[0].x + l[1] * tri[1].x + l[2] * tri[2].x,
                        l[0] * tri[0].y + l[1] * tri[1].y + l[2] * tri[2].y,
                    );
                    f(q, w * area);
                }
            }
            None => collapsed(&self.product, tri, area, f),
        }
    }

    /// Nodes for a triangle whose vertex `tri[0]` is a singular point.
    pub fn for_each_apex_node<F: FnMut(Point2, f64)>(&self, tri: &[Point2; 3], f: &mut F) {
        let area = 0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]).abs();
        if area > 0.0 {
            collapsed(&self.singular, tri, area, f);
        }
    }

    /// Visits all nodes of a polygon (fan triangulation).
    pub fn for_each_node<F: FnMut(Point2, f64)>(&self, poly: &ConvexPolygon, mut f: F) {
        for tri in triangulate(poly) {
            self.for_each_triangle_node(&tri, &mut f);
        }
    }

    /// Visits all nodes of a polygon after splitting it at `singular`
    /// points lying in it; triangles touching a singular point use the
    /// collapsed rule with that point as apex.
    pub fn for_each_node_split<F: FnMut(Point2, f64)>(
        &self,
        poly: &ConvexPolygon,
        singular: &[Point2],
        eps: f64,
        mut f: F,
    ) {
        for (tri, apex) in split_triangulation(poly, singular, eps) {
            if apex {
                self.for_each_apex_node(&tri, &mut f);
            } else {
                self.for_each_triangle_node(&tri, &mut f);
            }
        }
    }
}

/// Collapsed (Duffy) product rule: `q = v + t·((a − v) + s·(b − a))`.
fn collapsed<F: FnMut(Point2, f64)>(gl: &[(f64, f64)], tri: &[Point2; 3], area: f64, f: &mut F) {
    let [v, a, b] = *tri;
    let va = a - v;
    let ab = b - a;
    for &(t, wt) in gl {
        for &(s, ws) in gl {
            let q = v + (va + ab * s) * t;
            f(q, 2.0 * area * t * wt * ws);
        }
    }
}

/// Fan triangulation from vertex 0; empty for fewer than three vertices.
pub fn triangulate(poly: &ConvexPolygon) -> Vec<[Point2; 3]> {
    let v = poly.vertices();
    if v.len() < 3 {
        return Vec::new();
    }
    (1..v.len() - 1).map(|i| [v[0], v[i], v[i + 1]]).collect()
}

fn tri_area(t: &[Point2; 3]) -> f64 {
    0.5 * (t[1] - t[0]).cross(t[2] - t[0])
}

/// Triangulation in which every singular point inside the polygon is the
/// apex (first vertex, flagged `true`) of the triangles around it.
///
/// The polygon is cut into the nearest-point regions of the singular
/// points and each region is fanned from its point, so no singular point
/// sits near the interior of a triangle edge. Fan triangles are further
/// split at the foot of the apex on their base, which keeps the angular
/// integrand smooth when the point is close to an edge.
fn split_triangulation(
    poly: &ConvexPolygon,
    singular: &[Point2],
    eps: f64,
) -> Vec<([Point2; 3], bool)> {
    let mut marks: Vec<Point2> = Vec::new();
    for &s in singular {
        // Points outside, or within eps of the boundary, are left alone.
        if poly.contains(s, -eps) && marks.iter().all(|m| m.distance(s) > eps) {
            marks.push(s);
        }
    }
    if marks.is_empty() {
        return triangulate(poly).into_iter().map(|t| (t, false)).collect();
    }
    let thin = eps * eps;
    let mut out = Vec::new();
    for (a, &m) in marks.iter().enumerate() {
        let mut region = poly.clone();
        for (b, &other) in marks.iter().enumerate() {
            if a != b {
                let normal = other - m;
                let h = HalfPlane {
                    normal,
                    offset: 0.5 * (other.norm_squared() - m.norm_squared()),
                };
                region = clip(&region, &h);
            }
        }
        for (u, v) in region.edges() {
            let base = v - u;
            let along = (m - u).dot(base) / base.norm_squared();
            let pieces: &[[Point2; 3]] = if along > 1e-3 && along < 1.0 - 1e-3 {
                let foot = u + base * along;
                &[[m, u, foot], [m, foot, v]]
            } else {
                &[[m, u, v]]
            };
            out.extend(
                pieces
                    .iter()
                    .filter(|t| tri_area(t) > thin)
                    .map(|&t| (t, true)),
            );
        }
    }
    out
}

/// `∫_poly g(q) φ(q) dq`.
pub fn integrate<G: Fn(Point2) -> f64>(
    poly: &ConvexPolygon,
    g: G,
    density: &dyn Density,
    spec: &QuadratureSpec,
) -> f64 {
    let mut total = 0.0;
    spec.for_each_node(poly, |q, w| total += w * g(q) * density.value(q));
    total
}

/// Mass and centroid of a cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellMoments {
    pub mass: f64,
    pub centroid: Point2,
    /// Set when the mass is zero; the centroid is then a vertex average.
    pub zero_mass: bool,
}

/// `M = ∫ φ`, `C = ∫ q φ / M`.
pub fn cell_moments(
    poly: &ConvexPolygon,
    density: &dyn Density,
    spec: &QuadratureSpec,
) -> CellMoments {
    let mut mass = 0.0;
    let mut first = Point2::ZERO;
    spec.for_each_node(poly, |q, w| {
        let m = w * density.value(q);
        mass += m;
        first += q * m;
    });
    if mass > 0.0 {
        CellMoments {
            mass,
            centroid: first * (1.0 / mass),
            zero_mass: false,
        }
    } else {
        CellMoments {
            mass: 0.0,
            centroid: poly.vertex_average(),
            zero_mass: true,
        }
    }
}

/// Moments of a union of disjoint cells: `M = Σ M_c`, `C = Σ M_c C_c / M`.
///
/// With zero total mass the centroid is the plain average of the cell
/// centroids and `zero_mass` is set. Returns `None` for no cells.
pub fn union_moments<'a, I>(cells: I) -> Option<CellMoments>
where
    I: IntoIterator<Item = &'a CellMoments>,
{
    let mut mass = 0.0;
    let mut first = Point2::ZERO;
    let mut plain = Point2::ZERO;
    let mut count = 0usize;
    for c in cells {
        mass += c.mass;
        first += c.centroid * c.mass;
        plain += c.centroid;
        count += 1;
    }
    if count == 0 {
        return None;
    }
    Some(if mass > 0.0 {
        CellMoments {
            mass,
            centroid: first * (1.0 / mass),
            zero_mass: false,
        }
    } else {
        CellMoments {
            mass: 0.0,
            centroid: plain * (1.0 / count as f64),
            zero_mass: true,
        }
    })
}
