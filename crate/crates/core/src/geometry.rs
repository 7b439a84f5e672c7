//! Planar primitives and order-k Voronoi partitions of a convex domain.
//!
//! Every order-k cell is the intersection of the domain with the `k·(n−k)`
//! bisector half-planes `‖q − p_v‖ ≤ ‖q − p_w‖`, `v ∈ T`, `w ∉ T`. Cells are
//! therefore convex and are stored as counterclockwise vertex lists.
//!
//! Tolerances are scale relative: see [`Tolerances::for_domain`].

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::math;

/// A point (or free vector) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x: 0.0, y: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    #[inline]
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        math::sqrt(self.norm_squared())
    }

    #[inline]
    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        self + (other - self) * t
    }
}

impl Add for Point2 {
    type Output = Point2;
    #[inline]
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Point2 {
    #[inline]
    fn add_assign(&mut self, rhs: Point2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    #[inline]
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Point2 {
    #[inline]
    fn sub_assign(&mut self, rhs: Point2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    #[inline]
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    #[inline]
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2::new(x, y)
    }
}

/// The closed half-plane `{q : normal · q ≤ offset}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    pub normal: Point2,
    pub offset: f64,
}

impl HalfPlane {
    pub fn new(normal: Point2, offset: f64) -> Result<Self> {
        if !(normal.norm_squared() > 0.0) || !normal.is_finite() || !offset.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "half-plane normal must be finite and nonzero, got {normal:?}"
            )));
        }
        Ok(Self { normal, offset })
    }

    /// Signed value `normal · q − offset`; nonpositive inside.
    #[inline]
    pub fn eval(&self, q: Point2) -> f64 {
        self.normal.dot(q) - self.offset
    }

    #[inline]
    pub fn contains(&self, q: Point2, eps: f64) -> bool {
        self.eval(q) <= eps * self.normal.norm()
    }
}

/// The half-plane of points at least as close to `a` as to `b`.
///
/// `normal = b − a`, `offset = (‖b‖² − ‖a‖²)/2`. Fails when the two points
/// are within `eps_coincide` of each other.
pub fn bisector_halfplane(a: Point2, b: Point2, eps_coincide: f64) -> Result<HalfPlane> {
    let normal = b - a;
    let distance = normal.norm();
    if !(distance > eps_coincide) {
        return Err(Error::CoincidentSensors {
            first: 0,
            second: 1,
            distance,
        });
    }
    Ok(HalfPlane {
        normal,
        offset: 0.5 * (b.norm_squared() - a.norm_squared()),
    })
}

/// Scale-relative tolerances derived from the domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Vertex dedup and containment, `1e-9·diam(Q)`.
    pub geom: f64,
    /// Minimum retained cell area, `1e-12·area(Q)`.
    pub area: f64,
    /// Minimum sensor separation, `1e-9·diam(Q)`.
    pub coincide: f64,
}

impl Tolerances {
    pub fn for_domain(domain: &ConvexPolygon) -> Self {
        let diameter = domain.diameter();
        Self {
            geom: 1e-9 * diameter,
            area: 1e-12 * domain.area(),
            coincide: 1e-9 * diameter,
        }
    }
}

/// A convex polygon with counterclockwise vertices. May be empty.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Validates and normalizes a vertex list.
    ///
    /// Clockwise input is reversed, consecutive duplicates (within
    /// `1e-9·diameter`) are removed and collinear vertices are kept.
    /// Reflex angles, non-finite coordinates and zero-area input with three
    /// or more vertices are rejected.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.is_empty() {
            return Ok(Self::empty());
        }
        if let Some(bad) = vertices.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidPolygon(format!("non-finite vertex {bad:?}")));
        }
        let mut poly = Self { vertices };
        let eps = 1e-9 * poly.diameter();
        poly.dedup(eps);
        if poly.vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 distinct vertices, got {}",
                poly.vertices.len()
            )));
        }
        let signed = poly.signed_area();
        if signed == 0.0 {
            return Err(Error::InvalidPolygon("zero area".into()));
        }
        if signed < 0.0 {
            poly.vertices.reverse();
        }
        if !poly.is_convex(eps) {
            return Err(Error::InvalidPolygon("polygon is not convex".into()));
        }
        Ok(poly)
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(alloc::vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    #[inline]
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as `(start, end)` pairs in counterclockwise order.
    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        // Shoelace relative to the first vertex for better cancellation.
        let origin = self.vertices[0];
        let mut twice = 0.0;
        for i in 1..n - 1 {
            twice += (self.vertices[i] - origin).cross(self.vertices[i + 1] - origin);
        }
        0.5 * twice
    }

    /// Shoelace area; zero for the empty polygon.
    pub fn area(&self) -> f64 {
        self.signed_area().max(0.0)
    }

    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max(a.distance(*b));
            }
        }
        best
    }

    pub fn bounding_box(&self) -> Option<(Point2, Point2)> {
        let first = *self.vertices.first()?;
        let (mut lo, mut hi) = (first, first);
        for v in &self.vertices[1..] {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        Some((lo, hi))
    }

    pub fn vertex_average(&self) -> Point2 {
        if self.vertices.is_empty() {
            return Point2::ZERO;
        }
        let sum = self.vertices.iter().fold(Point2::ZERO, |acc, &v| acc + v);
        sum * (1.0 / self.vertices.len() as f64)
    }

    /// Every turn is a left turn up to `eps` (collinear vertices allowed).
    pub fn is_convex(&self, eps: f64) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return true;
        }
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            let e1 = b - a;
            let e2 = c - b;
            e1.cross(e2) >= -eps * e1.norm().max(e2.norm())
        })
    }

    /// Point containment with a boundary band of width `eps`.
    pub fn contains(&self, q: Point2, eps: f64) -> bool {
        if self.vertices.len() < 3 {
            return false;
        }
        self.edges().all(|(a, b)| {
            let edge = b - a;
            edge.cross(q - a) >= -eps * edge.norm()
        })
    }

    /// Euclidean distance from `q` to the polygon boundary.
    pub fn boundary_distance(&self, q: Point2) -> f64 {
        self.edges()
            .map(|(a, b)| segment_distance(q, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Nearest point of the (closed) polygon to `q`.
    pub fn project(&self, q: Point2) -> Point2 {
        if self.vertices.is_empty() {
            return q;
        }
        if self.contains(q, 0.0) {
            return q;
        }
        let mut best = self.vertices[0];
        let mut best_d = f64::INFINITY;
        for (a, b) in self.edges() {
            let p = closest_on_segment(q, a, b);
            let d = (p - q).norm_squared();
            if d < best_d {
                best_d = d;
                best = p;
            }
        }
        best
    }

    fn dedup(&mut self, eps: f64) {
        let eps2 = eps * eps;
        self.vertices
            .dedup_by(|b, a| (*b - *a).norm_squared() <= eps2);
        while self.vertices.len() > 1 {
            let first = self.vertices[0];
            let last = *self.vertices.last().unwrap();
            if (first - last).norm_squared() <= eps2 {
                self.vertices.pop();
            } else {
                break;
            }
        }
    }
}

pub(crate) fn closest_on_segment(q: Point2, a: Point2, b: Point2) -> Point2 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return a;
    }
    let t = ((q - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

pub(crate) fn segment_distance(q: Point2, a: Point2, b: Point2) -> f64 {
    (closest_on_segment(q, a, b) - q).norm()
}

/// Shoelace area of a polygon; `0` when empty.
pub fn polygon_area(poly: &ConvexPolygon) -> f64 {
    poly.area()
}

/// Containment test with the `ε_geom` boundary band.
pub fn polygon_contains(poly: &ConvexPolygon, q: Point2, eps: f64) -> bool {
    poly.contains(q, eps)
}

/// `poly ∩ h` by one Sutherland–Hodgman pass, with a tolerance derived from
/// the polygon's own size.
pub fn clip(poly: &ConvexPolygon, h: &HalfPlane) -> ConvexPolygon {
    clip_with_tolerance(poly, h, 1e-9 * poly.diameter())
}

/// `poly ∩ h`. Vertices within `eps` of the boundary line count as inside;
/// results with fewer than three distinct vertices or no area are empty.
pub fn clip_with_tolerance(poly: &ConvexPolygon, h: &HalfPlane, eps: f64) -> ConvexPolygon {
    let n = poly.vertices.len();
    if n == 0 {
        return ConvexPolygon::empty();
    }
    let band = eps * h.normal.norm();
    let mut values = [0.0f64; 32];
    let mut heap_values;
    let values: &mut [f64] = if n <= values.len() {
        &mut values[..n]
    } else {
        heap_values = alloc::vec![0.0; n];
        &mut heap_values
    };
    let mut any_outside = false;
    let mut any_inside = false;
    for (s, v) in values.iter_mut().zip(&poly.vertices) {
        *s = h.eval(*v);
        any_outside |= *s > band;
        any_inside |= *s < -band;
    }
    if !any_outside {
        return poly.clone();
    }
    if !any_inside {
        return ConvexPolygon::empty();
    }

    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let j = if i + 1 == n { 0 } else { i + 1 };
        let (a, b) = (poly.vertices[i], poly.vertices[j]);
        let (sa, sb) = (values[i], values[j]);
        if sa <= band {
            out.push(a);
        }
        if (sa < -band && sb > band) || (sa > band && sb < -band) {
            out.push(a.lerp(b, sa / (sa - sb)));
        }
    }
    let mut result = ConvexPolygon { vertices: out };
    result.dedup(eps);
    if result.vertices.len() < 3 || !(result.signed_area() > eps * eps) {
        return ConvexPolygon::empty();
    }
    result
}

/// Intersection of two convex polygons.
pub fn intersect(a: &ConvexPolygon, b: &ConvexPolygon, eps: f64) -> ConvexPolygon {
    let mut out = a.clone();
    for (p, q) in b.edges() {
        if out.is_empty() {
            break;
        }
        let edge = q - p;
        // Inside of a CCW edge is to its left: cross(edge, x - p) >= 0.
        let normal = Point2::new(edge.y, -edge.x);
        let h = HalfPlane {
            normal,
            offset: normal.dot(p),
        };
        out = clip_with_tolerance(&out, &h, eps);
    }
    out
}

/// Sorted set of `k` distinct sensor indices generating a cell.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubsetIndex(Vec<usize>);

impl SubsetIndex {
    /// Sorts the indices; fails on duplicates.
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!(
                "subset has repeated indices: {members:?}"
            )));
        }
        Ok(Self(members))
    }

    #[inline]
    pub fn members(&self) -> &[usize] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }
}

/// Iterator over all `k`-subsets of `0..n` in lexicographic order.
#[derive(Clone, Debug)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        let current = if k <= n { Some((0..k).collect()) } else { None };
        Self { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.current.take()?;
        let k = current.len();
        let mut next = current.clone();
        // Find the rightmost index that can still be incremented.
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                return Some(current);
            }
        }
        Some(current)
    }
}

/// `C(n, k)` without overflow for the sizes used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Ordered sensor positions `p_0 .. p_{n-1}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SensorConfiguration {
    positions: Vec<Point2>,
}

impl SensorConfiguration {
    pub fn new(positions: Vec<Point2>) -> Result<Self> {
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sensor {i} has a non-finite position"
            )));
        }
        Ok(Self { positions })
    }

    #[inline]
    pub fn positions(&self) -> &[Point2] {
        &self.positions
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> Point2 {
        self.positions[i]
    }

    /// First pair closer than `eps`, if any.
    pub fn find_coincident(&self, eps: f64) -> Option<(usize, usize, f64)> {
        for (i, a) in self.positions.iter().enumerate() {
            for (j, b) in self.positions.iter().enumerate().skip(i + 1) {
                let d = a.distance(*b);
                if !(d > eps) {
                    return Some((i, j, d));
                }
            }
        }
        None
    }
}

/// One order-k cell and its generating subset.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderKCell {
    pub subset: SubsetIndex,
    pub polygon: ConvexPolygon,
}

/// The nonempty order-k cells of a domain, in lexicographic subset order,
/// with their adjacency.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderKPartition {
    pub cells: Vec<OrderKCell>,
    pub order: usize,
    /// `adjacency[c]` lists (ascending) the cells touching cell `c`.
    pub adjacency: Vec<Vec<usize>>,
    pub sensor_count: usize,
    pub domain: ConvexPolygon,
    pub tolerances: Tolerances,
}

fn check_separation(sensors: &SensorConfiguration, tol: &Tolerances) -> Result<()> {
    match sensors.find_coincident(tol.coincide) {
        Some((first, second, distance)) => Err(Error::CoincidentSensors {
            first,
            second,
            distance,
        }),
        None => Ok(()),
    }
}

fn cell_for_subset(
    sensors: &SensorConfiguration,
    subset: &[usize],
    domain: &ConvexPolygon,
    tol: &Tolerances,
    outsiders: &mut Vec<(f64, usize)>,
) -> Result<ConvexPolygon> {
    let n = sensors.len();
    // Nearby outsiders constrain the cell most; clipping by them first lets
    // empty cells exit early.
    let centre = subset
        .iter()
        .fold(Point2::ZERO, |acc, &v| acc + sensors.get(v))
        * (1.0 / subset.len() as f64);
    outsiders.clear();
    let mut member = subset.iter().peekable();
    for w in 0..n {
        if member.peek() == Some(&&w) {
            member.next();
            continue;
        }
        outsiders.push(((sensors.get(w) - centre).norm_squared(), w));
    }
    outsiders.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut cell = domain.clone();
    for &(_, w) in outsiders.iter() {
        for &v in subset {
            let h =
                bisector_halfplane(sensors.get(v), sensors.get(w), tol.coincide).map_err(|_| {
                    Error::CoincidentSensors {
                        first: v.min(w),
                        second: v.max(w),
                        distance: sensors.get(v).distance(sensors.get(w)),
                    }
                })?;
            cell = clip_with_tolerance(&cell, &h, tol.geom);
            if cell.is_empty() {
                return Ok(cell);
            }
        }
    }
    Ok(cell)
}

/// The order-k cell `V(T)` of `subset` within `domain`; possibly empty.
pub fn order_k_cell(
    sensors: &SensorConfiguration,
    subset: &SubsetIndex,
    domain: &ConvexPolygon,
) -> Result<ConvexPolygon> {
    if subset.is_empty() || subset.len() > sensors.len() {
        return Err(Error::InvalidArgument(format!(
            "subset size {} must be in 1..={}",
            subset.len(),
            sensors.len()
        )));
    }
    if let Some(&last) = subset.members().last() {
        if last >= sensors.len() {
            return Err(Error::InvalidArgument(format!(
                "subset index {last} out of range"
            )));
        }
    }
    let tol = Tolerances::for_domain(domain);
    check_separation(sensors, &tol)?;
    let mut scratch = Vec::new();
    cell_for_subset(sensors, subset.members(), domain, &tol, &mut scratch)
}

/// Enumerates all `C(n, k)` subsets, keeps the cells with area above
/// `ε_area`, and links cells whose boundaries touch (including single-point
/// contact).
pub fn build_partition(
    sensors: &SensorConfiguration,
    order: usize,
    domain: &ConvexPolygon,
) -> Result<OrderKPartition> {
    let n = sensors.len();
    if order == 0 || order > n {
        return Err(Error::InvalidArgument(format!(
            "order {order} must be in 1..={n}"
        )));
    }
    if domain.is_empty() {
        return Err(Error::InvalidPolygon("empty domain".into()));
    }
    let tol = Tolerances::for_domain(domain);
    check_separation(sensors, &tol)?;

    let mut cells = Vec::new();
    let mut scratch = Vec::with_capacity(n);
    for subset in Combinations::new(n, order) {
        let polygon = cell_for_subset(sensors, &subset, domain, &tol, &mut scratch)?;
        if polygon.area() > tol.area {
            cells.push(OrderKCell {
                subset: SubsetIndex(subset),
                polygon,
            });
        }
    }
    let adjacency = compute_adjacency(&cells, tol.geom);
    Ok(OrderKPartition {
        cells,
        order,
        adjacency,
        sensor_count: n,
        domain: domain.clone(),
        tolerances: tol,
    })
}

fn boxes_touch(a: &(Point2, Point2), b: &(Point2, Point2), eps: f64) -> bool {
    a.0.x <= b.1.x + eps && b.0.x <= a.1.x + eps && a.0.y <= b.1.y + eps && b.0.y <= a.1.y + eps
}

/// True when the boundaries of two polygons come within `eps`.
pub fn polygons_touch(a: &ConvexPolygon, b: &ConvexPolygon, eps: f64) -> bool {
    let near = |p: &ConvexPolygon, q: &ConvexPolygon| {
        p.vertices()
            .iter()
            .any(|&v| q.edges().any(|(s, e)| segment_distance(v, s, e) <= eps))
    };
    near(a, b) || near(b, a)
}

fn compute_adjacency(cells: &[OrderKCell], eps: f64) -> Vec<Vec<usize>> {
    let boxes: Vec<_> = cells
        .iter()
        .map(|c| c.polygon.bounding_box().unwrap_or_default())
        .collect();
    let mut adjacency = alloc::vec![Vec::new(); cells.len()];
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            if boxes_touch(&boxes[i], &boxes[j], eps)
                && polygons_touch(&cells[i].polygon, &cells[j].polygon, eps)
            {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    adjacency
}

impl OrderKPartition {
    /// Cells whose subset contains sensor `i` (the cells making up `W_i`).
    pub fn cells_of(&self, i: usize) -> impl Iterator<Item = (usize, &OrderKCell)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(move |(_, c)| c.subset.contains(i))
    }

    /// Index of the first cell (lexicographic subset order) containing `q`.
    pub fn locate(&self, q: Point2) -> Option<usize> {
        self.cells
            .iter()
            .position(|c| c.polygon.contains(q, self.tolerances.geom))
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.polygon.area()).sum()
    }

    /// Adjacent cell pairs `(a, b)` with `a < b`.
    pub fn adjacency_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for (a, list) in self.adjacency.iter().enumerate() {
            pairs.extend(list.iter().filter(|&&b| b > a).map(|&b| (a, b)));
        }
        pairs
    }
}

/// The cells of `W_i`, kept as a list: the union need not be convex.
pub fn union_cells_of(partition: &OrderKPartition, i: usize) -> Vec<&OrderKCell> {
    partition.cells_of(i).map(|(_, c)| c).collect()
}

/// Sensors sharing a cell with `i`, plus the generators of every cell
/// adjacent to one of `i`'s cells. Excludes `i` itself.
pub fn neighbors(partition: &OrderKPartition, i: usize) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for (c, cell) in partition.cells_of(i) {
        out.extend(cell.subset.members().iter().copied());
        for &other in &partition.adjacency[c] {
            out.extend(partition.cells[other].subset.members().iter().copied());
        }
    }
    out.remove(&i);
    out
}
