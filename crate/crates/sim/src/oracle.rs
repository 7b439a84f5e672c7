//! Brute-force reference implementations for tests.
//!
//! Nothing here calls the partition, clipping or quadrature code of
//! `kcover-core`; points are plain `[f64; 2]` arrays and polygons are vertex
//! lists. Only [`CostFunction`] and [`Density`] are shared, since they define
//! the integrand being checked.

use kcover_core::{CostFunction, Density, GradientVector, Point2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("grid resolution must be at least 64, got {0}")]
    Resolution(usize),
    #[error("need at least 10^4 Monte Carlo samples, got {0}")]
    Samples(usize),
    #[error("finite-difference step {step} outside [1e-7, 1e-3]·diam = [{lo}, {hi}]")]
    Step { step: f64, lo: f64, hi: f64 },
    #[error("order {order} needs between 1 and {n} sensors")]
    Order { order: usize, n: usize },
}

/// Sampling grid for the brute-force integrals: cell centres of a
/// `resolution²` grid over the domain's bounding box, optionally jittered
/// within each grid cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    resolution: usize,
    jitter_seed: Option<u64>,
}

impl GridSpec {
    pub fn new(resolution: usize, jitter_seed: Option<u64>) -> Result<Self, OracleError> {
        if resolution < 64 {
            return Err(OracleError::Resolution(resolution));
        }
        Ok(Self {
            resolution,
            jitter_seed,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Calls `f(point, cell_area)` for every sample inside `domain`.
    fn for_each_sample(&self, domain: &[[f64; 2]], mut f: impl FnMut([f64; 2], f64)) {
        let (lo, hi) = bounds(domain);
        let n = self.resolution;
        let dx = (hi[0] - lo[0]) / n as f64;
        let dy = (hi[1] - lo[1]) / n as f64;
        let mut rng = self.jitter_seed.map(ChaCha8Rng::seed_from_u64);
        for row in 0..n {
            for col in 0..n {
                let (ox, oy) = match rng.as_mut() {
                    Some(r) => (r.gen::<f64>(), r.gen::<f64>()),
                    None => (0.5, 0.5),
                };
                let q = [
                    lo[0] + (col as f64 + ox) * dx,
                    lo[1] + (row as f64 + oy) * dy,
                ];
                if inside(domain, q) {
                    f(q, dx * dy);
                }
            }
        }
    }
}

fn bounds(poly: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    poly.iter().fold(
        ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
        |(lo, hi), p| {
            (
                [lo[0].min(p[0]), lo[1].min(p[1])],
                [hi[0].max(p[0]), hi[1].max(p[1])],
            )
        },
    )
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Point in a convex polygon of either orientation, boundary included.
pub fn inside(poly: &[[f64; 2]], q: [f64; 2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let (mut pos, mut neg) = (false, false);
    for i in 0..n {
        let c = cross(poly[i], poly[(i + 1) % n], q);
        pos |= c > 0.0;
        neg |= c < 0.0;
    }
    !(pos && neg)
}

/// Shoelace area (absolute).
pub fn area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        .abs()
        * 0.5
}

/// Area of the intersection of two convex polygons, by clipping `a` with
/// every edge line of `b` (both taken counterclockwise).
pub fn intersection_area(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let (alo, ahi) = bounds(a);
    let (blo, bhi) = bounds(b);
    if alo[0] > bhi[0] || blo[0] > ahi[0] || alo[1] > bhi[1] || blo[1] > ahi[1] {
        return 0.0;
    }
    let ccw = |p: &[[f64; 2]]| {
        let mut v = p.to_vec();
        let signed: f64 = (0..v.len())
            .map(|i| {
                let (s, t) = (v[i], v[(i + 1) % v.len()]);
                s[0] * t[1] - s[1] * t[0]
            })
            .sum();
        if signed < 0.0 {
            v.reverse();
        }
        v
    };
    let mut subject = ccw(a);
    let clipper = ccw(b);
    for i in 0..clipper.len() {
        let (e0, e1) = (clipper[i], clipper[(i + 1) % clipper.len()]);
        let input = std::mem::take(&mut subject);
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (sp, sq) = (cross(e0, e1, p), cross(e0, e1, q));
            if sp >= 0.0 {
                subject.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                subject.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        if subject.len() < 3 {
            return 0.0;
        }
    }
    area(&subject)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Lexicographic `k`-subsets of `0..n`, independent of the geometry module.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn check_order(n: usize, k: usize) -> Result<(), OracleError> {
    if k == 0 || k > n {
        return Err(OracleError::Order { order: k, n });
    }
    Ok(())
}

/// Relative gap below which two subset costs are treated as equal.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Reusable subset table for repeated classification.
pub struct Classifier {
    subsets: Vec<Vec<usize>>,
    sensors: Vec<[f64; 2]>,
    scratch: Vec<f64>,
}

impl Classifier {
    pub fn new(sensors: &[Point2], order: usize) -> Result<Self, OracleError> {
        check_order(sensors.len(), order)?;
        Ok(Self {
            subsets: subsets(sensors.len(), order),
            sensors: sensors.iter().map(|p| [p.x, p.y]).collect(),
            scratch: vec![0.0; order],
        })
    }

    /// `argmin_T f(d_T(q))` with its value. Values within a relative
    /// [`TIE_TOLERANCE`] count as ties and go to the lexicographically
    /// smallest subset.
    pub fn classify(&mut self, q: [f64; 2], cost: &dyn CostFunction) -> (&[usize], f64) {
        let mut best = (0, f64::INFINITY);
        for (s, subset) in self.subsets.iter().enumerate() {
            for (slot, &i) in self.scratch.iter_mut().zip(subset) {
                *slot = dist(q, self.sensors[i]);
            }
            let v = cost.value(&self.scratch);
            if s == 0 || v < best.1 - TIE_TOLERANCE * best.1.abs() {
                best = (s, v);
            }
        }
        (&self.subsets[best.0], best.1)
    }
}

/// One-shot [`Classifier::classify`].
pub fn classify_point(
    q: Point2,
    sensors: &[Point2],
    order: usize,
    cost: &dyn CostFunction,
) -> Result<Vec<usize>, OracleError> {
    let mut c = Classifier::new(sensors, order)?;
    Ok(c.classify([q.x, q.y], cost).0.to_vec())
}

fn raw_polygon(domain: &[Point2]) -> Vec<[f64; 2]> {
    domain.iter().map(|p| [p.x, p.y]).collect()
}

/// `∫_Q min_T f(d_T(q)) φ(q) dq` on the grid.
pub fn grid_h(
    sensors: &[Point2],
    cost: &dyn CostFunction,
    density: &dyn Density,
    domain: &[Point2],
    order: usize,
    grid: &GridSpec,
) -> Result<f64, OracleError> {
    let mut classifier = Classifier::new(sensors, order)?;
    let poly = raw_polygon(domain);
    let mut total = 0.0;
    grid.for_each_sample(&poly, |q, cell| {
        let (_, v) = classifier.classify(q, cost);
        total += v * density.value(Point2::new(q[0], q[1])) * cell;
    });
    Ok(total)
}

/// Central differences of [`grid_h`] in every sensor coordinate.
pub fn fd_gradient(
    sensors: &[Point2],
    cost: &dyn CostFunction,
    density: &dyn Density,
    domain: &[Point2],
    order: usize,
    step: f64,
    grid: &GridSpec,
) -> Result<GradientVector, OracleError> {
    let poly = raw_polygon(domain);
    let diam = poly
        .iter()
        .flat_map(|a| poly.iter().map(move |b| dist(*a, *b)))
        .fold(0.0, f64::max);
    let (min_step, max_step) = (1e-7 * diam, 1e-3 * diam);
    if !(step >= min_step && step <= max_step) {
        return Err(OracleError::Step {
            step,
            lo: min_step,
            hi: max_step,
        });
    }
    let mut grad = GradientVector::zeros(sensors.len());
    let mut moved = sensors.to_vec();
    for i in 0..sensors.len() {
        for axis in 0..2 {
            let shift = |p: Point2, by: f64| {
                if axis == 0 {
                    Point2::new(p.x + by, p.y)
                } else {
                    Point2::new(p.x, p.y + by)
                }
            };
            moved[i] = shift(sensors[i], step);
            let up = grid_h(&moved, cost, density, domain, order, grid)?;
            moved[i] = shift(sensors[i], -step);
            let down = grid_h(&moved, cost, density, domain, order, grid)?;
            moved[i] = sensors[i];
            let d = (up - down) / (2.0 * step);
            if axis == 0 {
                grad[i].x = d;
            } else {
                grad[i].y = d;
            }
        }
    }
    Ok(grad)
}

/// Monte Carlo mass and centroid with their standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McMoments {
    pub mass: f64,
    pub centroid: Point2,
    pub mass_stderr: f64,
    pub centroid_stderr: Point2,
}

/// Rejection sampling in the polygon's bounding box.
pub fn mc_moments(
    poly: &[Point2],
    density: &dyn Density,
    samples: usize,
    seed: u64,
) -> Result<McMoments, OracleError> {
    if samples < 10_000 {
        return Err(OracleError::Samples(samples));
    }
    let raw = raw_polygon(poly);
    if raw.len() < 3 || area(&raw) == 0.0 {
        return Ok(McMoments {
            mass: 0.0,
            centroid: Point2::ZERO,
            mass_stderr: 0.0,
            centroid_stderr: Point2::ZERO,
        });
    }
    let (lo, hi) = bounds(&raw);
    let box_area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Running sums of w, w², w·x, (w·x)², w·y, (w·y)² with w = φ·1_poly.
    let mut s = [0.0f64; 6];
    for _ in 0..samples {
        let q = [
            lo[0] + (hi[0] - lo[0]) * rng.gen::<f64>(),
            lo[1] + (hi[1] - lo[1]) * rng.gen::<f64>(),
        ];
        if !inside(&raw, q) {
            continue;
        }
        let w = density.value(Point2::new(q[0], q[1]));
        let (wx, wy) = (w * q[0], w * q[1]);
        s[0] += w;
        s[1] += w * w;
        s[2] += wx;
        s[3] += wx * wx;
        s[4] += wy;
        s[5] += wy * wy;
    }
    let m = samples as f64;
    let mean = |sum: f64| sum / m;
    let stderr = |sum: f64, sq: f64| ((sq / m - (sum / m).powi(2)).max(0.0) / m).sqrt();
    let mass = box_area * mean(s[0]);
    let mass_stderr = box_area * stderr(s[0], s[1]);
    if mass == 0.0 {
        return Ok(McMoments {
            mass,
            centroid: Point2::ZERO,
            mass_stderr,
            centroid_stderr: Point2::ZERO,
        });
    }
    let cx = s[2] / s[0];
    let cy = s[4] / s[0];
    // First-order error of a ratio estimator.
    let ratio_err = |num: f64, num_sq: f64, c: f64| {
        let rel_num = stderr(num, num_sq) / mean(num).abs().max(f64::MIN_POSITIVE);
        let rel_den = stderr(s[0], s[1]) / mean(s[0]);
        c.abs() * (rel_num * rel_num + rel_den * rel_den).sqrt()
    };
    Ok(McMoments {
        mass,
        centroid: Point2::new(cx, cy),
        mass_stderr,
        centroid_stderr: Point2::new(ratio_err(s[2], s[3], cx), ratio_err(s[4], s[5], cy)),
    })
}

/// `e^{-z} I0(z)` by direct series, for moderate `z` (≲ 700).
fn i0_scaled_series(z: f64) -> f64 {
    let y = 0.25 * z * z;
    let mut term = (-z).exp();
    let mut sum = term;
    let mut m = 1.0;
    loop {
        term *= y / (m * m);
        sum += term;
        if term < 1e-17 * sum && m > z {
            return sum;
        }
        m += 1.0;
    }
}

/// Gauss–Legendre nodes on `[-1, 1]` by Newton iteration on `P_n`.
fn legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `Q1(α, β)` by composite 20-point Gauss–Legendre quadrature of its
/// defining integral over `[β, max(α, β) + 40]`.
pub fn marcum_q1_integral(alpha: f64, beta: f64) -> f64 {
    let nodes = legendre_nodes(20);
    let upper = alpha.max(beta) + 40.0;
    let panels = ((upper - beta) / 0.5).ceil() as usize;
    let width = (upper - beta) / panels as f64;
    // x I0(αx) e^{-(x²+α²)/2} = x e^{-(x-α)²/2} · e^{-αx} I0(αx).
    let g = |x: f64| x * (-0.5 * (x - alpha) * (x - alpha)).exp() * i0_scaled_series(alpha * x);
    let mut total = 0.0;
    for p in 0..panels {
        let a = beta + p as f64 * width;
        let mid = a + 0.5 * width;
        total += nodes
            .iter()
            .map(|&(t, w)| w * g(mid + 0.5 * width * t))
            .sum::<f64>()
            * 0.5
            * width;
    }
    total
}
