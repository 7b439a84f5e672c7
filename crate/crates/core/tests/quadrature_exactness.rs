use std::collections::BTreeMap;

use kcover_core::geometry::{ConvexPolygon, Point2};
use kcover_core::quadrature::{cell_moments, integrate, QuadratureSpec, Uniform};
use proptest::prelude::*;

/// Polynomial in barycentric coordinates: exponents (a, b, c) → coefficient.
type Bary = BTreeMap<(u32, u32, u32), f64>;

fn mul(p: &Bary, q: &Bary) -> Bary {
    let mut out = Bary::new();
    for (&(a, b, c), &u) in p {
        for (&(d, e, f), &v) in q {
            *out.entry((a + d, b + e, c + f)).or_default() += u * v;
        }
    }
    out
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `∫_T x^i y^j` via the identity `∫ λ1^a λ2^b λ3^c = 2A a! b! c! / (a+b+c+2)!`.
fn exact_monomial(tri: &[Point2; 3], i: u32, j: u32) -> f64 {
    let area = 0.5 * ((tri[1] - tri[0]).cross(tri[2] - tri[0])).abs();
    let x: Bary = [
        ((1, 0, 0), tri[0].x),
        ((0, 1, 0), tri[1].x),
        ((0, 0, 1), tri[2].x),
    ]
    .into();
    let y: Bary = [
        ((1, 0, 0), tri[0].y),
        ((0, 1, 0), tri[1].y),
        ((0, 0, 1), tri[2].y),
    ]
    .into();
    let mut p: Bary = [((0, 0, 0), 1.0)].into();
    for _ in 0..i {
        p = mul(&p, &x);
    }
    for _ in 0..j {
        p = mul(&p, &y);
    }
    p.iter()
        .map(|(&(a, b, c), &coef)| {
            coef * 2.0 * area * factorial(a) * factorial(b) * factorial(c)
                / factorial(a + b + c + 2)
        })
        .sum()
}

fn triangle_strategy() -> impl Strategy<Value = [Point2; 3]> {
    prop::array::uniform3((-1.0..1.0f64, -1.0..1.0f64))
        .prop_map(|v| v.map(Point2::from))
        .prop_filter("degenerate", |t| {
            (t[1] - t[0]).cross(t[2] - t[0]).abs() > 1e-2
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rules_integrate_their_degree_exactly(tri in triangle_strategy(), degree in prop::sample::select(vec![2u32, 5, 8, 11]), level in 0u32..=2) {
        let spec = QuadratureSpec::new(degree, level).unwrap();
        let poly = ConvexPolygon::new(tri.to_vec()).unwrap();
        for total in 0..=spec.rule_degree() {
            for i in 0..=total {
                let j = total - i;
                let got = integrate(&poly, |q| q.x.powi(i as i32) * q.y.powi(j as i32), &Uniform(1.0), &spec);
                let want = exact_monomial(&tri, i, j);
                prop_assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "x^{} y^{}: {} vs {}", i, j, got, want);
            }
        }
    }

    #[test]
    fn moments_of_a_triangle(tri in triangle_strategy()) {
        let poly = ConvexPolygon::new(tri.to_vec()).unwrap();
        let m = cell_moments(&poly, &Uniform(2.0), &QuadratureSpec::default());
        let centroid = (tri[0] + tri[1] + tri[2]) * (1.0 / 3.0);
        prop_assert!((m.mass - 2.0 * poly.area()).abs() < 1e-13);
        prop_assert!(m.centroid.distance(centroid) < 1e-13);
    }
}

#[test]
fn polygon_moments_match_shoelace_centroid() {
    let hex: Vec<Point2> = (0..6)
        .map(|i| {
            let a = std::f64::consts::PI / 3.0 * i as f64 + 0.1;
            Point2::new(2.0 + a.cos(), -1.0 + 0.5 * a.sin())
        })
        .collect();
    let poly = ConvexPolygon::new(hex.clone()).unwrap();
    let (mut area, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..hex.len() {
        let (p, q) = (hex[i], hex[(i + 1) % hex.len()]);
        let c = p.cross(q);
        area += 0.5 * c;
        cx += (p.x + q.x) * c / 6.0;
        cy += (p.y + q.y) * c / 6.0;
    }
    let m = cell_moments(&poly, &Uniform(1.0), &QuadratureSpec::default());
    assert!((m.mass - area).abs() < 1e-13);
    assert!((m.centroid.x - cx / area).abs() < 1e-13);
    assert!((m.centroid.y - cy / area).abs() < 1e-13);
}
