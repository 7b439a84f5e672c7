use kcover_core::geometry::{
    bisector_halfplane, build_partition, clip, intersect, polygon_area, ConvexPolygon, HalfPlane,
    Point2, SensorConfiguration,
};
use proptest::prelude::*;

fn square() -> ConvexPolygon {
    ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap()
}

fn sensors_strategy(max_n: usize) -> impl Strategy<Value = Vec<Point2>> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 2..=max_n).prop_filter_map(
        "sensors too close",
        |raw| {
            let pts: Vec<Point2> = raw.into_iter().map(Point2::from).collect();
            let separated = pts
                .iter()
                .enumerate()
                .all(|(i, a)| pts[i + 1..].iter().all(|b| a.distance(*b) > 1e-3));
            separated.then_some(pts)
        },
    )
}

fn k_nearest(q: Point2, pts: &[Point2], k: usize) -> (Vec<usize>, f64) {
    let mut order: Vec<(f64, usize)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| (q.distance(*p), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let gap = if k < pts.len() {
        order[k].0 - order[k - 1].0
    } else {
        f64::INFINITY
    };
    let mut chosen: Vec<usize> = order[..k].iter().map(|&(_, i)| i).collect();
    chosen.sort_unstable();
    (chosen, gap)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cells_tile_the_domain(pts in sensors_strategy(12), k in 1usize..=3) {
        prop_assume!(k <= pts.len());
        let q = square();
        let s = SensorConfiguration::new(pts).unwrap();
        let part = build_partition(&s, k, &q).unwrap();
        let total: f64 = part.cells.iter().map(|c| c.polygon.area()).sum();
        prop_assert!((total - 1.0).abs() < 1e-9, "area sum {}", total);
        for (i, a) in part.cells.iter().enumerate() {
            prop_assert!(a.polygon.is_convex(1e-9));
            for v in a.polygon.vertices() {
                prop_assert!(q.contains(*v, 1e-9));
            }
            for b in &part.cells[i + 1..] {
                let overlap = intersect(&a.polygon, &b.polygon, 1e-9).area();
                prop_assert!(overlap < 1e-9, "overlap {}", overlap);
            }
        }
    }

    #[test]
    fn cells_hold_their_k_nearest(pts in sensors_strategy(10), k in 1usize..=3, probes in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 50)) {
        prop_assume!(k <= pts.len());
        let s = SensorConfiguration::new(pts.clone()).unwrap();
        let part = build_partition(&s, k, &square()).unwrap();
        for probe in probes {
            let q = Point2::from(probe);
            let (nearest, gap) = k_nearest(q, &pts, k);
            if gap < 1e-7 {
                continue;
            }
            let cell = part.locate(q).expect("every point lies in some cell");
            prop_assert_eq!(part.cells[cell].subset.members(), &nearest[..]);
        }
    }

    #[test]
    fn relabelling_sensors_relabels_cells(pts in sensors_strategy(8), k in 1usize..=3, shift in 1usize..8) {
        prop_assume!(k <= pts.len());
        let n = pts.len();
        // Sensor i moves to slot (i + shift) mod n.
        let mut moved = pts.clone();
        for (i, p) in pts.iter().enumerate() {
            moved[(i + shift) % n] = *p;
        }
        let a = build_partition(&SensorConfiguration::new(pts).unwrap(), k, &square()).unwrap();
        let b = build_partition(&SensorConfiguration::new(moved).unwrap(), k, &square()).unwrap();
        prop_assert_eq!(a.cells.len(), b.cells.len());
        for cell in &a.cells {
            let mut mapped: Vec<usize> = cell.subset.members().iter().map(|&i| (i + shift) % n).collect();
            mapped.sort_unstable();
            let twin = b.cells.iter().find(|c| c.subset.members() == &mapped[..]);
            prop_assert!(twin.is_some(), "no cell for {:?}", mapped);
            prop_assert!((twin.unwrap().polygon.area() - cell.polygon.area()).abs() < 1e-12);
        }
    }

    #[test]
    fn clipping_splits_area(a in (0.0..1.0f64, 0.0..1.0f64), b in (0.0..1.0f64, 0.0..1.0f64)) {
        let (a, b) = (Point2::from(a), Point2::from(b));
        prop_assume!(a.distance(b) > 1e-6);
        let h = bisector_halfplane(a, b, 1e-12).unwrap();
        let flipped = HalfPlane::new(-h.normal, -h.offset).unwrap();
        let q = square();
        let sum = polygon_area(&clip(&q, &h)) + polygon_area(&clip(&q, &flipped));
        prop_assert!((sum - 1.0).abs() < 1e-12, "{}", sum);
    }

    #[test]
    fn adjacency_is_symmetric(pts in sensors_strategy(9), k in 1usize..=3) {
        prop_assume!(k <= pts.len());
        let part = build_partition(&SensorConfiguration::new(pts).unwrap(), k, &square()).unwrap();
        for (c, list) in part.adjacency.iter().enumerate() {
            for &d in list {
                prop_assert!(part.adjacency[d].contains(&c));
                prop_assert!(d != c);
            }
        }
    }
}
