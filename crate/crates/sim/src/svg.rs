//! Plain SVG plots: sensor paths over the final partition, and `H` against
//! time.

use std::fmt::Write;

use kcover_core::dynamics::Trajectory;
use kcover_core::{ConvexPolygon, OrderKPartition, Point2};

const SIZE: f64 = 640.0;
const MARGIN: f64 = 56.0;

/// Qualitative palette; paths cycle through it.
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Maps data coordinates into the plot box, y pointing up.
struct Frame {
    lo: Point2,
    scale_x: f64,
    scale_y: f64,
    height: f64,
}

impl Frame {
    fn new(lo: Point2, hi: Point2, width: f64, height: f64, equal_aspect: bool) -> Self {
        let span_x = (hi.x - lo.x).max(f64::MIN_POSITIVE);
        let span_y = (hi.y - lo.y).max(f64::MIN_POSITIVE);
        let (mut sx, mut sy) = (
            (width - 2.0 * MARGIN) / span_x,
            (height - 2.0 * MARGIN) / span_y,
        );
        if equal_aspect {
            let s = sx.min(sy);
            sx = s;
            sy = s;
        }
        Self {
            lo,
            scale_x: sx,
            scale_y: sy,
            height,
        }
    }

    fn map(&self, p: Point2) -> (f64, f64) {
        (
            MARGIN + (p.x - self.lo.x) * self.scale_x,
            self.height - MARGIN - (p.y - self.lo.y) * self.scale_y,
        )
    }
}

fn points_attr(frame: &Frame, pts: impl IntoIterator<Item = Point2>) -> String {
    let mut s = String::new();
    for p in pts {
        let (x, y) = frame.map(p);
        let _ = write!(s, "{x:.2},{y:.2} ");
    }
    s.pop();
    s
}

fn header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn polygon(out: &mut String, frame: &Frame, poly: &ConvexPolygon, style: &str) {
    if poly.len() < 3 {
        return;
    }
    let _ = writeln!(
        out,
        "<polygon points=\"{}\" {style}/>",
        points_attr(frame, poly.vertices().iter().copied())
    );
}

/// Sensor paths (hollow start, filled end) drawn over the final partition.
pub fn trajectory_plot(trajectory: &Trajectory, partition: &OrderKPartition) -> String {
    let domain = &partition.domain;
    let (lo, hi) = domain
        .bounding_box()
        .unwrap_or((Point2::ZERO, Point2::new(1.0, 1.0)));
    let frame = Frame::new(lo, hi, SIZE, SIZE, true);
    let mut out = header(SIZE, SIZE);
    polygon(
        &mut out,
        &frame,
        domain,
        "fill=\"#f4f8f0\" stroke=\"#3a7d2c\" stroke-width=\"2\"",
    );
    for cell in &partition.cells {
        polygon(
            &mut out,
            &frame,
            &cell.polygon,
            "fill=\"none\" stroke=\"#999\" stroke-width=\"0.7\"",
        );
    }
    let n = trajectory.positions.first().map_or(0, |s| s.len());
    for i in 0..n {
        let color = PALETTE[i % PALETTE.len()];
        let path = trajectory.positions.iter().map(|s| s.get(i));
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\"/>",
            points_attr(&frame, path)
        );
        let (sx, sy) = frame.map(trajectory.positions[0].get(i));
        let (ex, ey) = frame.map(trajectory.positions[trajectory.positions.len() - 1].get(i));
        let _ = writeln!(
            out,
            "<circle cx=\"{sx:.2}\" cy=\"{sy:.2}\" r=\"3\" fill=\"white\" stroke=\"{color}\"/>\n\
             <circle cx=\"{ex:.2}\" cy=\"{ey:.2}\" r=\"3.5\" fill=\"{color}\"/>"
        );
    }
    let (tx, ty) = frame.map(Point2::new(lo.x, hi.y));
    let _ = writeln!(
        out,
        "<text x=\"{tx:.2}\" y=\"{:.2}\">order {} partition, {n} sensors, t = {}</text>",
        ty - 12.0,
        partition.order,
        trajectory.times.last().copied().unwrap_or(0.0)
    );
    out.push_str("</svg>\n");
    out
}

/// Round tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) {
        return vec![lo];
    }
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    }
}

/// `H(t)` with labelled axes.
pub fn h_curve_plot(trajectory: &Trajectory) -> String {
    let (width, height) = (SIZE * 1.25, SIZE * 0.75);
    let t = &trajectory.times;
    let h = &trajectory.h_values;
    let t_hi = t.last().copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
    let (mut h_lo, mut h_hi) = h
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if !(h_hi > h_lo) {
        let pad = h_lo.abs().max(1.0) * 0.05;
        h_lo -= pad;
        h_hi += pad;
    }
    let lo = Point2::new(0.0, h_lo);
    let hi = Point2::new(t_hi, h_hi);
    let frame = Frame::new(lo, hi, width, height, false);
    let mut out = header(width, height);

    let (x0, y0) = frame.map(lo);
    let (x1, y1) = frame.map(hi);
    let _ = writeln!(
        out,
        "<rect x=\"{x0:.2}\" y=\"{y1:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        x1 - x0,
        y0 - y1
    );
    for tick in ticks(0.0, t_hi, 8) {
        let (x, _) = frame.map(Point2::new(tick, h_lo));
        let _ = writeln!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{y0:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\
             <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            y0 + 5.0,
            y0 + 18.0,
            label(tick)
        );
    }
    for tick in ticks(h_lo, h_hi, 6) {
        let (_, y) = frame.map(Point2::new(0.0, tick));
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0,
            label(tick)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">t</text>\n\
         <text x=\"14\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2})\">H</text>",
        0.5 * (x0 + x1),
        height - 12.0,
        0.5 * (y0 + y1),
        0.5 * (y0 + y1)
    );
    let curve = t.iter().zip(h).map(|(&a, &b)| Point2::new(a, b));
    let _ = writeln!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>",
        points_attr(&frame, curve)
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use kcover_core::geometry::build_partition;
    use kcover_core::SensorConfiguration;

    fn sample() -> (Trajectory, OrderKPartition) {
        let q = ConvexPolygon::rectangle(0.0, 0.0, 2.0, 1.0).unwrap();
        let a = SensorConfiguration::new(vec![
            Point2::new(0.2, 0.3),
            Point2::new(1.8, 0.6),
            Point2::new(1.0, 0.9),
        ])
        .unwrap();
        let b = SensorConfiguration::new(vec![
            Point2::new(0.4, 0.4),
            Point2::new(1.5, 0.5),
            Point2::new(1.0, 0.7),
        ])
        .unwrap();
        let part = build_partition(&b, 2, &q).unwrap();
        let trajectory = Trajectory {
            times: vec![0.0, 1.0],
            positions: vec![a, b],
            h_values: vec![3.0, 2.5],
            grad_norms: vec![1.0, 0.5],
            speeds: vec![1.0, 0.5],
            converged: true,
        };
        (trajectory, part)
    }

    #[test]
    fn trajectory_plot_draws_every_path_and_cell() {
        let (trajectory, part) = sample();
        let svg = trajectory_plot(&trajectory, &part);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert_eq!(svg.matches("<polygon").count(), 1 + part.cells.len());
        assert_eq!(svg.matches("<circle").count(), 6);
    }

    #[test]
    fn h_curve_has_axes() {
        let (trajectory, _) = sample();
        let svg = h_curve_plot(&trajectory);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains(">t</text>"));
        assert!(svg.matches("<line").count() >= 4);
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(0.0, 10.0, 5), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        let t = ticks(0.13, 0.41, 3);
        assert_eq!(t.len(), 3);
        for (a, b) in t.iter().zip([0.2, 0.3, 0.4]) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
