use kcover_core::radar::{bessel_i0, marcum_q1, marcum_q1_dalpha, RadarParams};

/// Forty terms of `Σ (x²/4)^m / (m!)²`.
fn i0_series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..40 {
        term *= y / (m as f64 * m as f64);
        sum += term;
    }
    sum
}

/// Composite Simpson on the defining integral, with `I0` from the series.
fn q1_by_integration(alpha: f64, beta: f64) -> f64 {
    let upper = beta.max(alpha) + 12.0;
    let panels = 4000;
    let h = (upper - beta) / panels as f64;
    let g = |x: f64| x * i0_series(alpha * x) * (-(x * x + alpha * alpha) / 2.0).exp();
    let mut sum = g(beta) + g(upper);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * g(beta + i as f64 * h);
    }
    sum * h / 3.0
}

#[test]
fn i0_matches_series() {
    for x in [0.0, 0.3, 1.0, 2.5, 5.0, 7.5, 10.0, 14.0] {
        let want = i0_series(x);
        assert!((bessel_i0(x) - want).abs() <= 1e-12 * want, "I0({x})");
    }
}

#[test]
fn i0_crosses_to_asymptotic_smoothly() {
    // Forty terms are not enough out here.
    let long = |x: f64| {
        let y = 0.25 * x * x;
        let (mut term, mut sum) = (1.0, 1.0);
        for m in 1..200 {
            term *= y / (m as f64 * m as f64);
            sum += term;
        }
        sum
    };
    for x in [14.9, 15.0, 15.1, 20.0, 30.0] {
        assert!((bessel_i0(x) / long(x) - 1.0).abs() < 1e-10, "I0({x})");
    }
}

#[test]
fn q1_matches_integration() {
    for &alpha in &[0.0, 0.5, 1.0, 2.0, 3.5, 5.0] {
        for &beta in &[0.1, 0.5, 1.0, 2.0, 3.0, 4.5] {
            let want = q1_by_integration(alpha, beta);
            let got = marcum_q1(alpha, beta);
            assert!(
                (got - want).abs() < 1e-9,
                "Q1({alpha}, {beta}) = {got}, integral {want}"
            );
        }
    }
}

#[test]
fn q1_closed_forms() {
    assert_eq!(marcum_q1(2.0, 0.0), 1.0);
    assert!((marcum_q1(0.0, 1.0) - 0.606_530_659_712_633_4).abs() < 1e-15);
}

#[test]
fn q1_derivative_matches_differences() {
    for &(a, b) in &[(0.7, 1.3), (3.0, 2.0), (5.0, 6.2), (12.0, 11.0)] {
        let h = 1e-5;
        let fd = (marcum_q1(a + h, b) - marcum_q1(a - h, b)) / (2.0 * h);
        let exact = marcum_q1_dalpha(a, b);
        assert!((fd - exact).abs() < 1e-8, "({a}, {b}): {fd} vs {exact}");
    }
}

#[test]
fn detection_decays_to_false_alarm() {
    let radar = RadarParams::new(0.1, 1e-3).unwrap();
    let far = radar.detection_probability(1e3, 1e3).unwrap();
    assert!((far - 1e-3).abs() < 1e-9);
    let near = radar.detection_probability(1e-2, 1e-2).unwrap();
    assert!(near > 1.0 - 1e-12);
}
