//! Sensor motion under gradient or centroidal control.
//!
//! The continuous flows `ṗ_i = −K ∂H/∂p_i` and `ṗ_i = K (C_{W_i} − p_i)`,
//! optionally with a short-range repulsion between sensors, are
//! discretized by explicit Euler steps. Positions are projected back onto
//! the domain after every step. For pure gradient control a step that
//! raises `H` is retried with half the time step.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::coverage::{self, cost::unit_f64, CostFunction, GradientVector};
use crate::error::{Error, Result};
use crate::geometry::{
    build_partition, ConvexPolygon, OrderKPartition, Point2, SensorConfiguration, Tolerances,
};
use crate::quadrature::{CellMoments, Density, QuadratureSpec};

/// Maximum number of consecutive time-step halvings before a run aborts.
pub const MAX_HALVINGS: u32 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControllerKind {
    /// `ṗ_i = −K ∂H/∂p_i`.
    Gradient,
    /// `ṗ_i = K (C_{W_i} − p_i)`.
    Centroid,
}

/// Inverse-distance repulsion `strength · (p_i − p_j)/‖p_i − p_j‖²`, active
/// below `range`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Avoidance {
    pub strength: f64,
    pub range: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControllerSpec {
    pub kind: ControllerKind,
    pub gain: f64,
    pub avoidance: Option<Avoidance>,
}

impl ControllerSpec {
    pub fn new(kind: ControllerKind, gain: f64, avoidance: Option<Avoidance>) -> Result<Self> {
        if !(gain > 0.0) || !gain.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gain must be positive, got {gain}"
            )));
        }
        if let Some(a) = avoidance {
            if !(a.range > 0.0) || !(a.strength >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "avoidance needs range > 0 and strength >= 0, got {a:?}"
                )));
            }
        }
        Ok(Self {
            kind,
            gain,
            avoidance,
        })
    }

    pub fn gradient() -> Self {
        Self {
            kind: ControllerKind::Gradient,
            gain: 1.0,
            avoidance: None,
        }
    }

    pub fn centroid(gain: f64) -> Self {
        Self {
            kind: ControllerKind::Centroid,
            gain,
            avoidance: None,
        }
    }

    /// Runs whose `H` must not increase.
    fn is_pure_gradient(&self) -> bool {
        self.kind == ControllerKind::Gradient && self.avoidance.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    /// Base time step; `None` selects [`default_time_step`].
    pub dt: Option<f64>,
    pub t_end: f64,
    /// Stop once the largest sensor speed falls below this; `None` means
    /// `1e-6` times the initial largest speed.
    pub stop_grad_tol: Option<f64>,
    pub seed: u64,
    pub controller: ControllerSpec,
    pub quadrature: QuadratureSpec,
}

impl SimulationConfig {
    pub fn new(t_end: f64, controller: ControllerSpec) -> Self {
        Self {
            dt: None,
            t_end,
            stop_grad_tol: None,
            seed: 0,
            controller,
            quadrature: QuadratureSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "dt must be positive, got {dt}"
                )));
            }
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if let Some(tol) = self.stop_grad_tol {
            if !(tol >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "stop tolerance must be nonnegative, got {tol}"
                )));
            }
        }
        ControllerSpec::new(
            self.controller.kind,
            self.controller.gain,
            self.controller.avoidance,
        )?;
        Ok(())
    }
}

/// Domain, order, cost and density of a coverage problem.
#[derive(Clone, Copy)]
pub struct CoverageProblem<'a> {
    pub domain: &'a ConvexPolygon,
    pub order: usize,
    pub cost: &'a dyn CostFunction,
    pub density: &'a dyn Density,
}

/// Everything known about one configuration.
#[derive(Clone, Debug)]
pub struct State {
    pub time: f64,
    pub sensors: SensorConfiguration,
    pub partition: OrderKPartition,
    pub h: f64,
    pub gradient: GradientVector,
    /// Mass and centroid of each `W_i`.
    pub regions: Vec<Option<CellMoments>>,
}

impl State {
    pub fn new(
        problem: &CoverageProblem<'_>,
        sensors: SensorConfiguration,
        spec: &QuadratureSpec,
        time: f64,
    ) -> Result<Self> {
        let partition = build_partition(&sensors, problem.order, problem.domain)?;
        let h = coverage::evaluate_h(&partition, &sensors, problem.cost, problem.density, spec)?;
        let gradient =
            coverage::gradient(&partition, &sensors, problem.cost, problem.density, spec)?;
        let cells = coverage::partition_moments(&partition, problem.density, spec);
        let regions = coverage::region_moments(&partition, &cells);
        if !h.is_finite() {
            return Err(Error::Numerical(format!("non-finite H at t = {time}")));
        }
        Ok(Self {
            time,
            sensors,
            partition,
            h,
            gradient,
            regions,
        })
    }
}

/// Repulsion felt by every sensor.
pub fn avoidance_term(sensors: &SensorConfiguration, avoidance: &Avoidance) -> GradientVector {
    let n = sensors.len();
    let mut u = GradientVector::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let diff = sensors.get(i) - sensors.get(j);
            let d2 = diff.norm_squared();
            if d2 > 0.0 && d2 < avoidance.range * avoidance.range {
                let push = diff * (avoidance.strength / d2);
                u[i] += push;
                u[j] -= push;
            }
        }
    }
    u
}

/// Sensor velocities for the current state.
pub fn control_term(state: &State, controller: &ControllerSpec) -> GradientVector {
    let mut v = match controller.kind {
        ControllerKind::Gradient => state.gradient.scaled(-controller.gain),
        ControllerKind::Centroid => {
            let mut v = GradientVector::zeros(state.sensors.len());
            for (i, region) in state.regions.iter().enumerate() {
                match region {
                    Some(m) if !m.zero_mass => {
                        v[i] = (m.centroid - state.sensors.get(i)) * controller.gain;
                    }
                    _ => log::warn!("sensor {i} has a massless region; holding position"),
                }
            }
            v
        }
    };
    if let Some(avoidance) = &controller.avoidance {
        let u = avoidance_term(&state.sensors, avoidance);
        for (vi, ui) in v.0.iter_mut().zip(u.iter()) {
            *vi += *ui;
        }
    }
    v
}

/// One explicit Euler step of length `dt` along `velocity`, projected onto
/// the domain.
pub fn step(
    state: &State,
    velocity: &GradientVector,
    problem: &CoverageProblem<'_>,
    spec: &QuadratureSpec,
    dt: f64,
) -> Result<State> {
    let moved: Vec<Point2> = state
        .sensors
        .positions()
        .iter()
        .zip(velocity.iter())
        .map(|(&p, &v)| problem.domain.project(p + v * dt))
        .collect();
    State::new(
        problem,
        SensorConfiguration::new(moved)?,
        spec,
        state.time + dt,
    )
}

/// `0.05·diam(Q)² / v₀`, clamped to `[1e-4, 1e-1]`.
pub fn default_time_step(diameter: f64, initial_speed: f64) -> f64 {
    if !(initial_speed > 0.0) {
        return 1e-1;
    }
    (0.05 * diameter * diameter / initial_speed).clamp(1e-4, 1e-1)
}

/// Recorded simulation output.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<SensorConfiguration>,
    pub h_values: Vec<f64>,
    /// `max_i ‖∂H/∂p_i‖` at each recorded time.
    pub grad_norms: Vec<f64>,
    /// `max_i ‖ṗ_i‖` at each recorded time.
    pub speeds: Vec<f64>,
    pub converged: bool,
}

impl Trajectory {
    fn record(&mut self, state: &State, speed: f64) {
        self.times.push(state.time);
        self.positions.push(state.sensors.clone());
        self.h_values.push(state.h);
        self.grad_norms.push(state.gradient.inf_norm());
        self.speeds.push(speed);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of Euler steps taken.
    pub fn iterations(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    pub fn final_positions(&self) -> Option<&SensorConfiguration> {
        self.positions.last()
    }
}

/// Integrates until `t_end` or until the largest speed drops below the stop
/// tolerance. Returns the trajectory and the final state.
pub fn run_with_state(
    initial: &SensorConfiguration,
    problem: &CoverageProblem<'_>,
    config: &SimulationConfig,
) -> Result<(Trajectory, State)> {
    config.validate()?;
    let controller = &config.controller;
    let spec = &config.quadrature;
    let mut state = State::new(problem, initial.clone(), spec, 0.0)?;
    let mut velocity = control_term(&state, controller);
    let speed0 = velocity.inf_norm();
    let tol = config.stop_grad_tol.unwrap_or(1e-6 * speed0);
    let base_dt = config
        .dt
        .unwrap_or_else(|| default_time_step(problem.domain.diameter(), speed0));
    let descent_slack = 1e-12 * state.h.abs();
    let monotone = controller.is_pure_gradient();

    let mut trajectory = Trajectory::default();
    trajectory.record(&state, speed0);
    let mut converged = speed0 < tol || speed0 == 0.0;
    let mut dt = base_dt;
    let time_eps = 1e-12 * config.t_end;

    while !converged && state.time < config.t_end - time_eps {
        let mut trial = dt.min(config.t_end - state.time);
        let mut halvings = 0;
        let next = loop {
            let rejected = match step(&state, &velocity, problem, spec, trial) {
                Ok(next) if !monotone || next.h <= state.h + descent_slack => break next,
                Ok(next) => format!("H rose from {} to {}", state.h, next.h),
                Err(e @ Error::CoincidentSensors { .. }) => format!("{e}"),
                Err(e) => return Err(e),
            };
            if halvings == MAX_HALVINGS {
                return Err(Error::Numerical(format!(
                    "step at t = {} rejected after {MAX_HALVINGS} halvings: {rejected}",
                    state.time
                )));
            }
            log::trace!("rejected dt = {trial}: {rejected}");
            trial *= 0.5;
            halvings += 1;
        };
        dt = if halvings > 0 {
            trial
        } else {
            (dt * 1.25).min(base_dt)
        };
        log::trace!("t = {} dt = {trial} H = {}", next.time, next.h);
        state = next;
        velocity = control_term(&state, controller);
        let speed = velocity.inf_norm();
        trajectory.record(&state, speed);
        converged = speed < tol;
    }
    trajectory.converged = converged;
    Ok((trajectory, state))
}

/// [`run_with_state`] without the final state.
pub fn run(
    initial: &SensorConfiguration,
    problem: &CoverageProblem<'_>,
    config: &SimulationConfig,
) -> Result<Trajectory> {
    run_with_state(initial, problem, config).map(|(t, _)| t)
}

/// `n` points drawn uniformly in the domain by rejection sampling with
/// ChaCha8 (`rand_chacha` 0.3, seeded via `seed_from_u64`). Points closer
/// than `ε_coincide` to an earlier point are redrawn.
pub fn random_initial(n: usize, domain: &ConvexPolygon, seed: u64) -> Result<SensorConfiguration> {
    if !(domain.area() > 0.0) {
        return Err(Error::InvalidPolygon(
            "cannot sample a domain of zero area".into(),
        ));
    }
    let (lo, hi) = domain.bounding_box().expect("nonempty domain");
    let tol = Tolerances::for_domain(domain);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Point2> = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while points.len() < n {
        attempts += 1;
        if attempts > 1_000_000 + 1000 * n {
            return Err(Error::Numerical(
                "rejection sampling did not terminate".into(),
            ));
        }
        let q = Point2::new(
            lo.x + (hi.x - lo.x) * unit_f64(&mut rng),
            lo.y + (hi.y - lo.y) * unit_f64(&mut rng),
        );
        if !domain.contains(q, 0.0) {
            continue;
        }
        if points.iter().any(|p| p.distance(q) <= tol.coincide) {
            continue;
        }
        points.push(q);
    }
    SensorConfiguration::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::BuiltinCost;
    use crate::quadrature::Uniform;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn random_initial_is_reproducible_and_inside() {
        let q = ConvexPolygon::new(alloc::vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(1.0, 1.5),
        ])
        .unwrap();
        let a = random_initial(500, &q, 42).unwrap();
        let b = random_initial(500, &q, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_initial(500, &q, 43).unwrap());
        assert!(a.positions().iter().all(|&p| q.contains(p, 0.0)));
        assert!(random_initial(3, &ConvexPolygon::empty(), 1).is_err());
    }

    #[test]
    fn random_initial_mean_is_central() {
        let s = random_initial(10_000, &unit_square(), 7).unwrap();
        let mean = s.positions().iter().fold(Point2::ZERO, |a, &p| a + p) * 1e-4;
        // σ of the mean of U(0,1) over 1e4 samples is 0.2887/100.
        let three_sigma = 3.0 * 0.288_675 / 100.0;
        assert!(
            (mean.x - 0.5).abs() < three_sigma && (mean.y - 0.5).abs() < three_sigma,
            "{mean:?}"
        );
    }

    #[test]
    fn avoidance_is_antisymmetric() {
        let s =
            SensorConfiguration::new(alloc::vec![Point2::new(0.4, 0.5), Point2::new(0.45, 0.52)])
                .unwrap();
        let u = avoidance_term(
            &s,
            &Avoidance {
                strength: 0.01,
                range: 0.2,
            },
        );
        assert_eq!(u[0], -u[1]);
        assert!(u[0].norm() > 0.0);
        assert!((u[0] - s.get(0)).norm() > 0.0);
        let far = avoidance_term(
            &s,
            &Avoidance {
                strength: 0.01,
                range: 0.01,
            },
        );
        assert_eq!(far.inf_norm(), 0.0);
    }

    #[test]
    fn zero_velocity_keeps_positions() {
        let cost = BuiltinCost::SumSquaredHalf { arity: 2 };
        let q = unit_square();
        let problem = CoverageProblem {
            domain: &q,
            order: 2,
            cost: &cost,
            density: &Uniform(1.0),
        };
        let s = random_initial(5, &q, 3).unwrap();
        let spec = QuadratureSpec::default();
        let state = State::new(&problem, s.clone(), &spec, 0.0).unwrap();
        let next = step(&state, &GradientVector::zeros(5), &problem, &spec, 0.1).unwrap();
        assert_eq!(next.sensors, s);
        assert_eq!(next.h, state.h);
    }

    #[test]
    fn gradient_control_is_negative_gradient() {
        let cost = BuiltinCost::SumDistance { arity: 2 };
        let q = unit_square();
        let problem = CoverageProblem {
            domain: &q,
            order: 2,
            cost: &cost,
            density: &Uniform(1.0),
        };
        let spec = QuadratureSpec::default();
        let state = State::new(&problem, random_initial(6, &q, 9).unwrap(), &spec, 0.0).unwrap();
        let v = control_term(&state, &ControllerSpec::gradient());
        assert_eq!(v, state.gradient.scaled(-1.0));
    }

    #[test]
    fn steps_are_projected_into_the_domain() {
        let cost = BuiltinCost::SumSquaredHalf { arity: 1 };
        let q = unit_square();
        let problem = CoverageProblem {
            domain: &q,
            order: 1,
            cost: &cost,
            density: &Uniform(1.0),
        };
        let spec = QuadratureSpec::default();
        let s = SensorConfiguration::new(alloc::vec![Point2::new(0.9, 0.5), Point2::new(0.2, 0.5)])
            .unwrap();
        let state = State::new(&problem, s, &spec, 0.0).unwrap();
        let push = GradientVector(alloc::vec![Point2::new(5.0, 0.0), Point2::ZERO]);
        let next = step(&state, &push, &problem, &spec, 1.0).unwrap();
        assert_eq!(next.sensors.get(0), Point2::new(1.0, 0.5));
    }

    #[test]
    fn controller_validation() {
        assert!(ControllerSpec::new(ControllerKind::Gradient, 0.0, None).is_err());
        assert!(ControllerSpec::new(
            ControllerKind::Gradient,
            1.0,
            Some(Avoidance {
                strength: 1.0,
                range: 0.0
            })
        )
        .is_err());
        let mut cfg = SimulationConfig::new(1.0, ControllerSpec::gradient());
        assert!(cfg.validate().is_ok());
        cfg.dt = Some(-1.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_step_is_clamped() {
        assert_eq!(default_time_step(1.0, 0.0), 0.1);
        assert_eq!(default_time_step(100.0, 1.0), 0.1);
        assert_eq!(default_time_step(1.0, 1e6), 1e-4);
        assert!((default_time_step(1.0, 1.0) - 0.05).abs() < 1e-15);
    }
}
