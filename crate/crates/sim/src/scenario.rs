//! TOML scenario files.
//!
//! ```toml
//! order = 2
//!
//! [domain]
//! vertices = [[0, 0], [1, 0], [1, 1], [0, 1]]
//!
//! [cost]
//! name = "sum_squared_half"   # sum_distance | pnorm | max_distance | neg_detection
//!
//! [density]
//! kind = "uniform"            # expression | grid-file
//! value = 1.0
//!
//! [sensors]
//! count = 50                  # or: positions = [[x, y], ...]
//! seed = 7
//!
//! [controller]
//! kind = "gradient"           # centroid
//! gain = 1.0
//!
//! [sim]
//! t_end = 50.0
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use kcover_core::coverage::validate_cost;
use kcover_core::dynamics::{
    random_initial, Avoidance, ControllerKind, ControllerSpec, SimulationConfig,
};
use kcover_core::radar::RadarParams;
use kcover_core::{BuiltinCost, ConvexPolygon, Point2, QuadratureSpec, SensorConfiguration};
use serde::Deserialize;
use thiserror::Error;

use crate::density::{DensityError, DensityField, DensityModel, GridDensity};
use crate::expr::Expr;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("invalid density: {0}")]
    Density(#[from] DensityError),
    #[error(transparent)]
    Core(#[from] kcover_core::Error),
}

fn invalid(message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid(message.into())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    order: usize,
    domain: RawDomain,
    cost: RawCost,
    #[serde(default)]
    density: RawDensity,
    sensors: RawSensors,
    #[serde(default)]
    controller: RawController,
    #[serde(default)]
    sim: RawSim,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCost {
    name: String,
    exponent: Option<f64>,
    power_constant: Option<f64>,
    false_alarm: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDensity {
    #[serde(default = "default_density_kind")]
    kind: String,
    value: Option<f64>,
    expression: Option<String>,
    path: Option<PathBuf>,
    #[serde(default)]
    normalize: bool,
}

fn default_density_kind() -> String {
    "uniform".into()
}

impl Default for RawDensity {
    fn default() -> Self {
        Self {
            kind: default_density_kind(),
            value: None,
            expression: None,
            path: None,
            normalize: false,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensors {
    positions: Option<Vec<[f64; 2]>>,
    count: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawController {
    #[serde(default = "default_controller_kind")]
    kind: String,
    #[serde(default = "default_gain")]
    gain: f64,
    avoidance: Option<RawAvoidance>,
}

fn default_controller_kind() -> String {
    "gradient".into()
}

fn default_gain() -> f64 {
    1.0
}

impl Default for RawController {
    fn default() -> Self {
        Self {
            kind: default_controller_kind(),
            gain: default_gain(),
            avoidance: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAvoidance {
    strength: f64,
    range: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt: Option<f64>,
    t_end: Option<f64>,
    stop_grad_tol: Option<f64>,
    seed: Option<u64>,
    quadrature_degree: Option<u32>,
    subdivision: Option<u32>,
}

/// Where the initial positions come from.
#[derive(Clone, Debug, PartialEq)]
pub enum SensorSource {
    Explicit(Vec<Point2>),
    Random { count: usize, seed: u64 },
}

/// A validated scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub domain: ConvexPolygon,
    pub order: usize,
    pub cost: BuiltinCost,
    pub density: DensityModel,
    pub sensors: SensorSource,
    pub sim: SimulationConfig,
}

const DEFAULT_T_END: f64 = 50.0;

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    /// Parses scenario text; relative grid-file paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ScenarioError> {
        let raw: RawScenario = toml::from_str(text)?;
        let order = raw.order;
        if !(1..=3).contains(&order) {
            return Err(invalid(format!("order must be 1, 2 or 3, got {order}")));
        }
        let domain = ConvexPolygon::new(
            raw.domain
                .vertices
                .iter()
                .map(|&v| Point2::from(v))
                .collect(),
        )?;
        if !(domain.area() > 0.0) {
            return Err(invalid("domain has zero area"));
        }
        let cost = parse_cost(&raw.cost, order)?;
        let density = parse_density(&raw.density, base)?.prepare(&domain, raw.density.normalize)?;

        let seed = raw.sim.seed.unwrap_or(0);
        let sensors = match (&raw.sensors.positions, raw.sensors.count) {
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "give either sensors.positions or sensors.count, not both",
                ))
            }
            (None, None) => return Err(invalid("sensors need positions or a count")),
            (Some(points), None) => {
                let points: Vec<Point2> = points.iter().map(|&p| Point2::from(p)).collect();
                let tol = 1e-9 * domain.diameter();
                if let Some(p) = points.iter().find(|p| !domain.contains(**p, tol)) {
                    return Err(invalid(format!(
                        "sensor ({}, {}) lies outside the domain",
                        p.x, p.y
                    )));
                }
                SensorSource::Explicit(points)
            }
            (None, Some(count)) => SensorSource::Random {
                count,
                seed: raw.sensors.seed.unwrap_or(seed),
            },
        };
        let n = match &sensors {
            SensorSource::Explicit(p) => p.len(),
            SensorSource::Random { count, .. } => *count,
        };
        if n < order {
            return Err(invalid(format!(
                "{n} sensors cannot form order-{order} cells"
            )));
        }

        let controller = parse_controller(&raw.controller)?;
        let quadrature = QuadratureSpec::new(
            raw.sim.quadrature_degree.unwrap_or(8),
            raw.sim.subdivision.unwrap_or(1),
        )?;
        let mut sim = SimulationConfig::new(raw.sim.t_end.unwrap_or(DEFAULT_T_END), controller);
        sim.dt = raw.sim.dt;
        sim.stop_grad_tol = raw.sim.stop_grad_tol;
        sim.seed = seed;
        sim.quadrature = quadrature;
        sim.validate()?;

        Ok(Self {
            domain,
            order,
            cost,
            density,
            sensors,
            sim,
        })
    }

    /// Replaces every seed in the scenario.
    pub fn override_seed(&mut self, seed: u64) {
        self.sim.seed = seed;
        if let SensorSource::Random { seed: s, .. } = &mut self.sensors {
            *s = seed;
        }
    }

    pub fn initial_sensors(&self) -> Result<SensorConfiguration, kcover_core::Error> {
        match &self.sensors {
            SensorSource::Explicit(points) => SensorConfiguration::new(points.clone()),
            SensorSource::Random { count, seed } => random_initial(*count, &self.domain, *seed),
        }
    }
}

fn parse_cost(raw: &RawCost, order: usize) -> Result<BuiltinCost, ScenarioError> {
    let unused = |field: &str, present: bool| {
        if present {
            Err(invalid(format!("cost '{}' takes no '{field}'", raw.name)))
        } else {
            Ok(())
        }
    };
    let radar_fields = raw.power_constant.is_some() || raw.false_alarm.is_some();
    let cost = match raw.name.as_str() {
        "sum_distance" | "sum_squared_half" | "max_distance" => {
            unused("exponent", raw.exponent.is_some())?;
            unused("power_constant/false_alarm", radar_fields)?;
            match raw.name.as_str() {
                "sum_distance" => BuiltinCost::SumDistance { arity: order },
                "sum_squared_half" => BuiltinCost::SumSquaredHalf { arity: order },
                _ => BuiltinCost::MaxDistance { arity: order },
            }
        }
        "pnorm" => {
            unused("power_constant/false_alarm", radar_fields)?;
            let p = raw
                .exponent
                .ok_or_else(|| invalid("cost 'pnorm' needs an exponent"))?;
            BuiltinCost::pnorm(order, p)?
        }
        "neg_detection" => {
            unused("exponent", raw.exponent.is_some())?;
            if order != 2 {
                return Err(invalid(format!(
                    "cost 'neg_detection' needs order 2, got {order}"
                )));
            }
            let k = raw
                .power_constant
                .ok_or_else(|| invalid("cost 'neg_detection' needs power_constant"))?;
            let pfa = raw
                .false_alarm
                .ok_or_else(|| invalid("cost 'neg_detection' needs false_alarm"))?;
            BuiltinCost::NegDetection(RadarParams::new(k, pfa)?)
        }
        other => return Err(invalid(format!("unknown cost '{other}'"))),
    };
    validate_cost(&cost, 64, 0)?;
    Ok(cost)
}

fn parse_density(raw: &RawDensity, base: &Path) -> Result<DensityModel, ScenarioError> {
    let field = match raw.kind.as_str() {
        "uniform" => DensityField::Uniform(raw.value.unwrap_or(1.0)),
        "expression" => {
            let src = raw
                .expression
                .as_deref()
                .ok_or_else(|| invalid("density kind 'expression' needs an expression"))?;
            DensityField::Expression(Expr::parse(src).map_err(DensityError::from)?)
        }
        "grid-file" => {
            let path = raw
                .path
                .as_ref()
                .ok_or_else(|| invalid("density kind 'grid-file' needs a path"))?;
            let resolved = if path.is_absolute() {
                path.clone()
            } else {
                base.join(path)
            };
            if !resolved.is_file() {
                return Err(invalid(format!(
                    "density file {} does not exist",
                    resolved.display()
                )));
            }
            DensityField::Grid(GridDensity::load(&resolved)?)
        }
        other => return Err(invalid(format!("unknown density kind '{other}'"))),
    };
    Ok(DensityModel::new(field))
}

fn parse_controller(raw: &RawController) -> Result<ControllerSpec, ScenarioError> {
    let kind = match raw.kind.as_str() {
        "gradient" => ControllerKind::Gradient,
        "centroid" => ControllerKind::Centroid,
        other => return Err(invalid(format!("unknown controller kind '{other}'"))),
    };
    let avoidance = raw.avoidance.as_ref().map(|a| Avoidance {
        strength: a.strength,
        range: a.range,
    });
    Ok(ControllerSpec::new(kind, raw.gain, avoidance)?)
}
