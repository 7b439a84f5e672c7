//! Density fields loadable from scenario files.

use std::fs;
use std::path::Path;

use kcover_core::quadrature::{integrate, QuadratureSpec};
use kcover_core::{ConvexPolygon, Density, Point2};
use thiserror::Error;

use crate::expr::{Expr, ParseError};

#[derive(Debug, Error)]
pub enum DensityError {
    #[error(transparent)]
    Expression(#[from] ParseError),
    #[error("cannot read grid file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("grid file {path}: {message}")]
    Grid { path: String, message: String },
    #[error("density is negative ({value}) at ({x}, {y})")]
    Negative { value: f64, x: f64, y: f64 },
    #[error("density has zero total mass over the domain")]
    ZeroMass,
    #[error("density is not finite at ({x}, {y})")]
    NotFinite { x: f64, y: f64 },
}

/// Samples on a regular grid, bilinearly interpolated and clamped to the
/// grid's bounding box.
///
/// File layout: a header line `nx ny xmin ymin xmax ymax`, then `ny` rows of
/// `nx` values; the first row sits at `y = ymin`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridDensity {
    nx: usize,
    ny: usize,
    lo: Point2,
    hi: Point2,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(
        nx: usize,
        ny: usize,
        lo: Point2,
        hi: Point2,
        values: Vec<f64>,
    ) -> Result<Self, String> {
        if nx < 2 || ny < 2 {
            return Err(format!("need at least 2x2 samples, got {nx}x{ny}"));
        }
        if !(hi.x > lo.x && hi.y > lo.y) {
            return Err("grid box must have positive extent".into());
        }
        if values.len() != nx * ny {
            return Err(format!(
                "expected {} values, found {}",
                nx * ny,
                values.len()
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(format!(
                "grid values must be finite and nonnegative, found {v}"
            ));
        }
        Ok(Self {
            nx,
            ny,
            lo,
            hi,
            values,
        })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or("empty grid file")?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(format!("header needs 6 fields, found {}", fields.len()));
        }
        let nx: usize = fields[0]
            .parse()
            .map_err(|_| format!("bad nx '{}'", fields[0]))?;
        let ny: usize = fields[1]
            .parse()
            .map_err(|_| format!("bad ny '{}'", fields[1]))?;
        let mut bounds = [0.0; 4];
        for (slot, text) in bounds.iter_mut().zip(&fields[2..]) {
            *slot = text.parse().map_err(|_| format!("bad bound '{text}'"))?;
        }
        let mut values = Vec::with_capacity(nx * ny);
        for line in lines {
            for token in line.split_whitespace() {
                values.push(
                    token
                        .parse::<f64>()
                        .map_err(|_| format!("bad value '{token}'"))?,
                );
            }
        }
        Self::new(
            nx,
            ny,
            Point2::new(bounds[0], bounds[1]),
            Point2::new(bounds[2], bounds[3]),
            values,
        )
    }

    pub fn load(path: &Path) -> Result<Self, DensityError> {
        let text = fs::read_to_string(path).map_err(|source| DensityError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text).map_err(|message| DensityError::Grid {
            path: path.display().to_string(),
            message,
        })
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }
}

impl Density for GridDensity {
    fn value(&self, q: Point2) -> f64 {
        let fx =
            ((q.x - self.lo.x) / (self.hi.x - self.lo.x)).clamp(0.0, 1.0) * (self.nx - 1) as f64;
        let fy =
            ((q.y - self.lo.y) / (self.hi.y - self.lo.y)).clamp(0.0, 1.0) * (self.ny - 1) as f64;
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let bottom = self.at(i, j) * (1.0 - tx) + self.at(i + 1, j) * tx;
        let top = self.at(i, j + 1) * (1.0 - tx) + self.at(i + 1, j + 1) * tx;
        bottom * (1.0 - ty) + top * ty
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DensityField {
    Uniform(f64),
    Expression(Expr),
    Grid(GridDensity),
}

/// A density field times a constant scale (used for normalization).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityModel {
    pub field: DensityField,
    pub scale: f64,
}

impl DensityModel {
    pub fn new(field: DensityField) -> Self {
        Self { field, scale: 1.0 }
    }

    /// Checks the field on the quadrature nodes of `domain`, and when
    /// `normalize` is set rescales it to unit mass there.
    pub fn prepare(
        mut self,
        domain: &ConvexPolygon,
        normalize: bool,
    ) -> Result<Self, DensityError> {
        let spec = QuadratureSpec::default();
        let mut problem = None;
        spec.for_each_node(domain, |q, _| {
            if problem.is_some() {
                return;
            }
            let v = self.raw(q);
            if !v.is_finite() {
                problem = Some(DensityError::NotFinite { x: q.x, y: q.y });
            } else if v < 0.0 {
                problem = Some(DensityError::Negative {
                    value: v,
                    x: q.x,
                    y: q.y,
                });
            }
        });
        if let Some(err) = problem {
            return Err(err);
        }
        let mass = integrate(domain, |_| 1.0, &|q: Point2| self.raw(q), &spec);
        if !(mass > 0.0) {
            return Err(DensityError::ZeroMass);
        }
        if normalize {
            self.scale = 1.0 / mass;
        }
        Ok(self)
    }

    fn raw(&self, q: Point2) -> f64 {
        match &self.field {
            DensityField::Uniform(c) => *c,
            DensityField::Expression(e) => e.eval(q.x, q.y),
            DensityField::Grid(g) => g.value(q),
        }
    }
}

impl Density for DensityModel {
    fn value(&self, q: Point2) -> f64 {
        self.scale * self.raw(q).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> ConvexPolygon {
        ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn grid_interpolates_bilinearly() {
        let g = GridDensity::parse("2 2 0 0 1 1\n0 1\n2 3\n").unwrap();
        assert_eq!(g.value(Point2::new(0.0, 0.0)), 0.0);
        assert_eq!(g.value(Point2::new(1.0, 1.0)), 3.0);
        assert_eq!(g.value(Point2::new(0.5, 0.5)), 1.5);
        assert_eq!(g.value(Point2::new(0.25, 0.0)), 0.25);
        // Clamped outside the box.
        assert_eq!(g.value(Point2::new(-4.0, 2.0)), 2.0);
    }

    #[test]
    fn grid_rejects_bad_files() {
        assert!(GridDensity::parse("2 2 0 0 1 1\n0 1\n2\n").is_err());
        assert!(GridDensity::parse("2 2 0 0 1\n0 1\n2 3\n").is_err());
        assert!(GridDensity::parse("2 2 0 0 1 1\n0 -1\n2 3\n").is_err());
        assert!(GridDensity::parse("2 2 1 0 0 1\n0 1\n2 3\n").is_err());
    }

    #[test]
    fn normalization_gives_unit_mass() {
        let d = DensityModel::new(DensityField::Uniform(4.0))
            .prepare(&ConvexPolygon::rectangle(0.0, 0.0, 2.0, 1.0).unwrap(), true)
            .unwrap();
        assert!((d.value(Point2::new(0.3, 0.3)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn negative_expression_is_rejected() {
        let e = Expr::parse("x - 0.5").unwrap();
        let err = DensityModel::new(DensityField::Expression(e))
            .prepare(&unit_square(), false)
            .unwrap_err();
        assert!(matches!(err, DensityError::Negative { .. }));
    }

    #[test]
    fn zero_density_is_rejected() {
        let err = DensityModel::new(DensityField::Uniform(0.0))
            .prepare(&unit_square(), false)
            .unwrap_err();
        assert!(matches!(err, DensityError::ZeroMass));
    }
}
