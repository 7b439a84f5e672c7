//! Order-k Voronoi coverage control.
//!
//! The crate builds order-k Voronoi partitions of a convex region by
//! half-plane intersection, evaluates the generalized coverage functional
//!
//! ```text
//! H(p_1, ..., p_n) = ∫_Q min_{|T| = k} f(‖q - p_t‖ : t ∈ T) φ(q) dq
//! ```
//!
//! together with its analytic gradient, and integrates gradient or
//! centroidal sensor dynamics. Everything here is pure computation on
//! `alloc`; file formats, scenario parsing and the CLI live in the `kcover`
//! crate.

#![no_std]
// `!(x > 0.0)` style checks reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod coverage;
pub mod dynamics;
mod error;
pub mod geometry;
pub(crate) mod math;
pub mod quadrature;
pub mod radar;

pub use coverage::{BuiltinCost, CostFunction, GradientVector};
pub use error::{Error, Result};
pub use geometry::{
    ConvexPolygon, HalfPlane, OrderKCell, OrderKPartition, Point2, SensorConfiguration,
    SubsetIndex, Tolerances,
};
pub use quadrature::{CellMoments, Density, QuadratureSpec, Uniform};
