//! Numerical toolkit for the conullity-two metrics
//!
//! ```text
//! g = η(x,u)² dx² + Σ_{j=0..n} (dv_j + (v_{j-1} f_j(x) - v_{j+1} f_{j+1}(x)) dx)²
//! ```
//!
//! on `(c1, c2) × ℝ^{n+1}`: assembly, connection, curvature and Frenet data,
//! geodesics and Jacobi fields, completeness certificates, the surface
//! foliation by orthogonal geodesics, and gluing along flat modifications.

pub mod completeness;
pub mod connection;
pub mod curvature;
pub mod error;
pub mod fields;
pub mod foliation;
pub mod geodesics;
pub mod gluing;
pub mod interval;
pub mod library;
pub mod metric;
pub mod numeric;

pub use error::{Error, Result};
pub use interval::{Interval, IntervalSet};
pub use metric::{metric_at, orthonormal_frame, MetricData, ModelSpec, Point, Tangent};
