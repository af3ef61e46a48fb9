use thiserror::Error;

use crate::fields::expr::ExprError;
use crate::geodesics::GeodesicState;
use crate::metric::Point;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Expression(#[from] ExprError),

    #[error("eta is not normalized: eta({x}, 0) = {value}")]
    EtaNormalization { x: f64, value: f64 },

    #[error("eta crosses zero near (x, u) = ({x}, {u}); the metric would degenerate")]
    NonPositiveEta { x: f64, u: f64 },

    #[error("degenerate metric at (x, u) = ({x}, {u}): eta = {eta}")]
    DegenerateMetric { x: f64, u: f64, eta: f64 },

    #[error("x = {x} lies outside the x-domain ({lo}, {hi})")]
    OutsideDomain { x: f64, lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point x = {x} lies within {margin} of the boundary of the x-domain")]
    NearBoundary { x: f64, margin: f64 },

    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("plane vectors are parallel (1 - <a,b>^2 = {gram})")]
    ParallelVectors { gram: f64 },

    #[error("coefficient vector is not unit length (|v| = {norm})")]
    NotUnit { norm: f64 },

    #[error("geodesic left the domain at x = {}", exit.x)]
    LeftDomain {
        trajectory: Vec<GeodesicState>,
        exit: Point,
    },

    #[error("path is not monotone in x: x drops from {from} to {to}")]
    NonMonotonePath { from: f64, to: f64 },

    #[error("scalar curvature is not negative at (x, u) = ({x}, {u}): Scal = {scal}")]
    PositiveScal { x: f64, u: f64, scal: f64 },

    #[error("turning angle violates the Lipschitz bound {limit}: |H({s}) - H({t})| = {jump}")]
    LipschitzViolation {
        s: f64,
        t: f64,
        jump: f64,
        limit: f64,
    },

    #[error("curve left the upper half-plane at s = {s}")]
    LeftHalfPlane { s: f64 },

    #[error("x = {x} is outside the declared smooth set")]
    NonSmoothPoint { x: f64 },

    #[error("orthogonal geodesics fail to foliate near ({a}, {b}): {reason}")]
    FoliationFailure { a: f64, b: f64, reason: String },
}
