//! Construction of convex billiard tables with a caustic of rotation number
//! `1/q`, and independent verification by shooting billiard orbits.

// `!(x > t)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod billiard;
pub mod boundary;
pub mod error;
pub mod fft;
pub mod fit;
pub mod geom;
pub mod lazutkin;
pub mod par;
pub mod periodic;
pub mod presets;
pub mod series;
pub mod solver;
pub mod verify;

pub use boundary::{ConvexityThresholds, CurvatureProfile, FourierCurve, ParamKind};
pub use error::{Error, Result};
pub use geom::Vec2;
pub use periodic::{CircleMap, Direction, GridFn};
pub use solver::{forge, ForgeConfig, ForgeResult};
pub use verify::{CausticReport, VerifyThresholds};
