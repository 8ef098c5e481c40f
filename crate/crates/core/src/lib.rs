//! Two closed disks glued along their boundary circle by a diffeomorphism
//! `f`, foliated by concentric circles, with a metric whose horizontal
//! geodesics are radial segments.
//!
//! A horizontal geodesic leaving one center crosses the gluing circle at
//! `p`, continues along the diameter through `f(p)` in the other disk,
//! crosses back at `f⁻¹(−f(p))` and so on. It closes exactly when `p` is
//! periodic for the transition map `T = −f⁻¹ ∘ (−f)`. The crate provides
//!
//! * [`circle_map`]: monotone lifts of circle diffeomorphisms and their inverses,
//! * [`period`]: the transition map, periods and whole-circle scans,
//! * [`metric`]: the warped metric `dt² + φ(t, θ)² dθ²` on both charts,
//! * [`geodesic`]: exact itineraries and a numerical geodesic integrator,
//! * [`verifier`]: foliation checks and common-period arithmetic,
//! * [`cli`]: the `glued-sphere` command line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod angle;
pub mod circle_map;
pub mod cli;
pub mod config;
pub mod error;
pub mod geodesic;
pub mod metric;
pub mod period;
pub mod smooth;
pub mod spline;
pub mod verifier;

pub use angle::Angle;
pub use circle_map::CircleDiffeo;
pub use error::{Error, Result};
pub use metric::GluedMetric;
pub use period::{Period, TransitionMap};
