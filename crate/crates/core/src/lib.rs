//! Multi-horizon asymptotically hyperbolic metrics by conformal gluing.
//!
//! Seeds with nested constant-mean-curvature spheres are translated apart in
//! hyperbolic space, glued with a cutoff, and corrected by a conformal factor
//! solving a Yamabe-type equation. The crate measures each stage: curvature
//! defect, barrier bounds, horizon persistence and mass.

// `!(x > 0.0)` is how NaN gets rejected along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod curvature;
pub mod error;
pub mod fixtures;
pub mod gluing;
pub mod grid;
pub mod horizons;
pub mod hypgeom;
pub mod io;
pub mod mass;
pub mod pipeline;
pub mod quad;
pub mod seedprofile;
pub mod stats;
pub mod yamabe;

pub use error::{ConfigError, Error, Result};
