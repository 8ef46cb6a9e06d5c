//! Discrete dynamics of the thickness landscape between nested convex
//! boundaries.
//!
//! A smooth convex core sits inside an enclosing outer domain. The
//! thickness of the shell between the two boundaries, measured along the
//! core's outward normals by ray casting, defines a scalar landscape on
//! the core boundary. The return step advances a boundary point by the
//! thickness-weighted descent `c ← retract(c − 2 d(c) ∇d(c))`, a
//! variable-step gradient descent whose step size is the local round-trip
//! length. Trajectories slide toward the thinnest part of the shell,
//! the squared-thickness energy decreases monotonically, and the phase
//! space decomposes into basins of the thickness landscape's minima.
//!
//! Module map:
//! - [`geometry`] — implicit cores and outer domains, normals, tangent
//!   frames, boundary projection, radial bump profiles.
//! - [`maps`] — ray-cast thickness, the radial and reciprocal boundary
//!   legs, the return step, and sampled admissibility screening.
//! - [`calculus`] — finite-difference tangential gradient/Hessian on the
//!   core boundary and the numerical Jacobian of the return step.
//! - [`dynamics`] — trajectory iteration with a Lyapunov monitor, cycle
//!   detection, and empirical descent-constant estimation.
//! - [`analysis`] — critical-point search and stability classification,
//!   basins of attraction, first-order expansion verification, SVG export.
//! - [`catalog`] — named closed-form scenarios used by tests and the CLI.

pub mod analysis;
pub mod calculus;
pub mod catalog;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod maps;
pub mod sampling;

pub use error::{Error, Result};

/// Ambient vector type. Planar (2D) scenarios keep the z component at zero.
pub type Vec3 = nalgebra::Vector3<f64>;
