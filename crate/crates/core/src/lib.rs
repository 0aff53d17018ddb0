//! Numerical laboratory for C1 domains whose boundary is driven by a
//! lacunary Fourier series, and for the limited boundary regularity of the
//! Dirichlet and Neumann Poisson problems posed on them.
//!
//! Modules, bottom-up:
//!
//! * [`lacunary`]: the series, its growth conditions and the constant gamma.
//! * [`separation`]: fractional seminorm integrals of the series on dyadic intervals.
//! * [`geometry`]: the planar domain, normals, trace relations and the 3D extensions.
//! * [`poisson`]: P1 finite elements on boundary-fitted polar meshes.
//! * [`regularity`]: seminorm sweeps comparing rough domains with the disk.

pub mod angle;
pub mod error;
pub mod geometry;
pub mod io;
pub mod lacunary;
pub mod logmag;
pub mod poisson;
pub mod quadrature;
pub mod reduce;
pub mod regularity;
pub mod separation;
pub mod sparse;

pub use angle::RationalAngle;
pub use error::{Error, Result};
pub use lacunary::{LacunaryParams, Mode};
pub use logmag::LogMagnitude;
