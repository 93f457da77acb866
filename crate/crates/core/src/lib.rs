//! Numerical models of constant-mean-curvature foliations.
//!
//! Two constructions are implemented end to end, with verification suites
//! for every quantitative property they are supposed to carry:
//!
//! * the rotationally symmetric enlarged Reeb-type foliation of the solid
//!   torus: a warped metric on the unit disk whose zero-flux profile graph
//!   generates a family of constant-mean-curvature leaves asymptotic to a
//!   cylinder, padded by cylinder leaves that become minimal near the
//!   boundary ([`radial`], [`ode`], [`reeb`]);
//! * a flat-torus foliation with two Reeb components and a metric, built
//!   from a solved one-form, for which a prescribed sign-changing function
//!   is the signed geodesic curvature of every leaf ([`torus2d`]).

pub mod error;
pub mod geom;
pub mod mesh;
pub mod ode;
pub mod quad;
pub mod radial;
pub mod reeb;
pub mod report;
pub mod torus2d;

pub use error::{Error, Result};
pub use radial::{Dimension, RadialProfile};
pub use report::{Check, Provenance, VerificationReport};
