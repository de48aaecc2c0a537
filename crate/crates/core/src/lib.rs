//! Isometric deformations of complex quadrics: the quadric, Peterson's
//! explicit family of deformations, their induced geometry and numerical
//! verification suites for the identities they satisfy.

pub mod checks;
pub mod cli;
pub mod cx;
pub mod error;
pub mod geometry;
pub mod immersions;
pub mod jet;
pub mod linalg;
pub mod quadrature;

pub use cx::Cx;
pub use error::{Error, Result};
