//! Discrete Menger-type curvatures, integral curvature energies and
//! multiscale flatness numbers for weighted point clouds.
//!
//! The central objects are [`WeightedCloud`] (a finite sample of an
//! `m`-dimensional set with quadrature weights), [`Simplex`] and
//! [`Subspace`]. Flatness numbers live in [`flatness`], energies in
//! [`energy`], test surfaces and file formats in [`shapes`].

pub mod cloud;
pub mod constants;
pub mod error;
pub mod geom;
pub mod grassmann;

pub use cloud::{unit_ball_volume, Ball, WeightedCloud};
pub use error::{Error, Result};
pub use geom::{Point, Simplex, VoluminousParams};
pub use grassmann::{grassmann_distance, Cone, Subspace};
pub mod flatness;
pub mod energy;
pub mod shapes;
