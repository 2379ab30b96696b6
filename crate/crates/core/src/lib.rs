//! Jet-based curvature computations on coordinate-chart manifolds.

pub mod catalog;
pub mod expr;
pub mod geometry;
pub mod jets;
pub mod quadrature;
pub mod tensor;
pub mod verify;
