//! Exact computations with Ramanujan systems of Rankin-Cohen type attached
//! to hyperbolic triangle groups.

pub mod brackets;
pub mod catalog;
pub mod coeff;
pub mod expr;
pub mod graded;
pub mod hypergeom;
pub mod linalg;
pub mod rrc;
pub mod series;
pub mod triangle;
