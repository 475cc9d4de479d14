//! Quadratic first integrals of time-dependent Newtonian systems on flat space.
//!
//! The crate builds candidate integrals symbolically, checks them against the
//! determining equations and measures their conservation along numerically
//! integrated trajectories.

pub mod symexpr;
pub mod geometry;
pub mod linalg;
pub mod conditions;
pub mod catalog;
pub mod dynamics;
pub mod dampxform;
