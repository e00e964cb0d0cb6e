//! Exact finite-instance calculus of partial randomness: direct, prefix-free and
//! vehement weights of string sets, good covers, Kraft–Chaitin codes, randomness
//! tests built from complexity estimators, finite Levin systems, and a finite
//! model of DNR propagation through a Π⁰₁ class.

pub mod bits;
pub mod cli;
pub mod codes;
pub mod cylinder;
pub mod dnrsim;
pub mod error;
pub mod gen;
pub mod goodcover;
pub mod io;
pub mod levin;
pub mod rational;
pub mod selftest;
pub mod transforms;
pub mod weight;
pub mod weights;

pub use bits::BitString;
pub use cylinder::{covers, cylinder_measure, minimal_elements, CylinderSet};
pub use error::{Error, Result};
pub use rational::Rational;
pub use weight::{WeightFunction, WeightMode};
