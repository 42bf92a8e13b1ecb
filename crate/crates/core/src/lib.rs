//! Finite-volume solver for the pressure-head form of Richards' equation.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below are the types the command-line tool uses.

// `!(x > 0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod case_io;
pub mod constitutive;
pub mod driver;
pub mod fields;
pub mod linsolve;
pub mod mesh;
mod num;
pub mod richards;
pub mod timectl;

pub use num::Scalar;

pub type Mesh64 = mesh::Mesh<f64>;
pub type VanGenuchten64 = constitutive::VanGenuchten<f64>;
pub type FluidProps64 = constitutive::FluidProps<f64>;
pub type Problem64 = richards::Problem<f64>;
pub type CsrMatrix64 = linsolve::CsrMatrix<f64>;
pub type Simulation64 = driver::Simulation<f64>;

pub type Mesh32 = mesh::Mesh<f32>;
pub type Problem32 = richards::Problem<f32>;
pub type Simulation32 = driver::Simulation<f32>;
