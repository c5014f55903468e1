//! Small-strain elasto-plasticity with a fractional flow rule.
//!
//! The plastic flow direction is the normalised Riesz–Caputo fractional
//! gradient of the von-Mises yield function. The crate provides the tensor
//! algebra, the fractional derivative, explicit and implicit material updates,
//! P1 finite-element assembly on simplicial meshes and a semismooth Newton
//! load-stepping driver. It builds without the standard library.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod fem;
pub mod fracdiff;
pub mod linalg;
pub mod material;
pub mod math;
pub mod mesh;
pub mod solver;
pub mod sweep;
pub mod tensors;

pub use fracdiff::{FracConfig, FracError, PerturbationMode};
pub use material::{MaterialError, PointState, Tangent, UpdateResult};
pub use mesh::{Mesh, MeshError};
pub use tensors::{MaterialParams, SymTensor, Tensor4};
