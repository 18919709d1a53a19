//! Numerical model of multiplicative quiver varieties attached to a framed
//! cyclic quiver.
//!
//! Points of the representation space are stored as block matrices, the
//! quasi-Poisson structure is evaluated through Van den Bergh double brackets
//! on a word alphabet, and the commuting Hamiltonian families of the spin
//! Ruijsenaars–Schneider type are assembled on top of that.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bracket;
pub mod error;
pub mod flows;
pub mod hamiltonians;
pub mod linalg;
pub mod quiver;
pub mod reduction;
pub mod rep_space;
pub mod sampling;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
pub use quiver::{ModelSpec, ParameterSet};
pub use rep_space::RepPoint;
