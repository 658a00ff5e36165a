//! Spectral machinery for no-slip boundary conditions of 2D vorticity flows
//! in the exterior of a disc and of conformally mapped obstacles.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bessel;
pub mod biot_savart;
pub mod conformal;
pub mod control;
pub mod error;
pub mod grid;
pub mod harness;
pub mod nonlinear;
pub mod quadrature;
pub mod stokes;
pub mod weber_orr;

pub use error::{Error, Result};
