//! Numerical laboratory for finite-time blow-up in the reduced hydrostatic
//! Euler model `a_t − a² + (∫₀^Z a) a_Z + 2∫₀¹ a² = 0` on `Z ∈ [0, 1]`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod acceptance;
pub mod characteristics;
pub mod cli;
pub mod error;
pub mod modulation;
pub mod par;
pub mod profile;
pub mod quad;
pub mod reduced_pde;
pub mod scaling_laws;
pub mod scenarios;

pub use error::{Error, Result};
