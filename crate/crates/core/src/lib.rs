//! Semiclassical pseudodifferential calculus on the cylinder `ℝ × S¹` with a
//! radial weight `f(r)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`expr`]: exact symbolic expressions over `(r, θ, ρ, η; ħ, z)`.
//! * [`symbols`]: weighted symbol classes, seminorms, sharp products and
//!   resolvent symbols.
//! * [`quantize`]: grid quantisation `Op^t_ħ` acting on half-density fields.
//! * [`diffops`]: semiclassical differential operators in the frame
//!   `(ħD_r, f⁻¹ħD_θ)`.
//! * [`parametrix`]: exact composition and the resolvent parametrix.
//! * [`experiments`]: reproducible numerical experiments driven by the
//!   `endcalc` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod diffops;
pub mod error;
pub mod experiments;
pub mod expr;
pub mod fit;
pub mod parametrix;
pub mod quantize;
pub mod symbols;

pub use error::{Error, Result};
pub use expr::{Expr, Point, Var, C64};
