//! Weighted symbol classes and the symbol-level calculus.
//!
//! Symbols live in classes defined by the bracket `⟨ρ⊕f(r)⁻¹η⟩`. All
//! suprema are taken over a deterministic [`SampleWindow`] and are therefore
//! estimates (lower bounds) of the true seminorms.

mod calculus;
mod chart;
mod resolvent;
mod seminorm;
mod symbol;
mod weight;

pub use calculus::{bisymbol_expansion, sharp_left, sharp_right};
pub use chart::{chart_transfer_leading, AngularDiffeo};
pub use resolvent::{delta_n, ellipticity_margin, resolvent_symbol, ResolventBound};
pub use seminorm::{
    bracket, bracket_sq_expr, derivative_table, sample_inf, sample_sup, seminorm_estimate, seminorm_estimate_sigma,
    Sample, SampleWindow,
};
pub use symbol::{Bisymbol, Symbol, SymbolSeries};
pub use weight::WeightFunction;
