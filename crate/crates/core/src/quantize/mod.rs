//! Grid quantisation of symbols and operator-level measurements.
//!
//! Fields are sampled on a periodic window in `r` and the full circle in
//! `θ`. The dual lattice `ρ_m = 2πħm/L_r`, `η_l = ħl` makes every phase
//! `e^{ip·(q-q')/ħ}` exactly periodic, so the discrete `Op^t_ħ` satisfies the
//! adjoint relation `Op^t(a)* = Op^{1-t}(ā)` exactly.

mod atlas;
mod grid;
mod norm;
mod op;
mod partition;
mod scaling;

pub(crate) use atlas::smooth_step;
pub use atlas::{chart_conjugate, ArcField, EtaQuadrature, TwoArcAtlas};
pub use grid::{clean_spectrum, fft2, fft_r, fft_theta, random_test_field, Grid, HalfDensityField};
pub use norm::{op_norm_estimate, random_field, FnOperator, LinearOperator};
pub use op::{apply_op, hbar_d_r, hbar_d_theta, multiplier, QuantizedOp};
pub use partition::{block_norm_table, BlockNormTable, PartitionOfUnity};
pub use scaling::{direct_block, scaling_conjugate, MomentumQuadrature, QuadratureWindow, ScalingMap, WindowField};
