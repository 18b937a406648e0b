//! Periodic spectral backbone: grids, fields, Fourier multipliers, norms and
//! the Littlewood–Paley partition.

mod dyadic;
mod field;
mod grid;
mod multiplier;
mod norms;

pub use dyadic::{bump, psi, smooth_step, Band, DyadicPartition};
pub use field::{ComplexField, RealField};
pub use grid::{antiderivative_symbol, hilbert_symbol, Grid, GridSpec, PeriodicGrid, C64};
pub use multiplier::{abs_pow, FourierMultiplier};
pub use norms::{
    homogeneous_sobolev_norm, lq_norm, mixed_norm, sobolev_norm, time_lp_norm, DerivativeWeight,
    MixedNormSpec, NormOrder,
};
