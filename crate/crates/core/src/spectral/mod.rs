//! Periodic grids, fields, Fourier transforms, spectral operators and norms.

mod field;
mod grid;
pub mod norms;
mod ops;

pub use field::{Field1D, Field2D, Spectrum1D, Spectrum2D};
pub(crate) use field::fft2;
pub use grid::{signed_index, Grid1D, Grid2D};
pub use norms::{hk_norm_1d, hk_x_profile, hk_x_slice_norm, hs_minus1_norm, hs_norm_2d, w1_norm};
pub use ops::{MeanTolerance, DEFAULT_MEAN_TOL};
