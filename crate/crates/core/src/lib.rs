//! Weighted Bergman kernels, Bergman metrics and Kähler quantization on
//! Reinhardt model domains and on CP¹ with S¹-invariant potentials.

pub mod error;
pub mod line_fn;
pub mod quadrature;
pub mod weights;
pub mod bergman_local;
pub mod estimates;
pub mod report;
pub mod toric_cp1;
pub mod measure_quant;
pub mod energy;

pub use error::{Error, Result};
