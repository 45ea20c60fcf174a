use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exponential proximity kernel `exp(-distance^2 / sigma^2)`.
pub fn kernel_weight<T: Scalar>(distance: T, sigma: T) -> Result<T> {
    if !(sigma > T::zero()) {
        return Err(Error::argument(format!("kernel width must be positive, got {sigma}")));
    }
    Ok((-(distance * distance) / (sigma * sigma)).exp())
}

/// Default kernel width for `n_columns` features: `0.75 * n`.
pub fn default_sigma(n_columns: usize) -> f64 {
    0.75 * n_columns as f64
}
