//! File formats, parallel BER sweeps and report generation on top of
//! `rgsm-scma-core`. The `rgsm-scma` binary is a thin front end over this
//! crate.

pub mod codebook_file;
pub mod config;
mod error;
pub mod report;
pub mod results;
pub mod sweep;
pub mod table_file;
pub mod trace;

pub use error::{Error, Result};

/// Formats `x` with 17 significant digits, which identifies every `f64`.
pub(crate) fn exact_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `[re, im]` with [`exact_float`].
pub(crate) fn exact_pair(c: num_complex::Complex64) -> String {
    format!("[{}, {}]", exact_float(c.re), exact_float(c.im))
}
