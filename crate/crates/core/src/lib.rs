//! Link-level building blocks for uplink rotational generalized spatial
//! modulation with sparse code multiple access (RGSM-SCMA).
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`codebook`]: sparse codebook sets and the factor graph they induce,
//! * [`spatial`]: antenna grouping tables with per-occurrence rotations,
//! * [`phy`]: bit splitting, encoding, Rayleigh fading and AWGN,
//! * [`detectors`]: exhaustive ML, marginal MAP and the message passing detector,
//! * [`complexity`]: closed-form real-operation counts and antenna budgets,
//! * [`sim`]: single Monte Carlo trials and BER statistics.
//!
//! SM-SCMA and GSM-SCMA are handled as degenerate grouping tables
//! ([`spatial::Mode::Sm`] and [`spatial::Mode::Gsm`]).
//!
//! Indices are zero-based throughout: user `u`, resource `r`, codeword `m`
//! and grouping vector `k` all start at 0.

#![no_std]

extern crate alloc;

pub mod codebook;
pub mod complexity;
pub mod detectors;
mod error;
pub mod phy;
pub mod sim;
pub mod spatial;

pub use error::{Error, Result};
pub use num_complex::Complex64;
