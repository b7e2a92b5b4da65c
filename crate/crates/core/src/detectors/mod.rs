//! Multi-user detectors.
//!
//! All three detectors estimate, for every user, the pair `(m, k)` of
//! codeword and grouping vector. Pairs are indexed codeword-major
//! (`m * N_c + k`, see [`Link::pair_index`]) and ties always go to the lowest
//! index, so decisions are deterministic.
//!
//! * [`ml_decode`]: joint minimum-distance search over all `(N_c M)^U`
//!   hypotheses. Implemented as a depth-first branch and bound that is exact:
//!   a subtree is only skipped when its partial distance already exceeds the
//!   best complete hypothesis.
//! * [`map_decode`]: per-user marginals of the joint posterior.
//! * [`mpa_decode`]: sum-product message passing on the factor graph.

mod map;
mod ml;
mod model;
mod mpa;
mod ops;

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::phy::{ChannelRealization, EffectiveGains, Link};
use crate::{Error, Result};

pub use map::map_decode;
pub use ml::ml_decode;
pub use mpa::{mpa_decode, mpa_decode_traced, EdgeMessage, MessageState};
pub use ops::{count_runtime_ops, NoTally, Tally};

/// Detector settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Message passing iterations `T`.
    pub iterations: usize,
    /// Largest `(N_c M)^U` the exhaustive detectors accept.
    pub joint_space_cap: u128,
    /// Lower clamp for linear-domain likelihoods.
    pub likelihood_floor: f64,
    /// Run message passing on log-probabilities instead of probabilities.
    pub log_domain: bool,
    /// [`map_decode`] skips a subtree when its total posterior mass is
    /// provably below this fraction of the best hypothesis. Zero enumerates
    /// every hypothesis.
    pub map_prune_tolerance: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            iterations: 2,
            joint_space_cap: 1 << 32,
            likelihood_floor: 1e-300,
            log_domain: false,
            map_prune_tolerance: 1e-30,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Domain("message passing needs at least one iteration".into()));
        }
        if self.joint_space_cap == 0 {
            return Err(Error::Domain("joint space cap must be at least 1".into()));
        }
        if !(self.likelihood_floor >= 0.0 && self.likelihood_floor < 1.0) {
            return Err(Error::Domain(format!(
                "likelihood floor must lie in [0, 1), got {}",
                self.likelihood_floor
            )));
        }
        if !(self.map_prune_tolerance >= 0.0 && self.map_prune_tolerance < 1.0) {
            return Err(Error::Domain(format!(
                "MAP prune tolerance must lie in [0, 1), got {}",
                self.map_prune_tolerance
            )));
        }
        Ok(())
    }
}

/// Estimate for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct UserDecision {
    pub codeword: usize,
    pub group: usize,
    /// Recovered bits, spatial bits first.
    pub bits: Vec<u8>,
    /// Normalized score per pair index, when the detector produces one.
    pub posterior: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub users: Vec<UserDecision>,
}

impl Decision {
    fn from_pairs(link: &Link, pairs: &[usize], posteriors: Option<Vec<Vec<f64>>>) -> Self {
        let mut posteriors = posteriors.map(|p| p.into_iter());
        let users = pairs
            .iter()
            .map(|&p| {
                let (codeword, group) = link.pair(p);
                UserDecision {
                    codeword,
                    group,
                    bits: link.bits_for(codeword, group),
                    posterior: posteriors.as_mut().and_then(Iterator::next),
                }
            })
            .collect();
        Self { users }
    }

    /// Decided pair index per user.
    pub fn pairs(&self, link: &Link) -> Vec<usize> {
        self.users
            .iter()
            .map(|u| link.pair_index(u.codeword, u.group))
            .collect()
    }
}

/// Lowest index of the maximum; NaN never wins.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] || values[best].is_nan() {
            best = i;
        }
    }
    best
}

/// `exp(-|y - sum_j h_j . g_j * c_j|^2 / N0)` on one resource at one receive
/// antenna, clamped below by `floor`.
///
/// `candidates` lists `(user, codeword, group)` for exactly the users that
/// share `resource`.
#[allow(clippy::too_many_arguments)]
pub fn likelihood(
    y: Complex64,
    resource: usize,
    rx: usize,
    candidates: &[(usize, usize, usize)],
    chan: &ChannelRealization,
    link: &Link,
    noise_variance: f64,
    floor: f64,
) -> Result<f64> {
    let users = &link.graph().lambda[resource];
    let mut covered: Vec<usize> = candidates.iter().map(|c| c.0).collect();
    covered.sort_unstable();
    if covered != *users {
        return Err(Error::Dimension(format!(
            "candidates cover users {covered:?}, resource {resource} is shared by {users:?}"
        )));
    }
    if rx >= chan.receive_antennas() {
        return Err(Error::Dimension(format!("receive antenna {rx} out of range")));
    }
    let gains = EffectiveGains::new(link, chan)?;
    let mut residual = y;
    for &(u, m, k) in candidates {
        if m >= link.codebooks().codewords() || k >= link.table().rows() {
            return Err(Error::Dimension(format!("pair ({m}, {k}) out of range")));
        }
        residual -= gains.get(u, rx, resource, k) * link.codebooks().codebook(u).entry(resource, m);
    }
    Ok(libm::exp(-residual.norm_sqr() / noise_variance).max(floor))
}

/// `(N_c M)^U`, saturating.
pub(crate) fn joint_space_size(link: &Link) -> u128 {
    let pairs = link.pairs() as u128;
    (0..link.users())
        .try_fold(1u128, |acc, _| acc.checked_mul(pairs))
        .unwrap_or(u128::MAX)
}

pub(crate) fn check_joint_space(link: &Link, cfg: &DetectorConfig) -> Result<()> {
    let size = joint_space_size(link);
    if size > cfg.joint_space_cap {
        return Err(Error::SearchSpaceTooLarge {
            size,
            cap: cfg.joint_space_cap,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests;
