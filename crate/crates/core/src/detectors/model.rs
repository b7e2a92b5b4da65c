//! Per-resource view of one channel use shared by the detectors.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::Tally;
use crate::phy::{ChannelRealization, EffectiveGains, Link, ReceivedSignal};
use crate::spatial::Mode;
use crate::{Error, Result};

/// Everything a detector needs about resource `r`.
pub(crate) struct ResourceModel {
    /// `lambda_r`.
    pub users: Vec<usize>,
    /// `a * (h^r_{u,n} . g_k) * c^r_{u,m}` at `(slot * N_r + n) * P + p`.
    contributions: Vec<Complex64>,
    /// `y^r_n` for every receive antenna.
    received: Vec<Complex64>,
}

pub(crate) struct Model {
    pub pairs: usize,
    pub receive_antennas: usize,
    pub noise_variance: f64,
    pub resources: Vec<ResourceModel>,
    /// `slot_of[u][i]`: position of user `u` inside `lambda` of its `i`-th resource.
    pub slot_of: Vec<Vec<usize>>,
}

impl Model {
    pub fn new<T: Tally>(y: &ReceivedSignal, chan: &ChannelRealization, link: &Link, tally: &mut T) -> Result<Self> {
        let n_r = chan.receive_antennas();
        if y.receive_antennas() != n_r || y.resources() != link.resources() {
            return Err(Error::Dimension(format!(
                "received signal is {}x{}, channel expects {}x{}",
                y.receive_antennas(),
                y.resources(),
                n_r,
                link.resources()
            )));
        }
        let gains = EffectiveGains::new(link, chan)?;
        let graph = link.graph();
        let (pairs, n_c) = (link.pairs(), link.table().rows());

        // Combining taps with grouping vectors: N_a complex products and
        // N_a - 1 complex sums per (u, n, r in omega_u, k). SM is a lookup.
        if link.table().mode() != Mode::Sm {
            let n_a = link.table().active_antennas() as u64;
            let combos = (graph.edges() * n_r * n_c) as u64;
            tally.mul(combos * 4 * n_a);
            tally.add(combos * 2 * (2 * n_a - 1));
        }

        let mut slot_of = Vec::with_capacity(link.users());
        for (u, omega) in graph.omega.iter().enumerate() {
            slot_of.push(
                omega
                    .iter()
                    .map(|&r| {
                        graph.lambda[r]
                            .iter()
                            .position(|&v| v == u)
                            .expect("graph is symmetric")
                    })
                    .collect(),
            );
        }

        let resources = graph
            .lambda
            .iter()
            .enumerate()
            .map(|(r, users)| {
                let mut contributions = Vec::with_capacity(users.len() * n_r * pairs);
                for &u in users {
                    let cb = link.codebooks().codebook(u);
                    for n in 0..n_r {
                        for p in 0..pairs {
                            let (m, k) = (p / n_c, p % n_c);
                            contributions.push(gains.get(u, n, r, k) * cb.entry(r, m));
                        }
                    }
                }
                tally.mul((users.len() * n_r * pairs) as u64 * 4);
                tally.add((users.len() * n_r * pairs) as u64 * 2);
                ResourceModel {
                    users: users.clone(),
                    contributions,
                    received: (0..n_r).map(|n| y.sample(n, r)).collect(),
                }
            })
            .collect();

        Ok(Self {
            pairs,
            receive_antennas: n_r,
            noise_variance: y.noise_variance(),
            resources,
            slot_of,
        })
    }
}

impl ResourceModel {
    /// `sum_n |y^r_n - sum_slot contribution(slot, n, assignment[slot])|^2`.
    #[inline]
    pub fn distance(&self, assignment: &[usize], pairs: usize, n_r: usize) -> f64 {
        let mut total = 0.0;
        for (n, &y) in self.received.iter().enumerate() {
            let mut residual = y;
            for (slot, &p) in assignment.iter().enumerate() {
                residual -= self.contributions[(slot * n_r + n) * pairs + p];
            }
            total += residual.norm_sqr();
        }
        total
    }

    /// Distances of all `pairs^d` assignments of `lambda_r`, in odometer
    /// order (last user fastest). Bit-identical to calling
    /// [`ResourceModel::distance`] on each assignment.
    pub fn all_distances<T: Tally>(&self, pairs: usize, n_r: usize, tally: &mut T) -> Vec<f64> {
        let d = self.users.len();
        let Some(last) = d.checked_sub(1) else {
            tally.mul(2 * n_r as u64);
            tally.add((2 * n_r as u64).saturating_sub(1));
            return alloc::vec![self.received.iter().map(|y| y.norm_sqr()).sum()];
        };
        let rows = pairs.pow(last as u32);
        let mut out = Vec::with_capacity(rows * pairs);
        let mut digits = alloc::vec![0usize; last];
        let mut partial = alloc::vec![Complex64::new(0.0, 0.0); n_r];
        let tail = &self.contributions[last * n_r * pairs..];
        for _ in 0..rows {
            for (n, r) in partial.iter_mut().enumerate() {
                let mut residual = self.received[n];
                for (slot, &p) in digits.iter().enumerate() {
                    residual -= self.contributions[(slot * n_r + n) * pairs + p];
                }
                *r = residual;
            }
            for p in 0..pairs {
                let mut total = 0.0;
                for (n, r) in partial.iter().enumerate() {
                    total += (r - tail[n * pairs + p]).norm_sqr();
                }
                out.push(total);
            }
            advance(&mut digits, pairs);
        }
        let (rows, entries, n_r, last) = (rows as u64, (rows * pairs) as u64, n_r as u64, last as u64);
        // residual prefixes once per row; then per entry and antenna a complex
        // subtraction and |.|^2, summed over antennas
        tally.add(rows * n_r * 2 * last + entries * (3 * n_r + n_r - 1));
        tally.mul(entries * 2 * n_r);
        out
    }
}

/// Odometer over `digits.len()` digits in base `base`, first digit most significant.
#[inline]
pub(crate) fn advance(digits: &mut [usize], base: usize) {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return;
        }
        *d = 0;
    }
}
