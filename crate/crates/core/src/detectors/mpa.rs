//! Sum-product message passing over the joint `(m, k)` alphabet.
//!
//! Every edge `(r, u)` of the factor graph carries two vectors of length
//! `P = N_c M`, one per direction. Variable-to-function messages start
//! uniform at `1/P`. Each iteration first updates all function-to-variable
//! messages
//!
//! ```text
//! f_r -> v_u (p) = sum over the pairs of the other users on r of
//!                  L_r(p, others) * prod_{i != u} (v_i -> f_r)(p_i)
//! ```
//!
//! where `L_r` is the product over receive antennas of the Gaussian
//! likelihood of `y^r_n`, and then all variable-to-function messages
//!
//! ```text
//! v_u -> f_r (p) = gamma * prod_{j in omega_u, j != r} (f_j -> v_u)(p)
//! ```
//!
//! with `gamma` making the message sum to one. Function-to-variable messages
//! are also scaled to unit sum; that does not change any decision. After the
//! last iteration user `u` picks the pair maximizing
//! `prod_{j in omega_u} (f_j -> v_u)(p)`.
//!
//! The grouping vector index is part of the pair, so the same `k` is
//! enforced on all resources of a user.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::model::{advance, Model};
use super::{argmax, Decision, DetectorConfig, Tally};
use crate::phy::{ChannelRealization, Link, ReceivedSignal};
use crate::{Error, Result};

/// A message on edge `(resource, user)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMessage {
    pub resource: usize,
    pub user: usize,
    /// Probability per pair index.
    pub values: Vec<f64>,
}

/// Snapshot of all messages after `iteration` iterations.
///
/// At iteration 0 only the initial variable-to-function messages exist and
/// `fn_to_vn` is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageState {
    pub iteration: usize,
    pub fn_to_vn: Vec<EdgeMessage>,
    pub vn_to_fn: Vec<EdgeMessage>,
}

/// Message passing detection.
pub fn mpa_decode(
    y: &ReceivedSignal,
    chan: &ChannelRealization,
    link: &Link,
    cfg: &DetectorConfig,
) -> Result<Decision> {
    cfg.validate()?;
    run(y, chan, link, cfg, &mut super::NoTally, None, None)
}

/// [`mpa_decode`] that also records the message state at every iteration,
/// starting with the initial one.
pub fn mpa_decode_traced(
    y: &ReceivedSignal,
    chan: &ChannelRealization,
    link: &Link,
    cfg: &DetectorConfig,
) -> Result<(Decision, Vec<MessageState>)> {
    cfg.validate()?;
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    let decision = run(y, chan, link, cfg, &mut super::NoTally, Some(&mut trace), None)?;
    Ok((decision, trace))
}

struct Edges {
    /// First edge id of each resource; edge `(r, slot)` is `offset[r] + slot`.
    offset: Vec<usize>,
    /// `(resource, user)` per edge id.
    ends: Vec<(usize, usize)>,
}

impl Edges {
    fn new(model: &Model) -> Self {
        let mut offset = Vec::with_capacity(model.resources.len());
        let mut ends = Vec::new();
        for (r, res) in model.resources.iter().enumerate() {
            offset.push(ends.len());
            ends.extend(res.users.iter().map(|&u| (r, u)));
        }
        Self { offset, ends }
    }

    fn id(&self, resource: usize, slot: usize) -> usize {
        self.offset[resource] + slot
    }
}

/// Shared driver; `tally` counts real operations of the linear-domain path.
pub(crate) fn run<T: Tally>(
    y: &ReceivedSignal,
    chan: &ChannelRealization,
    link: &Link,
    cfg: &DetectorConfig,
    tally: &mut T,
    mut trace: Option<&mut Vec<MessageState>>,
    table_scale: Option<&[f64]>,
) -> Result<Decision> {
    let model = Model::new(y, chan, link, tally)?;
    let edges = Edges::new(&model);
    let pairs = model.pairs;
    let graph = link.graph();
    let domain: &dyn Domain = if cfg.log_domain { &LogDomain } else { &LinearDomain };

    let tables = model
        .resources
        .iter()
        .enumerate()
        .map(|(r, res)| {
            let mut table = res.all_distances(pairs, model.receive_antennas, tally);
            let size = table.len();
            tally.mul(size as u64);
            let mut clamped = 0usize;
            for v in table.iter_mut() {
                let (value, was_clamped) = domain.likelihood(-*v / model.noise_variance, cfg.likelihood_floor);
                clamped += usize::from(was_clamped);
                *v = value;
            }
            if size > 0 && clamped == size {
                return Err(Error::NumericalUnderflow(format!(
                    "every hypothesis on resource {r} fell below the likelihood floor"
                )));
            }
            Ok(table)
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let mut tables = tables;
    if let Some(scale) = table_scale {
        for (table, &c) in tables.iter_mut().zip(scale) {
            for v in table.iter_mut() {
                *v = if cfg.log_domain { *v + libm::log(c) } else { *v * c };
            }
        }
    }

    let mut vn = vec![vec![domain.uniform(pairs); pairs]; edges.ends.len()];
    let mut fun = vec![vec![0.0; pairs]; edges.ends.len()];
    if let Some(trace) = trace.as_deref_mut() {
        trace.push(MessageState {
            iteration: 0,
            fn_to_vn: Vec::new(),
            vn_to_fn: domain.export(&edges, &vn),
        });
    }

    for iteration in 1..=cfg.iterations {
        for (r, res) in model.resources.iter().enumerate() {
            let d = res.users.len();
            if d == 0 {
                continue;
            }
            let ids: Vec<usize> = (0..d).map(|slot| edges.id(r, slot)).collect();
            let incoming: Vec<&[f64]> = ids.iter().map(|&e| vn[e].as_slice()).collect();
            let outgoing = domain.function_update(&tables[r], &incoming, pairs, tally);
            for (slot, msg) in outgoing.into_iter().enumerate() {
                fun[ids[slot]] = domain.normalize(msg, tally).ok_or_else(|| {
                    Error::NumericalUnderflow(format!(
                        "message from resource {r} to user {} vanished at iteration {iteration}",
                        res.users[slot]
                    ))
                })?;
            }
        }
        for (u, omega) in graph.omega.iter().enumerate() {
            let ids: Vec<usize> = omega
                .iter()
                .zip(&model.slot_of[u])
                .map(|(&r, &slot)| edges.id(r, slot))
                .collect();
            for (i, &target) in ids.iter().enumerate() {
                let mut others = ids
                    .iter()
                    .enumerate()
                    .filter(|&(l, _)| l != i)
                    .map(|(_, &e)| fun[e].as_slice());
                let product = domain.product(&mut others, pairs, tally);
                vn[target] = domain.normalize(product, tally).ok_or_else(|| {
                    Error::NumericalUnderflow(format!(
                        "message from user {u} to resource {} vanished at iteration {iteration}",
                        omega[i]
                    ))
                })?;
            }
        }
        if let Some(trace) = trace.as_deref_mut() {
            trace.push(MessageState {
                iteration,
                fn_to_vn: domain.export(&edges, &fun),
                vn_to_fn: domain.export(&edges, &vn),
            });
        }
    }

    let mut decided = Vec::with_capacity(link.users());
    let mut posteriors = Vec::with_capacity(link.users());
    for (u, omega) in graph.omega.iter().enumerate() {
        let product = if cfg.iterations == 0 {
            domain.product(&mut core::iter::empty(), pairs, tally)
        } else {
            let mut msgs = omega
                .iter()
                .zip(&model.slot_of[u])
                .map(|(&r, &slot)| fun[edges.id(r, slot)].as_slice());
            domain.product(&mut msgs, pairs, tally)
        };
        let posterior = domain
            .normalize(product, tally)
            .map(|p| domain.to_linear(p))
            .ok_or_else(|| Error::NumericalUnderflow(format!("posterior of user {u} vanished")))?;
        decided.push(argmax(&posterior));
        posteriors.push(posterior);
    }
    Ok(Decision::from_pairs(link, &decided, Some(posteriors)))
}

/// Arithmetic of one message representation.
trait Domain {
    /// Table entry from `-distance / N0`, and whether the floor was applied.
    fn likelihood(&self, scaled: f64, floor: f64) -> (f64, bool);
    fn uniform(&self, pairs: usize) -> f64;
    fn function_update(
        &self,
        table: &[f64],
        incoming: &[&[f64]],
        pairs: usize,
        tally: &mut dyn TallyDyn,
    ) -> Vec<Vec<f64>>;
    fn product(&self, msgs: &mut dyn Iterator<Item = &[f64]>, pairs: usize, tally: &mut dyn TallyDyn) -> Vec<f64>;
    /// Scales to unit total probability; `None` if nothing is left.
    fn normalize(&self, msg: Vec<f64>, tally: &mut dyn TallyDyn) -> Option<Vec<f64>>;
    fn to_linear(&self, msg: Vec<f64>) -> Vec<f64>;

    fn export(&self, edges: &Edges, msgs: &[Vec<f64>]) -> Vec<EdgeMessage> {
        edges
            .ends
            .iter()
            .zip(msgs)
            .map(|(&(resource, user), values)| EdgeMessage {
                resource,
                user,
                values: self.to_linear(values.clone()),
            })
            .collect()
    }
}

/// Object-safe view of [`Tally`].
trait TallyDyn {
    fn add(&mut self, n: u64);
    fn mul(&mut self, n: u64);
}

impl<T: Tally> TallyDyn for T {
    #[inline]
    fn add(&mut self, n: u64) {
        Tally::add(self, n)
    }
    #[inline]
    fn mul(&mut self, n: u64) {
        Tally::mul(self, n)
    }
}

struct LinearDomain;

impl Domain for LinearDomain {
    fn likelihood(&self, scaled: f64, floor: f64) -> (f64, bool) {
        let value = libm::exp(scaled);
        if value < floor || value == 0.0 {
            (floor, true)
        } else {
            (value, false)
        }
    }

    fn uniform(&self, pairs: usize) -> f64 {
        1.0 / pairs as f64
    }

    fn function_update(
        &self,
        table: &[f64],
        incoming: &[&[f64]],
        pairs: usize,
        tally: &mut dyn TallyDyn,
    ) -> Vec<Vec<f64>> {
        // The last digit varies fastest, so the table splits into rows of
        // `pairs` entries that share the other users' pairs.
        let d = incoming.len();
        let mut out = vec![vec![0.0; pairs]; d];
        let Some(last) = d.checked_sub(1) else {
            return out;
        };
        let q = incoming[last];
        let mut digits = vec![0usize; last];
        let mut excluded = vec![0.0; last];
        for row in table.chunks_exact(pairs) {
            // product of the other non-last users' messages, per slot
            for (slot, e) in excluded.iter_mut().enumerate() {
                *e = (0..last)
                    .filter(|&i| i != slot)
                    .map(|i| incoming[i][digits[i]])
                    .product();
            }
            let prefix = match last {
                0 => 1.0,
                _ => excluded[0] * incoming[0][digits[0]],
            };
            let mut dot = 0.0;
            for ((o, &w), &m) in out[last].iter_mut().zip(row).zip(q) {
                *o += w * prefix;
                dot += w * m;
            }
            for (slot, &e) in excluded.iter().enumerate() {
                out[slot][digits[slot]] += e * dot;
            }
            advance(&mut digits, pairs);
        }
        let rows = (table.len() / pairs.max(1)) as u64;
        let last = last as u64;
        tally.mul(table.len() as u64 * 2 + rows * (last * last.saturating_sub(2) + last.min(1) + last));
        tally.add(table.len() as u64 * 2 + rows * last);
        out
    }

    fn product(&self, msgs: &mut dyn Iterator<Item = &[f64]>, pairs: usize, tally: &mut dyn TallyDyn) -> Vec<f64> {
        let Some(first) = msgs.next() else {
            return vec![1.0; pairs];
        };
        let mut acc = first.to_vec();
        for msg in msgs {
            for (a, b) in acc.iter_mut().zip(msg) {
                *a *= b;
            }
            tally.mul(pairs as u64);
        }
        acc
    }

    fn normalize(&self, mut msg: Vec<f64>, tally: &mut dyn TallyDyn) -> Option<Vec<f64>> {
        let total: f64 = msg.iter().sum();
        tally.add(msg.len() as u64 - 1);
        if !(total > 0.0) || !total.is_finite() {
            return None;
        }
        let gamma = 1.0 / total;
        for v in &mut msg {
            *v *= gamma;
        }
        tally.mul(msg.len() as u64 + 1);
        Some(msg)
    }

    fn to_linear(&self, msg: Vec<f64>) -> Vec<f64> {
        msg
    }
}

/// Messages held as natural logarithms, normalized so that their
/// exponentials sum to one.
struct LogDomain;

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + libm::log(values.iter().map(|v| libm::exp(v - max)).sum::<f64>())
}

impl Domain for LogDomain {
    fn likelihood(&self, scaled: f64, _floor: f64) -> (f64, bool) {
        (scaled, false)
    }

    fn uniform(&self, pairs: usize) -> f64 {
        -libm::log(pairs as f64)
    }

    fn function_update(
        &self,
        table: &[f64],
        incoming: &[&[f64]],
        pairs: usize,
        _tally: &mut dyn TallyDyn,
    ) -> Vec<Vec<f64>> {
        let d = incoming.len();
        let term = |digits: &[usize], weight: f64, slot: usize| {
            let mut t = weight;
            for (i, msg) in incoming.iter().enumerate() {
                if i != slot {
                    t += msg[digits[i]];
                }
            }
            t
        };
        let mut max = vec![vec![f64::NEG_INFINITY; pairs]; d];
        let mut digits = vec![0usize; d];
        for &weight in table {
            for slot in 0..d {
                let t = term(&digits, weight, slot);
                let m = &mut max[slot][digits[slot]];
                if t > *m {
                    *m = t;
                }
            }
            advance(&mut digits, pairs);
        }
        let mut sum = vec![vec![0.0; pairs]; d];
        for &weight in table {
            for slot in 0..d {
                let m = max[slot][digits[slot]];
                if m > f64::NEG_INFINITY {
                    sum[slot][digits[slot]] += libm::exp(term(&digits, weight, slot) - m);
                }
            }
            advance(&mut digits, pairs);
        }
        max.into_iter()
            .zip(sum)
            .map(|(m, s)| m.into_iter().zip(s).map(|(m, s)| m + libm::log(s)).collect())
            .collect()
    }

    fn product(&self, msgs: &mut dyn Iterator<Item = &[f64]>, pairs: usize, _tally: &mut dyn TallyDyn) -> Vec<f64> {
        let mut acc = vec![0.0; pairs];
        for msg in msgs {
            for (a, b) in acc.iter_mut().zip(msg) {
                *a += b;
            }
        }
        acc
    }

    fn normalize(&self, mut msg: Vec<f64>, _tally: &mut dyn TallyDyn) -> Option<Vec<f64>> {
        let total = log_sum_exp(&msg);
        if !total.is_finite() {
            return None;
        }
        for v in &mut msg {
            *v -= total;
        }
        Some(msg)
    }

    fn to_linear(&self, msg: Vec<f64>) -> Vec<f64> {
        msg.into_iter().map(libm::exp).collect()
    }
}
