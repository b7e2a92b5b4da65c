use alloc::vec;
use alloc::vec::Vec;

use super::model::Model;
use super::{check_joint_space, mpa, Decision, DetectorConfig, NoTally};
use crate::phy::{ChannelRealization, Link, ReceivedSignal};
use crate::Result;

/// Depth-first walk over joint hypotheses, user 0 outermost.
///
/// The total distance is a sum of per-resource terms; resource `r` is
/// charged as soon as the last user of `lambda_r` is assigned, so every
/// prefix carries a lower bound on the distance of all its completions.
pub(crate) struct Search<'a> {
    pub model: &'a Model,
    /// Resources charged when user `depth` is assigned.
    completes: Vec<Vec<usize>>,
    pub assignment: Vec<usize>,
    scratch: Vec<usize>,
}

impl<'a> Search<'a> {
    pub fn new(model: &'a Model, users: usize) -> Self {
        let mut completes = vec![Vec::new(); users];
        for (r, res) in model.resources.iter().enumerate() {
            // empty resources only add a constant; charge them with the first user
            let last = res.users.last().copied().unwrap_or(0);
            completes[last].push(r);
        }
        Self {
            model,
            completes,
            assignment: vec![0; users],
            scratch: Vec::new(),
        }
    }

    pub fn users(&self) -> usize {
        self.assignment.len()
    }

    /// Distance added by assigning user `depth` (all earlier users fixed).
    pub fn step(&mut self, depth: usize) -> f64 {
        let mut total = 0.0;
        for &r in &self.completes[depth] {
            let res = &self.model.resources[r];
            self.scratch.clear();
            self.scratch.extend(res.users.iter().map(|&u| self.assignment[u]));
            total += res.distance(&self.scratch, self.model.pairs, self.model.receive_antennas);
        }
        total
    }

    /// Full distance of `assignment`, summed in the same order as the walk.
    pub fn distance_of(&mut self, assignment: &[usize]) -> f64 {
        self.assignment.copy_from_slice(assignment);
        let mut total = 0.0;
        for depth in 0..self.users() {
            total += self.step(depth);
        }
        total
    }
}

struct Best {
    distance: f64,
    assignment: Vec<usize>,
}

fn descend(search: &mut Search<'_>, depth: usize, partial: f64, best: &mut Best) {
    let last = depth + 1 == search.users();
    for p in 0..search.model.pairs {
        search.assignment[depth] = p;
        let total = partial + search.step(depth);
        if total > best.distance {
            continue;
        }
        if last {
            // the walk is in increasing joint index, so only the incumbent can
            // come earlier on a tie
            if total < best.distance || search.assignment < best.assignment {
                best.distance = total;
                best.assignment.copy_from_slice(&search.assignment);
            }
        } else {
            descend(search, depth + 1, total, best);
        }
    }
}

/// Joint assignment with the smallest total distance and that distance.
pub(crate) fn ml_search(model: &Model, link: &Link, seed: Option<&[usize]>) -> (Vec<usize>, f64) {
    let mut search = Search::new(model, link.users());
    let mut best = match seed {
        Some(seed) => Best {
            distance: search.distance_of(seed),
            assignment: seed.to_vec(),
        },
        None => Best {
            distance: f64::INFINITY,
            assignment: vec![usize::MAX; link.users()],
        },
    };
    if link.users() > 0 {
        descend(&mut search, 0, 0.0, &mut best);
    }
    (best.assignment, best.distance)
}

/// Initial incumbent: the log-domain message passing decision.
pub(crate) fn seed(
    y: &ReceivedSignal,
    chan: &ChannelRealization,
    link: &Link,
    cfg: &DetectorConfig,
) -> Option<Vec<usize>> {
    let cfg = DetectorConfig {
        log_domain: true,
        iterations: cfg.iterations.max(1),
        ..*cfg
    };
    mpa::run(y, chan, link, &cfg, &mut NoTally, None, None)
        .ok()
        .map(|d| d.pairs(link))
}

/// Joint maximum-likelihood detection: the assignment minimizing
/// `sum_n ||y_n - sum_u diag(h_{u,n} g_k^T) c_{u,m}||^2`.
///
/// The search is seeded with the message passing decision and prunes any
/// prefix whose distance already exceeds the incumbent, which keeps it exact.
pub fn ml_decode(y: &ReceivedSignal, chan: &ChannelRealization, link: &Link, cfg: &DetectorConfig) -> Result<Decision> {
    check_joint_space(link, cfg)?;
    let model = Model::new(y, chan, link, &mut NoTally)?;
    let seed = seed(y, chan, link, cfg);
    let (assignment, _) = ml_search(&model, link, seed.as_deref());
    Ok(Decision::from_pairs(link, &assignment, None))
}
