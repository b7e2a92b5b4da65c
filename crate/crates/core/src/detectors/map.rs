use alloc::vec;
use alloc::vec::Vec;

use super::ml::{ml_search, seed, Search};
use super::model::Model;
use super::{argmax, check_joint_space, Decision, DetectorConfig, NoTally};
use crate::phy::{ChannelRealization, Link, ReceivedSignal};
use crate::Result;

struct Marginals<'m> {
    /// `ln` of the tolerance on skipped mass; `-inf` disables pruning.
    log_tolerance: f64,
    log_pairs: f64,
    /// Distance of the ML hypothesis, the heaviest leaf.
    reference: f64,
    noise_variance: f64,
    sums: &'m mut [Vec<f64>],
}

fn descend(search: &mut Search<'_>, depth: usize, partial: f64, acc: &mut Marginals<'_>) {
    let users = search.users();
    let below = (users - depth - 1) as f64;
    for p in 0..search.model.pairs {
        search.assignment[depth] = p;
        let total = partial + search.step(depth);
        let log_weight = -(total - acc.reference) / acc.noise_variance;
        if depth + 1 == users {
            let w = libm::exp(log_weight);
            for (u, &q) in search.assignment.iter().enumerate() {
                acc.sums[u][q] += w;
            }
        } else if below * acc.log_pairs + log_weight >= acc.log_tolerance {
            // every completion weighs at most exp(log_weight)
            descend(search, depth + 1, total, acc);
        }
    }
}

/// Per-user maximum a posteriori detection with equiprobable priors.
///
/// Each user's posterior over its `N_c M` pairs is the sum of the joint
/// likelihood over all completions by the other users. Subtrees whose total
/// mass is provably below `map_prune_tolerance` times the heaviest hypothesis
/// are skipped; with a zero tolerance every hypothesis is visited.
pub fn map_decode(
    y: &ReceivedSignal,
    chan: &ChannelRealization,
    link: &Link,
    cfg: &DetectorConfig,
) -> Result<Decision> {
    check_joint_space(link, cfg)?;
    let model = Model::new(y, chan, link, &mut NoTally)?;
    let pairs = model.pairs;
    let (_, reference) = ml_search(&model, link, seed(y, chan, link, cfg).as_deref());

    let mut sums = vec![vec![0.0; pairs]; link.users()];
    let mut acc = Marginals {
        log_tolerance: libm::log(cfg.map_prune_tolerance),
        log_pairs: libm::log(pairs as f64),
        reference,
        noise_variance: model.noise_variance,
        sums: &mut sums,
    };
    let mut search = Search::new(&model, link.users());
    if link.users() > 0 {
        descend(&mut search, 0, 0.0, &mut acc);
    }

    let mut decided = Vec::with_capacity(link.users());
    for marginal in &mut sums {
        let total: f64 = marginal.iter().sum();
        for v in marginal.iter_mut() {
            *v /= total;
        }
        decided.push(argmax(marginal));
    }
    Ok(Decision::from_pairs(link, &decided, Some(sums)))
}
