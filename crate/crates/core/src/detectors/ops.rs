use crate::complexity::OpCount;
use crate::phy::{ChannelRealization, Link, ReceivedSignal};
use crate::Result;

use super::mpa::run;
use super::DetectorConfig;

/// Sink for real-operation counts.
pub trait Tally {
    fn add(&mut self, n: u64);
    fn mul(&mut self, n: u64);
}

/// Discards all counts.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoTally;

impl Tally for NoTally {
    #[inline(always)]
    fn add(&mut self, _: u64) {}
    #[inline(always)]
    fn mul(&mut self, _: u64) {}
}

impl Tally for OpCount {
    fn add(&mut self, n: u64) {
        self.additions += u128::from(n);
    }

    fn mul(&mut self, n: u64) {
        self.multiplications += u128::from(n);
    }
}

/// Runs the linear-domain message passing detector for `iterations`
/// iterations (zero is allowed and stops after the per-channel-use setup)
/// and returns the real additions and multiplications it performed.
///
/// Exponentials are not counted; a division counts as one multiplication.
pub fn count_runtime_ops(
    y: &ReceivedSignal,
    chan: &ChannelRealization,
    link: &Link,
    iterations: usize,
) -> Result<OpCount> {
    let cfg = DetectorConfig {
        iterations,
        ..DetectorConfig::default()
    };
    let mut count = OpCount::default();
    run(y, chan, link, &cfg, &mut count, None, None)?;
    Ok(count)
}
