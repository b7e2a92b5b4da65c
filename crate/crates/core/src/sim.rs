//! One Monte Carlo channel use and BER bookkeeping.
//!
//! Every trial owns a ChaCha8 stream: the generator is seeded with the master
//! seed and switched to stream number `trial_index`, so any trial can be
//! replayed in isolation and trials can run in any order on any thread. A
//! trial draws, in this order, the bits of every user, the fading taps and
//! unit-variance noise; the noise is scaled by `sqrt(N0)` afterwards, so a
//! given trial sees the same bits, channel and noise shape at every SNR.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::detectors::{map_decode, ml_decode, mpa_decode, Decision, DetectorConfig};
use crate::phy::{
    encode, sample_channel, sample_noise, snr_to_noise_variance, synthesize_received, ChannelDims, ChannelRealization,
    Link, ReceivedSignal,
};
use crate::Result;

/// Which receiver a trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    Ml,
    Map,
    Mpa,
}

impl Detector {
    pub fn decode(
        self,
        y: &ReceivedSignal,
        chan: &ChannelRealization,
        link: &Link,
        cfg: &DetectorConfig,
    ) -> Result<Decision> {
        match self {
            Detector::Ml => ml_decode(y, chan, link, cfg),
            Detector::Map => map_decode(y, chan, link, cfg),
            Detector::Mpa => mpa_decode(y, chan, link, cfg),
        }
    }
}

/// Channel model used by a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fading {
    Rayleigh,
    /// All taps zero; the receiver only sees noise.
    Zero,
}

/// Everything fixed across the trials of one BER point except the SNR.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub link: Link,
    pub receive_antennas: usize,
    pub detector: Detector,
    pub detector_config: DetectorConfig,
    pub fading: Fading,
    pub master_seed: u64,
}

/// Per-user bit errors of one trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub bit_errors: Vec<u64>,
    pub bits_per_user: u64,
}

impl TrialOutcome {
    pub fn total_errors(&self) -> u64 {
        self.bit_errors.iter().sum()
    }
}

/// Generator for trial `trial_index` under `master_seed`.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// Transmitted bits and what the receiver sees in one channel use.
#[derive(Debug, Clone)]
pub struct TrialInstance {
    pub bits: Vec<Vec<u8>>,
    pub channel: ChannelRealization,
    pub received: ReceivedSignal,
}

/// Draws the bits, channel and noise of trial `trial_index` and builds the
/// received signal.
pub fn trial_instance(exp: &Experiment, snr_db: f64, trial_index: u64) -> Result<TrialInstance> {
    let link = &exp.link;
    let mut rng = trial_rng(exp.master_seed, trial_index);
    let eta = link.bits_per_user();
    let bits: Vec<Vec<u8>> = (0..link.users())
        .map(|_| (0..eta).map(|_| u8::from(rng.random::<bool>())).collect())
        .collect();
    let dims = ChannelDims::for_link(link, exp.receive_antennas);
    let channel = match exp.fading {
        Fading::Rayleigh => sample_channel(&mut rng, dims),
        Fading::Zero => ChannelRealization::zeros(dims),
    };
    let noise_variance = snr_to_noise_variance(snr_db);
    let scale = libm::sqrt(noise_variance);
    let noise: Vec<_> = sample_noise(&mut rng, exp.receive_antennas, link.resources(), 1.0)
        .into_iter()
        .map(|n| n * scale)
        .collect();

    let symbols = bits
        .iter()
        .enumerate()
        .map(|(u, b)| encode(b, u, link))
        .collect::<Result<Vec<_>>>()?;
    let received = synthesize_received(&symbols, &channel, &noise, noise_variance, link)?;
    Ok(TrialInstance {
        bits,
        channel,
        received,
    })
}

/// Random bits, channel and noise for one channel use, decoded and compared.
pub fn run_trial(exp: &Experiment, snr_db: f64, trial_index: u64) -> Result<TrialOutcome> {
    let inst = trial_instance(exp, snr_db, trial_index)?;
    let decision = exp
        .detector
        .decode(&inst.received, &inst.channel, &exp.link, &exp.detector_config)?;
    let bit_errors = inst
        .bits
        .iter()
        .zip(&decision.users)
        .map(|(sent, got)| sent.iter().zip(&got.bits).filter(|(a, b)| a != b).count() as u64)
        .collect();
    Ok(TrialOutcome {
        bit_errors,
        bits_per_user: exp.link.bits_per_user() as u64,
    })
}

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `total`, or `None` if `total` is 0.
pub fn wilson_interval(successes: u64, total: u64, z: f64) -> Option<(f64, f64)> {
    if total == 0 {
        return None;
    }
    let n = total as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    // clamp rounding so that the interval always contains p
    Some(((centre - half).clamp(0.0, p), (centre + half).clamp(p, 1.0)))
}

/// Aggregated bit errors at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    /// Bits compared, `trials * U * eta`.
    pub bits: u64,
    /// True if the point stopped because it reached the error target.
    pub early_stop: bool,
}

impl BerPoint {
    pub fn new(snr_db: f64) -> Self {
        Self {
            snr_db,
            trials: 0,
            bit_errors: 0,
            bits: 0,
            early_stop: false,
        }
    }

    /// `None` when no trial ran.
    pub fn ber(&self) -> Option<f64> {
        (self.bits > 0).then(|| self.bit_errors as f64 / self.bits as f64)
    }

    pub fn wilson_ci95(&self) -> Option<(f64, f64)> {
        wilson_interval(self.bit_errors, self.bits, Z_95)
    }

    pub fn record(&mut self, outcome: &TrialOutcome) {
        self.trials += 1;
        self.bit_errors += outcome.total_errors();
        self.bits += outcome.bits_per_user * outcome.bit_errors.len() as u64;
    }

    /// Adds another partial tally of the same point.
    pub fn merge(&mut self, other: &BerPoint) {
        self.trials += other.trials;
        self.bit_errors += other.bit_errors;
        self.bits += other.bits;
    }
}

/// Runs trials `0..` in batches of `batch` until `target_errors` bit errors
/// or `max_trials` trials. The stopping check happens only between batches.
pub fn run_point(exp: &Experiment, snr_db: f64, max_trials: u64, target_errors: u64, batch: u64) -> Result<BerPoint> {
    let batch = batch.max(1);
    let mut point = BerPoint::new(snr_db);
    while point.trials < max_trials {
        if point.bit_errors >= target_errors {
            point.early_stop = true;
            break;
        }
        let end = (point.trials + batch).min(max_trials);
        for t in point.trials..end {
            let outcome = run_trial(exp, snr_db, t)?;
            point.record(&outcome);
        }
    }
    if point.trials > 0 && point.bit_errors >= target_errors {
        point.early_stop = true;
    }
    Ok(point)
}
