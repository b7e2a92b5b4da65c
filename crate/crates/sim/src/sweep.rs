//! Parallel BER sweeps.
//!
//! Trials of a batch run on the rayon pool and are summed with integer
//! addition, and the stopping rule only looks at whole batches, so the
//! result depends on the seed and the configuration but not on the number
//! of threads or the order in which trials finish.

use rayon::prelude::*;
use rgsm_scma_core::sim::{run_trial, BerPoint, Experiment};

use crate::config::{SimConfig, System, SystemSetup};
use crate::Result;

/// Same contract as [`rgsm_scma_core::sim::run_point`], with the trials of
/// each batch spread over the current rayon pool.
pub fn run_point_parallel(
    exp: &Experiment,
    snr_db: f64,
    max_trials: u64,
    target_errors: u64,
    batch: u64,
) -> Result<BerPoint> {
    let batch = batch.max(1);
    let mut point = BerPoint::new(snr_db);
    while point.trials < max_trials && point.bit_errors < target_errors {
        let end = (point.trials + batch).min(max_trials);
        let part = (point.trials..end)
            .into_par_iter()
            .map(|t| {
                let outcome = run_trial(exp, snr_db, t)?;
                let mut p = BerPoint::new(snr_db);
                p.record(&outcome);
                Ok::<_, rgsm_scma_core::Error>(p)
            })
            .try_reduce(
                || BerPoint::new(snr_db),
                |mut a, b| {
                    a.merge(&b);
                    Ok(a)
                },
            )?;
        point.merge(&part);
    }
    point.early_stop = point.trials > 0 && point.bit_errors >= target_errors;
    Ok(point)
}

/// BER curve of one system, sorted by SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub system: System,
    pub points: Vec<BerPoint>,
}

/// Runs every system over the SNR grid. `on_point` sees each point as soon
/// as it is finished, which lets callers persist partial results.
pub fn run_ber_sweep(
    cfg: &SimConfig,
    master_seed: u64,
    mut on_point: impl FnMut(System, &BerPoint) -> Result<()>,
) -> Result<Vec<Curve>> {
    let setups = cfg.build(master_seed)?;
    let mut curves = Vec::with_capacity(setups.len());
    for SystemSetup { system, experiment } in &setups {
        let mut points = Vec::with_capacity(cfg.snr_db.len());
        for &snr in &cfg.snr_db {
            let point = run_point_parallel(experiment, snr, cfg.max_trials, cfg.target_errors, cfg.batch)?;
            on_point(*system, &point)?;
            points.push(point);
        }
        curves.push(Curve {
            system: *system,
            points,
        });
    }
    Ok(curves)
}

/// SNR at which the curve crosses `target` BER, by linear interpolation of
/// `log10(BER)` between the two bracketing grid points. `None` if the curve
/// never crosses or a bracketing point has no errors.
pub fn snr_at_ber(points: &[BerPoint], target: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (a, b) = (w[0].ber()?, w[1].ber()?);
        if a >= target && b <= target && a > b && b > 0.0 {
            let (la, lb, lt) = (a.log10(), b.log10(), target.log10());
            Some(w[0].snr_db + (la - lt) / (la - lb) * (w[1].snr_db - w[0].snr_db))
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rgsm_scma_core::sim::run_point;

    fn point(snr_db: f64, bit_errors: u64, bits: u64) -> BerPoint {
        BerPoint {
            snr_db,
            trials: bits,
            bit_errors,
            bits,
            early_stop: false,
        }
    }

    #[test]
    fn parallel_matches_serial() {
        let cfg = SimConfig::default();
        let exp = &cfg.build(5).unwrap()[0].experiment;
        for snr in [0.0, 8.0] {
            let serial = run_point(exp, snr, 700, 60, 64).unwrap();
            let parallel = run_point_parallel(exp, snr, 700, 60, 64).unwrap();
            assert_eq!(serial, parallel);
        }
    }

    #[test]
    fn interpolates_in_log_domain() {
        let pts = [point(0.0, 100, 1000), point(10.0, 1, 1000)];
        let snr = snr_at_ber(&pts, 1e-2).unwrap();
        assert!((snr - 5.0).abs() < 1e-12);
        assert_eq!(snr_at_ber(&pts, 1e-4), None);
        assert_eq!(snr_at_ber(&[point(0.0, 100, 1000), point(10.0, 0, 1000)], 1e-2), None);
    }
}
