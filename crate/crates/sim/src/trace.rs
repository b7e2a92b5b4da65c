//! Message traces of the MPA detector as JSON lines.
//!
//! One line per iteration:
//! `{"system", "snr_db", "trial", "iteration", "fn_to_vn": [...], "vn_to_fn": [...]}`
//! where every message is `{"resource", "user", "values"}`. Iteration 0
//! holds the uniform initial messages only.

use std::io::Write;

use rgsm_scma_core::detectors::{mpa_decode_traced, EdgeMessage, MessageState};
use rgsm_scma_core::sim::{trial_instance, Experiment};
use serde_json::{json, Value};

use crate::config::System;
use crate::{Error, Result};

fn messages(msgs: &[EdgeMessage]) -> Value {
    msgs.iter()
        .map(|m| json!({"resource": m.resource, "user": m.user, "values": m.values}))
        .collect()
}

/// Replays `trial` at `snr_db` and returns its message states.
pub fn trace_trial(exp: &Experiment, snr_db: f64, trial: u64) -> Result<Vec<MessageState>> {
    let inst = trial_instance(exp, snr_db, trial)?;
    let (_, states) = mpa_decode_traced(&inst.received, &inst.channel, &exp.link, &exp.detector_config)?;
    Ok(states)
}

pub fn write_trace<W: Write>(
    out: &mut W,
    system: System,
    snr_db: f64,
    trial: u64,
    states: &[MessageState],
) -> Result<()> {
    for s in states {
        let line = json!({
            "system": system,
            "snr_db": snr_db,
            "trial": trial,
            "iteration": s.iteration,
            "fn_to_vn": messages(&s.fn_to_vn),
            "vn_to_fn": messages(&s.vn_to_fn),
        });
        writeln!(out, "{line}").map_err(|e| Error::io("<trace>", e))?;
    }
    Ok(())
}
