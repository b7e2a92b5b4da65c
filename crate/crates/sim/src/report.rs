//! Text and CSV reports.
//!
//! CSV columns:
//!
//! * operation counts: `system, alphabet, active, receive_antennas, iterations, additions, multiplications`
//!   (`alphabet` is `N_t` for SM and `N_c` for RGSM; `active` is 1 for SM)
//! * extra complexity: `eta_s, active, receive_antennas, iterations, sm_additions, sm_multiplications,
//!   rgsm_additions, rgsm_multiplications, add_pct, mult_pct`
//! * antenna savings: `eta_s, active, sm_antennas, rgsm_antennas`

use std::fmt::Write as _;

use num_complex::Complex64;
use rgsm_scma_core::complexity::{
    antenna_savings_table, exco, matched_params, rgsm_scma_ops, sm_scma_ops, Antennas, ComplexityParams,
};
use rgsm_scma_core::spatial::GroupingTable;

use crate::{Error, Result};

/// `e^{-j 2pi/3}`-style rendering of a unit-magnitude entry; phases that are
/// not a small rational multiple of pi are printed in radians.
pub fn format_entry(g: Complex64) -> String {
    if g.norm() == 0.0 {
        return "0".into();
    }
    let turns = g.arg() / std::f64::consts::PI;
    for den in 1..=64i64 {
        let num = (turns * den as f64).round();
        if (turns * den as f64 - num).abs() < 1e-9 {
            // rotations are written as negative angles in (-2pi, 0]
            let mut num = num as i64;
            if num > 0 {
                num -= 2 * den;
            }
            let g = gcd(num.unsigned_abs(), den as u64) as i64;
            let (num, den) = (num / g, den / g);
            return match (num, den) {
                (0, _) => "1".into(),
                (-1, 1) => "e^{-jpi}".into(),
                (n, 1) => format!("e^{{-j{}pi}}", -n),
                (-1, d) => format!("e^{{-jpi/{d}}}"),
                (n, d) => format!("e^{{-j{}pi/{d}}}", -n),
            };
        }
    }
    format!("e^{{j{:.6}}}", g.arg())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Aligned text table: spatial bits, 1-based `k`, entries.
pub fn grouping_table_text(table: &GroupingTable) -> String {
    let bits = table.spatial_bits();
    let cells: Vec<Vec<String>> = (0..table.rows())
        .map(|k| table.row(k).iter().map(|&g| format_entry(g)).collect())
        .collect();
    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
    let mut out = format!(
        "{} table, N_t={}, N_a={}, N_c={}, {} spatial bits\n",
        table.mode(),
        table.transmit_antennas(),
        table.active_antennas(),
        table.rows(),
        bits
    );
    for (k, row) in cells.iter().enumerate() {
        let label = if bits == 0 {
            "-".to_string()
        } else {
            format!("{k:0bits$b}")
        };
        let entries: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(
            out,
            "{label:>b$}  k={:<3} [{}]",
            k + 1,
            entries.join(" "),
            b = bits.max(1)
        );
    }
    let _ = writeln!(out, "activations per antenna: {:?}", table.activation_counts());
    out
}

fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Operation counts of the SM and RGSM detectors with the same spatial bits.
pub fn operation_counts_csv(base: ComplexityParams, eta_s: u32, active: u64) -> Result<String> {
    let (sm, rgsm) = matched_params(base, eta_s, active)?;
    let mut rows = Vec::new();
    for (name, p, ops) in [("SM", sm, sm_scma_ops(&sm)?), ("RGSM", rgsm, rgsm_scma_ops(&rgsm)?)] {
        let (alphabet, n_a) = match p.antennas {
            Antennas::Sm { transmit } => (transmit, 1),
            Antennas::Rgsm { groups, active, .. } => (groups, active),
        };
        rows.push(vec![
            name.to_string(),
            alphabet.to_string(),
            n_a.to_string(),
            p.receive_antennas.to_string(),
            p.iterations.to_string(),
            ops.additions.to_string(),
            ops.multiplications.to_string(),
        ]);
    }
    csv_text(
        &[
            "system",
            "alphabet",
            "active",
            "receive_antennas",
            "iterations",
            "additions",
            "multiplications",
        ],
        &rows,
    )
}

/// Extra complexity over a grid. `active_for(eta_s)` gives `N_a`.
pub fn exco_csv(
    base: ComplexityParams,
    eta_s: &[u32],
    active_for: impl Fn(u32) -> Result<u64>,
    receive_antennas: &[u64],
    iterations: &[u64],
) -> Result<String> {
    let mut rows = Vec::new();
    for &eta in eta_s {
        let n_a = active_for(eta)?;
        for &n_r in receive_antennas {
            for &t in iterations {
                let p = ComplexityParams {
                    receive_antennas: n_r,
                    iterations: t,
                    ..base
                };
                let (sm, rgsm) = matched_params(p, eta, n_a)?;
                let (a, b) = (sm_scma_ops(&sm)?, rgsm_scma_ops(&rgsm)?);
                let x = exco(&sm, &rgsm)?;
                rows.push(vec![
                    eta.to_string(),
                    n_a.to_string(),
                    n_r.to_string(),
                    t.to_string(),
                    a.additions.to_string(),
                    a.multiplications.to_string(),
                    b.additions.to_string(),
                    b.multiplications.to_string(),
                    x.add_pct.to_string(),
                    x.mult_pct.to_string(),
                ]);
            }
        }
    }
    csv_text(
        &[
            "eta_s",
            "active",
            "receive_antennas",
            "iterations",
            "sm_additions",
            "sm_multiplications",
            "rgsm_additions",
            "rgsm_multiplications",
            "add_pct",
            "mult_pct",
        ],
        &rows,
    )
}

pub fn antenna_savings_csv(eta_s: &[u32], active: &[usize]) -> Result<String> {
    let rows: Vec<Vec<String>> = antenna_savings_table(eta_s, active)?
        .iter()
        .map(|r| {
            vec![
                r.eta_s.to_string(),
                r.active.to_string(),
                r.sm_antennas.to_string(),
                r.rgsm_antennas.to_string(),
            ]
        })
        .collect();
    csv_text(&["eta_s", "active", "sm_antennas", "rgsm_antennas"], &rows)
}
