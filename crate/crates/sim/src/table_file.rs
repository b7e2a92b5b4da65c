//! JSON grouping-table files: `{"N_t", "N_a", "mode", "rows"}`, where each
//! row is a list of `N_t` `[re, im]` pairs. Loading re-runs every table
//! check, so a hand-edited file is either valid or rejected.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rgsm_scma_core::spatial::{GroupingTable, Mode};
use serde::Deserialize;

use crate::{exact_pair, Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTableFile {
    #[serde(rename = "N_t")]
    transmit: usize,
    #[serde(rename = "N_a")]
    active: usize,
    mode: String,
    rows: Vec<Vec<[f64; 2]>>,
}

pub fn parse_grouping_table(text: &str) -> Result<GroupingTable> {
    let raw: RawTableFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mode: Mode = raw.mode.parse()?;
    if let Some((k, row)) = raw.rows.iter().enumerate().find(|(_, row)| row.len() != raw.transmit) {
        return Err(Error::Model(rgsm_scma_core::Error::Dimension(format!(
            "row {k} has {} entries, N_t = {}",
            row.len(),
            raw.transmit
        ))));
    }
    let vectors = raw
        .rows
        .iter()
        .flatten()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect();
    Ok(GroupingTable::from_rows(raw.transmit, raw.active, mode, vectors)?)
}

pub fn load_grouping_table(path: &Path) -> Result<GroupingTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_grouping_table(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn grouping_table_to_string(table: &GroupingTable) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\n  \"N_t\": {},\n  \"N_a\": {},\n  \"mode\": \"{}\",\n  \"rows\": [\n",
        table.transmit_antennas(),
        table.active_antennas(),
        table.mode()
    );
    for k in 0..table.rows() {
        let row: Vec<String> = table.row(k).iter().map(|&g| exact_pair(g)).collect();
        let comma = if k + 1 < table.rows() { "," } else { "" };
        let _ = writeln!(out, "    [{}]{comma}", row.join(", "));
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn write_grouping_table(table: &GroupingTable, path: &Path) -> Result<()> {
    std::fs::write(path, grouping_table_to_string(table)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rgsm_scma_core::spatial::generate_grouping_table;

    #[test]
    fn round_trip() {
        for (t, a, mode) in [(5, 2, Mode::Rgsm), (6, 3, Mode::Gsm), (4, 1, Mode::Sm)] {
            let table = generate_grouping_table(t, a, mode).unwrap();
            let back = parse_grouping_table(&grouping_table_to_string(&table)).unwrap();
            assert_eq!(back, table);
        }
    }

    #[test]
    fn edited_phase_is_rejected() {
        let table = generate_grouping_table(5, 2, Mode::Rgsm).unwrap();
        let mut doc: serde_json::Value = serde_json::from_str(&grouping_table_to_string(&table)).unwrap();
        doc["rows"][0][0] = serde_json::json!([0.0, 1.0]);
        let err = parse_grouping_table(&doc.to_string()).unwrap_err();
        assert!(
            matches!(err, Error::Model(rgsm_scma_core::Error::Structure(_))),
            "{err}"
        );
    }

    #[test]
    fn bad_mode_and_row_length() {
        let text = r#"{"N_t": 2, "N_a": 1, "mode": "QAM", "rows": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"#;
        assert!(matches!(
            parse_grouping_table(text),
            Err(Error::Model(rgsm_scma_core::Error::Domain(_)))
        ));
        let text = r#"{"N_t": 2, "N_a": 1, "mode": "SM", "rows": [[[1, 0]], [[0, 0], [1, 0]]]}"#;
        assert!(matches!(
            parse_grouping_table(text),
            Err(Error::Model(rgsm_scma_core::Error::Dimension(_)))
        ));
        let text = r#"{"N_t": 2, "N_a": 1, "mode": "SM", "rows": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"#;
        assert_eq!(parse_grouping_table(text).unwrap().rows(), 2);
    }
}
