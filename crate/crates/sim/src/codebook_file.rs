//! JSON codebook files.
//!
//! ```json
//! {
//!   "U": 6, "R": 4, "M": 4, "d_v": 2,
//!   "entries": [ [ [[re, im], ...M], ...R ], ...U ]
//! }
//! ```
//!
//! `entries[u][r][m]` is entry `r` of codeword `m` of user `u`. Rows outside
//! a user's support are written as explicit zeros. `d_v` is optional; when
//! present every user must have exactly that many non-zero rows.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rgsm_scma_core::codebook::{Codebook, CodebookSet};
use serde::Deserialize;

use crate::{exact_pair, Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCodebookFile {
    #[serde(rename = "U")]
    users: usize,
    #[serde(rename = "R")]
    resources: usize,
    #[serde(rename = "M")]
    codewords: usize,
    #[serde(default)]
    d_v: Option<usize>,
    entries: Vec<Vec<Vec<[f64; 2]>>>,
}

/// How a codebook file is turned into a [`CodebookSet`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Rescale every user to unit average energy instead of rejecting
    /// codebooks that are off by more than the tolerance.
    pub normalize: bool,
}

pub fn parse_codebook_set(text: &str, opts: LoadOptions) -> Result<CodebookSet> {
    let raw: RawCodebookFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let structure = |msg: String| Error::Model(rgsm_scma_core::Error::Structure(msg));
    if raw.entries.len() != raw.users {
        return Err(structure(format!(
            "U = {} but {} users given",
            raw.users,
            raw.entries.len()
        )));
    }
    let mut books = Vec::with_capacity(raw.users);
    for (u, rows) in raw.entries.iter().enumerate() {
        if rows.len() != raw.resources {
            return Err(structure(format!(
                "user {u}: R = {} but {} rows given",
                raw.resources,
                rows.len()
            )));
        }
        let mut entries = Vec::with_capacity(raw.resources * raw.codewords);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != raw.codewords {
                return Err(structure(format!(
                    "user {u}, resource {r}: M = {} but {} codewords given",
                    raw.codewords,
                    row.len()
                )));
            }
            entries.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
        }
        let book = Codebook::from_rows(raw.resources, raw.codewords, entries)
            .map_err(|e| structure(format!("user {u}: {e}")))?;
        if let Some(d_v) = raw.d_v {
            if book.support().len() != d_v {
                return Err(structure(format!(
                    "user {u} has {} non-zero resources, file declares d_v = {d_v}",
                    book.support().len()
                )));
            }
        }
        books.push(book);
    }
    let set = if opts.normalize {
        CodebookSet::new_normalized(books)?
    } else {
        CodebookSet::new(books)?
    };
    Ok(set)
}

pub fn load_codebook_set(path: &Path, opts: LoadOptions) -> Result<CodebookSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_codebook_set(&text, opts).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Serializes `set`. `d_v` is written when all users share it.
pub fn codebook_set_to_string(set: &CodebookSet) -> String {
    let mut out = String::new();
    let d_v = set.factor_graph().d_v();
    let _ = write!(
        out,
        "{{\n  \"U\": {},\n  \"R\": {},\n  \"M\": {},\n",
        set.users(),
        set.resources(),
        set.codewords()
    );
    if let Some(d_v) = d_v {
        let _ = writeln!(out, "  \"d_v\": {d_v},");
    }
    out.push_str("  \"entries\": [\n");
    for (u, book) in set.codebooks().iter().enumerate() {
        out.push_str("    [\n");
        for r in 0..set.resources() {
            let row: Vec<String> = (0..set.codewords()).map(|m| exact_pair(book.entry(r, m))).collect();
            let comma = if r + 1 < set.resources() { "," } else { "" };
            let _ = writeln!(out, "      [{}]{comma}", row.join(", "));
        }
        out.push_str(if u + 1 < set.users() { "    ],\n" } else { "    ]\n" });
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn write_codebook_set(set: &CodebookSet, path: &Path) -> Result<()> {
    std::fs::write(path, codebook_set_to_string(set)).map_err(|e| Error::io(path, e))
}
