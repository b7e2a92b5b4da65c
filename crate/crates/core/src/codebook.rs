//! Sparse codebooks and the factor graph they induce.
//!
//! A codebook is an `R x M` complex matrix whose columns are the codewords of
//! one user. Every codeword of a user is non-zero on the same `d_v` resources
//! (the user's support). Stacking the supports of all users gives the
//! bipartite factor graph used by the detectors: resource `r` is a function
//! node connected to every user whose support contains `r`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Energy tolerance applied when a codebook is accepted as-is.
pub const ENERGY_TOLERANCE: f64 = 1e-6;

/// One user's codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    resources: usize,
    codewords: usize,
    /// Row-major `R x M`: entry `(r, m)` lives at `r * M + m`.
    entries: Vec<Complex64>,
    support: Vec<usize>,
}

impl Codebook {
    /// Builds a codebook from row-major `R x M` entries.
    ///
    /// The support is taken from the rows with any non-zero entry; every
    /// codeword must be non-zero on each of those rows.
    pub fn from_rows(resources: usize, codewords: usize, entries: Vec<Complex64>) -> Result<Self> {
        if resources == 0 || codewords == 0 {
            return Err(Error::Structure(format!(
                "codebook must be at least 1x1, got {resources}x{codewords}"
            )));
        }
        if entries.len() != resources * codewords {
            return Err(Error::Structure(format!(
                "expected {} entries for a {resources}x{codewords} codebook, got {}",
                resources * codewords,
                entries.len()
            )));
        }
        if entries.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Structure("codebook entries must be finite".into()));
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut support = Vec::new();
        for r in 0..resources {
            let row = &entries[r * codewords..(r + 1) * codewords];
            let nonzero = row.iter().filter(|&&c| c != zero).count();
            if nonzero == 0 {
                continue;
            }
            if nonzero != codewords {
                return Err(Error::Structure(format!(
                    "resource {r} is non-zero for only {nonzero} of {codewords} codewords"
                )));
            }
            support.push(r);
        }
        if support.is_empty() {
            return Err(Error::Structure("codebook has an empty support".into()));
        }
        Ok(Self {
            resources,
            codewords,
            entries,
            support,
        })
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    pub fn codewords(&self) -> usize {
        self.codewords
    }

    /// Resources on which this user's codewords are non-zero, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Entry `c^r_{m}`.
    #[inline]
    pub fn entry(&self, resource: usize, codeword: usize) -> Complex64 {
        self.entries[resource * self.codewords + codeword]
    }

    /// Row-major `R x M` entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Codeword `m` as a length-`R` vector.
    pub fn codeword(&self, codeword: usize) -> Vec<Complex64> {
        (0..self.resources).map(|r| self.entry(r, codeword)).collect()
    }

    /// `(1/M) * sum_m ||c_m||^2`.
    pub fn average_energy(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.codewords as f64
    }

    /// Rescales the codebook to unit average codeword energy.
    pub fn normalize(&mut self) {
        let scale = 1.0 / libm::sqrt(self.average_energy());
        for c in &mut self.entries {
            *c *= scale;
        }
    }
}

/// Codebooks of all users, sharing `(U, R, M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookSet {
    codebooks: Vec<Codebook>,
    resources: usize,
    codewords: usize,
}

impl CodebookSet {
    /// Checks shared dimensions, distinct supports and unit average energy
    /// (within [`ENERGY_TOLERANCE`]). Entries are kept as given.
    pub fn new(codebooks: Vec<Codebook>) -> Result<Self> {
        let first = codebooks
            .first()
            .ok_or_else(|| Error::Structure("a codebook set needs at least one user".into()))?;
        let (resources, codewords) = (first.resources, first.codewords);
        for (u, cb) in codebooks.iter().enumerate() {
            if cb.resources != resources || cb.codewords != codewords {
                return Err(Error::Structure(format!(
                    "user {u} has a {}x{} codebook, expected {resources}x{codewords}",
                    cb.resources, cb.codewords
                )));
            }
            let energy = cb.average_energy();
            if (energy - 1.0).abs() > ENERGY_TOLERANCE {
                return Err(Error::Normalization { user: u, energy });
            }
            if let Some(v) = codebooks[..u].iter().position(|o| o.support == cb.support) {
                return Err(Error::Structure(format!("users {v} and {u} share the same support")));
            }
        }
        Ok(Self {
            codebooks,
            resources,
            codewords,
        })
    }

    /// Like [`CodebookSet::new`] but rescales every codebook to unit energy first.
    pub fn new_normalized(mut codebooks: Vec<Codebook>) -> Result<Self> {
        for cb in &mut codebooks {
            cb.normalize();
        }
        Self::new(codebooks)
    }

    pub fn users(&self) -> usize {
        self.codebooks.len()
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    pub fn codewords(&self) -> usize {
        self.codewords
    }

    pub fn codebooks(&self) -> &[Codebook] {
        &self.codebooks
    }

    pub fn codebook(&self, user: usize) -> &Codebook {
        &self.codebooks[user]
    }

    /// The factor graph induced by the supports, regular or not.
    pub fn factor_graph(&self) -> FactorGraph {
        FactorGraph::from_supports(
            self.resources,
            self.codebooks.iter().map(|cb| cb.support.clone()).collect(),
        )
    }
}

/// Bipartite graph between resources (function nodes) and users (variable nodes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorGraph {
    /// `lambda[r]`: users sharing resource `r`, ascending.
    pub lambda: Vec<Vec<usize>>,
    /// `omega[u]`: resources used by user `u`, ascending.
    pub omega: Vec<Vec<usize>>,
}

impl FactorGraph {
    pub fn from_supports(resources: usize, omega: Vec<Vec<usize>>) -> Self {
        let mut lambda = vec![Vec::new(); resources];
        for (u, support) in omega.iter().enumerate() {
            for &r in support {
                lambda[r].push(u);
            }
        }
        Self { lambda, omega }
    }

    pub fn users(&self) -> usize {
        self.omega.len()
    }

    pub fn resources(&self) -> usize {
        self.lambda.len()
    }

    /// Number of edges, `sum_u |omega_u|`.
    pub fn edges(&self) -> usize {
        self.omega.iter().map(Vec::len).sum()
    }

    /// Common `|omega_u|`, if all users agree.
    pub fn d_v(&self) -> Option<usize> {
        constant_len(&self.omega)
    }

    /// Common `|lambda_r|`, if all resources agree.
    pub fn d_f(&self) -> Option<usize> {
        constant_len(&self.lambda)
    }

    pub fn is_regular(&self) -> bool {
        self.d_v().is_some() && self.d_f().is_some()
    }
}

fn constant_len(sets: &[Vec<usize>]) -> Option<usize> {
    let first = sets.first()?.len();
    sets.iter().all(|s| s.len() == first).then_some(first)
}

/// Returns the factor graph of `set`, rejecting irregular graphs.
pub fn validate(set: &CodebookSet) -> Result<FactorGraph> {
    let graph = set.factor_graph();
    let d_v = graph.d_v().ok_or_else(|| {
        let degrees: Vec<usize> = graph.omega.iter().map(Vec::len).collect();
        Error::IrregularGraph(format!("users have different numbers of resources: {degrees:?}"))
    })?;
    let d_f = graph.d_f().ok_or_else(|| {
        let degrees: Vec<usize> = graph.lambda.iter().map(Vec::len).collect();
        Error::IrregularGraph(format!("resources carry different numbers of users: {degrees:?}"))
    })?;
    // Both sides count the edges.
    debug_assert_eq!(set.users() * d_v, set.resources() * d_f);
    Ok(graph)
}

/// Deterministic stand-in codebooks for `(U, R, M)`.
///
/// Supports are all `C(R, d_v)` weight-`d_v` patterns in lexicographic order,
/// so `U` must equal `C(R, d_v)` for some `d_v` (the smallest such `d_v` is
/// used). Codeword `m` of user `u` carries the `M`-PSK point
/// `exp(j*2*pi*m/M)` on each of its `d_v` resources, rotated by
/// `pi*u/(2U)` and scaled by `1/sqrt(d_v)` for unit energy.
pub fn default_codebook_set(users: usize, resources: usize, codewords: usize) -> Result<CodebookSet> {
    if users == 0 || resources == 0 || codewords == 0 {
        return Err(Error::UnsupportedShape { users, resources });
    }
    let d_v = (1..=resources)
        .find(|&d| binomial(resources, d) == Some(users))
        .ok_or(Error::UnsupportedShape { users, resources })?;
    let scale = 1.0 / libm::sqrt(d_v as f64);
    let codebooks = combinations(resources, d_v)
        .into_iter()
        .enumerate()
        .map(|(u, support)| {
            let user_rotation = PI * u as f64 / (2.0 * users as f64);
            let mut entries = vec![Complex64::new(0.0, 0.0); resources * codewords];
            for &r in &support {
                for m in 0..codewords {
                    let phase = 2.0 * PI * m as f64 / codewords as f64 + user_rotation;
                    entries[r * codewords + m] = Complex64::from_polar(scale, phase);
                }
            }
            Codebook::from_rows(resources, codewords, entries)
        })
        .collect::<Result<Vec<_>>>()?;
    CodebookSet::new(codebooks)
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        let Some(i) = (0..k).rev().find(|&i| current[i] < n - k + i) else {
            return out;
        };
        current[i] += 1;
        for j in i + 1..k {
            current[j] = current[j - 1] + 1;
        }
    }
}
