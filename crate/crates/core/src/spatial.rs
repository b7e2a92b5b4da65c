//! Antenna grouping tables.
//!
//! A grouping table maps the `n_c = floor(log2 C(N_t, N_a))` spatial bits of
//! a user onto one of `N_c = 2^n_c` grouping vectors. Each vector activates
//! `N_a` of the `N_t` transmit antennas. In RGSM mode the `d`-th time an
//! antenna appears (scanning `k` upwards) it is rotated by
//! `-2 (d - 1) pi / a`, where `a` is the number of vectors that activate
//! that antenna, so the rotations of every antenna are equally spaced on the
//! unit circle.
//!
//! Which `N_c` of the `C(N_t, N_a)` combinations are kept: the lexicographic
//! list of antenna subsets is trimmed by dropping alternately its first and
//! its last entry until `N_c` remain. For `N_t = 5`, `N_a = 2` this drops
//! `{1,2}` and `{4,5}`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// How the non-zero grouping entries are phased.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Rotational generalized SM: per-occurrence rotations.
    Rgsm,
    /// Generalized SM: all active entries equal 1.
    Gsm,
    /// Classic SM: one active antenna, `N_c = N_t`.
    Sm,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Rgsm => "RGSM",
            Mode::Gsm => "GSM",
            Mode::Sm => "SM",
        }
    }
}

impl core::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RGSM" => Ok(Mode::Rgsm),
            "GSM" => Ok(Mode::Gsm),
            "SM" => Ok(Mode::Sm),
            _ => Err(Error::Domain(format!("unknown system {s:?}, expected SM, GSM or RGSM"))),
        }
    }
}

impl core::fmt::Display for Mode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// `N_c x N_t` lookup table of grouping vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupingTable {
    transmit_antennas: usize,
    active_antennas: usize,
    mode: Mode,
    /// Row-major `N_c x N_t`.
    vectors: Vec<Complex64>,
    activation_counts: Vec<usize>,
}

/// Tolerance used when re-validating unit magnitudes and phases of
/// externally supplied tables.
pub const PHASE_TOLERANCE: f64 = 1e-9;

impl GroupingTable {
    /// Validates a table given row by row.
    ///
    /// Every row needs exactly `N_a` unit-magnitude entries (zeros elsewhere),
    /// the row count must be `2^floor(log2 C(N_t, N_a))` and the phases must
    /// follow the mode: RGSM rotations for [`Mode::Rgsm`], all ones for
    /// [`Mode::Gsm`], the standard basis for [`Mode::Sm`].
    pub fn from_rows(
        transmit_antennas: usize,
        active_antennas: usize,
        mode: Mode,
        vectors: Vec<Complex64>,
    ) -> Result<Self> {
        check_antennas(transmit_antennas, active_antennas, mode)?;
        let n_c = combination_count(transmit_antennas, active_antennas)?;
        if vectors.len() != n_c * transmit_antennas {
            return Err(Error::Dimension(format!(
                "expected {n_c} rows of length {transmit_antennas}, got {} entries",
                vectors.len()
            )));
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut activation_counts = vec![0usize; transmit_antennas];
        for (k, row) in vectors.chunks(transmit_antennas).enumerate() {
            let mut active = 0;
            for (t, g) in row.iter().enumerate() {
                if *g == zero {
                    continue;
                }
                if (g.norm() - 1.0).abs() > PHASE_TOLERANCE {
                    return Err(Error::Structure(format!(
                        "row {k}, antenna {t}: entry {g} is not of unit magnitude"
                    )));
                }
                active += 1;
                activation_counts[t] += 1;
            }
            if active != active_antennas {
                return Err(Error::Structure(format!(
                    "row {k} activates {active} antennas, expected {active_antennas}"
                )));
            }
        }
        let table = Self {
            transmit_antennas,
            active_antennas,
            mode,
            vectors,
            activation_counts,
        };
        table.check_phases()?;
        Ok(table)
    }

    fn check_phases(&self) -> Result<()> {
        let mut seen = vec![0usize; self.transmit_antennas];
        for k in 0..self.rows() {
            for (t, g) in self.row(k).iter().enumerate() {
                if g.norm() == 0.0 {
                    continue;
                }
                seen[t] += 1;
                let expected = match self.mode {
                    Mode::Rgsm => Complex64::from_polar(1.0, rotation_angle(seen[t], self.activation_counts[t])?),
                    Mode::Gsm => Complex64::new(1.0, 0.0),
                    Mode::Sm if t == k => Complex64::new(1.0, 0.0),
                    Mode::Sm => {
                        return Err(Error::Structure(format!(
                            "SM row {k} must activate antenna {k}, found antenna {t}"
                        )))
                    }
                };
                if (*g - expected).norm() > PHASE_TOLERANCE {
                    return Err(Error::Structure(format!(
                        "row {k}, antenna {t}: expected {expected}, found {g} for {} mode",
                        self.mode
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn transmit_antennas(&self) -> usize {
        self.transmit_antennas
    }

    pub fn active_antennas(&self) -> usize {
        self.active_antennas
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// `N_c`.
    pub fn rows(&self) -> usize {
        self.vectors.len() / self.transmit_antennas
    }

    /// Spatial bits per channel use, `log2(N_c)`.
    pub fn spatial_bits(&self) -> usize {
        self.rows().trailing_zeros() as usize
    }

    /// Grouping vector `g_k`.
    pub fn row(&self, k: usize) -> &[Complex64] {
        &self.vectors[k * self.transmit_antennas..(k + 1) * self.transmit_antennas]
    }

    pub fn vectors(&self) -> &[Complex64] {
        &self.vectors
    }

    /// `a_{n_t}`: how many rows activate each antenna.
    pub fn activation_counts(&self) -> &[usize] {
        &self.activation_counts
    }

    /// Active antenna indices of row `k`, ascending.
    pub fn active_set(&self, k: usize) -> Vec<usize> {
        self.row(k)
            .iter()
            .enumerate()
            .filter(|(_, g)| g.norm() > 0.0)
            .map(|(t, _)| t)
            .collect()
    }
}

fn check_antennas(transmit: usize, active: usize, mode: Mode) -> Result<()> {
    match mode {
        Mode::Sm => {
            if active != 1 {
                return Err(Error::Domain(format!("SM activates one antenna, got N_a={active}")));
            }
            if !transmit.is_power_of_two() {
                return Err(Error::Domain(format!(
                    "SM needs a power-of-two antenna count, got N_t={transmit}"
                )));
            }
        }
        Mode::Rgsm | Mode::Gsm => {
            if active == 0 || active >= transmit {
                return Err(Error::Domain(format!(
                    "need 1 <= N_a < N_t, got N_a={active}, N_t={transmit}"
                )));
            }
        }
    }
    Ok(())
}

/// `theta_{d, n_t} = -2 (d - 1) pi / a` for the `d`-th (1-based) of `a` activations.
pub fn rotation_angle(occurrence: usize, activations: usize) -> Result<f64> {
    if activations == 0 || occurrence == 0 || occurrence > activations {
        return Err(Error::Domain(format!(
            "occurrence {occurrence} out of range for {activations} activations"
        )));
    }
    Ok(-2.0 * (occurrence - 1) as f64 * PI / activations as f64)
}

/// Exact `C(n, k)`, or `None` if it does not fit in a `u128`.
pub fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    // acc = C(n, i); with k <= n/2 every partial value is bounded by the result
    for i in 0..k {
        let num = n - i;
        let den = i + 1;
        let g = gcd(acc, den);
        acc = (acc / g).checked_mul(num / (den / g))?;
    }
    Some(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `floor(log2 C(N_t, N_a))`.
pub fn spatial_bits(transmit: usize, active: usize) -> Result<u32> {
    let count = binomial(transmit as u128, active as u128)
        .ok_or_else(|| Error::Overflow(format!("C({transmit}, {active}) exceeds 128 bits")))?;
    if count == 0 {
        return Err(Error::Domain(format!("C({transmit}, {active}) is zero")));
    }
    Ok(count.ilog2())
}

fn combination_count(transmit: usize, active: usize) -> Result<usize> {
    let bits = spatial_bits(transmit, active)?;
    if bits >= usize::BITS {
        return Err(Error::Overflow(format!("2^{bits} grouping vectors")));
    }
    let n_c = 1usize << bits;
    n_c.checked_mul(transmit)
        .ok_or_else(|| Error::Overflow(format!("{n_c} x {transmit} table")))?;
    Ok(n_c)
}

/// Builds the grouping table for `(N_t, N_a, mode)`.
pub fn generate_grouping_table(transmit: usize, active: usize, mode: Mode) -> Result<GroupingTable> {
    check_antennas(transmit, active, mode)?;
    let n_c = combination_count(transmit, active)?;
    let total = binomial(transmit as u128, active as u128).expect("checked by combination_count");
    let dropped = total - n_c as u128;
    // alternating front/back drops remove ceil(d/2) from the front
    let first_rank = dropped - dropped / 2;

    let mut vectors = Vec::new();
    vectors
        .try_reserve_exact(n_c * transmit)
        .map_err(|_| Error::Overflow(format!("cannot allocate a {n_c} x {transmit} table")))?;
    vectors.resize(n_c * transmit, Complex64::new(0.0, 0.0));

    let mut subset = unrank_combination(transmit, active, first_rank);
    let mut rows_per_antenna: Vec<Vec<usize>> = vec![Vec::new(); transmit];
    for k in 0..n_c {
        for &t in &subset {
            rows_per_antenna[t].push(k);
        }
        if k + 1 < n_c {
            next_combination(&mut subset, transmit);
        }
    }
    let activation_counts: Vec<usize> = rows_per_antenna.iter().map(Vec::len).collect();
    for (t, rows) in rows_per_antenna.iter().enumerate() {
        for (d, &k) in rows.iter().enumerate() {
            vectors[k * transmit + t] = match mode {
                Mode::Rgsm => Complex64::from_polar(1.0, rotation_angle(d + 1, rows.len())?),
                Mode::Gsm | Mode::Sm => Complex64::new(1.0, 0.0),
            };
        }
    }
    Ok(GroupingTable {
        transmit_antennas: transmit,
        active_antennas: active,
        mode,
        vectors,
        activation_counts,
    })
}

/// The `rank`-th (0-based) `k`-subset of `0..n` in lexicographic order.
fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0usize;
    for slot in 0..k {
        loop {
            // subsets that put `next` in this slot
            let block = binomial((n - next - 1) as u128, (k - slot - 1) as u128).unwrap_or(u128::MAX);
            if rank < block {
                break;
            }
            rank -= block;
            next += 1;
        }
        out.push(next);
        next += 1;
    }
    out
}

fn next_combination(subset: &mut [usize], n: usize) {
    let k = subset.len();
    if let Some(i) = (0..k).rev().find(|&i| subset[i] < n - k + i) {
        subset[i] += 1;
        for j in i + 1..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
}

/// Smallest `N_t > N_a` with `floor(log2 C(N_t, N_a)) >= eta_s`.
pub fn min_transmit_antennas(eta_s: u32, active: usize) -> Result<usize> {
    if eta_s == 0 || active == 0 {
        return Err(Error::Domain(format!(
            "need eta_s >= 1 and N_a >= 1, got eta_s={eta_s}, N_a={active}"
        )));
    }
    if eta_s >= 128 {
        return Err(Error::Overflow(format!("2^{eta_s} combinations")));
    }
    let target = 1u128 << eta_s;
    let enough = |n: u128| binomial(n, active as u128).is_none_or(|c| c >= target);
    // C(N_a + 2^eta_s, N_a) >= N_a + 2^eta_s, so the answer lies in [lo, hi]
    let mut lo = active as u128 + 1;
    let mut hi = (active as u128).saturating_add(target);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if enough(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    usize::try_from(lo).map_err(|_| Error::Overflow(format!("{lo} transmit antennas")))
}

/// `2^eta_s`: antennas SM needs for `eta_s` spatial bits.
pub fn sm_required_antennas(eta_s: u32) -> Result<usize> {
    1usize
        .checked_shl(eta_s)
        .filter(|_| eta_s < usize::BITS)
        .ok_or_else(|| Error::Overflow(format!("2^{eta_s} transmit antennas")))
}
