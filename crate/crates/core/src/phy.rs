//! Transmitter chain and channel.
//!
//! Each user splits its `eta = eta_s + eta_c` bits into a spatial part that
//! picks grouping vector `k` and a code part that picks codeword `m`, both in
//! natural binary with the most significant bit first. Resource `r` at
//! receive antenna `n` then sees
//!
//! ```text
//! y[n][r] = sum_{u in lambda_r} (h[u][n][r] . g_k(u)) * c_u[r][m(u)] + noise[n][r]
//! ```
//!
//! with `h[u][n][r]` a length-`N_t` row of i.i.d. CN(0, 1) taps and circular
//! complex Gaussian noise of total variance `N0`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::codebook::{CodebookSet, FactorGraph};
use crate::spatial::GroupingTable;
use crate::{Error, Result};

/// A codebook set paired with a grouping table: everything the transmitter
/// and the detectors share.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    codebooks: CodebookSet,
    graph: FactorGraph,
    table: GroupingTable,
    amplitude: f64,
}

impl Link {
    /// `M` must be a power of two so that codewords carry whole bits.
    pub fn new(codebooks: CodebookSet, table: GroupingTable) -> Result<Self> {
        if !codebooks.codewords().is_power_of_two() {
            return Err(Error::Domain(format!(
                "M={} is not a power of two",
                codebooks.codewords()
            )));
        }
        let graph = codebooks.factor_graph();
        Ok(Self {
            codebooks,
            graph,
            table,
            amplitude: 1.0,
        })
    }

    /// Scales grouping vectors by `1/sqrt(N_a)` so every channel use radiates
    /// the same total power regardless of the number of active antennas.
    pub fn with_power_normalization(mut self, normalize: bool) -> Self {
        self.amplitude = if normalize {
            1.0 / libm::sqrt(self.table.active_antennas() as f64)
        } else {
            1.0
        };
        self
    }

    pub fn codebooks(&self) -> &CodebookSet {
        &self.codebooks
    }

    pub fn graph(&self) -> &FactorGraph {
        &self.graph
    }

    pub fn table(&self) -> &GroupingTable {
        &self.table
    }

    /// Amplitude applied to every grouping entry (1 unless power-normalized).
    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn users(&self) -> usize {
        self.codebooks.users()
    }

    pub fn resources(&self) -> usize {
        self.codebooks.resources()
    }

    pub fn transmit_antennas(&self) -> usize {
        self.table.transmit_antennas()
    }

    /// Size of each user's joint alphabet, `N_c * M`.
    pub fn pairs(&self) -> usize {
        self.table.rows() * self.codebooks.codewords()
    }

    /// Pair index of `(m, k)`: codeword-major, `m * N_c + k`.
    #[inline]
    pub fn pair_index(&self, codeword: usize, group: usize) -> usize {
        codeword * self.table.rows() + group
    }

    /// Inverse of [`Link::pair_index`]: `(m, k)`.
    #[inline]
    pub fn pair(&self, index: usize) -> (usize, usize) {
        (index / self.table.rows(), index % self.table.rows())
    }

    pub fn spatial_bits(&self) -> usize {
        self.table.spatial_bits()
    }

    pub fn code_bits(&self) -> usize {
        self.codebooks.codewords().trailing_zeros() as usize
    }

    /// `eta_u`, bits per user per channel use.
    pub fn bits_per_user(&self) -> usize {
        self.spatial_bits() + self.code_bits()
    }

    /// Bits carried by the pair `(m, k)`, spatial bits first.
    pub fn bits_for(&self, codeword: usize, group: usize) -> Vec<u8> {
        let mut bits = to_bits(group, self.spatial_bits());
        bits.extend(to_bits(codeword, self.code_bits()));
        bits
    }
}

/// One user's transmitted symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxSymbol {
    pub user: usize,
    pub spatial_bits: Vec<u8>,
    pub code_bits: Vec<u8>,
    /// Grouping vector index, `0..N_c`.
    pub group: usize,
    /// Codeword index, `0..M`.
    pub codeword: usize,
}

fn to_bits(value: usize, width: usize) -> Vec<u8> {
    (0..width).rev().map(|i| ((value >> i) & 1) as u8).collect()
}

fn from_bits(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b & 1))
}

/// Splits `bits` into spatial and code parts and maps each in natural binary.
pub fn encode(bits: &[u8], user: usize, link: &Link) -> Result<TxSymbol> {
    let (eta_s, eta_c) = (link.spatial_bits(), link.code_bits());
    if bits.len() != eta_s + eta_c {
        return Err(Error::Length {
            expected: eta_s + eta_c,
            actual: bits.len(),
        });
    }
    if user >= link.users() {
        return Err(Error::Dimension(format!(
            "user {user} out of range for {} users",
            link.users()
        )));
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(Error::Domain("bits must be 0 or 1".into()));
    }
    let (spatial, code) = bits.split_at(eta_s);
    Ok(TxSymbol {
        user,
        spatial_bits: spatial.to_vec(),
        code_bits: code.to_vec(),
        group: from_bits(spatial),
        codeword: from_bits(code),
    })
}

/// `h . g`.
pub fn effective_gain(h_row: &[Complex64], g: &[Complex64]) -> Result<Complex64> {
    if h_row.len() != g.len() {
        return Err(Error::Dimension(format!(
            "channel row has {} taps, grouping vector has {}",
            h_row.len(),
            g.len()
        )));
    }
    Ok(h_row.iter().zip(g).map(|(h, g)| h * g).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelDims {
    pub users: usize,
    pub receive_antennas: usize,
    pub resources: usize,
    pub transmit_antennas: usize,
}

impl ChannelDims {
    pub fn for_link(link: &Link, receive_antennas: usize) -> Self {
        Self {
            users: link.users(),
            receive_antennas,
            resources: link.resources(),
            transmit_antennas: link.transmit_antennas(),
        }
    }

    fn len(&self) -> usize {
        self.users * self.receive_antennas * self.resources * self.transmit_antennas
    }
}

/// Fading taps `h[u][n][r][t]` for one channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    dims: ChannelDims,
    taps: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn new(dims: ChannelDims, taps: Vec<Complex64>) -> Result<Self> {
        if taps.len() != dims.len() {
            return Err(Error::Dimension(format!(
                "expected {} taps for {dims:?}, got {}",
                dims.len(),
                taps.len()
            )));
        }
        if taps.iter().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
            return Err(Error::Domain("channel taps must be finite".into()));
        }
        Ok(Self { dims, taps })
    }

    pub fn zeros(dims: ChannelDims) -> Self {
        Self {
            dims,
            taps: vec![Complex64::new(0.0, 0.0); dims.len()],
        }
    }

    pub fn dims(&self) -> ChannelDims {
        self.dims
    }

    pub fn receive_antennas(&self) -> usize {
        self.dims.receive_antennas
    }

    /// Row `h^r_{u,n}` (length `N_t`).
    #[inline]
    pub fn row(&self, user: usize, rx: usize, resource: usize) -> &[Complex64] {
        let d = &self.dims;
        let start = ((user * d.receive_antennas + rx) * d.resources + resource) * d.transmit_antennas;
        &self.taps[start..start + d.transmit_antennas]
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    fn check_link(&self, link: &Link) -> Result<()> {
        let d = &self.dims;
        if d.users != link.users() || d.resources != link.resources() || d.transmit_antennas != link.transmit_antennas()
        {
            return Err(Error::Dimension(format!(
                "channel {d:?} does not match a link with U={}, R={}, N_t={}",
                link.users(),
                link.resources(),
                link.transmit_antennas()
            )));
        }
        if d.receive_antennas == 0 {
            return Err(Error::Dimension("need at least one receive antenna".into()));
        }
        Ok(())
    }
}

/// One circularly-symmetric complex Gaussian sample with total variance `variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sigma = libm::sqrt(variance / 2.0);
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sigma * re, sigma * im)
}

/// I.i.d. CN(0, 1) taps for every `(u, n, r, t)`.
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, dims: ChannelDims) -> ChannelRealization {
    let taps = (0..dims.len()).map(|_| complex_gaussian(rng, 1.0)).collect();
    ChannelRealization { dims, taps }
}

/// `N_r x R` noise samples, CN(0, N0) each, indexed `n * R + r`.
pub fn sample_noise<R: Rng + ?Sized>(
    rng: &mut R,
    receive_antennas: usize,
    resources: usize,
    noise_variance: f64,
) -> Vec<Complex64> {
    (0..receive_antennas * resources)
        .map(|_| complex_gaussian(rng, noise_variance))
        .collect()
}

/// `N0 = 10^(-snr_db / 10)`: unit-energy codebooks put unit average power
/// per active antenna tap on every resource.
pub fn snr_to_noise_variance(snr_db: f64) -> f64 {
    libm::pow(10.0, -snr_db / 10.0)
}

/// Received samples `y[n][r]` plus the noise variance used to detect them.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    receive_antennas: usize,
    resources: usize,
    samples: Vec<Complex64>,
    noise_variance: f64,
}

impl ReceivedSignal {
    pub fn new(
        receive_antennas: usize,
        resources: usize,
        samples: Vec<Complex64>,
        noise_variance: f64,
    ) -> Result<Self> {
        if samples.len() != receive_antennas * resources {
            return Err(Error::Dimension(format!(
                "expected {} samples, got {}",
                receive_antennas * resources,
                samples.len()
            )));
        }
        if !(noise_variance > 0.0) {
            return Err(Error::Domain(format!(
                "noise variance must be positive, got {noise_variance}"
            )));
        }
        Ok(Self {
            receive_antennas,
            resources,
            samples,
            noise_variance,
        })
    }

    pub fn receive_antennas(&self) -> usize {
        self.receive_antennas
    }

    pub fn resources(&self) -> usize {
        self.resources
    }

    #[inline]
    pub fn sample(&self, rx: usize, resource: usize) -> Complex64 {
        self.samples[rx * self.resources + resource]
    }

    /// `y_n` as a length-`R` slice.
    pub fn antenna(&self, rx: usize) -> &[Complex64] {
        &self.samples[rx * self.resources..(rx + 1) * self.resources]
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }
}

/// Superimposes all users' signals on every resource and receive antenna
/// and adds `noise` (indexed `n * R + r`).
pub fn synthesize_received(
    symbols: &[TxSymbol],
    chan: &ChannelRealization,
    noise: &[Complex64],
    noise_variance: f64,
    link: &Link,
) -> Result<ReceivedSignal> {
    chan.check_link(link)?;
    if symbols.len() != link.users() {
        return Err(Error::Length {
            expected: link.users(),
            actual: symbols.len(),
        });
    }
    for (u, s) in symbols.iter().enumerate() {
        if s.user != u || s.group >= link.table().rows() || s.codeword >= link.codebooks().codewords() {
            return Err(Error::Dimension(format!("symbol {u} is out of range: {s:?}")));
        }
    }
    let (n_r, res) = (chan.receive_antennas(), link.resources());
    if noise.len() != n_r * res {
        return Err(Error::Dimension(format!(
            "expected {} noise samples, got {}",
            n_r * res,
            noise.len()
        )));
    }
    let mut samples = noise.to_vec();
    for n in 0..n_r {
        for r in 0..res {
            let mut acc = Complex64::new(0.0, 0.0);
            for &u in &link.graph().lambda[r] {
                let s = &symbols[u];
                let g = link.table().row(s.group);
                let gain = effective_gain(chan.row(u, n, r), g)? * link.amplitude();
                acc += gain * link.codebooks().codebook(u).entry(r, s.codeword);
            }
            samples[n * res + r] += acc;
        }
    }
    ReceivedSignal::new(n_r, res, samples, noise_variance)
}

/// Per-link effective gains `a * h^r_{u,n} . g_k`, indexed by `(u, n, r, k)`.
///
/// Detectors combine the channel with every grouping vector once per
/// channel use and then only work with these scalars.
#[derive(Debug, Clone)]
pub struct EffectiveGains {
    receive_antennas: usize,
    resources: usize,
    groups: usize,
    values: Vec<Complex64>,
}

impl EffectiveGains {
    pub fn new(link: &Link, chan: &ChannelRealization) -> Result<Self> {
        chan.check_link(link)?;
        let (n_r, res, n_c) = (chan.receive_antennas(), link.resources(), link.table().rows());
        let mut values = Vec::with_capacity(link.users() * n_r * res * n_c);
        for u in 0..link.users() {
            for n in 0..n_r {
                for r in 0..res {
                    let h = chan.row(u, n, r);
                    for k in 0..n_c {
                        values.push(effective_gain(h, link.table().row(k))? * link.amplitude());
                    }
                }
            }
        }
        Ok(Self {
            receive_antennas: n_r,
            resources: res,
            groups: n_c,
            values,
        })
    }

    #[inline]
    pub fn get(&self, user: usize, rx: usize, resource: usize, group: usize) -> Complex64 {
        self.values[((user * self.receive_antennas + rx) * self.resources + resource) * self.groups + group]
    }

    pub fn receive_antennas(&self) -> usize {
        self.receive_antennas
    }
}
