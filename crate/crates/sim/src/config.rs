//! Sweep configuration, loadable from TOML or JSON.
//!
//! All systems of one run share the codebooks, the receiver and the SNR
//! grid. GSM and RGSM use `N_t` and `N_a` as given; SM uses one active
//! antenna out of `2^eta_s`, where `eta_s` is the number of spatial bits of
//! the configured `(N_t, N_a)`, so all systems carry the same bits per
//! channel use.

use std::path::{Path, PathBuf};

use rgsm_scma_core::codebook::default_codebook_set;
use rgsm_scma_core::detectors::DetectorConfig;
use rgsm_scma_core::phy::Link;
use rgsm_scma_core::sim::{Detector, Experiment, Fading};
use rgsm_scma_core::spatial::{generate_grouping_table, sm_required_antennas, spatial_bits, Mode};
use serde::{Deserialize, Serialize};

use crate::codebook_file::{load_codebook_set, LoadOptions};
use crate::table_file::load_grouping_table;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum System {
    Sm,
    Gsm,
    Rgsm,
}

impl System {
    pub fn mode(self) -> Mode {
        match self {
            System::Sm => Mode::Sm,
            System::Gsm => Mode::Gsm,
            System::Rgsm => Mode::Rgsm,
        }
    }

    pub fn name(self) -> &'static str {
        self.mode().name()
    }
}

impl std::str::FromStr for System {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.parse::<Mode>()? {
            Mode::Sm => System::Sm,
            Mode::Gsm => System::Gsm,
            Mode::Rgsm => System::Rgsm,
        })
    }
}

impl std::fmt::Display for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Mpa,
    Ml,
    Map,
}

impl DetectorKind {
    fn detector(self) -> Detector {
        match self {
            DetectorKind::Mpa => Detector::Mpa,
            DetectorKind::Ml => Detector::Ml,
            DetectorKind::Map => Detector::Map,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub systems: Vec<System>,
    pub users: usize,
    pub resources: usize,
    pub codewords: usize,
    pub transmit_antennas: usize,
    pub active_antennas: usize,
    pub receive_antennas: usize,
    pub iterations: usize,
    pub detector: DetectorKind,
    pub log_domain: bool,
    pub snr_db: Vec<f64>,
    pub max_trials: u64,
    pub target_errors: u64,
    /// Trials run between two checks of the stopping rule.
    pub batch: u64,
    pub master_seed: Option<u64>,
    pub codebook_path: Option<PathBuf>,
    /// Rescale codebooks from `codebook_path` to unit energy.
    pub normalize_codebook: bool,
    pub table_path: Option<PathBuf>,
    /// Scale grouping vectors by `1/sqrt(N_a)`.
    pub normalize_power: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            systems: vec![System::Rgsm],
            users: 6,
            resources: 4,
            codewords: 4,
            transmit_antennas: 5,
            active_antennas: 2,
            receive_antennas: 1,
            iterations: 2,
            detector: DetectorKind::Mpa,
            log_domain: false,
            snr_db: (0..=10).map(|i| f64::from(2 * i)).collect(),
            max_trials: 10_000_000,
            target_errors: 500,
            batch: 1024,
            master_seed: None,
            codebook_path: None,
            normalize_codebook: false,
            table_path: None,
            normalize_power: false,
        }
    }
}

/// One system ready to simulate.
#[derive(Debug, Clone)]
pub struct SystemSetup {
    pub system: System,
    pub experiment: Experiment,
}

impl SimConfig {
    /// Reads a `.json` file as JSON and anything else as TOML.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.systems.is_empty() {
            return bad("no system selected".into());
        }
        let mut sorted = self.systems.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.systems.len() {
            return bad("systems must not repeat".into());
        }
        for (name, v) in [
            ("users", self.users),
            ("resources", self.resources),
            ("codewords", self.codewords),
            ("receive_antennas", self.receive_antennas),
            ("iterations", self.iterations),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.active_antennas == 0 || self.active_antennas >= self.transmit_antennas {
            return bad(format!(
                "need 1 <= N_a < N_t, got N_a={}, N_t={}",
                self.active_antennas, self.transmit_antennas
            ));
        }
        if self.snr_db.is_empty() {
            return bad("empty SNR grid".into());
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return bad("SNR grid must be finite".into());
        }
        if self.snr_db.windows(2).any(|w| w[0] >= w[1]) {
            return bad("SNR grid must be strictly increasing".into());
        }
        if self.target_errors == 0 {
            return bad("target_errors must be positive".into());
        }
        if self.batch == 0 {
            return bad("batch must be positive".into());
        }
        Ok(())
    }

    pub fn detector_config(&self) -> DetectorConfig {
        DetectorConfig {
            iterations: self.iterations,
            log_domain: self.log_domain,
            ..DetectorConfig::default()
        }
    }

    /// Spatial bits carried by every system.
    pub fn spatial_bits(&self) -> Result<u32> {
        Ok(spatial_bits(self.transmit_antennas, self.active_antennas)?)
    }

    /// `(N_t, N_a)` used by `system`.
    pub fn antennas_for(&self, system: System) -> Result<(usize, usize)> {
        match system {
            System::Sm => Ok((sm_required_antennas(self.spatial_bits()?)?, 1)),
            System::Gsm | System::Rgsm => Ok((self.transmit_antennas, self.active_antennas)),
        }
    }

    /// Validates the configuration and builds one experiment per system.
    pub fn build(&self, master_seed: u64) -> Result<Vec<SystemSetup>> {
        self.validate()?;
        let codebooks = match &self.codebook_path {
            Some(path) => {
                let set = load_codebook_set(
                    path,
                    LoadOptions {
                        normalize: self.normalize_codebook,
                    },
                )?;
                let shape = (set.users(), set.resources(), set.codewords());
                if shape != (self.users, self.resources, self.codewords) {
                    return Err(Error::Config(format!(
                        "codebook file has (U, R, M) = {shape:?}, configuration says ({}, {}, {})",
                        self.users, self.resources, self.codewords
                    )));
                }
                set
            }
            None => default_codebook_set(self.users, self.resources, self.codewords)?,
        };
        rgsm_scma_core::codebook::validate(&codebooks)?;
        let custom_table = self.table_path.as_deref().map(load_grouping_table).transpose()?;
        if let Some(table) = &custom_table {
            if !self.systems.iter().any(|s| s.mode() == table.mode()) {
                return Err(Error::Config(format!(
                    "table file is for {}, which is not among the simulated systems",
                    table.mode()
                )));
            }
        }
        self.systems
            .iter()
            .map(|&system| {
                let (n_t, n_a) = self.antennas_for(system)?;
                let table = match &custom_table {
                    Some(t) if t.mode() == system.mode() => {
                        if (t.transmit_antennas(), t.active_antennas()) != (n_t, n_a) {
                            return Err(Error::Config(format!(
                                "table file has N_t={}, N_a={}; {system} needs N_t={n_t}, N_a={n_a}",
                                t.transmit_antennas(),
                                t.active_antennas()
                            )));
                        }
                        t.clone()
                    }
                    _ => generate_grouping_table(n_t, n_a, system.mode())?,
                };
                let link = Link::new(codebooks.clone(), table)?.with_power_normalization(self.normalize_power);
                Ok(SystemSetup {
                    system,
                    experiment: Experiment {
                        link,
                        receive_antennas: self.receive_antennas,
                        detector: self.detector.detector(),
                        detector_config: self.detector_config(),
                        fading: Fading::Rayleigh,
                        master_seed,
                    },
                })
            })
            .collect()
    }
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list of dB values.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad SNR value {s:?}")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
                return Err(Error::Config(format!("bad SNR range {text:?}")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| start + i as f64 * step).collect())
        }
        [_] => text.split(',').map(num).collect(),
        _ => Err(Error::Config(format!(
            "bad SNR grid {text:?}, use start:step:stop or a,b,c"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_grids() {
        assert_eq!(parse_snr_grid("0:2:6").unwrap(), vec![0.0, 2.0, 4.0, 6.0]);
        assert_eq!(parse_snr_grid("0:0.5:1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_snr_grid("1, 3,7.5").unwrap(), vec![1.0, 3.0, 7.5]);
        assert!(parse_snr_grid("0:0:5").is_err());
        assert!(parse_snr_grid("5:1:0").is_err());
        assert!(parse_snr_grid("a").is_err());
    }

    #[test]
    fn sm_matches_spatial_bits() {
        let cfg = SimConfig {
            systems: vec![System::Rgsm, System::Sm, System::Gsm],
            ..SimConfig::default()
        };
        let setups = cfg.build(1).unwrap();
        let sm = &setups[1].experiment.link;
        assert_eq!(sm.transmit_antennas(), 8);
        assert_eq!(sm.table().active_antennas(), 1);
        for s in &setups {
            assert_eq!(s.experiment.link.bits_per_user(), 5);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            SimConfig {
                systems: vec![],
                ..SimConfig::default()
            },
            SimConfig {
                systems: vec![System::Sm, System::Sm],
                ..SimConfig::default()
            },
            SimConfig {
                active_antennas: 5,
                ..SimConfig::default()
            },
            SimConfig {
                snr_db: vec![0.0, 0.0],
                ..SimConfig::default()
            },
            SimConfig {
                snr_db: vec![3.0, 1.0],
                ..SimConfig::default()
            },
            SimConfig {
                snr_db: vec![],
                ..SimConfig::default()
            },
            SimConfig {
                iterations: 0,
                ..SimConfig::default()
            },
            SimConfig {
                batch: 0,
                ..SimConfig::default()
            },
        ];
        for cfg in cases {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{cfg:?}");
        }
        let unsupported = SimConfig {
            users: 5,
            ..SimConfig::default()
        };
        assert!(matches!(unsupported.build(0), Err(Error::Model(_))));
    }

    #[test]
    fn toml_and_json_agree() {
        let toml_cfg: SimConfig = toml::from_str(
            "systems = [\"RGSM\", \"GSM\"]\nreceive_antennas = 2\nsnr_db = [0.0, 5.0]\ndetector = \"map\"\n",
        )
        .unwrap();
        let json_cfg: SimConfig = serde_json::from_str(
            r#"{"systems": ["RGSM", "GSM"], "receive_antennas": 2, "snr_db": [0.0, 5.0], "detector": "map"}"#,
        )
        .unwrap();
        assert_eq!(toml_cfg, json_cfg);
        assert_eq!(toml_cfg.users, 6);
        assert!(toml::from_str::<SimConfig>("usres = 3").is_err());
    }
}
