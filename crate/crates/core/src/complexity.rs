//! Closed-form real-operation counts of the SM-SCMA and RGSM-SCMA message
//! passing detectors, the relative extra cost of RGSM, and transmit antenna
//! budgets.
//!
//! With `P = N M` (`N = N_t` for SM, `N = N_c` for RGSM):
//!
//! ```text
//! additions       = R d_f P^d_f (2 N_r (2 d_f + 1) - 1) + T R d_f (P^d_f - 1)
//! multiplications = R d_f P^d_f (2 N_r (2 d_f + 1) + T d_f + 1) + N M (d_v - 1)(T R d_f + U)
//! ```
//!
//! RGSM additionally combines every channel row with every grouping vector
//! once per channel use: `2 U d_v N_r N_c (2 N_a - 1)` additions and
//! `4 U d_v N_r N_c N_a` multiplications, independent of `T`.
//!
//! All counts are exact `u128`; overflow is reported, never wrapped.

use alloc::format;
use alloc::vec::Vec;

use crate::spatial::{min_transmit_antennas, sm_required_antennas, spatial_bits};
use crate::{Error, Result};

/// Real additions and multiplications.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OpCount {
    pub additions: u128,
    pub multiplications: u128,
}

/// Spatial part of the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Antennas {
    Sm {
        transmit: u64,
    },
    Rgsm {
        /// `N_c`.
        groups: u64,
        /// `N_a`.
        active: u64,
        /// `N_t`, if known; must then produce `groups` combinations.
        transmit: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityParams {
    pub resources: u64,
    pub d_f: u64,
    pub d_v: u64,
    pub users: u64,
    pub codewords: u64,
    pub receive_antennas: u64,
    pub iterations: u64,
    pub antennas: Antennas,
}

impl ComplexityParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("R", self.resources),
            ("d_f", self.d_f),
            ("d_v", self.d_v),
            ("U", self.users),
            ("M", self.codewords),
            ("N_r", self.receive_antennas),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Domain(format!("{name} must be positive")));
        }
        if self.d_f > self.users || self.d_v > self.resources {
            return Err(Error::Domain(format!(
                "d_f={} exceeds U={} or d_v={} exceeds R={}",
                self.d_f, self.users, self.d_v, self.resources
            )));
        }
        if u128::from(self.users) * u128::from(self.d_v) != u128::from(self.resources) * u128::from(self.d_f) {
            return Err(Error::Domain(format!(
                "U*d_v = {}*{} differs from R*d_f = {}*{}",
                self.users, self.d_v, self.resources, self.d_f
            )));
        }
        match self.antennas {
            Antennas::Sm { transmit: 0 } => Err(Error::Domain("N_t must be positive".into())),
            Antennas::Rgsm { groups, active, .. } if groups == 0 || active == 0 => {
                Err(Error::Domain("N_c and N_a must be positive".into()))
            }
            Antennas::Rgsm {
                groups,
                active,
                transmit: Some(transmit),
            } => {
                let bits = spatial_bits(transmit as usize, active as usize)?;
                if active >= transmit || 1u128.checked_shl(bits) != Some(u128::from(groups)) {
                    return Err(Error::Domain(format!(
                        "N_t={transmit}, N_a={active} gives 2^{bits} groups, not N_c={groups}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `N_t` for SM, `N_c` for RGSM.
    fn spatial_alphabet(&self) -> u64 {
        match self.antennas {
            Antennas::Sm { transmit } => transmit,
            Antennas::Rgsm { groups, .. } => groups,
        }
    }
}

fn overflow() -> Error {
    Error::Overflow("operation count exceeds 128 bits".into())
}

/// Checked product of all factors.
fn product(factors: &[u128]) -> Result<u128> {
    factors
        .iter()
        .try_fold(1u128, |acc, &f| acc.checked_mul(f))
        .ok_or_else(overflow)
}

fn sum(terms: &[u128]) -> Result<u128> {
    terms
        .iter()
        .try_fold(0u128, |acc, &t| acc.checked_add(t))
        .ok_or_else(overflow)
}

/// Counts shared by both systems, with `N` the spatial alphabet.
fn message_passing_ops(p: &ComplexityParams) -> Result<OpCount> {
    p.validate()?;
    let r = u128::from(p.resources);
    let d_f = u128::from(p.d_f);
    let d_v = u128::from(p.d_v);
    let u = u128::from(p.users);
    let n_r = u128::from(p.receive_antennas);
    let t = u128::from(p.iterations);
    let alphabet = product(&[u128::from(p.spatial_alphabet()), u128::from(p.codewords)])?;
    let d_f_u32 = u32::try_from(p.d_f).map_err(|_| overflow())?;
    let joint = alphabet.checked_pow(d_f_u32).ok_or_else(overflow)?;
    // 2 N_r (2 d_f + 1)
    let per_hypothesis = product(&[2, n_r, 2 * d_f + 1])?;

    let additions = sum(&[
        product(&[r, d_f, joint, per_hypothesis - 1])?,
        product(&[t, r, d_f, joint - 1])?,
    ])?;
    let multiplications = sum(&[
        product(&[r, d_f, joint, sum(&[per_hypothesis, product(&[t, d_f])?, 1])?])?,
        product(&[alphabet, d_v - 1, sum(&[product(&[t, r, d_f])?, u])?])?,
    ])?;
    Ok(OpCount {
        additions,
        multiplications,
    })
}

/// Real operations of the SM-SCMA detector.
pub fn sm_scma_ops(p: &ComplexityParams) -> Result<OpCount> {
    if !matches!(p.antennas, Antennas::Sm { .. }) {
        return Err(Error::MismatchedConfig("SM counts need SM antenna parameters".into()));
    }
    message_passing_ops(p)
}

/// Extra real operations RGSM spends combining channel rows with grouping vectors.
pub fn rgsm_extra_ops(p: &ComplexityParams) -> Result<OpCount> {
    p.validate()?;
    let Antennas::Rgsm { groups, active, .. } = p.antennas else {
        return Err(Error::MismatchedConfig(
            "RGSM counts need RGSM antenna parameters".into(),
        ));
    };
    let base = [
        u128::from(p.users),
        u128::from(p.d_v),
        u128::from(p.receive_antennas),
        u128::from(groups),
    ];
    let n_a = u128::from(active);
    Ok(OpCount {
        additions: product(&[&[2], &base[..], &[2 * n_a - 1]].concat())?,
        multiplications: product(&[&[4], &base[..], &[n_a]].concat())?,
    })
}

/// Real operations of the RGSM-SCMA detector.
pub fn rgsm_scma_ops(p: &ComplexityParams) -> Result<OpCount> {
    let extra = rgsm_extra_ops(p)?;
    let base = message_passing_ops(p)?;
    Ok(OpCount {
        additions: sum(&[base.additions, extra.additions])?,
        multiplications: sum(&[base.multiplications, extra.multiplications])?,
    })
}

/// Extra complexity of RGSM over SM, in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exco {
    pub add_pct: f64,
    pub mult_pct: f64,
}

/// `(RGSM ops - SM ops) / SM ops`, for configurations with equal spectral
/// efficiency (`N_c` of RGSM equal to `N_t` of SM, all else identical).
pub fn exco(sm: &ComplexityParams, rgsm: &ComplexityParams) -> Result<Exco> {
    let (Antennas::Sm { transmit }, Antennas::Rgsm { groups, .. }) = (sm.antennas, rgsm.antennas) else {
        return Err(Error::MismatchedConfig(
            "expected an SM and an RGSM configuration".into(),
        ));
    };
    let same_rest = ComplexityParams {
        antennas: sm.antennas,
        ..*rgsm
    } == *sm;
    if transmit != groups || !same_rest {
        return Err(Error::MismatchedConfig(format!(
            "SM N_t={transmit} vs RGSM N_c={groups}, or other parameters differ"
        )));
    }
    let base = sm_scma_ops(sm)?;
    let total = rgsm_scma_ops(rgsm)?;
    let pct = |extra: u128, base: u128| 100.0 * extra as f64 / base as f64;
    Ok(Exco {
        add_pct: pct(total.additions - base.additions, base.additions),
        mult_pct: pct(total.multiplications - base.multiplications, base.multiplications),
    })
}

/// Antennas SM and RGSM need for the same spatial bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AntennaSavings {
    pub eta_s: u32,
    pub active: usize,
    pub sm_antennas: usize,
    pub rgsm_antennas: usize,
}

/// One row per `eta_s`, with `active[i]` active antennas for `eta_s[i]`.
pub fn antenna_savings_table(eta_s: &[u32], active: &[usize]) -> Result<Vec<AntennaSavings>> {
    if eta_s.len() != active.len() {
        return Err(Error::Length {
            expected: eta_s.len(),
            actual: active.len(),
        });
    }
    eta_s
        .iter()
        .zip(active)
        .map(|(&eta, &n_a)| {
            Ok(AntennaSavings {
                eta_s: eta,
                active: n_a,
                sm_antennas: sm_required_antennas(eta)?,
                rgsm_antennas: min_transmit_antennas(eta, n_a)?,
            })
        })
        .collect()
}

/// Active antennas used for `eta_s = 2..=10` spatial bits.
pub const ACTIVE_ANTENNA_SCHEDULE: [usize; 9] = [2, 2, 3, 3, 4, 4, 4, 5, 5];

/// Matched SM and RGSM parameters for `eta_s` spatial bits: SM uses
/// `2^eta_s` antennas, RGSM `N_c = 2^eta_s` groups of `active` antennas.
pub fn matched_params(base: ComplexityParams, eta_s: u32, active: u64) -> Result<(ComplexityParams, ComplexityParams)> {
    let alphabet = sm_required_antennas(eta_s)? as u64;
    let sm = ComplexityParams {
        antennas: Antennas::Sm { transmit: alphabet },
        ..base
    };
    let rgsm = ComplexityParams {
        antennas: Antennas::Rgsm {
            groups: alphabet,
            active,
            transmit: None,
        },
        ..base
    };
    Ok((sm, rgsm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(antennas: Antennas) -> ComplexityParams {
        ComplexityParams {
            resources: 4,
            d_f: 3,
            d_v: 2,
            users: 6,
            codewords: 4,
            receive_antennas: 1,
            iterations: 2,
            antennas,
        }
    }

    fn rgsm8() -> ComplexityParams {
        base(Antennas::Rgsm {
            groups: 8,
            active: 2,
            transmit: Some(5),
        })
    }

    /// Direct transcription of the table formulas in floating point-free
    /// arithmetic, written independently of the checked implementation.
    fn oracle(r: u128, d_f: u128, d_v: u128, u: u128, m: u128, n_r: u128, t: u128, n: u128) -> (u128, u128) {
        let j = (n * m).pow(d_f as u32);
        let a = r * d_f * j * (2 * n_r * (2 * d_f + 1) - 1) + t * r * d_f * (j - 1);
        let mu = r * d_f * j * (2 * n_r * (2 * d_f + 1) + t * d_f + 1) + n * m * (d_v - 1) * (t * r * d_f + u);
        (a, mu)
    }

    #[test]
    fn sm_reference_value() {
        let ops = sm_scma_ops(&base(Antennas::Sm { transmit: 8 })).unwrap();
        assert_eq!(ops.additions, 5_898_216);
        assert_eq!(ops.additions, 12 * 32768 * 13 + 24 * 32767);
        assert_eq!((ops.additions, ops.multiplications), oracle(4, 3, 2, 6, 4, 1, 2, 8));
    }

    #[test]
    fn rgsm_extras() {
        let sm = sm_scma_ops(&base(Antennas::Sm { transmit: 8 })).unwrap();
        let rgsm = rgsm_scma_ops(&rgsm8()).unwrap();
        // 2*6*2*1*8*(2*2-1) and 4*6*2*1*8*2
        assert_eq!(rgsm.additions - sm.additions, 576);
        assert_eq!(rgsm.multiplications - sm.multiplications, 768);
        assert_eq!(rgsm.additions, 5_898_792);
    }

    #[test]
    fn zero_iterations_drop_second_addition_term() {
        let mut p = base(Antennas::Sm { transmit: 1 });
        p.iterations = 0;
        let ops = sm_scma_ops(&p).unwrap();
        assert_eq!(ops.additions, 4 * 3 * 64 * 13);
    }

    #[test]
    fn single_resource_users_drop_second_multiplication_term() {
        let p = ComplexityParams {
            resources: 2,
            d_f: 1,
            d_v: 1,
            users: 2,
            codewords: 2,
            receive_antennas: 1,
            iterations: 3,
            antennas: Antennas::Sm { transmit: 2 },
        };
        let ops = sm_scma_ops(&p).unwrap();
        assert_eq!(ops.multiplications, 2 * 4 * (2 * 3 + 3 + 1));
    }

    #[test]
    fn zero_receive_antennas_rejected() {
        let mut p = rgsm8();
        p.receive_antennas = 0;
        assert!(matches!(rgsm_scma_ops(&p), Err(Error::Domain(_))));
    }

    #[test]
    fn rgsm_base_equals_sm_when_alphabets_match() {
        let sm = sm_scma_ops(&base(Antennas::Sm { transmit: 8 })).unwrap();
        let rgsm = rgsm_scma_ops(&rgsm8()).unwrap();
        let extra = rgsm_extra_ops(&rgsm8()).unwrap();
        assert_eq!(rgsm.additions - extra.additions, sm.additions);
        assert_eq!(rgsm.multiplications - extra.multiplications, sm.multiplications);
    }

    #[test]
    fn inconsistent_groups_rejected() {
        let p = base(Antennas::Rgsm {
            groups: 16,
            active: 2,
            transmit: Some(5),
        });
        assert!(p.validate().is_err());
    }

    #[test]
    fn overflow_is_reported() {
        let mut p = base(Antennas::Sm { transmit: 1 << 40 });
        p.codewords = 1 << 20;
        assert!(matches!(sm_scma_ops(&p), Err(Error::Overflow(_))));
    }

    #[test]
    fn exco_reference() {
        let e = exco(&base(Antennas::Sm { transmit: 8 }), &rgsm8()).unwrap();
        assert!((e.add_pct - 100.0 * 576.0 / 5_898_216.0).abs() < 1e-12);
        assert!(e.add_pct < 0.05 && e.mult_pct < 0.05);
    }

    #[test]
    fn exco_mismatch() {
        let r = exco(&base(Antennas::Sm { transmit: 16 }), &rgsm8());
        assert!(matches!(r, Err(Error::MismatchedConfig(_))));
        let mut other = rgsm8();
        other.iterations = 5;
        assert!(exco(&base(Antennas::Sm { transmit: 8 }), &other).is_err());
    }

    #[test]
    fn extras_scale_with_receive_antennas() {
        let mut p = rgsm8();
        let one = rgsm_extra_ops(&p).unwrap();
        p.receive_antennas = 2;
        let two = rgsm_extra_ops(&p).unwrap();
        assert_eq!(two.additions, 2 * one.additions);
        assert_eq!(two.multiplications, 2 * one.multiplications);
    }

    #[test]
    fn exco_vanishes_with_iterations() {
        let mut last = f64::INFINITY;
        for t in [1u64, 10, 100, 1000, 100_000] {
            let (sm, rgsm) = matched_params(
                ComplexityParams {
                    iterations: t,
                    ..rgsm8()
                },
                3,
                2,
            )
            .unwrap();
            let e = exco(&sm, &rgsm).unwrap();
            assert!(e.mult_pct < last);
            last = e.mult_pct;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn savings_rows() {
        let rows = antenna_savings_table(&[7, 3], &[4, 2]).unwrap();
        assert_eq!((rows[0].sm_antennas, rows[0].rgsm_antennas), (128, 10));
        assert_eq!((rows[1].sm_antennas, rows[1].rgsm_antennas), (8, 5));
        assert!(matches!(
            antenna_savings_table(&[2, 3], &[2]),
            Err(Error::Length { .. })
        ));
    }

    #[test]
    fn monotone_in_each_parameter() {
        let p = base(Antennas::Sm { transmit: 4 });
        let ops = sm_scma_ops(&p).unwrap();
        let bumped = [
            ComplexityParams { iterations: 3, ..p },
            ComplexityParams {
                receive_antennas: 2,
                ..p
            },
            ComplexityParams { codewords: 8, ..p },
        ];
        for q in bumped {
            let o = sm_scma_ops(&q).unwrap();
            assert!(o.additions > ops.additions && o.multiplications > ops.multiplications);
        }
    }
}
