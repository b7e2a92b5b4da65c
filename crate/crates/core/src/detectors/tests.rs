use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::codebook::{default_codebook_set, Codebook, CodebookSet};
use crate::complexity::OpCount;
use crate::phy::{encode, sample_channel, sample_noise, synthesize_received, ChannelDims, ReceivedSignal, TxSymbol};
use crate::spatial::{generate_grouping_table, Mode};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Three users on a two-resource chain: user 0 on r0, user 1 on both, user 2 on r1.
fn chain_link() -> Link {
    let s = FRAC_1_SQRT_2;
    let rot = Complex64::from_polar(1.0, PI / 4.0);
    let books = vec![
        Codebook::from_rows(2, 2, vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap(),
        Codebook::from_rows(2, 2, vec![c(s, 0.0), c(-s, 0.0), c(0.0, s), c(0.0, -s)]).unwrap(),
        Codebook::from_rows(2, 2, vec![c(0.0, 0.0), c(0.0, 0.0), rot, -rot]).unwrap(),
    ];
    let table = generate_grouping_table(3, 2, Mode::Rgsm).unwrap();
    assert_eq!(table.rows(), 2);
    Link::new(CodebookSet::new(books).unwrap(), table).unwrap()
}

fn default_link(transmit: usize, active: usize, mode: Mode) -> Link {
    Link::new(
        default_codebook_set(6, 4, 4).unwrap(),
        generate_grouping_table(transmit, active, mode).unwrap(),
    )
    .unwrap()
}

struct Instance {
    symbols: Vec<TxSymbol>,
    chan: ChannelRealization,
    y: ReceivedSignal,
}

fn random_instance(link: &Link, rx: usize, noise_variance: f64, rng: &mut ChaCha8Rng) -> Instance {
    let symbols: Vec<TxSymbol> = (0..link.users())
        .map(|u| {
            let bits: Vec<u8> = (0..link.bits_per_user())
                .map(|_| u8::from(rng.random::<bool>()))
                .collect();
            encode(&bits, u, link).unwrap()
        })
        .collect();
    let chan = sample_channel(rng, ChannelDims::for_link(link, rx));
    let noise = sample_noise(rng, rx, link.resources(), noise_variance);
    let y = synthesize_received(&symbols, &chan, &noise, noise_variance, link).unwrap();
    Instance { symbols, chan, y }
}

fn noiseless_instance(link: &Link, rx: usize, rng: &mut ChaCha8Rng) -> Instance {
    let mut inst = random_instance(link, rx, 1e-20, rng);
    let zeros = vec![c(0.0, 0.0); rx * link.resources()];
    inst.y = synthesize_received(&inst.symbols, &inst.chan, &zeros, 1e-20, link).unwrap();
    inst
}

fn truth(link: &Link, inst: &Instance) -> Vec<usize> {
    inst.symbols
        .iter()
        .map(|s| link.pair_index(s.codeword, s.group))
        .collect()
}

/// Brute-force per-user posteriors: enumerate every joint hypothesis,
/// rebuild the noiseless received signal with the transmitter and weight it
/// by the Gaussian density of the residual.
fn brute_force_marginals(link: &Link, inst: &Instance) -> Vec<Vec<f64>> {
    let users = link.users();
    let pairs = link.pairs();
    let rx = inst.chan.receive_antennas();
    let n0 = inst.y.noise_variance();
    let zeros = vec![c(0.0, 0.0); rx * link.resources()];
    let total = pairs.pow(users as u32);
    let mut log_weights = Vec::with_capacity(total);
    for index in 0..total {
        let symbols: Vec<TxSymbol> = (0..users)
            .map(|u| {
                let p = (index / pairs.pow((users - 1 - u) as u32)) % pairs;
                let (m, k) = link.pair(p);
                encode(&link.bits_for(m, k), u, link).unwrap()
            })
            .collect();
        let clean = synthesize_received(&symbols, &inst.chan, &zeros, n0, link).unwrap();
        let dist: f64 = inst
            .y
            .samples()
            .iter()
            .zip(clean.samples())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        log_weights.push(-dist / n0);
    }
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut marginals = vec![vec![0.0; pairs]; users];
    for (index, lw) in log_weights.iter().enumerate() {
        let w = libm::exp(lw - max);
        for (u, marginal) in marginals.iter_mut().enumerate() {
            marginal[(index / pairs.pow((users - 1 - u) as u32)) % pairs] += w;
        }
    }
    for m in &mut marginals {
        let s: f64 = m.iter().sum();
        m.iter_mut().for_each(|v| *v /= s);
    }
    marginals
}

#[test]
fn likelihood_zero_residual_and_unit_residual() {
    let link = chain_link();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let inst = noiseless_instance(&link, 1, &mut rng);
    let cands: Vec<(usize, usize, usize)> = link.graph().lambda[0]
        .iter()
        .map(|&u| (u, inst.symbols[u].codeword, inst.symbols[u].group))
        .collect();
    let y = inst.y.sample(0, 0);
    let l = likelihood(y, 0, 0, &cands, &inst.chan, &link, 0.5, 0.0).unwrap();
    assert_eq!(l, 1.0);
    // shift y by sqrt(N0)
    let n0 = 0.5;
    let l = likelihood(y + c(libm::sqrt(n0), 0.0), 0, 0, &cands, &inst.chan, &link, n0, 0.0).unwrap();
    assert!((l - libm::exp(-1.0)).abs() < 1e-15);
}

#[test]
fn likelihood_matches_density_oracle() {
    let link = default_link(5, 2, Mode::Rgsm);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let inst = random_instance(&link, 2, 0.3, &mut rng);
        let r = rng.random_range(0..4);
        let n = rng.random_range(0..2);
        let cands: Vec<(usize, usize, usize)> = link.graph().lambda[r]
            .iter()
            .map(|&u| (u, rng.random_range(0..4), rng.random_range(0..8)))
            .collect();
        let mut reconstruction = c(0.0, 0.0);
        for &(u, m, k) in &cands {
            let h = inst.chan.row(u, n, r);
            let g = link.table().row(k);
            let mut gain = c(0.0, 0.0);
            for t in 0..5 {
                gain += h[t] * g[t];
            }
            reconstruction += gain * link.codebooks().codebook(u).entry(r, m);
        }
        let expected = libm::exp(-(inst.y.sample(n, r) - reconstruction).norm_sqr() / 0.3);
        let got = likelihood(inst.y.sample(n, r), r, n, &cands, &inst.chan, &link, 0.3, 0.0).unwrap();
        assert!(
            (got - expected).abs() <= 1e-12 * expected.max(1e-300),
            "{got} vs {expected}"
        );
    }
}

#[test]
fn likelihood_rejects_wrong_candidates() {
    let link = default_link(5, 2, Mode::Rgsm);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inst = random_instance(&link, 1, 1.0, &mut rng);
    let r = likelihood(inst.y.sample(0, 0), 0, 0, &[(0, 0, 0)], &inst.chan, &link, 1.0, 0.0);
    assert!(matches!(r, Err(Error::Dimension(_))));
}

#[test]
fn likelihood_floor_clamps() {
    let link = chain_link();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let inst = noiseless_instance(&link, 1, &mut rng);
    let cands = [(0, 0, 0), (1, 0, 0)];
    let l = likelihood(c(1e6, 0.0), 0, 0, &cands, &inst.chan, &link, 1e-3, 1e-300).unwrap();
    assert_eq!(l, 1e-300);
}

#[test]
fn ml_recovers_noiseless() {
    let link = default_link(5, 2, Mode::Rgsm);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let inst = noiseless_instance(&link, 1, &mut rng);
        let d = ml_decode(&inst.y, &inst.chan, &link, &DetectorConfig::default()).unwrap();
        assert_eq!(d.pairs(&link), truth(&link, &inst));
        for (u, s) in inst.symbols.iter().enumerate() {
            let mut bits = s.spatial_bits.clone();
            bits.extend(&s.code_bits);
            assert_eq!(d.users[u].bits, bits);
        }
    }
}

#[test]
fn ml_two_hypotheses() {
    let book = Codebook::from_rows(1, 1, vec![c(1.0, 0.0)]).unwrap();
    let link = Link::new(
        CodebookSet::new(vec![book]).unwrap(),
        generate_grouping_table(2, 1, Mode::Sm).unwrap(),
    )
    .unwrap();
    let dims = ChannelDims::for_link(&link, 1);
    let chan = ChannelRealization::new(dims, vec![c(0.3, -1.0), c(-0.7, 0.2)]).unwrap();
    for k in 0..2 {
        let sym = encode(&[k as u8], 0, &link).unwrap();
        let y = synthesize_received(&[sym], &chan, &[c(0.0, 0.0)], 1e-3, &link).unwrap();
        let d = ml_decode(&y, &chan, &link, &DetectorConfig::default()).unwrap();
        assert_eq!((d.users[0].codeword, d.users[0].group), (0, k));
    }
}

#[test]
fn exhaustive_detectors_respect_cap() {
    let link = default_link(5, 2, Mode::Rgsm);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let inst = random_instance(&link, 1, 1.0, &mut rng);
    let cfg = DetectorConfig {
        joint_space_cap: 1 << 20,
        ..DetectorConfig::default()
    };
    let expected = Error::SearchSpaceTooLarge {
        size: 1 << 30,
        cap: 1 << 20,
    };
    assert_eq!(ml_decode(&inst.y, &inst.chan, &link, &cfg), Err(expected.clone()));
    assert_eq!(map_decode(&inst.y, &inst.chan, &link, &cfg), Err(expected));
}

#[test]
fn ml_is_exact_on_small_instances() {
    // compare the pruned search with plain enumeration of all hypotheses
    let link = chain_link();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let inst = random_instance(&link, 2, 2.0, &mut rng);
        let marg = brute_force_marginals(&link, &inst);
        let d = ml_decode(&inst.y, &inst.chan, &link, &DetectorConfig::default()).unwrap();
        // ML joint hypothesis: recompute the distance of all 64 hypotheses
        let pairs = link.pairs();
        let zeros = vec![c(0.0, 0.0); 4];
        let mut best = (f64::INFINITY, 0);
        for index in 0..pairs.pow(3) {
            let syms: Vec<TxSymbol> = (0..3)
                .map(|u| {
                    let (m, k) = link.pair((index / pairs.pow(2 - u as u32)) % pairs);
                    encode(&link.bits_for(m, k), u, &link).unwrap()
                })
                .collect();
            let clean = synthesize_received(&syms, &inst.chan, &zeros, 1.0, &link).unwrap();
            let dist: f64 = inst
                .y
                .samples()
                .iter()
                .zip(clean.samples())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            if dist < best.0 {
                best = (dist, index);
            }
        }
        let got = d.pairs(&link);
        let want: Vec<usize> = (0..3).map(|u| (best.1 / pairs.pow(2 - u as u32)) % pairs).collect();
        assert_eq!(got, want);
        assert_eq!(marg.len(), 3);
    }
}

#[test]
fn map_matches_brute_force_marginals() {
    let link = chain_link();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cfg = DetectorConfig {
        map_prune_tolerance: 0.0,
        ..DetectorConfig::default()
    };
    for _ in 0..100 {
        let inst = random_instance(&link, 2, 0.5, &mut rng);
        let oracle = brute_force_marginals(&link, &inst);
        let d = map_decode(&inst.y, &inst.chan, &link, &cfg).unwrap();
        for (u, ud) in d.users.iter().enumerate() {
            let post = ud.posterior.as_ref().unwrap();
            let sum: f64 = post.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            for (a, b) in post.iter().zip(&oracle[u]) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn pruned_map_matches_full_map() {
    let link = chain_link();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let full = DetectorConfig {
        map_prune_tolerance: 0.0,
        ..DetectorConfig::default()
    };
    for n0 in [2.0, 0.1, 1e-3] {
        for _ in 0..30 {
            let inst = random_instance(&link, 1, n0, &mut rng);
            let a = map_decode(&inst.y, &inst.chan, &link, &full).unwrap();
            let b = map_decode(&inst.y, &inst.chan, &link, &DetectorConfig::default()).unwrap();
            assert_eq!(a.pairs(&link), b.pairs(&link));
            for (x, y) in a.users.iter().zip(&b.users) {
                for (p, q) in x.posterior.as_ref().unwrap().iter().zip(y.posterior.as_ref().unwrap()) {
                    assert!((p - q).abs() < 1e-15);
                }
            }
        }
    }
}

#[test]
fn map_and_ml_agree_noiseless() {
    let link = default_link(5, 2, Mode::Rgsm);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let inst = noiseless_instance(&link, 1, &mut rng);
        let cfg = DetectorConfig::default();
        let ml = ml_decode(&inst.y, &inst.chan, &link, &cfg).unwrap();
        let map = map_decode(&inst.y, &inst.chan, &link, &cfg).unwrap();
        assert_eq!(ml.pairs(&link), truth(&link, &inst));
        assert_eq!(map.pairs(&link), truth(&link, &inst));
    }
}

#[test]
fn single_user_detectors_agree() {
    let book = default_codebook_set(1, 1, 4).unwrap();
    let link = Link::new(book, generate_grouping_table(5, 2, Mode::Rgsm).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = DetectorConfig::default();
    for n0 in [3.0, 0.5, 0.05] {
        for _ in 0..50 {
            let inst = random_instance(&link, 1, n0, &mut rng);
            let ml = ml_decode(&inst.y, &inst.chan, &link, &cfg).unwrap();
            let map = map_decode(&inst.y, &inst.chan, &link, &cfg).unwrap();
            let mpa = mpa_decode(&inst.y, &inst.chan, &link, &cfg).unwrap();
            assert_eq!(ml.pairs(&link), map.pairs(&link));
            assert_eq!(ml.pairs(&link), mpa.pairs(&link));
        }
    }
}

#[test]
fn initial_messages_are_uniform() {
    let link = default_link(5, 2, Mode::Rgsm);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let inst = random_instance(&link, 1, 0.1, &mut rng);
    let (_, trace) = mpa_decode_traced(&inst.y, &inst.chan, &link, &DetectorConfig::default()).unwrap();
    assert_eq!(trace.len(), 3);
    assert_eq!(trace[0].iteration, 0);
    assert_eq!(trace[0].vn_to_fn.len(), 12);
    for msg in &trace[0].vn_to_fn {
        assert!(msg.values.iter().all(|&v| v == 1.0 / 32.0));
    }
}

#[test]
fn mpa_is_exact_on_a_tree() {
    let link = chain_link();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for log_domain in [false, true] {
        let cfg = DetectorConfig {
            iterations: 4,
            log_domain,
            ..DetectorConfig::default()
        };
        for _ in 0..100 {
            let inst = random_instance(&link, 1, 0.4, &mut rng);
            let oracle = brute_force_marginals(&link, &inst);
            let d = mpa_decode(&inst.y, &inst.chan, &link, &cfg).unwrap();
            for (u, ud) in d.users.iter().enumerate() {
                for (a, b) in ud.posterior.as_ref().unwrap().iter().zip(&oracle[u]) {
                    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
                }
            }
        }
    }
}

#[test]
fn mpa_recovers_noiseless_default() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for (t, a, mode) in [(5, 2, Mode::Rgsm), (5, 2, Mode::Gsm), (8, 1, Mode::Sm)] {
        let link = default_link(t, a, mode);
        for _ in 0..20 {
            let inst = noiseless_instance(&link, 1, &mut rng);
            let d = mpa_decode(&inst.y, &inst.chan, &link, &DetectorConfig::default()).unwrap();
            assert_eq!(d.pairs(&link), truth(&link, &inst), "{mode}");
        }
    }
}

#[test]
fn sm_decisions_index_antennas() {
    let link = default_link(8, 1, Mode::Sm);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let inst = noiseless_instance(&link, 2, &mut rng);
    let d = mpa_decode(&inst.y, &inst.chan, &link, &DetectorConfig::default()).unwrap();
    for (u, s) in inst.symbols.iter().enumerate() {
        assert_eq!(link.table().active_set(d.users[u].group), vec![s.group]);
    }
}

#[test]
fn messages_stay_normalized() {
    let link = default_link(5, 2, Mode::Rgsm);
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for n0 in [1.0, 0.1] {
        let inst = random_instance(&link, 2, n0, &mut rng);
        let cfg = DetectorConfig {
            iterations: 5,
            ..DetectorConfig::default()
        };
        let (_, trace) = mpa_decode_traced(&inst.y, &inst.chan, &link, &cfg).unwrap();
        for state in &trace {
            for msg in &state.vn_to_fn {
                let s: f64 = msg.values.iter().sum();
                assert!((s - 1.0).abs() < 1e-9);
                assert!(msg.values.iter().all(|&v| v >= 0.0));
            }
            for msg in &state.fn_to_vn {
                assert!(msg.values.iter().all(|&v| v >= 0.0));
            }
        }
    }
}

#[test]
fn scaling_one_function_node_keeps_decisions() {
    let link = default_link(5, 2, Mode::Rgsm);
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let cfg = DetectorConfig::default();
    for _ in 0..20 {
        let inst = random_instance(&link, 1, 0.5, &mut rng);
        let plain = mpa::run(&inst.y, &inst.chan, &link, &cfg, &mut NoTally, None, None).unwrap();
        for r in 0..4 {
            let mut scale = vec![1.0; 4];
            scale[r] = 37.5;
            let scaled = mpa::run(&inst.y, &inst.chan, &link, &cfg, &mut NoTally, None, Some(&scale)).unwrap();
            assert_eq!(plain.pairs(&link), scaled.pairs(&link));
        }
    }
}

#[test]
fn log_and_linear_domains_agree() {
    let link = default_link(5, 2, Mode::Rgsm);
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..20 {
        let inst = random_instance(&link, 2, 0.2, &mut rng);
        let lin = mpa_decode(&inst.y, &inst.chan, &link, &DetectorConfig::default()).unwrap();
        let log = mpa_decode(
            &inst.y,
            &inst.chan,
            &link,
            &DetectorConfig {
                log_domain: true,
                ..DetectorConfig::default()
            },
        )
        .unwrap();
        assert_eq!(lin.pairs(&link), log.pairs(&link));
        for (a, b) in lin.users.iter().zip(&log.users) {
            for (p, q) in a.posterior.as_ref().unwrap().iter().zip(b.posterior.as_ref().unwrap()) {
                assert!((p - q).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn underflow_is_signalled() {
    let link = default_link(5, 2, Mode::Rgsm);
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    let inst = random_instance(&link, 1, 1e-3, &mut rng);
    // a received signal far from every hypothesis at tiny noise
    let far: Vec<Complex64> = inst.y.samples().iter().map(|v| v + c(1e3, 0.0)).collect();
    let y = ReceivedSignal::new(1, 4, far, 1e-3).unwrap();
    let r = mpa_decode(&y, &inst.chan, &link, &DetectorConfig::default());
    assert!(matches!(r, Err(Error::NumericalUnderflow(_))));
    // the log domain has no floor and still decides
    let cfg = DetectorConfig {
        log_domain: true,
        ..DetectorConfig::default()
    };
    assert!(mpa_decode(&y, &inst.chan, &link, &cfg).is_ok());
}

#[test]
fn config_validation() {
    let bad = [
        DetectorConfig {
            iterations: 0,
            ..DetectorConfig::default()
        },
        DetectorConfig {
            joint_space_cap: 0,
            ..DetectorConfig::default()
        },
        DetectorConfig {
            likelihood_floor: -1.0,
            ..DetectorConfig::default()
        },
        DetectorConfig {
            map_prune_tolerance: f64::NAN,
            ..DetectorConfig::default()
        },
    ];
    for cfg in bad {
        assert!(cfg.validate().is_err());
    }
    assert!(DetectorConfig::default().validate().is_ok());
}

fn probe(link: &Link, rng: &mut ChaCha8Rng) -> Instance {
    random_instance(link, 1, 0.1, rng)
}

#[test]
fn zero_iteration_probe_counts_setup_only() {
    let link = default_link(5, 2, Mode::Rgsm);
    let inst = probe(&link, &mut ChaCha8Rng::seed_from_u64(61));
    let ops = count_runtime_ops(&inst.y, &inst.chan, &link, 0).unwrap();
    let (edges, n_c, pairs, n_a) = (12u128, 8u128, 32u128, 2u128);
    let combine = OpCount {
        additions: edges * n_c * 2 * (2 * n_a - 1),
        multiplications: edges * n_c * 4 * n_a,
    };
    let contributions = OpCount {
        additions: edges * pairs * 2,
        multiplications: edges * pairs * 4,
    };
    // 4 resources, 32^2 residual prefixes of two complex subtractions, then
    // per hypothesis one complex subtraction, |.|^2 and the 1/N0 scaling
    let table = OpCount {
        additions: 4 * (1024 * 4 + 32768 * 3),
        multiplications: 4 * 32768 * 3,
    };
    // posteriors: one product and one normalization per user
    let decision = OpCount {
        additions: 6 * 31,
        multiplications: 6 * 33,
    };
    let expected = [combine, contributions, table, decision]
        .iter()
        .fold(OpCount::default(), |a, b| OpCount {
            additions: a.additions + b.additions,
            multiplications: a.multiplications + b.multiplications,
        });
    assert_eq!(ops, expected);
}

#[test]
fn each_iteration_adds_the_same_work() {
    let link = default_link(5, 2, Mode::Rgsm);
    let inst = probe(&link, &mut ChaCha8Rng::seed_from_u64(67));
    let counts: Vec<OpCount> = (1..5)
        .map(|t| count_runtime_ops(&inst.y, &inst.chan, &link, t).unwrap())
        .collect();
    let step = |a: &OpCount, b: &OpCount| (b.additions - a.additions, b.multiplications - a.multiplications);
    let first = step(&counts[0], &counts[1]);
    for w in counts.windows(2) {
        assert_eq!(step(&w[0], &w[1]), first);
    }
    // function node updates dominate: 4 resources, 32^3 hypotheses, 2 products each
    assert!(first.1 >= 4 * 32768 * 2);
}

#[test]
fn doubling_the_alphabet_scales_by_two_to_the_d_f() {
    // N_c = 8 (N_t = 5) against N_c = 16 (N_t = 7), same M and d_f = 3
    let small = default_link(5, 2, Mode::Rgsm);
    let large = default_link(7, 2, Mode::Rgsm);
    assert_eq!(large.pairs(), 2 * small.pairs());
    let per_iteration = |link: &Link| {
        let inst = probe(link, &mut ChaCha8Rng::seed_from_u64(71));
        let a = count_runtime_ops(&inst.y, &inst.chan, link, 1).unwrap();
        let b = count_runtime_ops(&inst.y, &inst.chan, link, 2).unwrap();
        (b.multiplications - a.multiplications) as f64
    };
    let ratio = per_iteration(&large) / per_iteration(&small);
    // message products and normalizations only double, pulling the ratio slightly below 8
    assert!((ratio - 8.0).abs() < 0.25, "ratio {ratio}");
}
