use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::channel::{draw_channel_matrix, noise_power_w, ChannelParams};
use crate::noma::{full_budget_split, Link};
use crate::topology::generate_topology;

const LINK: Link = Link {
    noise_w: 1e-12,
    bandwidth_hz: 1.5625e5,
};

fn cfg(r_req: f64) -> AllocationConfig {
    AllocationConfig {
        r_req_bps: r_req,
        ..Default::default()
    }
}

fn single(gains: Array2<f64>) -> (ChannelMatrix, SubcarrierAllocation) {
    let n_sc = gains.ncols();
    let ch = ChannelMatrix::from_gains(gains).unwrap();
    let alloc = SubcarrierAllocation::from_users_on(1, vec![vec![0]; n_sc]).unwrap();
    (ch, alloc)
}

#[test]
fn equal_power_examples() {
    let alloc = SubcarrierAllocation::from_users_on(2, vec![vec![0], vec![0], vec![0], vec![0, 1]])
        .unwrap();
    let p = equal_power_init(&alloc, 0.2);
    assert_eq!(p.p[[0, 0]], 0.05);
    assert_eq!(p.p[[1, 3]], 0.2);
    assert_eq!(p.p[[1, 0]], 0.0);
    assert!((p.user_total(0) - 0.2).abs() < 1e-15);
}

#[test]
fn phase1_zero_requirement() {
    let (ch, alloc) = single(array![[1e-9, 2e-9]]);
    let order = DecodeOrder::new(&alloc, &ch, OrderBy::Gain, None);
    let fp = min_power_feasible(&alloc, &ch, &cfg(0.0), LINK, &order).unwrap();
    assert!(fp.powers.p.iter().all(|&x| x == 0.0));
    assert!(fp.outage.is_empty());
}

#[test]
fn phase1_bisection_inverts_rate() {
    let g = 1e-9;
    let (ch, alloc) = single(array![[g]]);
    let full = LINK.rate(0.2 * g / LINK.noise_w);
    let r_req = 0.5 * full;
    let order = DecodeOrder::new(&alloc, &ch, OrderBy::Gain, None);
    let fp = min_power_feasible(&alloc, &ch, &cfg(r_req), LINK, &order).unwrap();
    // analytic inverse: p = (2^(r/B) − 1)·noise/g
    let expect = ((r_req / LINK.bandwidth_hz).exp2() - 1.0) * LINK.noise_w / g;
    let p = fp.powers.p[[0, 0]];
    assert!((p - expect).abs() <= 1e-8 * expect);
    let got = LINK.rate(p * g / LINK.noise_w);
    assert!(got >= r_req && got - r_req <= 1e-8 * r_req);
}

#[test]
fn phase1_vanishing_gain_goes_to_outage() {
    let ch = ChannelMatrix::from_gains(array![[1e-9, 1e-9], [1e-30, 1e-30]]).unwrap();
    let alloc = SubcarrierAllocation::from_users_on(2, vec![vec![0, 1], vec![0, 1]]).unwrap();
    let order = DecodeOrder::new(&alloc, &ch, OrderBy::Gain, None);
    let fp = min_power_feasible(&alloc, &ch, &cfg(1e5), LINK, &order).unwrap();
    assert_eq!(fp.outage, vec![1]);
    assert!((fp.powers.user_total(1) - 0.2).abs() < 1e-15);
    let rates = crate::noma::compute_rates(&alloc, &ch, &fp.powers, LINK, &order);
    assert!(rates.user_rate[0] >= 1e5 * (1.0 - 1e-9));
}

#[test]
fn dinkelbach_rejects_infeasible_start() {
    let (ch, alloc) = single(array![[1e-9]]);
    let order = DecodeOrder::new(&alloc, &ch, OrderBy::Gain, None);
    let start = FeasiblePoint {
        powers: PowerAllocation::zeros(1, 1, 0.2),
        outage: vec![],
    };
    assert!(dinkelbach_power_allocation(&alloc, &ch, &cfg(1e5), LINK, &order, &start).is_err());
    let over = FeasiblePoint {
        powers: PowerAllocation {
            p: array![[0.3]],
            p_max_w: 0.2,
        },
        outage: vec![],
    };
    assert!(dinkelbach_power_allocation(&alloc, &ch, &cfg(0.0), LINK, &order, &over).is_err());
}

#[test]
fn dinkelbach_vanishing_gains() {
    let ch = ChannelMatrix::from_gains(Array2::from_elem((2, 2), 1e-30)).unwrap();
    let alloc = SubcarrierAllocation::from_users_on(2, vec![vec![0, 1], vec![0, 1]]).unwrap();
    let order = DecodeOrder::new(&alloc, &ch, OrderBy::Gain, None);
    let config = AllocationConfig {
        r_req_bps: 0.0,
        ..Default::default()
    };
    let link = Link {
        noise_w: 6.2205e-16,
        bandwidth_hz: 1.5625e5,
    };
    let start = min_power_feasible(&alloc, &ch, &config, link, &order).unwrap();
    let (p, trace) =
        dinkelbach_power_allocation(&alloc, &ch, &config, link, &order, &start).unwrap();
    let rates = crate::noma::compute_rates(&alloc, &ch, &p, link, &order);
    assert!(rates.sum_rate < 1e-6, "{}", rates.sum_rate);
    assert!(trace.lambda_sequence.last().unwrap() < &1e-6);
}

#[test]
fn dinkelbach_pinned_when_floor_equals_full_budget_rate() {
    // two users on disjoint subcarriers, each needing exactly its full-budget rate
    let ch = ChannelMatrix::from_gains(array![[2e-9, 1e-9, 1e-12], [1e-12, 1e-12, 3e-9]]).unwrap();
    let alloc = SubcarrierAllocation::from_users_on(2, vec![vec![0], vec![0], vec![1]]).unwrap();
    let order = DecodeOrder::new(&alloc, &ch, OrderBy::Gain, None);
    let full = full_budget_split(&alloc, 0.2);
    let full_rates = crate::noma::compute_rates(&alloc, &ch, &full, LINK, &order);
    let r_req = full_rates.user_rate[0].min(full_rates.user_rate[1]);
    // user with the smaller full rate is pinned; make both pinned by matching rates
    let config = cfg(r_req);
    let start = min_power_feasible(&alloc, &ch, &config, LINK, &order).unwrap();
    assert!(start.outage.is_empty());
    let (p, _) = dinkelbach_power_allocation(&alloc, &ch, &config, LINK, &order, &start).unwrap();
    let pinned = if full_rates.user_rate[0] <= full_rates.user_rate[1] {
        0
    } else {
        1
    };
    for &s in &alloc.subcarriers_of[pinned] {
        assert!((p.p[[pinned, s]] - start.powers.p[[pinned, s]]).abs() <= 1e-9 * 0.2);
    }
    let rates = crate::noma::compute_rates(&alloc, &ch, &p, LINK, &order);
    assert!(rates.user_rate[pinned] >= r_req * (1.0 - 1e-6));
}

#[test]
fn golden_section_finds_parabola_peak() {
    let (x, fx) = golden_section_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-12);
    assert!((x - 0.3).abs() < 1e-9);
    assert!(fx <= 0.0 && fx > -1e-17);
}

#[test]
fn single_user_scalar_ee_matches_scan() {
    // γ = g/noise = 1e6 W⁻¹
    let link = Link {
        noise_w: 1e-12,
        bandwidth_hz: 1.5625e5,
    };
    let (ch, alloc) = single(array![[1e-6]]);
    let config = cfg(0.0);
    let order = DecodeOrder::new(&alloc, &ch, OrderBy::Gain, None);
    let start = FeasiblePoint {
        powers: equal_power_init(&alloc, 0.2),
        outage: vec![],
    };
    let (p, trace) =
        dinkelbach_power_allocation(&alloc, &ch, &config, link, &order, &start).unwrap();
    let pc = config.circuit_power_w;
    let ee = |p: f64| link.bandwidth_hz * (1.0 + 1e6 * p).log2() / (p + pc);
    // brute force: dense scan then golden refinement of the bracket
    let grid: usize = 200_000;
    let best_i = (0..=grid)
        .max_by(|&a, &b| {
            ee(0.2 * a as f64 / grid as f64).total_cmp(&ee(0.2 * b as f64 / grid as f64))
        })
        .unwrap();
    let lo = 0.2 * (best_i.saturating_sub(1)) as f64 / grid as f64;
    let hi = 0.2 * ((best_i + 1).min(grid)) as f64 / grid as f64;
    let (_, oracle) = golden_section_max(ee, lo, hi, 1e-15);
    let got = *trace.lambda_sequence.last().unwrap();
    assert!((got - oracle).abs() <= 1e-4 * oracle, "{got} vs {oracle}");
    assert!((ee(p.p[[0, 0]]) - oracle).abs() <= 1e-4 * oracle);
    assert!(trace.converged);
}

fn random_drop(seed: u64, n_users: usize, n_sc: usize) -> (ChannelMatrix, Link) {
    let params = ChannelParams {
        n_subcarriers: n_sc,
        total_bandwidth_hz: 1.5625e5 * n_sc as f64,
        ..Default::default()
    };
    let topo = generate_topology(seed, n_users, 500.0, 2000.0).unwrap();
    let ch = draw_channel_matrix(&topo, &params, seed.wrapping_add(1)).unwrap();
    (
        ch,
        Link {
            noise_w: noise_power_w(&params),
            bandwidth_hz: params.subcarrier_bandwidth_hz(),
        },
    )
}

#[test]
fn pipeline_single_user() {
    let (ch, link) = random_drop(3, 1, 16);
    let out = run_pipeline(&ch, link, &cfg(1e5), 0).unwrap();
    assert_eq!(out.clusters.k, 1);
    assert_eq!(out.allocation.subcarriers_of[0].len(), 16);
    assert!(out.energy.ee_bits_per_joule > 0.0);
}

#[test]
fn pipeline_deterministic() {
    let (ch, link) = random_drop(9, 12, 32);
    let a = run_pipeline(&ch, link, &cfg(3e5), 5).unwrap();
    let b = run_pipeline(&ch, link, &cfg(3e5), 5).unwrap();
    assert_eq!(a.energy, b.energy);
    assert_eq!(a.powers, b.powers);
}

#[test]
fn pipeline_properties_on_random_drops() {
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    for trial in 0..30 {
        let n = rng.random_range(1..=20);
        let n_sc = [8, 16, 32][rng.random_range(0..3)];
        let r_req = [0.0, 1e5, 5e5, 2e6][rng.random_range(0..4)];
        let (ch, link) = random_drop(trial, n, n_sc);
        let config = cfg(r_req);
        let out = run_pipeline(&ch, link, &config, trial).unwrap();
        out.allocation.validate(config.max_group_size).unwrap();
        for w in out.trace.lambda_sequence.windows(2) {
            assert!(w[1] >= w[0] * (1.0 - 1e-9), "trial {trial}: λ fell {w:?}");
        }
        for u in 0..n {
            assert!(out.powers.user_total(u) <= 0.2 + 1e-12);
            if out.trace.outage_users.binary_search(&u).is_err() {
                assert!(
                    out.rates.user_rate[u] >= r_req * (1.0 - 1e-6),
                    "trial {trial} user {u}"
                );
            }
        }
        let eq = equal_power_init(&out.allocation, 0.2);
        let order = &out.decode_order;
        let start_ok = check_feasible(
            &out.allocation,
            &ch,
            &config,
            link,
            order,
            &FeasiblePoint {
                powers: eq.clone(),
                outage: out.trace.outage_users.clone(),
            },
        );
        if start_ok.is_ok() {
            let ee_eq = evaluate_ee(
                &out.allocation,
                &ch,
                &eq,
                link,
                order,
                config.circuit_power_w,
            );
            assert!(out.energy.ee_bits_per_joule >= ee_eq - 1e-9);
        }
    }
}

#[test]
fn baselines() {
    let (ch, link) = random_drop(4, 8, 8);
    let oma = baseline_pipeline(Variant::Oma, &ch, link, &cfg(0.0), 1).unwrap();
    assert!(oma.allocation.users_on.iter().all(|u| u.len() == 1));
    assert!(oma.allocation.subcarriers_of.iter().all(|s| s.len() == 1));

    let a = baseline_pipeline(Variant::RandomClusters, &ch, link, &cfg(0.0), 7).unwrap();
    let b = baseline_pipeline(Variant::RandomClusters, &ch, link, &cfg(0.0), 7).unwrap();
    assert_eq!(a.clusters, b.clusters);
    assert!(a.clusters.sizes().iter().all(|s| (1..=4).contains(s)));

    let km = baseline_pipeline(Variant::Kmeans, &ch, link, &cfg(0.0), 7).unwrap();
    km.allocation.validate(4).unwrap();
}

#[test]
fn kmeans_and_spectral_agree_on_two_blobs() {
    // two planted channel profiles 30 dB apart, tiny per-user jitter
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let n_sc = 8;
    let gains = Array2::from_shape_fn((8, n_sc), |(u, s)| {
        let base = if u < 4 { 1e-10 } else { 1e-13 };
        let shape = if u < 4 {
            1.0 + 0.5 * (s % 2) as f64
        } else {
            1.0 + 0.5 * ((s + 1) % 2) as f64
        };
        base * shape * (1.0 + 0.01 * rng.random::<f64>())
    });
    let ch = ChannelMatrix::from_gains(gains).unwrap();
    let link = Link {
        noise_w: 6.2e-16,
        bandwidth_hz: 1.5625e5,
    };
    let config = AllocationConfig {
        max_group_size: 4,
        ..cfg(0.0)
    };
    let sp = baseline_pipeline(Variant::Spectral, &ch, link, &config, 3).unwrap();
    let km = baseline_pipeline(Variant::Kmeans, &ch, link, &config, 3).unwrap();
    assert_eq!(
        sp.clusters.partition(),
        vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]]
    );
    assert_eq!(sp.clusters.partition(), km.clusters.partition());
}

#[test]
fn oma_with_as_many_users_as_subcarriers() {
    let (ch, _) = random_drop(2, 6, 6);
    let a = oma_allocation(&ch, 6).unwrap();
    assert!(a.users_on.iter().all(|u| u.len() == 1));
    assert!(a.subcarriers_of.iter().all(|s| s.len() == 1));
}

#[test]
fn unknown_config_values_rejected() {
    let bad = AllocationConfig {
        dinkelbach_tol: 0.0,
        ..Default::default()
    };
    assert_eq!(bad.validate().unwrap_err().0, "dinkelbach_tol");
}
