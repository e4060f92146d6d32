//! Property tests over random instances.

use nomafd::baselines::weighted_waterfill;
use nomafd::channel::{
    fairness_weights, generate_channels, generate_scenario, ChannelSet, FairnessWeights, ScenarioConfig,
};
use nomafd::model::{
    cochannel_set, interference_set, mmse_scaling, mse, sinr, weighted_sum_rate, PowerVector, StrongUserMap,
};
use nomafd::montecarlo::trial_seed;
use nomafd::users::UserSet;
use nomafd::wmmse::{solve, solve_observed, SicStrategy, SolverConfig};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn small_config() -> impl Strategy<Value = ScenarioConfig> {
    (1usize..=3, 1usize..=3, 1usize..=4, 0.0f64..30.0, 5.0f64..20.0).prop_map(|(m, n, f, pd, pu)| ScenarioConfig {
        num_uplink: m,
        num_downlink: n,
        num_subcarriers: f,
        p_d_dbm: pd,
        p_u_dbm: pu,
        ..Default::default()
    })
}

fn instance(cfg: &ScenarioConfig, seed: u64) -> (ChannelSet, FairnessWeights) {
    let s = generate_scenario(cfg, seed).unwrap();
    (generate_channels(&s).unwrap(), fairness_weights(&s))
}

/// Strong users and powers filled from `picks` and `levels`, cycled.
fn assignment(h: &ChannelSet, picks: &[usize], levels: &[f64]) -> (StrongUserMap, PowerVector) {
    let u = h.users;
    let nf = h.num_subcarriers;
    let strong = StrongUserMap::new(
        &u,
        (0..nf).map(|f| picks[f % picks.len()] % u.num_uplink).collect(),
        (0..nf)
            .map(|f| u.num_uplink + picks[(f + 1) % picks.len()] % u.num_downlink)
            .collect(),
    )
    .unwrap();
    let mut p = PowerVector::zeros(&u, nf);
    let mut k = 0;
    for i in u.all() {
        for f in 0..nf {
            // negative levels switch the entry off
            let l = levels[k % levels.len()];
            if l >= 0.0 {
                p.set(i, f, 10f64.powf(-l));
            }
            k += 1;
        }
    }
    (strong, p)
}

/// Relabel users: uplink `u -> pu[u]`, downlink index `d -> pd[d]`.
fn relabel(h: &ChannelSet, pu: &[usize], pd: &[usize]) -> ChannelSet {
    let m = h.users.num_uplink;
    let mut out = h.clone();
    for (u, &to) in pu.iter().enumerate() {
        out.direct[to] = h.direct[u].clone();
        for (d, &dto) in pd.iter().enumerate() {
            out.cross[to][dto] = h.cross[u][d].clone();
        }
    }
    for (d, &dto) in pd.iter().enumerate() {
        out.direct[m + dto] = h.direct[m + d].clone();
    }
    out
}

fn map_id(i: usize, m: usize, pu: &[usize], pd: &[usize]) -> usize {
    if i < m {
        pu[i]
    } else {
        m + pd[i - m]
    }
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn interference_and_cochannel_sets_are_dual(
        m in 1usize..=4, n in 1usize..=4, picks in prop::collection::vec(0usize..16, 2..8),
    ) {
        let users = UserSet::new(m, n).unwrap();
        let nf = picks.len();
        let s = StrongUserMap::new(
            &users,
            (0..nf).map(|f| picks[f] % m).collect(),
            (0..nf).map(|f| m + picks[nf - 1 - f] % n).collect(),
        ).unwrap();
        for f in 0..nf {
            for i in users.all() {
                let c = cochannel_set(i, f, &s, &users).unwrap();
                for j in users.all() {
                    let i_in_ij = interference_set(j, f, &s, &users).unwrap().contains(&i);
                    prop_assert_eq!(c.contains(&j), i_in_ij, "i={} j={} f={}", i, j, f);
                }
            }
        }
    }

    #[test]
    fn mse_identity_at_mmse_receiver(
        cfg in small_config(), seed in 0u64..10_000,
        picks in prop::collection::vec(0usize..8, 1..6),
        levels in prop::collection::vec(-1.0f64..8.0, 1..12),
    ) {
        let (h, _) = instance(&cfg, seed);
        let (s, p) = assignment(&h, &picks, &levels);
        for i in h.users.all() {
            for f in 0..h.num_subcarriers {
                let e = mse(i, f, mmse_scaling(i, f, &p, &h, &s), &p, &h, &s);
                prop_assert!((e * (1.0 + sinr(i, f, &p, &h, &s)) - 1.0).abs() <= 1e-12);
                prop_assert!(e > 0.0 && e <= 1.0);
            }
        }
    }

    #[test]
    fn weighted_sum_rate_ignores_user_labels(
        (cfg, pu, pd) in small_config().prop_flat_map(|c| {
            let (m, n) = (c.num_uplink, c.num_downlink);
            (Just(c), permutation(m), permutation(n))
        }),
        seed in 0u64..10_000,
        picks in prop::collection::vec(0usize..8, 1..6),
        levels in prop::collection::vec(-1.0f64..8.0, 1..12),
    ) {
        let (h, alpha) = instance(&cfg, seed);
        let (s, p) = assignment(&h, &picks, &levels);
        let m = cfg.num_uplink;
        let h2 = relabel(&h, &pu, &pd);
        let nf = h.num_subcarriers;
        let s2 = StrongUserMap::new(
            &h.users,
            s.uplink.iter().map(|&i| map_id(i, m, &pu, &pd)).collect(),
            s.downlink.iter().map(|&i| map_id(i, m, &pu, &pd)).collect(),
        ).unwrap();
        let mut p2 = PowerVector::zeros(&h.users, nf);
        let mut a2 = alpha.clone();
        for i in h.users.all() {
            let j = map_id(i, m, &pu, &pd);
            a2.alpha[j] = alpha.alpha[i];
            for f in 0..nf {
                p2.set(j, f, p.get(i, f));
            }
        }
        let a = weighted_sum_rate(&p, &h, &s, &alpha);
        let b = weighted_sum_rate(&p2, &h2, &s2, &a2);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", a, b);
    }

    #[test]
    fn waterfill_is_optimal(
        chans in prop::collection::vec((0.05f64..1.0, -2.0f64..6.0), 1..10),
        budget in 1e-3f64..10.0,
    ) {
        let w: Vec<f64> = chans.iter().map(|c| c.0).collect();
        let c: Vec<f64> = chans.iter().map(|c| 10f64.powf(c.1)).collect();
        let p = weighted_waterfill(&w, &c, budget);
        let spent: f64 = p.iter().sum();
        prop_assert!((spent - budget).abs() <= 1e-9 * budget);
        // one marginal utility on the active channels, no more elsewhere
        let nu = (0..p.len()).filter(|&k| p[k] > 0.0).map(|k| w[k] * c[k] / (1.0 + c[k] * p[k])).fold(0.0, f64::max);
        for k in 0..p.len() {
            prop_assert!(p[k] >= 0.0);
            let marginal = w[k] * c[k] / (1.0 + c[k] * p[k]);
            if p[k] > 0.0 {
                prop_assert!((marginal - nu).abs() <= 1e-9 * nu);
            } else {
                prop_assert!(marginal <= nu * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn scenarios_respect_geometry(m in 1usize..=6, n in 1usize..=6, seed in any::<u64>()) {
        let cfg = ScenarioConfig { num_uplink: m, num_downlink: n, ..Default::default() };
        let s = generate_scenario(&cfg, seed).unwrap();
        prop_assert_eq!(&s, &generate_scenario(&cfg, seed).unwrap());
        let alpha = fairness_weights(&s);
        let users = cfg.users();
        for i in users.all() {
            let d = s.distance(i);
            prop_assert!((cfg.min_distance_m..=cfg.cell_radius_m).contains(&d));
            for j in users.all() {
                if s.distance(i) < s.distance(j) {
                    prop_assert!(alpha.get(i) < alpha.get(j));
                }
            }
        }
        prop_assert_eq!(alpha.alpha.iter().copied().fold(0.0, f64::max), 1.0);
        let h = generate_channels(&s).unwrap();
        prop_assert!(h.validate().is_ok());
        prop_assert_eq!(h.digest(), generate_channels(&s).unwrap().digest());
    }

    #[test]
    fn trial_seeds_are_distinct(seed0 in any::<u64>(), values in subsequence(vec![0.0, 1.0, 2.5, 10.0, 14.0, 20.0, -3.0], 1..7)) {
        let mut seen = std::collections::HashSet::new();
        for &v in &values {
            for t in 0..50 {
                prop_assert!(seen.insert(trial_seed(seed0, v, t)));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solutions_are_feasible(cfg in small_config(), seed in 0u64..10_000, strategy in 0usize..3) {
        let (h, alpha) = instance(&cfg, seed);
        let b = cfg.budgets();
        let sc = SolverConfig {
            sic_strategy: [SicStrategy::Repair, SicStrategy::Subgradient, SicStrategy::Ignore][strategy],
            ..Default::default()
        };
        let r = solve(&h, &alpha, &b, &sc, None).unwrap();
        let st = &r.final_state;
        prop_assert!(st.p.is_valid());
        for u in h.users.uplink() {
            prop_assert!(st.p.user_total(u) <= b.uplink_w * (1.0 + 1e-9));
        }
        prop_assert!(st.p.downlink_total(&h.users) <= b.downlink_w * (1.0 + 1e-9));
        prop_assert!(r.objective() >= r.initial_objective - 1e-9);
        if sc.sic_strategy != SicStrategy::Ignore {
            let tol = 1e-9 * h.noise() * h.max_gain_sq();
            prop_assert!(r.sic_residuals.iter().all(|x| x.gamma >= -tol));
        }
    }

    #[test]
    fn bare_iteration_ignores_alpha_scale(cfg in small_config(), seed in 0u64..10_000, c in 0.01f64..100.0) {
        let (h, alpha) = instance(&cfg, seed);
        let b = cfg.budgets();
        let sc = SolverConfig {
            sic_strategy: SicStrategy::Ignore,
            extrapolation: false,
            biased_starts: false,
            max_iterations: 100,
            ..Default::default()
        };
        let mut a = Vec::new();
        let mut z = Vec::new();
        let r1 = solve_observed(&h, &alpha, &b, &sc, None, &mut |s| a.push(s.p.clone())).unwrap();
        let r2 = solve_observed(&h, &alpha.scaled(c), &b, &sc, None, &mut |s| z.push(s.p.clone())).unwrap();
        prop_assert!((r2.objective() - c * r1.objective()).abs() <= 1e-6 * c * r1.objective());
        let floor = 1e-9 * b.downlink_w;
        for (x, y) in a.iter().zip(&z) {
            for (u, v) in x.p.iter().flatten().zip(y.p.iter().flatten()) {
                prop_assert!((u - v).abs() <= 1e-6 * u.max(*v).max(floor));
            }
        }
    }

    #[test]
    fn bare_iteration_ignores_user_labels(cfg in small_config(), seed in 0u64..10_000) {
        let (h, alpha) = instance(&cfg, seed);
        let m = cfg.num_uplink;
        let pu: Vec<usize> = (0..m).rev().collect();
        let pd: Vec<usize> = (0..cfg.num_downlink).rev().collect();
        let h2 = relabel(&h, &pu, &pd);
        let mut a2 = alpha.clone();
        for i in h.users.all() {
            a2.alpha[map_id(i, m, &pu, &pd)] = alpha.alpha[i];
        }
        let sc = SolverConfig {
            sic_strategy: SicStrategy::Ignore,
            extrapolation: false,
            biased_starts: false,
            max_iterations: 100,
            ..Default::default()
        };
        let b = cfg.budgets();
        let r1 = solve(&h, &alpha, &b, &sc, None).unwrap();
        let r2 = solve(&h2, &a2, &b, &sc, None).unwrap();
        prop_assert!((r1.objective() - r2.objective()).abs() <= 1e-6 * r1.objective());
    }
}
