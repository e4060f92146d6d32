//! Post-SIC signal model: interference sets, SINR, rates, MSE and the
//! downlink SIC feasibility function.
//!
//! On every subcarrier one uplink and one downlink user are *strong*. The BS
//! decodes and cancels the strong uplink stream first, so weak uplink users do
//! not see it; the strong downlink user cancels every other downlink stream and
//! only suffers uplink interference.
//!
//! Rates are in nats. Conversion to bits happens at reporting boundaries.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelSet, FairnessWeights};
use crate::error::{Error, Result};
use crate::users::{Direction, UserId, UserSet};

/// Powers at or below this are treated as switched off.
pub const EPSILON_ACTIVE: f64 = 1e-10;

/// Strong uplink and downlink user of every subcarrier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongUserMap {
    /// `[f]`, uplink ids.
    pub uplink: Vec<UserId>,
    /// `[f]`, downlink ids.
    pub downlink: Vec<UserId>,
}

impl StrongUserMap {
    pub fn new(users: &UserSet, uplink: Vec<UserId>, downlink: Vec<UserId>) -> Result<Self> {
        if uplink.len() != downlink.len() {
            return Err(Error::InvalidConfig("strong user map lengths differ".into()));
        }
        if let Some(&bad) = uplink.iter().find(|&&u| !users.is_uplink(u)) {
            return Err(Error::UnknownUser(bad));
        }
        if let Some(&bad) = downlink.iter().find(|&&d| !users.is_downlink(d)) {
            return Err(Error::UnknownUser(bad));
        }
        Ok(Self { uplink, downlink })
    }

    pub fn num_subcarriers(&self) -> usize {
        self.uplink.len()
    }

    pub fn strong(&self, dir: Direction, f: usize) -> UserId {
        match dir {
            Direction::Uplink => self.uplink[f],
            Direction::Downlink => self.downlink[f],
        }
    }

    pub fn is_strong(&self, users: &UserSet, i: UserId, f: usize) -> bool {
        if users.is_uplink(i) {
            self.uplink[f] == i
        } else {
            self.downlink[f] == i
        }
    }
}

/// Transmit powers in watts, one entry per (user, subcarrier).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerVector {
    pub num_subcarriers: usize,
    /// `[user][f]`
    pub p: Vec<Vec<f64>>,
}

impl PowerVector {
    pub fn zeros(users: &UserSet, num_subcarriers: usize) -> Self {
        Self {
            num_subcarriers,
            p: vec![vec![0.0; num_subcarriers]; users.len()],
        }
    }

    /// `P_U / F` on every uplink entry and `P_D / (N F)` on every downlink entry.
    pub fn uniform(users: &UserSet, num_subcarriers: usize, uplink_w: f64, downlink_w: f64) -> Self {
        let f = num_subcarriers as f64;
        let mut pv = Self::zeros(users, num_subcarriers);
        for i in users.uplink() {
            pv.p[i].fill(uplink_w / f);
        }
        for i in users.downlink() {
            pv.p[i].fill(downlink_w / (users.num_downlink as f64 * f));
        }
        pv
    }

    #[inline]
    pub fn get(&self, user: UserId, f: usize) -> f64 {
        self.p[user][f]
    }

    #[inline]
    pub fn set(&mut self, user: UserId, f: usize, value: f64) {
        self.p[user][f] = value;
    }

    pub fn user_total(&self, user: UserId) -> f64 {
        self.p[user].iter().sum()
    }

    pub fn downlink_total(&self, users: &UserSet) -> f64 {
        users.downlink().map(|i| self.user_total(i)).sum()
    }

    pub fn is_active(&self, user: UserId, f: usize) -> bool {
        self.p[user][f] > EPSILON_ACTIVE
    }

    pub fn is_valid(&self) -> bool {
        self.p.iter().flatten().all(|v| *v >= 0.0 && v.is_finite())
    }

    pub fn max(&self) -> f64 {
        self.p.iter().flatten().copied().fold(0.0, f64::max)
    }
}

/// Whether `j` interferes with `i` on `f` after SIC, i.e. `j ∈ I(i, f)`.
#[inline]
pub fn is_interferer(j: UserId, i: UserId, f: usize, s: &StrongUserMap, users: &UserSet) -> bool {
    if j == i {
        return false;
    }
    if users.is_uplink(i) {
        s.uplink[f] == i || j != s.uplink[f]
    } else if s.downlink[f] == i {
        users.is_uplink(j)
    } else {
        true
    }
}

fn check_user(i: UserId, users: &UserSet) -> Result<()> {
    if users.contains(i) {
        Ok(())
    } else {
        Err(Error::UnknownUser(i))
    }
}

/// `I(i, f)`: users whose signal still interferes with `i` after SIC.
pub fn interference_set(i: UserId, f: usize, s: &StrongUserMap, users: &UserSet) -> Result<Vec<UserId>> {
    check_user(i, users)?;
    Ok(users.all().filter(|&j| is_interferer(j, i, f, s, users)).collect())
}

/// `C(i, f)`: users that receive interference from `i`.
pub fn cochannel_set(i: UserId, f: usize, s: &StrongUserMap, users: &UserSet) -> Result<Vec<UserId>> {
    check_user(i, users)?;
    let set = if users.is_uplink(i) {
        if s.uplink[f] == i {
            users.downlink().collect()
        } else {
            users.all().filter(|&t| t != i).collect()
        }
    } else if s.downlink[f] == i {
        users.all().filter(|&t| t != i).collect()
    } else {
        let strong = s.downlink[f];
        users.all().filter(|&t| t != i && t != strong).collect()
    };
    Ok(set)
}

/// `Σ_{j∈I(i,f)} |h_{j,i}|² P_{j,f}`
pub fn interference_power(i: UserId, f: usize, p: &PowerVector, h: &ChannelSet, s: &StrongUserMap) -> f64 {
    let users = &h.users;
    users
        .all()
        .filter(|&j| is_interferer(j, i, f, s, users))
        .map(|j| h.gain_sq(j, i, f) * p.get(j, f))
        .sum()
}

/// SINR of user `i` on subcarrier `f`.
pub fn sinr(i: UserId, f: usize, p: &PowerVector, h: &ChannelSet, s: &StrongUserMap) -> f64 {
    let pi = p.get(i, f);
    if pi == 0.0 {
        return 0.0;
    }
    h.direct_sq(i, f) * pi / (interference_power(i, f, p, h, s) + h.noise())
}

/// `ln(1 + γ)`
pub fn rate(gamma: f64) -> f64 {
    gamma.ln_1p()
}

/// `Σ_f Σ_i α_i R_{i,f}` in nats.
pub fn weighted_sum_rate(p: &PowerVector, h: &ChannelSet, s: &StrongUserMap, alpha: &FairnessWeights) -> f64 {
    (0..h.num_subcarriers)
        .map(|f| {
            h.users
                .all()
                .map(|i| alpha.get(i) * rate(sinr(i, f, p, h, s)))
                .sum::<f64>()
        })
        .sum()
}

/// Per-user rate summed over subcarriers, in nats.
pub fn user_rates(p: &PowerVector, h: &ChannelSet, s: &StrongUserMap) -> Vec<f64> {
    h.users
        .all()
        .map(|i| (0..h.num_subcarriers).map(|f| rate(sinr(i, f, p, h, s))).sum())
        .collect()
}

/// SIC feasibility `Γ_{k,i}(f)` for weak downlink user `k` and strong downlink user `i`.
///
/// Nonnegative when `i` can decode and cancel `k`'s stream. Depends on uplink
/// powers only.
pub fn gamma_sic(k: UserId, i: UserId, f: usize, p: &PowerVector, h: &ChannelSet) -> Result<f64> {
    let users = &h.users;
    if k == i || !users.is_downlink(k) || !users.is_downlink(i) {
        return Err(Error::InvalidSicPair(k, i));
    }
    let hii = h.direct_sq(i, f);
    let hkk = h.direct_sq(k, f);
    let uplink: f64 = users
        .uplink()
        .map(|j| (hii * h.gain_sq(j, k, f) - hkk * h.gain_sq(j, i, f)) * p.get(j, f))
        .sum();
    Ok(uplink + h.noise() * (hii - hkk))
}

/// `∂Γ_{k,i}(f) / ∂P_{j,f}` for uplink `j`.
pub fn gamma_sic_slope(k: UserId, i: UserId, j: UserId, f: usize, h: &ChannelSet) -> f64 {
    h.direct_sq(i, f) * h.gain_sq(j, k, f) - h.direct_sq(k, f) * h.gain_sq(j, i, f)
}

/// SINR of weak downlink user `k`'s stream as seen by the strong downlink receiver `i`.
pub fn cross_sinr(k: UserId, i: UserId, f: usize, p: &PowerVector, h: &ChannelSet) -> f64 {
    let users = &h.users;
    let pk = p.get(k, f);
    if pk == 0.0 {
        return 0.0;
    }
    let hii = h.direct_sq(i, f);
    let downlink: f64 = users.downlink().filter(|&d| d != k).map(|d| p.get(d, f)).sum();
    let uplink: f64 = users.uplink().map(|j| h.gain_sq(j, i, f) * p.get(j, f)).sum();
    hii * pk / (hii * downlink + uplink + h.noise())
}

/// MSE of the scaled estimate `g y_{i,f}` of the unit-power symbol of `i`.
///
/// Evaluated in completed-square form
/// `e = D |g - conj(a)/D|² + B/D` with `a = h_ii √P`, `B = interference + σ²`,
/// `D = |a|² + B`, which equals `|1 - g a|² + |g|² B` without the cancellation
/// of the direct form at high SINR.
pub fn mse(i: UserId, f: usize, g: Complex64, p: &PowerVector, h: &ChannelSet, s: &StrongUserMap) -> f64 {
    let a = h.direct[i][f] * p.get(i, f).sqrt();
    let b = interference_power(i, f, p, h, s) + h.noise();
    let d = a.norm_sqr() + b;
    d * (g - a.conj() / d).norm_sqr() + b / d
}

/// MMSE receiver scaling `g* = conj(h_ii) √P / (|h_ii|² P + interference + σ²)`.
pub fn mmse_scaling(i: UserId, f: usize, p: &PowerVector, h: &ChannelSet, s: &StrongUserMap) -> Complex64 {
    let pi = p.get(i, f);
    if pi == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let a = h.direct[i][f] * pi.sqrt();
    let d = a.norm_sqr() + interference_power(i, f, p, h, s) + h.noise();
    a.conj() / d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channels, generate_scenario, ScenarioConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_instance(m: usize, n: usize, nf: usize, seed: u64) -> (ChannelSet, PowerVector, StrongUserMap) {
        let cfg = ScenarioConfig {
            num_uplink: m,
            num_downlink: n,
            num_subcarriers: nf,
            ..Default::default()
        };
        let sc = generate_scenario(&cfg, seed).unwrap();
        let h = generate_channels(&sc).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let mut p = PowerVector::zeros(&sc.users, nf);
        for i in sc.users.all() {
            for f in 0..nf {
                p.set(i, f, rng.random_range(0.0..0.05));
            }
        }
        let s = StrongUserMap {
            uplink: (0..nf).map(|_| rng.random_range(0..m)).collect(),
            downlink: (0..nf).map(|_| m + rng.random_range(0..n)).collect(),
        };
        (h, p, s)
    }

    fn users(m: usize, n: usize) -> UserSet {
        UserSet::new(m, n).unwrap()
    }

    #[test]
    fn interference_sets_follow_the_four_cases() {
        let u = users(1, 1);
        let s = StrongUserMap {
            uplink: vec![0],
            downlink: vec![1],
        };
        assert_eq!(interference_set(0, 0, &s, &u).unwrap(), vec![1]);

        // M=2, N=1, strong uplink 0, weak uplink 1
        let u = users(2, 1);
        let s = StrongUserMap {
            uplink: vec![0],
            downlink: vec![2],
        };
        assert_eq!(interference_set(1, 0, &s, &u).unwrap(), vec![2]);
        assert_eq!(interference_set(0, 0, &s, &u).unwrap(), vec![1, 2]);
        assert_eq!(interference_set(2, 0, &s, &u).unwrap(), vec![0, 1]);

        // M=N=2, weak downlink user sees everyone else
        let u = users(2, 2);
        let s = StrongUserMap {
            uplink: vec![0],
            downlink: vec![2],
        };
        assert_eq!(interference_set(3, 0, &s, &u).unwrap(), vec![0, 1, 2]);
        assert!(interference_set(9, 0, &s, &u).is_err());
    }

    #[test]
    fn cochannel_sets() {
        let u = users(1, 1);
        let s = StrongUserMap {
            uplink: vec![0],
            downlink: vec![1],
        };
        assert_eq!(cochannel_set(0, 0, &s, &u).unwrap(), vec![1]);

        let u = users(2, 2);
        let s = StrongUserMap {
            uplink: vec![1],
            downlink: vec![2],
        };
        assert_eq!(cochannel_set(2, 0, &s, &u).unwrap(), vec![0, 1, 3]);
        assert_eq!(cochannel_set(3, 0, &s, &u).unwrap(), vec![0, 1]);
        assert!(cochannel_set(4, 0, &s, &u).is_err());
    }

    #[test]
    fn cochannel_is_dual_of_interference() {
        for m in 1..=3 {
            for n in 1..=3 {
                let u = users(m, n);
                for su in 0..m {
                    for sd in m..m + n {
                        let s = StrongUserMap {
                            uplink: vec![su],
                            downlink: vec![sd],
                        };
                        for i in u.all() {
                            let ci = cochannel_set(i, 0, &s, &u).unwrap();
                            for j in u.all() {
                                let ij = interference_set(j, 0, &s, &u).unwrap();
                                assert_eq!(ci.contains(&j), ij.contains(&i), "m={m} n={n} i={i} j={j}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn single_link_sinr_and_rate() {
        let u = users(1, 1);
        let noise = 1e-13;
        let mut h = ChannelSet::zeros(u, 1, noise);
        h.set_direct(0, 0, c(1.0)).set_direct(1, 0, c(1.0));
        let s = StrongUserMap {
            uplink: vec![0],
            downlink: vec![1],
        };
        let mut p = PowerVector::zeros(&u, 1);
        p.set(0, 0, noise);
        let g = sinr(0, 0, &p, &h, &s);
        assert!((g - 1.0).abs() < 1e-15);
        assert!((rate(g) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(sinr(1, 0, &p, &h, &s), 0.0);
    }

    #[test]
    fn rate_values() {
        assert_eq!(rate(0.0), 0.0);
        assert!((rate(std::f64::consts::E - 1.0) - 1.0).abs() < 1e-15);
        assert!(rate(2.0) > rate(1.0));
    }

    #[test]
    fn sinr_matches_term_by_term() {
        let (h, p, s) = random_instance(2, 1, 3, 4);
        for f in 0..3 {
            for i in 0..3 {
                let set = interference_set(i, f, &s, &h.users).unwrap();
                let mut denom = h.noise();
                for j in set {
                    let hj = h.gain(j, i, f);
                    denom += (hj.re * hj.re + hj.im * hj.im) * p.p[j][f];
                }
                let hi = h.gain(i, i, f);
                let expect = (hi.re * hi.re + hi.im * hi.im) * p.p[i][f] / denom;
                assert!((sinr(i, f, &p, &h, &s) / expect - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn weighted_sum_rate_cases() {
        let (h, p, s) = random_instance(3, 3, 6, 9);
        let alpha = FairnessWeights {
            alpha: vec![0.3, 1.0, 0.5, 0.7, 0.2, 0.9],
        };
        let zero = PowerVector::zeros(&h.users, 6);
        assert_eq!(weighted_sum_rate(&zero, &h, &s, &alpha), 0.0);
        let mut expect = 0.0;
        for f in 0..6 {
            for i in 0..6 {
                expect += alpha.alpha[i] * rate(sinr(i, f, &p, &h, &s));
            }
        }
        assert!((weighted_sum_rate(&p, &h, &s, &alpha) - expect).abs() < 1e-12 * expect);

        let u = users(1, 1);
        let mut h1 = ChannelSet::zeros(u, 1, 0.5);
        h1.set_direct(0, 0, c(2.0));
        let mut p1 = PowerVector::zeros(&u, 1);
        p1.set(0, 0, 3.0);
        let s1 = StrongUserMap {
            uplink: vec![0],
            downlink: vec![1],
        };
        let a1 = FairnessWeights { alpha: vec![0.4, 1.0] };
        let expect = 0.4 * (1.0f64 + 4.0 * 3.0 / 0.5).ln();
        assert!((weighted_sum_rate(&p1, &h1, &s1, &a1) - expect).abs() < 1e-14);
    }

    #[test]
    fn gamma_noise_only_and_degenerate() {
        let u = users(1, 2);
        let mut h = ChannelSet::zeros(u, 1, 1e-13);
        h.set_direct(1, 0, c(2.0)).set_direct(2, 0, c(1.0));
        let p = PowerVector::zeros(&u, 1);
        assert!(gamma_sic(2, 1, 0, &p, &h).unwrap() > 0.0);
        assert!(gamma_sic(1, 1, 0, &p, &h).is_err());
        assert!(gamma_sic(0, 1, 0, &p, &h).is_err());

        // identical downlink links and symmetric cross gains
        let mut h = ChannelSet::zeros(u, 1, 1e-13);
        h.set_direct(1, 0, c(0.7)).set_direct(2, 0, c(0.7));
        h.set_cross(0, 1, 0, c(0.3)).set_cross(0, 2, 0, c(0.3));
        let mut p = PowerVector::zeros(&u, 1);
        p.set(0, 0, 0.02);
        assert_eq!(gamma_sic(2, 1, 0, &p, &h).unwrap(), 0.0);
    }

    #[test]
    fn gamma_antisymmetric_and_downlink_power_free() {
        for seed in 0..20 {
            let (h, mut p, _) = random_instance(3, 3, 2, seed);
            for f in 0..2 {
                for k in 3..6 {
                    for i in 3..6 {
                        if k == i {
                            continue;
                        }
                        let a = gamma_sic(k, i, f, &p, &h).unwrap();
                        let b = gamma_sic(i, k, f, &p, &h).unwrap();
                        assert_eq!(a + b, 0.0);
                        let before = a;
                        p.set(4, f, p.get(4, f) * 3.0 + 0.01);
                        assert_eq!(gamma_sic(k, i, f, &p, &h).unwrap(), before);
                    }
                }
            }
        }
    }

    #[test]
    fn gamma_slope_matches_finite_difference() {
        let (h, mut p, _) = random_instance(3, 3, 1, 12);
        let base = gamma_sic(4, 3, 0, &p, &h).unwrap();
        let dp = 1e-3;
        p.set(1, 0, p.get(1, 0) + dp);
        let moved = gamma_sic(4, 3, 0, &p, &h).unwrap();
        let slope = gamma_sic_slope(4, 3, 1, 0, &h);
        assert!(((moved - base) / dp - slope).abs() <= 1e-6 * slope.abs().max(1e-30));
    }

    #[test]
    fn mse_at_zero_and_optimum() {
        let (h, p, s) = random_instance(2, 2, 2, 3);
        for i in 0..4 {
            for f in 0..2 {
                assert!((mse(i, f, Complex64::new(0.0, 0.0), &p, &h, &s) - 1.0).abs() < 1e-12);
                let g = mmse_scaling(i, f, &p, &h, &s);
                let e = mse(i, f, g, &p, &h, &s);
                let gamma = sinr(i, f, &p, &h, &s);
                assert!((e * (1.0 + gamma) - 1.0).abs() < 1e-12);
                assert!(mse(i, f, g * 1.01, &p, &h, &s) > e);
            }
        }
    }

    #[test]
    fn mse_direct_form_agrees() {
        let (h, p, s) = random_instance(2, 2, 2, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..4 {
            for f in 0..2 {
                let g = mmse_scaling(i, f, &p, &h, &s)
                    * Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let a = h.direct[i][f] * p.get(i, f).sqrt();
                let direct = (Complex64::new(1.0, 0.0) - g * a).norm_sqr()
                    + g.norm_sqr() * (interference_power(i, f, &p, &h, &s) + h.noise());
                assert!((mse(i, f, g, &p, &h, &s) - direct).abs() < 1e-9 * direct.max(1.0));
            }
        }
    }

    #[test]
    fn mmse_zero_power_and_unit_snr() {
        let u = users(1, 1);
        let mut h = ChannelSet::zeros(u, 1, 1e-13);
        h.set_direct(0, 0, Complex64::new(0.6, 0.8)).set_direct(1, 0, c(1.0));
        let s = StrongUserMap {
            uplink: vec![0],
            downlink: vec![1],
        };
        let mut p = PowerVector::zeros(&u, 1);
        let g = mmse_scaling(0, 0, &p, &h, &s);
        assert_eq!(g, Complex64::new(0.0, 0.0));
        assert!((mse(0, 0, g, &p, &h, &s) - 1.0).abs() < 1e-15);
        p.set(0, 0, 1e-13);
        let g = mmse_scaling(0, 0, &p, &h, &s);
        assert!((mse(0, 0, g, &p, &h, &s) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn mmse_beats_random_probes() {
        let (h, p, s) = random_instance(3, 3, 1, 21);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..6 {
            let g = mmse_scaling(i, 0, &p, &h, &s);
            let e = mse(i, 0, g, &p, &h, &s);
            let scale = g.norm().max(1.0);
            for _ in 0..100 {
                let probe = g + Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale * 0.5;
                assert!(mse(i, 0, probe, &p, &h, &s) >= e);
            }
        }
    }

    #[test]
    fn strong_map_rejects_wrong_direction() {
        let u = users(2, 2);
        assert!(StrongUserMap::new(&u, vec![2], vec![3]).is_err());
        assert!(StrongUserMap::new(&u, vec![1], vec![1]).is_err());
        assert!(StrongUserMap::new(&u, vec![1], vec![3]).is_ok());
    }
}
