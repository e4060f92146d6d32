//! Single-cell scenario drops and channel realizations.
//!
//! A [`Scenario`] places `M` uplink and `N` downlink users uniformly over the
//! annulus `min_distance_m <= d <= cell_radius_m` around a full-duplex base
//! station. [`generate_channels`] then draws per-subcarrier flat gains:
//!
//! * user <-> BS direct links: `d^-xi * 10^(S/10)` large-scale attenuation with
//!   log-normal shadowing `S ~ N(0, sigma_SH^2)` shared by all subcarriers of the
//!   link, times a unit-variance circular Gaussian fading coefficient,
//! * uplink -> downlink cross links: same model over the user-to-user distance,
//! * BS self-interference: unit-variance fading per subcarrier, attenuated by the
//!   cancellation factor (no shadowing, no path loss).
//!
//! Distances below 1 m are clamped to the 1 m reference distance.
//!
//! Everything is a pure function of `(config, seed)`: positions use stream 0
//! of a ChaCha8 generator seeded with the scenario seed, channels use stream 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, dbm_to_watt};
use crate::users::{UserId, UserSet};

const POSITION_STREAM: u64 = 0;
const CHANNEL_STREAM: u64 = 1;
const REFERENCE_DISTANCE_M: f64 = 1.0;

/// Physical parameters of a cell drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
    pub num_uplink: usize,
    pub num_downlink: usize,
    pub num_subcarriers: usize,
    pub path_loss_exponent: f64,
    pub shadowing_sigma_db: f64,
    pub si_cancellation_db: f64,
    /// Noise power per subcarrier.
    pub noise_power_dbm: f64,
    /// Per-uplink-user budget.
    pub p_u_dbm: f64,
    /// Total downlink budget.
    pub p_d_dbm: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            cell_radius_m: 100.0,
            min_distance_m: 30.0,
            num_uplink: 3,
            num_downlink: 3,
            num_subcarriers: 6,
            path_loss_exponent: 4.0,
            shadowing_sigma_db: 8.0,
            si_cancellation_db: 110.0,
            noise_power_dbm: -100.0,
            p_u_dbm: 14.0,
            p_d_dbm: 20.0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        UserSet::new(self.num_uplink, self.num_downlink)?;
        if self.num_subcarriers == 0 {
            return bad("number of subcarriers must be at least 1".into());
        }
        let finite = [
            ("cell_radius_m", self.cell_radius_m),
            ("min_distance_m", self.min_distance_m),
            ("path_loss_exponent", self.path_loss_exponent),
            ("shadowing_sigma_db", self.shadowing_sigma_db),
            ("si_cancellation_db", self.si_cancellation_db),
            ("noise_power_dbm", self.noise_power_dbm),
            ("p_u_dbm", self.p_u_dbm),
            ("p_d_dbm", self.p_d_dbm),
        ];
        if let Some((name, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return bad(format!("{name} must be finite, got {v}"));
        }
        if self.min_distance_m < 0.0 {
            return bad(format!("min_distance_m must be >= 0, got {}", self.min_distance_m));
        }
        if self.min_distance_m >= self.cell_radius_m {
            return bad(format!(
                "min_distance_m ({}) must be smaller than cell_radius_m ({})",
                self.min_distance_m, self.cell_radius_m
            ));
        }
        if self.path_loss_exponent <= 0.0 {
            return bad(format!(
                "path_loss_exponent must be > 0, got {}",
                self.path_loss_exponent
            ));
        }
        if self.shadowing_sigma_db < 0.0 {
            return bad(format!(
                "shadowing_sigma_db must be >= 0, got {}",
                self.shadowing_sigma_db
            ));
        }
        Ok(())
    }

    pub fn users(&self) -> UserSet {
        UserSet {
            num_uplink: self.num_uplink,
            num_downlink: self.num_downlink,
        }
    }

    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watt(self.noise_power_dbm)
    }

    pub fn budgets(&self) -> Budgets {
        Budgets {
            uplink_w: dbm_to_watt(self.p_u_dbm),
            downlink_w: dbm_to_watt(self.p_d_dbm),
        }
    }
}

/// Power budgets in watts: `uplink_w` per uplink user, `downlink_w` shared by the BS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    pub uplink_w: f64,
    pub downlink_w: f64,
}

impl Budgets {
    pub fn validate(&self) -> Result<()> {
        if !(self.uplink_w > 0.0 && self.uplink_w.is_finite())
            || !(self.downlink_w > 0.0 && self.downlink_w.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "budgets must be positive and finite, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// 2-D coordinate in meters, BS at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One cell drop: parameters, user sets and user positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub users: UserSet,
    /// Indexed by user id.
    pub positions: Vec<Position>,
    pub rng_seed: u64,
}

impl Scenario {
    pub fn num_subcarriers(&self) -> usize {
        self.config.num_subcarriers
    }

    /// User to BS distance.
    pub fn distance(&self, id: UserId) -> f64 {
        self.positions[id].norm()
    }
}

/// Drop users uniformly (by area) over the annulus.
pub fn generate_scenario(config: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    config.validate()?;
    let users = config.users();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(POSITION_STREAM);

    let r2_min = config.min_distance_m * config.min_distance_m;
    let r2_max = config.cell_radius_m * config.cell_radius_m;
    let positions = users
        .all()
        .map(|_| {
            let r = rng.random_range(r2_min..=r2_max).sqrt();
            let theta = rng.random_range(0.0..2.0 * PI);
            Position {
                x: r * theta.cos(),
                y: r * theta.sin(),
            }
        })
        .collect();

    Ok(Scenario {
        config: config.clone(),
        users,
        positions,
        rng_seed: seed,
    })
}

/// Large-scale power attenuation `d^-xi * 10^(shadow_db/10)`, with `d` clamped at 1 m.
pub fn large_scale_gain(distance_m: f64, path_loss_exponent: f64, shadow_db: f64) -> f64 {
    distance_m.max(REFERENCE_DISTANCE_M).powf(-path_loss_exponent) * db_to_linear(shadow_db)
}

/// One `CN(0, 1)` draw.
pub fn draw_fading<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Complex gains of every link needed by the interference model.
///
/// The per-pair gain `h_{j,i}(f)` (transmitter `j`, receiver `i`) is resolved by
/// [`ChannelSet::gain`]:
///
/// | transmitter | receiver | gain |
/// |-------------|----------|------|
/// | `i`         | `i`      | direct link of `i` |
/// | uplink `j`  | uplink `i` | direct link of `j` (both reach the BS receiver) |
/// | downlink `j`| downlink `i` | direct link of `i` (both leave the BS transmitter) |
/// | downlink `j`| uplink `i` | residual self-interference of the subcarrier |
/// | uplink `j`  | downlink `i` | cross link `j -> i` |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSet {
    pub users: UserSet,
    pub num_subcarriers: usize,
    pub noise_power_w: f64,
    /// `[user][f]`
    pub direct: Vec<Vec<Complex64>>,
    /// `[uplink user][downlink index][f]`
    pub cross: Vec<Vec<Vec<Complex64>>>,
    /// Self-interference before cancellation, `[f]`.
    pub si_raw: Vec<Complex64>,
    pub si_cancellation_db: f64,
    /// Residual self-interference after cancellation, `[f]`.
    pub self_interference: Vec<Complex64>,
}

impl ChannelSet {
    /// All-zero gains; fill in with the setters for hand-built instances.
    pub fn zeros(users: UserSet, num_subcarriers: usize, noise_power_w: f64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            users,
            num_subcarriers,
            noise_power_w,
            direct: vec![vec![z; num_subcarriers]; users.len()],
            cross: vec![vec![vec![z; num_subcarriers]; users.num_downlink]; users.num_uplink],
            si_raw: vec![z; num_subcarriers],
            si_cancellation_db: 0.0,
            self_interference: vec![z; num_subcarriers],
        }
    }

    pub fn set_direct(&mut self, user: UserId, f: usize, h: Complex64) -> &mut Self {
        self.direct[user][f] = h;
        self
    }

    pub fn set_cross(&mut self, ul: UserId, dl: UserId, f: usize, h: Complex64) -> &mut Self {
        let d = self.users.downlink_index(dl);
        self.cross[ul][d][f] = h;
        self
    }

    /// Sets the residual self-interference; the raw value is derived from the
    /// current cancellation factor.
    pub fn set_self_interference(&mut self, f: usize, h: Complex64) -> &mut Self {
        self.self_interference[f] = h;
        self.si_raw[f] = h * db_to_linear(self.si_cancellation_db).sqrt();
        self
    }

    pub fn noise(&self) -> f64 {
        self.noise_power_w
    }

    /// `h_{tx,rx}(f)`; see the type-level table.
    pub fn gain(&self, tx: UserId, rx: UserId, f: usize) -> Complex64 {
        let u = &self.users;
        match (u.is_uplink(tx), u.is_uplink(rx)) {
            _ if tx == rx => self.direct[tx][f],
            (true, true) => self.direct[tx][f],
            (false, false) => self.direct[rx][f],
            (false, true) => self.self_interference[f],
            (true, false) => self.cross[tx][u.downlink_index(rx)][f],
        }
    }

    /// `|h_{tx,rx}(f)|^2`
    pub fn gain_sq(&self, tx: UserId, rx: UserId, f: usize) -> f64 {
        self.gain(tx, rx, f).norm_sqr()
    }

    /// `|h_{i,i}(f)|^2`
    pub fn direct_sq(&self, user: UserId, f: usize) -> f64 {
        self.direct[user][f].norm_sqr()
    }

    /// Largest squared magnitude over all stored gains.
    pub fn max_gain_sq(&self) -> f64 {
        self.direct
            .iter()
            .flatten()
            .chain(self.cross.iter().flatten().flatten())
            .chain(self.self_interference.iter())
            .map(|h| h.norm_sqr())
            .fold(0.0, f64::max)
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("channel set serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.num_subcarriers;
        let shape_ok = f > 0
            && self.direct.len() == self.users.len()
            && self.direct.iter().all(|v| v.len() == f)
            && self.cross.len() == self.users.num_uplink
            && self
                .cross
                .iter()
                .all(|row| row.len() == self.users.num_downlink && row.iter().all(|v| v.len() == f))
            && self.self_interference.len() == f
            && self.si_raw.len() == f;
        if !shape_ok {
            return Err(Error::InvalidScenario("channel set dimensions are inconsistent".into()));
        }
        if !(self.noise_power_w > 0.0 && self.noise_power_w.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "noise power must be positive, got {}",
                self.noise_power_w
            )));
        }
        let all_finite = self
            .direct
            .iter()
            .flatten()
            .chain(self.cross.iter().flatten().flatten())
            .chain(self.self_interference.iter())
            .all(|h| h.norm_sqr().is_finite());
        if !all_finite {
            return Err(Error::InvalidScenario("non-finite channel gain".into()));
        }
        Ok(())
    }
}

/// Draw every link of the scenario.
pub fn generate_channels(s: &Scenario) -> Result<ChannelSet> {
    s.config.validate()?;
    let cfg = &s.config;
    let users = s.users;
    let nf = cfg.num_subcarriers;
    let mut rng = ChaCha8Rng::seed_from_u64(s.rng_seed);
    rng.set_stream(CHANNEL_STREAM);
    let shadow = Normal::new(0.0, cfg.shadowing_sigma_db).expect("sigma validated");

    let link = |distance: f64, rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        let s_db: f64 = shadow.sample(rng);
        let amp = large_scale_gain(distance, cfg.path_loss_exponent, s_db).sqrt();
        (0..nf).map(|_| draw_fading(rng) * amp).collect()
    };

    let direct: Vec<Vec<Complex64>> = users.all().map(|i| link(s.distance(i), &mut rng)).collect();
    let cross: Vec<Vec<Vec<Complex64>>> = users
        .uplink()
        .map(|u| {
            users
                .downlink()
                .map(|d| link(s.positions[u].distance_to(&s.positions[d]), &mut rng))
                .collect()
        })
        .collect();
    let si_raw: Vec<Complex64> = (0..nf).map(|_| draw_fading(&mut rng)).collect();
    let si_amp = db_to_linear(-cfg.si_cancellation_db).sqrt();
    let self_interference = si_raw.iter().map(|h| h * si_amp).collect();

    Ok(ChannelSet {
        users,
        num_subcarriers: nf,
        noise_power_w: cfg.noise_power_w(),
        direct,
        cross,
        si_raw,
        si_cancellation_db: cfg.si_cancellation_db,
        self_interference,
    })
}

/// Fairness weights `alpha_i = (d_i / max_j d_j)^2`, indexed by user id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessWeights {
    pub alpha: Vec<f64>,
}

impl FairnessWeights {
    /// Every user weighted 1.
    pub fn uniform(users: UserSet) -> Self {
        Self {
            alpha: vec![1.0; users.len()],
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            alpha: self.alpha.iter().map(|a| a * c).collect(),
        }
    }

    pub fn get(&self, id: UserId) -> f64 {
        self.alpha[id]
    }
}

pub fn fairness_weights(s: &Scenario) -> FairnessWeights {
    let d: Vec<f64> = s.users.all().map(|i| s.distance(i)).collect();
    let d_max = d.iter().copied().fold(0.0, f64::max);
    FairnessWeights {
        alpha: d.iter().map(|di| (di / d_max).powi(2)).collect(),
    }
}
