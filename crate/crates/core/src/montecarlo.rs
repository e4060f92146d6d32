//! Seeded Monte Carlo sweeps and per-iteration SINR traces.
//!
//! Every trial draws one scenario and one channel set, and every algorithm in
//! the sweep runs on that same channel set, so comparisons are paired. Trials
//! run on the rayon pool; results are collected in `(value, trial)` order, so
//! the output does not depend on scheduling.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{self, HdSplit};
use crate::channel::{fairness_weights, generate_channels, generate_scenario, ChannelSet, Scenario, ScenarioConfig};
use crate::error::{Error, Result};
use crate::model::{self, PowerVector, StrongUserMap};
use crate::units::nats_to_bits;
use crate::users::UserId;
use crate::wmmse::{self, RunResult, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    /// Downlink budget in dBm.
    PDDbm,
    /// `M = N = value`.
    NumUsers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Wmmse,
    OmaFdGreedy,
    OmaHdWaterfill,
    GridOracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Wmmse,
        Algorithm::OmaFdGreedy,
        Algorithm::OmaHdWaterfill,
        Algorithm::GridOracle,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Wmmse => "wmmse",
            Algorithm::OmaFdGreedy => baselines::OMA_FD_LABEL,
            Algorithm::OmaHdWaterfill => baselines::OMA_HD_LABEL,
            Algorithm::GridOracle => baselines::ORACLE_LABEL,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.label() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub swept_parameter: SweptParameter,
    pub values: Vec<f64>,
    pub trials_per_point: usize,
    pub seed0: u64,
    pub algorithms: Vec<Algorithm>,
    pub scenario: ScenarioConfig,
    pub solver: SolverConfig,
    pub hd_split: HdSplit,
    /// Intervals per dimension for [`Algorithm::GridOracle`].
    pub oracle_grid_points: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            swept_parameter: SweptParameter::PDDbm,
            values: vec![10.0, 14.0, 20.0, 24.0],
            trials_per_point: 200,
            seed0: 0,
            algorithms: vec![Algorithm::Wmmse, Algorithm::OmaFdGreedy, Algorithm::OmaHdWaterfill],
            scenario: ScenarioConfig::default(),
            solver: SolverConfig::default(),
            hd_split: HdSplit::default(),
            oracle_grid_points: 50,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.values.is_empty() {
            return bad("sweep values must not be empty");
        }
        if self.values.iter().any(|v| !v.is_finite()) || self.values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sweep values must be finite and strictly increasing");
        }
        if self.swept_parameter == SweptParameter::NumUsers && self.values.iter().any(|v| *v < 1.0 || v.fract() != 0.0)
        {
            return bad("num_users values must be positive integers");
        }
        if self.trials_per_point == 0 {
            return bad("trials_per_point must be at least 1");
        }
        if self.algorithms.is_empty() {
            return bad("at least one algorithm is required");
        }
        for v in &self.values {
            self.scenario_at(*v).validate()?;
        }
        self.solver.validate()
    }

    /// The base scenario with the swept parameter set to `value`.
    pub fn scenario_at(&self, value: f64) -> ScenarioConfig {
        let mut s = self.scenario.clone();
        match self.swept_parameter {
            SweptParameter::PDDbm => s.p_d_dbm = value,
            SweptParameter::NumUsers => {
                s.num_uplink = value as usize;
                s.num_downlink = value as usize;
            }
        }
        s
    }
}

/// Scenario seed of trial `trial` at sweep value `value`.
pub fn trial_seed(seed0: u64, value: f64, trial: usize) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"nomafd/trial/v1");
    hasher.update(seed0.to_le_bytes());
    hasher.update(value.to_bits().to_le_bytes());
    hasher.update((trial as u64).to_le_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

/// One algorithm on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub algorithm: Algorithm,
    /// Digest of the channel set this algorithm ran on.
    pub channel_digest: String,
    /// Weighted sum rate per subcarrier, bits/s/Hz. `None` on failure.
    pub wsr_bpshz: Option<f64>,
    /// Iterations of the WMMSE loop, for the algorithms that run it.
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub channel_digest: String,
    pub outcomes: Vec<Outcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub sweep_value: f64,
    pub mean_bpshz: f64,
    /// Standard error of the mean; zero for a single trial.
    pub stderr: f64,
    /// Successful trials.
    pub trials: usize,
    pub failures: usize,
    pub median_iterations: Option<f64>,
    pub converged_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Ordered by sweep value, then trial.
    pub trials: Vec<Trial>,
    /// Ordered by sweep value, then by the sweep's algorithm order.
    pub summary: Vec<SummaryRow>,
}

impl SweepResult {
    /// Successful raw values of `algorithm` at `value`, in trial order.
    pub fn raw(&self, algorithm: Algorithm, value: f64) -> Vec<f64> {
        self.trials
            .iter()
            .filter(|t| t.sweep_value == value)
            .flat_map(|t| &t.outcomes)
            .filter(|o| o.algorithm == algorithm)
            .filter_map(|o| o.wsr_bpshz)
            .collect()
    }

    /// Every algorithm of every trial saw that trial's channel set.
    pub fn is_paired(&self) -> bool {
        self.trials
            .iter()
            .all(|t| t.outcomes.iter().all(|o| o.channel_digest == t.channel_digest))
    }
}

/// Mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    })
}

fn run_algorithm(spec: &SweepSpec, algorithm: Algorithm, h: &ChannelSet, scenario: &Scenario) -> Outcome {
    let alpha = fairness_weights(scenario);
    let budgets = scenario.config.budgets();
    let per_carrier = |wsr: f64| nats_to_bits(wsr) / h.num_subcarriers as f64;
    let mut out = Outcome {
        algorithm,
        channel_digest: h.digest(),
        wsr_bpshz: None,
        iterations: None,
        converged: None,
        error: None,
    };
    let from_run = |out: &mut Outcome, run: &RunResult| {
        out.iterations = Some(run.iterations_used);
        out.converged = Some(run.converged);
    };
    let res: Result<f64> = match algorithm {
        Algorithm::Wmmse => wmmse::solve(h, &alpha, &budgets, &spec.solver, None).map(|run| {
            from_run(&mut out, &run);
            run.objective()
        }),
        Algorithm::OmaFdGreedy => baselines::oma_fd_greedy(h, &alpha, &budgets, &spec.solver).map(|(b, run)| {
            from_run(&mut out, &run);
            b.weighted_sum_rate
        }),
        Algorithm::OmaHdWaterfill => {
            Ok(baselines::oma_hd_waterfill(h, &alpha, &budgets, spec.hd_split).weighted_sum_rate)
        }
        Algorithm::GridOracle => {
            baselines::grid_oracle(h, &alpha, &budgets, spec.oracle_grid_points).map(|b| b.weighted_sum_rate)
        }
    };
    match res {
        Ok(v) => out.wsr_bpshz = Some(per_carrier(v)),
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

fn run_trial(spec: &SweepSpec, value: f64, trial: usize) -> Result<Trial> {
    let seed = trial_seed(spec.seed0, value, trial);
    let scenario = generate_scenario(&spec.scenario_at(value), seed)?;
    let h = generate_channels(&scenario)?;
    let outcomes = spec
        .algorithms
        .iter()
        .map(|&a| run_algorithm(spec, a, &h, &scenario))
        .collect();
    Ok(Trial {
        sweep_value: value,
        trial,
        seed,
        channel_digest: h.digest(),
        outcomes,
    })
}

fn summarize(spec: &SweepSpec, trials: &[Trial]) -> Vec<SummaryRow> {
    let mut rows = Vec::new();
    for &value in &spec.values {
        for &algorithm in &spec.algorithms {
            let outcomes: Vec<&Outcome> = trials
                .iter()
                .filter(|t| t.sweep_value == value)
                .flat_map(|t| &t.outcomes)
                .filter(|o| o.algorithm == algorithm)
                .collect();
            let raw: Vec<f64> = outcomes.iter().filter_map(|o| o.wsr_bpshz).collect();
            let (mean_bpshz, stderr) = mean_stderr(&raw);
            let mut iters: Vec<f64> = outcomes.iter().filter_map(|o| o.iterations).map(|i| i as f64).collect();
            let conv: Vec<bool> = outcomes.iter().filter_map(|o| o.converged).collect();
            rows.push(SummaryRow {
                algorithm,
                sweep_value: value,
                mean_bpshz,
                stderr,
                trials: raw.len(),
                failures: outcomes.len() - raw.len(),
                median_iterations: median(&mut iters),
                converged_fraction: (!conv.is_empty())
                    .then(|| conv.iter().filter(|c| **c).count() as f64 / conv.len() as f64),
            });
        }
    }
    rows
}

/// Run every (value, trial) pair. Per-algorithm failures are recorded in the
/// trial and do not stop the sweep; an invalid spec or scenario does.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let tasks: Vec<(f64, usize)> = spec
        .values
        .iter()
        .flat_map(|&v| (0..spec.trials_per_point).map(move |t| (v, t)))
        .collect();
    let trials = tasks
        .par_iter()
        .map(|&(v, t)| run_trial(spec, v, t))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(spec, &trials);
    Ok(SweepResult {
        spec: spec.clone(),
        trials,
        summary,
    })
}

/// One weak downlink user at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakUserSample {
    pub user: UserId,
    /// SINR of the user's stream at its own receiver.
    pub own_sinr: f64,
    /// SINR of the same stream at the strong user's receiver.
    pub cross_sinr: f64,
}

impl WeakUserSample {
    /// The strong user decodes this stream at least as well as its owner.
    pub fn dominated(&self) -> bool {
        self.cross_sinr >= self.own_sinr
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceExperiment {
    pub seed: u64,
    pub subcarrier: usize,
    pub strong_user: UserId,
    /// Active weak downlink users after each iteration, indexed from 0.
    pub iterations: Vec<Vec<WeakUserSample>>,
    pub run: RunResult,
}

fn weak_samples(p: &PowerVector, h: &ChannelSet, s: &StrongUserMap, f: usize, eps: f64) -> Vec<WeakUserSample> {
    let strong = s.downlink[f];
    h.users
        .downlink()
        .filter(|&k| k != strong && p.get(k, f) > eps)
        .map(|k| WeakUserSample {
            user: k,
            own_sinr: model::sinr(k, f, p, h, s),
            cross_sinr: model::cross_sinr(k, strong, f, p, h),
        })
        .collect()
}

/// Solve one scenario and record, on subcarrier `subcarrier`, every active
/// weak downlink user's own SINR and its SINR at the strong user.
pub fn iteration_trace_experiment(
    scenario: &ScenarioConfig,
    seed: u64,
    cfg: &SolverConfig,
    subcarrier: usize,
) -> Result<TraceExperiment> {
    let sc = generate_scenario(scenario, seed)?;
    if subcarrier >= scenario.num_subcarriers {
        return Err(Error::Config(format!(
            "subcarrier {subcarrier} out of range (F = {})",
            scenario.num_subcarriers
        )));
    }
    let h = generate_channels(&sc)?;
    let alpha = fairness_weights(&sc);
    let eps = cfg.epsilon_active;
    let mut iterations = Vec::new();
    let run = wmmse::solve_observed(&h, &alpha, &scenario.budgets(), cfg, None, &mut |st| {
        iterations.push(weak_samples(&st.p, &h, &st.strong, subcarrier, eps));
    })?;
    Ok(TraceExperiment {
        seed,
        subcarrier,
        strong_user: run.final_state.strong.downlink[subcarrier],
        iterations,
        run,
    })
}
