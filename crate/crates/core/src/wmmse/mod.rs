//! Weighted-MMSE power allocation for NOMA full-duplex cells.
//!
//! After strong users are fixed, the solver alternates three closed-form
//! blocks until the weighted sum rate stops improving:
//!
//! 1. receiver scalings `g` ([`update_g`]),
//! 2. MSE weights `w = 1/e` ([`update_w`]),
//! 3. powers with budget multipliers found by bisection ([`update_p`]).
//!
//! Each block exactly minimizes the weighted MSE objective in its variables, so
//! the weighted sum rate is nondecreasing while the SIC multipliers are held
//! fixed. Downlink SIC feasibility is handled between inner runs by
//! [`enforce_sic`] according to [`SicStrategy`].
//!
//! Plain alternation crawls once a few powers are slowly draining away, so by
//! default every sweep also tries three accelerated points (linear and
//! geometric extrapolation of the last step, Anderson mixing of the last few)
//! and keeps the best one only if it beats the plain sweep. Ascent is
//! unaffected. Set [`SolverConfig::extrapolation`] to `false` for the bare
//! iteration.

mod accel;
mod power;
mod select;
mod sic;

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{Budgets, ChannelSet, FairnessWeights};
use crate::error::{Error, Result};
use crate::model::{self, PowerVector, StrongUserMap};
use crate::users::{Direction, UserId, UserSet};
use accel::Anderson;

pub use power::{update_p, PowerUpdate, DENOMINATOR_FLOOR};
pub use select::{max_gain_map, max_gain_user, select_strong_users};
pub use sic::{enforce_sic, sic_residuals, SicResidual};

/// How the conditional downlink SIC constraint is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SicStrategy {
    /// Dual subgradient on the SIC multipliers between inner runs, then repair
    /// for anything still violated.
    Subgradient,
    /// Switch off violating weak downlink users and re-run.
    Repair,
    /// Leave the constraint out.
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    MaxGain,
    OmaWmmse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitStrategy {
    /// `P_U/F` per uplink entry, `P_D/(N F)` per downlink entry.
    Uniform,
    /// Random feasible powers using every budget in full.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub objective_rel_tol: f64,
    /// Relative budget residual accepted from the multiplier bisection.
    pub bisection_tol: f64,
    pub bisection_max_steps: usize,
    pub sic_strategy: SicStrategy,
    pub sic_subgradient_step0: f64,
    pub sic_outer_rounds: usize,
    pub epsilon_active: f64,
    pub selector: Selector,
    pub init: InitStrategy,
    /// Try accelerated points after each sweep; accepted only when they
    /// raise the weighted sum rate.
    pub extrapolation: bool,
    /// Also run from the initial powers with the downlink, then the uplink,
    /// cut to [`BIASED_START_SCALE`] of their values, and keep the best run.
    pub biased_starts: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            objective_rel_tol: 1e-6,
            bisection_tol: 1e-10,
            bisection_max_steps: 100,
            sic_strategy: SicStrategy::Repair,
            sic_subgradient_step0: 1e-3,
            sic_outer_rounds: 20,
            epsilon_active: model::EPSILON_ACTIVE,
            selector: Selector::MaxGain,
            init: InitStrategy::Uniform,
            extrapolation: true,
            biased_starts: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("objective_rel_tol", self.objective_rel_tol),
            ("bisection_tol", self.bisection_tol),
            ("sic_subgradient_step0", self.sic_subgradient_step0),
            ("epsilon_active", self.epsilon_active),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
        }
        if self.max_iterations == 0 || self.bisection_max_steps == 0 || self.sic_outer_rounds == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations, bisection_max_steps and sic_outer_rounds must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Iterate of the block-coordinate loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationState {
    pub p: PowerVector,
    /// Receiver scalings, `[user][f]`.
    pub g: Vec<Vec<Complex64>>,
    /// MSE weights, `[user][f]`.
    pub w: Vec<Vec<f64>>,
    pub strong: StrongUserMap,
    /// Downlink budget multiplier.
    pub mu_d: f64,
    /// Uplink budget multipliers, indexed by uplink id.
    pub mu_u: Vec<f64>,
    /// SIC multipliers, `[downlink index][f]`.
    pub mu_sic: Vec<Vec<f64>>,
    /// Entries pinned to zero power, `[user][f]`.
    pub disabled: Vec<Vec<bool>>,
    pub iteration: usize,
}

impl AllocationState {
    pub fn new(users: &UserSet, strong: StrongUserMap, p: PowerVector) -> Self {
        let nf = p.num_subcarriers;
        Self {
            p,
            g: vec![vec![Complex64::new(0.0, 0.0); nf]; users.len()],
            w: vec![vec![1.0; nf]; users.len()],
            strong,
            mu_d: 0.0,
            mu_u: vec![0.0; users.num_uplink],
            mu_sic: vec![vec![0.0; nf]; users.num_downlink],
            disabled: vec![vec![false; nf]; users.len()],
            iteration: 0,
        }
    }

    pub fn is_disabled(&self, i: UserId, f: usize) -> bool {
        self.disabled[i][f]
    }

    pub fn disable(&mut self, i: UserId, f: usize) {
        self.disabled[i][f] = true;
        self.p.set(i, f, 0.0);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub final_state: AllocationState,
    /// Weighted sum rate (nats) of the initial powers.
    pub initial_objective: f64,
    /// Weighted sum rate (nats) after every iteration.
    pub objective_trace: Vec<f64>,
    /// `Σ_f R_{i,f}` in nats, indexed by user id.
    pub per_user_rates: Vec<f64>,
    /// `Γ` of every (weak, strong) downlink pair active at the end.
    pub sic_residuals: Vec<SicResidual>,
    pub iterations_used: usize,
    pub converged: bool,
    /// Trace indices where an SIC round restarted the inner loop.
    pub round_starts: Vec<usize>,
    /// Which start won: 0 for the initial powers, 1 uplink-led, 2 downlink-led.
    pub start: usize,
    /// Iterations summed over every start that was run.
    pub total_iterations: usize,
    pub selector: Selector,
    pub sic_strategy: SicStrategy,
}

impl RunResult {
    pub fn objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(self.initial_objective)
    }
}

/// MMSE scaling of every entry for the current powers.
pub fn update_g(state: &AllocationState, h: &ChannelSet) -> Vec<Vec<Complex64>> {
    h.users
        .all()
        .map(|i| {
            (0..h.num_subcarriers)
                .map(|f| model::mmse_scaling(i, f, &state.p, h, &state.strong))
                .collect()
        })
        .collect()
}

/// `w = 1/e` with `e` evaluated at the current `(g, P)`.
pub fn update_w(state: &AllocationState, h: &ChannelSet) -> Vec<Vec<f64>> {
    h.users
        .all()
        .map(|i| {
            (0..h.num_subcarriers)
                .map(|f| 1.0 / model::mse(i, f, state.g[i][f], &state.p, h, &state.strong))
                .collect()
        })
        .collect()
}

/// Count of weak users with power above `eps`, per direction and subcarrier.
pub fn weak_user_sparsity(result: &RunResult, eps: f64) -> BTreeMap<(Direction, usize), usize> {
    let state = &result.final_state;
    let nf = state.p.num_subcarriers;
    let num_uplink = state.mu_u.len();
    let num_users = state.p.p.len();
    let mut out = BTreeMap::new();
    for f in 0..nf {
        for dir in Direction::BOTH {
            let ids = match dir {
                Direction::Uplink => 0..num_uplink,
                Direction::Downlink => num_uplink..num_users,
            };
            let strong = state.strong.strong(dir, f);
            let count = ids.filter(|&i| i != strong && state.p.get(i, f) > eps).count();
            out.insert((dir, f), count);
        }
    }
    out
}

fn initial_powers(h: &ChannelSet, budgets: &Budgets, cfg: &SolverConfig, disabled: &[Vec<bool>]) -> PowerVector {
    let users = &h.users;
    let nf = h.num_subcarriers;
    let mut p = PowerVector::zeros(users, nf);
    let mut rng = match cfg.init {
        InitStrategy::Uniform => None,
        InitStrategy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut raw = |i: UserId, f: usize| -> f64 {
        if disabled[i][f] {
            0.0
        } else if let Some(rng) = rng.as_mut() {
            rng.random_range(0.05..1.0)
        } else {
            1.0
        }
    };
    let mut fill = |ids: &[(UserId, usize)], budget: f64, p: &mut PowerVector| {
        let vals: Vec<f64> = ids.iter().map(|&(i, f)| raw(i, f)).collect();
        let sum: f64 = vals.iter().sum();
        if sum > 0.0 {
            for (&(i, f), v) in ids.iter().zip(vals) {
                p.set(i, f, budget * v / sum);
            }
        }
    };
    for i in users.uplink() {
        let ids: Vec<_> = (0..nf).map(|f| (i, f)).collect();
        fill(&ids, budgets.uplink_w, &mut p);
    }
    let ids: Vec<_> = users.downlink().flat_map(|d| (0..nf).map(move |f| (d, f))).collect();
    fill(&ids, budgets.downlink_w, &mut p);
    p
}

fn check_inputs(h: &ChannelSet, alpha: &FairnessWeights, budgets: &Budgets, cfg: &SolverConfig) -> Result<()> {
    h.validate()?;
    budgets.validate()?;
    cfg.validate()?;
    if alpha.alpha.len() != h.users.len() || alpha.alpha.iter().any(|a| !(*a >= 0.0 && a.is_finite())) {
        return Err(Error::InvalidConfig(
            "fairness weights must be one finite nonnegative value per user".into(),
        ));
    }
    Ok(())
}

const EXTRAPOLATION_START: f64 = 0.5;
const EXTRAPOLATION_MAX: f64 = 64.0;
const ANDERSON_MEMORY: usize = 5;

/// Power scale applied to the suppressed direction of a biased start.
pub const BIASED_START_SCALE: f64 = 0.01;

struct Problem<'a> {
    h: &'a ChannelSet,
    alpha: &'a FairnessWeights,
    budgets: &'a Budgets,
    cfg: &'a SolverConfig,
}

impl Problem<'_> {
    fn objective(&self, state: &AllocationState) -> f64 {
        model::weighted_sum_rate(&state.p, self.h, &state.strong, self.alpha)
    }

    /// One g -> w -> P sweep.
    fn step(&self, state: &mut AllocationState) -> Result<()> {
        state.g = update_g(state, self.h);
        state.w = update_w(state, self.h);
        let upd = update_p(state, self.h, self.alpha, self.budgets, self.cfg)?;
        state.p = upd.p;
        state.mu_d = upd.mu_d;
        state.mu_u = upd.mu_u;
        state.iteration += 1;
        Ok(())
    }

    /// Clip to the feasible set: disabled or non-finite entries go to zero and
    /// over-budget users are scaled back. Budgets whose multiplier is positive
    /// stay tight.
    fn project(&self, mut p: PowerVector, state: &AllocationState) -> PowerVector {
        let users = &self.h.users;
        let nf = self.h.num_subcarriers;
        for i in users.all() {
            for f in 0..nf {
                let v = p.get(i, f);
                if state.is_disabled(i, f) || !v.is_finite() || v < 0.0 {
                    p.set(i, f, 0.0);
                }
            }
        }
        let rescale = |p: &mut PowerVector, ids: &[UserId], budget: f64, tight: bool| {
            let total: f64 = ids.iter().map(|&i| p.user_total(i)).sum();
            if total > 0.0 && (total > budget || tight) {
                let c = budget / total;
                for &i in ids {
                    for f in 0..nf {
                        let v = p.get(i, f) * c;
                        p.set(i, f, v);
                    }
                }
            }
        };
        for i in users.uplink() {
            rescale(&mut p, &[i], self.budgets.uplink_w, state.mu_u[i] > 0.0);
        }
        let dl: Vec<UserId> = users.downlink().collect();
        rescale(&mut p, &dl, self.budgets.downlink_w, state.mu_d > 0.0);
        p
    }

    /// `√P_new + β (√P_new - √P_old)`, or `P_new (P_new/P_old)^β` when
    /// `geometric`.
    fn extrapolate(&self, old: &PowerVector, state: &AllocationState, beta: f64, geometric: bool) -> PowerVector {
        let mut p = state.p.clone();
        for i in self.h.users.all() {
            for f in 0..self.h.num_subcarriers {
                let (p0, p1) = (old.get(i, f), state.p.get(i, f));
                let v = if geometric {
                    if p0 > 0.0 && p1 > 0.0 {
                        p1 * (p1 / p0).powf(beta)
                    } else {
                        p1
                    }
                } else {
                    let (v0, v1) = (p0.sqrt(), p1.sqrt());
                    (v1 + beta * (v1 - v0)).max(0.0).powi(2)
                };
                p.set(i, f, v);
            }
        }
        self.project(p, state)
    }

    fn amplitudes(&self, p: &PowerVector) -> DVector<f64> {
        DVector::from_iterator(p.p.len() * p.num_subcarriers, p.p.iter().flatten().map(|v| v.sqrt()))
    }

    fn powers_from_amplitudes(&self, x: &DVector<f64>, state: &AllocationState) -> PowerVector {
        let mut p = state.p.clone();
        let nf = self.h.num_subcarriers;
        for (k, v) in x.iter().enumerate() {
            p.set(k / nf, k % nf, v.max(0.0).powi(2));
        }
        self.project(p, state)
    }

    /// Iterate until the relative objective change drops below tolerance.
    fn run_inner(
        &self,
        state: &mut AllocationState,
        trace: &mut Vec<f64>,
        observer: &mut dyn FnMut(&AllocationState),
    ) -> Result<bool> {
        let mut prev = self.objective(state);
        let mut beta = EXTRAPOLATION_START;
        let mut mixer = Anderson::new(ANDERSON_MEMORY);
        for _ in 0..self.cfg.max_iterations {
            let old = state.p.clone();
            self.step(state)?;
            let mut obj = self.objective(state);
            if self.cfg.extrapolation {
                mixer.push(self.amplitudes(&old), self.amplitudes(&state.p));
                let mut best: Option<(PowerVector, f64)> = None;
                let mut cands = vec![
                    self.extrapolate(&old, state, beta, false),
                    self.extrapolate(&old, state, beta, true),
                ];
                if let Some(x) = mixer.candidate() {
                    cands.push(self.powers_from_amplitudes(&x, state));
                }
                for cand in cands {
                    let v = model::weighted_sum_rate(&cand, self.h, &state.strong, self.alpha);
                    if best.as_ref().is_none_or(|b| v > b.1) {
                        best = Some((cand, v));
                    }
                }
                match best {
                    Some((cand, v)) if v > obj => {
                        state.p = cand;
                        obj = v;
                        beta = (beta * 2.0).min(EXTRAPOLATION_MAX);
                    }
                    _ => beta = (beta * 0.5).max(EXTRAPOLATION_START),
                }
            }
            trace.push(obj);
            observer(state);
            let change = (obj - prev).abs() / prev.abs().max(f64::MIN_POSITIVE);
            prev = obj;
            if change < self.cfg.objective_rel_tol {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn run(&self, mut state: AllocationState, observer: &mut dyn FnMut(&AllocationState)) -> Result<RunResult> {
        let initial_objective = self.objective(&state);
        let mut trace = Vec::new();
        let mut round_starts = vec![0];
        let mut converged;

        let repair_loop = |state: &mut AllocationState,
                           trace: &mut Vec<f64>,
                           round_starts: &mut Vec<usize>,
                           observer: &mut dyn FnMut(&AllocationState),
                           mut converged: bool|
         -> Result<bool> {
            let repair = SolverConfig {
                sic_strategy: SicStrategy::Repair,
                ..self.cfg.clone()
            };
            while enforce_sic(state, self.h, &repair, 0) > 0 {
                round_starts.push(trace.len());
                converged = self.run_inner(state, trace, observer)?;
            }
            Ok(converged)
        };

        match self.cfg.sic_strategy {
            SicStrategy::Ignore => {
                converged = self.run_inner(&mut state, &mut trace, observer)?;
            }
            SicStrategy::Repair => {
                converged = self.run_inner(&mut state, &mut trace, observer)?;
                converged = repair_loop(&mut state, &mut trace, &mut round_starts, observer, converged)?;
            }
            SicStrategy::Subgradient => {
                converged = self.run_inner(&mut state, &mut trace, observer)?;
                for round in 1..=self.cfg.sic_outer_rounds {
                    if enforce_sic(&mut state, self.h, self.cfg, round) == 0 {
                        break;
                    }
                    round_starts.push(trace.len());
                    converged = self.run_inner(&mut state, &mut trace, observer)?;
                }
                converged = repair_loop(&mut state, &mut trace, &mut round_starts, observer, converged)?;
            }
        }

        // an accepted extrapolation leaves g and w one step behind P
        state.g = update_g(&state, self.h);
        state.w = update_w(&state, self.h);
        let per_user_rates = model::user_rates(&state.p, self.h, &state.strong);
        let sic_residuals = sic_residuals(&state, self.h, self.cfg.epsilon_active);
        Ok(RunResult {
            iterations_used: trace.len(),
            start: 0,
            total_iterations: trace.len(),
            final_state: state,
            initial_objective,
            objective_trace: trace,
            per_user_rates,
            sic_residuals,
            converged,
            round_starts,
            selector: self.cfg.selector,
            sic_strategy: self.cfg.sic_strategy,
        })
    }

    /// [`Problem::run`] from `state` and, if enabled, from its two biased
    /// variants. The observer sees only the winning trajectory.
    fn run_starts(
        &self,
        state: AllocationState,
        observer: Option<&mut dyn FnMut(&AllocationState)>,
    ) -> Result<RunResult> {
        let mut starts = vec![state];
        if self.cfg.biased_starts {
            for dir in [Direction::Downlink, Direction::Uplink] {
                let mut st = starts[0].clone();
                for i in self.h.users.of(dir) {
                    for f in 0..self.h.num_subcarriers {
                        let v = st.p.get(i, f) * BIASED_START_SCALE;
                        st.p.set(i, f, v);
                    }
                }
                starts.push(st);
            }
        }
        let mut best: Option<(usize, RunResult)> = None;
        let mut total = 0;
        for (k, st) in starts.iter().enumerate() {
            let r = self.run(st.clone(), &mut |_| {})?;
            total += r.iterations_used;
            if best.as_ref().is_none_or(|(_, b)| r.objective() > b.objective()) {
                best = Some((k, r));
            }
        }
        let (k, mut r) = best.expect("at least one start");
        if let Some(observer) = observer {
            r = self.run(starts[k].clone(), observer)?;
        }
        r.start = k;
        r.total_iterations = total;
        Ok(r)
    }
}

/// Select strong users and run the WMMSE loop.
///
/// `initial` overrides [`SolverConfig::init`].
pub fn solve(
    h: &ChannelSet,
    alpha: &FairnessWeights,
    budgets: &Budgets,
    cfg: &SolverConfig,
    initial: Option<&PowerVector>,
) -> Result<RunResult> {
    solve_observed(h, alpha, budgets, cfg, initial, &mut |_| {})
}

/// [`solve`] with a callback invoked after every iteration.
pub fn solve_observed(
    h: &ChannelSet,
    alpha: &FairnessWeights,
    budgets: &Budgets,
    cfg: &SolverConfig,
    initial: Option<&PowerVector>,
    observer: &mut dyn FnMut(&AllocationState),
) -> Result<RunResult> {
    check_inputs(h, alpha, budgets, cfg)?;
    let strong = select_strong_users(h, alpha, budgets, cfg)?;
    solve_with_strong(h, alpha, budgets, cfg, strong, initial, observer)
}

/// Run the WMMSE loop for a fixed strong-user map.
pub fn solve_with_strong(
    h: &ChannelSet,
    alpha: &FairnessWeights,
    budgets: &Budgets,
    cfg: &SolverConfig,
    strong: StrongUserMap,
    initial: Option<&PowerVector>,
    observer: &mut dyn FnMut(&AllocationState),
) -> Result<RunResult> {
    check_inputs(h, alpha, budgets, cfg)?;
    let users = &h.users;
    let strong = StrongUserMap::new(users, strong.uplink, strong.downlink)?;
    if strong.num_subcarriers() != h.num_subcarriers {
        return Err(Error::InvalidConfig(
            "strong user map does not cover every subcarrier".into(),
        ));
    }
    let p = match initial {
        Some(p) => {
            if p.p.len() != users.len() || p.num_subcarriers != h.num_subcarriers || !p.is_valid() {
                return Err(Error::InvalidConfig(
                    "initial powers have the wrong shape or invalid entries".into(),
                ));
            }
            p.clone()
        }
        None => initial_powers(h, budgets, cfg, &vec![vec![false; h.num_subcarriers]; users.len()]),
    };
    let state = AllocationState::new(users, strong, p);
    Problem { h, alpha, budgets, cfg }.run_starts(state, Some(observer))
}

/// Power-only WMMSE with one user per direction and subcarrier: every entry
/// outside `assigned` is pinned to zero.
pub fn solve_with_assignment(
    h: &ChannelSet,
    alpha: &FairnessWeights,
    budgets: &Budgets,
    cfg: &SolverConfig,
    assigned: &StrongUserMap,
) -> Result<RunResult> {
    check_inputs(h, alpha, budgets, cfg)?;
    let users = &h.users;
    let nf = h.num_subcarriers;
    let strong = StrongUserMap::new(users, assigned.uplink.clone(), assigned.downlink.clone())?;
    let mut disabled = vec![vec![true; nf]; users.len()];
    for f in 0..nf {
        disabled[strong.uplink[f]][f] = false;
        disabled[strong.downlink[f]][f] = false;
    }
    let p = initial_powers(h, budgets, cfg, &disabled);
    let mut state = AllocationState::new(users, strong, p);
    state.disabled = disabled;
    Problem { h, alpha, budgets, cfg }.run_starts(state, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{fairness_weights, generate_channels, generate_scenario, ScenarioConfig};

    fn instance(seed: u64) -> (ChannelSet, FairnessWeights, Budgets) {
        let cfg = ScenarioConfig::default();
        let s = generate_scenario(&cfg, seed).unwrap();
        (generate_channels(&s).unwrap(), fairness_weights(&s), cfg.budgets())
    }

    fn single_link(gains: &[f64], noise: f64) -> ChannelSet {
        let users = UserSet::new(1, 1).unwrap();
        let mut h = ChannelSet::zeros(users, gains.len(), noise);
        for (f, g) in gains.iter().enumerate() {
            h.set_direct(0, f, Complex64::new(g.sqrt(), 0.0));
        }
        h
    }

    #[test]
    fn update_g_and_w_elementwise() {
        let (h, alpha, budgets) = instance(1);
        let cfg = SolverConfig::default();
        let strong = max_gain_map(&h, &alpha);
        let p = initial_powers(&h, &budgets, &cfg, &vec![vec![false; 6]; 6]);
        let mut st = AllocationState::new(&h.users, strong, p);
        st.g = update_g(&st, &h);
        for i in 0..6 {
            for f in 0..6 {
                assert_eq!(st.g[i][f], model::mmse_scaling(i, f, &st.p, &h, &st.strong));
            }
        }
        st.w = update_w(&st, &h);
        for i in 0..6 {
            for f in 0..6 {
                let e = model::mse(i, f, st.g[i][f], &st.p, &h, &st.strong);
                assert!((st.w[i][f] * e - 1.0).abs() < 1e-12);
                assert!(st.w[i][f] >= 1.0);
            }
        }

        let zero = AllocationState::new(&h.users, st.strong.clone(), PowerVector::zeros(&h.users, 6));
        assert!(update_g(&zero, &h).iter().flatten().all(|g| g.norm() == 0.0));
        let mut zero = zero;
        zero.g = update_g(&zero, &h);
        assert!(update_w(&zero, &h).iter().flatten().all(|w| (*w - 1.0).abs() < 1e-15));
    }

    #[test]
    fn unit_sinr_gives_weight_two() {
        let mut h = single_link(&[1.0], 1.0);
        h.set_direct(1, 0, Complex64::new(1.0, 0.0));
        let users = h.users;
        let mut p = PowerVector::zeros(&users, 1);
        p.set(0, 0, 1.0);
        let mut st = AllocationState::new(
            &users,
            StrongUserMap {
                uplink: vec![0],
                downlink: vec![1],
            },
            p,
        );
        st.g = update_g(&st, &h);
        st.w = update_w(&st, &h);
        assert!((st.w[0][0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn single_carrier_uses_full_budget() {
        let h = single_link(&[1e-8], 1e-13);
        let alpha = FairnessWeights::uniform(h.users);
        let budgets = Budgets {
            uplink_w: 0.025,
            downlink_w: 0.1,
        };
        let r = solve(&h, &alpha, &budgets, &SolverConfig::default(), None).unwrap();
        let pu = r.final_state.p.user_total(0);
        assert!((pu - 0.025).abs() <= 1e-9 * 0.025);
    }

    #[test]
    fn two_carrier_water_filling() {
        let noise = 1e-13;
        let gains = [3e-9, 1e-9];
        let h = single_link(&gains, noise);
        let alpha = FairnessWeights::uniform(h.users);
        let budgets = Budgets {
            uplink_w: 1e-4,
            downlink_w: 1e-4,
        };
        let cfg = SolverConfig {
            objective_rel_tol: 1e-14,
            max_iterations: 20_000,
            ..Default::default()
        };
        let r = solve(&h, &alpha, &budgets, &cfg, None).unwrap();
        // water level: p_f = L - n/g_f with both channels active
        let floors: Vec<f64> = gains.iter().map(|g| noise / g).collect();
        let level = (budgets.uplink_w + floors.iter().sum::<f64>()) / 2.0;
        for (f, floor) in floors.iter().enumerate() {
            let expect = level - floor;
            let got = r.final_state.p.get(0, f);
            assert!((got / expect - 1.0).abs() < 1e-6, "f={f} got {got} expect {expect}");
        }
    }

    #[test]
    fn budgets_and_weights_hold_on_random_instances() {
        for seed in 0..5 {
            let (h, alpha, budgets) = instance(seed);
            let r = solve(&h, &alpha, &budgets, &SolverConfig::default(), None).unwrap();
            let st = &r.final_state;
            for u in h.users.uplink() {
                assert!(st.p.user_total(u) <= budgets.uplink_w * (1.0 + 1e-9));
            }
            assert!(st.p.downlink_total(&h.users) <= budgets.downlink_w * (1.0 + 1e-9));
            assert!(st.w.iter().flatten().all(|w| *w >= 1.0));
            assert!(st.mu_u.iter().all(|m| *m >= 0.0) && st.mu_d >= 0.0);
            assert!(st.mu_sic.iter().flatten().all(|m| *m >= 0.0));
        }
    }

    #[test]
    fn ignore_strategy_is_monotone() {
        let cfg = SolverConfig {
            sic_strategy: SicStrategy::Ignore,
            ..Default::default()
        };
        for seed in 0..10 {
            let (h, alpha, budgets) = instance(seed);
            let r = solve(&h, &alpha, &budgets, &cfg, None).unwrap();
            let mut prev = r.initial_objective;
            for &v in &r.objective_trace {
                assert!(v >= prev - 1e-9, "seed {seed}: {v} < {prev}");
                prev = v;
            }
            assert_eq!(r.iterations_used, r.objective_trace.len());
        }
    }

    #[test]
    fn fixed_point_at_convergence() {
        for seed in 0..5 {
            let (h, alpha, budgets) = instance(seed);
            let r = solve(&h, &alpha, &budgets, &SolverConfig::default(), None).unwrap();
            let mut st = r.final_state.clone();
            st.g = update_g(&st, &h);
            st.w = update_w(&st, &h);
            for i in 0..6 {
                for f in 0..6 {
                    let (w0, w1) = (r.final_state.w[i][f], st.w[i][f]);
                    assert!((w1 - w0).abs() <= 1e-8 * w0, "w[{i}][{f}]");
                    let (g0, g1) = (r.final_state.g[i][f], st.g[i][f]);
                    assert!((g1 - g0).norm() <= 1e-8 * g0.norm(), "g[{i}][{f}]");
                }
            }
        }
    }

    #[test]
    fn biased_starts_never_lose() {
        for seed in 0..4 {
            let (h, alpha, budgets) = instance(seed);
            let single = SolverConfig {
                biased_starts: false,
                ..Default::default()
            };
            let a = solve(&h, &alpha, &budgets, &single, None).unwrap();
            let b = solve(&h, &alpha, &budgets, &SolverConfig::default(), None).unwrap();
            assert_eq!(a.start, 0);
            assert_eq!(a.total_iterations, a.iterations_used);
            assert!(b.objective() >= a.objective());
            assert!(b.start < 3 && b.total_iterations > b.iterations_used);
            let mut seen = 0;
            solve_observed(&h, &alpha, &budgets, &SolverConfig::default(), None, &mut |_| seen += 1).unwrap();
            assert_eq!(seen, b.iterations_used);
        }
    }

    #[test]
    fn alpha_scaling_keeps_trajectory() {
        // the bare iteration; the least-squares mixing step is not bitwise stable
        let cfg = SolverConfig {
            sic_strategy: SicStrategy::Ignore,
            extrapolation: false,
            ..Default::default()
        };
        let (h, alpha, budgets) = instance(4);
        let mut a = Vec::new();
        let mut b = Vec::new();
        solve_observed(&h, &alpha, &budgets, &cfg, None, &mut |s| a.push(s.p.clone())).unwrap();
        solve_observed(&h, &alpha.scaled(7.5), &budgets, &cfg, None, &mut |s| {
            b.push(s.p.clone())
        })
        .unwrap();
        assert_eq!(a.len(), b.len());
        let pmax = budgets.downlink_w;
        for (x, y) in a.iter().zip(&b) {
            for (rx, ry) in x.p.iter().zip(&y.p) {
                for (u, v) in rx.iter().zip(ry) {
                    assert!((u - v).abs() <= 1e-6 * u.abs().max(v.abs()).max(1e-9 * pmax));
                }
            }
        }
    }

    #[test]
    fn sparsity_counts() {
        let (h, alpha, budgets) = instance(2);
        let mut r = solve(&h, &alpha, &budgets, &SolverConfig::default(), None).unwrap();
        let big = weak_user_sparsity(&r, 1e9);
        assert!(big.values().all(|c| *c == 0));
        assert_eq!(big.len(), 12);
        r.final_state.p = PowerVector::zeros(&h.users, 6);
        assert!(weak_user_sparsity(&r, 0.0).values().all(|c| *c == 0));
    }

    #[test]
    fn oma_assignment_leaves_others_off() {
        let (h, alpha, budgets) = instance(6);
        let assigned = max_gain_map(&h, &alpha);
        let r = solve_with_assignment(&h, &alpha, &budgets, &SolverConfig::default(), &assigned).unwrap();
        for f in 0..6 {
            for i in h.users.all() {
                if i != assigned.uplink[f] && i != assigned.downlink[f] {
                    assert_eq!(r.final_state.p.get(i, f), 0.0);
                }
            }
        }
        let cfg = SolverConfig {
            selector: Selector::OmaWmmse,
            ..Default::default()
        };
        assert_eq!(select_strong_users(&h, &alpha, &budgets, &cfg).unwrap(), assigned);
    }

    #[test]
    fn random_init_is_feasible() {
        let (h, alpha, budgets) = instance(8);
        let cfg = SolverConfig {
            init: InitStrategy::Random { seed: 3 },
            ..Default::default()
        };
        let p = initial_powers(&h, &budgets, &cfg, &vec![vec![false; 6]; 6]);
        for u in h.users.uplink() {
            assert!((p.user_total(u) - budgets.uplink_w).abs() < 1e-12);
        }
        assert!((p.downlink_total(&h.users) - budgets.downlink_w).abs() < 1e-12);
        solve(&h, &alpha, &budgets, &cfg, None).unwrap();
    }

    #[test]
    fn rejects_bad_inputs() {
        let (h, alpha, budgets) = instance(0);
        let bad = SolverConfig {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(solve(&h, &alpha, &budgets, &bad, None).is_err());
        let neg = Budgets {
            uplink_w: -1.0,
            downlink_w: 1.0,
        };
        assert!(solve(&h, &alpha, &neg, &SolverConfig::default(), None).is_err());
        let short = FairnessWeights { alpha: vec![1.0] };
        assert!(solve(&h, &short, &budgets, &SolverConfig::default(), None).is_err());
    }
}
