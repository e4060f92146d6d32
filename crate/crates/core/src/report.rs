//! Serialized outputs of the command-line tools.
//!
//! JSON documents carry a `schema_version`. Rates are in bits/s/Hz, powers in
//! watts. Nothing time- or host-dependent is written, so equal inputs give
//! byte-identical files.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::baselines::{Assignment, BaselineResult};
use crate::channel::{ChannelSet, ScenarioConfig};
use crate::error::Result;
use crate::model::{PowerVector, StrongUserMap};
use crate::montecarlo::{SweepResult, TraceExperiment};
use crate::units::{linear_to_db, nats_to_bits};
use crate::wmmse::{RunResult, Selector, SicResidual, SicStrategy, SolverConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// Label used for the NOMA WMMSE allocation in reports.
pub const WMMSE_LABEL: &str = "wmmse";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    pub mu_d: f64,
    pub mu_u: Vec<f64>,
    /// `[downlink index][f]`.
    pub mu_sic: Vec<Vec<f64>>,
}

/// One allocation in external units, WMMSE or baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationReport {
    pub label: String,
    /// Weighted sum rate over all subcarriers, bits/s/Hz.
    pub weighted_sum_rate_bits: f64,
    /// Weighted sum rate divided by the number of subcarriers.
    pub wsr_per_subcarrier_bpshz: f64,
    /// `Σ_f R_{i,f}` in bits/s/Hz, indexed by user id.
    pub per_user_rates_bpshz: Vec<f64>,
    /// `[user][f]`, watts.
    pub powers_w: Vec<Vec<f64>>,
    pub assignment: Vec<Assignment>,
}

impl AllocationReport {
    fn new(
        label: &str,
        wsr_nats: f64,
        per_user_nats: &[f64],
        powers: &PowerVector,
        assignment: Vec<Assignment>,
    ) -> Self {
        let bits = nats_to_bits(wsr_nats);
        Self {
            label: label.into(),
            weighted_sum_rate_bits: bits,
            wsr_per_subcarrier_bpshz: bits / powers.num_subcarriers as f64,
            per_user_rates_bpshz: per_user_nats.iter().map(|r| nats_to_bits(*r)).collect(),
            powers_w: powers.p.clone(),
            assignment,
        }
    }

    pub fn from_run(run: &RunResult) -> Self {
        let st = &run.final_state;
        Self::new(
            WMMSE_LABEL,
            run.objective(),
            &run.per_user_rates,
            &st.p,
            strong_assignment(&st.strong),
        )
    }

    pub fn from_baseline(b: &BaselineResult) -> Self {
        Self::new(
            &b.label,
            b.weighted_sum_rate,
            &b.per_user_rates,
            &b.powers,
            b.assignment.clone(),
        )
    }
}

fn strong_assignment(s: &StrongUserMap) -> Vec<Assignment> {
    (0..s.num_subcarriers())
        .flat_map(|f| {
            crate::users::Direction::BOTH.map(|dir| Assignment {
                direction: dir,
                subcarrier: f,
                user: Some(s.strong(dir, f)),
            })
        })
        .collect()
}

/// Convergence and dual information of a WMMSE run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDetails {
    pub selector: Selector,
    pub sic_strategy: SicStrategy,
    pub converged: bool,
    pub iterations_used: usize,
    pub total_iterations: usize,
    pub start: usize,
    pub round_starts: Vec<usize>,
    pub initial_objective_bits: f64,
    /// Weighted sum rate after each iteration, bits/s/Hz.
    pub objective_trace_bits: Vec<f64>,
    pub multipliers: Multipliers,
    /// `Γ` of every active (weak, strong) downlink pair at the end, W².
    pub sic_residuals: Vec<SicResidual>,
    /// `(user, f)` entries switched off by SIC repair.
    pub disabled: Vec<(usize, usize)>,
}

impl RunDetails {
    pub fn from_run(run: &RunResult) -> Self {
        let st = &run.final_state;
        let disabled = st
            .disabled
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().filter(|(_, d)| **d).map(move |(f, _)| (i, f)))
            .collect();
        Self {
            selector: run.selector,
            sic_strategy: run.sic_strategy,
            converged: run.converged,
            iterations_used: run.iterations_used,
            total_iterations: run.total_iterations,
            start: run.start,
            round_starts: run.round_starts.clone(),
            initial_objective_bits: nats_to_bits(run.initial_objective),
            objective_trace_bits: run.objective_trace.iter().map(|v| nats_to_bits(*v)).collect(),
            multipliers: Multipliers {
                mu_d: st.mu_d,
                mu_u: st.mu_u.clone(),
                mu_sic: st.mu_sic.clone(),
            },
            sic_residuals: run.sic_residuals.clone(),
            disabled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub channel_digest: String,
    pub scenario: ScenarioConfig,
    pub solver: SolverConfig,
    pub allocation: AllocationReport,
    pub run: RunDetails,
}

impl SolveReport {
    pub fn new(seed: u64, h: &ChannelSet, scenario: &ScenarioConfig, solver: &SolverConfig, run: &RunResult) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: "solve".into(),
            seed,
            channel_digest: h.digest(),
            scenario: scenario.clone(),
            solver: solver.clone(),
            allocation: AllocationReport::from_run(run),
            run: RunDetails::from_run(run),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub channel_digest: String,
    pub scenario: ScenarioConfig,
    pub solver: SolverConfig,
    pub grid_points: usize,
    pub wmmse: AllocationReport,
    pub wmmse_run: RunDetails,
    pub oracle: AllocationReport,
    /// `(oracle - wmmse) / oracle`; negative when WMMSE beats the grid.
    pub relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport<'a> {
    pub schema_version: u32,
    pub command: String,
    #[serde(flatten)]
    pub result: &'a SweepResult,
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn sweep_json(result: &SweepResult) -> Result<String> {
    to_json(&SweepReport {
        schema_version: SCHEMA_VERSION,
        command: "sweep".into(),
        result,
    })
}

/// One row per (algorithm, sweep value).
pub fn write_sweep_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["algorithm", "sweep_value", "mean_bpshz", "stderr", "trials"])?;
    for row in &result.summary {
        w.write_record([
            row.algorithm.label().to_string(),
            row.sweep_value.to_string(),
            row.mean_bpshz.to_string(),
            row.stderr.to_string(),
            row.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per iteration and active weak user; iterations count from 1.
pub fn write_trace_csv<W: Write>(trace: &TraceExperiment, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "user_id", "own_sinr_db", "cross_sinr_db", "dominated"])?;
    for (k, samples) in trace.iterations.iter().enumerate() {
        for s in samples {
            w.write_record([
                (k + 1).to_string(),
                s.user.to_string(),
                linear_to_db(s.own_sinr).to_string(),
                linear_to_db(s.cross_sinr).to_string(),
                s.dominated().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
