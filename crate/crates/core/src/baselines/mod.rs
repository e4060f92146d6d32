//! Comparison allocators.
//!
//! * [`oma_hd_waterfill`]: half duplex, each subcarrier serves a single user in a
//!   single direction, powers by water-filling.
//! * [`oma_fd_greedy`]: full duplex with one uplink and one downlink user per
//!   subcarrier, chosen greedily, powers by the WMMSE loop. This is a simple
//!   stand-in for a quasi-optimal OMA-FD scheduler, not a reproduction of one.
//! * [`grid_oracle`]: exhaustive search for tiny instances.

mod oracle;
mod waterfill;

use serde::{Deserialize, Serialize};

use crate::channel::{Budgets, ChannelSet, FairnessWeights};
use crate::error::Result;
use crate::model::{self, PowerVector};
use crate::users::{Direction, UserId};
use crate::wmmse::{max_gain_map, max_gain_user, solve_with_assignment, RunResult, SolverConfig};

pub use oracle::{grid_oracle, MAX_ORACLE_DIMENSIONS, MAX_ORACLE_GRID_POINTS};
pub use waterfill::weighted_waterfill;

pub const OMA_HD_LABEL: &str = "oma_hd_waterfill";
pub const OMA_FD_LABEL: &str = "oma_fd_greedy";
pub const ORACLE_LABEL: &str = "grid_oracle";

/// User served in one direction on one subcarrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub direction: Direction,
    pub subcarrier: usize,
    pub user: Option<UserId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub label: String,
    /// `Σ_f R_{i,f}` in nats, indexed by user id.
    pub per_user_rates: Vec<f64>,
    /// Weighted sum rate in nats.
    pub weighted_sum_rate: f64,
    /// Served user per (direction, subcarrier). For the grid oracle these are
    /// the strong users of the best allocation.
    pub assignment: Vec<Assignment>,
    pub powers: PowerVector,
}

/// Which subcarriers carry uplink under half duplex.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum HdSplit {
    /// Even subcarriers uplink, odd downlink.
    #[default]
    Interleaved,
    /// The first `round(uplink * F)` subcarriers uplink, the rest downlink.
    Fraction { uplink: f64 },
}

impl HdSplit {
    pub fn direction(&self, f: usize, num_subcarriers: usize) -> Direction {
        let uplink = match *self {
            HdSplit::Interleaved => f.is_multiple_of(2),
            HdSplit::Fraction { uplink } => {
                let n_ul = (uplink.clamp(0.0, 1.0) * num_subcarriers as f64).round() as usize;
                f < n_ul
            }
        };
        if uplink {
            Direction::Uplink
        } else {
            Direction::Downlink
        }
    }
}

/// Half-duplex OMA: per phase, the best weighted user takes each subcarrier and
/// powers are water-filled against that direction's budget.
pub fn oma_hd_waterfill(h: &ChannelSet, alpha: &FairnessWeights, budgets: &Budgets, split: HdSplit) -> BaselineResult {
    let users = &h.users;
    let nf = h.num_subcarriers;
    let noise = h.noise();
    let mut powers = PowerVector::zeros(users, nf);
    let mut assignment = Vec::with_capacity(2 * nf);
    let mut served: Vec<(Direction, usize, UserId)> = Vec::new();
    for f in 0..nf {
        let phase = split.direction(f, nf);
        for dir in Direction::BOTH {
            let user = (dir == phase).then(|| max_gain_user(h, alpha, dir, f));
            if let Some(u) = user {
                served.push((dir, f, u));
            }
            assignment.push(Assignment {
                direction: dir,
                subcarrier: f,
                user,
            });
        }
    }

    let mut fill = |entries: Vec<(UserId, usize)>, budget: f64| {
        let w: Vec<f64> = entries.iter().map(|&(i, _)| alpha.get(i)).collect();
        let c: Vec<f64> = entries.iter().map(|&(i, f)| h.direct_sq(i, f) / noise).collect();
        for ((i, f), p) in entries.into_iter().zip(weighted_waterfill(&w, &c, budget)) {
            powers.set(i, f, p);
        }
    };
    for u in users.uplink() {
        let entries = served
            .iter()
            .filter(|(d, _, i)| *d == Direction::Uplink && *i == u)
            .map(|&(_, f, i)| (i, f))
            .collect();
        fill(entries, budgets.uplink_w);
    }
    let entries = served
        .iter()
        .filter(|(d, _, _)| *d == Direction::Downlink)
        .map(|&(_, f, i)| (i, f))
        .collect();
    fill(entries, budgets.downlink_w);

    let mut per_user_rates = vec![0.0; users.len()];
    for &(_, f, i) in &served {
        per_user_rates[i] += model::rate(h.direct_sq(i, f) * powers.get(i, f) / noise);
    }
    let weighted_sum_rate = per_user_rates.iter().enumerate().map(|(i, r)| alpha.get(i) * r).sum();
    BaselineResult {
        label: OMA_HD_LABEL.into(),
        per_user_rates,
        weighted_sum_rate,
        assignment,
        powers,
    }
}

/// Full-duplex OMA: one uplink and one downlink user per subcarrier by
/// weighted gain, then power-only WMMSE with cross-direction interference.
pub fn oma_fd_greedy(
    h: &ChannelSet,
    alpha: &FairnessWeights,
    budgets: &Budgets,
    cfg: &SolverConfig,
) -> Result<(BaselineResult, RunResult)> {
    let assigned = max_gain_map(h, alpha);
    let run = solve_with_assignment(h, alpha, budgets, cfg, &assigned)?;
    let st = &run.final_state;
    let assignment = (0..h.num_subcarriers)
        .flat_map(|f| {
            Direction::BOTH.map(|dir| Assignment {
                direction: dir,
                subcarrier: f,
                user: Some(assigned.strong(dir, f)),
            })
        })
        .collect();
    let result = BaselineResult {
        label: OMA_FD_LABEL.into(),
        per_user_rates: run.per_user_rates.clone(),
        weighted_sum_rate: model::weighted_sum_rate(&st.p, h, &st.strong, alpha),
        assignment,
        powers: st.p.clone(),
    };
    Ok((result, run))
}
