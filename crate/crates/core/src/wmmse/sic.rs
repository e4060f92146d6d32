//! Downlink SIC feasibility handling between inner WMMSE runs.
//!
//! The constraint `Γ_{k,i*}(f) >= 0` only binds when both the weak user `k`
//! and the strong user `i*` transmit on `f`.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::model::gamma_sic;
use crate::users::UserId;

use super::power::sic_scale;
use super::{AllocationState, SicStrategy, SolverConfig};

/// `Γ` of one active (weak, strong) downlink pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SicResidual {
    pub weak: UserId,
    pub strong: UserId,
    pub subcarrier: usize,
    pub gamma: f64,
}

/// Every pair whose weak and strong powers both exceed `eps`.
pub fn sic_residuals(state: &AllocationState, h: &ChannelSet, eps: f64) -> Vec<SicResidual> {
    let users = &h.users;
    let mut out = Vec::new();
    for f in 0..h.num_subcarriers {
        let strong = state.strong.downlink[f];
        if state.p.get(strong, f) <= eps {
            continue;
        }
        for k in users.downlink() {
            if k == strong || state.p.get(k, f) <= eps {
                continue;
            }
            let gamma = gamma_sic(k, strong, f, &state.p, h).expect("distinct downlink pair");
            out.push(SicResidual {
                weak: k,
                strong,
                subcarrier: f,
                gamma,
            });
        }
    }
    out
}

/// Apply one SIC round. Returns how many pairs were acted on: deactivated
/// users under repair, or changed multipliers under subgradient.
///
/// `round` is 1-based and sets the subgradient step `step0 / round`.
pub fn enforce_sic(state: &mut AllocationState, h: &ChannelSet, cfg: &SolverConfig, round: usize) -> usize {
    let users = h.users;
    match cfg.sic_strategy {
        SicStrategy::Ignore => 0,
        SicStrategy::Repair => {
            let violated: Vec<SicResidual> = sic_residuals(state, h, cfg.epsilon_active)
                .into_iter()
                .filter(|r| r.gamma < 0.0)
                .collect();
            for r in &violated {
                state.disable(r.weak, r.subcarrier);
                state.mu_sic[users.downlink_index(r.weak)][r.subcarrier] = 0.0;
            }
            violated.len()
        }
        SicStrategy::Subgradient => {
            let step = cfg.sic_subgradient_step0 / round.max(1) as f64;
            let active = sic_residuals(state, h, cfg.epsilon_active);
            let mut changed = 0;
            let mut next = vec![vec![0.0; h.num_subcarriers]; users.num_downlink];
            for r in &active {
                let d = users.downlink_index(r.weak);
                let normalized = r.gamma / sic_scale(r.weak, r.strong, r.subcarrier, h);
                next[d][r.subcarrier] = (state.mu_sic[d][r.subcarrier] - step * normalized).max(0.0);
            }
            for (row_old, row_new) in state.mu_sic.iter_mut().zip(next) {
                for (old, new) in row_old.iter_mut().zip(row_new) {
                    if *old != new {
                        changed += 1;
                        *old = new;
                    }
                }
            }
            changed
        }
    }
}
