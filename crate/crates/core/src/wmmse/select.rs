//! Strong-user selection.

use crate::channel::{Budgets, ChannelSet, FairnessWeights};
use crate::error::Result;
use crate::model::StrongUserMap;
use crate::users::{Direction, UserId};

use super::{solve_with_assignment, Selector, SolverConfig};

/// Per subcarrier, the user of `dir` maximizing `α_i |h_{i,i}(f)|²`; ties go to the lowest id.
pub fn max_gain_user(h: &ChannelSet, alpha: &FairnessWeights, dir: Direction, f: usize) -> UserId {
    let mut best = None::<(UserId, f64)>;
    for i in h.users.of(dir) {
        let score = alpha.get(i) * h.direct_sq(i, f);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    best.expect("direction has at least one user").0
}

pub fn max_gain_map(h: &ChannelSet, alpha: &FairnessWeights) -> StrongUserMap {
    let nf = h.num_subcarriers;
    StrongUserMap {
        uplink: (0..nf).map(|f| max_gain_user(h, alpha, Direction::Uplink, f)).collect(),
        downlink: (0..nf)
            .map(|f| max_gain_user(h, alpha, Direction::Downlink, f))
            .collect(),
    }
}

/// Pick one strong uplink and one strong downlink user per subcarrier.
///
/// `MaxGain` is the direct argmax. `OmaWmmse` assigns users the same way,
/// runs the power-only loop with every other user switched off, and keeps the
/// assigned users.
pub fn select_strong_users(
    h: &ChannelSet,
    alpha: &FairnessWeights,
    budgets: &Budgets,
    cfg: &SolverConfig,
) -> Result<StrongUserMap> {
    let assigned = max_gain_map(h, alpha);
    match cfg.selector {
        Selector::MaxGain => Ok(assigned),
        Selector::OmaWmmse => {
            let run = solve_with_assignment(h, alpha, budgets, cfg, &assigned)?;
            Ok(run.final_state.strong)
        }
    }
}
