//! Exhaustive search over quantized powers for tiny instances.
//!
//! Every (user, subcarrier) power takes a value `k * budget / G`,
//! `k = 0..=G`, with `budget` the per-user uplink budget or the pooled
//! downlink budget. Points breaking a budget are skipped, as are points where
//! an active weak/strong downlink pair has `Γ < 0`. Strong users are enumerated
//! too. Grids with `G` and `2G` intervals are nested, so refining never lowers
//! the result.

use rayon::prelude::*;

use crate::channel::{Budgets, ChannelSet, FairnessWeights};
use crate::error::{Error, Result};
use crate::model::{self, PowerVector, StrongUserMap, EPSILON_ACTIVE};
use crate::users::{Direction, UserId};

use super::{Assignment, BaselineResult, ORACLE_LABEL};

pub const MAX_ORACLE_DIMENSIONS: usize = 4;
pub const MAX_ORACLE_GRID_POINTS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
struct Best {
    value: f64,
    map_index: usize,
    levels: Vec<usize>,
}

impl Best {
    /// Higher value wins; ties go to the lexicographically smaller point.
    fn better(self, other: Best) -> Best {
        match self.value.total_cmp(&other.value) {
            std::cmp::Ordering::Greater => self,
            std::cmp::Ordering::Less => other,
            std::cmp::Ordering::Equal => {
                if (self.map_index, &self.levels) <= (other.map_index, &other.levels) {
                    self
                } else {
                    other
                }
            }
        }
    }
}

struct Search<'a> {
    h: &'a ChannelSet,
    alpha: &'a FairnessWeights,
    entries: Vec<(UserId, usize)>,
    steps: Vec<f64>,
    grid: usize,
}

impl Search<'_> {
    fn feasible_sic(&self, p: &PowerVector, strong: &StrongUserMap) -> bool {
        let users = &self.h.users;
        (0..self.h.num_subcarriers).all(|f| {
            let s = strong.downlink[f];
            if p.get(s, f) <= EPSILON_ACTIVE {
                return true;
            }
            users
                .downlink()
                .filter(|&k| k != s && p.get(k, f) > EPSILON_ACTIVE)
                .all(|k| model::gamma_sic(k, s, f, p, self.h).expect("distinct pair") >= 0.0)
        })
    }

    /// Depth-first enumeration with budget pruning. `used[u]` counts grid
    /// steps spent by uplink user `u`; the last slot is the pooled downlink.
    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        depth: usize,
        levels: &mut Vec<usize>,
        used: &mut Vec<usize>,
        p: &mut PowerVector,
        strong: &StrongUserMap,
        map_index: usize,
        best: &mut Option<Best>,
    ) {
        if depth == self.entries.len() {
            if !self.feasible_sic(p, strong) {
                return;
            }
            let value = model::weighted_sum_rate(p, self.h, strong, self.alpha);
            let cand = Best {
                value,
                map_index,
                levels: levels.clone(),
            };
            *best = Some(match best.take() {
                Some(b) => b.better(cand),
                None => cand,
            });
            return;
        }
        let (i, f) = self.entries[depth];
        let slot = if self.h.users.is_uplink(i) { i } else { used.len() - 1 };
        let room = self.grid - used[slot];
        for k in 0..=room {
            levels.push(k);
            used[slot] += k;
            p.set(i, f, k as f64 * self.steps[depth]);
            self.walk(depth + 1, levels, used, p, strong, map_index, best);
            used[slot] -= k;
            levels.pop();
        }
        p.set(i, f, 0.0);
    }
}

fn strong_maps(h: &ChannelSet) -> Vec<StrongUserMap> {
    let users = &h.users;
    let mut maps = vec![StrongUserMap {
        uplink: Vec::new(),
        downlink: Vec::new(),
    }];
    for _ in 0..h.num_subcarriers {
        maps = maps
            .into_iter()
            .flat_map(|m| {
                users.uplink().flat_map(move |u| {
                    let m = m.clone();
                    users.downlink().map(move |d| {
                        let mut next = m.clone();
                        next.uplink.push(u);
                        next.downlink.push(d);
                        next
                    })
                })
            })
            .collect();
    }
    maps
}

/// Best quantized allocation; `grid_points` is the number of intervals per dimension.
pub fn grid_oracle(
    h: &ChannelSet,
    alpha: &FairnessWeights,
    budgets: &Budgets,
    grid_points: usize,
) -> Result<BaselineResult> {
    h.validate()?;
    budgets.validate()?;
    let users = &h.users;
    let nf = h.num_subcarriers;
    let dims = users.len() * nf;
    if dims > MAX_ORACLE_DIMENSIONS {
        return Err(Error::OracleTooLarge {
            dims,
            max: MAX_ORACLE_DIMENSIONS,
        });
    }
    if grid_points == 0 || grid_points > MAX_ORACLE_GRID_POINTS {
        return Err(Error::OracleGrid {
            got: grid_points,
            max: MAX_ORACLE_GRID_POINTS,
        });
    }

    let entries: Vec<(UserId, usize)> = users.all().flat_map(|i| (0..nf).map(move |f| (i, f))).collect();
    let steps = entries
        .iter()
        .map(|&(i, _)| {
            let budget = if users.is_uplink(i) {
                budgets.uplink_w
            } else {
                budgets.downlink_w
            };
            budget / grid_points as f64
        })
        .collect();
    let search = Search {
        h,
        alpha,
        entries,
        steps,
        grid: grid_points,
    };
    let maps = strong_maps(h);

    // one task per (strong map, first coordinate)
    let tasks: Vec<(usize, usize)> = (0..maps.len())
        .flat_map(|m| (0..=grid_points).map(move |k| (m, k)))
        .collect();
    let best = tasks
        .par_iter()
        .filter_map(|&(m, k0)| {
            let mut levels = Vec::with_capacity(dims);
            let mut used = vec![0; users.num_uplink + 1];
            let mut p = PowerVector::zeros(users, nf);
            let (i0, f0) = search.entries[0];
            let slot = if users.is_uplink(i0) { i0 } else { users.num_uplink };
            used[slot] = k0;
            levels.push(k0);
            p.set(i0, f0, k0 as f64 * search.steps[0]);
            let mut best = None;
            search.walk(1, &mut levels, &mut used, &mut p, &maps[m], m, &mut best);
            best
        })
        .reduce_with(Best::better)
        .expect("the all-zero point is always feasible");

    let strong = maps[best.map_index].clone();
    let mut powers = PowerVector::zeros(users, nf);
    for ((i, f), (k, step)) in search.entries.iter().zip(best.levels.iter().zip(&search.steps)) {
        powers.set(*i, *f, *k as f64 * step);
    }
    let assignment = (0..nf)
        .flat_map(|f| {
            Direction::BOTH.map(|dir| Assignment {
                direction: dir,
                subcarrier: f,
                user: Some(strong.strong(dir, f)),
            })
        })
        .collect();
    Ok(BaselineResult {
        label: ORACLE_LABEL.into(),
        per_user_rates: model::user_rates(&powers, h, &strong),
        weighted_sum_rate: best.value,
        assignment,
        powers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{fairness_weights, generate_channels, generate_scenario, ScenarioConfig};
    use crate::users::UserSet;
    use num_complex::Complex64;

    fn tiny(seed: u64, m: usize, n: usize, nf: usize) -> (ChannelSet, FairnessWeights, Budgets) {
        let cfg = ScenarioConfig {
            num_uplink: m,
            num_downlink: n,
            num_subcarriers: nf,
            ..Default::default()
        };
        let s = generate_scenario(&cfg, seed).unwrap();
        (generate_channels(&s).unwrap(), fairness_weights(&s), cfg.budgets())
    }

    #[test]
    fn lone_active_user_takes_full_budget() {
        let users = UserSet::new(1, 1).unwrap();
        let mut h = ChannelSet::zeros(users, 1, 1e-13);
        h.set_direct(0, 0, Complex64::new(1e-4, 0.0));
        let alpha = FairnessWeights { alpha: vec![1.0, 0.0] };
        let budgets = Budgets {
            uplink_w: 0.02,
            downlink_w: 0.1,
        };
        let r = grid_oracle(&h, &alpha, &budgets, 50).unwrap();
        assert!((r.powers.get(0, 0) - 0.02).abs() < 1e-15);
    }

    #[test]
    fn rejects_large_instances() {
        let (h, alpha, budgets) = tiny(0, 3, 3, 1);
        assert!(matches!(
            grid_oracle(&h, &alpha, &budgets, 10),
            Err(Error::OracleTooLarge { dims: 6, .. })
        ));
        let (h, alpha, budgets) = tiny(0, 1, 1, 1);
        assert!(grid_oracle(&h, &alpha, &budgets, 0).is_err());
        assert!(grid_oracle(&h, &alpha, &budgets, 401).is_err());
    }

    #[test]
    fn refinement_never_hurts() {
        for seed in 0..5 {
            let (h, alpha, budgets) = tiny(seed, 1, 1, 1);
            let coarse = grid_oracle(&h, &alpha, &budgets, 100).unwrap();
            let fine = grid_oracle(&h, &alpha, &budgets, 200).unwrap();
            assert!(fine.weighted_sum_rate >= coarse.weighted_sum_rate);
        }
        let (h, alpha, budgets) = tiny(3, 1, 2, 1);
        let coarse = grid_oracle(&h, &alpha, &budgets, 8).unwrap();
        let fine = grid_oracle(&h, &alpha, &budgets, 16).unwrap();
        assert!(fine.weighted_sum_rate >= coarse.weighted_sum_rate);
    }

    #[test]
    fn result_is_feasible_and_consistent() {
        let (h, alpha, budgets) = tiny(4, 1, 2, 1);
        let r = grid_oracle(&h, &alpha, &budgets, 12).unwrap();
        assert!(r.powers.user_total(0) <= budgets.uplink_w * (1.0 + 1e-12));
        assert!(r.powers.downlink_total(&h.users) <= budgets.downlink_w * (1.0 + 1e-12));
        let strong = StrongUserMap {
            uplink: vec![r.assignment[0].user.unwrap()],
            downlink: vec![r.assignment[1].user.unwrap()],
        };
        let v = model::weighted_sum_rate(&r.powers, &h, &strong, &alpha);
        assert_eq!(v, r.weighted_sum_rate);
        assert_eq!(strong_maps(&h).len(), 2);
    }
}
