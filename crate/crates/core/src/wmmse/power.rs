//! Power block: closed-form per-entry powers plus multiplier bisection.
//!
//! With `g` and `w` fixed, each `P_{i,f} = v²` solves a scalar quadratic in
//! `v = √P`. Writing `a = α_i w_{i,f} Re(g_{i,f} h_{i,i})` and
//! `b = α_i w_{i,f} |g_{i,f} h_{i,i}|² + Σ_{t∈C(i,f)} α_t w_{t,f} |g_{t,f} h_{i,t}|²`,
//! the minimizer is `P = (a / (b + λ))²`, where `λ` collects the budget
//! multiplier and, for uplink users, the SIC multiplier terms.

use crate::channel::{Budgets, ChannelSet, FairnessWeights};
use crate::error::{Error, Result};
use crate::model::{gamma_sic_slope, is_interferer, PowerVector};
use crate::users::UserId;

use super::{AllocationState, SolverConfig};

/// Relative floor of the denominator, against its channel-driven part.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Output of one power block.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerUpdate {
    pub p: PowerVector,
    /// Downlink budget multiplier.
    pub mu_d: f64,
    /// Per uplink user budget multipliers, indexed by uplink id.
    pub mu_u: Vec<f64>,
}

/// One decoupled scalar term `(a / max(base + μ, floor))²`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Term {
    pub a: f64,
    pub base: f64,
    pub floor: f64,
}

impl Term {
    #[inline]
    fn power(&self, mu: f64) -> f64 {
        if self.a <= 0.0 {
            return 0.0;
        }
        let x = self.a / (self.base + mu).max(self.floor);
        x * x
    }
}

fn total(terms: &[Term], mu: f64) -> f64 {
    terms.iter().map(|t| t.power(mu)).sum()
}

/// Smallest `μ ≥ 0` whose powers fit the budget, with the budget met to
/// `tol` relative whenever `μ > 0`.
pub(crate) fn bisect_multiplier(terms: &[Term], budget: f64, tol: f64, max_steps: usize) -> Result<f64> {
    if total(terms, 0.0) <= budget {
        return Ok(0.0);
    }
    // every term is at most budget/n at this multiplier
    let n = terms.len() as f64;
    let mut hi = terms
        .iter()
        .filter(|t| t.a > 0.0)
        .map(|t| t.a * (n / budget).sqrt() + t.base.abs())
        .fold(0.0, f64::max);
    let mut grow = 0;
    while total(terms, hi) > budget {
        hi = hi * 2.0 + f64::MIN_POSITIVE;
        grow += 1;
        if grow > 2048 {
            return Err(Error::BisectionFailed {
                steps: grow,
                residual: (total(terms, hi) - budget) / budget,
            });
        }
    }
    // shrink to [hi/2, hi] first so the steps below buy relative precision
    // even when the root is many orders of magnitude under the bracket
    let mut lo = 0.5 * hi;
    while lo > 0.0 && total(terms, lo) <= budget {
        hi = lo;
        lo *= 0.5;
    }
    for _ in 0..max_steps {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(terms, mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let residual = (budget - total(terms, hi)) / budget;
    if residual > tol {
        return Err(Error::BisectionFailed {
            steps: max_steps,
            residual,
        });
    }
    Ok(hi)
}

/// Coefficient `a` and channel part of `b` for entry `(i, f)`.
fn coefficients(
    i: UserId,
    f: usize,
    state: &AllocationState,
    h: &ChannelSet,
    alpha: &FairnessWeights,
    weight_gain: &[Vec<f64>],
) -> (f64, f64) {
    let users = &h.users;
    let gh = state.g[i][f] * h.direct[i][f];
    let own = alpha.get(i) * state.w[i][f];
    let a = own * gh.re;
    let mut b = own * gh.norm_sqr();
    for t in users.all() {
        if is_interferer(i, t, f, &state.strong, users) {
            b += weight_gain[t][f] * h.gain_sq(i, t, f);
        }
    }
    (a, b)
}

/// `Σ_k μ_{k,f} Θ^{(k,i*)}_{i,f}` over pairs active in the previous iterate.
fn sic_term(i: UserId, f: usize, state: &AllocationState, h: &ChannelSet, eps: f64) -> f64 {
    let users = &h.users;
    let strong = state.strong.downlink[f];
    if state.p.get(strong, f) <= eps {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in users.downlink() {
        if k == strong || state.p.get(k, f) <= eps {
            continue;
        }
        let mu = state.mu_sic[users.downlink_index(k)][f];
        if mu > 0.0 {
            acc += mu * gamma_sic_slope(k, strong, i, f, h) / sic_scale(k, strong, f, h);
        }
    }
    acc
}

/// Normalization applied to `Γ_{k,i}(f)` before it enters the Lagrangian.
pub(crate) fn sic_scale(_k: UserId, strong: UserId, f: usize, h: &ChannelSet) -> f64 {
    (h.noise() * h.direct_sq(strong, f)).max(f64::MIN_POSITIVE)
}

/// Solve the power block for fixed `g`, `w` and SIC multipliers.
pub fn update_p(
    state: &AllocationState,
    h: &ChannelSet,
    alpha: &FairnessWeights,
    budgets: &Budgets,
    cfg: &SolverConfig,
) -> Result<PowerUpdate> {
    let users = &h.users;
    let nf = h.num_subcarriers;
    let weight_gain: Vec<Vec<f64>> = users
        .all()
        .map(|t| {
            (0..nf)
                .map(|f| alpha.get(t) * state.w[t][f] * state.g[t][f].norm_sqr())
                .collect()
        })
        .collect();

    let term = |i: UserId, f: usize, sic: f64| -> Term {
        if state.is_disabled(i, f) {
            return Term {
                a: 0.0,
                base: 0.0,
                floor: 1.0,
            };
        }
        let (a, b) = coefficients(i, f, state, h, alpha, &weight_gain);
        // the SIC Lagrangian enters as -μ Γ, hence the subtraction
        Term {
            a,
            base: b - sic,
            floor: DENOMINATOR_FLOOR * b,
        }
    };

    let mut p = PowerVector::zeros(users, nf);
    let mut mu_u = vec![0.0; users.num_uplink];
    for i in users.uplink() {
        let terms: Vec<Term> = (0..nf)
            .map(|f| {
                let sic = match cfg.sic_strategy {
                    super::SicStrategy::Subgradient => sic_term(i, f, state, h, cfg.epsilon_active),
                    _ => 0.0,
                };
                term(i, f, sic)
            })
            .collect();
        let mu = bisect_multiplier(&terms, budgets.uplink_w, cfg.bisection_tol, cfg.bisection_max_steps)?;
        mu_u[i] = mu;
        for (f, t) in terms.iter().enumerate() {
            p.set(i, f, t.power(mu));
        }
    }

    let dl: Vec<(UserId, usize)> = users.downlink().flat_map(|d| (0..nf).map(move |f| (d, f))).collect();
    let terms: Vec<Term> = dl.iter().map(|&(d, f)| term(d, f, 0.0)).collect();
    let mu_d = bisect_multiplier(&terms, budgets.downlink_w, cfg.bisection_tol, cfg.bisection_max_steps)?;
    for (&(d, f), t) in dl.iter().zip(&terms) {
        p.set(d, f, t.power(mu_d));
    }

    Ok(PowerUpdate { p, mu_d, mu_u })
}
