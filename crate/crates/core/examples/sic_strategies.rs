//! The three ways of treating the downlink SIC condition, side by side.
//!
//!     cargo run --release --example sic_strategies -- [cells]

use nomafd::channel::{fairness_weights, generate_channels, generate_scenario, ScenarioConfig};
use nomafd::units::nats_to_bits;
use nomafd::wmmse::{solve, SicStrategy, SolverConfig};

fn main() -> nomafd::Result<()> {
    let cells: u64 = std::env::args()
        .nth(1)
        .map_or(Ok(30), |s| s.parse())
        .expect("cells must be an integer");
    let cfg = ScenarioConfig::default();
    println!("strategy     mean[b/s/Hz]  violated pairs  disabled entries  mean iterations");
    for strategy in [SicStrategy::Ignore, SicStrategy::Repair, SicStrategy::Subgradient] {
        let solver = SolverConfig {
            sic_strategy: strategy,
            ..Default::default()
        };
        let (mut wsr, mut violated, mut disabled, mut iters) = (0.0, 0, 0, 0);
        for seed in 0..cells {
            let s = generate_scenario(&cfg, seed)?;
            let h = generate_channels(&s)?;
            let run = solve(&h, &fairness_weights(&s), &cfg.budgets(), &solver, None)?;
            wsr += nats_to_bits(run.objective()) / cfg.num_subcarriers as f64;
            let tol = 1e-9 * h.noise() * h.max_gain_sq();
            violated += run.sic_residuals.iter().filter(|r| r.gamma < -tol).count();
            disabled += run.final_state.disabled.iter().flatten().filter(|d| **d).count();
            iters += run.iterations_used;
        }
        println!(
            "{:<11}  {:12.3}  {:14}  {:16}  {:15.1}",
            format!("{strategy:?}"),
            wsr / cells as f64,
            violated,
            disabled,
            iters as f64 / cells as f64
        );
    }
    Ok(())
}
