//! WMMSE against exhaustive grid search on one-uplink, one-downlink,
//! single-subcarrier cells.
//!
//!     cargo run --release --example oracle_gap -- [instances] [grid_points]

use nomafd::baselines::grid_oracle;
use nomafd::channel::{fairness_weights, generate_channels, generate_scenario, ScenarioConfig};
use nomafd::wmmse::{solve, SolverConfig};

fn main() -> nomafd::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|s| s.parse::<usize>().expect("integer arguments"));
    let n = args.next().unwrap_or(20) as u64;
    let grid = args.next().unwrap_or(200);
    let cfg = ScenarioConfig {
        num_uplink: 1,
        num_downlink: 1,
        num_subcarriers: 1,
        ..Default::default()
    };
    let single = SolverConfig {
        biased_starts: false,
        ..Default::default()
    };
    println!("seed   oracle  wmmse(1 start)  wmmse   gap");
    let mut worst: f64 = f64::NEG_INFINITY;
    for seed in 0..n {
        let s = generate_scenario(&cfg, seed)?;
        let h = generate_channels(&s)?;
        let alpha = fairness_weights(&s);
        let b = cfg.budgets();
        let oracle = grid_oracle(&h, &alpha, &b, grid)?.weighted_sum_rate;
        let one = solve(&h, &alpha, &b, &single, None)?.objective();
        let multi = solve(&h, &alpha, &b, &SolverConfig::default(), None)?.objective();
        let gap = (oracle - multi) / oracle;
        worst = worst.max(gap);
        println!("{seed:>4}  {oracle:7.3}  {one:14.3}  {multi:6.3}  {:+.1e}", gap);
    }
    println!("\nworst relative gap {worst:+.2e} (grid of {grid} intervals per dimension)");
    Ok(())
}
