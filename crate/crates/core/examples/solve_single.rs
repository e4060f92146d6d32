//! Solve one default cell and print the allocation.
//!
//!     cargo run --release --example solve_single -- [seed]

use nomafd::channel::{fairness_weights, generate_channels, generate_scenario, ScenarioConfig};
use nomafd::units::{nats_to_bits, watt_to_dbm};
use nomafd::users::Direction;
use nomafd::wmmse::{solve, weak_user_sparsity, SolverConfig};

fn main() -> nomafd::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(Ok(1), |s| s.parse())
        .expect("seed must be an integer");
    let cfg = ScenarioConfig::default();
    let scenario = generate_scenario(&cfg, seed)?;
    let h = generate_channels(&scenario)?;
    let alpha = fairness_weights(&scenario);
    let run = solve(&h, &alpha, &cfg.budgets(), &SolverConfig::default(), None)?;

    println!(
        "seed {seed}: {:.3} -> {:.3} bits/s/Hz per subcarrier after {} iterations (converged: {})",
        nats_to_bits(run.initial_objective) / cfg.num_subcarriers as f64,
        nats_to_bits(run.objective()) / cfg.num_subcarriers as f64,
        run.iterations_used,
        run.converged,
    );
    let st = &run.final_state;
    println!("\nuser  dir  dist[m]  alpha   rate[b/s/Hz]  powers[dBm] per subcarrier");
    for i in h.users.all() {
        let dir = h.users.direction(i)?;
        let powers: Vec<String> = st.p.p[i]
            .iter()
            .map(|&p| {
                if p > 1e-10 {
                    format!("{:6.1}", watt_to_dbm(p))
                } else {
                    "     -".into()
                }
            })
            .collect();
        println!(
            "{i:>4}  {}  {:7.1}  {:.3}  {:12.3}  {}",
            &dir.as_str()[..2],
            scenario.distance(i),
            alpha.get(i),
            nats_to_bits(run.per_user_rates[i]),
            powers.join(" ")
        );
    }
    println!("\nstrong uplink   {:?}", st.strong.uplink);
    println!("strong downlink {:?}", st.strong.downlink);
    let weak: Vec<usize> = (0..cfg.num_subcarriers)
        .map(|f| weak_user_sparsity(&run, 1e-10)[&(Direction::Downlink, f)])
        .collect();
    println!("active weak downlink users per subcarrier {weak:?}");
    println!("multipliers: mu_d = {:.4e}, mu_u = {:?}", st.mu_d, st.mu_u);
    Ok(())
}
