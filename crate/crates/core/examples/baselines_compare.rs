//! NOMA full duplex against the two OMA baselines on the same channels.
//!
//!     cargo run --release --example baselines_compare -- [cells]

use nomafd::baselines::{oma_fd_greedy, oma_hd_waterfill, HdSplit};
use nomafd::channel::{fairness_weights, generate_channels, generate_scenario, ScenarioConfig};
use nomafd::units::nats_to_bits;
use nomafd::wmmse::{solve, SolverConfig};

fn main() -> nomafd::Result<()> {
    let cells: u64 = std::env::args()
        .nth(1)
        .map_or(Ok(50), |s| s.parse())
        .expect("cells must be an integer");
    let cfg = ScenarioConfig::default();
    let solver = SolverConfig::default();
    let per_carrier = |nats: f64| nats_to_bits(nats) / cfg.num_subcarriers as f64;
    let (mut noma, mut fd, mut hd) = (0.0, 0.0, 0.0);
    let (mut beats_fd, mut beats_hd) = (0, 0);
    for seed in 0..cells {
        let s = generate_scenario(&cfg, seed)?;
        let h = generate_channels(&s)?;
        let alpha = fairness_weights(&s);
        let b = cfg.budgets();
        let w = per_carrier(solve(&h, &alpha, &b, &solver, None)?.objective());
        let f = per_carrier(oma_fd_greedy(&h, &alpha, &b, &solver)?.0.weighted_sum_rate);
        let d = per_carrier(oma_hd_waterfill(&h, &alpha, &b, HdSplit::Interleaved).weighted_sum_rate);
        noma += w;
        fd += f;
        hd += d;
        beats_fd += usize::from(w >= f);
        beats_hd += usize::from(w >= d);
    }
    let n = cells as f64;
    println!("mean weighted sum rate per subcarrier over {cells} cells [b/s/Hz]");
    println!("  NOMA-FD (WMMSE)   {:.3}", noma / n);
    println!("  OMA-FD (greedy)   {:.3}   NOMA ahead in {beats_fd}/{cells}", fd / n);
    println!("  OMA-HD (w-fill)   {:.3}   NOMA ahead in {beats_hd}/{cells}", hd / n);
    Ok(())
}
