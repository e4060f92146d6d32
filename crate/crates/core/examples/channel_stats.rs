//! Draw cells and summarize the generated geometry and gains.
//!
//!     cargo run --release --example channel_stats -- [cells]

use nomafd::channel::{generate_channels, generate_scenario, ScenarioConfig};
use nomafd::units::linear_to_db;

fn summary(name: &str, mut xs: Vec<f64>) {
    xs.sort_by(f64::total_cmp);
    let q = |p: f64| xs[((xs.len() - 1) as f64 * p).round() as usize];
    println!(
        "{name:<28} n={:<6} p10 {:8.1}  median {:8.1}  p90 {:8.1}",
        xs.len(),
        q(0.1),
        q(0.5),
        q(0.9)
    );
}

fn main() -> nomafd::Result<()> {
    let cells: u64 = std::env::args()
        .nth(1)
        .map_or(Ok(200), |s| s.parse())
        .expect("cells must be an integer");
    let cfg = ScenarioConfig::default();
    let noise = cfg.noise_power_w();
    let (mut dist, mut direct, mut cross, mut si) = (vec![], vec![], vec![], vec![]);
    for seed in 0..cells {
        let s = generate_scenario(&cfg, seed)?;
        let h = generate_channels(&s)?;
        for i in h.users.all() {
            dist.push(s.distance(i));
            for f in 0..h.num_subcarriers {
                direct.push(linear_to_db(h.direct_sq(i, f) / noise));
            }
        }
        for u in h.users.uplink() {
            for d in h.users.downlink() {
                for f in 0..h.num_subcarriers {
                    cross.push(linear_to_db(h.gain_sq(u, d, f) / noise));
                }
            }
        }
        for f in 0..h.num_subcarriers {
            si.push(linear_to_db(h.self_interference[f].norm_sqr() / noise));
        }
    }
    println!(
        "{cells} cells, radius {} m, min distance {} m\n",
        cfg.cell_radius_m, cfg.min_distance_m
    );
    summary("user distance [m]", dist);
    summary("direct gain / noise [dB]", direct);
    summary("UL->DL cross gain / noise [dB]", cross);
    summary("residual SI / noise [dB]", si);
    Ok(())
}
