//! How the weak downlink users on one subcarrier evolve over the iterations:
//! own SINR against the SINR of the same stream at the strong user.
//!
//!     cargo run --release --example iteration_trace -- [seed] [subcarrier]

use nomafd::channel::ScenarioConfig;
use nomafd::montecarlo::iteration_trace_experiment;
use nomafd::units::linear_to_db;
use nomafd::wmmse::SolverConfig;

fn main() -> nomafd::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|s| s.parse::<u64>().expect("integer arguments"));
    let seed = args.next().unwrap_or(18);
    let f = args.next().unwrap_or(0) as usize;
    // the bare iteration, so the weak users die out gradually
    let solver = SolverConfig {
        extrapolation: false,
        biased_starts: false,
        ..Default::default()
    };
    let t = iteration_trace_experiment(&ScenarioConfig::default(), seed, &solver, f)?;
    println!(
        "seed {seed}, subcarrier {f}, strong downlink user {}, {} iterations",
        t.strong_user,
        t.iterations.len()
    );
    println!("{:>5}  {:>4}  {:>10}  {:>10}", "iter", "user", "own[dB]", "cross[dB]");
    let n = t.iterations.len();
    for (k, samples) in t.iterations.iter().enumerate() {
        // sparse log spacing plus the last iteration
        if !(k < 4 || (k + 1).is_power_of_two() || k + 1 == n) {
            continue;
        }
        if samples.is_empty() {
            println!("{:>5}  (no active weak users)", k + 1);
        }
        for s in samples {
            println!(
                "{:>5}  {:>4}  {:>10.2}  {:>10.2}",
                k + 1,
                s.user,
                linear_to_db(s.own_sinr),
                linear_to_db(s.cross_sinr)
            );
        }
    }
    let p_strong = t.run.final_state.p.get(t.strong_user, f);
    println!("\nstrong user power at the end: {:.3e} W", p_strong);
    if p_strong <= solver.epsilon_active {
        println!("the strong user is silent, so no SIC is needed on this subcarrier");
    } else if let Some(last) = t.iterations.last() {
        let ok = last.iter().all(|s| s.dominated());
        println!("surviving weak users decodable at the strong user: {ok}");
    }
    for r in t.run.sic_residuals.iter().filter(|r| r.subcarrier == f) {
        println!("Γ(weak {}, strong {}) = {:.3e}", r.weak, r.strong, r.gamma);
    }
    Ok(())
}
