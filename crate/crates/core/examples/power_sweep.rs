//! Mean weighted sum rate per subcarrier against the downlink budget.
//!
//!     cargo run --release --example power_sweep -- [trials]

use nomafd::montecarlo::{run_sweep, Algorithm, SweepSpec, SweptParameter};

fn main() -> nomafd::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .map_or(Ok(40), |s| s.parse())
        .expect("trials must be an integer");
    let spec = SweepSpec {
        swept_parameter: SweptParameter::PDDbm,
        values: vec![10.0, 14.0, 20.0, 24.0, 30.0],
        trials_per_point: trials,
        seed0: 2024,
        ..Default::default()
    };
    let result = run_sweep(&spec)?;
    assert!(result.is_paired());

    print!("{:>8}", "P_D[dBm]");
    for a in &spec.algorithms {
        print!("  {:>24}", a.label());
    }
    println!();
    for &v in &spec.values {
        print!("{v:>8}");
        for row in result.summary.iter().filter(|r| r.sweep_value == v) {
            print!("  {:>15.3} ± {:<6.3}", row.mean_bpshz, row.stderr);
        }
        println!();
    }
    let wmmse_iters: Vec<String> = result
        .summary
        .iter()
        .filter(|r| r.algorithm == Algorithm::Wmmse)
        .map(|r| format!("{:.0}", r.median_iterations.unwrap_or(f64::NAN)))
        .collect();
    println!("\nmedian WMMSE iterations per point: {}", wmmse_iters.join(", "));
    Ok(())
}
