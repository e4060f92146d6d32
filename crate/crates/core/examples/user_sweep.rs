//! Mean weighted sum rate per subcarrier against the number of users
//! per direction (M = N).
//!
//!     cargo run --release --example user_sweep -- [trials]

use nomafd::montecarlo::{run_sweep, SweepSpec, SweptParameter};

fn main() -> nomafd::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .map_or(Ok(30), |s| s.parse())
        .expect("trials must be an integer");
    let spec = SweepSpec {
        swept_parameter: SweptParameter::NumUsers,
        values: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        trials_per_point: trials,
        seed0: 77,
        ..Default::default()
    };
    let result = run_sweep(&spec)?;
    println!("M = N  algorithm            mean [b/s/Hz]  stderr  failures");
    for row in &result.summary {
        println!(
            "{:>5}  {:<19}  {:13.3}  {:6.3}  {}",
            row.sweep_value,
            row.algorithm.label(),
            row.mean_bpshz,
            row.stderr,
            row.failures
        );
    }
    Ok(())
}
