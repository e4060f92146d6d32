//! Build a channel set by hand instead of drawing one, and inspect the
//! per-link quantities the solver works with.
//!
//!     cargo run --example custom_channels

use nomafd::channel::{Budgets, ChannelSet, FairnessWeights};
use nomafd::model::{gamma_sic, sinr, StrongUserMap};
use nomafd::units::linear_to_db;
use nomafd::users::UserSet;
use nomafd::wmmse::{solve_with_strong, SolverConfig};
use num_complex::Complex64;

fn main() -> nomafd::Result<()> {
    // one uplink user (id 0), two downlink users (ids 1 and 2), two subcarriers
    let users = UserSet::new(1, 2)?;
    let mut h = ChannelSet::zeros(users, 2, 1e-13);
    let c = |re: f64, im: f64| Complex64::new(re, im);
    for f in 0..2 {
        h.set_direct(0, f, c(3e-4, 1e-4))
            .set_direct(1, f, c(8e-4, 0.0))
            .set_direct(2, f, c(1e-4, -1e-4))
            .set_cross(0, 1, f, c(2e-6, 0.0))
            .set_cross(0, 2, f, c(0.0, 5e-6))
            .set_self_interference(f, c(1e-6, 0.0));
    }
    let alpha = FairnessWeights::uniform(users);
    let budgets = Budgets {
        uplink_w: 0.025,
        downlink_w: 0.1,
    };
    // user 1 has the better downlink, so it decodes and cancels user 2
    let strong = StrongUserMap::new(&users, vec![0, 0], vec![1, 1])?;
    let run = solve_with_strong(
        &h,
        &alpha,
        &budgets,
        &SolverConfig::default(),
        strong.clone(),
        None,
        &mut |_| {},
    )?;
    let p = &run.final_state.p;
    for f in 0..2 {
        println!("subcarrier {f}");
        for i in users.all() {
            println!(
                "  user {i}: P = {:.4e} W, SINR = {:6.2} dB",
                p.get(i, f),
                linear_to_db(sinr(i, f, p, &h, &strong))
            );
        }
        println!("  Γ(weak 2, strong 1) = {:.3e}", gamma_sic(2, 1, f, p, &h)?);
    }
    Ok(())
}
