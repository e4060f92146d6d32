//! WMMSE power allocation for multicarrier NOMA full-duplex single-cell systems.
//!
//! The crate is organized around the pipeline of an experiment:
//!
//! * [`channel`]: cell drops, channel realizations and fairness weights,
//! * [`model`]: post-SIC interference sets, SINR, rates, MSE and SIC feasibility,
//! * [`wmmse`]: strong-user selection and the three-block WMMSE solver,
//! * [`baselines`]: OMA half/full-duplex allocators and a brute-force grid oracle,
//! * [`montecarlo`]: seeded, paired multi-trial sweeps,
//! * [`config`], [`report`] and [`cli`]: the file formats and subcommands of the
//!   `nomafd` binary.
//!
//! ```
//! use nomafd::channel::{fairness_weights, generate_channels, generate_scenario, ScenarioConfig};
//! use nomafd::wmmse::{solve, SolverConfig};
//!
//! let cfg = ScenarioConfig::default();
//! let scenario = generate_scenario(&cfg, 7).unwrap();
//! let h = generate_channels(&scenario).unwrap();
//! let alpha = fairness_weights(&scenario);
//! let run = solve(&h, &alpha, &cfg.budgets(), &SolverConfig::default(), None).unwrap();
//! assert!(run.objective() > run.initial_objective);
//! ```

pub mod baselines;
pub mod channel;
pub mod cli;
pub mod config;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod report;
pub mod units;
pub mod users;
pub mod wmmse;

pub use error::{Error, Result};
