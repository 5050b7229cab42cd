//! Independent certification of the closed-form solution: seeded Monte Carlo
//! play-outs and discretized best-response oracles.

mod hull;
mod oracle;
mod simulate;

pub use hull::{upper_concave_hull, LowerEnvelope};
pub use oracle::{
    blue_best_response, exploitability, red_best_response, red_grid, red_payoff_curve,
    BestResponseReport, Exploitability, DEFAULT_GRID_SIZE, MIN_GRID_SIZE,
};
pub use simulate::{monte_carlo_value, monte_carlo_wins, sample_allocation, SimConfig, BATCH_SIZE};
