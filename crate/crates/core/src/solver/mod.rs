//! Time integration of the dissipative active-scalar equation and the
//! bookkeeping built on stored trajectories.

mod config;
mod energy;
mod init;
mod integrator;
mod scaling;
mod trajectory;

pub use config::SimConfig;
pub use energy::{energy_balance_residual, l2_series, linf_series, max_increase};
pub use init::random_band_limited;
pub use integrator::{step, SimState};
pub use scaling::{pde_residual, rescale_field, rescale_solution, rescale_solution_at};
pub use trajectory::{run, TrajectoryStore, GROWTH_LIMIT};

