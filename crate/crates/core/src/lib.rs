//! Simulation and qualitative analysis of the third-order rational system
//!
//! ```text
//! x[n+1] = alpha + y[n]^p / y[n-2]^p
//! y[n+1] = alpha + x[n]^q / x[n-2]^q
//! ```
//!
//! with `alpha, p, q > 0` and positive initial values. The crate covers
//! forward iteration ([`dynamics`]), semi-cycle and oscillation analysis
//! ([`analysis`]), explicit boundedness envelopes ([`bounds`]), local and
//! global stability of the equilibrium `(alpha + 1, alpha + 1)`
//! ([`stability`]), and the convergence rate of converging orbits
//! ([`convergence`]).

pub mod analysis;
pub mod bounds;
pub mod convergence;
pub mod dynamics;
pub mod error;
pub mod report;
pub mod scenario;
pub mod stability;

pub use dynamics::{
    equilibrium, simulate, step, Equilibrium, InitialConditions, Orbit, Params, Window,
};
pub use error::{Error, Result};
pub use scenario::{load_scenario, Scenario, SweepSpec};
