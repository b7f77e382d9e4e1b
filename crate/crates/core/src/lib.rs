//! Multipath traffic splitting over wireless networks with reverse-carpooling
//! network coding.
//!
//! Flows split their load over several paths; where two flows cross a relay
//! in opposite directions the relay can XOR their packets into one broadcast
//! (a *hyper-link*). The crate provides the cost model, the two-timescale
//! decoupled dynamics (BNN traffic splitting plus capacity gradient control),
//! and the comparison baselines: coupled dynamics, no coding, and an exact
//! linear-programming optimum.

pub mod baselines;
pub mod cost;
pub mod dynamics;
pub mod error;
pub mod generate;
pub mod scenario;
pub mod simplex;
pub mod topology;

pub use cost::{CapacityState, SmoothingParams, SplitState, SystemState};
pub use error::{Error, Result};
pub use scenario::{RunParams, ScenarioConfig};
pub use topology::{Flow, HyperLink, HyperPath, Network, Scenario, Violation};
