//! Numerical laboratory for a multi-sender cheap-talk game.
//!
//! Senders privately observe noisy binary signals about an unknown state and
//! simultaneously approve or reject a proposal; a receiver observes the
//! approval tally and chooses between the proposal and the status quo. The
//! crate enumerates the symmetric equilibria of this game, orders them by
//! welfare, verifies the information-transmission thresholds and limit
//! behavior numerically, checks the committed-mechanism constructions, and
//! cross-validates every analytic quantity against brute-force and seeded
//! Monte Carlo oracles.

pub mod asympt;
pub mod bestresp;
pub mod equilibrium;
pub mod largedev;
pub mod mc;
pub mod mechanism;
pub mod model;
pub mod prob;
pub mod report;
pub mod verify;

pub use model::{conflict_profile, ConflictProfile, GameSpec, SenderStrategy};
