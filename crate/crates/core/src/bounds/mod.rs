//! Verification campaign: random and structured instances, one
//! [`BoundReport`] per checked inequality, and a runner that executes
//! them concurrently with deterministic output order.

mod campaign;
mod config;
mod generate;
mod report;
mod verify;

pub use campaign::*;
pub use config::*;
pub use generate::*;
pub use report::*;
pub use verify::*;
