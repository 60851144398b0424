//! Dense-coding capacities of bipartite quantum states and programmable
//! quantum gates, computed numerically.

mod error;
pub mod capacity;
pub mod channels;
pub mod cli;
pub mod optimize;
pub mod pqg;
pub mod qmath;
pub mod rng;
pub mod tol;

pub use error::{Error, Result};
