//! Error exponents and capacity of discrete memoryless channels via
//! Arimoto's alternating maximization, plus a Monte Carlo harness for the
//! favorite-type (natural type selection) interpretation of one Arimoto
//! step.
//!
//! All logarithms are natural; rates and exponents are in nats.
//!
//! ```
//! use gallager_forge::{arimoto, dmc::{Channel, Distribution}};
//!
//! let ch = Channel::bsc(0.2).unwrap();
//! let q0 = Distribution::new(vec![0.1, 0.9]).unwrap();
//! let trace = arimoto::solve(0.1, &q0, &ch, 1e-9, 10_000).unwrap();
//! assert!((trace.final_input()[0] - 0.5).abs() < 1e-8);
//! ```

pub mod arimoto;
pub mod cli;
pub mod dmc;
pub mod error;
pub mod exponents;
mod numeric;
pub mod nts;
pub mod oracle;

pub use error::{Error, Result};
