//! RF-chain count optimization and antenna selection for a single-cell
//! downlink massive-MIMO base station with zero-forcing precoding and a
//! per-chain circuit power cost.

pub mod allocation;
pub mod channel;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod precoder;
pub mod selection;

pub use error::{Error, Result};
