//! Simulation and analysis of charge-control protocols for green wireless
//! power transfer networks.

pub mod cli;
pub mod engine;
pub mod metrics;
pub mod model;
pub mod optimize;
pub mod par;
pub mod protocols;
pub mod radio;
pub mod time;
