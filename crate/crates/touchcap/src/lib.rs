//! Command-line front end for the `touchcap-core` sensor models: device
//! configuration, C–P sweeps, plate-solver validation, calibration fits,
//! mode segmentation and servo-angle mapping.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;

pub use config::DeviceConfig;
pub use error::CliError;
