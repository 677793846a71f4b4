//! Batch front end for `bps_vortex`: config files in, artifacts and exit
//! codes out.

pub mod config;
pub mod output;
pub mod run;
