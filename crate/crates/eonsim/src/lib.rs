//! Host side of the simulator: JSON configuration files, the bundled NSFNet
//! fixtures, console output and multi-load sweeps.
//!
//! The simulation itself lives in [`eonsim_core`], which is re-exported as
//! [`core`].

pub use eonsim_core as core;

pub mod console;
pub mod fixtures;
pub mod io;
pub mod sweep;
