//! Study runner, file formats and command line for the stochastic unit
//! commitment core in `gridflex-core`.

pub mod clock;
pub mod data;
pub mod external;
pub mod io;
pub mod report;
pub mod study;

pub use gridflex_core as core;
