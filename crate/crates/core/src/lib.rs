//! Stochastic unit commitment with variable-impedance transmission lines.
//!
//! The crate is `no_std` with `alloc`. File formats, the command line and the
//! bundled system data live in the `gridflex` companion crate.

#![no_std]

extern crate alloc;

pub mod milp;
pub mod grid;
pub mod rts96;
pub mod renewables;
pub mod facts;
pub mod suc;
pub mod metrics;
