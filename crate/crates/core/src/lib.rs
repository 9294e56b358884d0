//! Entanglement between two spatially separated spin-1/2 BEC wells.
//!
//! [`adiabatic`] covers the ground and thermal states of the two-mode
//! Bose-Hubbard model, [`kerr`] the Kerr-evolved four-mode dynamic scheme,
//! and [`criteria`] the entanglement and squeezing measures used by both.
//! [`runner`] drives configured sweeps and writes tables.

pub mod adiabatic;
pub mod criteria;
pub mod error;
pub mod fock;
pub mod kerr;
pub mod runner;

pub use error::{Error, Result};
