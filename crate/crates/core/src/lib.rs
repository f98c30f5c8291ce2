//! Pseudospectral laboratory for the BBM and BBM-KP equations on periodic
//! boxes, with diagnostics for the transverse limit `y → ±∞` of BBM-KP
//! solutions.

pub mod bbm;
pub mod bbmkp;
pub mod error;
pub mod harness;
pub mod limit;
pub mod scenario;
pub mod spectral;
pub mod stepping;

pub use error::{Error, Result};
