//! Spin squeezing of one-axis-twisted qubit ensembles under Markovian and
//! non-Markovian per-qubit decoherence.

pub mod cli;
pub mod death;
pub mod error;
pub mod io;
pub mod kappa;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod squeezing;
pub mod verify;

pub use error::{Error, Result};
