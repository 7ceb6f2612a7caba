//! Qutrit measurement-device-independent private query: state ensembles,
//! sifting rules, closed-form security analysis and a seeded protocol
//! simulator.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod io;
pub mod protocol;
pub mod qstate;
pub mod sift;

pub use error::{Error, Result};
pub use qstate::ProtocolParams;
