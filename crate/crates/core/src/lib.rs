//! Near-linear-time robust linear regression under adversarial corruption.
//!
//! The estimators reweight per-sample gradients with approximate solutions
//! of a capped-simplex eigenvalue program, solved through a packing SDP.
//! See the README for a tour of the modules.

pub mod adversary;
pub mod cli;
pub mod datagen;
pub mod dataset;
pub mod error;
pub mod gradest;
pub mod linalg;
pub mod lower_bound;
pub mod packsdp;
pub mod oracle;
pub mod preprocess;
pub mod regress;
pub mod rng;
pub mod spectral;
pub mod subgauss;
pub mod weights;

pub use error::{Error, Result};
