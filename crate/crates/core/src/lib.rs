//! Spin squeezing and pairwise entanglement of EIT dark states.
//!
//! The crate evaluates closed forms for an `N`-atom ensemble holding `n`
//! dark-state polaritons, evolves them through amplitude, phase and
//! depolarizing noise, composes the storage protocol's time traces, and
//! cross-checks everything against a brute-force state-vector oracle.

pub mod channels;
pub mod cli;
pub mod error;
pub mod model;
pub mod oracle;
pub mod pairwise;
pub mod protocol;
pub mod specfun;
pub mod squeezing;

pub use channels::{ChannelKind, ChannelStrength};
pub use error::{Error, Result};
pub use model::{CollectiveMoments, ModelParams, PhotonWeights};
pub use pairwise::TwoQubitState;
pub use squeezing::SqueezingReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
