//! Spin squeezing and pairwise entanglement of a one-axis twisted spin
//! ensemble sent through a decoherence channel that is sandwiched between a
//! weak measurement and its reversal.

pub mod channels;
pub mod error;
pub mod initial_state;
pub mod metrics;
pub mod oracle;
pub mod sweep;
pub mod verify;

pub use channels::{solve_strengths, ChannelKind, Knob, ProtectedChannel, Strength};
pub use error::{Error, Result};
pub use initial_state::{CorrelationSet, DickeState, SystemConfig};
pub use metrics::SqueezingReport;
