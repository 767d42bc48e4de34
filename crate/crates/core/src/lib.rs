//! Simulation and detection of Byzantine relays in a Gaussian two-hop relay network
//! with a secured direct link.
//!
//! The source sends `S ∈ {+1, −1}`. The relay observes `U = h1·S + N`, the destination
//! observes `X = h3·S + N` on the direct link and `Y = h2·V + N` from the relay, where
//! `V` is whatever the relay chooses to forward. The detector compares the empirical
//! conditional CDF of `Y` given the quantized `X` against the honest-relay reference
//! and flags the relay when the mean absolute gap `D^n` exceeds a calibrated threshold.

pub mod channel;
pub mod detector;
pub mod error;
pub mod harness;
pub mod normal;
pub mod quadrature;
pub mod quantizer;
pub mod relay;
pub mod stats;
pub mod streams;

pub use channel::{ChannelParams, SourceSymbol, SymbolPosterior, TransmissionRecord};
pub use detector::{DetectionOutcome, DetectionPolicy, Verdict};
pub use error::{Error, Result};
pub use harness::{run_experiment, run_trial, Experiment, ExperimentConfig, ExperimentReport};
pub use quantizer::{Grid, NestedGridPair};
pub use relay::RelayStrategy;
