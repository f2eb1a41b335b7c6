//! Simulator for energy-aware distributionally robust federated learning
//! over an analog (AirComp) wireless uplink.
//!
//! The crate models a parameter server training a shared multinomial
//! logistic regression model across `N` clients holding label-skewed data
//! shards. Each round, `K` clients are selected, take one local SGD step,
//! and upload their models over a block-fading channel using channel
//! inversion; the superposed signal is averaged at the server. Client
//! selection blends two probability experts: a robustness weight vector
//! maintained by a projected gradient-ascent step, and a channel-quality
//! PMF whose bias is controlled by an energy-conservation exponent `C`.
//!
//! Modules map onto the moving parts:
//!
//! * [`config`] / [`output`] / [`rng`]: experiment configuration, the
//!   per-round CSV record format, and named deterministic RNG streams.
//! * [`data`]: IDX dataset loading, synthetic blob generation, and
//!   label-sorted sharding across clients.
//! * [`model`]: softmax cross-entropy loss, gradient, SGD step, accuracy.
//! * [`channel`]: truncated Rayleigh fading, effective channels, and the
//!   channel-inversion energy ledger.
//! * [`selection`]: the bias-configurable PMF, product-of-experts
//!   combination, weighted sampling without replacement, simplex
//!   projection, and the ascent update.
//! * [`aircomp`]: noisy over-the-air model aggregation.
//! * [`trainer`]: the full descent-ascent round loop and the
//!   fedavg / afl / ca_afl / greedy_topk policies.
//!
//! The `airfed` binary exposes `run` and `sweep` subcommands; see the
//! guide under `book/` for a narrative walkthrough.

pub mod aircomp;
pub mod channel;
pub mod config;
pub mod data;
pub mod error;
pub mod model;
pub mod output;
pub mod rng;
pub mod selection;
pub mod trainer;

pub use config::{DatasetKind, Policy, SimConfig};
pub use error::Error;
pub use output::RoundRecord;
pub use trainer::Trainer;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
