//! Behavior-to-quality modeling for BIM design logs.
//!
//! The crate turns journal and tracker logs into per-window density features,
//! fits regression models from those features to design quality scores, and
//! attributes predictions to features with Shapley values. It also carries a
//! synthetic corpus generator with planted behavior/quality links.
//!
//! Everything here is pure computation over in-memory data and builds under
//! `no_std` with `alloc`. The `parallel` feature turns on rayon for per-tree,
//! per-window and per-sample work; results do not depend on it.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod explain;
pub mod features;
pub mod ingest;
pub mod learn;
pub mod quality;
pub mod rng;
pub mod session;
pub mod sweep;
pub mod synth;
pub mod ticks;
pub mod windows;

mod par;

pub use features::{FeatureVector, FEATURE_COUNT, FEATURE_NAMES};
pub use ticks::TickTime;
