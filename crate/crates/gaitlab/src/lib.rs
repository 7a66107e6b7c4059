//! A self-contained laboratory for studying how camera viewpoint,
//! temporal window length, and keypoint dimensionality affect automated
//! lameness detection in quadruped gait.
//!
//! The crate covers the full pipeline:
//!
//! * [`sim`] — procedural gait synthesis: a 19-joint quadruped walking on
//!   a treadmill-style track, rendered from randomized cameras in a scene
//!   with static props, with per-joint visibility decided by ray casting
//!   against the props and the animal's own body;
//! * [`data`] — pose files → windowed, masked, per-window standardized
//!   graph samples, plus stratified cross-validation splits;
//! * [`nn`] — a small spatiotemporal graph network (graph convolution,
//!   gated recurrence, temporal attention, linear head) built on an exact
//!   reverse-mode tape;
//! * [`train`] — decoupled-weight-decay Adam, early stopping, and the
//!   grid experiment over (angle group × window length × dimensionality ×
//!   fold);
//! * [`metrics`] / [`report`] — tie-aware AUROC, fold aggregation, and
//!   table/plot emission;
//! * [`config`] / [`manifest`] — flat-file run configuration and hashed
//!   output manifests.
//!
//! Everything downstream of a seed is deterministic: reruns produce
//! byte-identical pose files, CSVs, and reports.

pub mod config;
pub mod data;
pub mod error;
pub mod geom;
pub mod manifest;
pub mod metrics;
pub mod nn;
pub mod report;
pub mod seed;
pub mod sim;
pub mod train;

pub use config::{load_config, parse_config, Config, GridSubset};
pub use error::{Error, Result};
pub use manifest::{Manifest, MANIFEST_FILE_NAME};
pub use seed::{derive_seed, rng_from_seed};
