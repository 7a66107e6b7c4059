//! From pose sequences to training-ready graph samples: windowing, feature
//! extraction, masked standardization, adjacency, and video-level splits.

pub mod adjacency;
pub mod features;
pub mod folds;
pub mod standardize;
pub mod window;

pub use adjacency::normalized_adjacency;
pub use features::{extract_features, Dimensionality, WindowFeatures};
pub use folds::{split_validation, stratified_kfold, FoldSplit};
pub use standardize::{standardize_window, MASK_FILL, SIGMA_FLOOR};
pub use window::{window_overlap, window_starts, window_stride};

use crate::error::Result;
use crate::nn::Mat;
use crate::sim::PoseSequence;

/// One training window: standardized per-frame node features plus
/// provenance for leakage auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    /// One N×C matrix per frame, already standardized and mask-filled.
    pub frames: Vec<Mat>,
    /// Row-major `[joint][frame]` observation mask.
    pub mask: Vec<bool>,
    /// 0 = healthy, 1 = unhealthy.
    pub label: u8,
    /// Identifier of the source video.
    pub video: String,
    /// First frame index of this window inside the video.
    pub window_start: usize,
}

/// Cuts one video into standardized windowed samples.
pub fn build_samples(
    seq: &PoseSequence,
    video_id: &str,
    timestep: usize,
    dim: Dimensionality,
) -> Result<Vec<GraphSample>> {
    let starts = window_starts(seq.frame_count(), timestep);
    let mut samples = Vec::with_capacity(starts.len());
    for start in starts {
        let mut w = extract_features(seq, start, timestep, dim)?;
        standardize_window(&mut w);
        let frames: Vec<Mat> = (0..timestep)
            .map(|t| {
                let mut m = Mat::zeros(w.joints, w.channels);
                for j in 0..w.joints {
                    for c in 0..w.channels {
                        m.set(j, c, w.value(j, t, c));
                    }
                }
                m
            })
            .collect();
        samples.push(GraphSample {
            frames,
            mask: w.mask().to_vec(),
            label: seq.label.label(),
            video: video_id.to_string(),
            window_start: start,
        });
    }
    Ok(samples)
}
