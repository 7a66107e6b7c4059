//! Per-window feature extraction.
//!
//! Each window is a (joints × frames × channels) block plus a
//! (joints × frames) observation mask. In 3D the channels are world
//! coordinates and the mask is the simulated visibility; in 2D the
//! channels are pixel coordinates from the video's camera, and joints
//! that fall on or behind the image plane are additionally masked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::PoseSequence;

/// Input representation under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dimensionality {
    TwoD,
    ThreeD,
}

impl Dimensionality {
    pub fn channels(self) -> usize {
        match self {
            Dimensionality::TwoD => 2,
            Dimensionality::ThreeD => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dimensionality::TwoD => "2d",
            Dimensionality::ThreeD => "3d",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "2d" => Ok(Dimensionality::TwoD),
            "3d" => Ok(Dimensionality::ThreeD),
            other => Err(Error::Parse(format!(
                "unknown dimensionality {other:?} (expected \"2d\" or \"3d\")"
            ))),
        }
    }
}

/// One window's raw (not yet standardized) features.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowFeatures {
    pub joints: usize,
    pub timesteps: usize,
    pub channels: usize,
    /// Row-major `[joint][frame][channel]`.
    values: Vec<f64>,
    /// Row-major `[joint][frame]`; true = observed.
    mask: Vec<bool>,
}

impl WindowFeatures {
    pub fn new(joints: usize, timesteps: usize, channels: usize) -> Self {
        WindowFeatures {
            joints,
            timesteps,
            channels,
            values: vec![0.0; joints * timesteps * channels],
            mask: vec![false; joints * timesteps],
        }
    }

    #[inline]
    fn vidx(&self, j: usize, t: usize, c: usize) -> usize {
        (j * self.timesteps + t) * self.channels + c
    }

    #[inline]
    pub fn value(&self, j: usize, t: usize, c: usize) -> f64 {
        self.values[self.vidx(j, t, c)]
    }

    #[inline]
    pub fn set_value(&mut self, j: usize, t: usize, c: usize, v: f64) {
        let i = self.vidx(j, t, c);
        self.values[i] = v;
    }

    #[inline]
    pub fn observed(&self, j: usize, t: usize) -> bool {
        self.mask[j * self.timesteps + t]
    }

    #[inline]
    pub fn set_observed(&mut self, j: usize, t: usize, observed: bool) {
        self.mask[j * self.timesteps + t] = observed;
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}

/// Extracts the raw features for the window starting at `start`.
pub fn extract_features(
    seq: &PoseSequence,
    start: usize,
    timestep: usize,
    dim: Dimensionality,
) -> Result<WindowFeatures> {
    if timestep == 0 {
        return Err(Error::Parameter("timestep must be at least 1".into()));
    }
    if start + timestep > seq.frame_count() {
        return Err(Error::Parameter(format!(
            "window [{start}, {}) exceeds clip length {}",
            start + timestep,
            seq.frame_count()
        )));
    }
    let joints = seq.topology.joint_count();
    let mut out = WindowFeatures::new(joints, timestep, dim.channels());
    for t in 0..timestep {
        let frame = &seq.frames[start + t];
        for j in 0..joints {
            let p = frame.positions[j];
            match dim {
                Dimensionality::ThreeD => {
                    for c in 0..3 {
                        out.set_value(j, t, c, p[c]);
                    }
                    out.set_observed(j, t, frame.visible[j]);
                }
                Dimensionality::TwoD => match seq.camera.project(p) {
                    Some(uv) if frame.visible[j] => {
                        out.set_value(j, t, 0, uv[0]);
                        out.set_value(j, t, 1, uv[1]);
                        out.set_observed(j, t, true);
                    }
                    _ => out.set_observed(j, t, false),
                },
            }
        }
    }
    Ok(out)
}
