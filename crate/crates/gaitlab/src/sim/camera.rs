//! Camera placement and pinhole projection.
//!
//! Cameras sit on a sphere around the animal, described by azimuth,
//! elevation, and distance. Azimuth 0° looks along the world +x axis (the
//! direction the animal faces): a camera at azimuth 0 is straight ahead of
//! the animal, azimuth 90° is off its left shoulder, 180° behind, 270° on
//! the right. The camera always points at a fixed spot near the animal's
//! chest and never moves during a video.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{cross, dot, normalize, sub, Vec3};
use crate::seed::rng_from_seed;

/// Point every camera looks at (roughly the animal's chest).
pub const CAMERA_TARGET: Vec3 = [0.0, 0.0, 0.5];

/// Minimum forward depth (metres) for a point to project; anything closer
/// to — or behind — the image plane is treated as invisible in 2D.
pub const MIN_PROJECTION_DEPTH: f64 = 1e-6;

/// A stationary pinhole camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub distance_m: f64,
    /// Focal length in pixels.
    pub focal_length: f64,
    /// Image-space principal point in pixels.
    pub principal_point: [f64; 2],
}

/// Configured sampling ranges for everything but the azimuth (which comes
/// from the angle group under study).
#[derive(Debug, Clone, PartialEq)]
pub struct CameraRanges {
    pub elevation_lo_deg: f64,
    pub elevation_hi_deg: f64,
    pub distance_lo_m: f64,
    pub distance_hi_m: f64,
    pub focal_length: f64,
    pub principal_point: [f64; 2],
}

impl Default for CameraRanges {
    fn default() -> Self {
        CameraRanges {
            elevation_lo_deg: 5.0,
            elevation_hi_deg: 25.0,
            distance_lo_m: 3.0,
            distance_hi_m: 6.0,
            focal_length: 1000.0,
            principal_point: [640.0, 360.0],
        }
    }
}

impl CameraPose {
    /// Neutral pose used while a sequence is being assembled, before the
    /// real camera has been sampled.
    pub fn placeholder() -> Self {
        CameraPose {
            azimuth_deg: 0.0,
            elevation_deg: 0.0,
            distance_m: 5.0,
            focal_length: 1000.0,
            principal_point: [640.0, 360.0],
        }
    }

    /// World-space optical centre.
    pub fn position(&self) -> Vec3 {
        let az = self.azimuth_deg.to_radians();
        let el = self.elevation_deg.to_radians();
        [
            CAMERA_TARGET[0] + self.distance_m * el.cos() * az.cos(),
            CAMERA_TARGET[1] + self.distance_m * el.cos() * az.sin(),
            CAMERA_TARGET[2] + self.distance_m * el.sin(),
        ]
    }

    /// Orthonormal camera basis (right, up, forward), forward pointing at
    /// the target.
    fn basis(&self) -> (Vec3, Vec3, Vec3) {
        let forward = normalize(sub(CAMERA_TARGET, self.position()));
        let right = normalize(cross(forward, [0.0, 0.0, 1.0]));
        let up = cross(right, forward);
        (right, up, forward)
    }

    /// Camera-space coordinates of a world point: (right, up, depth).
    pub fn to_camera(&self, p: Vec3) -> Vec3 {
        let (right, up, forward) = self.basis();
        let d = sub(p, self.position());
        [dot(d, right), dot(d, up), dot(d, forward)]
    }

    /// Pinhole projection to pixel coordinates. Returns `None` when the
    /// point is on or behind the image plane.
    pub fn project(&self, p: Vec3) -> Option<[f64; 2]> {
        let c = self.to_camera(p);
        if c[2] <= MIN_PROJECTION_DEPTH {
            return None;
        }
        Some([
            self.principal_point[0] + self.focal_length * c[0] / c[2],
            self.principal_point[1] + self.focal_length * c[1] / c[2],
        ])
    }
}

fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        lo + rng.gen::<f64>() * (hi - lo)
    } else {
        lo
    }
}

/// Samples a camera with azimuth uniform in `[angle_lo, angle_hi)` and
/// elevation / distance uniform in the configured ranges. Degenerate
/// intervals pin the value to the lower bound.
pub fn sample_camera(
    angle_lo_deg: f64,
    angle_hi_deg: f64,
    seed: u64,
    ranges: &CameraRanges,
) -> Result<CameraPose> {
    if !(0.0..=360.0).contains(&angle_lo_deg)
        || !(0.0..=360.0).contains(&angle_hi_deg)
        || angle_lo_deg > angle_hi_deg
    {
        return Err(Error::Parameter(format!(
            "angle interval [{angle_lo_deg}, {angle_hi_deg}] must satisfy 0 <= lo <= hi <= 360"
        )));
    }
    if ranges.elevation_lo_deg > ranges.elevation_hi_deg
        || ranges.distance_lo_m > ranges.distance_hi_m
        || !(ranges.distance_lo_m > 0.0)
    {
        return Err(Error::Parameter("invalid camera sampling ranges".into()));
    }
    if !(ranges.focal_length > 0.0) {
        return Err(Error::Parameter("focal length must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let azimuth_deg = uniform(&mut rng, angle_lo_deg, angle_hi_deg);
    let elevation_deg = uniform(&mut rng, ranges.elevation_lo_deg, ranges.elevation_hi_deg);
    let distance_m = uniform(&mut rng, ranges.distance_lo_m, ranges.distance_hi_m);
    Ok(CameraPose {
        azimuth_deg,
        elevation_deg,
        distance_m,
        focal_length: ranges.focal_length,
        principal_point: ranges.principal_point,
    })
}
