//! Scene clutter: occluding props scattered around the animal.
//!
//! Props are spheres and boxes resting on the ground plane. A corridor —
//! the animal's bounding box swept along its walking direction — is kept
//! clear so no prop ever collides with the animal. Because the gait is
//! generated in place (treadmill convention), the world slides past the
//! camera instead: every prop moves with the negated walking velocity while
//! the camera and the animal stay put.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::{scale, sub, Aabb, Vec3};
use crate::seed::rng_from_seed;

/// Prop volumes must lie strictly inside this range (cubic metres).
pub const MIN_OCCLUDER_VOLUME_M3: f64 = 0.1;
pub const MAX_OCCLUDER_VOLUME_M3: f64 = 10.0;

/// Candidate size ranges (metres). Both ends deliberately produce some
/// volumes outside the legal range so rejection is exercised.
const SPHERE_RADIUS_RANGE: (f64, f64) = (0.25, 1.4);
const BOX_HALF_EXTENT_RANGE: (f64, f64) = (0.2, 1.2);

#[derive(Debug, Clone, PartialEq)]
pub enum OccluderShape {
    Sphere { radius: f64 },
    Box { half_extents: Vec3 },
}

/// A prop at its initial position together with its world velocity (set by
/// the relative-motion pass).
#[derive(Debug, Clone, PartialEq)]
pub struct Occluder {
    pub shape: OccluderShape,
    pub center: Vec3,
    pub velocity: Vec3,
}

impl Occluder {
    pub fn volume(&self) -> f64 {
        match &self.shape {
            OccluderShape::Sphere { radius } => {
                4.0 / 3.0 * std::f64::consts::PI * radius.powi(3)
            }
            OccluderShape::Box { half_extents } => {
                8.0 * half_extents[0] * half_extents[1] * half_extents[2]
            }
        }
    }

    pub fn aabb_at(&self, center: Vec3) -> Aabb {
        match &self.shape {
            OccluderShape::Sphere { radius } => Aabb::new(
                sub(center, [*radius; 3]),
                crate::geom::add(center, [*radius; 3]),
            ),
            OccluderShape::Box { half_extents } => Aabb::new(
                sub(center, *half_extents),
                crate::geom::add(center, *half_extents),
            ),
        }
    }

    pub fn aabb(&self) -> Aabb {
        self.aabb_at(self.center)
    }

    /// Prop centre at a given frame under constant velocity.
    pub fn center_at(&self, frame: usize, fps: u32) -> Vec3 {
        let t = frame as f64 / fps as f64;
        crate::geom::add(self.center, scale(self.velocity, t))
    }
}

/// The keep-clear region: the animal's bounds swept along its walking
/// direction for the whole video, plus clearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Corridor {
    pub aabb: Aabb,
}

impl Corridor {
    /// `body` is the animal's bounding box over the whole clip; the sweep
    /// covers `body` translated by `walk_velocity * duration_s`, because in
    /// world terms it is the props that travel by the negated offset.
    pub fn swept(body: Aabb, walk_velocity: Vec3, duration_s: f64, clearance: f64) -> Result<Self> {
        if !(duration_s > 0.0) || !(clearance >= 0.0) {
            return Err(Error::Parameter(
                "corridor needs positive duration and non-negative clearance".into(),
            ));
        }
        let offset = scale(walk_velocity, duration_s);
        let shifted = body.translate(offset);
        let mut union = body;
        for i in 0..3 {
            union.min[i] = union.min[i].min(shifted.min[i]);
            union.max[i] = union.max[i].max(shifted.max[i]);
        }
        Ok(Corridor {
            aabb: union.inflate(clearance),
        })
    }
}

/// Scatters props over a square ground patch of the given area centred on
/// the origin. The candidate count is `round(density * area)`; candidates
/// whose volume falls outside the legal range or whose bounds intersect the
/// corridor are rejected, not redrawn, so the returned count can be lower.
pub fn populate_scene(
    density_per_m2: f64,
    area_m2: f64,
    corridor: &Corridor,
    seed: u64,
) -> Result<Vec<Occluder>> {
    if !(density_per_m2 >= 0.0) || !density_per_m2.is_finite() {
        return Err(Error::Parameter(format!(
            "occluder density must be non-negative, got {density_per_m2}"
        )));
    }
    if !(area_m2 > 0.0) || !area_m2.is_finite() {
        return Err(Error::Parameter(format!(
            "scene area must be positive, got {area_m2}"
        )));
    }
    let candidates = (density_per_m2 * area_m2).round() as usize;
    let side = area_m2.sqrt();
    let mut rng = rng_from_seed(seed);
    let mut props = Vec::with_capacity(candidates);
    for _ in 0..candidates {
        // Fixed draw order keeps the stream stable: x, y, shape selector,
        // then shape parameters.
        let x = (rng.gen::<f64>() - 0.5) * side;
        let y = (rng.gen::<f64>() - 0.5) * side;
        let make_sphere = rng.gen::<f64>() < 0.5;
        let (shape, center_z) = if make_sphere {
            let (lo, hi) = SPHERE_RADIUS_RANGE;
            let radius = lo + rng.gen::<f64>() * (hi - lo);
            (OccluderShape::Sphere { radius }, radius)
        } else {
            let (lo, hi) = BOX_HALF_EXTENT_RANGE;
            let mut half = [0.0; 3];
            for h in &mut half {
                *h = lo + rng.gen::<f64>() * (hi - lo);
            }
            (OccluderShape::Box { half_extents: half }, half[2])
        };
        let candidate = Occluder {
            shape,
            center: [x, y, center_z],
            velocity: [0.0; 3],
        };
        let volume = candidate.volume();
        if volume <= MIN_OCCLUDER_VOLUME_M3 || volume >= MAX_OCCLUDER_VOLUME_M3 {
            continue;
        }
        if candidate.aabb().intersects(&corridor.aabb) {
            continue;
        }
        props.push(candidate);
    }
    Ok(props)
}

/// Implements the treadmill convention: gives every prop the negated walk
/// velocity and returns per-frame prop centres, `positions[frame][prop]`.
pub fn animate_relative_motion(
    occluders: &mut [Occluder],
    walk_velocity: Vec3,
    frame_count: usize,
    fps: u32,
) -> Result<Vec<Vec<Vec3>>> {
    if fps == 0 {
        return Err(Error::Parameter("fps must be positive".into()));
    }
    let relative = scale(walk_velocity, -1.0);
    for o in occluders.iter_mut() {
        o.velocity = relative;
    }
    let mut positions = Vec::with_capacity(frame_count);
    for f in 0..frame_count {
        positions.push(occluders.iter().map(|o| o.center_at(f, fps)).collect());
    }
    Ok(positions)
}
