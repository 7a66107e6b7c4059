//! Line-of-sight tests between the camera and individual joints.
//!
//! A joint is visible when the straight segment from the camera's optical
//! centre to the joint clears every scene prop and every body capsule it is
//! tested against. The segment is shortened by a tiny fraction at the joint
//! end so that surfaces touching the joint itself (its own flesh) never
//! count as obstructions; excluding the joint's own bones is the caller's
//! job, since only the skeleton knows which capsules belong to the joint.
//!
//! All tests reduce to exact closed-form distance computations:
//! point-to-segment for spheres, segment-to-segment for capsules, and slab
//! clipping for boxes. An independent ray-marching oracle lives in the test
//! suite and must agree with these predicates everywhere outside a thin
//! tangency band.

use crate::error::{Error, Result};
use crate::geom::{add, dot, norm, scale, sub, Vec3};

/// Fraction of the ray length trimmed off the joint end before testing.
pub const RAY_END_TRIM: f64 = 1e-6;

/// A capsule (cylinder with hemispherical caps) between two points.
#[derive(Debug, Clone, PartialEq)]
pub struct Capsule {
    pub a: Vec3,
    pub b: Vec3,
    pub radius: f64,
}

/// Anything that can obstruct a sight line, placed in world space.
#[derive(Debug, Clone, PartialEq)]
pub enum Obstacle {
    Sphere { center: Vec3, radius: f64 },
    Block { min: Vec3, max: Vec3 },
    Capsule(Capsule),
}

/// Distance from point `p` to segment `[a, b]`.
pub fn point_segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 {
        (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    norm(sub(p, add(a, scale(ab, t))))
}

/// Minimum distance between segments `[p1, q1]` and `[p2, q2]`.
pub fn segment_segment_distance(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> f64 {
    let d1 = sub(q1, p1);
    let d2 = sub(q2, p2);
    let r = sub(p1, p2);
    let a = dot(d1, d1);
    let e = dot(d2, d2);
    let f = dot(d2, r);
    const EPS: f64 = 1e-14;

    let (s, t);
    if a <= EPS && e <= EPS {
        return norm(r);
    }
    if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = dot(d1, r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = dot(d1, d2);
            let denom = a * e - b * b;
            let s0 = if denom != 0.0 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                t = t0;
                s = s0;
            }
        }
    }
    let c1 = add(p1, scale(d1, s));
    let c2 = add(p2, scale(d2, t));
    norm(sub(c1, c2))
}

/// Does segment `[start, end]` pass through the axis-aligned box?
fn segment_hits_block(start: Vec3, end: Vec3, min: Vec3, max: Vec3) -> bool {
    let d = sub(end, start);
    let mut t0: f64 = 0.0;
    let mut t1: f64 = 1.0;
    for i in 0..3 {
        if d[i].abs() < 1e-15 {
            if start[i] < min[i] || start[i] > max[i] {
                return false;
            }
        } else {
            let inv = 1.0 / d[i];
            let mut ta = (min[i] - start[i]) * inv;
            let mut tb = (max[i] - start[i]) * inv;
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return false;
            }
        }
    }
    true
}

/// Does segment `[start, end]` touch the obstacle?
pub fn segment_blocked(start: Vec3, end: Vec3, obstacle: &Obstacle) -> bool {
    match obstacle {
        Obstacle::Sphere { center, radius } => {
            point_segment_distance(*center, start, end) <= *radius
        }
        Obstacle::Capsule(c) => segment_segment_distance(start, end, c.a, c.b) <= c.radius,
        Obstacle::Block { min, max } => segment_hits_block(start, end, *min, *max),
    }
}

/// Returns true when the joint at `target` is visible from `camera` given
/// the scene props and the body capsules the caller chose to test (the
/// joint's own bones must already be excluded). A camera sitting inside an
/// obstacle sees nothing; an obstacle strictly beyond the joint hides
/// nothing.
pub fn ray_visibility(
    camera: Vec3,
    target: Vec3,
    occluders: &[Obstacle],
    body: &[Capsule],
) -> Result<bool> {
    let dir = sub(target, camera);
    let len = norm(dir);
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::Parameter(
            "degenerate sight line: camera and joint coincide".into(),
        ));
    }
    let end = add(camera, scale(dir, 1.0 - RAY_END_TRIM));
    for o in occluders {
        if segment_blocked(camera, end, o) {
            return Ok(false);
        }
    }
    for c in body {
        if segment_blocked(camera, end, &Obstacle::Capsule(c.clone())) {
            return Ok(false);
        }
    }
    Ok(true)
}
