//! Minimal 3D vector and box helpers used by the simulator.

pub type Vec3 = [f64; 3];

pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale(a: Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    scale(a, 1.0 / n)
}

pub fn is_finite(a: Vec3) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Axis-aligned box, `min[i] <= max[i]` on every axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        debug_assert!((0..3).all(|i| min[i] <= max[i]));
        Self { min, max }
    }

    /// Smallest box containing every given point.
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Self> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut bb = Aabb {
            min: first,
            max: first,
        };
        for p in it {
            for i in 0..3 {
                bb.min[i] = bb.min[i].min(p[i]);
                bb.max[i] = bb.max[i].max(p[i]);
            }
        }
        Some(bb)
    }

    pub fn inflate(&self, margin: f64) -> Self {
        Aabb {
            min: sub(self.min, [margin; 3]),
            max: add(self.max, [margin; 3]),
        }
    }

    pub fn translate(&self, delta: Vec3) -> Self {
        Aabb {
            min: add(self.min, delta),
            max: add(self.max, delta),
        }
    }

    /// Open-interval overlap test: touching boxes do not intersect.
    pub fn intersects(&self, other: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] < other.max[i] && other.min[i] < self.max[i])
    }

    /// Separation distance between boxes (0 when they touch or overlap).
    pub fn distance(&self, other: &Aabb) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let gap = (self.min[i] - other.max[i]).max(other.min[i] - self.max[i]).max(0.0);
            d2 += gap * gap;
        }
        d2.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_follows_right_hand_rule() {
        assert_eq!(cross([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn aabb_touching_does_not_intersect() {
        let a = Aabb::new([0.0; 3], [1.0; 3]);
        let b = Aabb::new([1.0, 0.0, 0.0], [2.0, 1.0, 1.0]);
        assert!(!a.intersects(&b));
        assert_eq!(a.distance(&b), 0.0);
        let c = Aabb::new([0.5, 0.5, 0.5], [2.0; 3]);
        assert!(a.intersects(&c));
    }

    #[test]
    fn aabb_distance_is_euclidean_gap() {
        let a = Aabb::new([0.0; 3], [1.0; 3]);
        let b = Aabb::new([4.0, 5.0, 0.0], [5.0, 6.0, 1.0]);
        assert!((a.distance(&b) - 5.0).abs() < 1e-12);
    }
}
