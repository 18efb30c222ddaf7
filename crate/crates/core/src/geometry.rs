//! Small geometric helpers shared across modules.

use std::f64::consts::PI;

pub type Vec3 = nalgebra::Vector3<f64>;

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a % (2.0 * PI);
    if r <= -PI {
        r += 2.0 * PI;
    } else if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Unsigned angle between two vectors in [0, pi]. Zero vectors give 0.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Horizontal bearing from `from` to `to`.
pub fn bearing(from: &Vec3, to: &Vec3) -> f64 {
    (to.y - from.y).atan2(to.x - from.x)
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn point_segment_dist2(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    };
    let dx = a[0] + t * ab[0] - p[0];
    let dy = a[1] + t * ab[1] - p[1];
    dx * dx + dy * dy
}

/// Minimum distance between two closed 2D segments (0 when they cross).
pub fn segment_distance_2d(a0: [f64; 2], a1: [f64; 2], b0: [f64; 2], b1: [f64; 2]) -> f64 {
    let d1 = cross2(a0, a1, b0);
    let d2 = cross2(a0, a1, b1);
    let d3 = cross2(b0, b1, a0);
    let d4 = cross2(b0, b1, a1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return 0.0;
    }
    point_segment_dist2(a0, b0, b1)
        .min(point_segment_dist2(a1, b0, b1))
        .min(point_segment_dist2(b0, a0, a1))
        .min(point_segment_dist2(b1, a0, a1))
        .sqrt()
}
