use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::wavefield::{CircularRegion, Point2};

/// `count` points at equal arc-length spacing on the boundary of an
/// axis-aligned square, starting at the lower-left corner and running
/// counter-clockwise.
pub fn square_boundary_candidates(center: Point2, side: f64, count: usize) -> Result<Vec<Point2>> {
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::Domain(format!("square side must be positive, got {side}")));
    }
    if count == 0 {
        return Err(Error::Domain("candidate count must be positive".into()));
    }
    let half = 0.5 * side;
    let perimeter = 4.0 * side;
    Ok((0..count)
        .map(|i| {
            let s = perimeter * i as f64 / count as f64;
            let edge = ((s / side) as usize).min(3);
            let t = s - edge as f64 * side;
            let (x, y) = match edge {
                0 => (-half + t, -half),
                1 => (half, -half + t),
                2 => (half - t, half),
                _ => (-half, half - t),
            };
            Point2::new(center.x + x, center.y + y)
        })
        .collect())
}

/// `l` indices at maximally equal spacing around the whole candidate loop:
/// `floor(i N / l)` for `i = 0..l`.
pub fn regular_placement_b(num_candidates: usize, l: usize) -> Result<Vec<usize>> {
    if l > num_candidates {
        return Err(Error::Domain(format!(
            "cannot select {l} sources from {num_candidates} candidates"
        )));
    }
    Ok((0..l).map(|i| i * num_candidates / l).collect())
}

/// Whether `p` lies between the two lines through the extreme plane-wave
/// directions that are tangent to `region`, i.e. upstream of the region for
/// some direction in the range.
pub fn in_arrival_wedge(p: &Point2, region: &CircularRegion, angle_min: f64, angle_max: f64) -> bool {
    let d = *p - region.center;
    let r = region.radius;
    let left = -angle_min.sin() * d.x + angle_min.cos() * d.y <= r;
    let right = angle_max.sin() * d.x - angle_max.cos() * d.y <= r;
    left && right
}

/// Candidates facing the incoming plane waves, selected at equal index
/// spacing along the admissible stretch of the candidate loop.
///
/// A range of width `>= pi` does not bound a wedge, so the full loop is used
/// as in [`regular_placement_b`].
pub fn regular_placement_a(
    candidates: &[Point2],
    region: &CircularRegion,
    angle_min: f64,
    angle_max: f64,
    l: usize,
) -> Result<Vec<usize>> {
    if !(angle_min < angle_max) {
        return Err(Error::Domain(format!(
            "angle range needs angle_min < angle_max, got [{angle_min}, {angle_max}]"
        )));
    }
    let n = candidates.len();
    if angle_max - angle_min >= PI {
        return regular_placement_b(n, l);
    }
    let admissible: Vec<usize> = (0..n)
        .filter(|&i| in_arrival_wedge(&candidates[i], region, angle_min, angle_max))
        .collect();
    if admissible.is_empty() {
        return Err(Error::Precondition("no candidate faces the arrival range".into()));
    }
    if l > admissible.len() {
        return Err(Error::Domain(format!(
            "cannot select {l} sources from {} admissible candidates",
            admissible.len()
        )));
    }
    // start the run right after the widest cyclic gap so a stretch that
    // wraps past index 0 stays in loop order
    let k = admissible.len();
    let gap = |j: usize| (admissible[(j + 1) % k] + n - admissible[j] - 1) % n;
    let widest = (0..k).max_by_key(|&j| (gap(j), std::cmp::Reverse(j))).unwrap_or(0);
    let ordered: Vec<usize> = (0..k).map(|j| admissible[(widest + 1 + j) % k]).collect();

    if l == 1 {
        return Ok(vec![ordered[(k - 1) / 2]]);
    }
    Ok((0..l)
        .map(|i| {
            let pos = (i as f64 * (k - 1) as f64 / (l - 1) as f64).round() as usize;
            ordered[pos]
        })
        .collect())
}
