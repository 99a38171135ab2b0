//! Point clouds, farthest point sampling and small fitting utilities.

use super::pose::Vec3;
use crate::error::GeomError;
use serde::{Deserialize, Serialize};

/// Points in meters with optional unit normals and integer segment labels
/// (label 0 is background).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub normals: Option<Vec<Vec3>>,
    pub labels: Option<Vec<u32>>,
}

impl PointCloud {
    pub fn from_points(points: Vec<Vec3>) -> Self {
        Self { points, normals: None, labels: None }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of points carrying the given label.
    pub fn label_indices(&self, label: u32) -> Vec<usize> {
        match &self.labels {
            Some(ls) => ls
                .iter()
                .enumerate()
                .filter_map(|(i, &l)| (l == label).then_some(i))
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn is_valid(&self) -> bool {
        if let Some(ns) = &self.normals {
            if ns.len() != self.points.len() {
                return false;
            }
            if ns.iter().any(|n| (n.norm() - 1.0).abs() > 1e-6) {
                return false;
            }
        }
        if let Some(ls) = &self.labels {
            if ls.len() != self.points.len() {
                return false;
            }
        }
        true
    }
}

/// Sum of squared pairwise distances between two equally sized keypoint sets.
pub fn keypoint_distance(a: &[Vec3], b: &[Vec3]) -> Result<f64, GeomError> {
    if a.len() != b.len() {
        return Err(GeomError::KeypointCountMismatch { a: a.len(), b: b.len() });
    }
    Ok(a.iter().zip(b).map(|(p, q)| (p - q).norm_squared()).sum())
}

/// Greedy farthest point sampling.
///
/// Starts from `seed_index`; each subsequent pick maximizes the minimum
/// distance to the chosen set, breaking ties by the lowest index. The result
/// is a deterministic function of the cloud ordering and the seed.
pub fn farthest_point_sample(
    cloud: &PointCloud,
    k: usize,
    seed_index: usize,
) -> Result<Vec<usize>, GeomError> {
    let n = cloud.len();
    if k > n {
        return Err(GeomError::FpsTooFewPoints { have: n, want: k });
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if seed_index >= n {
        return Err(GeomError::FpsTooFewPoints { have: n, want: seed_index + 1 });
    }
    let pts = &cloud.points;
    let mut chosen = Vec::with_capacity(k);
    let mut min_d2 = vec![f64::INFINITY; n];
    let mut current = seed_index;
    chosen.push(current);
    for _ in 1..k {
        let base = pts[current];
        let mut best = 0usize;
        let mut best_d2 = f64::NEG_INFINITY;
        for i in 0..n {
            let d2 = (pts[i] - base).norm_squared();
            if d2 < min_d2[i] {
                min_d2[i] = d2;
            }
            if min_d2[i] > best_d2 {
                best_d2 = min_d2[i];
                best = i;
            }
        }
        current = best;
        chosen.push(current);
    }
    Ok(chosen)
}

/// Default number of shape keypoints kept per object.
pub const FPS_KEYPOINTS: usize = 16;

/// Angle in `(-π/2, π/2]` of the direction of maximal variance of 2-D points,
/// from the damped (λ = 1e-6) second-moment matrix.
pub fn fit_longest_axis(points_xy: &[[f64; 2]]) -> Result<f64, GeomError> {
    if points_xy.len() < 2 {
        return Err(GeomError::DegenerateFit);
    }
    let m = points_xy.len() as f64;
    let mean = points_xy
        .iter()
        .fold([0.0f64; 2], |acc, p| [acc[0] + p[0], acc[1] + p[1]]);
    let mean = [mean[0] / m, mean[1] / m];
    let damping = 1e-6;
    let (mut cxx, mut cyy, mut cxy) = (damping, damping, 0.0f64);
    for p in points_xy {
        let dx = p[0] - mean[0];
        let dy = p[1] - mean[1];
        cxx += dx * dx;
        cyy += dy * dy;
        cxy += dx * dy;
    }
    let spread = cxx + cyy - 2.0 * damping;
    if spread < 1e-12 {
        return Err(GeomError::DegenerateFit);
    }
    // Principal axis of the 2x2 symmetric matrix; atan2 already lands the
    // doubled angle in (-π, π], so halving gives (-π/2, π/2].
    let angle = 0.5 * (2.0 * cxy).atan2(cxx - cyy);
    if angle > std::f64::consts::FRAC_PI_2 {
        Ok(angle - std::f64::consts::PI)
    } else if angle <= -std::f64::consts::FRAC_PI_2 {
        Ok(angle + std::f64::consts::PI)
    } else {
        Ok(angle)
    }
}
