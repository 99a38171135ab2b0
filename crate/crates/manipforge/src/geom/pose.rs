//! Rigid transforms (position + unit quaternion) and the axis-angle
//! delta representation used by the controllers and reward terms.

use nalgebra::{UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;
pub type Quat = UnitQuaternion<f64>;

/// A rigid transform. The quaternion is kept in canonical form (`w >= 0`)
/// so that equal rotations compare equal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    #[serde(with = "quat_serde")]
    orientation: Quat,
}

mod quat_serde {
    use super::Quat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(q: &Quat, s: S) -> Result<S::Ok, S::Error> {
        [q.w, q.i, q.j, q.k].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Quat, D::Error> {
        let [w, x, y, z] = <[f64; 4]>::deserialize(d)?;
        Ok(super::quat_from_wxyz(w, x, y, z))
    }
}

pub(crate) fn quat_from_wxyz(w: f64, x: f64, y: f64, z: f64) -> Quat {
    Quat::from_quaternion(nalgebra::Quaternion::new(w, x, y, z))
}

fn canonicalize(q: Quat) -> Quat {
    if q.w < 0.0 {
        quat_from_wxyz(-q.w, -q.i, -q.j, -q.k)
    } else {
        q
    }
}

impl Pose {
    pub fn new(position: Vec3, orientation: Quat) -> Self {
        Self { position, orientation: canonicalize(orientation) }
    }

    pub fn identity() -> Self {
        Self { position: Vec3::zeros(), orientation: Quat::identity() }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self::new(Vec3::new(x, y, z), Quat::identity())
    }

    /// Rotation of `angle` about `axis` with zero translation.
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Self {
        let q = Quat::from_scaled_axis(axis.normalize() * angle);
        Self::new(Vec3::zeros(), q)
    }

    pub fn from_parts(position: Vec3, rotation: Quat) -> Self {
        Self::new(position, rotation)
    }

    pub fn orientation(&self) -> Quat {
        self.orientation
    }

    /// Standard rigid-transform composition: `self` then applies `other` in
    /// `self`'s frame, i.e. `(self ∘ other)(p) = self(other(p))`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(
            self.position + self.orientation * other.position,
            self.orientation * other.orientation,
        )
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose::new(-(inv * self.position), inv)
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.position + self.orientation * p
    }

    pub fn rotate_vector(&self, v: &Vec3) -> Vec3 {
        self.orientation * v
    }

    /// `self⁻¹ ∘ other`: `other` expressed in `self`'s frame.
    pub fn relative_to(&self, other: &Pose) -> Pose {
        self.inverse().compose(other)
    }

    /// Gripper/camera forward axis (+z of the local frame) in world coordinates.
    pub fn z_axis(&self) -> Vec3 {
        self.orientation * Vec3::z()
    }

    pub fn x_axis(&self) -> Vec3 {
        self.orientation * Vec3::x()
    }

    pub fn y_axis(&self) -> Vec3 {
        self.orientation * Vec3::y()
    }

    /// Quaternion norm drift check; poses built through this API stay unit.
    pub fn is_valid(&self) -> bool {
        let q = self.orientation.as_ref();
        self.position.iter().all(|v| v.is_finite()) && (q.norm() - 1.0).abs() < 1e-6
    }

    pub fn is_finite(&self) -> bool {
        let q = self.orientation.as_ref();
        self.position.iter().all(|v| v.is_finite())
            && [q.w, q.i, q.j, q.k].iter().all(|v| v.is_finite())
    }
}

/// Rotation angle of a unit quaternion in `[0, π]`, computed through `atan2`
/// so that small angles keep full precision.
pub fn quat_angle(q: &Quat) -> f64 {
    let v = Vec3::new(q.i, q.j, q.k).norm();
    2.0 * v.atan2(q.w.abs())
}

/// Axis-angle vector (axis scaled by angle, |angle| ≤ π) of a unit quaternion.
///
/// At exactly π the axis sign is ambiguous; the lexicographically larger of
/// the two candidate axes is returned so the mapping is deterministic.
pub fn quat_to_axis_angle(q: &Quat) -> Vec3 {
    let q = canonicalize(*q);
    let vec = Vec3::new(q.i, q.j, q.k);
    let n = vec.norm();
    if n < 1e-15 {
        return Vec3::zeros();
    }
    let angle = 2.0 * n.atan2(q.w);
    let mut axis = vec / n;
    if (std::f64::consts::PI - angle).abs() < 1e-9 && !lex_ge(&axis, &-axis) {
        axis = -axis;
    }
    axis * angle
}

fn lex_ge(a: &Vec3, b: &Vec3) -> bool {
    for i in 0..3 {
        if a[i] > b[i] {
            return true;
        }
        if a[i] < b[i] {
            return false;
        }
    }
    true
}

/// Position and axis-angle orientation error taking `from` to `to`, both in
/// world coordinates: `Δx = to.p − from.p`, `Δθ = log(to.q ∘ from.q⁻¹)`.
pub fn pose_delta(from: &Pose, to: &Pose) -> (Vec3, Vec3) {
    let dq = to.orientation * from.orientation.inverse();
    (to.position - from.position, quat_to_axis_angle(&dq))
}

/// Applies a world-frame `(Δx, Δθ)` delta to a pose; inverse of [`pose_delta`].
pub fn apply_delta(pose: &Pose, dx: &Vec3, dtheta: &Vec3) -> Pose {
    let dq = Quat::from_scaled_axis(*dtheta);
    Pose::new(pose.position + dx, dq * pose.orientation)
}

/// Angle between two nonzero vectors via `atan2(|a×b|, a·b)`, stable near 0 and π.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}
