//! Canonical parallel-jaw gripper shape model.
//!
//! The gripper frame has +z as the approach axis and x as the closing axis;
//! the origin is the tool center point between the finger pads. Pads span
//! z ∈ [0, 0.04] so a grasp midpoint sits at the pad centers when the TCP is
//! held one standoff (2 cm) behind it.

use super::pose::{Pose, Vec3};
use super::shapes::{ShapeKind, ShapePrimitive};

/// Maximum finger opening in meters.
pub const MAX_APERTURE: f64 = 0.08;
/// Pad half extents: thickness (closing axis), width, length (approach axis).
pub const PAD_HALF: [f64; 3] = [0.002, 0.010, 0.020];
/// Palm block half extents.
pub const PALM_HALF: [f64; 3] = [0.050, 0.015, 0.010];
/// Palm center along -z, behind the pads.
pub const PALM_OFFSET_Z: f64 = -0.025;
/// Pad center along +z.
pub const PAD_OFFSET_Z: f64 = 0.020;
/// Default TCP standoff behind a grasp midpoint along the approach axis.
pub const GRASP_STANDOFF: f64 = 0.020;

/// Gripper central axis in the gripper frame.
pub fn central_axis() -> Vec3 {
    Vec3::z()
}

/// Finger pads at the given opening, in the gripper frame. Inner faces sit at
/// x = ±aperture/2.
pub fn finger_pads(aperture: f64) -> [ShapePrimitive; 2] {
    let x = aperture / 2.0 + PAD_HALF[0];
    let pad = ShapeKind::Box { half_extents: PAD_HALF };
    [
        ShapePrimitive::new(pad, Pose::from_translation(x, 0.0, PAD_OFFSET_Z)),
        ShapePrimitive::new(pad, Pose::from_translation(-x, 0.0, PAD_OFFSET_Z)),
    ]
}

/// Full collision body: both pads plus the palm block.
pub fn body_shapes(aperture: f64) -> Vec<ShapePrimitive> {
    let [l, r] = finger_pads(aperture);
    vec![
        l,
        r,
        ShapePrimitive::new(
            ShapeKind::Box { half_extents: PALM_HALF },
            Pose::from_translation(0.0, 0.0, PALM_OFFSET_Z),
        ),
    ]
}

/// Four reference keypoints (two fingertip pads, two base corners) in the
/// gripper frame; affinely independent, so matching all four pins the pose.
pub fn keypoints() -> [Vec3; 4] {
    [
        Vec3::new(0.04, 0.0, 0.04),
        Vec3::new(-0.04, 0.0, 0.04),
        Vec3::new(0.05, 0.015, -0.035),
        Vec3::new(-0.05, -0.015, -0.035),
    ]
}

/// Keypoints transformed into the world frame of a gripper pose.
pub fn keypoints_at(pose: &Pose) -> [Vec3; 4] {
    keypoints().map(|k| pose.transform_point(&k))
}
