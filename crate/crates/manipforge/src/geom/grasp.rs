//! Antipodal grasp sampling on primitive compounds.

use super::gripper;
use super::pose::{angle_between, Pose, Quat, Vec3};
use super::shapes::{
    raycast_compound_exit, sample_compound_surface, sample_unit_vector, shape_contact,
    ShapePrimitive,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A gripper pose from which closing the fingers yields a grasp, with the
/// finger gap at contact.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GraspPose {
    pub pose: Pose,
    pub aperture: f64,
}

pub type GraspSet = Vec<GraspPose>;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AntipodalParams {
    pub cone_half_angle: f64,
    pub standoff: f64,
    /// Rejection-sampling budget as a multiple of the requested count.
    pub budget_factor: usize,
}

impl Default for AntipodalParams {
    fn default() -> Self {
        Self {
            cone_half_angle: 15f64.to_radians(),
            standoff: gripper::GRASP_STANDOFF,
            budget_factor: 50,
        }
    }
}

/// Checks the antipodal predicate for a candidate contact pair: surface
/// normals oppose within the cone and the gap fits the aperture.
pub fn antipodal_pair_ok(
    n1: &Vec3,
    n2: &Vec3,
    gap: f64,
    max_aperture: f64,
    cone_half_angle: f64,
) -> bool {
    gap > 1e-6 && gap <= max_aperture && angle_between(n1, &-n2) <= cone_half_angle
}

/// Samples up to `n` antipodal grasps on a primitive compound (body frame).
///
/// Each attempt draws an area-weighted surface point, shoots a ray through
/// the compound along the inward normal to find the opposing contact, checks
/// the antipodal predicate, and then looks for a collision-free gripper pose
/// at standoff over a handful of approach directions. Runs out of budget
/// rather than erroring; an empty set is a valid outcome.
pub fn sample_antipodal_grasps<R: Rng>(
    shapes: &[ShapePrimitive],
    n: usize,
    max_aperture: f64,
    cone_half_angle: f64,
    rng: &mut R,
) -> GraspSet {
    sample_antipodal_grasps_with(
        shapes,
        n,
        max_aperture,
        &AntipodalParams { cone_half_angle, ..Default::default() },
        rng,
    )
}

pub fn sample_antipodal_grasps_with<R: Rng>(
    shapes: &[ShapePrimitive],
    n: usize,
    max_aperture: f64,
    params: &AntipodalParams,
    rng: &mut R,
) -> GraspSet {
    let mut grasps = GraspSet::new();
    let budget = params.budget_factor * n.max(1);
    let body = Pose::identity();
    for _ in 0..budget {
        if grasps.len() >= n {
            break;
        }
        let (p1, n1) = sample_compound_surface(shapes, rng);
        let dir = -n1;
        let Some((gap, n2)) = raycast_compound_exit(shapes, &body, &p1, &dir) else {
            continue;
        };
        if !antipodal_pair_ok(&n1, &n2, gap, max_aperture, params.cone_half_angle) {
            continue;
        }
        let mid = p1 + dir * (gap / 2.0);
        let closing_axis = -dir; // pads close along ±x onto p1/p2

        // Try a few approach directions perpendicular to the closing axis.
        for _ in 0..8 {
            let v = sample_unit_vector(rng);
            let approach = v - closing_axis * v.dot(&closing_axis);
            if approach.norm_squared() < 1e-6 {
                continue;
            }
            let approach = approach.normalize();
            let y = approach.cross(&closing_axis);
            let rot = nalgebra::Rotation3::from_matrix_unchecked(
                nalgebra::Matrix3::from_columns(&[closing_axis, y, approach]),
            );
            let pose = Pose::new(
                mid - approach * params.standoff,
                Quat::from_rotation_matrix(&rot),
            );
            if gripper_clear(shapes, &pose, max_aperture) {
                grasps.push(GraspPose { pose, aperture: gap });
                break;
            }
        }
    }
    grasps
}

/// True when the fully open gripper body at `pose` does not touch the compound.
pub fn gripper_clear(shapes: &[ShapePrimitive], pose: &Pose, max_aperture: f64) -> bool {
    let body = Pose::identity();
    for g in gripper::body_shapes(max_aperture) {
        let g_world = pose.compose(&g.local_pose);
        for s in shapes {
            let s_world = body.compose(&s.local_pose);
            if shape_contact(&g.kind, &g_world, &s.kind, &s_world).separation <= 0.0 {
                return false;
            }
        }
    }
    true
}
