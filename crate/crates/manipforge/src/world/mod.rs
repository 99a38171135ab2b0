//! Quasi-static tabletop world: a free-flying 6-DoF gripper, rigid objects,
//! articulated cuboid doors/drawers, attachment-based grasping and
//! penetration-proxy contacts.
//!
//! There are no dynamics here by design: the gripper is a kinematic body with
//! per-step motion caps, grasping is an antipodal attachment predicate, and
//! joints move only by projecting grasped-handle motion onto their axis.

mod collision;
#[cfg(test)]
mod tests;
mod step;

pub use collision::{check_collision, scene_shapes, ShapeRef};
pub use step::{articulated_forward, settle, step, try_attach};

use crate::error::WorldError;
use crate::geom::gripper as grip;
use crate::geom::{Pose, ShapeKind, ShapePrimitive, Vec3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub type BodyId = u32;

/// Body id of the table/background in segmentation output.
pub const BACKGROUND_ID: BodyId = 0;
/// Body id of the gripper itself.
pub const GRIPPER_ID: BodyId = 1;
/// First id available to scene bodies.
pub const FIRST_BODY_ID: BodyId = 10;

/// Per-step displacement cap (m) and rotation cap (rad).
pub const STEP_POS_CAP: f64 = 0.005;
pub const STEP_ROT_CAP: f64 = 2.0 * std::f64::consts::PI / 180.0;
/// Maximum tolerated penetration after a step.
pub const MAX_PENETRATION: f64 = 0.002;
/// Contact force proxy stiffness (N per meter of penetration).
pub const CONTACT_STIFFNESS: f64 = 1000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GripperCmd {
    Open,
    Close,
    Hold,
}

/// Free-flying parallel-jaw gripper; +z is the approach axis, x the closing
/// axis, pads symmetric about the z-axis.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Gripper {
    pub pose: Pose,
    pub aperture: f64,
}

impl Gripper {
    pub fn new(pose: Pose) -> Self {
        Self { pose, aperture: grip::MAX_APERTURE }
    }

    /// Central axis `v` in world coordinates.
    pub fn central_axis(&self) -> Vec3 {
        self.pose.rotate_vector(&grip::central_axis())
    }

    pub fn finger_pads(&self) -> [ShapePrimitive; 2] {
        grip::finger_pads(self.aperture)
    }

    pub fn body_shapes(&self) -> Vec<ShapePrimitive> {
        grip::body_shapes(self.aperture)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RigidObject {
    pub id: BodyId,
    pub label: String,
    pub shapes: Vec<ShapePrimitive>,
    pub pose: Pose,
    pub attached: bool,
    /// Object pose in the gripper frame; meaningful only while attached.
    pub grasp_transform: Pose,
    /// Shape keypoints in the body frame (FPS subsample of the surface).
    pub keypoints: Vec<Vec3>,
    /// Index into the dataset manifest, when the object came from a template.
    pub template: Option<String>,
}

impl RigidObject {
    pub fn new(id: BodyId, shapes: Vec<ShapePrimitive>, pose: Pose) -> Self {
        Self {
            id,
            label: String::new(),
            shapes,
            pose,
            attached: false,
            grasp_transform: Pose::identity(),
            keypoints: Vec::new(),
            template: None,
        }
    }

    pub fn keypoints_world(&self) -> Vec<Vec3> {
        self.keypoints.iter().map(|k| self.pose.transform_point(k)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArticulatedKind {
    Door,
    Drawer,
}

/// A door (vertical hinge) or drawer (prismatic pull) built from cuboids.
///
/// The joint frame (`joint_origin`) has +z along the joint axis: vertical for
/// doors, the outward pull direction for drawers. `panel_offset` places the
/// moving body in the joint frame at q = 0 and `handle_offset` places the
/// handle frame on the panel. The handle frame's +x points into the panel
/// (the approach direction when grasping).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArticulatedObject {
    pub kind: ArticulatedKind,
    pub panel_body_id: BodyId,
    pub handle_body_id: BodyId,
    pub label: String,
    pub panel: ShapePrimitive,
    /// Extra shapes rigid with the panel (drawer cavity walls), panel frame.
    pub extra_shapes: Vec<ShapePrimitive>,
    pub handle_shapes: Vec<ShapePrimitive>,
    pub joint_origin: Pose,
    pub joint_axis: Vec3,
    pub panel_offset: Pose,
    pub handle_offset: Pose,
    pub q: f64,
    pub q_limit: f64,
    pub damping: f64,
    pub friction: f64,
    /// Handle grasp poses in the handle frame, from the dataset manifest.
    pub handle_grasps: Vec<crate::geom::GraspPose>,
    pub template: Option<String>,
}

impl ArticulatedObject {
    pub fn panel_pose_at(&self, q: f64) -> Pose {
        let joint_motion = match self.kind {
            ArticulatedKind::Door => Pose::from_axis_angle(Vec3::z(), q),
            ArticulatedKind::Drawer => Pose::from_translation(0.0, 0.0, q),
        };
        self.joint_origin.compose(&joint_motion).compose(&self.panel_offset)
    }

    pub fn panel_pose(&self) -> Pose {
        self.panel_pose_at(self.q)
    }

    pub fn handle_frame_at(&self, q: f64) -> Pose {
        self.panel_pose_at(q).compose(&self.handle_offset)
    }

    pub fn handle_frame(&self) -> Pose {
        self.handle_frame_at(self.q)
    }

    /// Panel + cavity shapes with their world poses at the current q.
    pub fn panel_shapes_world(&self) -> Vec<(ShapeKind, Pose)> {
        let panel_pose = self.panel_pose();
        std::iter::once(&self.panel)
            .chain(self.extra_shapes.iter())
            .map(|s| (s.kind, panel_pose.compose(&s.local_pose)))
            .collect()
    }

    pub fn handle_shapes_world(&self) -> Vec<(ShapeKind, Pose)> {
        let frame = self.handle_frame();
        self.handle_shapes
            .iter()
            .map(|s| (s.kind, frame.compose(&s.local_pose)))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: BodyId,
    pub label: String,
    pub shape: ShapePrimitive,
    pub pose: Pose,
}

/// What the gripper currently holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GraspState {
    Free,
    Rigid { index: usize },
    /// Holding an articulated handle; `grip_offset` is the gripper pose in
    /// the handle frame.
    Handle { index: usize, grip_offset: Pose },
}

/// What a settled object rests on; moving supports carry their riders.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    Table,
    Rigid(usize),
    Articulated(usize),
    Obstacle(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WorldState {
    pub gripper: Gripper,
    pub grasp: GraspState,
    pub objects: Vec<RigidObject>,
    pub articulated: Vec<ArticulatedObject>,
    pub obstacles: Vec<Obstacle>,
    pub table_height: f64,
    pub step_index: u64,
    /// Support assignment from the last settle, indexed like `objects`.
    pub supports: Vec<Option<Support>>,
}

impl WorldState {
    pub fn new(table_height: f64) -> Self {
        Self {
            gripper: Gripper::new(Pose::from_translation(0.0, 0.0, table_height + 0.4)),
            grasp: GraspState::Free,
            objects: Vec::new(),
            articulated: Vec::new(),
            obstacles: Vec::new(),
            table_height,
            step_index: 0,
            supports: Vec::new(),
        }
    }

    pub fn object_by_id(&self, id: BodyId) -> Option<&RigidObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn object_index(&self, id: BodyId) -> Option<usize> {
        self.objects.iter().position(|o| o.id == id)
    }

    pub fn articulated_by_body(&self, id: BodyId) -> Option<usize> {
        self.articulated
            .iter()
            .position(|a| a.panel_body_id == id || a.handle_body_id == id)
    }

    pub fn body_label(&self, label: &str) -> Option<BodyId> {
        if let Some(o) = self.objects.iter().find(|o| o.label == label) {
            return Some(o.id);
        }
        for a in &self.articulated {
            if a.label == label {
                return Some(a.handle_body_id);
            }
            if format!("{}_panel", a.label) == label {
                return Some(a.panel_body_id);
            }
        }
        self.obstacles.iter().find(|o| o.label == label).map(|o| o.id)
    }

    pub fn attached_object(&self) -> Option<&RigidObject> {
        match self.grasp {
            GraspState::Rigid { index } => self.objects.get(index),
            _ => None,
        }
    }

    /// Applies a gravity-aligned rigid transform (translation plus rotation
    /// about the vertical axis) to every pose in the scene. General tilts are
    /// rejected: the table and settling direction are gravity-bound.
    pub fn apply_transform(&mut self, t: &Pose) -> Result<(), WorldError> {
        if (t.z_axis() - Vec3::z()).norm() > 1e-9 || !t.is_finite() {
            return Err(WorldError::NonFiniteTarget);
        }
        self.gripper.pose = t.compose(&self.gripper.pose);
        for o in &mut self.objects {
            o.pose = t.compose(&o.pose);
        }
        for a in &mut self.articulated {
            a.joint_origin = t.compose(&a.joint_origin);
            a.joint_axis = t.rotate_vector(&a.joint_axis);
        }
        for o in &mut self.obstacles {
            o.pose = t.compose(&o.pose);
        }
        self.table_height += t.position.z;
        Ok(())
    }

    /// Largest bounding-sphere reach of any body, for planner sampling bounds.
    pub fn scene_bounds(&self) -> (Vec3, Vec3) {
        let mut lo = Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        let mut grow = |p: Vec3, r: f64| {
            for i in 0..3 {
                lo[i] = lo[i].min(p[i] - r);
                hi[i] = hi[i].max(p[i] + r);
            }
        };
        grow(self.gripper.pose.position, 0.2);
        for (kind, pose, _) in scene_shapes(self, &[]) {
            grow(pose.position, kind.bounding_radius());
        }
        if lo.x > hi.x {
            (Vec3::new(-1.0, -1.0, 0.0), Vec3::new(1.0, 1.0, 1.0))
        } else {
            (lo, hi)
        }
    }
}

/// Per-pad contact force proxies and the set of touched body ids.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContactReport {
    pub f_left: f64,
    pub f_right: f64,
    pub contacted_ids: BTreeSet<BodyId>,
}
