//! Collision queries over shape sets.

use super::{BodyId, WorldState};
use crate::geom::shapes::{shape_contact, table_separation};
use crate::geom::{Pose, ShapeKind};

/// A posed primitive tagged with the body it belongs to.
pub type ShapeRef = (ShapeKind, Pose, BodyId);

/// All scene shapes (rigid objects, articulated bodies, obstacles) except the
/// given body ids. The gripper is never included; it is queried against this.
pub fn scene_shapes(world: &WorldState, exclude: &[BodyId]) -> Vec<ShapeRef> {
    let mut out = Vec::new();
    for o in &world.objects {
        if exclude.contains(&o.id) {
            continue;
        }
        for s in &o.shapes {
            out.push((s.kind, o.pose.compose(&s.local_pose), o.id));
        }
    }
    for a in &world.articulated {
        if !exclude.contains(&a.panel_body_id) {
            for (kind, pose) in a.panel_shapes_world() {
                out.push((kind, pose, a.panel_body_id));
            }
        }
        if !exclude.contains(&a.handle_body_id) {
            for (kind, pose) in a.handle_shapes_world() {
                out.push((kind, pose, a.handle_body_id));
            }
        }
    }
    for ob in &world.obstacles {
        if exclude.contains(&ob.id) {
            continue;
        }
        out.push((ob.shape.kind, ob.pose.compose(&ob.shape.local_pose), ob.id));
    }
    out
}

/// Pairwise primitive tests between two shape sets.
///
/// Touching at exactly zero separation reports contact with zero penetration;
/// `colliding` is false only when every pair is strictly separated.
pub fn check_collision(
    a: &[(ShapeKind, Pose)],
    b: &[(ShapeKind, Pose)],
) -> (bool, f64) {
    let mut colliding = false;
    let mut max_pen = 0.0f64;
    for (ka, pa) in a {
        for (kb, pb) in b {
            let c = shape_contact(ka, pa, kb, pb);
            if c.separation <= 0.0 {
                colliding = true;
                max_pen = max_pen.max(-c.separation);
            }
        }
    }
    (colliding, max_pen)
}

/// Max penetration of a moving shape set against scene shapes plus the table.
pub(crate) fn penetration_against(
    moving: &[(ShapeKind, Pose)],
    scene: &[ShapeRef],
    table_height: f64,
) -> f64 {
    let mut max_pen = 0.0f64;
    for (k, p) in moving {
        let ts = table_separation(k, p, table_height);
        if ts < 0.0 {
            max_pen = max_pen.max(-ts);
        }
        for (sk, sp, _) in scene {
            let c = shape_contact(k, p, sk, sp);
            if c.separation < 0.0 {
                max_pen = max_pen.max(-c.separation);
            }
        }
    }
    max_pen
}

/// True when every pair is strictly separated and nothing dips below the table.
pub(crate) fn clear_of(
    moving: &[(ShapeKind, Pose)],
    scene: &[ShapeRef],
    table_height: f64,
) -> bool {
    for (k, p) in moving {
        if table_separation(k, p, table_height) <= 0.0 {
            return false;
        }
        for (sk, sp, _) in scene {
            if shape_contact(k, p, sk, sp).separation <= 0.0 {
                return false;
            }
        }
    }
    true
}
