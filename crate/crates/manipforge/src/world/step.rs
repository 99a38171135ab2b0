//! World stepping: capped gripper motion, contact stops, attachment, joint
//! projection and vertical settling.

use super::collision::{penetration_against, scene_shapes, ShapeRef};
use super::{
    ArticulatedKind, ArticulatedObject, BodyId, ContactReport, GraspState, Gripper, GripperCmd,
    Support, WorldState, CONTACT_STIFFNESS, MAX_PENETRATION, STEP_POS_CAP, STEP_ROT_CAP,
};
use crate::error::WorldError;
use crate::geom::gripper as grip;
use crate::geom::shapes::{shape_contact, table_separation};
use crate::geom::{apply_delta, pose_delta, Pose, ShapeKind, Vec3};

/// Fraction of the per-step motion cap below which joint stiction holds.
const STICTION_SCALE: f64 = STEP_POS_CAP;
/// Aperture sweep resolution when closing the fingers.
const CLOSE_STEP: f64 = 0.00025;
/// Separation at or below which a pad registers contact during closing.
const TOUCH_TOL: f64 = 1e-4;

fn gripper_shapes_world(g: &Gripper) -> Vec<(ShapeKind, Pose)> {
    g.body_shapes()
        .iter()
        .map(|s| (s.kind, g.pose.compose(&s.local_pose)))
        .collect()
}

fn capped_target(from: &Pose, to: &Pose) -> (Vec3, Vec3) {
    let (mut dx, mut dth) = pose_delta(from, to);
    let dn = dx.norm();
    if dn > STEP_POS_CAP {
        dx *= STEP_POS_CAP / dn;
    }
    let an = dth.norm();
    if an > STEP_ROT_CAP {
        dth *= STEP_ROT_CAP / an;
    }
    (dx, dth)
}

/// Largest fraction of the capped delta that keeps penetration within bounds.
/// `penetration(s)` must be a closure over the candidate configuration.
fn max_feasible_fraction(pen: impl Fn(f64) -> f64) -> f64 {
    if pen(1.0) <= MAX_PENETRATION {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..24 {
        let mid = 0.5 * (lo + hi);
        if pen(mid) <= MAX_PENETRATION {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Advances the world one control step.
///
/// The gripper moves toward `ee_target` with displacement capped at 5 mm and
/// 2°, stopping at first contact (max residual penetration 2 mm). `close`
/// runs the attachment sweep, `open` releases and settles. Attached objects
/// and grasped handles move rigidly with the gripper; a grasped joint moves
/// by the motion projection onto its axis, under stiction and damping.
pub fn step(
    state: &WorldState,
    ee_target: &Pose,
    cmd: GripperCmd,
) -> Result<(WorldState, ContactReport), WorldError> {
    if !ee_target.is_finite() {
        return Err(WorldError::NonFiniteTarget);
    }
    let mut next = state.clone();

    match state.grasp {
        GraspState::Handle { index, grip_offset } => {
            move_grasped_handle(&mut next, index, &grip_offset, ee_target);
        }
        _ => move_free_or_rigid(&mut next, ee_target),
    }

    match cmd {
        GripperCmd::Hold => {}
        GripperCmd::Open => {
            next.gripper.aperture = grip::MAX_APERTURE;
            if let GraspState::Rigid { index } = next.grasp {
                next.objects[index].attached = false;
                next.grasp = GraspState::Free;
                next = settle(&next)?;
            } else {
                next.grasp = GraspState::Free;
            }
        }
        GripperCmd::Close => {
            if matches!(next.grasp, GraspState::Free) {
                let (attached, _) = try_attach(&next);
                next = attached;
            }
        }
    }

    let report = contact_report(&next);
    next.step_index = state.step_index + 1;
    Ok((next, report))
}

fn move_free_or_rigid(state: &mut WorldState, ee_target: &Pose) {
    let (dx, dth) = capped_target(&state.gripper.pose, ee_target);
    let attached_idx = match state.grasp {
        GraspState::Rigid { index } => Some(index),
        _ => None,
    };
    let exclude: Vec<BodyId> = attached_idx.map(|i| state.objects[i].id).into_iter().collect();
    let scene = scene_shapes(state, &exclude);
    let base = state.gripper.pose;
    let grasp_tf = attached_idx.map(|i| state.objects[i].grasp_transform);
    let aperture = state.gripper.aperture;

    let moving_at = |s: f64| -> Vec<(ShapeKind, Pose)> {
        let pose = apply_delta(&base, &(dx * s), &(dth * s));
        let mut shapes: Vec<(ShapeKind, Pose)> = grip::body_shapes(aperture)
            .iter()
            .map(|sh| (sh.kind, pose.compose(&sh.local_pose)))
            .collect();
        if let (Some(i), Some(tf)) = (attached_idx, grasp_tf) {
            let obj_pose = pose.compose(&tf);
            for sh in &state.objects[i].shapes {
                shapes.push((sh.kind, obj_pose.compose(&sh.local_pose)));
            }
        }
        shapes
    };

    let s = max_feasible_fraction(|s| {
        penetration_against(&moving_at(s), &scene, state.table_height)
    });
    state.gripper.pose = apply_delta(&base, &(dx * s), &(dth * s));
    if let Some(i) = attached_idx {
        state.objects[i].pose = state.gripper.pose.compose(&state.objects[i].grasp_transform);
    }
}

fn move_grasped_handle(state: &mut WorldState, index: usize, grip_offset: &Pose, ee_target: &Pose) {
    let (dx, _) = capped_target(&state.gripper.pose, ee_target);
    let art = &state.articulated[index];
    let handle = art.handle_frame();
    // Desired handle translation equals the gripper translation (rigid grasp);
    // project it onto the joint's motion direction at the handle.
    let dq_desired = match art.kind {
        ArticulatedKind::Drawer => dx.dot(&art.joint_axis),
        ArticulatedKind::Door => {
            let axis_point = art.joint_origin.position;
            let r = handle.position - axis_point;
            let r_perp = r - art.joint_axis * r.dot(&art.joint_axis);
            let rn = r_perp.norm();
            if rn < 1e-9 {
                0.0
            } else {
                let tangent = art.joint_axis.cross(&(r_perp / rn));
                dx.dot(&tangent) / rn
            }
        }
    };

    let threshold = art.friction * STICTION_SCALE;
    let dq = if dq_desired.abs() <= threshold {
        0.0
    } else {
        dq_desired * (1.0 - art.damping)
    };
    let q_new = (art.q + dq).clamp(0.0, art.q_limit);
    let dq = q_new - art.q;
    if dq == 0.0 {
        // Joint holds; the gripper stays locked to the handle.
        state.gripper.pose = handle.compose(grip_offset);
        return;
    }

    // Carried riders: unattached objects whose support chain sits on this
    // articulated body.
    let riders: Vec<usize> = (0..state.objects.len())
        .filter(|&i| {
            !state.objects[i].attached && rides_on(state, i, index)
        })
        .collect();

    let exclude: Vec<BodyId> = [art.panel_body_id, art.handle_body_id]
        .into_iter()
        .chain(riders.iter().map(|&i| state.objects[i].id))
        .collect();
    let scene = scene_shapes(state, &exclude);
    let q0 = state.articulated[index].q;
    let panel_old = state.articulated[index].panel_pose();
    let table_height = state.table_height;

    let config_at = |s: f64| -> (f64, Vec<(ShapeKind, Pose)>) {
        let q = q0 + dq * s;
        let art = &state.articulated[index];
        let panel_pose = art.panel_pose_at(q);
        let handle_frame = art.handle_frame_at(q);
        let gpose = handle_frame.compose(grip_offset);
        let mut shapes: Vec<(ShapeKind, Pose)> = Vec::new();
        for sh in std::iter::once(&art.panel).chain(art.extra_shapes.iter()) {
            shapes.push((sh.kind, panel_pose.compose(&sh.local_pose)));
        }
        for sh in &art.handle_shapes {
            shapes.push((sh.kind, handle_frame.compose(&sh.local_pose)));
        }
        for sh in grip::body_shapes(state.gripper.aperture) {
            shapes.push((sh.kind, gpose.compose(&sh.local_pose)));
        }
        let delta = panel_pose.compose(&panel_old.inverse());
        for &i in &riders {
            let rp = delta.compose(&state.objects[i].pose);
            for sh in &state.objects[i].shapes {
                shapes.push((sh.kind, rp.compose(&sh.local_pose)));
            }
        }
        (q, shapes)
    };

    let s = max_feasible_fraction(|s| {
        let (_, shapes) = config_at(s);
        penetration_against(&shapes, &scene, table_height)
    });
    let q = q0 + dq * s;
    let panel_new = state.articulated[index].panel_pose_at(q);
    let delta = panel_new.compose(&panel_old.inverse());
    state.articulated[index].q = q;
    state.gripper.pose = state.articulated[index].handle_frame().compose(grip_offset);
    for &i in &riders {
        state.objects[i].pose = delta.compose(&state.objects[i].pose);
    }
}

fn rides_on(state: &WorldState, obj_index: usize, art_index: usize) -> bool {
    let mut current = obj_index;
    for _ in 0..state.objects.len() + 1 {
        match state.supports.get(current).copied().flatten() {
            Some(Support::Articulated(a)) => return a == art_index,
            Some(Support::Rigid(r)) => current = r,
            _ => return false,
        }
    }
    false
}

/// Attachment predicate on a `close` command.
///
/// The fingers sweep shut symmetrically; success requires both pads touching
/// the same rigid body or handle with contact normals opposing within 30°
/// and the body gap within the aperture limits. On success the object is
/// locked to the gripper via its grasp transform.
pub fn try_attach(state: &WorldState) -> (WorldState, bool) {
    let mut next = state.clone();
    let gpose = state.gripper.pose;

    // Candidate graspable bodies: rigid objects and articulated handles.
    struct Candidate {
        body: CandidateBody,
        shapes: Vec<(ShapeKind, Pose)>,
    }
    enum CandidateBody {
        Rigid(usize),
        Handle(usize),
    }
    let mut candidates: Vec<Candidate> = Vec::new();
    for (i, o) in state.objects.iter().enumerate() {
        if o.attached {
            continue;
        }
        candidates.push(Candidate {
            body: CandidateBody::Rigid(i),
            shapes: o
                .shapes
                .iter()
                .map(|s| (s.kind, o.pose.compose(&s.local_pose)))
                .collect(),
        });
    }
    for (i, a) in state.articulated.iter().enumerate() {
        candidates.push(Candidate {
            body: CandidateBody::Handle(i),
            shapes: a.handle_shapes_world(),
        });
    }
    // Anything else (panels, obstacles) still stalls the sweep on contact.
    let blockers: Vec<ShapeRef> = {
        let exclude: Vec<BodyId> = state
            .objects
            .iter()
            .filter(|o| !o.attached)
            .map(|o| o.id)
            .chain(state.articulated.iter().map(|a| a.handle_body_id))
            .collect();
        scene_shapes(state, &exclude)
    };

    let pad_contact = |aperture: f64, left: bool, shapes: &[(ShapeKind, Pose)]| -> Option<(f64, Vec3)> {
        let pads = grip::finger_pads(aperture);
        let pad = if left { &pads[0] } else { &pads[1] };
        let pad_world = gpose.compose(&pad.local_pose);
        let mut best: Option<(f64, Vec3)> = None;
        for (k, p) in shapes {
            let c = shape_contact(&pad.kind, &pad_world, k, p);
            if best.map_or(true, |(s, _)| c.separation < s) {
                best = Some((c.separation, c.normal));
            }
        }
        best
    };

    let mut aperture = state.gripper.aperture;
    let mut last_ok = aperture;
    while aperture > 0.0 {
        aperture = (aperture - CLOSE_STEP).max(0.0);
        // Stall if a pad would penetrate a non-graspable body too far.
        let pads = grip::finger_pads(aperture);
        let pad_shapes: Vec<(ShapeKind, Pose)> = pads
            .iter()
            .map(|s| (s.kind, gpose.compose(&s.local_pose)))
            .collect();
        if penetration_against(&pad_shapes, &blockers, state.table_height) > MAX_PENETRATION {
            break;
        }

        let mut deep_single = false;
        for cand in &candidates {
            let l = pad_contact(aperture, true, &cand.shapes);
            let r = pad_contact(aperture, false, &cand.shapes);
            if let (Some((ls, ln)), Some((rs, rn))) = (l, r) {
                let both = ls <= TOUCH_TOL && rs <= TOUCH_TOL;
                if both {
                    let opposing = crate::geom::angle_between(&ln, &-rn) <= 30f64.to_radians();
                    let fits = aperture <= grip::MAX_APERTURE;
                    if opposing && fits {
                        next.gripper.aperture = aperture;
                        match cand.body {
                            CandidateBody::Rigid(i) => {
                                next.objects[i].attached = true;
                                next.objects[i].grasp_transform =
                                    gpose.inverse().compose(&state.objects[i].pose);
                                next.grasp = GraspState::Rigid { index: i };
                                if let Some(s) = next.supports.get_mut(i) {
                                    *s = None;
                                }
                            }
                            CandidateBody::Handle(i) => {
                                let frame = state.articulated[i].handle_frame();
                                next.grasp = GraspState::Handle {
                                    index: i,
                                    grip_offset: frame.inverse().compose(&gpose),
                                };
                            }
                        }
                        return (next, true);
                    }
                    // Both pads touch but the predicate fails: stall here.
                    next.gripper.aperture = aperture;
                    return (next, false);
                }
                if ls < -MAX_PENETRATION || rs < -MAX_PENETRATION {
                    deep_single = true;
                }
            } else if let Some((s, _)) = l.or(r) {
                if s < -MAX_PENETRATION {
                    deep_single = true;
                }
            }
        }
        if deep_single {
            break;
        }
        last_ok = aperture;
    }
    next.gripper.aperture = last_ok;
    (next, false)
}

/// Forward kinematics of an articulated object at joint value `q`.
pub fn articulated_forward(
    obj: &ArticulatedObject,
    q: f64,
) -> Result<(Pose, Pose), WorldError> {
    if !(0.0..=obj.q_limit).contains(&q) {
        return Err(WorldError::JointOutOfRange { q, limit: obj.q_limit });
    }
    Ok((obj.handle_frame_at(q), obj.panel_pose_at(q)))
}

/// Drops every unattached rigid object vertically until supported, repeated
/// to a fixpoint. Attached objects are exempt.
pub fn settle(state: &WorldState) -> Result<WorldState, WorldError> {
    let mut next = state.clone();
    next.supports = vec![None; next.objects.len()];
    const MAX_ITERS: usize = 100;
    for iter in 0..MAX_ITERS {
        let mut moved = false;
        for i in 0..next.objects.len() {
            if next.objects[i].attached {
                continue;
            }
            let (drop, support) = drop_distance(&next, i);
            if drop > 1e-9 {
                next.objects[i].pose.position.z -= drop;
                moved = true;
            }
            next.supports[i] = Some(support);
        }
        if !moved {
            return Ok(next);
        }
        if iter == MAX_ITERS - 1 {
            return Err(WorldError::SettleDiverged(MAX_ITERS));
        }
    }
    Ok(next)
}

/// How far object `i` can fall before first contact, and what stops it.
fn drop_distance(state: &WorldState, i: usize) -> (f64, Support) {
    let obj = &state.objects[i];
    let exclude = [obj.id];
    let scene = scene_shapes(state, &exclude);

    let shapes_at = |d: f64| -> Vec<(ShapeKind, Pose)> {
        let mut pose = obj.pose;
        pose.position.z -= d;
        obj.shapes
            .iter()
            .map(|s| (s.kind, pose.compose(&s.local_pose)))
            .collect()
    };

    let support_of = |shapes: &[(ShapeKind, Pose)]| -> Support {
        let mut best = Support::Table;
        let mut best_sep = shapes
            .iter()
            .map(|(k, p)| table_separation(k, p, state.table_height))
            .fold(f64::INFINITY, f64::min);
        for (k, p) in shapes {
            for (sk, sp, id) in &scene {
                let c = shape_contact(k, p, sk, sp);
                if c.separation < best_sep {
                    best_sep = c.separation;
                    best = if let Some(oi) = state.object_index(*id) {
                        Support::Rigid(oi)
                    } else if let Some(ai) = state.articulated_by_body(*id) {
                        Support::Articulated(ai)
                    } else if let Some(obi) =
                        state.obstacles.iter().position(|o| o.id == *id)
                    {
                        Support::Obstacle(obi)
                    } else {
                        Support::Table
                    };
                }
            }
        }
        best
    };

    let min_sep = |shapes: &[(ShapeKind, Pose)]| -> f64 {
        let mut m = shapes
            .iter()
            .map(|(k, p)| table_separation(k, p, state.table_height))
            .fold(f64::INFINITY, f64::min);
        for (k, p) in shapes {
            for (sk, sp, _) in &scene {
                m = m.min(shape_contact(k, p, sk, sp).separation);
            }
        }
        m
    };

    let at_zero = shapes_at(0.0);
    if min_sep(&at_zero) <= 1e-9 {
        return (0.0, support_of(&at_zero));
    }

    // Table separation bounds the fall; march then bisect the first contact.
    let max_drop = at_zero
        .iter()
        .map(|(k, p)| table_separation(k, p, state.table_height))
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let march = 0.002f64;
    let mut lo = 0.0f64;
    let mut hi = max_drop;
    let mut d = march;
    while d < max_drop {
        if min_sep(&shapes_at(d)) <= 0.0 {
            hi = d;
            break;
        }
        lo = d;
        d += march;
    }
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if min_sep(&shapes_at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let fin = shapes_at(hi);
    (hi, support_of(&fin))
}

fn contact_report(state: &WorldState) -> ContactReport {
    let exclude: Vec<BodyId> = match state.grasp {
        GraspState::Rigid { index } => vec![state.objects[index].id],
        _ => Vec::new(),
    };
    let scene = scene_shapes(state, &exclude);
    let pads = state.gripper.finger_pads();
    let mut report = ContactReport::default();
    for (pad_idx, pad) in pads.iter().enumerate() {
        let pad_world = state.gripper.pose.compose(&pad.local_pose);
        let mut pen = 0.0f64;
        let ts = table_separation(&pad.kind, &pad_world, state.table_height);
        if ts <= 0.0 {
            pen = pen.max(-ts);
            report.contacted_ids.insert(super::BACKGROUND_ID);
        }
        for (k, p, id) in &scene {
            let c = shape_contact(&pad.kind, &pad_world, k, p);
            if c.separation <= 0.0 {
                pen = pen.max(-c.separation);
                report.contacted_ids.insert(*id);
            }
        }
        let f = CONTACT_STIFFNESS * pen;
        if pad_idx == 0 {
            report.f_left = f;
        } else {
            report.f_right = f;
        }
    }
    report
}
