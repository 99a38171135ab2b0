use super::*;
use crate::geom::{pose_delta, quat_angle, Pose, Quat, ShapeKind, ShapePrimitive, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};

/// Downward-facing gripper orientation: approach (+z) points at the table.
fn facing_down() -> Quat {
    Quat::from_scaled_axis(Vec3::x() * PI)
}

fn box_object(id: BodyId, half: [f64; 3], x: f64, y: f64) -> RigidObject {
    let shapes = vec![ShapePrimitive::at_origin(ShapeKind::Box { half_extents: half })];
    RigidObject::new(id, shapes, Pose::from_translation(x, y, half[2]))
}

fn simple_scene() -> WorldState {
    let mut w = WorldState::new(0.0);
    w.objects.push(box_object(10, [0.02, 0.05, 0.05], 0.5, 0.0));
    w.supports = vec![Some(Support::Table)];
    w
}

/// Gripper posed to straddle the object's grasp plane: TCP one standoff above
/// the object center, approach pointing down.
fn grasp_ready(w: &mut WorldState, obj_idx: usize) {
    let center = w.objects[obj_idx].pose.position;
    w.gripper.pose = Pose::new(center + Vec3::z() * 0.02, facing_down());
    w.gripper.aperture = crate::geom::gripper::MAX_APERTURE;
}

fn bare_drawer(q_limit: f64, friction: f64, damping: f64) -> ArticulatedObject {
    // Joint +z = world -x (pulls toward the origin); local x = world up.
    let joint = Pose::new(
        Vec3::new(0.7, 0.0, 0.25),
        Quat::from_scaled_axis(Vec3::y() * (-FRAC_PI_2)),
    );
    let handle_offset = Pose::new(
        Vec3::new(0.0, 0.0, 0.01 + 0.04),
        Quat::from_scaled_axis(Vec3::y() * FRAC_PI_2),
    );
    ArticulatedObject {
        kind: ArticulatedKind::Drawer,
        panel_body_id: 20,
        handle_body_id: 21,
        label: "drawer".into(),
        panel: ShapePrimitive::at_origin(ShapeKind::Box { half_extents: [0.15, 0.2, 0.01] }),
        extra_shapes: vec![],
        handle_shapes: vec![ShapePrimitive::at_origin(ShapeKind::Box {
            half_extents: [0.008, 0.05, 0.008],
        })],
        joint_origin: joint,
        joint_axis: joint.z_axis(),
        panel_offset: Pose::identity(),
        handle_offset,
        q: 0.0,
        q_limit,
        damping,
        friction,
        handle_grasps: Vec::new(),
        template: None,
    }
}

#[test]
fn hold_at_current_pose_is_a_noop() {
    let w = simple_scene();
    let target = w.gripper.pose;
    let (next, report) = step(&w, &target, GripperCmd::Hold).unwrap();
    assert_eq!(next.gripper.pose, w.gripper.pose);
    assert_eq!(next.objects[0].pose, w.objects[0].pose);
    assert_eq!(report.f_left, 0.0);
    assert_eq!(report.f_right, 0.0);
    assert_eq!(next.step_index, w.step_index + 1);
}

#[test]
fn free_motion_caps_at_five_millimeters() {
    let w = simple_scene();
    let target = Pose::new(
        w.gripper.pose.position + Vec3::x() * 0.01,
        w.gripper.pose.orientation(),
    );
    let (next, _) = step(&w, &target, GripperCmd::Hold).unwrap();
    let moved = (next.gripper.pose.position - w.gripper.pose.position).norm();
    assert!((moved - STEP_POS_CAP).abs() < 1e-12, "moved {moved}");
}

#[test]
fn nan_target_is_rejected() {
    let w = simple_scene();
    let target = Pose::from_translation(f64::NAN, 0.0, 0.0);
    assert!(step(&w, &target, GripperCmd::Hold).is_err());
}

#[test]
fn closing_on_straddled_box_attaches() {
    let mut w = simple_scene();
    grasp_ready(&mut w, 0);
    let target = w.gripper.pose;
    let (next, _) = step(&w, &target, GripperCmd::Close).unwrap();
    assert!(next.objects[0].attached);
    assert!(matches!(next.grasp, GraspState::Rigid { index: 0 }));
    assert!((next.gripper.aperture - 0.04).abs() < 0.001);
    // Pose locked to the gripper: lift and verify the object follows exactly.
    let up = Pose::new(next.gripper.pose.position + Vec3::z() * 0.1, next.gripper.pose.orientation());
    let mut cur = next;
    for _ in 0..30 {
        let (n, _) = step(&cur, &up, GripperCmd::Hold).unwrap();
        assert_eq!(
            n.objects[0].pose,
            n.gripper.pose.compose(&n.objects[0].grasp_transform)
        );
        cur = n;
    }
    assert!(cur.objects[0].pose.position.z > 0.11);
}

#[test]
fn single_pad_contact_fails_to_attach() {
    let mut w = simple_scene();
    grasp_ready(&mut w, 0);
    // Shift sideways so only one pad line touches the box.
    w.gripper.pose.position.x += 0.05;
    let (next, ok) = try_attach(&w);
    assert!(!ok);
    assert!(!next.objects[0].attached);
}

#[test]
fn pads_on_two_bodies_fail_to_attach() {
    let mut w = WorldState::new(0.0);
    // Two thin plates under each pad path, 7 cm apart.
    let half = [0.004, 0.05, 0.05];
    let mut a = box_object(10, half, 0.5, 0.0);
    a.pose.position.x = 0.5 + 0.034;
    let mut b = box_object(11, half, 0.5, 0.0);
    b.pose.position.x = 0.5 - 0.034;
    w.objects.push(a);
    w.objects.push(b);
    w.supports = vec![Some(Support::Table); 2];
    w.gripper.pose = Pose::new(Vec3::new(0.5, 0.0, 0.05 + 0.02), facing_down());
    let (next, ok) = try_attach(&w);
    assert!(!ok);
    assert!(matches!(next.grasp, GraspState::Free));
}

#[test]
fn articulated_forward_examples() {
    let d = bare_drawer(0.3, 0.0, 0.0);
    let (h0, _) = articulated_forward(&d, 0.0).unwrap();
    assert_eq!(h0, d.handle_frame_at(0.0));
    let (h1, p1) = articulated_forward(&d, 0.1).unwrap();
    assert!(((h1.position - h0.position) - d.joint_axis * 0.1).norm() < 1e-12);
    assert!(((p1.position - d.panel_pose_at(0.0).position) - d.joint_axis * 0.1).norm() < 1e-12);
    assert!(articulated_forward(&d, 0.4).is_err());
    assert!(articulated_forward(&d, -0.01).is_err());

    // Door: 90° about the vertical hinge.
    let mut door = bare_drawer(FRAC_PI_2, 0.0, 0.0);
    door.kind = ArticulatedKind::Door;
    door.joint_origin = Pose::from_translation(0.7, 0.2, 0.25);
    door.joint_axis = Vec3::z();
    door.panel_offset = Pose::from_translation(-0.15, 0.0, 0.0);
    let (hq, _) = articulated_forward(&door, FRAC_PI_2).unwrap();
    let (h0, _) = articulated_forward(&door, 0.0).unwrap();
    // Compare the hinge-perpendicular components: 90° apart, equal radius.
    let r0 = h0.position - door.joint_origin.position;
    let rq = hq.position - door.joint_origin.position;
    let xy0 = Vec3::new(r0.x, r0.y, 0.0);
    let xyq = Vec3::new(rq.x, rq.y, 0.0);
    assert!((xy0.norm() - xyq.norm()).abs() < 1e-12);
    assert!(xy0.dot(&xyq).abs() < 1e-9, "right angle expected");
    assert!((r0.z - rq.z).abs() < 1e-12);
}

#[test]
fn grasped_drawer_pull_updates_q() {
    let mut w = WorldState::new(0.0);
    let drawer = bare_drawer(0.3, 0.0, 0.0);
    let grasp_pose = drawer.handle_frame().compose(&Pose::new(
        Vec3::new(0.0, 0.0, -0.02),
        Quat::identity(),
    ));
    w.articulated.push(drawer);
    w.gripper.pose = grasp_pose;
    let (mut cur, ok) = try_attach(&w);
    assert!(ok, "handle grasp should succeed");
    assert!(matches!(cur.grasp, GraspState::Handle { .. }));

    // Pull along the joint axis for a while.
    let axis = cur.articulated[0].joint_axis;
    for _ in 0..40 {
        let target = Pose::new(cur.gripper.pose.position + axis * 0.01, cur.gripper.pose.orientation());
        let (n, _) = step(&cur, &target, GripperCmd::Hold).unwrap();
        cur = n;
    }
    assert!(cur.articulated[0].q > 0.15, "q = {}", cur.articulated[0].q);
    // Gripper stays locked to the handle frame.
    if let GraspState::Handle { index, grip_offset } = cur.grasp {
        let expect = cur.articulated[index].handle_frame().compose(&grip_offset);
        assert_eq!(cur.gripper.pose, expect);
    }
}

#[test]
fn stiction_blocks_slow_pulls() {
    let mut w = WorldState::new(0.0);
    // friction 0.5 => stiction threshold 0.5 * 5 mm = 2.5 mm per step.
    let drawer = bare_drawer(0.3, 0.5, 0.0);
    let grasp_pose = drawer
        .handle_frame()
        .compose(&Pose::new(Vec3::new(0.0, 0.0, -0.02), Quat::identity()));
    w.articulated.push(drawer);
    w.gripper.pose = grasp_pose;
    let (cur, ok) = try_attach(&w);
    assert!(ok);
    let axis = cur.articulated[0].joint_axis;
    // 1 mm/step commanded: below threshold, the joint must hold.
    let target = Pose::new(cur.gripper.pose.position + axis * 0.001, cur.gripper.pose.orientation());
    let (next, _) = step(&cur, &target, GripperCmd::Hold).unwrap();
    assert_eq!(next.articulated[0].q, 0.0);
    // Full-speed pull: above threshold, the joint moves.
    let target = Pose::new(cur.gripper.pose.position + axis * 0.01, cur.gripper.pose.orientation());
    let (next, _) = step(&cur, &target, GripperCmd::Hold).unwrap();
    assert!(next.articulated[0].q > 0.0);
}

#[test]
fn q_stays_in_range_under_random_actions() {
    let mut w = WorldState::new(0.0);
    let drawer = bare_drawer(0.05, 0.0, 0.1);
    let grasp_pose = drawer
        .handle_frame()
        .compose(&Pose::new(Vec3::new(0.0, 0.0, -0.02), Quat::identity()));
    w.articulated.push(drawer);
    w.gripper.pose = grasp_pose;
    let (mut cur, ok) = try_attach(&w);
    assert!(ok);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..500 {
        let jitter = Vec3::new(
            rng.random_range(-0.02..0.02),
            rng.random_range(-0.02..0.02),
            rng.random_range(-0.02..0.02),
        );
        let target = Pose::new(cur.gripper.pose.position + jitter, cur.gripper.pose.orientation());
        let (n, _) = step(&cur, &target, GripperCmd::Hold).unwrap();
        let q = n.articulated[0].q;
        assert!((0.0..=0.05).contains(&q), "q out of range: {q}");
        cur = n;
    }
}

#[test]
fn settle_examples() {
    let mut w = simple_scene();
    let settled = settle(&w).unwrap();
    assert_eq!(settled.objects[0].pose, w.objects[0].pose);

    w.objects[0].pose.position.z += 0.1;
    let settled = settle(&w).unwrap();
    assert!((settled.objects[0].pose.position.z - 0.05).abs() < 1e-6);
    assert_eq!(settled.supports[0], Some(Support::Table));

    // Attached objects are exempt.
    w.objects[0].attached = true;
    w.objects[0].pose.position.z = 0.3;
    let settled = settle(&w).unwrap();
    assert_eq!(settled.objects[0].pose.position.z, 0.3);
}

#[test]
fn settle_stacks_objects() {
    let mut w = WorldState::new(0.0);
    w.objects.push(box_object(10, [0.05, 0.05, 0.02], 0.4, 0.0));
    let mut top = box_object(11, [0.02, 0.02, 0.02], 0.4, 0.0);
    top.pose.position.z = 0.5;
    w.objects.push(top);
    w.supports = vec![None, None];
    let settled = settle(&w).unwrap();
    assert!((settled.objects[1].pose.position.z - 0.06).abs() < 1e-4);
    assert_eq!(settled.supports[1], Some(Support::Rigid(0)));
}

#[test]
fn penetration_never_exceeds_cap_fuzz() {
    let mut w = simple_scene();
    w.objects.push(box_object(11, [0.03, 0.03, 0.08], 0.42, 0.1));
    w.supports = vec![Some(Support::Table); 2];
    w.gripper.pose = Pose::new(Vec3::new(0.45, 0.05, 0.12), facing_down());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cur = w;
    for i in 0..10_000 {
        let jitter = Vec3::new(
            rng.random_range(-0.02..0.02),
            rng.random_range(-0.02..0.02),
            rng.random_range(-0.02..0.02),
        );
        let spin = Vec3::new(
            rng.random_range(-0.1..0.1),
            rng.random_range(-0.1..0.1),
            rng.random_range(-0.1..0.1),
        );
        let target = crate::geom::apply_delta(&cur.gripper.pose, &jitter, &spin);
        let cmd = match i % 97 {
            0 => GripperCmd::Close,
            1 => GripperCmd::Open,
            _ => GripperCmd::Hold,
        };
        let (n, _) = step(&cur, &target, cmd).unwrap();
        let scene = scene_shapes(&n, &[]);
        let moving: Vec<(ShapeKind, Pose)> = n
            .gripper
            .body_shapes()
            .iter()
            .map(|s| (s.kind, n.gripper.pose.compose(&s.local_pose)))
            .collect();
        let exclude = match n.grasp {
            GraspState::Rigid { index } => Some(n.objects[index].id),
            _ => None,
        };
        let scene: Vec<_> = scene
            .into_iter()
            .filter(|(_, _, id)| Some(*id) != exclude)
            .collect();
        let mut pen = 0.0f64;
        for (k, p) in &moving {
            for (sk, sp, _) in &scene {
                let c = crate::geom::shape_contact(k, p, sk, sp);
                pen = pen.max(-c.separation);
            }
        }
        assert!(pen <= MAX_PENETRATION + 1e-9, "step {i}: pen {pen}");
        cur = n;
    }
}

#[test]
fn step_is_deterministic() {
    let run = || {
        let mut w = simple_scene();
        grasp_ready(&mut w, 0);
        let mut cur = w;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for i in 0..200 {
            let jitter = Vec3::new(
                rng.random_range(-0.01..0.01),
                rng.random_range(-0.01..0.01),
                rng.random_range(-0.01..0.01),
            );
            let target = Pose::new(cur.gripper.pose.position + jitter, cur.gripper.pose.orientation());
            let cmd = if i == 5 { GripperCmd::Close } else { GripperCmd::Hold };
            let (n, _) = step(&cur, &target, cmd).unwrap();
            cur = n;
        }
        cur
    };
    let a = run();
    let b = run();
    assert_eq!(a.gripper.pose, b.gripper.pose);
    assert_eq!(a.objects[0].pose, b.objects[0].pose);
    assert_eq!(a.gripper.aperture, b.gripper.aperture);
}

#[test]
fn step_equivariant_under_yaw_and_translation() {
    let t = Pose::new(
        Vec3::new(0.3, -0.2, 0.15),
        Quat::from_scaled_axis(Vec3::z() * 0.7),
    );
    let mut w = simple_scene();
    grasp_ready(&mut w, 0);
    let mut wt = w.clone();
    wt.apply_transform(&t).unwrap();

    let mut cur = w;
    let mut cur_t = wt;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..120 {
        let jitter = Vec3::new(
            rng.random_range(-0.01..0.01),
            rng.random_range(-0.01..0.01),
            rng.random_range(-0.01..0.01),
        );
        let target = Pose::new(cur.gripper.pose.position + jitter, cur.gripper.pose.orientation());
        let target_t = t.compose(&target);
        let cmd = if i == 20 { GripperCmd::Close } else { GripperCmd::Hold };
        let (a, ra) = step(&cur, &target, cmd).unwrap();
        let (b, rb) = step(&cur_t, &target_t, cmd).unwrap();
        let mapped = t.compose(&a.gripper.pose);
        assert!((mapped.position - b.gripper.pose.position).norm() < 1e-9);
        let qerr = mapped.orientation().inverse() * b.gripper.pose.orientation();
        assert!(quat_angle(&qerr) < 1e-9);
        assert!((ra.f_left - rb.f_left).abs() < 1e-9);
        assert!((ra.f_right - rb.f_right).abs() < 1e-9);
        assert_eq!(ra.contacted_ids, rb.contacted_ids);
        let obj_mapped = t.compose(&a.objects[0].pose);
        assert!((obj_mapped.position - b.objects[0].pose.position).norm() < 1e-9);
        cur = a;
        cur_t = b;
    }
}

#[test]
fn open_releases_and_settles() {
    let mut w = simple_scene();
    grasp_ready(&mut w, 0);
    let (grasped, _) = step(&w, &w.gripper.pose, GripperCmd::Close).unwrap();
    assert!(grasped.objects[0].attached);
    // Lift, then release: the object should fall back to the table.
    let mut cur = grasped;
    for _ in 0..30 {
        let up = Pose::new(cur.gripper.pose.position + Vec3::z() * 0.01, cur.gripper.pose.orientation());
        let (n, _) = step(&cur, &up, GripperCmd::Hold).unwrap();
        cur = n;
    }
    assert!(cur.objects[0].pose.position.z > 0.1);
    let (released, _) = step(&cur, &cur.gripper.pose, GripperCmd::Open).unwrap();
    assert!(!released.objects[0].attached);
    assert!((released.objects[0].pose.position.z - 0.05).abs() < 1e-4);
}

#[test]
fn rotation_delta_respects_two_degree_cap() {
    let w = simple_scene();
    let target = Pose::new(
        w.gripper.pose.position,
        Quat::from_scaled_axis(Vec3::z() * 0.5) * w.gripper.pose.orientation(),
    );
    let (next, _) = step(&w, &target, GripperCmd::Hold).unwrap();
    let (_, dth) = pose_delta(&w.gripper.pose, &next.gripper.pose);
    assert!((dth.norm() - STEP_ROT_CAP).abs() < 1e-9);
}
