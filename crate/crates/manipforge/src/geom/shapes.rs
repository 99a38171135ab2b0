//! Shape primitives (box / sphere / cylinder) with surface sampling, ray
//! intersection and pairwise contact queries.
//!
//! Cylinders are treated exactly in ray queries (lateral wall + caps) and as
//! their bounding capsule in contact queries, which keeps every pair test a
//! closed form or a 1-D convex search.

use super::pose::{Pose, Vec3};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeKind {
    Box { half_extents: [f64; 3] },
    Sphere { radius: f64 },
    /// Axis along local +z, total height `2 * half_height`.
    Cylinder { radius: f64, half_height: f64 },
}

impl ShapeKind {
    pub fn is_valid(&self) -> bool {
        match self {
            ShapeKind::Box { half_extents } => half_extents.iter().all(|&v| v > 0.0),
            ShapeKind::Sphere { radius } => *radius > 0.0,
            ShapeKind::Cylinder { radius, half_height } => *radius > 0.0 && *half_height > 0.0,
        }
    }

    pub fn surface_area(&self) -> f64 {
        use std::f64::consts::PI;
        match self {
            ShapeKind::Box { half_extents: [a, b, c] } => 8.0 * (a * b + b * c + c * a),
            ShapeKind::Sphere { radius: r } => 4.0 * PI * r * r,
            ShapeKind::Cylinder { radius: r, half_height: h } => {
                2.0 * PI * r * (2.0 * h) + 2.0 * PI * r * r
            }
        }
    }

    /// Radius of the bounding sphere around the local origin.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            ShapeKind::Box { half_extents: [a, b, c] } => (a * a + b * b + c * c).sqrt(),
            ShapeKind::Sphere { radius } => *radius,
            ShapeKind::Cylinder { radius: r, half_height: h } => (r * r + h * h).sqrt(),
        }
    }
}

/// One primitive of a rigid body, placed by `local_pose` in the body frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapePrimitive {
    #[serde(flatten)]
    pub kind: ShapeKind,
    pub local_pose: Pose,
}

impl ShapePrimitive {
    pub fn new(kind: ShapeKind, local_pose: Pose) -> Self {
        Self { kind, local_pose }
    }

    pub fn at_origin(kind: ShapeKind) -> Self {
        Self { kind, local_pose: Pose::identity() }
    }
}

/// Uniform area-weighted surface sample in the primitive's local frame.
/// Returns (point, outward normal).
pub fn sample_surface_local<R: Rng>(kind: &ShapeKind, rng: &mut R) -> (Vec3, Vec3) {
    use std::f64::consts::PI;
    match kind {
        ShapeKind::Box { half_extents: [a, b, c] } => {
            let areas = [b * c, b * c, a * c, a * c, a * b, a * b];
            let face = pick_weighted(&areas, rng);
            let (axis, sign) = (face / 2, if face % 2 == 0 { 1.0 } else { -1.0 });
            let h = [*a, *b, *c];
            let u = rng.random_range(-1.0..1.0);
            let v = rng.random_range(-1.0..1.0);
            let mut p = Vec3::zeros();
            p[axis] = sign * h[axis];
            let (i, j) = ((axis + 1) % 3, (axis + 2) % 3);
            p[i] = u * h[i];
            p[j] = v * h[j];
            let mut n = Vec3::zeros();
            n[axis] = sign;
            (p, n)
        }
        ShapeKind::Sphere { radius: r } => {
            let dir = sample_unit_vector(rng);
            (dir * *r, dir)
        }
        ShapeKind::Cylinder { radius: r, half_height: h } => {
            let lateral = 2.0 * PI * r * (2.0 * h);
            let cap = PI * r * r;
            let pick = pick_weighted(&[lateral, cap, cap], rng);
            if pick == 0 {
                let th = rng.random_range(0.0..2.0 * PI);
                let z = rng.random_range(-*h..*h);
                (
                    Vec3::new(r * th.cos(), r * th.sin(), z),
                    Vec3::new(th.cos(), th.sin(), 0.0),
                )
            } else {
                let sign = if pick == 1 { 1.0 } else { -1.0 };
                let th = rng.random_range(0.0..2.0 * PI);
                let rr = r * rng.random_range(0.0f64..1.0).sqrt();
                (
                    Vec3::new(rr * th.cos(), rr * th.sin(), sign * h),
                    Vec3::new(0.0, 0.0, sign),
                )
            }
        }
    }
}

pub fn sample_unit_vector<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn pick_weighted<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut x = rng.random_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if x < *w {
            return i;
        }
        x -= w;
    }
    weights.len() - 1
}

/// Area-weighted surface sample over a compound, in the body frame.
pub fn sample_compound_surface<R: Rng>(
    shapes: &[ShapePrimitive],
    rng: &mut R,
) -> (Vec3, Vec3) {
    let areas: Vec<f64> = shapes.iter().map(|s| s.kind.surface_area()).collect();
    let idx = pick_weighted(&areas, rng);
    let (p, n) = sample_surface_local(&shapes[idx].kind, rng);
    (
        shapes[idx].local_pose.transform_point(&p),
        shapes[idx].local_pose.rotate_vector(&n),
    )
}

// ---------------------------------------------------------------------------
// Ray queries

/// Entry/exit hit along a ray against a convex primitive, in the local frame.
/// `t` values are distances along a unit `dir`; only `t > 1e-9` hits count.
#[derive(Clone, Copy, Debug)]
pub struct RaySpan {
    pub t_near: f64,
    pub normal_near: Vec3,
    pub t_far: f64,
    pub normal_far: Vec3,
}

pub fn ray_primitive_local(kind: &ShapeKind, origin: &Vec3, dir: &Vec3) -> Option<RaySpan> {
    match kind {
        ShapeKind::Sphere { radius: r } => {
            let b = origin.dot(dir);
            let c = origin.norm_squared() - r * r;
            let disc = b * b - c;
            if disc < 0.0 {
                return None;
            }
            let s = disc.sqrt();
            let (t0, t1) = (-b - s, -b + s);
            if t1 <= 1e-9 {
                return None;
            }
            let p0 = origin + dir * t0;
            let p1 = origin + dir * t1;
            Some(RaySpan {
                t_near: t0,
                normal_near: p0 / *r,
                t_far: t1,
                normal_far: p1 / *r,
            })
        }
        ShapeKind::Box { half_extents } => {
            let mut t0 = f64::NEG_INFINITY;
            let mut t1 = f64::INFINITY;
            let mut n0 = Vec3::zeros();
            let mut n1 = Vec3::zeros();
            for i in 0..3 {
                let h = half_extents[i];
                if dir[i].abs() < 1e-12 {
                    if origin[i].abs() > h {
                        return None;
                    }
                    continue;
                }
                let inv = 1.0 / dir[i];
                let mut ta = (-h - origin[i]) * inv;
                let mut tb = (h - origin[i]) * inv;
                let mut na = -axis_vec(i);
                let mut nb = axis_vec(i);
                if ta > tb {
                    std::mem::swap(&mut ta, &mut tb);
                    std::mem::swap(&mut na, &mut nb);
                }
                if ta > t0 {
                    t0 = ta;
                    n0 = na;
                }
                if tb < t1 {
                    t1 = tb;
                    n1 = nb;
                }
                if t0 > t1 {
                    return None;
                }
            }
            if t1 <= 1e-9 {
                return None;
            }
            Some(RaySpan { t_near: t0, normal_near: n0, t_far: t1, normal_far: n1 })
        }
        ShapeKind::Cylinder { radius: r, half_height: h } => {
            // Collect candidate boundary hits: lateral wall and the two caps.
            let mut hits: Vec<(f64, Vec3)> = Vec::with_capacity(4);
            let (ox, oy) = (origin.x, origin.y);
            let (dx, dy) = (dir.x, dir.y);
            let a = dx * dx + dy * dy;
            if a > 1e-14 {
                let b = ox * dx + oy * dy;
                let c = ox * ox + oy * oy - r * r;
                let disc = b * b - a * c;
                if disc >= 0.0 {
                    let s = disc.sqrt();
                    for t in [(-b - s) / a, (-b + s) / a] {
                        let z = origin.z + dir.z * t;
                        if z.abs() <= *h {
                            let p = origin + dir * t;
                            hits.push((t, Vec3::new(p.x / r, p.y / r, 0.0)));
                        }
                    }
                }
            }
            if dir.z.abs() > 1e-12 {
                for sign in [1.0f64, -1.0] {
                    let t = (sign * h - origin.z) / dir.z;
                    let p = origin + dir * t;
                    if p.x * p.x + p.y * p.y <= r * r {
                        hits.push((t, Vec3::new(0.0, 0.0, sign)));
                    }
                }
            }
            hits.retain(|(t, _)| t.is_finite());
            if hits.is_empty() {
                return None;
            }
            hits.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (t0, n0) = hits[0];
            let (t1, n1) = *hits.last().unwrap();
            if t1 <= 1e-9 {
                return None;
            }
            Some(RaySpan { t_near: t0, normal_near: n0, t_far: t1, normal_far: n1 })
        }
    }
}

/// Nearest hit of a world-frame ray against a posed compound.
/// Returns (t, outward world normal).
pub fn raycast_shape(
    shape: &ShapePrimitive,
    body_pose: &Pose,
    origin: &Vec3,
    dir: &Vec3,
) -> Option<(f64, Vec3)> {
    let world = body_pose.compose(&shape.local_pose);
    let inv = world.inverse();
    let lo = inv.transform_point(origin);
    let ld = inv.rotate_vector(dir);
    let span = ray_primitive_local(&shape.kind, &lo, &ld)?;
    if span.t_near > 1e-9 {
        Some((span.t_near, world.rotate_vector(&span.normal_near)))
    } else {
        Some((span.t_far, world.rotate_vector(&span.normal_far)))
    }
}

/// Farthest exit point of a ray through a posed compound (used to find the
/// opposing contact of an antipodal pair).
pub fn raycast_compound_exit(
    shapes: &[ShapePrimitive],
    body_pose: &Pose,
    origin: &Vec3,
    dir: &Vec3,
) -> Option<(f64, Vec3)> {
    let mut best: Option<(f64, Vec3)> = None;
    for shape in shapes {
        let world = body_pose.compose(&shape.local_pose);
        let inv = world.inverse();
        let lo = inv.transform_point(origin);
        let ld = inv.rotate_vector(dir);
        if let Some(span) = ray_primitive_local(&shape.kind, &lo, &ld) {
            if span.t_far > 1e-9 && best.map_or(true, |(t, _)| span.t_far > t) {
                best = Some((span.t_far, world.rotate_vector(&span.normal_far)));
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Contact queries

/// Result of a pair query. `separation < 0` means penetration of that depth;
/// `normal` is the contact normal on `b`'s surface pointing toward `a` (the
/// direction that separates the pair).
#[derive(Clone, Copy, Debug)]
pub struct Contact {
    pub separation: f64,
    pub normal: Vec3,
}

enum Collider {
    Sphere { center: Vec3, radius: f64 },
    Obb { pose: Pose, half: Vec3 },
    Capsule { a: Vec3, b: Vec3, radius: f64 },
}

fn collider(kind: &ShapeKind, world: &Pose) -> Collider {
    match kind {
        ShapeKind::Sphere { radius } => {
            Collider::Sphere { center: world.position, radius: *radius }
        }
        ShapeKind::Box { half_extents: [a, b, c] } => {
            Collider::Obb { pose: *world, half: Vec3::new(*a, *b, *c) }
        }
        ShapeKind::Cylinder { radius, half_height } => {
            let axis = world.z_axis() * *half_height;
            Collider::Capsule {
                a: world.position - axis,
                b: world.position + axis,
                radius: *radius,
            }
        }
    }
}

/// Contact between two posed primitives (`shape ∘ body` world placement).
pub fn shape_contact(
    a_kind: &ShapeKind,
    a_world: &Pose,
    b_kind: &ShapeKind,
    b_world: &Pose,
) -> Contact {
    let ca = collider(a_kind, a_world);
    let cb = collider(b_kind, b_world);
    collider_contact(&ca, &cb)
}

fn collider_contact(a: &Collider, b: &Collider) -> Contact {
    use Collider::*;
    match (a, b) {
        (Sphere { center: c1, radius: r1 }, Sphere { center: c2, radius: r2 }) => {
            let d = c1 - c2;
            let n = d.norm();
            let normal = if n > 1e-12 { d / n } else { Vec3::z() };
            Contact { separation: n - (r1 + r2), normal }
        }
        (Sphere { center, radius }, Obb { pose, half }) => {
            let (sd, n) = obb_signed_distance(pose, half, center);
            Contact { separation: sd - radius, normal: n }
        }
        (Obb { pose, half }, Sphere { center, radius }) => {
            let (sd, n) = obb_signed_distance(pose, half, center);
            Contact { separation: sd - radius, normal: -n }
        }
        (Sphere { center, radius }, Capsule { a, b, radius: rc }) => {
            let (d, q) = point_segment(center, a, b);
            let dir = center - q;
            let normal = if d > 1e-12 { dir / d } else { Vec3::z() };
            Contact { separation: d - (radius + rc), normal }
        }
        (Capsule { a, b, radius: rc }, Sphere { center, radius }) => {
            let (d, q) = point_segment(center, a, b);
            let dir = q - center;
            let normal = if d > 1e-12 { dir / d } else { Vec3::z() };
            Contact { separation: d - (radius + rc), normal }
        }
        (Capsule { a: a1, b: b1, radius: r1 }, Capsule { a: a2, b: b2, radius: r2 }) => {
            let (d, p, q) = segment_segment(a1, b1, a2, b2);
            let dir = p - q;
            let normal = if d > 1e-12 { dir / d } else { Vec3::z() };
            Contact { separation: d - (r1 + r2), normal }
        }
        (Capsule { a: ca, b: cb, radius }, Obb { pose, half }) => {
            let (sd, n, _) = segment_obb_min_signed(ca, cb, pose, half);
            Contact { separation: sd - radius, normal: n }
        }
        (Obb { pose, half }, Capsule { a: ca, b: cb, radius }) => {
            let (sd, n, _) = segment_obb_min_signed(ca, cb, pose, half);
            Contact { separation: sd - radius, normal: -n }
        }
        (Obb { pose: pa, half: ha }, Obb { pose: pb, half: hb }) => obb_obb(pa, ha, pb, hb),
    }
}

/// Signed distance from a point to an OBB (< 0 inside), plus the outward
/// normal of the box at the nearest surface point.
fn obb_signed_distance(pose: &Pose, half: &Vec3, point: &Vec3) -> (f64, Vec3) {
    let local = pose.inverse().transform_point(point);
    let mut outside = Vec3::zeros();
    let mut is_out = false;
    for i in 0..3 {
        if local[i].abs() > half[i] {
            is_out = true;
            outside[i] = local[i] - half[i].copysign(local[i]);
        }
    }
    if is_out {
        let d = outside.norm();
        (d, pose.rotate_vector(&(outside / d)))
    } else {
        let mut best = f64::INFINITY;
        let mut axis = 0;
        for i in 0..3 {
            let depth = half[i] - local[i].abs();
            if depth < best {
                best = depth;
                axis = i;
            }
        }
        let mut n = Vec3::zeros();
        n[axis] = 1.0f64.copysign(local[axis]);
        (-best, pose.rotate_vector(&n))
    }
}

fn point_segment(p: &Vec3, a: &Vec3, b: &Vec3) -> (f64, Vec3) {
    let ab = b - a;
    let denom = ab.norm_squared();
    let t = if denom < 1e-18 { 0.0 } else { ((p - a).dot(&ab) / denom).clamp(0.0, 1.0) };
    let q = a + ab * t;
    ((p - q).norm(), q)
}

fn segment_segment(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> (f64, Vec3, Vec3) {
    // Ericson, Real-Time Collision Detection, closest point of two segments.
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (mut s, mut t);
    if a <= 1e-18 && e <= 1e-18 {
        s = 0.0;
        t = 0.0;
    } else if a <= 1e-18 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= 1e-18 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            s = if denom > 1e-18 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
        }
    }
    let cp1 = p1 + d1 * s;
    let cp2 = p2 + d2 * t;
    ((cp1 - cp2).norm(), cp1, cp2)
}

/// Minimum over the segment of the box's signed distance; convex in the
/// segment parameter, so a fixed-iteration ternary search is exact enough.
fn segment_obb_min_signed(a: &Vec3, b: &Vec3, pose: &Pose, half: &Vec3) -> (f64, Vec3, Vec3) {
    let eval = |t: f64| {
        let p = a + (b - a) * t;
        obb_signed_distance(pose, half, &p).0
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..80 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if eval(m1) <= eval(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let t = 0.5 * (lo + hi);
    let p = a + (b - a) * t;
    let (sd, n) = obb_signed_distance(pose, half, &p);
    (sd, n, p)
}

fn obb_obb(pa: &Pose, ha: &Vec3, pb: &Pose, hb: &Vec3) -> Contact {
    // SAT over 15 axes; penetration is the minimum overlap, with the normal on
    // b pointing toward a.
    let ra = [pa.x_axis(), pa.y_axis(), pa.z_axis()];
    let rb = [pb.x_axis(), pb.y_axis(), pb.z_axis()];
    let t = pa.position - pb.position;

    let mut axes: Vec<Vec3> = Vec::with_capacity(15);
    axes.extend_from_slice(&ra);
    axes.extend_from_slice(&rb);
    for i in 0..3 {
        for j in 0..3 {
            let c = ra[i].cross(&rb[j]);
            if c.norm_squared() > 1e-12 {
                axes.push(c.normalize());
            }
        }
    }

    let mut min_overlap = f64::INFINITY;
    let mut min_axis = Vec3::z();
    let mut max_separation = f64::NEG_INFINITY;
    let mut separated = false;
    for axis in &axes {
        let proj_a: f64 = (0..3).map(|i| (ra[i].dot(axis) * ha[i]).abs()).sum();
        let proj_b: f64 = (0..3).map(|i| (rb[i].dot(axis) * hb[i]).abs()).sum();
        let dist = t.dot(axis).abs();
        let overlap = proj_a + proj_b - dist;
        if overlap < 0.0 {
            separated = true;
            max_separation = max_separation.max(-overlap);
        } else if overlap < min_overlap {
            min_overlap = overlap;
            min_axis = if t.dot(axis) >= 0.0 { *axis } else { -axis };
        }
    }
    if separated {
        // SAT distance is a lower bound between disjoint boxes; callers only
        // rely on the sign for separated pairs.
        Contact { separation: max_separation, normal: min_axis }
    } else {
        Contact { separation: -min_overlap, normal: min_axis }
    }
}

/// Penetration of a posed primitive below the horizontal plane `z = height`
/// (the table). Returns separation (< 0 means below the surface).
pub fn table_separation(kind: &ShapeKind, world: &Pose, height: f64) -> f64 {
    let lowest = match kind {
        ShapeKind::Sphere { radius } => world.position.z - radius,
        ShapeKind::Box { half_extents: [a, b, c] } => {
            let r = world.x_axis().z.abs() * a
                + world.y_axis().z.abs() * b
                + world.z_axis().z.abs() * c;
            world.position.z - r
        }
        ShapeKind::Cylinder { radius, half_height } => {
            let axis_z = world.z_axis().z.abs() * half_height;
            world.position.z - axis_z - radius
        }
    };
    lowest - height
}

fn axis_vec(i: usize) -> Vec3 {
    let mut v = Vec3::zeros();
    v[i] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sphere_sphere_penetration() {
        let s = ShapeKind::Sphere { radius: 0.75 };
        let a = Pose::from_translation(0.0, 0.0, 0.0);
        let b = Pose::from_translation(1.0, 0.0, 0.0);
        let c = shape_contact(&s, &a, &s, &b);
        assert!((c.separation + 0.5).abs() < 1e-12);
    }

    #[test]
    fn distant_boxes_do_not_collide() {
        let k = ShapeKind::Box { half_extents: [0.5, 0.5, 0.5] };
        let c = shape_contact(
            &k,
            &Pose::identity(),
            &k,
            &Pose::from_translation(10.0, 0.0, 0.0),
        );
        assert!(c.separation > 0.0);
    }

    #[test]
    fn coincident_boxes_overlap_fully() {
        let k = ShapeKind::Box { half_extents: [0.5, 0.5, 0.5] };
        let c = shape_contact(&k, &Pose::identity(), &k, &Pose::identity());
        assert!((c.separation + 1.0).abs() < 1e-12);
    }

    #[test]
    fn sphere_box_contact_normal_points_out() {
        let s = ShapeKind::Sphere { radius: 0.1 };
        let b = ShapeKind::Box { half_extents: [0.5, 0.5, 0.5] };
        let c = shape_contact(
            &s,
            &Pose::from_translation(0.0, 0.0, 0.55),
            &b,
            &Pose::identity(),
        );
        assert!((c.separation + 0.05).abs() < 1e-12);
        assert!((c.normal - Vec3::z()).norm() < 1e-12);
    }

    #[test]
    fn capsule_box_separation_matches_hand_value() {
        // Upright cylinder 0.1 above a unit box: capsule bottom cap at z = 0.6+0.2-0.1... center 0.8, half_height 0.1, radius 0.1
        let cyl = ShapeKind::Cylinder { radius: 0.1, half_height: 0.1 };
        let b = ShapeKind::Box { half_extents: [0.5, 0.5, 0.5] };
        let c = shape_contact(&cyl, &Pose::from_translation(0.0, 0.0, 0.8), &b, &Pose::identity());
        // segment lowest point z=0.7, box top 0.5, minus radius 0.1 => 0.1
        assert!((c.separation - 0.1).abs() < 1e-9);
    }

    #[test]
    fn ray_box_center_hit() {
        let k = ShapeKind::Box { half_extents: [0.5, 0.5, 0.01] };
        let shape = ShapePrimitive::at_origin(k);
        let pose = Pose::from_translation(0.0, 0.0, 0.15);
        let hit = raycast_shape(&shape, &pose, &Vec3::zeros(), &Vec3::z()).unwrap();
        assert!((hit.0 - 0.14).abs() < 1e-12);
        assert!((hit.1 - (-Vec3::z())).norm() < 1e-12);
    }

    #[test]
    fn ray_cylinder_lateral_and_caps() {
        let k = ShapeKind::Cylinder { radius: 0.2, half_height: 0.5 };
        let side = ray_primitive_local(&k, &Vec3::new(-1.0, 0.0, 0.0), &Vec3::x()).unwrap();
        assert!((side.t_near - 0.8).abs() < 1e-12);
        assert!((side.normal_near - (-Vec3::x())).norm() < 1e-12);
        let top = ray_primitive_local(&k, &Vec3::new(0.0, 0.0, 2.0), &-Vec3::z()).unwrap();
        assert!((top.t_near - 1.5).abs() < 1e-12);
        assert!((top.normal_near - Vec3::z()).norm() < 1e-12);
    }

    #[test]
    fn surface_samples_lie_on_surface() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let kinds = [
            ShapeKind::Box { half_extents: [0.1, 0.2, 0.3] },
            ShapeKind::Sphere { radius: 0.25 },
            ShapeKind::Cylinder { radius: 0.1, half_height: 0.2 },
        ];
        for kind in &kinds {
            for _ in 0..200 {
                let (p, n) = sample_surface_local(kind, &mut rng);
                assert!((n.norm() - 1.0).abs() < 1e-9);
                // Nudging outward along the normal must leave the shape:
                // signed distance through a tiny ray probe from far along n.
                match kind {
                    ShapeKind::Sphere { radius } => {
                        assert!((p.norm() - radius).abs() < 1e-9)
                    }
                    ShapeKind::Box { half_extents } => {
                        let on_face = (0..3).any(|i| (p[i].abs() - half_extents[i]).abs() < 1e-9);
                        assert!(on_face);
                        for i in 0..3 {
                            assert!(p[i].abs() <= half_extents[i] + 1e-9);
                        }
                    }
                    ShapeKind::Cylinder { radius, half_height } => {
                        let rr = (p.x * p.x + p.y * p.y).sqrt();
                        let lateral = (rr - radius).abs() < 1e-9 && p.z.abs() <= half_height + 1e-9;
                        let cap = (p.z.abs() - half_height).abs() < 1e-9 && rr <= radius + 1e-9;
                        assert!(lateral || cap);
                    }
                }
            }
        }
    }

    #[test]
    fn table_separation_accounts_for_rotation() {
        let k = ShapeKind::Box { half_extents: [0.1, 0.1, 0.1] };
        let flat = Pose::from_translation(0.0, 0.0, 0.1);
        assert!(table_separation(&k, &flat, 0.0).abs() < 1e-12);
        // Rotated 45° about x: lowest corner dips sqrt(2)*0.1 below center.
        let tilted = Pose::new(
            Vec3::new(0.0, 0.0, 0.2),
            nalgebra::UnitQuaternion::from_scaled_axis(Vec3::x() * std::f64::consts::FRAC_PI_4),
        );
        let sep = table_separation(&k, &tilted, 0.0);
        assert!((sep - (0.2 - 0.1 * 2.0f64.sqrt())).abs() < 1e-9);
    }
}
