//! SE(3) math, shape primitives, point-cloud utilities and grasp sampling.

pub mod cloud;
pub mod grasp;
pub mod gripper;
pub mod pose;
pub mod shapes;

pub use cloud::{farthest_point_sample, fit_longest_axis, keypoint_distance, PointCloud, FPS_KEYPOINTS};
pub use grasp::{sample_antipodal_grasps, AntipodalParams, GraspPose, GraspSet};
pub use pose::{angle_between, apply_delta, pose_delta, quat_angle, quat_to_axis_angle, Pose, Quat, Vec3};
pub use shapes::{shape_contact, table_separation, Contact, ShapeKind, ShapePrimitive};
