//! Desk-scale tabletop manipulation stack: a quasi-static rigid world with a
//! free-flying parallel-jaw gripper, depth rendering, procedural scene and
//! grasp generation, PPO experts with replay-buffered DAgger distillation,
//! and a hierarchical executor that chains motion planning with local skill
//! policies.

pub mod error;
pub mod geom;
pub mod world;

pub use error::*;
