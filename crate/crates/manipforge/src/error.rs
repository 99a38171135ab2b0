//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("keypoint sets differ in length: {a} vs {b}")]
    KeypointCountMismatch { a: usize, b: usize },
    #[error("cloud has {have} points, need at least {want}")]
    FpsTooFewPoints { have: usize, want: usize },
    #[error("points are degenerate; no principal axis")]
    DegenerateFit,
}

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("non-finite end-effector target")]
    NonFiniteTarget,
    #[error("joint value {q} outside [0, {limit}]")]
    JointOutOfRange { q: f64, limit: f64 },
    #[error("settle did not converge within {0} iterations")]
    SettleDiverged(usize),
}

#[derive(Debug, Error)]
pub enum ObsError {
    #[error("target object {0} has no precomputed keypoints")]
    MissingKeypoints(u32),
    #[error("first-frame cache missing; call at episode start first")]
    MissingFirstFrame,
    #[error("grasp set required for skill {0}")]
    MissingGraspSet(&'static str),
    #[error("rest set required for skill {0}")]
    MissingRestSet(&'static str),
}

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("input dimension {got} does not match network input {want}")]
    DimMismatch { got: usize, want: usize },
    #[error("non-finite loss")]
    NonFiniteLoss,
    #[error("length mismatch: rewards {rewards}, values {values}, dones {dones}")]
    GaeLengthMismatch { rewards: usize, values: usize, dones: usize },
    #[error("non-finite statistics in update; update skipped")]
    NonFiniteStats,
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("rejection sampling exhausted after {0} attempts")]
    RejectionBudget(usize),
    #[error("template {0} rejected: {1}")]
    TemplateRejected(String, &'static str),
    #[error("unknown label {0}")]
    UnknownLabel(String),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("label {0} absent from cloud")]
    LabelAbsent(String),
    #[error("no collision-free path found within budget")]
    PlanningFailure,
    #[error("start pose is in collision")]
    StartInCollision,
    #[error("policy produced a non-finite action at step {0}")]
    NonFiniteAction(usize),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Obs(#[from] ObsError),
    #[error(transparent)]
    World(#[from] WorldError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("bad checkpoint magic: expected MFG1")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u8),
    #[error("checkpoint dims {file:?} do not match configured dims {config:?}")]
    CheckpointDimMismatch { file: Vec<usize>, config: Vec<usize> },
    #[error("truncated or oversized checkpoint payload")]
    CorruptPayload,
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
