//! Synthetic demonstrations and kinematic plan replay.

mod scenario;
mod sim;

pub use scenario::{
    generate_scenario, min_jerk, GroundTruth, GtInterval, GtUnit, Scenario, ScenarioSpec, Template, Timing,
    NOISE_GENERATOR,
};
pub use sim::{
    execute_bt, placements, verify_relative_poses, Attachment, ExecutionTrace, Placement, PlacementError, SimExecutor,
    TraceEntry, VerificationReport, WorldState, DEFAULT_GRASP_TOLERANCE,
};
