//! The greedy sequential next-best-view loop with pluggable fitness
//! criteria and motion/collision constraints.

mod feasible;
mod fitness;
mod recon;
mod rollout;

pub use feasible::{feasible, segment_point_distance, TerminationCriteria, MPS_PER_4_MPH};
pub use fitness::{
    coverage_fitness, oracle_rri, random_fitness, score_candidate, vin_fitness,
    FitnessCriterion, OracleGroundTruth, OracleStepEval,
};
pub use recon::ReconPipeline;
pub use rollout::{
    capture_view, init_state, metrics_row, run_policy, run_policy_observed, select_next,
    CaptureState, RolloutContext, RolloutRecord, StepRecord,
};
