//! Goal recognition over STRIPS planning problems using planning landmarks.
//!
//! The pipeline: parse and ground a PDDL domain/problem pair, extract fact
//! landmarks per candidate goal, then score goals online against an
//! observation sequence. Everything is deterministic for fixed inputs and
//! seeds.

pub mod datagen;
pub mod evaluation;
pub mod landmarks;
pub mod oracle;
pub mod pddl;
pub mod planner;
pub mod recognition;
pub mod rpg;
pub mod score;
pub mod strips;

pub use datagen::{DatasetVariant, MutationOutcome, VariantKind};
pub use evaluation::{EvalError, EvaluationRow, Lambda, OnlineProblem};
pub use landmarks::{Extractor, Landmark, LandmarkCategory, LandmarkSet};
pub use oracle::{OracleConfig, OracleError, PlanSpace};
pub use pddl::{BundleError, BundleMeta, GroundError, PddlError, RecognitionBundle};
pub use planner::{PlannerConfig, PlannerError};
pub use recognition::{AchievedMap, GoalScore, Heuristic, RecognitionConfig, RecognitionResult};
pub use rpg::RelaxedPlanningGraph;
pub use score::Score;
pub use strips::{
    ActionDef, ActionId, Fact, FactId, GroundAction, GroundedProblem, Plan, PlanFailure,
    PlanReport, State,
};
