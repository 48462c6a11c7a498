//! Benchmark dataset generation: goal-set mutation, true-goal selection
//! policies, and whole-bundle rewriting with freshly planned observations.
//!
//! Everything is driven by a single 64-bit seed; the same seed produces
//! byte-identical output directories.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::pddl::{load_bundle, write_bundle, BundleError, BundleMeta, RecognitionBundle};
use crate::planner::{plan_observations, PlannerConfig, PlannerError};
use crate::strips::{FactId, State};

/// How the true goal is chosen from a candidate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantKind {
    /// Uniformly at random (seeded).
    Random,
    /// The goal with the most facts.
    Longest,
    /// The goal with the fewest facts.
    Shortest,
}

impl VariantKind {
    pub const ALL: [VariantKind; 3] = [
        VariantKind::Random,
        VariantKind::Longest,
        VariantKind::Shortest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantKind::Random => "random",
            VariantKind::Longest => "longest",
            VariantKind::Shortest => "shortest",
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariantKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_lowercase().as_str() {
            "random" => Ok(VariantKind::Random),
            "longest" => Ok(VariantKind::Longest),
            "shortest" => Ok(VariantKind::Shortest),
            other => Err(format!(
                "unknown variant `{}` (expected random, longest, or shortest)",
                other
            )),
        }
    }
}

/// A dataset variant: selection policy plus the seed that generated it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetVariant {
    pub kind: VariantKind,
    pub seed: u64,
}

/// Result of [`mutate_goal_set`]: the new goals, plus the indices of goals
/// kept unchanged because no admissible subset was found.
#[derive(Debug, Clone)]
pub struct MutationOutcome {
    pub goals: Vec<State>,
    pub kept_original: Vec<usize>,
}

fn neither_subsumes(a: &State, b: &State) -> bool {
    !a.is_subset(b) && !b.is_subset(a)
}

/// Replace each goal with a nonempty random subset of its facts (target
/// sizes uniform in `[1, |g|]`) such that no goal in the resulting set is a
/// subset of another. Sampling rejects conflicting candidates up to 1000
/// times per goal; on exhaustion the original goal is kept and its index
/// reported in `kept_original`.
pub fn mutate_goal_set(goals: &[State], seed: u64) -> MutationOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current: Vec<State> = goals.to_vec();
    let mut kept_original = Vec::new();

    for i in 0..current.len() {
        let facts: Vec<FactId> = current[i].iter().collect();
        if facts.is_empty() {
            kept_original.push(i);
            continue;
        }
        let mut found = false;
        for _ in 0..1000 {
            let size = rng.gen_range(1..=facts.len());
            let chosen = facts.choose_multiple(&mut rng, size).copied();
            let candidate = State::from_ids(current[i].capacity(), chosen);
            let ok = current
                .iter()
                .enumerate()
                .all(|(j, other)| j == i || neither_subsumes(&candidate, other));
            if ok {
                current[i] = candidate;
                found = true;
                break;
            }
        }
        if !found {
            kept_original.push(i);
        }
    }
    MutationOutcome {
        goals: current,
        kept_original,
    }
}

/// Pick the true goal. `Random` draws uniformly with the seed; `Longest`
/// and `Shortest` take the extreme size, breaking ties toward the goal
/// whose fact sequence is canonically smallest.
pub fn select_true_goal(goals: &[State], kind: VariantKind, seed: u64) -> usize {
    assert!(!goals.is_empty(), "cannot select from an empty goal set");
    match kind {
        VariantKind::Random => ChaCha8Rng::seed_from_u64(seed).gen_range(0..goals.len()),
        VariantKind::Longest => extreme_by_size(goals, |a, b| a > b),
        VariantKind::Shortest => extreme_by_size(goals, |a, b| a < b),
    }
}

fn extreme_by_size(goals: &[State], beats: impl Fn(usize, usize) -> bool) -> usize {
    let mut best = 0;
    for (i, goal) in goals.iter().enumerate().skip(1) {
        let better = beats(goal.len(), goals[best].len())
            || (goal.len() == goals[best].len()
                && goal.cmp_canonical(&goals[best]) == std::cmp::Ordering::Less);
        if better {
            best = i;
        }
    }
    best
}

#[derive(Debug, Error)]
pub enum MutateError {
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("planning observations for the new true goal failed: {0}")]
    Planner(#[from] PlannerError),
}

/// Report of a single bundle mutation.
#[derive(Debug, Clone)]
pub struct MutateReport {
    pub bundle: String,
    pub true_goal: usize,
    pub num_observations: usize,
    /// Goals kept unchanged because subset sampling found no admissible
    /// candidate.
    pub kept_original: Vec<usize>,
}

/// Load the bundle at `src`, mutate its goal set, select a new true goal
/// per `variant`, plan a fresh observation sequence for it, and write the
/// result to `dst` in the same layout (plus `meta.json`).
pub fn mutate_bundle(
    src: impl AsRef<Path>,
    dst: impl AsRef<Path>,
    variant: DatasetVariant,
    planner: &PlannerConfig,
) -> Result<MutateReport, MutateError> {
    let src = src.as_ref();
    let bundle = load_bundle(src)?;
    let original_goal_sizes: Vec<usize> = bundle.goals.iter().map(|g| g.len()).collect();

    let outcome = mutate_goal_set(&bundle.goals, variant.seed);
    let true_goal = select_true_goal(&outcome.goals, variant.kind, variant.seed);

    let config = PlannerConfig {
        seed: variant.seed,
        ..planner.clone()
    };
    let plan = plan_observations(&bundle.problem, &outcome.goals[true_goal], &config)?;

    let hyps: Vec<String> = outcome
        .goals
        .iter()
        .map(|g| format_goal(&bundle, g))
        .collect();
    let observations: Vec<String> = plan
        .steps
        .iter()
        .map(|&a| bundle.problem.action(a).to_string())
        .collect();
    let meta = BundleMeta {
        seed: variant.seed,
        variant: variant.kind.as_str().to_string(),
        original_goal_sizes,
    };

    let read = |name: &str| -> Result<String, BundleError> {
        std::fs::read_to_string(src.join(name)).map_err(|source| BundleError::Io {
            path: src.join(name),
            source,
        })
    };
    write_bundle(
        dst,
        &read("domain.pddl")?,
        &read("template.pddl")?,
        &hyps,
        &hyps[true_goal],
        &observations,
        Some(&meta),
    )?;
    Ok(MutateReport {
        bundle: bundle.name,
        true_goal,
        num_observations: plan.len(),
        kept_original: outcome.kept_original,
    })
}

/// One `hyps.dat` line: the goal's facts, comma-separated.
fn format_goal(bundle: &RecognitionBundle, goal: &State) -> String {
    let facts: Vec<String> = goal
        .iter()
        .map(|id| bundle.problem.fact(id).to_string())
        .collect();
    facts.join(",")
}
