//! Online goal recognition from observed actions.
//!
//! Given candidate goals with extracted landmark sets and a sequence of
//! observed actions, each goal is scored by how many of its landmarks the
//! observations have touched. The recognized goals are the exact argmax
//! set — scores are arbitrary-precision rationals, so ties are real ties,
//! not floating-point accidents.
//!
//! The central switch is `include_initial_state_landmarks`. Landmarks that
//! already hold in the initial state are satisfied before the agent acts;
//! keeping them (filter off) counts them as achieved from the start, which
//! inflates every score toward 1 as their share grows. Dropping them
//! (filter on) scores goals purely by observational evidence.

use std::fmt;
use std::str::FromStr;

use crate::landmarks::{self, Extractor, Landmark, LandmarkCategory, LandmarkSet};
use crate::score::{self, Score};
use crate::strips::{ActionId, GroundedProblem, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Heuristic {
    /// Fraction of effective landmarks achieved.
    Completion,
    /// Achieved-over-total ratio of inverse-frequency landmark weights.
    Uniqueness,
}

impl Heuristic {
    pub const ALL: [Heuristic; 2] = [Heuristic::Completion, Heuristic::Uniqueness];

    pub fn as_str(&self) -> &'static str {
        match self {
            Heuristic::Completion => "completion",
            Heuristic::Uniqueness => "uniqueness",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "completion" => Ok(Heuristic::Completion),
            "uniqueness" => Ok(Heuristic::Uniqueness),
            other => Err(format!(
                "unknown heuristic {:?}; expected \"completion\" or \"uniqueness\"",
                other
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RecognitionConfig {
    pub extractor: Extractor,
    pub heuristic: Heuristic,
    pub include_initial_state_landmarks: bool,
}

impl RecognitionConfig {
    pub fn new(
        extractor: Extractor,
        heuristic: Heuristic,
        include_initial_state_landmarks: bool,
    ) -> Self {
        RecognitionConfig {
            extractor,
            heuristic,
            include_initial_state_landmarks,
        }
    }
}

/// Score of one candidate goal under one configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoalScore {
    pub goal_index: usize,
    pub score: Score,
    /// Achieved landmarks in the effective set.
    pub achieved_count: usize,
    /// Size of the effective landmark set.
    pub total_count: usize,
}

/// Per goal: which landmarks of its effective set have been achieved,
/// aligned by position.
#[derive(Debug, Clone)]
pub struct AchievedMap {
    flags: Vec<Vec<bool>>,
}

impl AchievedMap {
    pub fn num_goals(&self) -> usize {
        self.flags.len()
    }

    pub fn flags(&self, goal_index: usize) -> &[bool] {
        &self.flags[goal_index]
    }

    pub fn achieved_count(&self, goal_index: usize) -> usize {
        self.flags[goal_index].iter().filter(|&&b| b).count()
    }

    /// The achieved landmarks of a goal, given its effective set.
    pub fn achieved_landmarks<'a>(
        &'a self,
        goal_index: usize,
        effective: &'a LandmarkSet,
    ) -> impl Iterator<Item = &'a Landmark> {
        assert_eq!(self.flags[goal_index].len(), effective.len());
        effective
            .iter()
            .zip(&self.flags[goal_index])
            .filter_map(|(l, &on)| if on { Some(l) } else { None })
    }
}

/// Result of scoring every candidate goal against one observation prefix.
#[derive(Debug, Clone)]
pub struct RecognitionResult {
    pub scores: Vec<GoalScore>,
    /// Indices of all goals sharing the maximal score, ascending.
    pub recognized: Vec<usize>,
}

impl RecognitionResult {
    pub fn is_recognized(&self, goal_index: usize) -> bool {
        self.recognized.binary_search(&goal_index).is_ok()
    }
}

/// Apply the initial-state-landmark filter: with the filter on (i.e.
/// `include_initial_state_landmarks == false`) every landmark categorized
/// initial-state is removed; otherwise the set passes through unchanged.
pub fn effective_landmarks(set: &LandmarkSet, cfg: &RecognitionConfig) -> LandmarkSet {
    if cfg.include_initial_state_landmarks {
        return set.clone();
    }
    let kept: Vec<Landmark> = set
        .iter()
        .filter(|l| l.category() != LandmarkCategory::InitialState)
        .cloned()
        .collect();
    LandmarkSet::from_sorted_vec(set.goal().clone(), set.extractor(), kept)
}

/// Scan the observations once per goal and mark landmarks achieved.
///
/// A landmark is achieved when some observed action mentions one of its
/// disjuncts in its precondition or add list; each landmark counts once.
/// With `include_initial_state_landmarks` set, landmarks categorized
/// initial-state are seeded as achieved before the first observation —
/// they hold when the agent starts acting.
pub fn compute_achieved_landmarks(
    problem: &GroundedProblem,
    observations: &[ActionId],
    effective_sets: &[LandmarkSet],
    cfg: &RecognitionConfig,
) -> AchievedMap {
    let flags = effective_sets
        .iter()
        .map(|set| {
            let mut achieved = vec![false; set.len()];
            if cfg.include_initial_state_landmarks {
                for (i, l) in set.iter().enumerate() {
                    if l.category() == LandmarkCategory::InitialState {
                        achieved[i] = true;
                    }
                }
            }
            for &o in observations {
                let revealed = &problem.action(o).pre_or_add;
                for (i, l) in set.iter().enumerate() {
                    if !achieved[i] && l.disjuncts().intersects(revealed) {
                        achieved[i] = true;
                    }
                }
            }
            achieved
        })
        .collect();
    AchievedMap { flags }
}

/// Ratio of achieved to total effective landmarks. An empty effective set
/// carries no evidence either way; the score is then 1 if the goal already
/// holds initially (any plan achieves it) and 0 otherwise.
pub fn goal_completion_heuristic(
    achieved: usize,
    total: usize,
    goal: &State,
    init: &State,
) -> Score {
    assert!(achieved <= total, "achieved exceeds landmark count");
    if total == 0 {
        return empty_set_score(goal, init);
    }
    score::ratio(achieved as u64, total as u64)
}

/// Inverse frequency of a landmark across the effective sets of all goals:
/// `1 / |{g : l ∈ L_g}|`.
pub fn landmark_uniqueness(l: &Landmark, all_effective: &[LandmarkSet]) -> Score {
    let occurrences = all_effective
        .iter()
        .filter(|set| set.contains_disjuncts(l.disjuncts()))
        .count();
    assert!(occurrences > 0, "landmark must occur in some set");
    score::ratio(1, occurrences as u64)
}

/// Uniqueness-weighted completion: achieved weight over total weight, where
/// each landmark weighs its inverse frequency among the goals. Shared
/// landmarks contribute little; goal-specific ones dominate. Empty-set rule
/// as in [`goal_completion_heuristic`].
pub fn uniqueness_heuristic(
    achieved_flags: &[bool],
    effective: &LandmarkSet,
    all_effective: &[LandmarkSet],
    goal: &State,
    init: &State,
) -> Score {
    assert_eq!(achieved_flags.len(), effective.len());
    if effective.is_empty() {
        return empty_set_score(goal, init);
    }
    let mut num = score::zero();
    let mut den = score::zero();
    for (l, &on) in effective.iter().zip(achieved_flags) {
        let weight = landmark_uniqueness(l, all_effective);
        if on {
            num += weight.clone();
        }
        den += weight;
    }
    num / den
}

fn empty_set_score(goal: &State, init: &State) -> Score {
    if goal.is_subset(init) {
        score::one()
    } else {
        score::zero()
    }
}

/// Score every goal against the observations using pre-extracted (full,
/// unfiltered) landmark sets, one per goal.
pub fn score_with_sets(
    problem: &GroundedProblem,
    goals: &[State],
    full_sets: &[LandmarkSet],
    observations: &[ActionId],
    cfg: &RecognitionConfig,
) -> RecognitionResult {
    assert_eq!(goals.len(), full_sets.len());
    let effective: Vec<LandmarkSet> = full_sets
        .iter()
        .map(|s| effective_landmarks(s, cfg))
        .collect();
    let achieved = compute_achieved_landmarks(problem, observations, &effective, cfg);

    let scores: Vec<GoalScore> = goals
        .iter()
        .enumerate()
        .map(|(i, goal)| {
            let count = achieved.achieved_count(i);
            let total = effective[i].len();
            let score = match cfg.heuristic {
                Heuristic::Completion => {
                    goal_completion_heuristic(count, total, goal, problem.init())
                }
                Heuristic::Uniqueness => uniqueness_heuristic(
                    achieved.flags(i),
                    &effective[i],
                    &effective,
                    goal,
                    problem.init(),
                ),
            };
            GoalScore {
                goal_index: i,
                score,
                achieved_count: count,
                total_count: total,
            }
        })
        .collect();

    let recognized = argmax_indices(&scores);
    RecognitionResult { scores, recognized }
}

/// Extract landmarks for every goal with the configured extractor, then
/// score against the observations.
pub fn recognize(
    problem: &GroundedProblem,
    goals: &[State],
    observations: &[ActionId],
    cfg: &RecognitionConfig,
) -> RecognitionResult {
    let sets: Vec<LandmarkSet> = goals
        .iter()
        .map(|g| landmarks::extract(problem, g, cfg.extractor))
        .collect();
    score_with_sets(problem, goals, &sets, observations, cfg)
}

fn argmax_indices(scores: &[GoalScore]) -> Vec<usize> {
    let max = match scores.iter().map(|s| &s.score).max() {
        Some(m) => m.clone(),
        None => return Vec::new(),
    };
    scores
        .iter()
        .filter(|s| s.score == max)
        .map(|s| s.goal_index)
        .collect()
}

/// All scores are ratios of non-negative counts with numerator bounded by
/// the denominator, so they always land in [0, 1].
#[cfg(test)]
fn in_unit_interval(s: &Score) -> bool {
    !s.is_negative() && *s <= score::one()
}

#[cfg(test)]
use num_traits::sign::Signed;


#[cfg(test)]
mod properties {
    use super::*;
    use crate::strips::{ActionDef, Fact, GroundedProblem};
    use proptest::prelude::*;

    /// A tiny random problem plus an arbitrary observation id sequence.
    /// Observations need not be applicable: the achieved-landmark scan only
    /// reads action definitions.
    fn tiny_instance(
    ) -> impl Strategy<Value = (GroundedProblem, Vec<State>, Vec<crate::strips::ActionId>)> {
        let n_facts = 6usize;
        let subset = prop::collection::vec(0..n_facts, 0..=3);
        let action = (subset.clone(), subset.clone(), subset.clone());
        let actions = prop::collection::vec(action, 1..=6);
        let init = prop::collection::vec(0..n_facts, 0..=3);
        let goals = prop::collection::vec(prop::collection::vec(0..n_facts, 1..=2), 1..=3);
        let obs_picks = prop::collection::vec(0..100usize, 0..=5);

        (actions, init, goals, obs_picks).prop_map(move |(actions, init, goals, obs_picks)| {
            let fact = |i: &usize| Fact::new(format!("p{}", i), &[]);
            let defs: Vec<ActionDef> = actions
                .iter()
                .enumerate()
                .map(|(i, (pre, add, del))| {
                    let mut d = ActionDef::new(format!("a{}", i), &[]);
                    d.pre = pre.iter().map(fact).collect();
                    d.add = add.iter().map(fact).collect();
                    d.del = del.iter().map(fact).collect();
                    d
                })
                .collect();
            let extra: Vec<Fact> = (0..n_facts).map(|i| fact(&i)).collect();
            let problem =
                GroundedProblem::new("tiny", init.iter().map(fact).collect(), defs, vec![], extra)
                    .expect("construction cannot fail on generated input");
            let goal_states: Vec<State> = goals
                .iter()
                .map(|g| {
                    State::from_ids(
                        problem.num_facts(),
                        g.iter().map(|i| problem.fact_id(&fact(i)).unwrap()),
                    )
                })
                .collect();
            let obs: Vec<crate::strips::ActionId> = obs_picks
                .iter()
                .map(|i| crate::strips::ActionId(i % problem.num_actions()))
                .collect();
            (problem, goal_states, obs)
        })
    }

    proptest! {
        #[test]
        fn scores_stay_in_unit_interval_and_argmax_nonempty(
            (problem, goals, obs) in tiny_instance(),
            heuristic in prop::sample::select(&Heuristic::ALL[..]),
            extractor in prop::sample::select(&Extractor::ALL[..]),
            include_init in any::<bool>(),
        ) {
            let cfg = RecognitionConfig::new(extractor, heuristic, include_init);
            let result = recognize(&problem, &goals, &obs, &cfg);
            prop_assert_eq!(result.scores.len(), goals.len());
            for s in &result.scores {
                prop_assert!(in_unit_interval(&s.score));
                prop_assert!(s.achieved_count <= s.total_count);
            }
            prop_assert!(!result.recognized.is_empty());
            for w in result.recognized.windows(2) {
                prop_assert!(w[0] < w[1]);
            }
        }

        #[test]
        fn filter_off_completion_matches_count_identity(
            (problem, goals, obs) in tiny_instance(),
            extractor in prop::sample::select(&Extractor::ALL[..]),
        ) {
            let on = recognize(
                &problem,
                &goals,
                &obs,
                &RecognitionConfig::new(extractor, Heuristic::Completion, false),
            );
            let off = recognize(
                &problem,
                &goals,
                &obs,
                &RecognitionConfig::new(extractor, Heuristic::Completion, true),
            );
            for (s_on, s_off) in on.scores.iter().zip(&off.scores) {
                let al = s_on.achieved_count as u64;
                let l = s_on.total_count as u64;
                let k = (s_off.total_count - s_on.total_count) as u64;
                if l + k > 0 {
                    prop_assert_eq!(s_off.score.clone(), score::ratio(al + k, l + k));
                } else {
                    let expected = if goals[s_on.goal_index].is_subset(problem.init()) {
                        score::one()
                    } else {
                        score::zero()
                    };
                    prop_assert_eq!(s_off.score.clone(), expected);
                }
            }
        }

        #[test]
        fn achievements_accrue_monotonically(
            (problem, goals, obs) in tiny_instance(),
            include_init in any::<bool>(),
        ) {
            let cfg = RecognitionConfig::new(Extractor::Rhw, Heuristic::Completion, include_init);
            let mut prev = vec![0usize; goals.len()];
            for t in 0..=obs.len() {
                let r = recognize(&problem, &goals, &obs[..t], &cfg);
                for s in &r.scores {
                    prop_assert!(s.achieved_count >= prev[s.goal_index]);
                    prev[s.goal_index] = s.achieved_count;
                }
            }
        }
    }
}
