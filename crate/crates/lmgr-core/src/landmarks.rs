//! Fact landmark extraction and classification.
//!
//! A landmark is a set of facts (usually a singleton) such that every valid
//! plan makes at least one of them true at some point. Two extractors are
//! provided:
//!
//! * [`extract_exhaustive`] runs the relaxed verification test on every fact
//!   of the universe and emits singleton landmarks only.
//! * [`extract_rhw`] back-chains from the goal facts through first achievers
//!   in the relaxed planning graph, producing singleton landmarks from
//!   precondition intersections and disjunctive landmarks from
//!   predicate-grouped preconditions (the Richter-Helmert-Westphal style of
//!   chaining, adapted to ground STRIPS).
//!
//! Every emitted landmark passes a sound verification test, so the output
//! never contains a set that some valid plan avoids entirely. The tests are
//! incomplete: real landmarks may be missed, never fabricated.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::rpg::{relaxed_reachable_with_bans, RelaxedPlanningGraph};
use crate::strips::{ActionId, FactId, GroundedProblem, State};

/// Default cap on the number of disjuncts in a disjunctive landmark.
pub const DEFAULT_DISJUNCT_CAP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LandmarkCategory {
    /// Some disjunct already holds in the initial state. Such a landmark is
    /// satisfied before the agent acts and carries no observational
    /// evidence.
    InitialState,
    /// A singleton whose fact is part of the goal (and not initially true).
    Goal,
    /// Everything else: must be made true by acting, not demanded verbatim
    /// by the goal.
    NonTrivial,
}

impl LandmarkCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            LandmarkCategory::InitialState => "initial-state",
            LandmarkCategory::Goal => "goal",
            LandmarkCategory::NonTrivial => "non-trivial",
        }
    }
}

impl fmt::Display for LandmarkCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A (possibly disjunctive) fact landmark. Equality and hashing consider the
/// disjunct set only; the category is determined by problem and goal.
#[derive(Debug, Clone)]
pub struct Landmark {
    disjuncts: State,
    category: LandmarkCategory,
}

impl Landmark {
    pub(crate) fn new(problem: &GroundedProblem, goal: &State, disjuncts: State) -> Self {
        assert!(
            !disjuncts.is_empty(),
            "landmark needs at least one disjunct"
        );
        let category = categorize(problem, goal, &disjuncts);
        Landmark {
            disjuncts,
            category,
        }
    }

    pub fn disjuncts(&self) -> &State {
        &self.disjuncts
    }

    pub fn category(&self) -> LandmarkCategory {
        self.category
    }

    pub fn is_singleton(&self) -> bool {
        self.disjuncts.len() == 1
    }

    /// The fact of a singleton landmark, if it is one.
    pub fn single_fact(&self) -> Option<FactId> {
        if self.is_singleton() {
            self.disjuncts.iter().next()
        } else {
            None
        }
    }

    /// Disjunct ids in ascending order; the canonical identity of the
    /// landmark.
    pub fn key(&self) -> Vec<FactId> {
        self.disjuncts.iter().collect()
    }
}

impl PartialEq for Landmark {
    fn eq(&self, other: &Self) -> bool {
        self.disjuncts == other.disjuncts
    }
}

impl Eq for Landmark {}

impl std::hash::Hash for Landmark {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.disjuncts.hash(state);
    }
}

fn categorize(problem: &GroundedProblem, goal: &State, disjuncts: &State) -> LandmarkCategory {
    if disjuncts.intersects(problem.init()) {
        return LandmarkCategory::InitialState;
    }
    if disjuncts.len() == 1 {
        let f = disjuncts.iter().next().expect("nonempty");
        if goal.contains(f) {
            return LandmarkCategory::Goal;
        }
    }
    LandmarkCategory::NonTrivial
}

/// Which extraction algorithm produced a landmark set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Extractor {
    Exhaustive,
    Rhw,
    /// Exhaustive plan enumeration; produced by the test oracle, not
    /// selectable for recognition.
    Oracle,
}

impl Extractor {
    /// The extractors available to recognition and evaluation.
    pub const ALL: [Extractor; 2] = [Extractor::Exhaustive, Extractor::Rhw];

    pub fn as_str(&self) -> &'static str {
        match self {
            Extractor::Exhaustive => "ex",
            Extractor::Rhw => "rhw",
            Extractor::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Extractor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Extractor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ex" | "exhaustive" => Ok(Extractor::Exhaustive),
            "rhw" => Ok(Extractor::Rhw),
            other => Err(format!(
                "unknown extractor {:?}; expected \"ex\" or \"rhw\"",
                other
            )),
        }
    }
}

/// The landmarks extracted for one candidate goal, deduplicated and in
/// canonical (disjunct id) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LandmarkSet {
    goal: State,
    extractor: Extractor,
    landmarks: Vec<Landmark>,
}

impl LandmarkSet {
    fn from_map(goal: &State, extractor: Extractor, map: BTreeMap<Vec<FactId>, Landmark>) -> Self {
        LandmarkSet {
            goal: goal.clone(),
            extractor,
            landmarks: map.into_values().collect(),
        }
    }

    /// Build from landmarks already in canonical order without duplicates.
    pub(crate) fn from_sorted_vec(
        goal: State,
        extractor: Extractor,
        landmarks: Vec<Landmark>,
    ) -> Self {
        debug_assert!(landmarks.windows(2).all(|w| w[0].key() < w[1].key()));
        LandmarkSet {
            goal,
            extractor,
            landmarks,
        }
    }

    pub fn goal(&self) -> &State {
        &self.goal
    }

    pub fn extractor(&self) -> Extractor {
        self.extractor
    }

    pub fn landmarks(&self) -> &[Landmark] {
        &self.landmarks
    }

    pub fn len(&self) -> usize {
        self.landmarks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.landmarks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Landmark> {
        self.landmarks.iter()
    }

    pub fn contains_disjuncts(&self, disjuncts: &State) -> bool {
        self.landmarks.iter().any(|l| l.disjuncts() == disjuncts)
    }
}

/// Dispatch on the extractor tag.
pub fn extract(problem: &GroundedProblem, goal: &State, extractor: Extractor) -> LandmarkSet {
    match extractor {
        Extractor::Exhaustive => extract_exhaustive(problem, goal),
        Extractor::Rhw => extract_rhw(problem, goal),
        Extractor::Oracle => {
            panic!("the oracle is not an online extractor; use oracle::oracle_landmarks")
        }
    }
}

/// Sound landmark test for a single fact.
///
/// Facts of the initial state or the goal are landmarks by definition (a
/// plan trace starts at the initial state and ends in a goal state). Any
/// other fact is a landmark if banning all of its achievers makes the goal
/// unreachable even under delete relaxation: then no real plan can avoid
/// making the fact true.
pub fn verify_fact_landmark(problem: &GroundedProblem, goal: &State, f: FactId) -> bool {
    if problem.init().contains(f) || goal.contains(f) {
        return true;
    }
    !relaxed_reachable_with_bans(problem, problem.achievers_of(f), goal)
}

/// Sound landmark test for a disjunctive fact set, by the same argument: if
/// some disjunct holds initially or is demanded by the goal the set is
/// trivially a landmark; otherwise any plan making a disjunct true must
/// apply an achiever of some disjunct, so banning them all and losing the
/// goal proves the set unavoidable.
pub fn verify_disjunctive_landmark(
    problem: &GroundedProblem,
    goal: &State,
    disjuncts: &State,
) -> bool {
    if disjuncts.intersects(problem.init()) || disjuncts.intersects(goal) {
        return true;
    }
    let mut banned: Vec<ActionId> = Vec::new();
    for f in disjuncts.iter() {
        banned.extend_from_slice(problem.achievers_of(f));
    }
    banned.sort();
    banned.dedup();
    !relaxed_reachable_with_bans(problem, &banned, goal)
}

/// Run the per-fact verification test on every fact of the universe.
///
/// If the goal is not even relaxed-reachable there are no valid plans and
/// the landmark definition degenerates; the extractor returns an empty set
/// and leaves the judgement to the scoring layer's empty-set rule.
pub fn extract_exhaustive(problem: &GroundedProblem, goal: &State) -> LandmarkSet {
    let mut found: BTreeMap<Vec<FactId>, Landmark> = BTreeMap::new();
    if problem
        .relaxed_closure_from(problem.init())
        .is_superset(goal)
    {
        for i in 0..problem.num_facts() {
            let f = FactId(i);
            if verify_fact_landmark(problem, goal, f) {
                let disjuncts = State::from_ids(problem.num_facts(), [f]);
                let lm = Landmark::new(problem, goal, disjuncts);
                found.insert(lm.key(), lm);
            }
        }
    }
    LandmarkSet::from_map(goal, Extractor::Exhaustive, found)
}

/// Back-chain from the goal facts with the default disjunct cap.
pub fn extract_rhw(problem: &GroundedProblem, goal: &State) -> LandmarkSet {
    extract_rhw_capped(problem, goal, DEFAULT_DISJUNCT_CAP)
}

/// Back-chain from the goal facts through first achievers.
///
/// Every goal fact is a landmark. For each landmark found (and not already
/// true initially), collect the first achievers of its disjuncts from the
/// relaxed planning graph and derive new candidates:
///
/// * facts shared by every achiever's precondition become singleton
///   candidates, admitted if they pass [`verify_fact_landmark`];
/// * for each predicate symbol appearing in every achiever's precondition,
///   the union of those preconditions forms a disjunctive candidate,
///   admitted if it has between 2 and `disjunct_cap` disjuncts and passes
///   [`verify_disjunctive_landmark`].
///
/// Admitted candidates are chained in turn, until no new landmark appears.
pub fn extract_rhw_capped(
    problem: &GroundedProblem,
    goal: &State,
    disjunct_cap: usize,
) -> LandmarkSet {
    let mut found: BTreeMap<Vec<FactId>, Landmark> = BTreeMap::new();
    if !problem
        .relaxed_closure_from(problem.init())
        .is_superset(goal)
    {
        return LandmarkSet::from_map(goal, Extractor::Rhw, found);
    }

    let rpg = RelaxedPlanningGraph::build(problem);
    let mut queue: VecDeque<State> = VecDeque::new();
    let mut enqueued: BTreeSet<Vec<FactId>> = BTreeSet::new();

    let admit = |lm: Landmark,
                 found: &mut BTreeMap<Vec<FactId>, Landmark>,
                 queue: &mut VecDeque<State>,
                 enqueued: &mut BTreeSet<Vec<FactId>>| {
        let key = lm.key();
        if enqueued.insert(key.clone()) {
            queue.push_back(lm.disjuncts().clone());
            found.insert(key, lm);
        }
    };

    for f in goal.iter() {
        let disjuncts = State::from_ids(problem.num_facts(), [f]);
        let lm = Landmark::new(problem, goal, disjuncts);
        admit(lm, &mut found, &mut queue, &mut enqueued);
    }

    while let Some(disjuncts) = queue.pop_front() {
        // A landmark already true at the start needs no achiever, so chaining
        // through achievers would be unsound reasoning about plans.
        if disjuncts.intersects(problem.init()) {
            continue;
        }
        let mut achievers: Vec<ActionId> = Vec::new();
        for f in disjuncts.iter() {
            achievers.extend_from_slice(rpg.first_achievers(f));
        }
        achievers.sort();
        achievers.dedup();
        if achievers.is_empty() {
            continue;
        }

        // (a) facts required by every first achiever
        let mut shared = problem.action(achievers[0]).pre.clone();
        for &a in &achievers[1..] {
            shared.intersect_with(&problem.action(a).pre);
        }
        for f in shared.iter() {
            let singleton = State::from_ids(problem.num_facts(), [f]);
            if enqueued.contains(&vec![f]) {
                continue;
            }
            if verify_fact_landmark(problem, goal, f) {
                let lm = Landmark::new(problem, goal, singleton);
                admit(lm, &mut found, &mut queue, &mut enqueued);
            }
        }

        // (b) per predicate symbol present in every achiever's precondition:
        // the union of those preconditions as a disjunctive candidate
        let mut common_preds: Option<BTreeSet<&str>> = None;
        for &a in &achievers {
            let preds: BTreeSet<&str> = problem
                .action(a)
                .pre
                .iter()
                .map(|f| problem.fact(f).predicate.as_str())
                .collect();
            common_preds = Some(match common_preds {
                None => preds,
                Some(acc) => acc.intersection(&preds).copied().collect(),
            });
        }
        for pred in common_preds.unwrap_or_default() {
            let mut candidate = State::empty(problem.num_facts());
            for &a in &achievers {
                for f in problem.action(a).pre.iter() {
                    if problem.fact(f).predicate == pred {
                        candidate.insert(f);
                    }
                }
            }
            let size = candidate.len();
            if size < 2 || size > disjunct_cap {
                continue;
            }
            let key: Vec<FactId> = candidate.iter().collect();
            if enqueued.contains(&key) {
                continue;
            }
            if verify_disjunctive_landmark(problem, goal, &candidate) {
                let lm = Landmark::new(problem, goal, candidate);
                admit(lm, &mut found, &mut queue, &mut enqueued);
            }
        }
    }

    LandmarkSet::from_map(goal, Extractor::Rhw, found)
}
