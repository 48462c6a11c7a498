//! Exhaustive plan-space analysis for small problems.
//!
//! Enumerates every acyclic valid plan by depth-first search over the real
//! (unrelaxed) state space and keeps the set of facts each plan makes true.
//! A fact is a landmark exactly when it appears in every such trace, which
//! makes this module the ground truth the polynomial extractors are checked
//! against.
//!
//! Enumeration stops a branch the moment the goal is satisfied: every longer
//! valid plan extends one of these minimal plans with a superset trace, so
//! neither the landmark intersection nor disjunction checks are affected.
//!
//! Cost is guarded twice: a breadth-first count of reachable states up front
//! (`state_cap`) and a visit budget on the path enumeration itself
//! (`step_cap`). Exceeding either refuses the instance with an error; the
//! oracle never returns an approximate answer.

use std::collections::{BTreeMap, HashSet, VecDeque};

use thiserror::Error;

use crate::landmarks::{Extractor, Landmark, LandmarkSet};
use crate::strips::{FactId, GroundedProblem, State};

#[derive(Debug, Clone)]
pub struct OracleConfig {
    /// Refuse if the reachable state space is larger than this.
    pub state_cap: usize,
    /// Refuse if path enumeration visits more nodes than this.
    pub step_cap: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            state_cap: 100_000,
            step_cap: 5_000_000,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("goal is not reachable; every fact would vacuously be a landmark")]
    GoalUnreachable,
    #[error("reachable state space exceeds the cap of {cap} states")]
    StateCapExceeded { cap: usize },
    #[error("plan enumeration exceeded the visit budget of {cap}")]
    StepCapExceeded { cap: u64 },
}

/// The deduplicated fact traces of all minimal acyclic valid plans.
#[derive(Debug, Clone)]
pub struct PlanSpace {
    reachable_states: usize,
    num_minimal_plans: u64,
    /// Distinct values of `union of states along one plan`, one per trace.
    traces: Vec<State>,
}

impl PlanSpace {
    pub fn enumerate(
        problem: &GroundedProblem,
        config: &OracleConfig,
    ) -> Result<Self, OracleError> {
        let (reachable_states, goal_reachable) = count_reachable(problem, config.state_cap)?;
        if !goal_reachable {
            return Err(OracleError::GoalUnreachable);
        }

        struct Frame {
            state: State,
            /// Union of all states from the root down to this frame.
            union: State,
            next_action: usize,
        }

        let mut traces_set: HashSet<State> = HashSet::new();
        let mut num_minimal_plans: u64 = 0;
        let mut steps: u64 = 0;
        let mut stack: Vec<Frame> = Vec::new();
        let mut on_path: HashSet<State> = HashSet::new();

        // Visit a state: record it if it satisfies the goal, otherwise push
        // a frame so its successors get expanded.
        let mut visit = |state: State,
                         union: State,
                         stack: &mut Vec<Frame>,
                         on_path: &mut HashSet<State>,
                         steps: &mut u64|
         -> Result<(), OracleError> {
            *steps += 1;
            if *steps > config.step_cap {
                return Err(OracleError::StepCapExceeded {
                    cap: config.step_cap,
                });
            }
            if state.is_superset(problem.goal()) {
                num_minimal_plans += 1;
                traces_set.insert(union);
            } else {
                on_path.insert(state.clone());
                stack.push(Frame {
                    state,
                    union,
                    next_action: 0,
                });
            }
            Ok(())
        };

        let init = problem.init().clone();
        visit(init.clone(), init, &mut stack, &mut on_path, &mut steps)?;

        while !stack.is_empty() {
            // Pull the next unexplored successor out of the top frame before
            // touching the stack again.
            let mut next_visit: Option<(State, State)> = None;
            {
                let frame = stack.last_mut().expect("stack is nonempty");
                while frame.next_action < problem.num_actions() {
                    let action = frame.next_action;
                    frame.next_action += 1;
                    let a = &problem.actions()[action];
                    if !a.applicable_in(&frame.state) {
                        continue;
                    }
                    let succ = a.apply_to(&frame.state);
                    if on_path.contains(&succ) {
                        continue;
                    }
                    let mut union = frame.union.clone();
                    union.union_with(&succ);
                    next_visit = Some((succ, union));
                    break;
                }
            }
            match next_visit {
                Some((succ, union)) => {
                    visit(succ, union, &mut stack, &mut on_path, &mut steps)?;
                }
                None => {
                    let done = stack.pop().expect("stack is nonempty");
                    on_path.remove(&done.state);
                }
            }
        }

        Ok(PlanSpace {
            reachable_states,
            num_minimal_plans,
            traces: traces_set.into_iter().collect(),
        })
    }

    pub fn reachable_states(&self) -> usize {
        self.reachable_states
    }

    pub fn num_minimal_plans(&self) -> u64 {
        self.num_minimal_plans
    }

    pub fn num_distinct_traces(&self) -> usize {
        self.traces.len()
    }

    /// True iff the fact occurs on every plan trace.
    pub fn is_fact_landmark(&self, f: FactId) -> bool {
        self.traces.iter().all(|t| t.contains(f))
    }

    /// True iff every plan trace contains at least one of the disjuncts.
    pub fn is_disjunctive_landmark(&self, disjuncts: &State) -> bool {
        self.traces.iter().all(|t| t.intersects(disjuncts))
    }

    /// All single-fact landmarks: the intersection of every trace.
    pub fn landmark_facts(&self) -> State {
        let mut iter = self.traces.iter();
        let mut acc = iter
            .next()
            .expect("goal reachable implies at least one trace")
            .clone();
        for t in iter {
            acc.intersect_with(t);
        }
        acc
    }
}

/// Ground-truth landmark extraction: enumerate the plan space for the given
/// goal and wrap every fact common to all traces as a singleton landmark,
/// categorized like the extractors' output. By construction the result is
/// both sound and complete for the all-plans landmark definition (restricted
/// to acyclic plans, which decide the general case as argued above).
pub fn oracle_landmarks(
    problem: &GroundedProblem,
    goal: &State,
    config: &OracleConfig,
) -> Result<LandmarkSet, OracleError> {
    let scoped = problem.with_goal(goal.clone());
    let space = PlanSpace::enumerate(&scoped, config)?;
    let mut found: BTreeMap<Vec<FactId>, Landmark> = BTreeMap::new();
    for f in space.landmark_facts().iter() {
        let lm = Landmark::new(problem, goal, State::from_ids(problem.num_facts(), [f]));
        found.insert(lm.key(), lm);
    }
    Ok(LandmarkSet::from_sorted_vec(
        goal.clone(),
        Extractor::Oracle,
        found.into_values().collect(),
    ))
}

/// Breadth-first count of the real reachable state space. Returns the number
/// of distinct states and whether any of them satisfies the goal.
fn count_reachable(
    problem: &GroundedProblem,
    state_cap: usize,
) -> Result<(usize, bool), OracleError> {
    let mut seen: HashSet<State> = HashSet::new();
    let mut queue: VecDeque<State> = VecDeque::new();
    let mut goal_reachable = false;

    seen.insert(problem.init().clone());
    queue.push_back(problem.init().clone());

    while let Some(state) = queue.pop_front() {
        if state.is_superset(problem.goal()) {
            goal_reachable = true;
        }
        for a in problem.actions() {
            if !a.applicable_in(&state) {
                continue;
            }
            let succ = a.apply_to(&state);
            if seen.contains(&succ) {
                continue;
            }
            if seen.len() >= state_cap {
                return Err(OracleError::StateCapExceeded { cap: state_cap });
            }
            seen.insert(succ.clone());
            queue.push_back(succ);
        }
    }
    Ok((seen.len(), goal_reachable))
}
