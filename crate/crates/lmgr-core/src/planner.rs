//! Internal satisficing planner: greedy best-first search guided by the
//! additive delete-relaxation heuristic.
//!
//! Used to generate observation traces for benchmark problems. Plans are
//! valid but not optimal. Ties in the heuristic are broken by a seeded
//! random key, so the same seed always yields the same plan and different
//! seeds explore different (equally greedy) traces.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rpg::h_add;
use crate::strips::{ActionId, GroundedProblem, Plan, State};

#[derive(Debug, Clone)]
pub struct PlannerConfig {
    pub seed: u64,
    /// Refuse after expanding this many states.
    pub node_cap: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            seed: 0,
            node_cap: 500_000,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlannerError {
    #[error("no plan exists for the given goal")]
    Unsolvable,
    #[error("search expanded more than {cap} states")]
    NodeCapExceeded { cap: usize },
}

/// Find a valid plan from the initial state to `goal`, or report that none
/// exists. The returned plan has passed `validate_plan`.
pub fn plan_observations(
    problem: &GroundedProblem,
    goal: &State,
    config: &PlannerConfig,
) -> Result<Plan, PlannerError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    // arena of search nodes: state + how we got there
    struct Node {
        state: State,
        parent: Option<(usize, ActionId)>,
    }
    let mut nodes: Vec<Node> = Vec::new();
    let mut seen: HashMap<State, usize> = HashMap::new();
    // min-heap on (h, tie, insertion); h as bits is order-preserving for
    // finite non-negative floats
    let mut open: BinaryHeap<Reverse<(u64, u64, usize)>> = BinaryHeap::new();

    let push = |state: State,
                parent: Option<(usize, ActionId)>,
                nodes: &mut Vec<Node>,
                seen: &mut HashMap<State, usize>,
                open: &mut BinaryHeap<Reverse<(u64, u64, usize)>>,
                rng: &mut ChaCha8Rng| {
        if seen.contains_key(&state) {
            return;
        }
        let h = match h_add(problem, &state, goal) {
            Some(h) => h,
            None => return, // relaxed-unreachable: a proven dead end
        };
        let id = nodes.len();
        seen.insert(state.clone(), id);
        nodes.push(Node { state, parent });
        open.push(Reverse((h.to_bits(), rng.next_u64(), id)));
    };

    push(
        problem.init().clone(),
        None,
        &mut nodes,
        &mut seen,
        &mut open,
        &mut rng,
    );

    let mut expanded = 0usize;
    while let Some(Reverse((_, _, id))) = open.pop() {
        let state = nodes[id].state.clone();
        if state.is_superset(goal) {
            let mut steps = Vec::new();
            let mut cursor = id;
            while let Some((parent, action)) = nodes[cursor].parent {
                steps.push(action);
                cursor = parent;
            }
            steps.reverse();
            let plan = Plan::new(steps);
            let report = problem.with_goal(goal.clone()).validate_plan(&plan);
            assert!(report.valid, "greedy search produced an invalid plan");
            return Ok(plan);
        }

        expanded += 1;
        if expanded > config.node_cap {
            return Err(PlannerError::NodeCapExceeded {
                cap: config.node_cap,
            });
        }
        for a in problem.action_ids() {
            let action = problem.action(a);
            if !action.applicable_in(&state) {
                continue;
            }
            let succ = action.apply_to(&state);
            push(
                succ,
                Some((id, a)),
                &mut nodes,
                &mut seen,
                &mut open,
                &mut rng,
            );
        }
    }
    Err(PlannerError::Unsolvable)
}
