//! Relaxed planning graph and delete-relaxed heuristics.
//!
//! The graph ignores delete lists and expands fact layers until a fixpoint:
//! layer 0 is the initial state, and each next layer adds the effects of all
//! actions whose preconditions are satisfied one layer earlier. Built once
//! per problem it answers first-level and first-achiever queries; built with
//! a ban list it answers the reachability tests used for landmark
//! verification.

use crate::strips::{ActionId, FactId, GroundedProblem, State};

/// Layered delete-relaxation of a ground problem.
#[derive(Debug, Clone)]
pub struct RelaxedPlanningGraph {
    /// Cumulative fact sets; `layers[0]` is the starting state and the last
    /// entry is the relaxed-reachable closure.
    layers: Vec<State>,
    /// Actions applicable at each layer (preconditions satisfied there).
    applicable: Vec<Vec<ActionId>>,
    /// Index of the first layer containing each fact; `None` if unreachable.
    first_level: Vec<Option<usize>>,
    /// For each fact first appearing at layer `t >= 1`: the achievers whose
    /// preconditions hold at layer `t - 1`. Empty for layer-0 facts.
    first_achievers: Vec<Vec<ActionId>>,
}

impl RelaxedPlanningGraph {
    pub fn build(problem: &GroundedProblem) -> Self {
        Self::build_with_bans(problem, &[])
    }

    /// Build the graph as if the banned actions did not exist.
    pub fn build_with_bans(problem: &GroundedProblem, banned: &[ActionId]) -> Self {
        let n = problem.num_facts();
        let banned_mask = ban_mask(problem, banned);

        let mut layers = vec![problem.init().clone()];
        let mut applicable: Vec<Vec<ActionId>> = Vec::new();
        let mut first_level: Vec<Option<usize>> = vec![None; n];
        for f in problem.init().iter() {
            first_level[f.0] = Some(0);
        }

        loop {
            let current = layers.last().expect("at least layer 0");
            let mut next = current.clone();
            let mut layer_actions = Vec::new();
            for (i, a) in problem.actions().iter().enumerate() {
                if banned_mask[i] || !current.is_superset(&a.pre) {
                    continue;
                }
                layer_actions.push(ActionId(i));
                next.union_with(&a.add);
            }
            applicable.push(layer_actions);
            if next == *current {
                break;
            }
            let t = layers.len();
            for f in next.iter() {
                if first_level[f.0].is_none() {
                    first_level[f.0] = Some(t);
                }
            }
            layers.push(next);
        }

        let mut first_achievers = vec![Vec::new(); n];
        for (f, level) in first_level.iter().enumerate() {
            let t = match level {
                Some(t) if *t >= 1 => *t,
                _ => continue,
            };
            let prev = &layers[t - 1];
            for &a in problem.achievers_of(FactId(f)) {
                if !banned_mask[a.0] && prev.is_superset(&problem.action(a).pre) {
                    first_achievers[f].push(a);
                }
            }
        }

        RelaxedPlanningGraph {
            layers,
            applicable,
            first_level,
            first_achievers,
        }
    }

    pub fn layers(&self) -> &[State] {
        &self.layers
    }

    /// Actions whose preconditions hold at the given layer.
    pub fn applicable_actions(&self, layer: usize) -> &[ActionId] {
        &self.applicable[layer]
    }

    pub fn first_level(&self, f: FactId) -> Option<usize> {
        self.first_level[f.0]
    }

    pub fn first_achievers(&self, f: FactId) -> &[ActionId] {
        &self.first_achievers[f.0]
    }

    /// The relaxed-reachable closure (the final layer).
    pub fn reachable(&self) -> &State {
        self.layers.last().expect("at least layer 0")
    }

    pub fn fact_reachable(&self, f: FactId) -> bool {
        self.first_level[f.0].is_some()
    }

    pub fn all_reachable(&self, facts: &State) -> bool {
        self.reachable().is_superset(facts)
    }
}

fn ban_mask(problem: &GroundedProblem, banned: &[ActionId]) -> Vec<bool> {
    let mut mask = vec![false; problem.num_actions()];
    for &a in banned {
        mask[a.0] = true;
    }
    mask
}

/// True iff every fact of `target` is delete-relaxed reachable from the
/// initial state when the banned actions are removed from the problem.
///
/// This is the core test behind landmark verification: if banning every
/// achiever of a fact makes the goal unreachable even under relaxation, no
/// real plan avoids that fact.
pub fn relaxed_reachable_with_bans(
    problem: &GroundedProblem,
    banned: &[ActionId],
    target: &State,
) -> bool {
    let banned_mask = ban_mask(problem, banned);
    let mut reached = problem.init().clone();
    if reached.is_superset(target) {
        return true;
    }
    let mut applied = vec![false; problem.num_actions()];
    let mut changed = true;
    while changed {
        changed = false;
        for (i, a) in problem.actions().iter().enumerate() {
            if applied[i] || banned_mask[i] || !reached.is_superset(&a.pre) {
                continue;
            }
            applied[i] = true;
            if !a.add.is_subset(&reached) {
                reached.union_with(&a.add);
                changed = true;
                if reached.is_superset(target) {
                    return true;
                }
            }
        }
    }
    false
}

/// Additive heuristic from `from` to `target`: each fact is priced at the
/// cheapest achiever cost plus the summed price of its preconditions, and
/// the estimate is the sum over target facts. `None` if some target fact is
/// not relaxed-reachable. Computed with a Dijkstra sweep over facts.
pub fn h_add(problem: &GroundedProblem, from: &State, target: &State) -> Option<f64> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let n = problem.num_facts();
    // per fact: the actions listing it as a precondition
    let mut fact_consumers: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, a) in problem.actions().iter().enumerate() {
        for f in a.pre.iter() {
            fact_consumers[f.0].push(i);
        }
    }

    let mut dist: Vec<f64> = vec![f64::INFINITY; n];
    let mut settled = vec![false; n];
    let mut remaining: Vec<usize> = problem.actions().iter().map(|a| a.pre.len()).collect();
    let mut pre_cost: Vec<f64> = vec![0.0; problem.num_actions()];

    // BinaryHeap over (cost, fact); f64 costs are finite and non-negative,
    // so the bit-level ordering trick below is a total order on them.
    let key = |c: f64| Reverse(c.to_bits());
    let mut heap: BinaryHeap<(Reverse<u64>, usize)> = BinaryHeap::new();

    for f in from.iter() {
        dist[f.0] = 0.0;
        heap.push((key(0.0), f.0));
    }

    let relax =
        |f: usize, c: f64, dist: &mut Vec<f64>, heap: &mut BinaryHeap<(Reverse<u64>, usize)>| {
            if c < dist[f] {
                dist[f] = c;
                heap.push((key(c), f));
            }
        };

    // Actions with no preconditions fire immediately from any state.
    for (i, a) in problem.actions().iter().enumerate() {
        if remaining[i] == 0 {
            for g in a.add.iter() {
                relax(g.0, a.cost, &mut dist, &mut heap);
            }
        }
    }

    while let Some((Reverse(bits), f)) = heap.pop() {
        if settled[f] {
            continue;
        }
        let d = f64::from_bits(bits);
        if d > dist[f] {
            continue;
        }
        settled[f] = true;
        for &i in &fact_consumers[f] {
            pre_cost[i] += d;
            remaining[i] -= 1;
            if remaining[i] == 0 {
                let a = problem.action(crate::strips::ActionId(i));
                let total = a.cost + pre_cost[i];
                for g in a.add.iter() {
                    relax(g.0, total, &mut dist, &mut heap);
                }
            }
        }
    }

    let mut sum = 0.0;
    for f in target.iter() {
        if dist[f.0].is_infinite() {
            return None;
        }
        sum += dist[f.0];
    }
    Some(sum)
}
