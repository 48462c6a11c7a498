//! Ground STRIPS semantics: facts, states, actions, plan validation.
//!
//! A grounded problem owns the fact universe. Facts are interned to dense
//! integer ids in lexicographic order (predicate, then args), so every
//! iteration over states and actions is deterministic.

use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use thiserror::Error;

/// A ground atom: predicate symbol plus object arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Fact {
    pub fn new(predicate: impl Into<String>, args: &[&str]) -> Self {
        Fact {
            predicate: predicate.into(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {}", a)?;
        }
        write!(f, ")")
    }
}

/// Dense index of a fact within a [`GroundedProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactId(pub usize);

/// Dense index of a ground action within a [`GroundedProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub usize);

/// A subset of the problem's fact universe, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct State {
    bits: FixedBitSet,
}

impl State {
    pub fn empty(num_facts: usize) -> Self {
        State {
            bits: FixedBitSet::with_capacity(num_facts),
        }
    }

    pub fn from_ids(num_facts: usize, ids: impl IntoIterator<Item = FactId>) -> Self {
        let mut s = State::empty(num_facts);
        for id in ids {
            s.insert(id);
        }
        s
    }

    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, id: FactId) -> bool {
        self.bits.contains(id.0)
    }

    pub fn insert(&mut self, id: FactId) {
        self.bits.insert(id.0);
    }

    pub fn remove(&mut self, id: FactId) {
        self.bits.remove(id.0);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// True iff every fact of `other` is in `self`.
    pub fn is_superset(&self, other: &State) -> bool {
        other.bits.is_subset(&self.bits)
    }

    pub fn is_subset(&self, other: &State) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn intersects(&self, other: &State) -> bool {
        !self.bits.is_disjoint(&other.bits)
    }

    pub fn union_with(&mut self, other: &State) {
        self.bits.union_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &State) {
        self.bits.difference_with(&other.bits);
    }

    pub fn intersect_with(&mut self, other: &State) {
        self.bits.intersect_with(&other.bits);
    }

    /// Fact ids in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = FactId> + '_ {
        self.bits.ones().map(FactId)
    }

    /// Lexicographic comparison of the ascending fact-id sequences. This is
    /// the canonical fact order used for deterministic tie-breaking.
    pub fn cmp_canonical(&self, other: &State) -> std::cmp::Ordering {
        self.iter().cmp(other.iter())
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.bits.ones()).finish()
    }
}

/// A ground action with interned precondition/add/delete sets.
#[derive(Debug, Clone)]
pub struct GroundAction {
    pub name: String,
    pub args: Vec<String>,
    pub pre: State,
    pub add: State,
    pub del: State,
    /// Cached `pre ∪ add`, the fact set an observation of this action reveals.
    pub pre_or_add: State,
    pub cost: f64,
}

impl GroundAction {
    pub fn applicable_in(&self, s: &State) -> bool {
        s.is_superset(&self.pre)
    }

    /// Successor state `(s \ del) ∪ add`. Deletes apply before adds, so a
    /// fact in both lists ends up true.
    pub fn apply_to(&self, s: &State) -> State {
        let mut next = s.clone();
        next.difference_with(&self.del);
        next.union_with(&self.add);
        next
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {}", a)?;
        }
        write!(f, ")")
    }
}

/// Action description by fact literals, used to assemble a problem before
/// interning.
#[derive(Debug, Clone)]
pub struct ActionDef {
    pub name: String,
    pub args: Vec<String>,
    pub pre: Vec<Fact>,
    pub add: Vec<Fact>,
    pub del: Vec<Fact>,
    pub cost: f64,
}

impl ActionDef {
    pub fn new(name: impl Into<String>, args: &[&str]) -> Self {
        ActionDef {
            name: name.into(),
            args: args.iter().map(|a| a.to_string()).collect(),
            pre: Vec::new(),
            add: Vec::new(),
            del: Vec::new(),
            cost: 1.0,
        }
    }

    pub fn pre(mut self, f: Fact) -> Self {
        self.pre.push(f);
        self
    }

    pub fn add(mut self, f: Fact) -> Self {
        self.add.push(f);
        self
    }

    pub fn del(mut self, f: Fact) -> Self {
        self.del.push(f);
        self
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("fact has an empty predicate symbol")]
    EmptyPredicate,
    #[error("action {action} has negative cost {cost}")]
    NegativeCost { action: String, cost: f64 },
}

#[derive(Debug, Error)]
#[error("action {action} is not applicable in the given state")]
pub struct InapplicableAction {
    pub action: String,
}

/// An ordered sequence of action ids. May be empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Plan {
    pub steps: Vec<ActionId>,
}

impl Plan {
    pub fn new(steps: Vec<ActionId>) -> Self {
        Plan { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Why a plan failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanFailure {
    /// Step at this index was not applicable; the trace stops before it.
    InapplicableStep(usize),
    /// All steps applied but the final state does not contain the goal.
    GoalNotSatisfied,
}

/// Result of simulating a plan from the initial state.
#[derive(Debug, Clone)]
pub struct PlanReport {
    pub valid: bool,
    /// Sum of costs of the steps that were actually applied.
    pub cost: f64,
    /// States visited, starting at the initial state. `|trace| = applied + 1`.
    pub trace: Vec<State>,
    pub failure: Option<PlanFailure>,
}

/// A ground STRIPS problem: fact universe, initial state, actions, goal.
#[derive(Debug, Clone)]
pub struct GroundedProblem {
    domain_name: String,
    facts: Vec<Fact>,
    fact_index: BTreeMap<Fact, FactId>,
    init: State,
    actions: Vec<GroundAction>,
    goal: State,
    goal_relaxed_reachable: bool,
    /// Per fact: every action with the fact in its add list.
    achievers: Vec<Vec<ActionId>>,
}

impl GroundedProblem {
    /// Assemble a problem from fact literals. The universe is the union of
    /// everything mentioned (initial state, goal, extra facts, and all
    /// action condition/effect lists), interned in lexicographic order.
    pub fn new(
        domain_name: impl Into<String>,
        init: Vec<Fact>,
        actions: Vec<ActionDef>,
        goal: Vec<Fact>,
        extra_facts: Vec<Fact>,
    ) -> Result<Self, ModelError> {
        let mut universe: Vec<Fact> = Vec::new();
        let push = |f: &Fact, universe: &mut Vec<Fact>| -> Result<(), ModelError> {
            if f.predicate.is_empty() {
                return Err(ModelError::EmptyPredicate);
            }
            universe.push(f.clone());
            Ok(())
        };
        for f in init.iter().chain(goal.iter()).chain(extra_facts.iter()) {
            push(f, &mut universe)?;
        }
        for a in &actions {
            if a.cost < 0.0 {
                return Err(ModelError::NegativeCost {
                    action: a.name.clone(),
                    cost: a.cost,
                });
            }
            for f in a.pre.iter().chain(a.add.iter()).chain(a.del.iter()) {
                push(f, &mut universe)?;
            }
        }
        universe.sort();
        universe.dedup();

        let fact_index: BTreeMap<Fact, FactId> = universe
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), FactId(i)))
            .collect();
        let n = universe.len();
        let intern = |facts: &[Fact]| State::from_ids(n, facts.iter().map(|f| fact_index[f]));

        let init_state = intern(&init);
        let goal_state = intern(&goal);
        let ground_actions: Vec<GroundAction> = actions
            .into_iter()
            .map(|a| {
                let pre = intern(&a.pre);
                let add = intern(&a.add);
                let mut pre_or_add = pre.clone();
                pre_or_add.union_with(&add);
                GroundAction {
                    name: a.name,
                    args: a.args,
                    del: intern(&a.del),
                    pre,
                    add,
                    pre_or_add,
                    cost: a.cost,
                }
            })
            .collect();

        let mut achievers = vec![Vec::new(); n];
        for (i, a) in ground_actions.iter().enumerate() {
            for f in a.add.iter() {
                achievers[f.0].push(ActionId(i));
            }
        }

        let mut problem = GroundedProblem {
            domain_name: domain_name.into(),
            facts: universe,
            fact_index,
            init: init_state,
            actions: ground_actions,
            goal: goal_state,
            goal_relaxed_reachable: false,
            achievers,
        };
        problem.goal_relaxed_reachable = problem
            .relaxed_closure_from(&problem.init)
            .is_superset(&problem.goal);
        Ok(problem)
    }

    pub fn domain_name(&self) -> &str {
        &self.domain_name
    }

    pub fn num_facts(&self) -> usize {
        self.facts.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn fact(&self, id: FactId) -> &Fact {
        &self.facts[id.0]
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn fact_id(&self, fact: &Fact) -> Option<FactId> {
        self.fact_index.get(fact).copied()
    }

    pub fn init(&self) -> &State {
        &self.init
    }

    pub fn goal(&self) -> &State {
        &self.goal
    }

    pub fn goal_relaxed_reachable(&self) -> bool {
        self.goal_relaxed_reachable
    }

    /// The same problem with a different goal conjunction over the same fact
    /// universe. The relaxed-reachability flag is recomputed.
    pub fn with_goal(&self, goal: State) -> GroundedProblem {
        assert_eq!(goal.capacity(), self.num_facts());
        let mut p = self.clone();
        p.goal_relaxed_reachable = p.relaxed_closure_from(&p.init).is_superset(&goal);
        p.goal = goal;
        p
    }

    pub fn action(&self, id: ActionId) -> &GroundAction {
        &self.actions[id.0]
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    pub fn action_ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.actions.len()).map(ActionId)
    }

    /// Actions whose add list contains the fact.
    pub fn achievers_of(&self, fact: FactId) -> &[ActionId] {
        &self.achievers[fact.0]
    }

    /// Look up a ground action by name and argument list.
    pub fn find_action(&self, name: &str, args: &[String]) -> Option<ActionId> {
        self.actions
            .iter()
            .position(|a| a.name == name && a.args == args)
            .map(ActionId)
    }

    pub fn applicable(&self, s: &State, a: ActionId) -> bool {
        self.actions[a.0].applicable_in(s)
    }

    pub fn apply(&self, s: &State, a: ActionId) -> Result<State, InapplicableAction> {
        let action = &self.actions[a.0];
        if !action.applicable_in(s) {
            return Err(InapplicableAction {
                action: action.to_string(),
            });
        }
        Ok(action.apply_to(s))
    }

    /// Simulate a plan from the initial state. Invalidity is reported in the
    /// result, never as an error.
    pub fn validate_plan(&self, plan: &Plan) -> PlanReport {
        let mut trace = vec![self.init.clone()];
        let mut cost = 0.0;
        for (i, &step) in plan.steps.iter().enumerate() {
            let action = &self.actions[step.0];
            let current = trace.last().expect("trace is never empty");
            if !action.applicable_in(current) {
                return PlanReport {
                    valid: false,
                    cost,
                    trace,
                    failure: Some(PlanFailure::InapplicableStep(i)),
                };
            }
            let next = action.apply_to(current);
            cost += action.cost;
            trace.push(next);
        }
        let valid = trace
            .last()
            .expect("trace is never empty")
            .is_superset(&self.goal);
        PlanReport {
            valid,
            cost,
            trace,
            failure: if valid {
                None
            } else {
                Some(PlanFailure::GoalNotSatisfied)
            },
        }
    }

    /// Delete-relaxed reachability closure from a state: all facts that can
    /// become true if delete lists are ignored.
    pub fn relaxed_closure_from(&self, from: &State) -> State {
        let mut reached = from.clone();
        let mut applied = vec![false; self.actions.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for (i, a) in self.actions.iter().enumerate() {
                if applied[i] || !reached.is_superset(&a.pre) {
                    continue;
                }
                applied[i] = true;
                if !a.add.is_subset(&reached) {
                    reached.union_with(&a.add);
                    changed = true;
                }
            }
        }
        reached
    }
}
