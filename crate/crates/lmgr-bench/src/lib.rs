//! Deterministic fixtures for the pipeline benchmarks: grid-walk problems
//! of scalable size, built directly as grounded models so the benchmarks
//! measure extraction, search, and scoring rather than parsing.

use lmgr_core::planner::plan_observations;
use lmgr_core::{ActionDef, ActionId, Fact, GroundedProblem, PlannerConfig, State};

/// A `side`-by-`side` grid walk: one `(is-at <cell>)` fact per cell and a
/// reversible `move` action per grid edge. The walker starts in the
/// top-left corner; the problem goal is the opposite corner.
pub fn grid_walk(side: usize) -> GroundedProblem {
    assert!(side >= 2, "grid needs at least two cells per side");
    let cell = |x: usize, y: usize| format!("c{x}-{y}");
    let at = |name: &str| Fact::new("is-at", &[name]);
    let mut actions = Vec::new();
    for x in 0..side {
        for y in 0..side {
            let here = cell(x, y);
            let mut neighbors = Vec::new();
            if x + 1 < side {
                neighbors.push(cell(x + 1, y));
            }
            if y + 1 < side {
                neighbors.push(cell(x, y + 1));
            }
            for there in neighbors {
                for (from, to) in [(&here, &there), (&there, &here)] {
                    actions.push(
                        ActionDef::new(format!("move-{from}-{to}"), &[from, to])
                            .pre(at(from))
                            .add(at(to))
                            .del(at(from)),
                    );
                }
            }
        }
    }
    GroundedProblem::new(
        format!("grid-{side}"),
        vec![at(&cell(0, 0))],
        actions,
        vec![at(&cell(side - 1, side - 1))],
        vec![],
    )
    .unwrap()
}

/// The grid plus online-recognition inputs: one candidate goal per
/// non-start corner, with the far corner as the true goal, and the full
/// observation sequence of a planned walk to it.
pub fn grid_recognition(side: usize) -> (GroundedProblem, Vec<State>, Vec<ActionId>) {
    let problem = grid_walk(side);
    let corner = |x: usize, y: usize| {
        let fact = Fact::new("is-at", &[&format!("c{x}-{y}")]);
        let id = problem.fact_id(&fact).expect("corner cell exists");
        State::from_ids(problem.num_facts(), [id])
    };
    let goals = vec![
        corner(side - 1, side - 1),
        corner(side - 1, 0),
        corner(0, side - 1),
    ];
    let plan = plan_observations(&problem, &goals[0], &PlannerConfig::default())
        .expect("far corner is reachable");
    (problem, goals, plan.steps)
}
