//! Schema instantiation with delete-relaxed reachability pruning.
//!
//! Only actions whose preconditions become reachable from the initial state
//! (ignoring deletes) are grounded, and only reachable facts enter the fact
//! universe — except goal facts, which are always retained so unreachable
//! goals stay expressible. Grounded action order is deterministic: schemas
//! in declaration order, bindings in sorted object order.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::{Atom, DomainAst, ProblemAst, Term, TypedName};
use crate::strips::{ActionDef, Fact, GroundedProblem, ModelError};

/// Default bound on the number of candidate action instantiations.
pub const DEFAULT_GROUND_CAP: u64 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum GroundError {
    #[error("grounding would instantiate {candidates} actions, above the cap of {cap}")]
    TooLarge { candidates: u64, cap: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Ground a parsed domain/problem pair with the default instantiation cap.
pub fn ground(domain: &DomainAst, problem: &ProblemAst) -> Result<GroundedProblem, GroundError> {
    ground_with_cap(domain, problem, DEFAULT_GROUND_CAP)
}

/// Ground with an explicit instantiation cap.
pub fn ground_with_cap(
    domain: &DomainAst,
    problem: &ProblemAst,
    cap: u64,
) -> Result<GroundedProblem, GroundError> {
    ground_with_extra_facts(domain, problem, &[], cap)
}

/// Ground while force-retaining `extra_facts` in the fact universe. Used by
/// the bundle loader so every candidate goal's facts exist even when
/// unreachable.
pub fn ground_with_extra_facts(
    domain: &DomainAst,
    problem: &ProblemAst,
    extra_facts: &[Fact],
    cap: u64,
) -> Result<GroundedProblem, GroundError> {
    let objects_by_type = objects_by_type(domain, problem);
    let empty: Vec<String> = Vec::new();

    // refuse up front if naive instantiation is too large to even enumerate
    let mut candidates: u64 = 0;
    for schema in &domain.actions {
        let mut product: u64 = 1;
        for param in &schema.params {
            let n = objects_by_type.get(&param.ty).map_or(0, |v| v.len());
            product = product.saturating_mul(n as u64);
        }
        candidates = candidates.saturating_add(product);
    }
    if candidates > cap {
        return Err(GroundError::TooLarge { candidates, cap });
    }

    let init: Vec<Fact> = problem.init.iter().map(ground_atom).collect();
    let goal: Vec<Fact> = problem.goal.iter().map(ground_atom).collect();

    let mut reachable: BTreeSet<Fact> = init.iter().cloned().collect();
    let mut grounded: Vec<ActionDef> = Vec::new();
    let mut grounded_keys: BTreeSet<(usize, Vec<String>)> = BTreeSet::new();
    loop {
        let mut changed = false;
        for (si, schema) in domain.actions.iter().enumerate() {
            let domains: Vec<&Vec<String>> = schema
                .params
                .iter()
                .map(|p| objects_by_type.get(&p.ty).unwrap_or(&empty))
                .collect();
            if domains.iter().any(|d| d.is_empty()) {
                continue;
            }
            let mut odometer = vec![0usize; domains.len()];
            'bindings: loop {
                let binding: Vec<String> = odometer
                    .iter()
                    .zip(&domains)
                    .map(|(&i, d)| d[i].clone())
                    .collect();
                let key = (si, binding);
                if !grounded_keys.contains(&key) {
                    let pre: Vec<Fact> = schema
                        .precondition
                        .iter()
                        .map(|a| instantiate(a, &schema.params, &key.1))
                        .collect();
                    if pre.iter().all(|f| reachable.contains(f)) {
                        let add: Vec<Fact> = schema
                            .add
                            .iter()
                            .map(|a| instantiate(a, &schema.params, &key.1))
                            .collect();
                        let del: Vec<Fact> = schema
                            .del
                            .iter()
                            .map(|a| instantiate(a, &schema.params, &key.1))
                            .collect();
                        reachable.extend(add.iter().cloned());
                        grounded.push(ActionDef {
                            name: schema.name.clone(),
                            args: key.1.clone(),
                            pre,
                            add,
                            del,
                            cost: 1.0,
                        });
                        grounded_keys.insert(key);
                        changed = true;
                    }
                }
                // advance the odometer; empty parameter lists yield exactly
                // one (empty) binding
                for pos in (0..odometer.len()).rev() {
                    odometer[pos] += 1;
                    if odometer[pos] < domains[pos].len() {
                        continue 'bindings;
                    }
                    odometer[pos] = 0;
                }
                break;
            }
        }
        if !changed {
            break;
        }
    }

    // the fact universe: reachable facts plus force-retained goal facts;
    // deletes of facts outside it can never fire and are dropped
    let mut universe: BTreeSet<Fact> = reachable;
    universe.extend(goal.iter().cloned());
    universe.extend(extra_facts.iter().cloned());
    for action in &mut grounded {
        action.del.retain(|f| universe.contains(f));
    }

    let mut extra: Vec<Fact> = extra_facts.to_vec();
    extra.extend(universe);
    Ok(GroundedProblem::new(
        domain.name.clone(),
        init,
        grounded,
        goal,
        extra,
    )?)
}

/// All usable objects (problem objects plus domain constants) grouped by
/// every type they satisfy, sorted by name within each group.
fn objects_by_type(domain: &DomainAst, problem: &ProblemAst) -> BTreeMap<String, Vec<String>> {
    let parents: BTreeMap<&str, &str> = domain
        .types
        .iter()
        .map(|t| (t.name.as_str(), t.ty.as_str()))
        .collect();
    let mut by_type: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let all: Vec<&TypedName> = domain.constants.iter().chain(&problem.objects).collect();
    for object in all {
        let mut ty = object.ty.as_str();
        loop {
            by_type
                .entry(ty.to_string())
                .or_default()
                .push(object.name.clone());
            if ty == "object" {
                break;
            }
            ty = parents[ty];
        }
    }
    for group in by_type.values_mut() {
        group.sort();
        group.dedup();
    }
    by_type
}

fn ground_atom(atom: &Atom) -> Fact {
    Fact {
        predicate: atom.predicate.clone(),
        args: atom.terms.iter().map(|t| t.text().to_string()).collect(),
    }
}

fn instantiate(atom: &Atom, params: &[TypedName], binding: &[String]) -> Fact {
    let args = atom
        .terms
        .iter()
        .map(|t| match t {
            Term::Variable(v) => {
                let i = params
                    .iter()
                    .position(|p| &p.name == v)
                    .expect("schema variables are checked against parameters at parse time");
                binding[i].clone()
            }
            Term::Constant(c) => c.clone(),
        })
        .collect();
    Fact {
        predicate: atom.predicate.clone(),
        args,
    }
}
