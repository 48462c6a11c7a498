//! The on-disk benchmark format: one directory per recognition problem.
//!
//! Layout: `domain.pddl`, `template.pddl` (a problem whose goal is either a
//! `<HYPOTHESIS>` placeholder or any well-formed goal that will be ignored),
//! `hyps.dat` (one candidate goal per line as comma-separated facts),
//! `real_hyp.dat` (one line equal to one of the hypotheses), `obs.dat` (one
//! grounded action `(name arg …)` per line), and optional `meta.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::{DomainAst, ProblemAst};
use super::ground::{ground_with_extra_facts, GroundError, DEFAULT_GROUND_CAP};
use super::lexer::{read, SExp};
use super::parser::{parse_domain, parse_problem};
use super::PddlError;
use crate::strips::{ActionId, Fact, GroundedProblem, State};

/// Provenance of a generated benchmark problem, stored as `meta.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleMeta {
    /// Seed used to mutate goals and plan observations.
    pub seed: u64,
    /// Dataset variant tag, e.g. `random`, `longest`, `shortest`, `original`.
    pub variant: String,
    /// Goal sizes of the bundle this one was derived from.
    pub original_goal_sizes: Vec<usize>,
}

/// A loaded recognition problem: the grounded domain, the candidate goals,
/// which one is true, and the observed action sequence.
#[derive(Debug, Clone)]
pub struct RecognitionBundle {
    /// Directory name, used for reporting.
    pub name: String,
    /// Grounded problem; its goal slot holds the true hypothesis.
    pub problem: GroundedProblem,
    /// Candidate goals, in `hyps.dat` order.
    pub goals: Vec<State>,
    /// Index into `goals` of the true hypothesis.
    pub true_goal: usize,
    /// Observations resolved to grounded actions, in `obs.dat` order.
    pub observations: Vec<ActionId>,
    pub meta: Option<BundleMeta>,
}

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing {file}")]
    Pddl {
        file: String,
        #[source]
        source: PddlError,
    },
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error("hyps.dat line {line}: {message}")]
    Hypothesis { line: usize, message: String },
    #[error("real_hyp.dat: {message}")]
    RealHyp { message: String },
    #[error("real_hyp.dat does not match any hyps.dat line")]
    RealHypNotInHyps,
    #[error("obs.dat line {line}: {message}")]
    Observation { line: usize, message: String },
    #[error("meta.json: {message}")]
    Meta { message: String },
}

/// Load a bundle directory with the default grounding cap.
pub fn load_bundle(dir: impl AsRef<Path>) -> Result<RecognitionBundle, BundleError> {
    load_bundle_with_cap(dir, DEFAULT_GROUND_CAP)
}

/// Load a bundle directory with an explicit grounding cap.
pub fn load_bundle_with_cap(
    dir: impl AsRef<Path>,
    cap: u64,
) -> Result<RecognitionBundle, BundleError> {
    let dir = dir.as_ref();
    let read_file = |name: &str| -> Result<String, BundleError> {
        fs::read_to_string(dir.join(name)).map_err(|source| BundleError::Io {
            path: dir.join(name),
            source,
        })
    };

    let domain_text = read_file("domain.pddl")?;
    let domain = parse_domain(&domain_text).map_err(|source| BundleError::Pddl {
        file: "domain.pddl".to_string(),
        source,
    })?;
    let template_text = substitute_placeholder(&read_file("template.pddl")?);
    let template = parse_problem(&template_text, &domain).map_err(|source| BundleError::Pddl {
        file: "template.pddl".to_string(),
        source,
    })?;

    let hyps_text = read_file("hyps.dat")?;
    let mut hypotheses: Vec<Vec<Fact>> = Vec::new();
    for (line_no, line) in numbered_lines(&hyps_text) {
        let facts = parse_hypothesis_line(line, &domain, &template)
            .map_err(|message| BundleError::Hypothesis { line: line_no, message })?;
        hypotheses.push(facts);
    }

    let real_text = read_file("real_hyp.dat")?;
    let mut real_lines = numbered_lines(&real_text);
    let (_, real_line) = real_lines.next().ok_or_else(|| BundleError::RealHyp {
        message: "file is empty".to_string(),
    })?;
    if real_lines.next().is_some() {
        return Err(BundleError::RealHyp {
            message: "expected exactly one hypothesis line".to_string(),
        });
    }
    let real_facts = parse_hypothesis_line(real_line, &domain, &template)
        .map_err(|message| BundleError::RealHyp { message })?;

    let as_set = |facts: &[Fact]| -> std::collections::BTreeSet<Fact> {
        facts.iter().cloned().collect()
    };
    let real_set = as_set(&real_facts);
    let true_goal = hypotheses
        .iter()
        .position(|h| as_set(h) == real_set)
        .ok_or(BundleError::RealHypNotInHyps)?;

    let extra: Vec<Fact> = hypotheses.iter().flatten().cloned().collect();
    let skeleton = ground_with_extra_facts(&domain, &template, &extra, cap)?;
    let goals: Vec<State> = hypotheses
        .iter()
        .map(|facts| {
            let ids = facts.iter().map(|f| {
                skeleton
                    .fact_id(f)
                    .expect("hypothesis facts are force-retained in the fact universe")
            });
            State::from_ids(skeleton.num_facts(), ids)
        })
        .collect();
    let problem = skeleton.with_goal(goals[true_goal].clone());

    let obs_text = read_file("obs.dat")?;
    let mut observations = Vec::new();
    for (line_no, line) in numbered_lines(&obs_text) {
        let (name, args) =
            parse_action_line(line).map_err(|message| BundleError::Observation {
                line: line_no,
                message,
            })?;
        let id = problem
            .find_action(&name, &args)
            .ok_or_else(|| BundleError::Observation {
                line: line_no,
                message: format!("no grounded action matches `{}`", line.trim()),
            })?;
        observations.push(id);
    }

    let meta_path = dir.join("meta.json");
    let meta = match fs::read_to_string(&meta_path) {
        Ok(text) => Some(serde_json::from_str(&text).map_err(|e| BundleError::Meta {
            message: e.to_string(),
        })?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(source) => {
            return Err(BundleError::Io {
                path: meta_path,
                source,
            })
        }
    };

    let name = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    Ok(RecognitionBundle {
        name,
        problem,
        goals,
        true_goal,
        observations,
        meta,
    })
}

/// Write a bundle directory. `hyps` holds one comma-separated goal line per
/// candidate; `observations` one `(name arg …)` line per step.
pub fn write_bundle(
    dir: impl AsRef<Path>,
    domain_text: &str,
    template_text: &str,
    hyps: &[String],
    real_hyp: &str,
    observations: &[String],
    meta: Option<&BundleMeta>,
) -> Result<(), BundleError> {
    let dir = dir.as_ref();
    let write = |name: &str, content: String| -> Result<(), BundleError> {
        fs::write(dir.join(name), content).map_err(|source| BundleError::Io {
            path: dir.join(name),
            source,
        })
    };
    fs::create_dir_all(dir).map_err(|source| BundleError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write("domain.pddl", domain_text.to_string())?;
    write("template.pddl", template_text.to_string())?;
    write("hyps.dat", format!("{}\n", hyps.join("\n")))?;
    write("real_hyp.dat", format!("{}\n", real_hyp))?;
    write(
        "obs.dat",
        if observations.is_empty() {
            String::new()
        } else {
            format!("{}\n", observations.join("\n"))
        },
    )?;
    if let Some(meta) = meta {
        let text = serde_json::to_string_pretty(meta).expect("meta serializes");
        write("meta.json", format!("{}\n", text))?;
    }
    Ok(())
}

/// Non-blank lines with 1-based line numbers.
fn numbered_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Replace every `<HYPOTHESIS>` (any case) with an empty goal conjunction.
fn substitute_placeholder(text: &str) -> String {
    const NEEDLE: &[u8] = b"<hypothesis>";
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest
        .as_bytes()
        .windows(NEEDLE.len())
        .position(|w| w.eq_ignore_ascii_case(NEEDLE))
    {
        out.push_str(&rest[..pos]);
        out.push_str("(and )");
        rest = &rest[pos + NEEDLE.len()..];
    }
    out.push_str(rest);
    out
}

/// Parse one `(name arg …)` s-expression from a .dat line.
fn parse_ground_sexp(line: &str) -> Result<(String, Vec<String>), String> {
    let sexps = read(line).map_err(|e| format!("cannot parse `{}`: {}", line.trim(), e))?;
    let items = match sexps.as_slice() {
        [single] => single
            .as_list()
            .ok_or_else(|| format!("`{}` is not a parenthesized expression", line.trim()))?,
        _ => return Err(format!("expected exactly one `(…)` in `{}`", line.trim())),
    };
    let mut symbols = Vec::with_capacity(items.len());
    for item in items {
        match item {
            SExp::Sym { text, .. } => symbols.push(text.clone()),
            SExp::List { .. } => {
                return Err(format!("nested parentheses in `{}`", line.trim()))
            }
        }
    }
    let mut it = symbols.into_iter();
    let name = it
        .next()
        .ok_or_else(|| format!("empty expression in `{}`", line.trim()))?;
    Ok((name, it.collect()))
}

fn parse_action_line(line: &str) -> Result<(String, Vec<String>), String> {
    parse_ground_sexp(line)
}

/// Parse a comma-separated list of facts and validate each against the
/// domain's declarations and the problem's objects.
fn parse_hypothesis_line(
    line: &str,
    domain: &DomainAst,
    problem: &ProblemAst,
) -> Result<Vec<Fact>, String> {
    let mut facts = Vec::new();
    for fragment in line.split(',') {
        if fragment.trim().is_empty() {
            return Err(format!("empty fact in `{}`", line.trim()));
        }
        let (predicate, args) = parse_ground_sexp(fragment)?;
        let fact = Fact { predicate, args };
        validate_fact(&fact, domain, problem)?;
        facts.push(fact);
    }
    Ok(facts)
}

fn validate_fact(fact: &Fact, domain: &DomainAst, problem: &ProblemAst) -> Result<(), String> {
    let decl = domain
        .predicates
        .iter()
        .find(|p| p.name == fact.predicate)
        .ok_or_else(|| format!("undeclared predicate `{}`", fact.predicate))?;
    if decl.params.len() != fact.args.len() {
        return Err(format!(
            "predicate `{}` takes {} arguments, found {}",
            fact.predicate,
            decl.params.len(),
            fact.args.len()
        ));
    }
    for arg in &fact.args {
        let known = problem.objects.iter().any(|o| &o.name == arg)
            || domain.constants.iter().any(|c| &c.name == arg);
        if !known {
            return Err(format!("unknown object `{}`", arg));
        }
    }
    Ok(())
}
