//! Online evaluation protocol: reveal a λ-fraction of each observation
//! sequence, run recognition, and aggregate exact precision values into
//! CSV rows and gnuplot-ready curves.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::landmarks::{extract, Extractor, LandmarkSet};
use crate::pddl::{load_bundle_with_cap, BundleError, RecognitionBundle};
use crate::recognition::{score_with_sets, Heuristic, RecognitionConfig};
use crate::score::{ratio, zero, Score};
use crate::strips::ActionId;

/// A recognition problem admitted to online evaluation: at least one
/// observation, so every λ-prefix is well defined.
#[derive(Debug, Clone)]
pub struct OnlineProblem {
    bundle: RecognitionBundle,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{bundle}: no observations to evaluate (need at least one)")]
    EmptyObservations { bundle: String },
    #[error("loading {path}")]
    Bundle {
        path: PathBuf,
        #[source]
        source: BundleError,
    },
}

impl OnlineProblem {
    pub fn new(bundle: RecognitionBundle) -> Result<Self, EvalError> {
        if bundle.observations.is_empty() {
            return Err(EvalError::EmptyObservations {
                bundle: bundle.name.clone(),
            });
        }
        Ok(OnlineProblem { bundle })
    }

    pub fn bundle(&self) -> &RecognitionBundle {
        &self.bundle
    }

    /// The full observation count T.
    pub fn horizon(&self) -> usize {
        self.bundle.observations.len()
    }

    /// The dataset variant tag from metadata; unmutated bundles count as
    /// `original`.
    pub fn variant(&self) -> &str {
        self.bundle
            .meta
            .as_ref()
            .map_or("original", |m| m.variant.as_str())
    }

    pub fn domain(&self) -> &str {
        self.bundle.problem.domain_name()
    }
}

/// Load bundle directories into online problems, attaching the offending
/// path to any error.
pub fn load_online_problems(
    dirs: &[PathBuf],
    ground_cap: u64,
) -> Result<Vec<OnlineProblem>, EvalError> {
    dirs.iter()
        .map(|dir| {
            let bundle = load_bundle_with_cap(dir, ground_cap).map_err(|source| {
                EvalError::Bundle {
                    path: dir.clone(),
                    source,
                }
            })?;
            OnlineProblem::new(bundle)
        })
        .collect()
}

/// An observed fraction of the plan, kept as an exact rational so prefix
/// lengths floor correctly (`0.3` is exactly 3/10, not a float near it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Lambda(Ratio<u64>);

impl Lambda {
    pub fn new(numer: u64, denom: u64) -> Result<Self, String> {
        if denom == 0 {
            return Err("lambda denominator must be nonzero".to_string());
        }
        if numer > denom {
            return Err(format!("lambda {}/{} is above 1", numer, denom));
        }
        Ok(Lambda(Ratio::new(numer, denom)))
    }

    /// The standard evaluation grid 0.1, 0.2, …, 1.0.
    pub fn grid() -> Vec<Lambda> {
        (1..=10).map(|k| Lambda(Ratio::new(k, 10))).collect()
    }

    /// ⌊t·λ⌋ without floating-point error.
    pub fn floor_of(self, t: usize) -> usize {
        let scaled = t as u128 * *self.0.numer() as u128 / *self.0.denom() as u128;
        scaled as usize
    }

    pub fn as_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.as_f64())
    }
}

impl FromStr for Lambda {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("`{}` is not a decimal in [0, 1]", s);
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || frac_part.len() > 18
        {
            return Err(bad());
        }
        let int: u64 = if int_part.is_empty() {
            0
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let denom = 10u64.pow(frac_part.len() as u32);
        let frac: u64 = if frac_part.is_empty() {
            0
        } else {
            frac_part.parse().map_err(|_| bad())?
        };
        let numer = int
            .checked_mul(denom)
            .and_then(|v| v.checked_add(frac))
            .ok_or_else(bad)?;
        Lambda::new(numer, denom)
    }
}

/// The first ⌊T·λ⌋ observations of the problem; may be empty.
pub fn observation_prefix(problem: &OnlineProblem, lambda: Lambda) -> &[ActionId] {
    let len = lambda.floor_of(problem.horizon());
    &problem.bundle.observations[..len]
}

/// One aggregated result: mean precision for a configuration at one λ over
/// all problems sharing a domain and variant.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationRow {
    pub domain: String,
    pub variant: String,
    pub extractor: Extractor,
    pub heuristic: Heuristic,
    pub include_init: bool,
    pub lambda: Lambda,
    pub precision: Score,
    pub n_problems: usize,
}

/// The per-problem contribution to precision: 1/|recognized| when the true
/// goal is among the recognized set, else 0.
fn problem_term(
    problem: &OnlineProblem,
    sets: &[LandmarkSet],
    cfg: &RecognitionConfig,
    lambda: Lambda,
) -> Score {
    let prefix = observation_prefix(problem, lambda);
    let result = score_with_sets(
        &problem.bundle.problem,
        &problem.bundle.goals,
        sets,
        prefix,
        cfg,
    );
    if result.is_recognized(problem.bundle.true_goal) {
        ratio(1, result.recognized.len() as u64)
    } else {
        zero()
    }
}

fn extract_sets(problem: &OnlineProblem, extractor: Extractor) -> Vec<LandmarkSet> {
    problem
        .bundle
        .goals
        .iter()
        .map(|g| extract(&problem.bundle.problem, g, extractor))
        .collect()
}

/// Mean precision of a configuration over a problem set at one λ.
pub fn precision(lambda: Lambda, problems: &[OnlineProblem], cfg: &RecognitionConfig) -> Score {
    assert!(!problems.is_empty(), "precision over an empty problem set");
    let sum: Score = problems
        .iter()
        .map(|p| {
            let sets = extract_sets(p, cfg.extractor);
            problem_term(p, &sets, cfg, lambda)
        })
        .sum();
    sum / ratio(problems.len() as u64, 1)
}

/// Evaluate every configuration at every λ, grouping problems by (domain,
/// variant). Landmark sets are extracted once per (problem, extractor);
/// problems are processed in parallel; rows come back in canonical sorted
/// order regardless of scheduling.
pub fn evaluate(
    problems: &[OnlineProblem],
    configs: &[RecognitionConfig],
    lambdas: &[Lambda],
) -> Vec<EvaluationRow> {
    let mut extractors: Vec<Extractor> = Vec::new();
    for cfg in configs {
        if !extractors.contains(&cfg.extractor) {
            extractors.push(cfg.extractor);
        }
    }

    // extraction dominates cost: do each (problem, extractor) pair once
    let tasks: Vec<(usize, Extractor)> = (0..problems.len())
        .flat_map(|pi| extractors.iter().map(move |&e| (pi, e)))
        .collect();
    let extracted: Vec<Vec<LandmarkSet>> = tasks
        .par_iter()
        .map(|&(pi, e)| extract_sets(&problems[pi], e))
        .collect();
    let sets_for = |pi: usize, e: Extractor| -> &Vec<LandmarkSet> {
        let slot = tasks
            .iter()
            .position(|&(tpi, te)| tpi == pi && te == e)
            .expect("every (problem, extractor) pair was scheduled");
        &extracted[slot]
    };

    let terms: Vec<Vec<Score>> = problems
        .par_iter()
        .enumerate()
        .map(|(pi, problem)| {
            let mut row = Vec::with_capacity(configs.len() * lambdas.len());
            for cfg in configs {
                let sets = sets_for(pi, cfg.extractor);
                for &lambda in lambdas {
                    row.push(problem_term(problem, sets, cfg, lambda));
                }
            }
            row
        })
        .collect();

    let mut groups: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (pi, problem) in problems.iter().enumerate() {
        groups
            .entry((problem.domain().to_string(), problem.variant().to_string()))
            .or_default()
            .push(pi);
    }

    let mut rows = Vec::new();
    for ((domain, variant), members) in &groups {
        for (ci, cfg) in configs.iter().enumerate() {
            for (li, &lambda) in lambdas.iter().enumerate() {
                let sum: Score = members.iter().map(|&pi| terms[pi][ci * lambdas.len() + li].clone()).sum();
                rows.push(EvaluationRow {
                    domain: domain.clone(),
                    variant: variant.clone(),
                    extractor: cfg.extractor,
                    heuristic: cfg.heuristic,
                    include_init: cfg.include_initial_state_landmarks,
                    lambda,
                    precision: sum / ratio(members.len() as u64, 1),
                    n_problems: members.len(),
                });
            }
        }
    }
    rows.sort_by(|a, b| row_key(a).cmp(&row_key(b)));
    rows
}

fn row_key(r: &EvaluationRow) -> (String, String, &'static str, &'static str, bool, Lambda) {
    (
        r.domain.clone(),
        r.variant.clone(),
        r.extractor.as_str(),
        r.heuristic.as_str(),
        r.include_init,
        r.lambda,
    )
}

/// Write rows as CSV with the fixed column set; numeric cells use six
/// fractional digits.
pub fn write_csv(rows: &[EvaluationRow], out: &mut impl Write) -> io::Result<()> {
    writeln!(
        out,
        "domain,variant,extractor,heuristic,include_init,lambda,precision,n_problems"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{:.6},{}",
            r.domain,
            r.variant,
            r.extractor.as_str(),
            r.heuristic.as_str(),
            r.include_init,
            r.lambda,
            crate::score::to_f64(&r.precision),
            r.n_problems
        )?;
    }
    Ok(())
}

/// Render gnuplot-ready curves: one file per (variant, heuristic), one line
/// per λ, one column per (extractor, include_init) series, pooled across
/// domains weighted by problem count. Returns (file name, contents) pairs.
pub fn plot_data(rows: &[EvaluationRow]) -> Vec<(String, String)> {
    let mut by_file: BTreeMap<(String, &'static str), Vec<&EvaluationRow>> = BTreeMap::new();
    for r in rows {
        by_file
            .entry((r.variant.clone(), r.heuristic.as_str()))
            .or_default()
            .push(r);
    }

    let mut files = Vec::new();
    for ((variant, heuristic), rows) in &by_file {
        let mut series: Vec<(&'static str, bool)> = Vec::new();
        let mut lambdas: Vec<Lambda> = Vec::new();
        for r in rows {
            let s = (r.extractor.as_str(), r.include_init);
            if !series.contains(&s) {
                series.push(s);
            }
            if !lambdas.contains(&r.lambda) {
                lambdas.push(r.lambda);
            }
        }
        series.sort();
        lambdas.sort();

        let mut text = format!(
            "# mean recognition precision, {} variant, {} heuristic\n# lambda",
            variant, heuristic
        );
        for (extractor, include_init) in &series {
            text.push_str(&format!(
                " {}{}",
                extractor,
                if *include_init { "+init" } else { "" }
            ));
        }
        text.push('\n');
        for &lambda in &lambdas {
            text.push_str(&lambda.to_string());
            for &(extractor, include_init) in &series {
                let cell: Vec<&&EvaluationRow> = rows
                    .iter()
                    .filter(|r| {
                        r.lambda == lambda
                            && r.extractor.as_str() == extractor
                            && r.include_init == include_init
                    })
                    .collect();
                let total: usize = cell.iter().map(|r| r.n_problems).sum();
                if total == 0 {
                    text.push_str(" nan");
                    continue;
                }
                let weighted: Score = cell
                    .iter()
                    .map(|r| r.precision.clone() * ratio(r.n_problems as u64, 1))
                    .fold(Score::zero(), |a, b| a + b);
                let pooled = weighted / ratio(total as u64, 1);
                text.push_str(&format!(" {:.6}", crate::score::to_f64(&pooled)));
            }
            text.push('\n');
        }
        files.push((format!("precision_{}_{}.dat", variant, heuristic), text));
    }
    files
}
