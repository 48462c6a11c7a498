//! Abstract syntax for the supported PDDL subset.
//!
//! The `Display` impls print canonical lower-case PDDL; parsing that output
//! yields an identical AST (round-trip invariant, checked by tests).

use std::fmt;

/// A name paired with its declared type (`?x - cell`, `box1 - thing`, or a
/// type with its supertype). Untyped declarations default to `object`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedName {
            name: name.into(),
            ty: ty.into(),
        }
    }
}

impl fmt::Display for TypedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} - {}", self.name, self.ty)
    }
}

/// A predicate declaration: name plus typed parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypedName>,
}

impl fmt::Display for PredicateDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for p in &self.params {
            write!(f, " {}", p)?;
        }
        write!(f, ")")
    }
}

/// One argument position of an atom: a schema variable or an object name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Variable(String),
    Constant(String),
}

impl Term {
    pub fn text(&self) -> &str {
        match self {
            Term::Variable(v) | Term::Constant(v) => v,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.text())
    }
}

/// A (possibly schematic) atom `(predicate term…)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub predicate: String,
    pub terms: Vec<Term>,
}

impl Atom {
    pub fn is_ground(&self) -> bool {
        self.terms.iter().all(|t| matches!(t, Term::Constant(_)))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for t in &self.terms {
            write!(f, " {}", t)?;
        }
        write!(f, ")")
    }
}

/// An action schema: typed parameters, positive precondition conjunction,
/// and add/delete effect lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<TypedName>,
    pub precondition: Vec<Atom>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

impl fmt::Display for ActionSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "  (:action {}\n    :parameters (", self.name)?;
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", p)?;
        }
        write!(f, ")\n    :precondition (and")?;
        for a in &self.precondition {
            write!(f, " {}", a)?;
        }
        write!(f, ")\n    :effect (and")?;
        for a in &self.add {
            write!(f, " {}", a)?;
        }
        for a in &self.del {
            write!(f, " (not {})", a)?;
        }
        write!(f, "))")
    }
}

/// A parsed domain: types, constants, predicates, and action schemas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainAst {
    pub name: String,
    /// Declared types with their supertypes; `object` is the implicit root
    /// and never appears as a declared name here.
    pub types: Vec<TypedName>,
    pub constants: Vec<TypedName>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
}

impl fmt::Display for DomainAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        writeln!(f, "  (:requirements :strips :typing)")?;
        if !self.types.is_empty() {
            write!(f, "  (:types")?;
            for t in &self.types {
                write!(f, " {}", t)?;
            }
            writeln!(f, ")")?;
        }
        if !self.constants.is_empty() {
            write!(f, "  (:constants")?;
            for c in &self.constants {
                write!(f, " {}", c)?;
            }
            writeln!(f, ")")?;
        }
        if !self.predicates.is_empty() {
            write!(f, "  (:predicates")?;
            for p in &self.predicates {
                write!(f, " {}", p)?;
            }
            writeln!(f, ")")?;
        }
        for a in &self.actions {
            writeln!(f, "{}", a)?;
        }
        write!(f, ")")
    }
}

/// A parsed problem: objects, initial facts, and a goal conjunction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemAst {
    pub name: String,
    pub domain: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<Atom>,
    pub goal: Vec<Atom>,
}

impl fmt::Display for ProblemAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (problem {})", self.name)?;
        writeln!(f, "  (:domain {})", self.domain)?;
        if !self.objects.is_empty() {
            write!(f, "  (:objects")?;
            for o in &self.objects {
                write!(f, " {}", o)?;
            }
            writeln!(f, ")")?;
        }
        write!(f, "  (:init")?;
        for a in &self.init {
            write!(f, " {}", a)?;
        }
        writeln!(f, ")")?;
        write!(f, "  (:goal (and")?;
        for a in &self.goal {
            write!(f, " {}", a)?;
        }
        write!(f, ")))")
    }
}
