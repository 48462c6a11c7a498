//! Recursive-descent parsers for the domain and problem grammars, with
//! semantic checking (declared predicates, arities, known objects/types).

use std::collections::{BTreeMap, BTreeSet};

use super::ast::{ActionSchema, Atom, DomainAst, PredicateDecl, ProblemAst, Term, TypedName};
use super::lexer::{read, SExp};
use super::PddlError;

fn syntax(pos: (usize, usize), message: impl Into<String>) -> PddlError {
    PddlError::Syntax {
        line: pos.0,
        col: pos.1,
        message: message.into(),
    }
}

fn semantic(pos: (usize, usize), message: impl Into<String>) -> PddlError {
    PddlError::Semantic {
        line: pos.0,
        col: pos.1,
        message: message.into(),
    }
}

fn unsupported(pos: (usize, usize), feature: impl Into<String>) -> PddlError {
    PddlError::UnsupportedFeature {
        line: pos.0,
        col: pos.1,
        feature: feature.into(),
    }
}

fn expect_list<'a>(e: &'a SExp, what: &str) -> Result<&'a [SExp], PddlError> {
    e.as_list()
        .ok_or_else(|| syntax(e.pos(), format!("expected {}, found {}", what, e.describe())))
}

fn expect_sym<'a>(e: &'a SExp, what: &str) -> Result<&'a str, PddlError> {
    e.as_sym()
        .ok_or_else(|| syntax(e.pos(), format!("expected {}, found {}", what, e.describe())))
}

/// The unsupported-feature name for a reserved construct head, if any.
fn reserved_feature(head: &str) -> Option<&'static str> {
    match head {
        "or" => Some("disjunctions `(or …)`"),
        "imply" => Some("implications `(imply …)`"),
        "forall" | "exists" => Some("quantifiers `(forall …)`/`(exists …)`"),
        "when" => Some("conditional effects `(when …)`"),
        "=" => Some("equality `(= …)`"),
        "increase" | "decrease" | "assign" | "scale-up" | "scale-down" => {
            Some("numeric fluents")
        }
        _ => None,
    }
}

fn is_reserved(head: &str) -> bool {
    head == "and" || head == "not" || reserved_feature(head).is_some()
}

/// Parse the single top-level `(define …)` form of a PDDL file.
fn read_define(text: &str, kind: &str) -> Result<Vec<SExp>, PddlError> {
    let mut top = read(text)?;
    if top.is_empty() {
        return Err(syntax((1, 1), format!("expected a (define ({} …)) form", kind)));
    }
    if top.len() > 1 {
        return Err(syntax(
            top[1].pos(),
            "more than one top-level form in file",
        ));
    }
    let form = top.pop().unwrap();
    let pos = form.pos();
    let items = match form {
        SExp::List { items, .. } => items,
        SExp::Sym { .. } => {
            return Err(syntax(pos, format!("expected a (define ({} …)) form", kind)))
        }
    };
    match items.first().and_then(|e| e.as_sym()) {
        Some("define") => Ok(items),
        _ => Err(syntax(pos, "expected `define`")),
    }
}

/// Parse the `(domain name)` / `(problem name)` header after `define`.
fn parse_header<'a>(items: &'a [SExp], kind: &str) -> Result<&'a str, PddlError> {
    let header = items
        .get(1)
        .ok_or_else(|| syntax(items[0].pos(), format!("missing ({} name)", kind)))?;
    let parts = expect_list(header, &format!("({} name)", kind))?;
    match parts {
        [k, name] if k.as_sym() == Some(kind) => {
            let n = expect_sym(name, "a name")?;
            check_plain_name(name, n, kind)?;
            Ok(n)
        }
        _ => Err(syntax(header.pos(), format!("expected ({} name)", kind))),
    }
}

/// Names of things (types, objects, predicates, actions, domains) must not
/// look like variables, keywords, or punctuation.
fn check_plain_name(e: &SExp, name: &str, what: &str) -> Result<(), PddlError> {
    if name.starts_with('?') || name.starts_with(':') || name == "-" || is_reserved(name) {
        return Err(syntax(
            e.pos(),
            format!("`{}` is not a valid {} name", name, what),
        ));
    }
    Ok(())
}

enum NameKind {
    /// `?x` style schema/predicate parameters.
    Variable,
    /// Plain object/constant/type names.
    Name,
}

/// Parse a PDDL typed list: `name… [- type] name… [- type] …`. Names
/// without a trailing type default to `object`.
fn parse_typed_list(
    items: &[SExp],
    kind: NameKind,
    what: &str,
) -> Result<Vec<TypedName>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        if let Some(list) = item.as_list() {
            if list.first().and_then(|e| e.as_sym()) == Some("either") {
                return Err(unsupported(item.pos(), "`(either …)` types"));
            }
            return Err(syntax(item.pos(), format!("expected {}, found a list", what)));
        }
        let sym = expect_sym(item, what)?;
        if sym == "-" {
            if pending.is_empty() {
                return Err(syntax(item.pos(), "`-` with no names before it"));
            }
            let ty_e = items
                .get(i + 1)
                .ok_or_else(|| syntax(item.pos(), "`-` with no type after it"))?;
            if let Some(list) = ty_e.as_list() {
                if list.first().and_then(|e| e.as_sym()) == Some("either") {
                    return Err(unsupported(ty_e.pos(), "`(either …)` types"));
                }
            }
            let ty = expect_sym(ty_e, "a type name")?;
            check_plain_name(ty_e, ty, "type")?;
            for name in pending.drain(..) {
                out.push(TypedName::new(name, ty));
            }
            i += 2;
        } else {
            match kind {
                NameKind::Variable => {
                    if !sym.starts_with('?') || sym.len() < 2 {
                        return Err(syntax(
                            item.pos(),
                            format!("expected a `?variable`, found `{}`", sym),
                        ));
                    }
                }
                NameKind::Name => check_plain_name(item, sym, what)?,
            }
            pending.push(sym.to_string());
            i += 1;
        }
    }
    for name in pending.drain(..) {
        out.push(TypedName::new(name, "object"));
    }
    Ok(out)
}

/// Parse an atom `(predicate term…)`; reserved heads are rejected with the
/// error for the construct they introduce.
fn parse_atom(e: &SExp, context: &str) -> Result<Atom, PddlError> {
    let items = expect_list(e, &format!("an atom in {}", context))?;
    let head_e = items
        .first()
        .ok_or_else(|| syntax(e.pos(), format!("empty atom in {}", context)))?;
    let head = expect_sym(head_e, "a predicate name")?;
    if let Some(feature) = reserved_feature(head) {
        return Err(unsupported(head_e.pos(), feature));
    }
    if head == "and" {
        return Err(syntax(head_e.pos(), format!("nested `(and …)` in {}", context)));
    }
    if head == "not" {
        return Err(unsupported(
            head_e.pos(),
            format!("negations `(not …)` in {}", context),
        ));
    }
    check_plain_name(head_e, head, "predicate")?;
    let mut terms = Vec::new();
    for t in &items[1..] {
        let sym = expect_sym(t, "an atom argument")?;
        if sym == "-" || sym.starts_with(':') {
            return Err(syntax(t.pos(), format!("`{}` is not a valid argument", sym)));
        }
        if let Some(var) = sym.strip_prefix('?') {
            if var.is_empty() {
                return Err(syntax(t.pos(), "`?` is not a valid variable"));
            }
            terms.push(Term::Variable(sym.to_string()));
        } else {
            terms.push(Term::Constant(sym.to_string()));
        }
    }
    Ok(Atom {
        predicate: head.to_string(),
        terms,
    })
}

/// Parse a positive conjunction: a single atom, `(and atom…)`, or `()`.
fn parse_conjunction(e: &SExp, context: &str) -> Result<Vec<Atom>, PddlError> {
    let items = expect_list(e, &format!("a conjunction in {}", context))?;
    match items.first() {
        None => Ok(Vec::new()),
        Some(head) if head.as_sym() == Some("and") => items[1..]
            .iter()
            .map(|a| parse_atom(a, context))
            .collect(),
        Some(_) => Ok(vec![parse_atom(e, context)?]),
    }
}

/// Parse an effect: a single literal or `(and literal…)`, where a literal
/// is an atom (add) or `(not atom)` (delete).
fn parse_effect(e: &SExp) -> Result<(Vec<Atom>, Vec<Atom>), PddlError> {
    let mut add = Vec::new();
    let mut del = Vec::new();
    let items = expect_list(e, "an effect")?;
    let literals: Vec<&SExp> = match items.first() {
        None => Vec::new(),
        Some(head) if head.as_sym() == Some("and") => items[1..].iter().collect(),
        Some(_) => vec![e],
    };
    for lit in literals {
        let parts = expect_list(lit, "an effect literal")?;
        if parts.first().and_then(|e| e.as_sym()) == Some("not") {
            if parts.len() != 2 {
                return Err(syntax(lit.pos(), "`(not …)` takes exactly one atom"));
            }
            del.push(parse_atom(&parts[1], "an effect")?);
        } else {
            add.push(parse_atom(lit, "an effect")?);
        }
    }
    Ok((add, del))
}

/// Declared-type table: name → supertype, with `object` as implicit root.
struct TypeTable {
    parents: BTreeMap<String, String>,
}

impl TypeTable {
    fn new(types: &[TypedName]) -> Self {
        TypeTable {
            parents: types
                .iter()
                .map(|t| (t.name.clone(), t.ty.clone()))
                .collect(),
        }
    }

    fn is_declared(&self, name: &str) -> bool {
        name == "object" || self.parents.contains_key(name)
    }
}

fn check_typed_list_types(
    list: &[TypedName],
    table: &TypeTable,
    section: &SExp,
    what: &str,
) -> Result<(), PddlError> {
    for item in list {
        if !table.is_declared(&item.ty) {
            return Err(semantic(
                section.pos(),
                format!("unknown type `{}` for {} `{}`", item.ty, what, item.name),
            ));
        }
    }
    Ok(())
}

fn check_no_duplicates(list: &[TypedName], section: &SExp, what: &str) -> Result<(), PddlError> {
    let mut seen = BTreeSet::new();
    for item in list {
        if !seen.insert(item.name.as_str()) {
            return Err(semantic(
                section.pos(),
                format!("duplicate {} `{}`", what, item.name),
            ));
        }
    }
    Ok(())
}

/// Parse and semantically check a PDDL domain.
pub fn parse_domain(text: &str) -> Result<DomainAst, PddlError> {
    let items = read_define(text, "domain")?;
    let name = parse_header(&items, "domain")?.to_string();

    let mut types_secs: Vec<&SExp> = Vec::new();
    let mut constants_secs: Vec<&SExp> = Vec::new();
    let mut predicates_secs: Vec<&SExp> = Vec::new();
    let mut action_secs: Vec<&SExp> = Vec::new();
    for section in &items[2..] {
        let parts = expect_list(section, "a domain section")?;
        let head_e = parts
            .first()
            .ok_or_else(|| syntax(section.pos(), "empty domain section"))?;
        let head = expect_sym(head_e, "a section keyword")?;
        match head {
            ":requirements" => {
                for req in &parts[1..] {
                    let r = expect_sym(req, "a requirement flag")?;
                    if r != ":strips" && r != ":typing" {
                        return Err(unsupported(req.pos(), format!("requirement `{}`", r)));
                    }
                }
            }
            ":types" => types_secs.push(section),
            ":constants" => constants_secs.push(section),
            ":predicates" => predicates_secs.push(section),
            ":action" => action_secs.push(section),
            _ if head.starts_with(':') => {
                return Err(unsupported(head_e.pos(), format!("section `{}`", head)))
            }
            _ => {
                return Err(syntax(
                    head_e.pos(),
                    format!("expected a `:section` keyword, found `{}`", head),
                ))
            }
        }
    }

    let mut types = Vec::new();
    for section in &types_secs {
        let parts = section.as_list().unwrap();
        types.extend(parse_typed_list(&parts[1..], NameKind::Name, "a type name")?);
    }
    if let Some(section) = types_secs.first() {
        check_no_duplicates(&types, section, "type")?;
        if types.iter().any(|t| t.name == "object") {
            return Err(semantic(
                section.pos(),
                "cannot redeclare the built-in type `object`",
            ));
        }
    }
    let table = TypeTable::new(&types);
    if let Some(section) = types_secs.first() {
        check_typed_list_types(&types, &table, section, "type")?;
        for t in &types {
            let mut cursor = t.ty.as_str();
            let mut steps = 0;
            while cursor != "object" {
                cursor = table.parents[cursor].as_str();
                steps += 1;
                if steps > types.len() {
                    return Err(semantic(
                        section.pos(),
                        format!("type hierarchy cycle involving `{}`", t.name),
                    ));
                }
            }
        }
    }

    let mut constants = Vec::new();
    for section in &constants_secs {
        let parts = section.as_list().unwrap();
        let list = parse_typed_list(&parts[1..], NameKind::Name, "a constant name")?;
        check_typed_list_types(&list, &table, section, "constant")?;
        constants.extend(list);
    }
    if let Some(section) = constants_secs.first() {
        check_no_duplicates(&constants, section, "constant")?;
    }

    let mut predicates: Vec<PredicateDecl> = Vec::new();
    for section in &predicates_secs {
        let parts = section.as_list().unwrap();
        for decl in &parts[1..] {
            let d = expect_list(decl, "a predicate declaration")?;
            let head_e = d
                .first()
                .ok_or_else(|| syntax(decl.pos(), "empty predicate declaration"))?;
            let pname = expect_sym(head_e, "a predicate name")?;
            check_plain_name(head_e, pname, "predicate")?;
            if predicates.iter().any(|p| p.name == pname) {
                return Err(semantic(
                    head_e.pos(),
                    format!("duplicate predicate `{}`", pname),
                ));
            }
            let params = parse_typed_list(&d[1..], NameKind::Variable, "a predicate parameter")?;
            check_no_duplicates(&params, decl, "parameter")?;
            check_typed_list_types(&params, &table, decl, "parameter")?;
            predicates.push(PredicateDecl {
                name: pname.to_string(),
                params,
            });
        }
    }

    let mut actions: Vec<ActionSchema> = Vec::new();
    for section in &action_secs {
        let schema = parse_action(section, &table, &predicates, &constants)?;
        if actions.iter().any(|a| a.name == schema.name) {
            return Err(semantic(
                section.pos(),
                format!("duplicate action `{}`", schema.name),
            ));
        }
        actions.push(schema);
    }

    Ok(DomainAst {
        name,
        types,
        constants,
        predicates,
        actions,
    })
}

fn parse_action(
    section: &SExp,
    table: &TypeTable,
    predicates: &[PredicateDecl],
    constants: &[TypedName],
) -> Result<ActionSchema, PddlError> {
    let parts = section.as_list().unwrap();
    let name_e = parts
        .get(1)
        .ok_or_else(|| syntax(section.pos(), "missing action name"))?;
    let name = expect_sym(name_e, "an action name")?;
    check_plain_name(name_e, name, "action")?;

    let mut params: Option<Vec<TypedName>> = None;
    let mut pre: Option<Vec<Atom>> = None;
    let mut effect: Option<(Vec<Atom>, Vec<Atom>)> = None;
    let mut i = 2;
    while i < parts.len() {
        let key_e = &parts[i];
        let key = expect_sym(key_e, "an action keyword (`:parameters`, `:precondition`, `:effect`)")?;
        let value = parts.get(i + 1).ok_or_else(|| {
            syntax(key_e.pos(), format!("`{}` with no value after it", key))
        })?;
        match key {
            ":parameters" => {
                if params.is_some() {
                    return Err(syntax(key_e.pos(), "duplicate `:parameters`"));
                }
                let list = expect_list(value, "a parameter list")?;
                let p = parse_typed_list(list, NameKind::Variable, "an action parameter")?;
                check_no_duplicates(&p, value, "parameter")?;
                check_typed_list_types(&p, table, value, "parameter")?;
                params = Some(p);
            }
            ":precondition" => {
                if pre.is_some() {
                    return Err(syntax(key_e.pos(), "duplicate `:precondition`"));
                }
                if let Some(items) = value.as_list() {
                    if items.first().and_then(|e| e.as_sym()) == Some("not") {
                        return Err(unsupported(value.pos(), "negative preconditions"));
                    }
                }
                pre = Some(parse_conjunction(value, "a precondition")?);
            }
            ":effect" => {
                if effect.is_some() {
                    return Err(syntax(key_e.pos(), "duplicate `:effect`"));
                }
                effect = Some(parse_effect(value)?);
            }
            _ => {
                return Err(unsupported(
                    key_e.pos(),
                    format!("action keyword `{}`", key),
                ))
            }
        }
        i += 2;
    }
    let params = params.ok_or_else(|| syntax(section.pos(), "missing `:parameters`"))?;
    let precondition = pre.unwrap_or_default();
    let (add, del) = effect.unwrap_or_default();

    let schema = ActionSchema {
        name: name.to_string(),
        params,
        precondition,
        add,
        del,
    };
    for (atoms, what) in [
        (&schema.precondition, "precondition"),
        (&schema.add, "effect"),
        (&schema.del, "effect"),
    ] {
        for atom in atoms.iter() {
            check_atom(atom, section, predicates, |term| match term {
                Term::Variable(v) => {
                    if schema.params.iter().any(|p| &p.name == v) {
                        Ok(())
                    } else {
                        Err(format!(
                            "variable `{}` is not a parameter of action `{}`",
                            v, schema.name
                        ))
                    }
                }
                Term::Constant(c) => {
                    if constants.iter().any(|k| &k.name == c) {
                        Ok(())
                    } else {
                        Err(format!(
                            "`{}` in action `{}` is neither a parameter nor a declared constant",
                            c, schema.name
                        ))
                    }
                }
            })
            .map_err(|m| semantic(section.pos(), format!("{} ({})", m, what)))?;
        }
    }
    Ok(schema)
}

/// Check an atom against the predicate declarations and a per-term rule.
fn check_atom(
    atom: &Atom,
    _at: &SExp,
    predicates: &[PredicateDecl],
    term_rule: impl Fn(&Term) -> Result<(), String>,
) -> Result<(), String> {
    let decl = predicates
        .iter()
        .find(|p| p.name == atom.predicate)
        .ok_or_else(|| format!("undeclared predicate `{}`", atom.predicate))?;
    if decl.params.len() != atom.terms.len() {
        return Err(format!(
            "predicate `{}` takes {} arguments, found {}",
            atom.predicate,
            decl.params.len(),
            atom.terms.len()
        ));
    }
    for term in &atom.terms {
        term_rule(term)?;
    }
    Ok(())
}

/// Parse and semantically check a PDDL problem against its domain.
pub fn parse_problem(text: &str, domain: &DomainAst) -> Result<ProblemAst, PddlError> {
    let items = read_define(text, "problem")?;
    let name = parse_header(&items, "problem")?.to_string();
    let table = TypeTable::new(&domain.types);

    let mut domain_name: Option<String> = None;
    let mut objects: Vec<TypedName> = Vec::new();
    let mut init: Option<Vec<Atom>> = None;
    let mut goal: Option<Vec<Atom>> = None;
    for section in &items[2..] {
        let parts = expect_list(section, "a problem section")?;
        let head_e = parts
            .first()
            .ok_or_else(|| syntax(section.pos(), "empty problem section"))?;
        let head = expect_sym(head_e, "a section keyword")?;
        match head {
            ":domain" => match &parts[1..] {
                [d] => domain_name = Some(expect_sym(d, "a domain name")?.to_string()),
                _ => return Err(syntax(section.pos(), "expected (:domain name)")),
            },
            ":requirements" => {
                for req in &parts[1..] {
                    let r = expect_sym(req, "a requirement flag")?;
                    if r != ":strips" && r != ":typing" {
                        return Err(unsupported(req.pos(), format!("requirement `{}`", r)));
                    }
                }
            }
            ":objects" => {
                let list = parse_typed_list(&parts[1..], NameKind::Name, "an object name")?;
                check_typed_list_types(&list, &table, section, "object")?;
                objects.extend(list);
            }
            ":init" => {
                if init.is_some() {
                    return Err(syntax(head_e.pos(), "duplicate `:init`"));
                }
                let mut atoms = Vec::new();
                for a in &parts[1..] {
                    atoms.push(parse_atom(a, "the initial state")?);
                }
                init = Some(atoms);
            }
            ":goal" => {
                if goal.is_some() {
                    return Err(syntax(head_e.pos(), "duplicate `:goal`"));
                }
                let value = match &parts[1..] {
                    [v] => v,
                    _ => return Err(syntax(section.pos(), "expected (:goal conjunction)")),
                };
                if let Some(inner) = value.as_list() {
                    if inner.first().and_then(|e| e.as_sym()) == Some("not") {
                        return Err(unsupported(value.pos(), "negations `(not …)` in a goal"));
                    }
                }
                goal = Some(parse_conjunction(value, "a goal")?);
            }
            _ if head.starts_with(':') => {
                return Err(unsupported(head_e.pos(), format!("section `{}`", head)))
            }
            _ => {
                return Err(syntax(
                    head_e.pos(),
                    format!("expected a `:section` keyword, found `{}`", head),
                ))
            }
        }
    }

    let pos = items[0].pos();
    let domain_name = domain_name.ok_or_else(|| syntax(pos, "missing (:domain …) section"))?;
    if domain_name != domain.name {
        return Err(semantic(
            pos,
            format!(
                "problem is for domain `{}`, not `{}`",
                domain_name, domain.name
            ),
        ));
    }
    let init = init.ok_or_else(|| syntax(pos, "missing (:init …) section"))?;
    let goal = goal.ok_or_else(|| syntax(pos, "missing (:goal …) section"))?;

    check_no_duplicates(&objects, &items[0], "object")?;
    if let Some(clash) = objects
        .iter()
        .find(|o| domain.constants.iter().any(|c| c.name == o.name))
    {
        return Err(semantic(
            pos,
            format!("object `{}` shadows a domain constant", clash.name),
        ));
    }

    let problem = ProblemAst {
        name,
        domain: domain_name,
        objects,
        init,
        goal,
    };
    for (atoms, what) in [(&problem.init, "the initial state"), (&problem.goal, "the goal")] {
        for atom in atoms.iter() {
            check_atom(atom, &items[0], &domain.predicates, |term| match term {
                Term::Variable(v) => Err(format!("variable `{}` outside an action schema", v)),
                Term::Constant(c) => {
                    if problem.objects.iter().any(|o| &o.name == c)
                        || domain.constants.iter().any(|k| &k.name == c)
                    {
                        Ok(())
                    } else {
                        Err(format!("unknown object `{}`", c))
                    }
                }
            })
            .map_err(|m| semantic(pos, format!("{} (in {})", m, what)))?;
        }
    }
    Ok(problem)
}
