//! Lexical semantics from (semtag, category, symbol) templates and
//! composition along a derivation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cell::Cell;
use core::fmt;

use crate::category::{parse_category, Atom, Category};
use crate::drs::{Condition, Drs, Ref};
use crate::parser::{DerivNode, EmptyElement, Lexical, Rule};
use crate::term::{category_kind, parse_term_with_kind, resolve_presuppositions, Kind, Term, TermError};

/// Built-in templates: `SEMTAG <tab> CATEGORY <tab> term`. `SYM` stands for
/// the token's symbol (a predicate name or a value literal), `ROLE1` and
/// `ROLE2` for the verb's thematic roles.
pub const DEFAULT_TEMPLATES: &str = r#"# pronouns and names presuppose their referent
PRO	NP	\p. presup([x: SYM(x)]) ; p x
PER	NP	\p. presup([x: SYM(x)]) ; p x
GPE	NP	\p. presup([x: SYM(x)]) ; p x
ORG	NP	\p. presup([x: SYM(x)]) ; p x
GEO	NP	\p. presup([x: SYM(x)]) ; p x
# determiners
DIS	NP/N	\n p. [x:] ; (n x ; p x)
DEF	NP/N	\n p. presup([x:] ; n x) ; p x
# nouns
CON	N	\x. [: SYM(x)]
ROL	N	\x. [: SYM(x)]
GRP	N	\x. [: SYM(x)]
UNK	N	\x. [: SYM(x)]
CLO	N	\x. [: time(x), value(x, SYM)]
CLO	NP	\p. [x: time(x), value(x, SYM)] ; p x
QUC	N/N	\n x. [: quantity(x), value(x, SYM)] ; n x
# modifiers
IST	N/N	\n x. [: SYM(x)] ; n x
IST	(S\NP)\(S\NP)	\V G p. V G (\x. [s: Manner(x,s), SYM(s)] ; p x)
IST	(S\NP)/(S\NP)	\V G p. V G (\x. [s: Manner(x,s), SYM(s)] ; p x)
REL	((S\NP)\(S\NP))/NP	\G V H p. V H (\x. G (\y. [: SYM(x,y)] ; p x))
REL	((S\NP)/(S\NP))/NP	\G V H p. V H (\x. G (\y. [: SYM(x,y)] ; p x))
REL	(N\N)/NP	\G n x. n x ; G (\y. [: SYM(x,y)])
NOT	(S\NP)\(S\NP)	\V G p. not(V G p)
NOT	(S\NP)/(S\NP)	\V G p. not(V G p)
NIL	S\S	\s. s
NIL	NP\NP	\q. q
# verbs: past, present, future, untensed
EPS	S\NP	\G p. G (\x. [e t1 t2: SYM(e), ROLE1(e,x), Time(e,t2), now(t1), t2 < t1] ; p e)
EPS	(S\NP)/NP	\H G p. G (\x. H (\y. [e t1 t2: SYM(e), ROLE1(e,x), ROLE2(e,y), Time(e,t2), now(t1), t2 < t1] ; p e))
ENS	S\NP	\G p. G (\x. [e t1 t2: SYM(e), ROLE1(e,x), Time(e,t2), now(t1), t2 = t1] ; p e)
ENS	(S\NP)/NP	\H G p. G (\x. H (\y. [e t1 t2: SYM(e), ROLE1(e,x), ROLE2(e,y), Time(e,t2), now(t1), t2 = t1] ; p e))
EFS	S\NP	\G p. G (\x. [e t1 t2: SYM(e), ROLE1(e,x), Time(e,t2), now(t1), t1 < t2] ; p e)
EFS	(S\NP)/NP	\H G p. G (\x. H (\y. [e t1 t2: SYM(e), ROLE1(e,x), ROLE2(e,y), Time(e,t2), now(t1), t1 < t2] ; p e))
EXS	S\NP	\G p. G (\x. [e: SYM(e), ROLE1(e,x)] ; p e)
EXS	(S\NP)/NP	\H G p. G (\x. H (\y. [e: SYM(e), ROLE1(e,x), ROLE2(e,y)] ; p e))
"#;

/// Closed inventory of thematic role names.
pub const ROLE_NAMES: &[&str] = &[
    "Agent", "Asset", "Attribute", "Beneficiary", "Cause", "Co-Agent", "Co-Patient", "Co-Theme", "Destination",
    "Experiencer", "Extent", "Goal", "Initial_Location", "Instrument", "Location", "Material", "Patient", "Pivot",
    "Product", "Recipient", "Result", "Source", "Stimulus", "Theme", "Topic", "Trajectory", "Value",
];

const DEFAULT_ROLES: [&str; 2] = ["Agent", "Theme"];

const BUILTIN_ROLES: &[(&str, &[&str])] = &[
    ("come", &["Theme"]),
    ("go", &["Theme"]),
    ("arrive", &["Theme"]),
    ("leave", &["Theme"]),
    ("fall", &["Theme"]),
    ("sleep", &["Agent"]),
    ("run", &["Agent"]),
    ("see", &["Experiencer", "Stimulus"]),
    ("hear", &["Experiencer", "Stimulus"]),
    ("like", &["Experiencer", "Stimulus"]),
    ("love", &["Experiencer", "Stimulus"]),
    ("know", &["Experiencer", "Stimulus"]),
    ("give", &["Agent", "Recipient"]),
    ("read", &["Agent", "Theme"]),
    ("eat", &["Agent", "Patient"]),
    ("break", &["Agent", "Patient"]),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoleLexicon {
    pub roles: BTreeMap<String, Vec<String>>,
}

impl Default for RoleLexicon {
    fn default() -> Self {
        let mut r = RoleLexicon { roles: BTreeMap::new() };
        for (verb, roles) in BUILTIN_ROLES {
            r.roles.insert(verb.to_string(), roles.iter().map(|s| s.to_string()).collect());
        }
        r
    }
}

impl RoleLexicon {
    pub fn empty() -> RoleLexicon {
        RoleLexicon { roles: BTreeMap::new() }
    }

    pub fn insert(&mut self, verb: &str, roles: Vec<String>) -> Result<(), ComposeError> {
        for r in &roles {
            if !ROLE_NAMES.contains(&r.as_str()) {
                return Err(ComposeError::UnknownRole(r.clone()));
            }
        }
        self.roles.insert(verb.to_string(), roles);
        Ok(())
    }

    /// Ordered roles for a verb, subject first, padded from the defaults.
    pub fn roles_for(&self, verb: &str) -> [String; 2] {
        let mut out: Vec<String> = self.roles.get(verb).cloned().unwrap_or_default();
        for d in DEFAULT_ROLES {
            if out.len() >= 2 {
                break;
            }
            if !out.iter().any(|r| r == d) {
                out.push(d.to_string());
            }
        }
        [out[0].clone(), out[1].clone()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub semtag: String,
    pub pattern: Category,
    pub term: Term,
}

impl Template {
    /// Pattern atoms without a feature match any feature.
    pub fn matches(&self, semtag: &str, category: &Category) -> bool {
        self.semtag == semtag && pattern_matches(&self.pattern, category)
    }
}

fn pattern_matches(p: &Category, c: &Category) -> bool {
    match (p, c) {
        (Category::Atomic { atom: a, feature: fa }, Category::Atomic { atom: b, feature: fb }) => {
            a == b && (fa.is_none() || fa == fb)
        }
        (
            Category::Functor {
                result: r1,
                slash: s1,
                arg: a1,
            },
            Category::Functor {
                result: r2,
                slash: s2,
                arg: a2,
            },
        ) => s1 == s2 && pattern_matches(r1, r2) && pattern_matches(a1, a2),
        _ => false,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Templates {
    pub entries: Vec<Template>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ComposeError {
    BadTemplate { line: usize, message: String },
    Overlap { semtag: String, category: Category },
    NoTemplate { semtag: String, category: Category },
    MissingSymbol { semtag: String },
    UnknownRole(String),
    Kind { span: (usize, usize), expected: Kind, found: Kind },
    Term { span: (usize, usize), error: TermError },
    Unlexicalized { span: (usize, usize) },
}

impl fmt::Display for ComposeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComposeError::BadTemplate { line, message } => write!(f, "template line {}: {}", line, message),
            ComposeError::Overlap { semtag, category } => write!(f, "two templates for {} {}", semtag, category),
            ComposeError::NoTemplate { semtag, category } => write!(f, "no template for {} {}", semtag, category),
            ComposeError::MissingSymbol { semtag } => write!(f, "template for {} needs a symbol", semtag),
            ComposeError::UnknownRole(r) => write!(f, "unknown thematic role {}", r),
            ComposeError::Kind { span, expected, found } => write!(
                f,
                "kind mismatch at tokens {}..{}: category wants {}, term has {}",
                span.0, span.1, expected, found
            ),
            ComposeError::Term { span, error } => write!(f, "at tokens {}..{}: {}", span.0, span.1, error),
            ComposeError::Unlexicalized { span } => write!(f, "leaf at tokens {}..{} has no lexical entry", span.0, span.1),
        }
    }
}

impl core::error::Error for ComposeError {}

impl Templates {
    /// Parses tab-separated template lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Templates, ComposeError> {
        let mut entries: Vec<Template> = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let bad = |message: String| ComposeError::BadTemplate { line: line_no, message };
            let mut cols = line.splitn(3, '\t');
            let (Some(tag), Some(cat), Some(term)) = (cols.next(), cols.next(), cols.next()) else {
                return Err(bad("expected three tab-separated columns".to_string()));
            };
            let pattern = parse_category(cat.trim()).map_err(|e| bad(format!("{}", e)))?;
            let kind = category_kind(&pattern);
            let term = parse_term_with_kind(term.trim(), Some(&kind)).map_err(|e| bad(format!("{}", e)))?;
            let t = Template {
                semtag: tag.trim().to_string(),
                pattern,
                term,
            };
            if let Some(other) = entries
                .iter()
                .find(|o| o.semtag == t.semtag && o.pattern.strip_features() == t.pattern.strip_features() && o.pattern.feature_count() == t.pattern.feature_count())
            {
                return Err(ComposeError::Overlap {
                    semtag: other.semtag.clone(),
                    category: other.pattern.clone(),
                });
            }
            entries.push(t);
        }
        Ok(Templates { entries })
    }

    pub fn builtin() -> Templates {
        Templates::parse(DEFAULT_TEMPLATES).expect("built-in templates are well-formed")
    }

    /// Adds templates, replacing those with the same key.
    pub fn extend(&mut self, other: Templates) {
        for t in other.entries {
            self.entries.retain(|o| !(o.semtag == t.semtag && o.pattern == t.pattern));
            self.entries.push(t);
        }
    }

    /// Most specific template for a key.
    pub fn find(&self, semtag: &str, category: &Category) -> Option<&Template> {
        self.entries
            .iter()
            .filter(|t| t.matches(semtag, category))
            .max_by_key(|t| t.pattern.feature_count())
    }

    /// Empty elements available to the parser: every template whose
    /// semtag is in `semtags`.
    pub fn empty_inventory(&self, keys: &[(&str, &str)]) -> Vec<EmptyElement> {
        keys.iter()
            .filter_map(|(tag, cat)| {
                let cat = parse_category(cat).ok()?;
                let t = self.find(tag, &cat)?;
                Some(EmptyElement {
                    category: cat,
                    semtag: tag.to_string(),
                    term: t.term.clone(),
                })
            })
            .collect()
    }
}

/// The default empty-element inventory: the indefinite determiner.
pub fn default_inventory(templates: &Templates) -> Vec<EmptyElement> {
    templates.empty_inventory(&[("DIS", "NP/N")])
}

/// Fills a template's placeholders.
pub fn lexical_semantics(
    semtag: &str,
    category: &Category,
    symbol: Option<&str>,
    templates: &Templates,
    roles: &RoleLexicon,
) -> Result<Term, ComposeError> {
    let t = templates.find(semtag, category).ok_or_else(|| ComposeError::NoTemplate {
        semtag: semtag.to_string(),
        category: category.clone(),
    })?;
    let needs_symbol = mentions_symbol(&t.term);
    let sym = match (symbol, needs_symbol) {
        (Some(s), _) => s.to_string(),
        (None, false) => String::new(),
        (None, true) => {
            return Err(ComposeError::MissingSymbol {
                semtag: semtag.to_string(),
            })
        }
    };
    let [r1, r2] = roles.roles_for(&sym);
    Ok(instantiate(&t.term, &sym, &r1, &r2))
}

fn mentions_symbol(t: &Term) -> bool {
    let found = Cell::new(false);
    let _ = t.map_symbols(&|s| {
        if s == "SYM" {
            found.set(true);
        }
        None
    });
    found.get()
}

fn instantiate(t: &Term, sym: &str, role1: &str, role2: &str) -> Term {
    match t {
        Term::Var(_) => t.clone(),
        Term::Lam(v, b) => Term::Lam(v.clone(), alloc::boxed::Box::new(instantiate(b, sym, role1, role2))),
        Term::App(a, b) => Term::app(instantiate(a, sym, role1, role2), instantiate(b, sym, role1, role2)),
        Term::Merge(a, b) => Term::merge(instantiate(a, sym, role1, role2), instantiate(b, sym, role1, role2)),
        Term::Presup(a, b) => Term::presup(instantiate(a, sym, role1, role2), instantiate(b, sym, role1, role2)),
        Term::Neg(b) => Term::neg(instantiate(b, sym, role1, role2)),
        Term::DrsLit(d) => Term::DrsLit(instantiate_box(d, sym, role1, role2)),
    }
}

fn instantiate_box(d: &Drs<String>, sym: &str, role1: &str, role2: &str) -> Drs<String> {
    let name = |s: &String| match s.as_str() {
        "SYM" => sym.to_string(),
        "ROLE1" => role1.to_string(),
        "ROLE2" => role2.to_string(),
        _ => s.clone(),
    };
    let conditions = d
        .conditions
        .iter()
        .map(|c| match c {
            Condition::Pred1(p, a) => Condition::Pred1(name(p), a.clone()),
            Condition::Pred2(p, a, b) => Condition::Pred2(name(p), a.clone(), b.clone()),
            // a symbol in a two-place slot is a relation, not a role
            Condition::Role(p, a, b) if p == "SYM" => Condition::Pred2(sym.to_string(), a.clone(), b.clone()),
            Condition::Role(p, a, b) => Condition::Role(name(p), a.clone(), b.clone()),
            Condition::Value(a, v) => Condition::Value(a.clone(), name(v)),
            Condition::Not(inner) => Condition::Not(instantiate_box(inner, sym, role1, role2)),
            other => other.clone(),
        })
        .collect();
    Drs::new(d.referents.clone(), conditions)
}

/// Applies the combinatory rule's semantic counterpart.
fn combine_terms(rule: Rule, node: &DerivNode, left: Term, right: Term) -> Term {
    match rule {
        Rule::ForwardApp => Term::app(left, right),
        Rule::BackwardApp => Term::app(right, left),
        Rule::ForwardComp | Rule::CrossedBackwardComp => compose_fns(left, right, node),
        Rule::BackwardComp => compose_fns(right, left, node),
        Rule::Lexical | Rule::EmptyLexical => left,
    }
}

/// `λz. f (g z)`, with `z` at the kind of the composed argument.
fn compose_fns(f: Term, g: Term, node: &DerivNode) -> Term {
    let z_kind = match node.category.as_functor() {
        Some((_, _, z)) => category_kind(z),
        None => Kind::Ref,
    };
    let mut avoid: BTreeSet<String> = f.all_names();
    avoid.extend(g.all_names());
    let mut i = 0;
    let z = loop {
        i += 1;
        let cand = format!("z{}", i);
        if !avoid.contains(&cand) {
            break cand;
        }
    };
    Term::lam(&z, z_kind.clone(), Term::app(f, Term::app(g, Term::var(&z, z_kind))))
}

/// The unreduced term of a derivation, with leaf terms freshened from a
/// shared counter and kinds checked at every node.
pub fn derivation_term(deriv: &DerivNode) -> Result<Term, ComposeError> {
    let mut counter = 0u32;
    let t = build(deriv, &mut counter)?;
    Ok(t)
}

fn build(node: &DerivNode, counter: &mut u32) -> Result<Term, ComposeError> {
    let term = match node.rule {
        Rule::Lexical | Rule::EmptyLexical => match &node.lexical {
            Some(Lexical::Token(t)) => t.lexsem.freshen(counter),
            Some(Lexical::Empty(e)) => e.term.freshen(counter),
            None => return Err(ComposeError::Unlexicalized { span: node.span }),
        },
        rule => {
            let [l, r] = node.children.as_slice() else {
                return Err(ComposeError::Unlexicalized { span: node.span });
            };
            let lt = build(l, counter)?;
            let rt = build(r, counter)?;
            combine_terms(rule, node, lt, rt)
        }
    };
    let expected = category_kind(&node.category);
    let found = term.kind().map_err(|error| ComposeError::Term { span: node.span, error })?;
    if found != expected {
        return Err(ComposeError::Kind {
            span: node.span,
            expected,
            found,
        });
    }
    Ok(term)
}

/// Closes a sentence-level term: quantifier kinds receive the empty
/// continuation, properties are existentially closed.
pub fn close(term: Term, category: &Category) -> Term {
    match category_kind(category) {
        Kind::Box => term,
        k if k == Kind::property() => {
            let x = "x0";
            Term::merge(Term::DrsLit(Drs::new(alloc::vec![x.to_string()], Vec::new())), Term::app(term, Term::var(x, Kind::Ref)))
        }
        _ => Term::app(term, Term::lam("e0", Kind::Ref, Term::empty_box())),
    }
}

/// The sentence DRS for a derivation.
pub fn compose(deriv: &DerivNode) -> Result<Drs<Ref>, ComposeError> {
    let t = derivation_term(deriv)?;
    let closed = close(t, &deriv.category);
    resolve_presuppositions(&closed).map_err(|error| ComposeError::Term { span: deriv.span, error })
}

/// Whether a category is one the composer has a kind for: every atom is.
pub fn has_kind(category: &Category) -> bool {
    match category {
        Category::Atomic { atom, .. } => matches!(atom, Atom::S | Atom::NP | Atom::N | Atom::PP),
        Category::Functor { result, arg, .. } => has_kind(result) && has_kind(arg),
    }
}
