//! λ-terms over DRS literals.
//!
//! Box referents follow dynamic binding: in `A ; B` and `presup(A) ; B` the
//! referents declared by the boxes of `A` also bind free occurrences in `B`.
//! Substitution renames both λ-binders and such box declarations to avoid
//! capture.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::category::{Atom, Category};
use crate::drs::{canonical_refs, Condition, Drs, Ref, Referent};

/// Semantic kinds: `e` for referents, `t` for boxes, and functions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Ref,
    Box,
    Fun(Box<Kind>, Box<Kind>),
}

impl Kind {
    pub fn fun(from: Kind, to: Kind) -> Kind {
        Kind::Fun(Box::new(from), Box::new(to))
    }

    /// `e -> t`, the kind of properties.
    pub fn property() -> Kind {
        Kind::fun(Kind::Ref, Kind::Box)
    }

    /// `(e -> t) -> t`, the kind of noun phrases and sentences.
    pub fn quantifier() -> Kind {
        Kind::fun(Kind::property(), Kind::Box)
    }

    /// Final result after all arguments are supplied.
    pub fn target(&self) -> &Kind {
        match self {
            Kind::Fun(_, to) => to.target(),
            other => other,
        }
    }

    /// Referent-valued functions are not allowed: the only terms of kind `e`
    /// are variables.
    pub fn is_admissible(&self) -> bool {
        match self {
            Kind::Ref | Kind::Box => true,
            Kind::Fun(from, to) => from.is_admissible() && to.is_admissible() && *to.target() == Kind::Box,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Ref => f.write_str("e"),
            Kind::Box => f.write_str("t"),
            Kind::Fun(from, to) => {
                if matches!(**from, Kind::Fun(..)) {
                    write!(f, "({}) -> {}", from, to)
                } else {
                    write!(f, "{} -> {}", from, to)
                }
            }
        }
    }
}

/// Kind assigned to a CCG category: `N` is a property, `NP`, `S` and `PP`
/// are quantifiers over properties, and slashes become function kinds.
pub fn category_kind(cat: &Category) -> Kind {
    match cat {
        Category::Atomic { atom: Atom::N, .. } => Kind::property(),
        Category::Atomic { .. } => Kind::quantifier(),
        Category::Functor { result, arg, .. } => Kind::fun(category_kind(arg), category_kind(result)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: String,
    pub kind: Kind,
}

impl Var {
    pub fn new(name: impl Into<String>, kind: Kind) -> Var {
        Var {
            name: name.into(),
            kind,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Lam(Var, Box<Term>),
    App(Box<Term>, Box<Term>),
    DrsLit(Drs<String>),
    /// Assertive merge, `a ; b`.
    Merge(Box<Term>, Box<Term>),
    /// Presupposed content (first) projected over asserted content (second).
    Presup(Box<Term>, Box<Term>),
    Neg(Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermError {
    Parse { offset: usize, message: String },
    Kind { context: String, expected: Kind, found: Kind },
    Inadmissible { name: String, kind: Kind },
    NotAFunction(String),
    /// A referent slot received something other than a variable.
    NonVariableReferent(String),
    CompositionIncomplete(String),
}

impl fmt::Display for TermError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermError::Parse { offset, message } => write!(f, "term syntax error at offset {}: {}", offset, message),
            TermError::Kind { context, expected, found } => {
                write!(f, "kind mismatch in {}: expected {}, found {}", context, expected, found)
            }
            TermError::Inadmissible { name, kind } => write!(f, "variable {} has inadmissible kind {}", name, kind),
            TermError::NotAFunction(t) => write!(f, "application of a non-function: {}", t),
            TermError::NonVariableReferent(t) => write!(f, "referent position filled by non-variable {}", t),
            TermError::CompositionIncomplete(t) => write!(f, "composition incomplete, unreduced term remains: {}", t),
        }
    }
}

impl core::error::Error for TermError {}

impl Term {
    pub fn var(name: &str, kind: Kind) -> Term {
        Term::Var(Var::new(name, kind))
    }

    pub fn lam(name: &str, kind: Kind, body: Term) -> Term {
        Term::Lam(Var::new(name, kind), Box::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Box::new(f), Box::new(a))
    }

    pub fn merge(a: Term, b: Term) -> Term {
        Term::Merge(Box::new(a), Box::new(b))
    }

    pub fn presup(p: Term, b: Term) -> Term {
        Term::Presup(Box::new(p), Box::new(b))
    }

    pub fn neg(b: Term) -> Term {
        Term::Neg(Box::new(b))
    }

    pub fn boxed(d: Drs<String>) -> Term {
        Term::DrsLit(d)
    }

    /// The empty box `[:]`.
    pub fn empty_box() -> Term {
        Term::DrsLit(Drs::empty())
    }

    /// `λx. x` at the given kind.
    pub fn identity(kind: Kind) -> Term {
        Term::lam("i", kind.clone(), Term::var("i", kind))
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) | Term::DrsLit(_) => 1,
            Term::Lam(_, b) | Term::Neg(b) => 1 + b.depth(),
            Term::App(a, b) | Term::Merge(a, b) | Term::Presup(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::DrsLit(_) => 1,
            Term::Lam(_, b) | Term::Neg(b) => 1 + b.size(),
            Term::App(a, b) | Term::Merge(a, b) | Term::Presup(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Referents this term exports to the right of a merge.
    pub fn exported(&self) -> BTreeSet<String> {
        match self {
            Term::DrsLit(d) => d.referents.iter().cloned().collect(),
            Term::Merge(a, b) | Term::Presup(a, b) => {
                let mut out = a.exported();
                out.extend(b.exported());
                out
            }
            _ => BTreeSet::new(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            Term::Var(v) => core::iter::once(v.name.clone()).collect(),
            Term::Lam(v, b) => {
                let mut out = b.free_vars();
                out.remove(&v.name);
                out
            }
            Term::App(a, b) => {
                let mut out = a.free_vars();
                out.extend(b.free_vars());
                out
            }
            Term::DrsLit(d) => d.free_refs(),
            Term::Merge(a, b) | Term::Presup(a, b) => {
                let mut out = a.free_vars();
                let bound = a.exported();
                out.extend(b.free_vars().into_iter().filter(|n| !bound.contains(n)));
                out
            }
            Term::Neg(b) => b.free_vars(),
        }
    }

    /// Every identifier occurring anywhere, bound or free.
    pub fn all_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.name.clone());
            }
            Term::Lam(v, b) => {
                out.insert(v.name.clone());
                b.collect_names(out);
            }
            Term::App(a, b) | Term::Merge(a, b) | Term::Presup(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Term::DrsLit(d) => out.extend(d.all_refs()),
            Term::Neg(b) => b.collect_names(out),
        }
    }

    /// Kind of a term, checking every application and merge on the way.
    pub fn kind(&self) -> Result<Kind, TermError> {
        match self {
            Term::Var(v) => Ok(v.kind.clone()),
            Term::Lam(v, b) => Ok(Kind::fun(v.kind.clone(), b.kind()?)),
            Term::App(f, a) => match f.kind()? {
                Kind::Fun(from, to) => {
                    let ka = a.kind()?;
                    if *from != ka {
                        return Err(TermError::Kind {
                            context: format!("argument of {}", f),
                            expected: *from,
                            found: ka,
                        });
                    }
                    Ok(*to)
                }
                _ => Err(TermError::NotAFunction(f.to_string())),
            },
            Term::DrsLit(_) => Ok(Kind::Box),
            Term::Merge(a, b) | Term::Presup(a, b) => {
                for part in [a, b] {
                    let k = part.kind()?;
                    if k != Kind::Box {
                        return Err(TermError::Kind {
                            context: format!("merge operand {}", part),
                            expected: Kind::Box,
                            found: k,
                        });
                    }
                }
                Ok(Kind::Box)
            }
            Term::Neg(b) => {
                let k = b.kind()?;
                if k != Kind::Box {
                    return Err(TermError::Kind {
                        context: "negation".to_string(),
                        expected: Kind::Box,
                        found: k,
                    });
                }
                Ok(Kind::Box)
            }
        }
    }

    /// Renames every λ-binder and box declaration to `<stem><n>` using the
    /// shared counter, so independently instantiated terms never share
    /// bound names.
    pub fn freshen(&self, counter: &mut u32) -> Term {
        freshen(self, &BTreeMap::new(), counter).0
    }

    /// Replaces predicate and role names (and value literals) through `f`.
    pub fn map_symbols(&self, f: &impl Fn(&str) -> Option<String>) -> Term {
        let sym = |s: &String| f(s).unwrap_or_else(|| s.clone());
        match self {
            Term::Var(_) => self.clone(),
            Term::Lam(v, b) => Term::Lam(v.clone(), Box::new(b.map_symbols(f))),
            Term::App(a, b) => Term::app(a.map_symbols(f), b.map_symbols(f)),
            Term::Merge(a, b) => Term::merge(a.map_symbols(f), b.map_symbols(f)),
            Term::Presup(a, b) => Term::presup(a.map_symbols(f), b.map_symbols(f)),
            Term::Neg(b) => Term::neg(b.map_symbols(f)),
            Term::DrsLit(d) => Term::DrsLit(map_drs_symbols(d, &sym)),
        }
    }

    /// Alpha-equivalence over λ-binders and box declarations.
    pub fn alpha_eq(&self, other: &Term) -> bool {
        let mut n = 0;
        let mut m = 0;
        canonical(self, &BTreeMap::new(), &mut n).0 == canonical(other, &BTreeMap::new(), &mut m).0
    }
}

fn map_drs_symbols(d: &Drs<String>, sym: &impl Fn(&String) -> String) -> Drs<String> {
    let conditions = d
        .conditions
        .iter()
        .map(|c| match c {
            Condition::Pred1(p, a) => Condition::Pred1(sym(p), a.clone()),
            Condition::Pred2(p, a, b) => Condition::Pred2(sym(p), a.clone(), b.clone()),
            Condition::Role(p, a, b) => Condition::Role(sym(p), a.clone(), b.clone()),
            Condition::Value(a, v) => Condition::Value(a.clone(), sym(v)),
            Condition::Not(inner) => Condition::Not(map_drs_symbols(inner, sym)),
            other => other.clone(),
        })
        .collect();
    Drs::new(d.referents.clone(), conditions)
}

fn stem(name: &str) -> &str {
    name.trim_end_matches(|c: char| c.is_ascii_digit())
}

fn fresh_name(name: &str, avoid: &BTreeSet<String>) -> String {
    let stem = stem(name);
    let stem = if stem.is_empty() { "v" } else { stem };
    let mut i = 1usize;
    loop {
        let candidate = format!("{}{}", stem, i);
        if !avoid.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

fn freshen(t: &Term, env: &BTreeMap<String, String>, counter: &mut u32) -> (Term, BTreeMap<String, String>) {
    let mut next = |name: &str, counter: &mut u32| {
        *counter += 1;
        let s = stem(name);
        format!("{}{}", if s.is_empty() { "v" } else { s }, counter)
    };
    let rename = |n: &String, env: &BTreeMap<String, String>| env.get(n).cloned().unwrap_or_else(|| n.clone());
    match t {
        Term::Var(v) => (Term::Var(Var::new(rename(&v.name, env), v.kind.clone())), BTreeMap::new()),
        Term::Lam(v, b) => {
            let new = next(&v.name, counter);
            let mut inner = env.clone();
            inner.insert(v.name.clone(), new.clone());
            let body = freshen(b, &inner, counter).0;
            (Term::Lam(Var::new(new, v.kind.clone()), Box::new(body)), BTreeMap::new())
        }
        Term::App(a, b) => {
            let a = freshen(a, env, counter).0;
            let b = freshen(b, env, counter).0;
            (Term::app(a, b), BTreeMap::new())
        }
        Term::Neg(b) => (Term::neg(freshen(b, env, counter).0), BTreeMap::new()),
        Term::Merge(a, b) | Term::Presup(a, b) => {
            let (a2, exp_a) = freshen(a, env, counter);
            let mut inner = env.clone();
            inner.extend(exp_a.clone());
            let (b2, exp_b) = freshen(b, &inner, counter);
            let mut exp = exp_a;
            exp.extend(exp_b);
            let out = if matches!(t, Term::Merge(..)) { Term::merge(a2, b2) } else { Term::presup(a2, b2) };
            (out, exp)
        }
        Term::DrsLit(d) => {
            let mut exp = BTreeMap::new();
            let d2 = freshen_box(d, env, counter, &mut next, &mut exp);
            (Term::DrsLit(d2), exp)
        }
    }
}

fn freshen_box(
    d: &Drs<String>,
    env: &BTreeMap<String, String>,
    counter: &mut u32,
    next: &mut impl FnMut(&str, &mut u32) -> String,
    exported: &mut BTreeMap<String, String>,
) -> Drs<String> {
    let mut inner = env.clone();
    let mut referents = Vec::new();
    for r in &d.referents {
        let new = next(r, counter);
        inner.insert(r.clone(), new.clone());
        exported.insert(r.clone(), new.clone());
        referents.push(new);
    }
    let conditions = d
        .conditions
        .iter()
        .map(|c| match c {
            Condition::Not(nested) => Condition::Not(freshen_box(nested, &inner, counter, next, &mut BTreeMap::new())),
            other => other.map_refs(&mut |r: &String| inner.get(r).cloned().unwrap_or_else(|| r.clone())),
        })
        .collect();
    Drs::new(referents, conditions)
}

fn canonical(t: &Term, env: &BTreeMap<String, String>, n: &mut usize) -> (Term, BTreeMap<String, String>) {
    let next = |n: &mut usize| {
        *n += 1;
        format!("#{}", n)
    };
    match t {
        Term::Var(v) => (
            Term::Var(Var::new(env.get(&v.name).cloned().unwrap_or_else(|| v.name.clone()), v.kind.clone())),
            BTreeMap::new(),
        ),
        Term::Lam(v, b) => {
            let name = next(n);
            let mut inner = env.clone();
            inner.insert(v.name.clone(), name.clone());
            (Term::Lam(Var::new(name, v.kind.clone()), Box::new(canonical(b, &inner, n).0)), BTreeMap::new())
        }
        Term::App(a, b) => {
            let a = canonical(a, env, n).0;
            (Term::app(a, canonical(b, env, n).0), BTreeMap::new())
        }
        Term::Neg(b) => (Term::neg(canonical(b, env, n).0), BTreeMap::new()),
        Term::Merge(a, b) | Term::Presup(a, b) => {
            let (a2, exp_a) = canonical(a, env, n);
            let mut inner = env.clone();
            inner.extend(exp_a.clone());
            let (b2, exp_b) = canonical(b, &inner, n);
            let mut exp = exp_a;
            exp.extend(exp_b);
            let out = if matches!(t, Term::Merge(..)) { Term::merge(a2, b2) } else { Term::presup(a2, b2) };
            (out, exp)
        }
        Term::DrsLit(d) => {
            let mut counter = *n as u32;
            let mut exported = BTreeMap::new();
            let mut mk = |_: &str, c: &mut u32| {
                *c += 1;
                format!("#{}", c)
            };
            let d2 = freshen_box(d, env, &mut counter, &mut mk, &mut exported);
            *n = counter as usize;
            (Term::DrsLit(d2), exported)
        }
    }
}

// ---------------------------------------------------------------------------
// Substitution

/// Capture-avoiding substitution `t[name := value]`.
pub fn substitute(t: &Term, name: &str, value: &Term) -> Result<Term, TermError> {
    let fv = value.free_vars();
    let mut avoid = t.all_names();
    avoid.extend(value.all_names());
    avoid.insert(name.to_string());
    subst(t, name, value, &fv, &mut avoid)
}

fn subst(
    t: &Term,
    name: &str,
    value: &Term,
    fv: &BTreeSet<String>,
    avoid: &mut BTreeSet<String>,
) -> Result<Term, TermError> {
    match t {
        Term::Var(v) => Ok(if v.name == name { value.clone() } else { t.clone() }),
        Term::App(a, b) => Ok(Term::app(subst(a, name, value, fv, avoid)?, subst(b, name, value, fv, avoid)?)),
        Term::Neg(b) => Ok(Term::neg(subst(b, name, value, fv, avoid)?)),
        Term::Lam(v, b) => {
            if v.name == name || !b.free_vars().contains(name) {
                return Ok(t.clone());
            }
            if fv.contains(&v.name) {
                let fresh = fresh_name(&v.name, avoid);
                avoid.insert(fresh.clone());
                let renamed = substitute(b, &v.name, &Term::var(&fresh, v.kind.clone()))?;
                avoid.extend(renamed.all_names());
                let body = subst(&renamed, name, value, fv, avoid)?;
                Ok(Term::Lam(Var::new(fresh, v.kind.clone()), Box::new(body)))
            } else {
                Ok(Term::Lam(v.clone(), Box::new(subst(b, name, value, fv, avoid)?)))
            }
        }
        Term::Merge(a, b) | Term::Presup(a, b) => {
            if !t.free_vars().contains(name) {
                return Ok(t.clone());
            }
            let mut a = (**a).clone();
            let mut b = (**b).clone();
            // Declarations of `a` that would capture free variables of the
            // value are renamed together with the occurrences they bind.
            for clash in a.exported().intersection(fv).cloned().collect::<Vec<_>>() {
                let fresh = fresh_name(&clash, avoid);
                avoid.insert(fresh.clone());
                a = rename_exported(&a, &clash, &fresh)?;
                b = substitute(&b, &clash, &Term::var(&fresh, Kind::Ref))?;
                avoid.extend(a.all_names());
                avoid.extend(b.all_names());
            }
            let bound_here = a.exported().contains(name);
            let a2 = subst(&a, name, value, fv, avoid)?;
            let b2 = if bound_here { b } else { subst(&b, name, value, fv, avoid)? };
            Ok(if matches!(t, Term::Merge(..)) { Term::merge(a2, b2) } else { Term::presup(a2, b2) })
        }
        Term::DrsLit(d) => {
            if !d.free_refs().contains(name) {
                return Ok(t.clone());
            }
            let Term::Var(v) = value else {
                return Err(TermError::NonVariableReferent(value.to_string()));
            };
            Ok(Term::DrsLit(subst_box(d, name, &v.name, avoid)))
        }
    }
}

/// Replaces free occurrences of `name` in a box by `target`, renaming any
/// declaration that would capture `target`.
fn subst_box(d: &Drs<String>, name: &str, target: &str, avoid: &mut BTreeSet<String>) -> Drs<String> {
    if d.referents.iter().any(|r| r == name) {
        return d.clone();
    }
    let mut d = d.clone();
    if d.referents.iter().any(|r| r == target) {
        let fresh = fresh_name(target, avoid);
        avoid.insert(fresh.clone());
        d = rename_declared(&d, target, &fresh);
    }
    let referents = d.referents.clone();
    let conditions = d
        .conditions
        .iter()
        .map(|c| match c {
            Condition::Not(inner) => Condition::Not(subst_box(inner, name, target, avoid)),
            other => other.map_refs(&mut |r: &String| if r == name { target.to_string() } else { r.clone() }),
        })
        .collect();
    Drs::new(referents, conditions)
}

/// Renames a declaration of this box and the occurrences it binds.
fn rename_declared(d: &Drs<String>, old: &str, new: &str) -> Drs<String> {
    let referents = d.referents.iter().map(|r| if r == old { new.to_string() } else { r.clone() }).collect();
    let conditions = d.conditions.iter().map(|c| rename_free_cond(c, old, new)).collect();
    Drs::new(referents, conditions)
}

fn rename_free_cond(c: &Condition<String>, old: &str, new: &str) -> Condition<String> {
    match c {
        Condition::Not(inner) => {
            if inner.referents.iter().any(|r| r == old) {
                c.clone()
            } else {
                Condition::Not(Drs::new(
                    inner.referents.clone(),
                    inner.conditions.iter().map(|c| rename_free_cond(c, old, new)).collect(),
                ))
            }
        }
        other => other.map_refs(&mut |r: &String| if r == old { new.to_string() } else { r.clone() }),
    }
}

/// Renames the exported declaration `old` of a merge chain.
fn rename_exported(t: &Term, old: &str, new: &str) -> Result<Term, TermError> {
    match t {
        Term::DrsLit(d) => Ok(Term::DrsLit(rename_declared(d, old, new))),
        Term::Merge(a, b) | Term::Presup(a, b) => {
            let in_a = a.exported().contains(old);
            let in_b = b.exported().contains(old);
            let (a2, b2) = if in_b {
                // The later declaration shadows; occurrences in `b` bound by
                // `a` are shadowed as well.
                ((**a).clone(), rename_exported(b, old, new)?)
            } else if in_a {
                (rename_exported(a, old, new)?, substitute(b, old, &Term::var(new, Kind::Ref))?)
            } else {
                ((**a).clone(), (**b).clone())
            };
            Ok(if matches!(t, Term::Merge(..)) { Term::merge(a2, b2) } else { Term::presup(a2, b2) })
        }
        other => Ok(other.clone()),
    }
}

// ---------------------------------------------------------------------------
// Reduction

/// β-normal form followed by merge flattening.
pub fn beta_reduce(t: &Term) -> Result<Term, TermError> {
    Ok(flatten(&normalize(t)?))
}

/// β-normal form. Arguments are substituted unevaluated (normal order); the
/// kind discipline guarantees termination.
pub fn normalize(t: &Term) -> Result<Term, TermError> {
    match t {
        Term::Var(_) | Term::DrsLit(_) => Ok(t.clone()),
        Term::Lam(v, b) => Ok(Term::Lam(v.clone(), Box::new(normalize(b)?))),
        Term::App(f, a) => match normalize(f)? {
            Term::Lam(v, body) => normalize(&substitute(&body, &v.name, a)?),
            head @ (Term::Var(_) | Term::App(..)) => Ok(Term::app(head, normalize(a)?)),
            other => Err(TermError::NotAFunction(other.to_string())),
        },
        Term::Merge(a, b) => Ok(Term::merge(guard_exports(a, normalize(a)?, b)?, normalize(b)?)),
        Term::Presup(a, b) => Ok(Term::presup(guard_exports(a, normalize(a)?, b)?, normalize(b)?)),
        Term::Neg(b) => Ok(Term::neg(normalize(b)?)),
    }
}

/// A reduced left operand may declare referents its unreduced form did not
/// export; those must not capture free names of the right operand.
fn guard_exports(before: &Term, after: Term, right: &Term) -> Result<Term, TermError> {
    let old = before.exported();
    let fv = right.free_vars();
    let clashes: Vec<String> = after
        .exported()
        .into_iter()
        .filter(|n| !old.contains(n) && fv.contains(n))
        .collect();
    if clashes.is_empty() {
        return Ok(after);
    }
    let mut avoid = after.all_names();
    avoid.extend(right.all_names());
    let mut out = after;
    for n in clashes {
        let fresh = fresh_name(&n, &avoid);
        avoid.insert(fresh.clone());
        out = rename_exported(&out, &n, &fresh)?;
    }
    Ok(out)
}

/// One leftmost-outermost β-step, or `None` for a normal form.
pub fn reduce_step(t: &Term) -> Result<Option<Term>, TermError> {
    match t {
        Term::Var(_) | Term::DrsLit(_) => Ok(None),
        Term::Lam(v, b) => Ok(reduce_step(b)?.map(|b| Term::Lam(v.clone(), Box::new(b)))),
        Term::App(f, a) => {
            if let Term::Lam(v, body) = &**f {
                return substitute(body, &v.name, a).map(Some);
            }
            if matches!(**f, Term::DrsLit(_) | Term::Merge(..) | Term::Presup(..) | Term::Neg(_)) {
                return Err(TermError::NotAFunction(f.to_string()));
            }
            if let Some(f2) = reduce_step(f)? {
                return Ok(Some(Term::App(Box::new(f2), a.clone())));
            }
            Ok(reduce_step(a)?.map(|a2| Term::App(f.clone(), Box::new(a2))))
        }
        Term::Merge(a, b) | Term::Presup(a, b) => {
            let rebuild = |x: Term, y: Term| if matches!(t, Term::Merge(..)) { Term::merge(x, y) } else { Term::presup(x, y) };
            if let Some(a2) = reduce_step(a)? {
                return Ok(Some(rebuild(guard_exports(a, a2, b)?, (**b).clone())));
            }
            Ok(reduce_step(b)?.map(|b2| rebuild((**a).clone(), b2)))
        }
        Term::Neg(b) => Ok(reduce_step(b)?.map(Term::neg)),
    }
}

/// Joins adjacent box literals of merge chains and folds negated literals
/// into a single negation condition.
pub fn flatten(t: &Term) -> Term {
    match t {
        Term::Var(_) | Term::DrsLit(_) => t.clone(),
        Term::Lam(v, b) => Term::Lam(v.clone(), Box::new(flatten(b))),
        Term::App(a, b) => Term::app(flatten(a), flatten(b)),
        Term::Presup(a, b) => Term::presup(flatten(a), flatten(b)),
        Term::Neg(b) => match flatten(b) {
            Term::DrsLit(d) => Term::DrsLit(Drs::new(Vec::new(), alloc::vec![Condition::Not(d)])),
            other => Term::neg(other),
        },
        Term::Merge(..) => {
            let mut items = Vec::new();
            chain(t, &mut items);
            let mut items: Vec<Term> = items.iter().map(flatten).collect();
            let mut out: Vec<Term> = Vec::new();
            for i in 0..items.len() {
                let item = items[i].clone();
                match (out.last_mut(), item) {
                    (Some(Term::DrsLit(acc)), Term::DrsLit(d)) => {
                        let (merged, renamed) = merge_literal_renaming(acc, &d);
                        *acc = merged;
                        // later items bound by a renamed declaration follow it
                        for (old, new) in renamed {
                            for later in items.iter_mut().skip(i + 1) {
                                let shadows = later.exported().contains(&old);
                                *later = substitute(later, &old, &Term::var(&new, Kind::Ref))
                                    .unwrap_or_else(|_| later.clone());
                                if shadows {
                                    break;
                                }
                            }
                        }
                    }
                    (_, item) => out.push(item),
                }
            }
            let mut iter = out.into_iter().rev();
            let mut result = iter.next().unwrap_or_else(Term::empty_box);
            for left in iter {
                result = Term::merge(left, result);
            }
            result
        }
    }
}

fn chain(t: &Term, out: &mut Vec<Term>) {
    match t {
        Term::Merge(a, b) => {
            chain(a, out);
            chain(b, out);
        }
        other => out.push(other.clone()),
    }
}

/// Merge of two adjacent literals where the second may mention referents
/// the first declares.
fn merge_literal(a: &Drs<String>, b: &Drs<String>) -> Drs<String> {
    merge_literal_renaming(a, b).0
}

fn merge_literal_renaming(a: &Drs<String>, b: &Drs<String>) -> (Drs<String>, Vec<(String, String)>) {
    let mut renamed = Vec::new();
    let mut out = a.clone();
    let mut avoid = a.all_refs();
    avoid.extend(b.all_refs());
    let mut b = b.clone();
    for r in b.referents.clone() {
        if out.referents.contains(&r) {
            let fresh = r.fresh(&avoid);
            avoid.insert(fresh.clone());
            b = rename_declared(&b, &r, &fresh);
            renamed.push((r, fresh));
        }
    }
    out.referents.extend(b.referents);
    out.conditions.extend(b.conditions);
    (out, renamed)
}

/// Reduces a term and accommodates every presupposition in the outermost
/// box, giving a plain DRS with canonically numbered referents.
pub fn resolve_presuppositions(t: &Term) -> Result<Drs<Ref>, TermError> {
    let reduced = beta_reduce(t)?;
    let (main, presups) = resolve(&reduced)?;
    let mut acc: Drs<String> = Drs::empty();
    for p in presups.iter().chain(core::iter::once(&main)) {
        acc = merge_literal(&acc, p);
    }
    Ok(canonical_refs(&acc))
}

fn resolve(t: &Term) -> Result<(Drs<String>, Vec<Drs<String>>), TermError> {
    match t {
        Term::DrsLit(d) => Ok((d.clone(), Vec::new())),
        Term::Merge(a, b) => {
            let (ma, mut pa) = resolve(a)?;
            let (mb, pb) = resolve(b)?;
            pa.extend(pb);
            Ok((merge_literal(&ma, &mb), pa))
        }
        Term::Presup(p, b) => {
            let (mp, mut pp) = resolve(p)?;
            pp.push(mp);
            let (mb, pb) = resolve(b)?;
            pp.extend(pb);
            Ok((mb, pp))
        }
        Term::Neg(b) => {
            let (mb, pb) = resolve(b)?;
            Ok((Drs::new(Vec::new(), alloc::vec![Condition::Not(mb)]), pb))
        }
        other => Err(TermError::CompositionIncomplete(other.to_string())),
    }
}

// ---------------------------------------------------------------------------
// Printing

fn is_atomic(t: &Term) -> bool {
    matches!(t, Term::Var(_) | Term::DrsLit(_) | Term::Neg(_))
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(&v.name),
            Term::DrsLit(d) => write!(f, "{}", d),
            Term::Neg(b) => write!(f, "not({})", b),
            Term::Lam(..) => {
                f.write_str("\\")?;
                let mut t = self;
                let mut first = true;
                while let Term::Lam(v, b) = t {
                    if !first {
                        f.write_str(" ")?;
                    }
                    f.write_str(&v.name)?;
                    first = false;
                    t = b;
                }
                write!(f, ". {}", t)
            }
            Term::App(a, b) => {
                match **a {
                    Term::Var(_) | Term::App(..) | Term::DrsLit(_) | Term::Neg(_) => write!(f, "{}", a)?,
                    _ => write!(f, "({})", a)?,
                }
                if is_atomic(b) {
                    write!(f, " {}", b)
                } else {
                    write!(f, " ({})", b)
                }
            }
            Term::Merge(a, b) => {
                match **a {
                    Term::Lam(..) | Term::Merge(..) | Term::Presup(..) => write!(f, "({})", a)?,
                    _ => write!(f, "{}", a)?,
                }
                match **b {
                    Term::Lam(..) => write!(f, " ; ({})", b),
                    _ => write!(f, " ; {}", b),
                }
            }
            Term::Presup(p, b) => match **b {
                Term::Lam(..) => write!(f, "presup({}) ; ({})", p, b),
                _ => write!(f, "presup({}) ; {}", p, b),
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing

/// Parses the textual λ-syntax, e.g. `\p. presup([x: male(x)]) ; p x`, and
/// infers variable kinds. Unconstrained variables default to `e`.
pub fn parse_term(text: &str) -> Result<Term, TermError> {
    parse_term_with_kind(text, None)
}

/// Like [`parse_term`], checking the term against an expected kind.
pub fn parse_term_with_kind(text: &str, expected: Option<&Kind>) -> Result<Term, TermError> {
    let mut p = TermParser::new(text);
    let raw = p.term()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error("trailing input"));
    }
    infer::annotate(raw, expected)
}

/// Untyped syntax tree produced by the parser.
#[derive(Clone, Debug)]
pub(crate) enum Raw {
    Var(String),
    Lam(String, Option<Kind>, Box<Raw>),
    App(Box<Raw>, Box<Raw>),
    Box(Drs<String>),
    Merge(Box<Raw>, Box<Raw>),
    Presup(Box<Raw>, Box<Raw>),
    Neg(Box<Raw>),
}

struct TermParser {
    chars: Vec<char>,
    pos: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '~' | '-' | '+' | '#')
}

impl TermParser {
    fn new(text: &str) -> Self {
        TermParser {
            chars: text.chars().collect(),
            pos: 0,
        }
    }

    fn error(&self, message: &str) -> TermError {
        TermError::Parse {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<(), TermError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c)))
        }
    }

    fn peek_ident(&mut self) -> Option<String> {
        self.skip_ws();
        let mut end = self.pos;
        while self.chars.get(end).is_some_and(|c| is_ident_char(*c)) {
            end += 1;
        }
        (end > self.pos).then(|| self.chars[self.pos..end].iter().collect())
    }

    fn ident(&mut self) -> Result<String, TermError> {
        let id = self.peek_ident().ok_or_else(|| self.error("expected identifier"))?;
        self.pos += id.chars().count();
        Ok(id)
    }

    /// Keyword followed by `(`, e.g. `presup(`.
    fn at_keyword(&mut self, kw: &str) -> bool {
        if self.peek_ident().as_deref() != Some(kw) {
            return false;
        }
        let mut i = self.pos + kw.chars().count();
        while self.chars.get(i).is_some_and(|c| c.is_whitespace()) {
            i += 1;
        }
        self.chars.get(i) == Some(&'(')
    }

    fn term(&mut self) -> Result<Raw, TermError> {
        match self.peek() {
            Some('\\') | Some('λ') => {
                self.pos += 1;
                let mut binders = Vec::new();
                loop {
                    let name = self.ident()?;
                    let kind = if self.peek() == Some(':') {
                        self.pos += 1;
                        Some(self.kind()?)
                    } else {
                        None
                    };
                    binders.push((name, kind));
                    if self.peek() == Some('.') {
                        self.pos += 1;
                        break;
                    }
                }
                let mut body = self.term()?;
                for (name, kind) in binders.into_iter().rev() {
                    body = Raw::Lam(name, kind, Box::new(body));
                }
                Ok(body)
            }
            _ => self.sequence(),
        }
    }

    fn sequence(&mut self) -> Result<Raw, TermError> {
        let presup = if self.at_keyword("presup") {
            self.ident()?;
            self.expect('(')?;
            let inner = self.term()?;
            self.expect(')')?;
            Some(inner)
        } else {
            None
        };
        let left = match presup {
            Some(p) => {
                if self.peek() == Some(';') {
                    self.pos += 1;
                    let rest = self.term()?;
                    return Ok(Raw::Presup(Box::new(p), Box::new(rest)));
                }
                return Ok(Raw::Presup(Box::new(p), Box::new(Raw::Box(Drs::empty()))));
            }
            None => self.application()?,
        };
        if self.peek() == Some(';') {
            self.pos += 1;
            let right = self.term()?;
            Ok(Raw::Merge(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    fn application(&mut self) -> Result<Raw, TermError> {
        let mut head = self.atom()?;
        while let Some(c) = self.peek() {
            if c == '(' || c == '[' || (is_ident_char(c) && !self.at_keyword("presup")) || c == '\\' || c == 'λ' {
                let arg = if c == '\\' || c == 'λ' { self.term()? } else { self.atom()? };
                head = Raw::App(Box::new(head), Box::new(arg));
            } else {
                break;
            }
        }
        Ok(head)
    }

    fn atom(&mut self) -> Result<Raw, TermError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(')')?;
                Ok(t)
            }
            Some('[') => Ok(Raw::Box(self.drs_box()?)),
            Some(c) if is_ident_char(c) => {
                if self.at_keyword("not") {
                    self.ident()?;
                    self.expect('(')?;
                    let t = self.term()?;
                    self.expect(')')?;
                    return Ok(Raw::Neg(Box::new(t)));
                }
                Ok(Raw::Var(self.ident()?))
            }
            _ => Err(self.error("expected a term")),
        }
    }

    fn kind(&mut self) -> Result<Kind, TermError> {
        let from = match self.peek() {
            Some('(') => {
                self.pos += 1;
                let k = self.kind()?;
                self.expect(')')?;
                k
            }
            Some('e') => {
                self.pos += 1;
                Kind::Ref
            }
            Some('t') => {
                self.pos += 1;
                Kind::Box
            }
            _ => return Err(self.error("expected a kind")),
        };
        self.skip_ws();
        if self.chars.get(self.pos) == Some(&'-') && self.chars.get(self.pos + 1) == Some(&'>') {
            self.pos += 2;
            Ok(Kind::fun(from, self.kind()?))
        } else {
            Ok(from)
        }
    }

    fn drs_box(&mut self) -> Result<Drs<String>, TermError> {
        self.expect('[')?;
        let mut referents = Vec::new();
        while self.peek() != Some(':') {
            referents.push(self.ident()?);
        }
        self.expect(':')?;
        let mut conditions = Vec::new();
        if self.peek() != Some(']') {
            loop {
                conditions.push(self.condition()?);
                if self.peek() == Some(',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(']')?;
        Ok(Drs::new(referents, conditions))
    }

    fn literal(&mut self) -> Result<String, TermError> {
        if self.peek() != Some('"') {
            return self.ident();
        }
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.chars.get(self.pos).copied() {
                None => return Err(self.error("unterminated string")),
                Some('"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some('\\') => {
                    self.pos += 1;
                    if let Some(c) = self.chars.get(self.pos).copied() {
                        out.push(c);
                        self.pos += 1;
                    }
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn condition(&mut self) -> Result<Condition<String>, TermError> {
        if self.peek_ident().as_deref() == Some("not") {
            self.ident()?;
            return Ok(Condition::Not(self.drs_box()?));
        }
        let name = self.ident()?;
        match self.peek() {
            Some('<') => {
                self.pos += 1;
                Ok(Condition::TemporalBefore(name, self.ident()?))
            }
            Some('=') => {
                self.pos += 1;
                Ok(Condition::TemporalEq(name, self.ident()?))
            }
            Some('(') => {
                self.pos += 1;
                let first = self.ident()?;
                let second = if self.peek() == Some(',') {
                    self.pos += 1;
                    Some(if name == "value" { self.literal()? } else { self.ident()? })
                } else {
                    None
                };
                self.expect(')')?;
                match (name.as_str(), second) {
                    ("value", Some(lit)) => Ok(Condition::Value(first, lit)),
                    ("now", None) => Ok(Condition::Now(first)),
                    (_, None) => Ok(Condition::Pred1(name, first)),
                    (_, Some(b)) if name.starts_with(|c: char| c.is_uppercase()) => Ok(Condition::Role(name, first, b)),
                    (_, Some(b)) => Ok(Condition::Pred2(name, first, b)),
                }
            }
            _ => Err(self.error("expected a condition")),
        }
    }
}

mod infer {
    //! Kind inference by first-order unification.

    use super::*;

    #[derive(Clone, Debug, PartialEq)]
    enum K {
        Ref,
        Box,
        Fun(alloc::rc::Rc<K>, alloc::rc::Rc<K>),
        Meta(usize),
    }

    struct Ctx {
        metas: Vec<Option<K>>,
        free: BTreeMap<String, K>,
        referents: BTreeSet<String>,
    }

    impl Ctx {
        fn meta(&mut self) -> K {
            self.metas.push(None);
            K::Meta(self.metas.len() - 1)
        }

        fn resolve(&self, k: &K) -> K {
            match k {
                K::Meta(i) => match &self.metas[*i] {
                    Some(inner) => self.resolve(inner),
                    None => k.clone(),
                },
                K::Fun(a, b) => K::Fun(alloc::rc::Rc::new(self.resolve(a)), alloc::rc::Rc::new(self.resolve(b))),
                other => other.clone(),
            }
        }

        fn occurs(&self, i: usize, k: &K) -> bool {
            match self.resolve(k) {
                K::Meta(j) => i == j,
                K::Fun(a, b) => self.occurs(i, &a) || self.occurs(i, &b),
                _ => false,
            }
        }

        fn unify(&mut self, a: &K, b: &K, context: &str) -> Result<(), TermError> {
            let (a, b) = (self.resolve(a), self.resolve(b));
            match (&a, &b) {
                (K::Meta(i), K::Meta(j)) if i == j => Ok(()),
                (K::Meta(i), other) | (other, K::Meta(i)) => {
                    if self.occurs(*i, other) {
                        return Err(self.mismatch(&a, &b, context));
                    }
                    self.metas[*i] = Some(other.clone());
                    Ok(())
                }
                (K::Ref, K::Ref) | (K::Box, K::Box) => Ok(()),
                (K::Fun(a1, b1), K::Fun(a2, b2)) => {
                    self.unify(a1, a2, context)?;
                    self.unify(b1, b2, context)
                }
                _ => Err(self.mismatch(&a, &b, context)),
            }
        }

        fn mismatch(&self, a: &K, b: &K, context: &str) -> TermError {
            TermError::Kind {
                context: context.to_string(),
                expected: self.ground(a),
                found: self.ground(b),
            }
        }

        /// Unresolved metavariables default to `e`.
        fn ground(&self, k: &K) -> Kind {
            match self.resolve(k) {
                K::Ref | K::Meta(_) => Kind::Ref,
                K::Box => Kind::Box,
                K::Fun(a, b) => Kind::fun(self.ground(&a), self.ground(&b)),
            }
        }
    }

    fn lift(k: &Kind) -> K {
        match k {
            Kind::Ref => K::Ref,
            Kind::Box => K::Box,
            Kind::Fun(a, b) => K::Fun(alloc::rc::Rc::new(lift(a)), alloc::rc::Rc::new(lift(b))),
        }
    }

    fn collect_referents(r: &Raw, out: &mut BTreeSet<String>) {
        match r {
            Raw::Box(d) => out.extend(d.declared()),
            Raw::Var(_) => {}
            Raw::Lam(_, _, b) | Raw::Neg(b) => collect_referents(b, out),
            Raw::App(a, b) | Raw::Merge(a, b) | Raw::Presup(a, b) => {
                collect_referents(a, out);
                collect_referents(b, out);
            }
        }
    }

    /// Kind-annotated tree with metavariables still in place.
    enum Typed {
        Var(String, K),
        Lam(String, K, alloc::boxed::Box<Typed>),
        App(alloc::boxed::Box<Typed>, alloc::boxed::Box<Typed>),
        Box(Drs<String>),
        Merge(alloc::boxed::Box<Typed>, alloc::boxed::Box<Typed>),
        Presup(alloc::boxed::Box<Typed>, alloc::boxed::Box<Typed>),
        Neg(alloc::boxed::Box<Typed>),
    }

    fn walk(r: &Raw, env: &mut Vec<(String, K)>, ctx: &mut Ctx) -> Result<(Typed, K), TermError> {
        match r {
            Raw::Var(name) => {
                let k = if let Some((_, k)) = env.iter().rev().find(|(n, _)| n == name) {
                    k.clone()
                } else if ctx.referents.contains(name) {
                    K::Ref
                } else if let Some(k) = ctx.free.get(name) {
                    k.clone()
                } else {
                    let m = ctx.meta();
                    ctx.free.insert(name.clone(), m.clone());
                    m
                };
                Ok((Typed::Var(name.clone(), k.clone()), k))
            }
            Raw::Lam(name, annot, body) => {
                let k = match annot {
                    Some(k) => lift(k),
                    None => ctx.meta(),
                };
                env.push((name.clone(), k.clone()));
                let (tb, kb) = walk(body, env, ctx)?;
                env.pop();
                let fk = K::Fun(alloc::rc::Rc::new(k.clone()), alloc::rc::Rc::new(kb));
                Ok((Typed::Lam(name.clone(), k, alloc::boxed::Box::new(tb)), fk))
            }
            Raw::App(f, a) => {
                let (tf, kf) = walk(f, env, ctx)?;
                let (ta, ka) = walk(a, env, ctx)?;
                let result = ctx.meta();
                let want = K::Fun(alloc::rc::Rc::new(ka), alloc::rc::Rc::new(result.clone()));
                ctx.unify(&kf, &want, "application")?;
                Ok((Typed::App(alloc::boxed::Box::new(tf), alloc::boxed::Box::new(ta)), result))
            }
            Raw::Box(d) => {
                // λ-bound names used as referents must be of kind e.
                for name in d.free_refs() {
                    if let Some((_, k)) = env.iter().rev().find(|(n, _)| *n == name) {
                        let k = k.clone();
                        ctx.unify(&k, &K::Ref, "referent position")?;
                    }
                }
                Ok((Typed::Box(d.clone()), K::Box))
            }
            Raw::Merge(a, b) | Raw::Presup(a, b) => {
                let (ta, ka) = walk(a, env, ctx)?;
                ctx.unify(&ka, &K::Box, "merge operand")?;
                let (tb, kb) = walk(b, env, ctx)?;
                ctx.unify(&kb, &K::Box, "merge operand")?;
                let (ta, tb) = (alloc::boxed::Box::new(ta), alloc::boxed::Box::new(tb));
                Ok((if matches!(r, Raw::Merge(..)) { Typed::Merge(ta, tb) } else { Typed::Presup(ta, tb) }, K::Box))
            }
            Raw::Neg(b) => {
                let (tb, kb) = walk(b, env, ctx)?;
                ctx.unify(&kb, &K::Box, "negation")?;
                Ok((Typed::Neg(alloc::boxed::Box::new(tb)), K::Box))
            }
        }
    }

    fn finish(t: Typed, ctx: &Ctx) -> Result<Term, TermError> {
        Ok(match t {
            Typed::Var(n, k) => Term::Var(Var::new(n, ctx.ground(&k))),
            Typed::Lam(n, k, b) => {
                let kind = ctx.ground(&k);
                if !kind.is_admissible() {
                    return Err(TermError::Inadmissible { name: n, kind });
                }
                Term::Lam(Var::new(n, kind), Box::new(finish(*b, ctx)?))
            }
            Typed::App(a, b) => Term::app(finish(*a, ctx)?, finish(*b, ctx)?),
            Typed::Box(d) => Term::DrsLit(d),
            Typed::Merge(a, b) => Term::merge(finish(*a, ctx)?, finish(*b, ctx)?),
            Typed::Presup(a, b) => Term::presup(finish(*a, ctx)?, finish(*b, ctx)?),
            Typed::Neg(b) => Term::neg(finish(*b, ctx)?),
        })
    }

    fn result_metas(k: &K, ctx: &Ctx, in_result: bool, out: &mut BTreeSet<usize>) {
        match ctx.resolve(k) {
            K::Meta(i) if in_result => {
                out.insert(i);
            }
            K::Fun(a, b) => {
                result_metas(&a, ctx, false, out);
                result_metas(&b, ctx, true, out);
            }
            _ => {}
        }
    }

    fn typed_result_metas(t: &Typed, ctx: &Ctx, out: &mut BTreeSet<usize>) {
        match t {
            Typed::Var(_, k) => result_metas(k, ctx, false, out),
            Typed::Lam(_, k, b) => {
                result_metas(k, ctx, false, out);
                typed_result_metas(b, ctx, out);
            }
            Typed::Box(_) => {}
            Typed::Neg(b) => typed_result_metas(b, ctx, out),
            Typed::App(a, b) | Typed::Merge(a, b) | Typed::Presup(a, b) => {
                typed_result_metas(a, ctx, out);
                typed_result_metas(b, ctx, out);
            }
        }
    }

    pub(super) fn annotate(raw: Raw, expected: Option<&Kind>) -> Result<Term, TermError> {
        let mut referents = BTreeSet::new();
        collect_referents(&raw, &mut referents);
        let mut ctx = Ctx {
            metas: Vec::new(),
            free: BTreeMap::new(),
            referents,
        };
        let (typed, k) = walk(&raw, &mut Vec::new(), &mut ctx)?;
        if let Some(exp) = expected {
            ctx.unify(&lift(exp), &k, "term")?;
        }
        // Open results of functions can only be boxes.
        let mut results = BTreeSet::new();
        result_metas(&k, &ctx, false, &mut results);
        typed_result_metas(&typed, &ctx, &mut results);
        for i in results {
            ctx.unify(&K::Meta(i), &K::Box, "result")?;
        }
        finish(typed, &ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn parse(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn identity_application() {
        let d = Drs::new(vec!["x".to_string()], vec![Condition::Pred1("male".into(), "x".to_string())]);
        let t = Term::app(Term::identity(Kind::Box), Term::DrsLit(d.clone()));
        assert_eq!(beta_reduce(&t).unwrap(), Term::DrsLit(d));
    }

    #[test]
    fn kinds_are_inferred() {
        let t = parse("\\p. presup([x: male(x)]) ; p x");
        assert_eq!(t.kind().unwrap(), Kind::quantifier());
        let came = parse("\\G p. G (\\x. [e t1 t2: come(e), Theme(e,x), Time(e,t2), now(t1), t2 < t1] ; p e)");
        assert_eq!(came.kind().unwrap(), Kind::fun(Kind::quantifier(), Kind::quantifier()));
    }

    #[test]
    fn print_parse_round_trip() {
        for src in [
            "\\p. presup([x: male(x)]) ; p x",
            "\\V G p. V G (\\x. [s: Manner(x,s), back(s)] ; p x)",
            "\\p q. [x:] ; (p x ; q x)",
            "\\x. [: time(x), value(x,\"17:00\")]",
            "\\V G p. not(V G p)",
        ] {
            let t = parse(src);
            let again = parse(&t.to_string());
            assert_eq!(t, again, "{}", src);
        }
    }

    #[test]
    fn expected_kind_is_checked() {
        let err = parse_term_with_kind("\\x. [: time(x)]", Some(&Kind::quantifier())).unwrap_err();
        assert!(matches!(err, TermError::Kind { .. }));
    }

    #[test]
    fn substitution_avoids_lambda_capture() {
        // (\y. \x. y x)  with y := x  must not capture
        let t = parse("\\y:e->t. \\x. y x");
        let Term::Lam(_, body) = &t else { panic!() };
        let out = substitute(body, "y", &Term::var("x", Kind::property())).unwrap();
        let Term::Lam(v, inner) = &out else { panic!() };
        assert_ne!(v.name, "x");
        assert!(inner.free_vars().contains("x"));
    }

    #[test]
    fn substitution_renames_box_declarations_with_their_scope() {
        // [x: a(x)] ; p y   with y := x: the box must not capture the new x
        let t = parse("[x: a(x)] ; p y ; b(x)".replace("b(x)", "[: b(x)]").as_str());
        let out = substitute(&t, "y", &Term::var("x", Kind::Ref)).unwrap();
        assert!(out.free_vars().contains("x"));
        let Term::Merge(a, rest) = &out else { panic!() };
        let declared = a.exported();
        assert!(!declared.contains("x"));
        // the trailing box still refers to the renamed declaration
        let Term::Merge(_, last) = &**rest else { panic!() };
        assert_eq!(last.free_vars(), declared);
        assert_eq!(out.free_vars(), ["p".to_string(), "x".to_string()].into_iter().collect());
    }

    #[test]
    fn applying_a_box_is_a_kind_error() {
        let t = Term::app(Term::empty_box(), Term::var("x", Kind::Ref));
        assert!(matches!(beta_reduce(&t), Err(TermError::NotAFunction(_))));
    }

    #[test]
    fn presupposition_is_hoisted() {
        let he = parse("\\p. presup([x: male(x)]) ; p x");
        let t = Term::app(he, parse("\\y. [e: come(e), Theme(e,y)]"));
        let d = resolve_presuppositions(&t).unwrap();
        let expected = crate::drs::Drs::new(
            vec![Ref::x(1), Ref::e(1)],
            vec![
                Condition::Pred1("male".into(), Ref::x(1)),
                Condition::Pred1("come".into(), Ref::e(1)),
                Condition::Role("Theme".into(), Ref::e(1), Ref::x(1)),
            ],
        );
        assert!(crate::drs::drs_alpha_equal(&d, &expected));
    }

    #[test]
    fn unreduced_lambda_is_incomplete() {
        let t = parse("\\p. [x: male(x)] ; p x");
        assert!(matches!(resolve_presuppositions(&t), Err(TermError::CompositionIncomplete(_))));
    }

    #[test]
    fn flatten_renames_redeclared_referents() {
        let t = parse("[x: a(x)] ; [x: b(x)] ; [: c(x)]");
        let Term::DrsLit(d) = beta_reduce(&t).unwrap() else { panic!() };
        assert_eq!(d.referents.len(), 2);
        // c refers to the second declaration
        let second = &d.referents[1];
        assert!(d.conditions.contains(&Condition::Pred1("c".into(), second.clone())));
    }

    #[test]
    fn reduce_step_agrees_with_normalize() {
        let t = parse("(\\G p. G (\\x. [e: come(e), Theme(e,x)] ; p e)) (\\p. presup([x: male(x)]) ; p x) (\\e. [:])");
        let mut cur = t.clone();
        while let Some(next) = reduce_step(&cur).unwrap() {
            cur = next;
        }
        assert!(cur.alpha_eq(&normalize(&t).unwrap()));
    }

    #[test]
    fn freshen_keeps_alpha_class() {
        let t = parse("\\p. presup([x: male(x)]) ; p x");
        let mut c = 10;
        let f = t.freshen(&mut c);
        assert!(t.alpha_eq(&f));
        assert!(f.exported().is_empty());
        assert!(!f.all_names().contains("x"));
    }

    #[test]
    fn category_kinds() {
        let at = crate::category::parse_category("((S\\NP)\\(S\\NP))/NP").unwrap();
        let q = Kind::quantifier();
        let vp = Kind::fun(q.clone(), q.clone());
        assert_eq!(category_kind(&at), Kind::fun(q, Kind::fun(vp.clone(), vp)));
        assert!(category_kind(&at).is_admissible());
    }
}
