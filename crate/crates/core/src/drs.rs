//! Discourse Representation Structures: boxes of referents and conditions,
//! merging, alpha-equivalence and the clausal text format.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Individual,
    Event,
    State,
    Time,
}

impl Sort {
    pub fn prefix(self) -> char {
        match self {
            Sort::Individual => 'x',
            Sort::Event => 'e',
            Sort::State => 's',
            Sort::Time => 't',
        }
    }

    /// Sort named by the first letter of a referent name.
    pub fn from_name(name: &str) -> Sort {
        match name.chars().next() {
            Some('e') => Sort::Event,
            Some('s') => Sort::State,
            Some('t') => Sort::Time,
            _ => Sort::Individual,
        }
    }
}

/// A grounded discourse referent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ref {
    pub sort: Sort,
    pub index: u32,
}

impl Ref {
    pub fn new(sort: Sort, index: u32) -> Ref {
        Ref { sort, index }
    }

    pub fn x(index: u32) -> Ref {
        Ref::new(Sort::Individual, index)
    }

    pub fn e(index: u32) -> Ref {
        Ref::new(Sort::Event, index)
    }

    pub fn s(index: u32) -> Ref {
        Ref::new(Sort::State, index)
    }

    pub fn t(index: u32) -> Ref {
        Ref::new(Sort::Time, index)
    }

    pub fn parse(text: &str) -> Option<Ref> {
        let mut chars = text.chars();
        let sort = match chars.next()? {
            'x' => Sort::Individual,
            'e' => Sort::Event,
            's' => Sort::State,
            't' => Sort::Time,
            _ => return None,
        };
        let digits = chars.as_str();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Some(Ref::new(sort, digits.parse().ok()?))
    }
}

impl fmt::Display for Ref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sort.prefix(), self.index)
    }
}

/// Anything that can stand for a discourse referent inside a box.
pub trait Referent: Clone + Ord + fmt::Debug {
    fn sort(&self) -> Sort;

    /// A referent of the same sort that does not occur in `avoid`.
    fn fresh(&self, avoid: &BTreeSet<Self>) -> Self;
}

impl Referent for Ref {
    fn sort(&self) -> Sort {
        self.sort
    }

    fn fresh(&self, avoid: &BTreeSet<Self>) -> Self {
        let mut index = 1;
        loop {
            let candidate = Ref::new(self.sort, index);
            if !avoid.contains(&candidate) {
                return candidate;
            }
            index += 1;
        }
    }
}

impl Referent for String {
    fn sort(&self) -> Sort {
        Sort::from_name(self)
    }

    fn fresh(&self, avoid: &BTreeSet<Self>) -> Self {
        let stem: String = self.chars().take_while(|c| !c.is_ascii_digit()).collect();
        let mut index = 1usize;
        loop {
            let candidate = format!("{}{}", stem, index);
            if !avoid.contains(&candidate) {
                return candidate;
            }
            index += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Condition<R = Ref> {
    Pred1(String, R),
    Pred2(String, R, R),
    Role(String, R, R),
    /// `a < b`
    TemporalBefore(R, R),
    TemporalEq(R, R),
    Value(R, String),
    Now(R),
    Not(Drs<R>),
}

impl<R: Referent> Condition<R> {
    /// Referents mentioned directly by this condition (not inside a nested box).
    pub fn args(&self) -> Vec<&R> {
        match self {
            Condition::Pred1(_, a) | Condition::Value(a, _) | Condition::Now(a) => alloc::vec![a],
            Condition::Pred2(_, a, b)
            | Condition::Role(_, a, b)
            | Condition::TemporalBefore(a, b)
            | Condition::TemporalEq(a, b) => alloc::vec![a, b],
            Condition::Not(_) => Vec::new(),
        }
    }

    pub fn map_refs<S: Referent>(&self, f: &mut impl FnMut(&R) -> S) -> Condition<S> {
        match self {
            Condition::Pred1(p, a) => Condition::Pred1(p.clone(), f(a)),
            Condition::Pred2(p, a, b) => Condition::Pred2(p.clone(), f(a), f(b)),
            Condition::Role(p, a, b) => Condition::Role(p.clone(), f(a), f(b)),
            Condition::TemporalBefore(a, b) => Condition::TemporalBefore(f(a), f(b)),
            Condition::TemporalEq(a, b) => Condition::TemporalEq(f(a), f(b)),
            Condition::Value(a, v) => Condition::Value(f(a), v.clone()),
            Condition::Now(a) => Condition::Now(f(a)),
            Condition::Not(d) => Condition::Not(d.map_refs(f)),
        }
    }

    /// Shape of the condition with referents erased; used to prune matching.
    fn signature(&self) -> (u8, &str) {
        match self {
            Condition::Pred1(p, _) => (0, p),
            Condition::Pred2(p, _, _) => (1, p),
            Condition::Role(p, _, _) => (2, p),
            Condition::TemporalBefore(..) => (3, ""),
            Condition::TemporalEq(..) => (4, ""),
            Condition::Value(_, v) => (5, v),
            Condition::Now(_) => (6, ""),
            Condition::Not(_) => (7, ""),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Drs<R = Ref> {
    pub referents: Vec<R>,
    pub conditions: Vec<Condition<R>>,
}

impl<R> Default for Drs<R> {
    fn default() -> Self {
        Drs {
            referents: Vec::new(),
            conditions: Vec::new(),
        }
    }
}

impl<R: Referent> Drs<R> {
    pub fn new(referents: Vec<R>, conditions: Vec<Condition<R>>) -> Self {
        Drs {
            referents,
            conditions,
        }
    }

    pub fn empty() -> Self {
        Drs::default()
    }

    pub fn is_empty(&self) -> bool {
        self.referents.is_empty() && self.conditions.is_empty()
    }

    pub fn map_refs<S: Referent>(&self, f: &mut impl FnMut(&R) -> S) -> Drs<S> {
        Drs {
            referents: self.referents.iter().map(&mut *f).collect(),
            conditions: self.conditions.iter().map(|c| c.map_refs(f)).collect(),
        }
    }

    /// Every referent declared by this box or any nested box.
    pub fn declared(&self) -> BTreeSet<R> {
        let mut out = BTreeSet::new();
        self.collect_declared(&mut out);
        out
    }

    fn collect_declared(&self, out: &mut BTreeSet<R>) {
        out.extend(self.referents.iter().cloned());
        for c in &self.conditions {
            if let Condition::Not(d) = c {
                d.collect_declared(out);
            }
        }
    }

    /// Every referent mentioned anywhere, declared or not.
    pub fn all_refs(&self) -> BTreeSet<R> {
        let mut out = BTreeSet::new();
        self.collect_all(&mut out);
        out
    }

    fn collect_all(&self, out: &mut BTreeSet<R>) {
        out.extend(self.referents.iter().cloned());
        for c in &self.conditions {
            match c {
                Condition::Not(d) => d.collect_all(out),
                other => out.extend(other.args().into_iter().cloned()),
            }
        }
    }

    /// Referents mentioned but not bound by this box or an enclosing one.
    pub fn free_refs(&self) -> BTreeSet<R> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut BTreeSet::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut BTreeSet<R>, out: &mut BTreeSet<R>) {
        let added: Vec<R> = self
            .referents
            .iter()
            .filter(|r| bound.insert((*r).clone()))
            .cloned()
            .collect();
        for c in &self.conditions {
            match c {
                Condition::Not(d) => d.collect_free(bound, out),
                other => {
                    for a in other.args() {
                        if !bound.contains(a) {
                            out.insert(a.clone());
                        }
                    }
                }
            }
        }
        for r in added {
            bound.remove(&r);
        }
    }

    /// Renames referents according to `renaming`; others are kept.
    pub fn rename(&self, renaming: &BTreeMap<R, R>) -> Drs<R> {
        self.map_refs(&mut |r| renaming.get(r).cloned().unwrap_or_else(|| r.clone()))
    }

    /// Number of referents declared at any depth.
    pub fn referent_count(&self) -> usize {
        let nested: usize = self
            .conditions
            .iter()
            .map(|c| match c {
                Condition::Not(d) => d.referent_count(),
                _ => 0,
            })
            .sum();
        self.referents.len() + nested
    }
}

/// Sequential merge (`a ; b`): referents are unioned and conditions
/// concatenated. Referents declared in `b` that already occur in `a` are
/// renamed apart first, so the result has no duplicate referents.
pub fn merge<R: Referent>(a: &Drs<R>, b: &Drs<R>) -> Drs<R> {
    let in_a = a.all_refs();
    let mut avoid: BTreeSet<R> = in_a.union(&b.all_refs()).cloned().collect();
    let mut renaming = BTreeMap::new();
    for r in b.declared() {
        if in_a.contains(&r) {
            let fresh = r.fresh(&avoid);
            avoid.insert(fresh.clone());
            renaming.insert(r, fresh);
        }
    }
    let b = if renaming.is_empty() {
        b.clone()
    } else {
        b.rename(&renaming)
    };
    let mut out = a.clone();
    for r in b.referents {
        if !out.referents.contains(&r) {
            out.referents.push(r);
        }
    }
    out.conditions.extend(b.conditions);
    out
}

/// Equality up to a sort-preserving renaming of declared referents; the
/// condition lists are compared as multisets. Referents that are free in
/// both structures must match literally.
pub fn drs_alpha_equal<R: Referent>(a: &Drs<R>, b: &Drs<R>) -> bool {
    if a.referent_count() != b.referent_count() {
        return false;
    }
    let mut avoid: BTreeSet<R> = a.all_refs().union(&b.all_refs()).cloned().collect();
    let a = uniquify(a, &mut avoid, &mut BTreeMap::new());
    let b = uniquify(b, &mut avoid, &mut BTreeMap::new());
    let mut state = MatchState {
        map: BTreeMap::new(),
        image: BTreeSet::new(),
        level_a: BTreeMap::new(),
        level_b: BTreeMap::new(),
        depth: 0,
    };
    match_box(&a, &b, &mut state, &mut |_| true)
}

/// Gives every declaration a name of its own so that no two boxes declare
/// the same referent.
fn uniquify<R: Referent>(d: &Drs<R>, avoid: &mut BTreeSet<R>, scope: &mut BTreeMap<R, R>) -> Drs<R> {
    let mut saved = Vec::new();
    let mut referents = Vec::new();
    for r in &d.referents {
        let fresh = r.fresh(avoid);
        avoid.insert(fresh.clone());
        saved.push((r.clone(), scope.insert(r.clone(), fresh.clone())));
        referents.push(fresh);
    }
    let conditions = d
        .conditions
        .iter()
        .map(|c| match c {
            Condition::Not(inner) => Condition::Not(uniquify(inner, avoid, scope)),
            other => other.map_refs(&mut |r| scope.get(r).cloned().unwrap_or_else(|| r.clone())),
        })
        .collect();
    for (r, prev) in saved.into_iter().rev() {
        match prev {
            Some(p) => scope.insert(r, p),
            None => scope.remove(&r),
        };
    }
    Drs::new(referents, conditions)
}

struct MatchState<R> {
    map: BTreeMap<R, R>,
    image: BTreeSet<R>,
    /// Box nesting depth at which each referent in scope was declared.
    level_a: BTreeMap<R, usize>,
    level_b: BTreeMap<R, usize>,
    depth: usize,
}

impl<R: Referent> MatchState<R> {
    /// Tries to make `ra` correspond to `rb`; returns whether a new pair was
    /// recorded (so the caller can undo it).
    fn bind(&mut self, ra: &R, rb: &R) -> Option<bool> {
        if let Some(existing) = self.map.get(ra) {
            return (existing == rb).then_some(false);
        }
        match (self.level_a.get(ra), self.level_b.get(rb)) {
            (Some(la), Some(lb)) => {
                if la != lb || ra.sort() != rb.sort() || self.image.contains(rb) {
                    return None;
                }
                self.map.insert(ra.clone(), rb.clone());
                self.image.insert(rb.clone());
                Some(true)
            }
            (None, None) => (ra == rb).then_some(false),
            _ => None,
        }
    }

    fn unbind(&mut self, ra: &R) {
        if let Some(rb) = self.map.remove(ra) {
            self.image.remove(&rb);
        }
    }
}

fn sort_counts<R: Referent>(refs: &[R]) -> [usize; 4] {
    let mut counts = [0; 4];
    for r in refs {
        counts[r.sort() as usize] += 1;
    }
    counts
}

fn match_box<R: Referent>(
    a: &Drs<R>,
    b: &Drs<R>,
    st: &mut MatchState<R>,
    k: &mut dyn FnMut(&mut MatchState<R>) -> bool,
) -> bool {
    if a.conditions.len() != b.conditions.len()
        || sort_counts(&a.referents) != sort_counts(&b.referents)
    {
        return false;
    }
    let mut sig_a: Vec<_> = a.conditions.iter().map(Condition::signature).collect();
    let mut sig_b: Vec<_> = b.conditions.iter().map(Condition::signature).collect();
    sig_a.sort_unstable();
    sig_b.sort_unstable();
    if sig_a != sig_b {
        return false;
    }

    st.depth += 1;
    let depth = st.depth;
    // Declarations are unique (see `uniquify`), so nothing is shadowed.
    for r in &a.referents {
        st.level_a.insert(r.clone(), depth);
    }
    for r in &b.referents {
        st.level_b.insert(r.clone(), depth);
    }
    let mut used = alloc::vec![false; b.conditions.len()];
    let result = match_conditions(&a.conditions, &b.conditions, 0, &mut used, st, k);
    for r in &a.referents {
        st.level_a.remove(r);
    }
    for r in &b.referents {
        st.level_b.remove(r);
    }
    st.depth -= 1;
    result
}

fn match_conditions<R: Referent>(
    ca: &[Condition<R>],
    cb: &[Condition<R>],
    i: usize,
    used: &mut Vec<bool>,
    st: &mut MatchState<R>,
    k: &mut dyn FnMut(&mut MatchState<R>) -> bool,
) -> bool {
    if i == ca.len() {
        return k(st);
    }
    let cond = &ca[i];
    for j in 0..cb.len() {
        if used[j] || cond.signature() != cb[j].signature() {
            continue;
        }
        used[j] = true;
        let found = match (cond, &cb[j]) {
            (Condition::Not(da), Condition::Not(db)) => match_box(da, db, st, &mut |st| {
                match_conditions(ca, cb, i + 1, used, st, k)
            }),
            _ => {
                let args_a = cond.args();
                let args_b = cb[j].args();
                let mut recorded = Vec::new();
                let mut ok = true;
                for (ra, rb) in args_a.iter().zip(args_b.iter()) {
                    match st.bind(ra, rb) {
                        Some(true) => recorded.push((*ra).clone()),
                        Some(false) => {}
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                let found = ok && match_conditions(ca, cb, i + 1, used, st, k);
                for r in recorded {
                    st.unbind(&r);
                }
                found
            }
        };
        used[j] = false;
        if found {
            return true;
        }
    }
    false
}

/// Renames the referents of a structure to `x1, e1, ...` per sort, in order
/// of declaration (pre-order), then of first free mention.
pub fn canonical_refs<R: Referent>(d: &Drs<R>) -> Drs<Ref> {
    let mut names: BTreeMap<R, Ref> = BTreeMap::new();
    let mut next = [1u32; 4];
    let mut order = Vec::new();
    collect_declared_in_order(d, &mut order);
    for c in d.all_refs() {
        if !order.contains(&c) {
            order.push(c);
        }
    }
    for r in order {
        names.entry(r.clone()).or_insert_with(|| {
            let sort = r.sort();
            let idx = next[sort as usize];
            next[sort as usize] += 1;
            Ref::new(sort, idx)
        });
    }
    d.map_refs(&mut |r| names[r])
}

fn collect_declared_in_order<R: Referent>(d: &Drs<R>, out: &mut Vec<R>) {
    for r in &d.referents {
        if !out.contains(r) {
            out.push(r.clone());
        }
    }
    for c in &d.conditions {
        if let Condition::Not(inner) = c {
            collect_declared_in_order(inner, out);
        }
    }
}

/// Writes a DRS in the clausal format, one clause per line. Boxes are
/// numbered `b1, b2, ...` in pre-order.
pub fn to_clausal(d: &Drs<Ref>) -> String {
    let mut out = String::new();
    let mut next = 1;
    write_box(d, &mut next, &mut out);
    out
}

fn write_box(d: &Drs<Ref>, next: &mut usize, out: &mut String) {
    let id = *next;
    *next += 1;
    let mut nested = Vec::new();
    for r in &d.referents {
        let _ = writeln!(out, "b{} REF {}", id, r);
    }
    for c in &d.conditions {
        let _ = match c {
            Condition::Pred1(p, a) => writeln!(out, "b{} {} {}", id, p, a),
            Condition::Pred2(p, a, b) => writeln!(out, "b{} {} {} {}", id, p, a, b),
            Condition::Role(p, a, b) => writeln!(out, "b{} Role {} {} {}", id, p, a, b),
            Condition::TemporalBefore(a, b) => writeln!(out, "b{} LT {} {}", id, a, b),
            Condition::TemporalEq(a, b) => writeln!(out, "b{} EQ {} {}", id, a, b),
            Condition::Now(a) => writeln!(out, "b{} NOW {}", id, a),
            Condition::Value(a, v) => writeln!(out, "b{} Value {} \"{}\"", id, a, escape(v)),
            Condition::Not(inner) => {
                // The nested box takes the next free id once all of this
                // box's clauses are written; reserve it now.
                let child = *next + nested_ids(&nested);
                nested.push(inner);
                writeln!(out, "b{} NOT b{}", id, child)
            }
        };
    }
    for inner in nested {
        write_box(inner, next, out);
    }
}

fn nested_ids(boxes: &[&Drs<Ref>]) -> usize {
    boxes.iter().map(|d| box_count(d)).sum()
}

fn box_count(d: &Drs<Ref>) -> usize {
    1 + d
        .conditions
        .iter()
        .map(|c| match c {
            Condition::Not(inner) => box_count(inner),
            _ => 0,
        })
        .sum::<usize>()
}

fn escape(v: &str) -> String {
    let mut out = String::with_capacity(v.len());
    for c in v.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClausalError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ClausalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "clausal line {}: {}", self.line, self.message)
    }
}

impl core::error::Error for ClausalError {}

/// Reads the clausal format back. The root is the box with the smallest id.
pub fn from_clausal(text: &str) -> Result<Drs<Ref>, ClausalError> {
    let mut boxes: BTreeMap<usize, (Vec<Ref>, Vec<Clause>)> = BTreeMap::new();
    let mut children = BTreeSet::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        let err = |message: &str| ClausalError {
            line,
            message: message.to_string(),
        };
        let (head, rest) = raw.split_once(' ').ok_or_else(|| err("missing operator"))?;
        let id = parse_box_id(head).ok_or_else(|| err("bad box id"))?;
        let entry = boxes.entry(id).or_default();
        let (op, args) = match rest.split_once(' ') {
            Some((op, args)) => (op, args),
            None => return Err(err("missing arguments")),
        };
        let reference = |s: &str| Ref::parse(s).ok_or_else(|| err("bad referent"));
        match op {
            "REF" => entry.0.push(reference(args.trim())?),
            "Value" => {
                let (r, lit) = args.split_once(' ').ok_or_else(|| err("missing literal"))?;
                let lit = lit.trim();
                if lit.len() < 2 || !lit.starts_with('"') || !lit.ends_with('"') {
                    return Err(err("unquoted literal"));
                }
                entry
                    .1
                    .push(Clause::Cond(Condition::Value(reference(r)?, unescape(&lit[1..lit.len() - 1]))));
            }
            "NOT" => {
                let child = parse_box_id(args.trim()).ok_or_else(|| err("bad box id"))?;
                children.insert(child);
                entry.1.push(Clause::Not(child));
            }
            _ => {
                let parts: Vec<&str> = args.split_whitespace().collect();
                let cond = match (op, parts.as_slice()) {
                    ("Role", [name, a, b]) => {
                        Condition::Role(name.to_string(), reference(a)?, reference(b)?)
                    }
                    ("LT", [a, b]) => Condition::TemporalBefore(reference(a)?, reference(b)?),
                    ("EQ", [a, b]) => Condition::TemporalEq(reference(a)?, reference(b)?),
                    ("NOW", [a]) => Condition::Now(reference(a)?),
                    (sym, [a]) => Condition::Pred1(sym.to_string(), reference(a)?),
                    (sym, [a, b]) => Condition::Pred2(sym.to_string(), reference(a)?, reference(b)?),
                    _ => return Err(err("wrong number of arguments")),
                };
                entry.1.push(Clause::Cond(cond));
            }
        }
    }
    let Some(&root) = boxes.keys().find(|id| !children.contains(id)) else {
        return if boxes.is_empty() {
            Ok(Drs::empty())
        } else {
            Err(ClausalError {
                line: 0,
                message: "no root box".to_string(),
            })
        };
    };
    let mut visiting = BTreeSet::new();
    build_box(root, &boxes, &mut visiting)
}

enum Clause {
    Cond(Condition<Ref>),
    Not(usize),
}

impl Default for Clause {
    fn default() -> Self {
        Clause::Not(0)
    }
}

fn build_box(
    id: usize,
    boxes: &BTreeMap<usize, (Vec<Ref>, Vec<Clause>)>,
    visiting: &mut BTreeSet<usize>,
) -> Result<Drs<Ref>, ClausalError> {
    if !visiting.insert(id) {
        return Err(ClausalError {
            line: 0,
            message: format!("box b{} is nested in itself", id),
        });
    }
    let empty = (Vec::new(), Vec::new());
    let (refs, clauses) = boxes.get(&id).unwrap_or(&empty);
    let mut conditions = Vec::new();
    for clause in clauses {
        match clause {
            Clause::Cond(c) => conditions.push(c.clone()),
            Clause::Not(child) => conditions.push(Condition::Not(build_box(*child, boxes, visiting)?)),
        }
    }
    visiting.remove(&id);
    Ok(Drs::new(refs.clone(), conditions))
}

fn parse_box_id(s: &str) -> Option<usize> {
    s.strip_prefix('b')?.parse().ok()
}

fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(n) = chars.next() {
                out.push(n);
            }
        } else {
            out.push(c);
        }
    }
    out
}

impl<R: Referent + fmt::Display> fmt::Display for Drs<R> {
    /// Linear box notation: `[x1 e1: come(e1), Theme(e1,x1)]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, r) in self.referents.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", r)?;
        }
        f.write_str(":")?;
        for (i, c) in self.conditions.iter().enumerate() {
            f.write_str(if i == 0 { " " } else { ", " })?;
            write!(f, "{}", c)?;
        }
        f.write_str("]")
    }
}

impl<R: Referent + fmt::Display> fmt::Display for Condition<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Pred1(p, a) => write!(f, "{}({})", p, a),
            Condition::Pred2(p, a, b) | Condition::Role(p, a, b) => write!(f, "{}({},{})", p, a, b),
            Condition::TemporalBefore(a, b) => write!(f, "{} < {}", a, b),
            Condition::TemporalEq(a, b) => write!(f, "{} = {}", a, b),
            Condition::Value(a, v) => write!(f, "value({},\"{}\")", a, escape(v)),
            Condition::Now(a) => write!(f, "now({})", a),
            Condition::Not(d) => write!(f, "not {}", d),
        }
    }
}
