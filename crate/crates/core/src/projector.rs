//! Transfer of source-language annotations onto aligned translations.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::category::{Category, Slash};
use crate::composer::{compose, ComposeError};
use crate::drs::{drs_alpha_equal, Drs, Ref};
use crate::parser::{DerivNode, EmptyElement, Lexical, ParseConfig, ParseError, Parser, Rule};
use crate::semtagger::TagSet;
use crate::symbolizer::{is_literal_tag, symbolize_traced, Producer, SymbolResources};
use crate::term::{category_kind, Kind, Term};
use crate::token::{Lang, Token, TokenAnnotation};

/// Semtag given to helper tokens that carry no meaning of their own.
pub const HELPER_SEMTAG: &str = "NIL";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SentencePair {
    pub source: Vec<TokenAnnotation>,
    pub derivation: DerivNode,
    pub drs: Drs<Ref>,
    pub target: Vec<Token>,
    pub target_lang: Lang,
    /// `(source index, target index)`; may be partial.
    pub alignment: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct ProjectConfig<'a> {
    pub tagset: &'a TagSet,
    pub resources: &'a SymbolResources,
    pub inventory: Vec<EmptyElement>,
    pub crossed_composition: bool,
    /// Compare the target DRS against the source one.
    pub verify: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FailReason {
    AlignmentOutOfRange { source: usize, target: usize },
    UnalignedSource(usize),
    ManyToOne { target: usize, sources: Vec<usize> },
    NoTargetTokens,
    NoDerivation(ParseError),
    Compose(ComposeError),
    DrsMismatch,
}

impl fmt::Display for FailReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailReason::AlignmentOutOfRange { source, target } => {
                write!(f, "alignment pair {}-{} is out of range", source, target)
            }
            FailReason::UnalignedSource(i) => write!(f, "source token {} has no counterpart", i),
            FailReason::ManyToOne { target, sources } => {
                write!(f, "target token {} is aligned to {} source tokens", target, sources.len())
            }
            FailReason::NoTargetTokens => write!(f, "target sentence is empty"),
            FailReason::NoDerivation(e) => write!(f, "no target derivation: {}", e),
            FailReason::Compose(e) => write!(f, "target composition failed: {}", e),
            FailReason::DrsMismatch => write!(f, "target DRS differs from the source DRS"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProjectionStatus {
    Verified,
    Unverified,
    Failed(FailReason),
}

impl fmt::Display for ProjectionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectionStatus::Verified => f.write_str("Verified"),
            ProjectionStatus::Unverified => f.write_str("Unverified"),
            ProjectionStatus::Failed(r) => write!(f, "Failed: {}", r),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectionResult {
    pub tokens: Vec<TokenAnnotation>,
    pub derivation: Option<DerivNode>,
    pub drs: Option<Drs<Ref>>,
    pub status: ProjectionStatus,
}

impl ProjectionResult {
    fn failed(tokens: Vec<TokenAnnotation>, reason: FailReason) -> ProjectionResult {
        ProjectionResult {
            tokens,
            derivation: None,
            drs: None,
            status: ProjectionStatus::Failed(reason),
        }
    }
}

/// One-to-one sentence alignment in order, unless an override is given.
pub fn align_sentences<S, T>(source: &[S], target: &[T], overriding: Option<&[(usize, usize)]>) -> Vec<(usize, usize)> {
    match overriding {
        Some(pairs) => pairs.to_vec(),
        None => (0..source.len().min(target.len())).map(|k| (k, k)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignmentError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for AlignmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl core::error::Error for AlignmentError {}

/// Parses `i-j` pairs, one sentence pair per line.
pub fn parse_alignment_file(text: &str) -> Result<Vec<Vec<(usize, usize)>>, AlignmentError> {
    text.lines()
        .enumerate()
        .map(|(n, line)| parse_alignment_line(line, n + 1))
        .collect()
}

/// Parses one line of `i-j` pairs; `line_no` is used in errors.
pub fn parse_alignment_line(line: &str, line_no: usize) -> Result<Vec<(usize, usize)>, AlignmentError> {
    let mut out = Vec::new();
    let mut col = 0usize;
    for piece in line.split(' ') {
        let column = col + 1;
        col += piece.chars().count() + 1;
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let err = |message: &str| AlignmentError {
            line: line_no,
            column,
            message: alloc::format!("{}: {:?}", message, piece),
        };
        if piece.starts_with('-') || piece.contains("--") {
            return Err(err("negative index"));
        }
        let (a, b) = piece.split_once('-').ok_or_else(|| err("expected i-j"))?;
        let a: usize = a.parse().map_err(|_| err("bad source index"))?;
        let b: usize = b.parse().map_err(|_| err("bad target index"))?;
        out.push((a, b));
    }
    Ok(out)
}

/// Edit distance over chars.
fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != *cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

// Slash bookkeeping: every functor node of every leaf category gets an id;
// combinatory rules identify ids positionally.
#[derive(Clone, Debug)]
enum Shape {
    Atom,
    Fun(alloc::boxed::Box<Shape>, usize, alloc::boxed::Box<Shape>),
}

struct Slashes {
    parent: Vec<usize>,
}

impl Slashes {
    fn shape(&mut self, c: &Category) -> Shape {
        match c.as_functor() {
            None => Shape::Atom,
            Some((r, _, a)) => {
                let id = self.parent.len();
                self.parent.push(id);
                let r = self.shape(r);
                let a = self.shape(a);
                Shape::Fun(alloc::boxed::Box::new(r), id, alloc::boxed::Box::new(a))
            }
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn unify(&mut self, a: &Shape, b: &Shape) {
        if let (Shape::Fun(r1, i, a1), Shape::Fun(r2, j, a2)) = (a, b) {
            let (x, y) = (self.find(*i), self.find(*j));
            if x != y {
                self.parent[y] = x;
            }
            self.unify(r1, r2);
            self.unify(a1, a2);
        }
    }
}

struct Event {
    slash: usize,
    functor: Vec<usize>,
    argument: Vec<usize>,
}

struct Walk<'a> {
    slashes: Slashes,
    events: Vec<Event>,
    leaf_shapes: BTreeMap<usize, Shape>,
    targets: &'a [Vec<usize>],
}

impl Walk<'_> {
    /// Returns the node's shape and the target positions it covers.
    fn node(&mut self, n: &DerivNode) -> (Shape, Vec<usize>) {
        match n.rule {
            Rule::Lexical => {
                let s = self.slashes.shape(&n.category);
                self.leaf_shapes.insert(n.span.0, s.clone());
                (s, self.targets.get(n.span.0).cloned().unwrap_or_default())
            }
            Rule::EmptyLexical => (self.slashes.shape(&n.category), Vec::new()),
            rule => {
                let (ls, lt) = self.node(&n.children[0]);
                let (rs, rt) = self.node(&n.children[1]);
                let mut all = lt.clone();
                all.extend(rt.iter().copied());
                let shape = match (rule, &ls, &rs) {
                    (Rule::ForwardApp, Shape::Fun(x, k, y), _) => {
                        self.slashes.unify(y, &rs);
                        self.push(*k, lt, rt);
                        (**x).clone()
                    }
                    (Rule::BackwardApp, _, Shape::Fun(x, k, y)) => {
                        self.slashes.unify(y, &ls);
                        self.push(*k, rt, lt);
                        (**x).clone()
                    }
                    (Rule::ForwardComp | Rule::CrossedBackwardComp, Shape::Fun(x, k, y), Shape::Fun(y2, m, z)) => {
                        self.slashes.unify(y, y2);
                        self.push(*k, lt, rt);
                        Shape::Fun(x.clone(), *m, z.clone())
                    }
                    (Rule::BackwardComp, Shape::Fun(y2, m, z), Shape::Fun(x, k, y)) => {
                        self.slashes.unify(y, y2);
                        self.push(*k, rt, lt);
                        Shape::Fun(x.clone(), *m, z.clone())
                    }
                    _ => self.slashes.shape(&n.category),
                };
                (shape, all)
            }
        }
    }

    fn push(&mut self, slash: usize, functor: Vec<usize>, argument: Vec<usize>) {
        self.events.push(Event {
            slash,
            functor,
            argument,
        });
    }
}

fn rebuild(c: &Category, shape: &Shape, dirs: &BTreeMap<usize, Slash>, slashes: &mut Slashes) -> Category {
    match (c.as_functor(), shape) {
        (Some((r, s, a)), Shape::Fun(rs, id, as_)) => {
            let root = slashes.find(*id);
            let slash = dirs.get(&root).copied().unwrap_or(s);
            Category::functor(rebuild(r, rs, dirs, slashes), slash, rebuild(a, as_, dirs, slashes))
        }
        _ => c.clone(),
    }
}

/// Target categories for each source token, with slashes flipped where the
/// target order of a functor and its argument is inverted.
pub fn flipped_categories(deriv: &DerivNode, n_source: usize, targets: &[Vec<usize>]) -> Vec<Category> {
    let mut walk = Walk {
        slashes: Slashes {
            parent: Vec::new(),
        },
        events: Vec::new(),
        leaf_shapes: BTreeMap::new(),
        targets,
    };
    walk.node(deriv);
    let mut dirs: BTreeMap<usize, Slash> = BTreeMap::new();
    let events = core::mem::take(&mut walk.events);
    for ev in events {
        let (Some(fmin), Some(fmax)) = (ev.functor.iter().min(), ev.functor.iter().max()) else {
            continue;
        };
        let (Some(amin), Some(amax)) = (ev.argument.iter().min(), ev.argument.iter().max()) else {
            continue;
        };
        let dir = if amax < fmin {
            Slash::Backward
        } else if amin > fmax {
            Slash::Forward
        } else {
            continue;
        };
        let root = walk.slashes.find(ev.slash);
        dirs.entry(root).or_insert(dir);
    }
    let mut out = Vec::with_capacity(n_source);
    for leaf in deriv.leaves() {
        if leaf.rule != Rule::Lexical {
            continue;
        }
        let shape = walk.leaf_shapes.get(&leaf.span.0).cloned().unwrap_or(Shape::Atom);
        out.push(rebuild(&leaf.category, &shape, &dirs, &mut walk.slashes));
    }
    out
}

fn helper(index: usize, token: &Token, head: &Category, slash: Slash) -> TokenAnnotation {
    let category = Category::functor(head.clone(), slash, head.clone());
    let kind: Kind = category_kind(head);
    TokenAnnotation {
        token: Token { id: index, ..token.clone() },
        semtag: HELPER_SEMTAG.to_string(),
        symbol: None,
        category,
        lexsem: Term::identity(kind),
    }
}

fn target_symbol(source: &TokenAnnotation, surface: &str, lang: Lang, cfg: &ProjectConfig<'_>) -> Option<String> {
    if cfg.tagset.is_symbol_free(&source.semtag) {
        return None;
    }
    // the same word form keeps its symbol
    if surface.to_lowercase() == source.token.surface.to_lowercase() && source.symbol.is_some() {
        return source.symbol.clone();
    }
    let traced = symbolize_traced(surface, &source.semtag, lang, cfg.tagset, cfg.resources, None);
    let weak = match &traced {
        None => true,
        Some(s) => matches!(s.producer, Producer::SuffixLemma | Producer::LowercaseIdentity),
    };
    if is_literal_tag(&source.semtag) && weak && source.symbol.is_some() {
        return source.symbol.clone();
    }
    traced.map(|s| s.symbol).or_else(|| source.symbol.clone())
}

/// Projects a fully annotated source sentence onto its translation.
pub fn project(pair: &SentencePair, cfg: &ProjectConfig<'_>) -> ProjectionResult {
    let n_src = pair.source.len();
    let n_tgt = pair.target.len();
    if n_tgt == 0 {
        return ProjectionResult::failed(Vec::new(), FailReason::NoTargetTokens);
    }
    let mut targets: Vec<Vec<usize>> = vec![Vec::new(); n_src];
    let mut sources: Vec<Vec<usize>> = vec![Vec::new(); n_tgt];
    for &(s, t) in &pair.alignment {
        if s >= n_src || t >= n_tgt {
            return ProjectionResult::failed(Vec::new(), FailReason::AlignmentOutOfRange { source: s, target: t });
        }
        if !targets[s].contains(&t) {
            targets[s].push(t);
            sources[t].push(s);
        }
    }
    for t in targets.iter_mut() {
        t.sort_unstable();
    }
    if let Some(i) = targets.iter().position(|t| t.is_empty()) {
        return ProjectionResult::failed(Vec::new(), FailReason::UnalignedSource(i));
    }
    if let Some(j) = sources.iter().position(|s| s.len() > 1) {
        let mut srcs = sources[j].clone();
        srcs.sort_unstable();
        return ProjectionResult::failed(Vec::new(), FailReason::ManyToOne { target: j, sources: srcs });
    }

    let cats = flipped_categories(&pair.derivation, n_src, &targets);
    let mut slots: Vec<Option<TokenAnnotation>> = vec![None; n_tgt];
    for (i, src) in pair.source.iter().enumerate() {
        let cat = cats.get(i).cloned().unwrap_or_else(|| src.category.clone());
        let tgts = &targets[i];
        let surface = src.token.surface.to_lowercase();
        let distance = |j: usize| {
            let t = pair.target[j].surface.to_lowercase();
            let d = levenshtein(&t, &surface);
            match &src.symbol {
                Some(sym) => d.min(levenshtein(&t, sym)),
                None => d,
            }
        };
        let head = *tgts.iter().min_by_key(|&&j| (distance(j), j)).expect("aligned");
        for &j in tgts {
            let tok = &pair.target[j];
            if j != head {
                let slash = if j < head { Slash::Forward } else { Slash::Backward };
                slots[j] = Some(helper(j, tok, &cat, slash));
                continue;
            }
            let symbol = target_symbol(src, &tok.surface, pair.target_lang, cfg);
            let lexsem = match (&src.symbol, &symbol) {
                (Some(a), Some(b)) if a != b => {
                    src.lexsem.map_symbols(&|s: &str| if s == a { Some(b.clone()) } else { None })
                }
                _ => src.lexsem.clone(),
            };
            slots[j] = Some(TokenAnnotation {
                token: Token { id: j, ..tok.clone() },
                semtag: src.semtag.clone(),
                symbol,
                category: cat.clone(),
                lexsem,
            });
        }
    }
    // unaligned target tokens modify a neighbour
    for j in (0..n_tgt).rev() {
        if slots[j].is_none() {
            if let Some(Some(right)) = slots.get(j + 1) {
                let c = right.category.clone();
                slots[j] = Some(helper(j, &pair.target[j], &c, Slash::Forward));
            }
        }
    }
    for j in 0..n_tgt {
        if slots[j].is_none() && j > 0 {
            if let Some(left) = &slots[j - 1] {
                let c = left.category.clone();
                slots[j] = Some(helper(j, &pair.target[j], &c, Slash::Backward));
            }
        }
    }
    let tokens: Vec<TokenAnnotation> = slots.into_iter().flatten().collect();
    if tokens.len() != n_tgt {
        return ProjectionResult::failed(tokens, FailReason::NoTargetTokens);
    }

    let parser = Parser::new(
        ParseConfig {
            goal: pair.derivation.category.clone(),
            crossed_composition: cfg.crossed_composition,
            max_insertions: None,
        },
        cfg.inventory.clone(),
    );
    let derivation = match parser.parse(&tokens) {
        Ok(d) => d,
        Err(e) => return ProjectionResult::failed(tokens, FailReason::NoDerivation(e)),
    };
    let drs = match compose(&derivation) {
        Ok(d) => d,
        Err(e) => {
            return ProjectionResult {
                tokens,
                derivation: Some(derivation),
                drs: None,
                status: ProjectionStatus::Failed(FailReason::Compose(e)),
            }
        }
    };
    let status = if !cfg.verify {
        ProjectionStatus::Unverified
    } else if drs_alpha_equal(&pair.drs, &drs) {
        ProjectionStatus::Verified
    } else {
        ProjectionStatus::Failed(FailReason::DrsMismatch)
    };
    ProjectionResult {
        tokens,
        derivation: Some(derivation),
        drs: Some(drs),
        status,
    }
}

/// Lexical entries of a derivation in token order.
pub fn leaf_annotations(deriv: &DerivNode) -> Vec<TokenAnnotation> {
    deriv
        .leaves()
        .into_iter()
        .filter_map(|l| match &l.lexical {
            Some(Lexical::Token(t)) => Some(t.clone()),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::parse_category;
    use crate::composer::{default_inventory, lexical_semantics, RoleLexicon, Templates};
    use crate::semtagger::default_tagset;

    fn c(s: &str) -> Category {
        parse_category(s).unwrap()
    }

    fn annotate(words: &[(&str, &str, Option<&str>, &str)]) -> Vec<TokenAnnotation> {
        let tpl = Templates::builtin();
        let roles = RoleLexicon::default();
        words
            .iter()
            .enumerate()
            .map(|(i, (w, tag, sym, cat))| {
                let category = c(cat);
                TokenAnnotation {
                    token: Token::bare(i, w),
                    semtag: tag.to_string(),
                    symbol: sym.map(|s| s.to_string()),
                    lexsem: lexical_semantics(tag, &category, *sym, &tpl, &roles).unwrap(),
                    category,
                }
            })
            .collect()
    }

    fn source(words: &[(&str, &str, Option<&str>, &str)]) -> (Vec<TokenAnnotation>, DerivNode, Drs<Ref>) {
        let toks = annotate(words);
        let parser = Parser::new(ParseConfig::default(), default_inventory(&Templates::builtin()));
        let d = parser.parse(&toks).unwrap();
        let drs = compose(&d).unwrap();
        (toks, d, drs)
    }

    fn german() -> SymbolResources {
        let mut r = SymbolResources::new();
        for (w, s, t) in [("kam", "come", "EPS"), ("zurück", "back", "IST"), ("um", "at", "REL")] {
            r.add_gazetteer(Lang::De, w, s, Some(t));
        }
        r
    }

    fn fig2() -> Vec<(&'static str, &'static str, Option<&'static str>, &'static str)> {
        vec![
            ("He", "PRO", Some("male"), "NP"),
            ("came", "EPS", Some("come"), "S\\NP"),
            ("back", "IST", Some("back"), "(S\\NP)\\(S\\NP)"),
            ("at", "REL", Some("at"), "((S\\NP)\\(S\\NP))/NP"),
            ("5~o'clock", "CLO", Some("17:00"), "N"),
        ]
    }

    #[test]
    fn german_projection_verifies() {
        let (toks, deriv, drs) = source(&fig2());
        let pair = SentencePair {
            source: toks,
            derivation: deriv,
            drs,
            target: Token::from_surfaces("Er kam um fünf~Uhr zurück"),
            target_lang: Lang::De,
            alignment: vec![(0, 0), (1, 1), (2, 4), (3, 2), (4, 3)],
        };
        let tagset = default_tagset();
        let res = german();
        let cfg = ProjectConfig {
            tagset: &tagset,
            resources: &res,
            inventory: default_inventory(&Templates::builtin()),
            crossed_composition: true,
            verify: true,
        };
        let out = project(&pair, &cfg);
        assert_eq!(out.status, ProjectionStatus::Verified, "{:?}", out.tokens);
        let cats: Vec<String> = out.tokens.iter().map(|t| t.category.to_string()).collect();
        assert_eq!(cats, ["NP", "S\\NP", "((S\\NP)\\(S\\NP))/NP", "N", "(S\\NP)\\(S\\NP)"]);
        let syms: Vec<Option<&str>> = out.tokens.iter().map(|t| t.symbol.as_deref()).collect();
        assert_eq!(syms, [Some("male"), Some("come"), Some("at"), Some("17:00"), Some("back")]);
    }

    #[test]
    fn identity_projection_reproduces_derivation() {
        let (toks, deriv, drs) = source(&fig2());
        let target: Vec<Token> = toks.iter().map(|t| t.token.clone()).collect();
        let n = toks.len();
        let pair = SentencePair {
            source: toks,
            derivation: deriv.clone(),
            drs,
            target,
            target_lang: Lang::En,
            alignment: (0..n).map(|i| (i, i)).collect(),
        };
        let tagset = default_tagset();
        let res = SymbolResources::new();
        let cfg = ProjectConfig {
            tagset: &tagset,
            resources: &res,
            inventory: default_inventory(&Templates::builtin()),
            crossed_composition: false,
            verify: true,
        };
        let out = project(&pair, &cfg);
        assert_eq!(out.status, ProjectionStatus::Verified);
        assert!(out.derivation.unwrap().same_shape(&deriv));
    }

    #[test]
    fn reordering_flips_and_flips_back() {
        let (toks, deriv, drs) = source(&[("He", "PRO", Some("male"), "NP"), ("came", "EPS", Some("come"), "S\\NP")]);
        let tagset = default_tagset();
        let res = SymbolResources::new();
        let cfg = ProjectConfig {
            tagset: &tagset,
            resources: &res,
            inventory: default_inventory(&Templates::builtin()),
            crossed_composition: false,
            verify: true,
        };
        let pair = SentencePair {
            source: toks.clone(),
            derivation: deriv,
            drs: drs.clone(),
            target: Token::from_surfaces("came he"),
            target_lang: Lang::En,
            alignment: vec![(0, 1), (1, 0)],
        };
        let out = project(&pair, &cfg);
        assert_eq!(out.status, ProjectionStatus::Verified);
        assert_eq!(out.tokens[0].category, c("S/NP"));
        let back = SentencePair {
            source: out.tokens.clone(),
            derivation: out.derivation.unwrap(),
            drs: out.drs.unwrap(),
            target: Token::from_surfaces("He came"),
            target_lang: Lang::En,
            alignment: vec![(0, 1), (1, 0)],
        };
        let again = project(&back, &cfg);
        assert_eq!(again.status, ProjectionStatus::Verified);
        let cats: Vec<Category> = again.tokens.iter().map(|t| t.category.clone()).collect();
        assert_eq!(cats, toks.iter().map(|t| t.category.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn split_gets_identity_helper() {
        let (toks, deriv, drs) = source(&[
            ("a", "DIS", None, "NP/N"),
            ("dog", "CON", Some("dog"), "N"),
            ("slept", "EPS", Some("sleep"), "S\\NP"),
        ]);
        let tagset = default_tagset();
        let res = SymbolResources::new();
        let cfg = ProjectConfig {
            tagset: &tagset,
            resources: &res,
            inventory: default_inventory(&Templates::builtin()),
            crossed_composition: false,
            verify: true,
        };
        let pair = SentencePair {
            source: toks,
            derivation: deriv,
            drs,
            target: Token::from_surfaces("a big dog slept"),
            target_lang: Lang::En,
            alignment: vec![(0, 0), (1, 1), (1, 2), (2, 3)],
        };
        let out = project(&pair, &cfg);
        assert_eq!(out.status, ProjectionStatus::Verified);
        assert_eq!(out.tokens[1].category, c("N/N"));
        assert_eq!(out.tokens[2].category, c("N"));
        assert_eq!(out.tokens[1].semtag, HELPER_SEMTAG);
    }

    #[test]
    fn unaligned_and_many_to_one_fail() {
        let (toks, deriv, drs) = source(&[("He", "PRO", Some("male"), "NP"), ("came", "EPS", Some("come"), "S\\NP")]);
        let tagset = default_tagset();
        let res = SymbolResources::new();
        let cfg = ProjectConfig {
            tagset: &tagset,
            resources: &res,
            inventory: Vec::new(),
            crossed_composition: false,
            verify: true,
        };
        let mut pair = SentencePair {
            source: toks,
            derivation: deriv,
            drs,
            target: Token::from_surfaces("hecame"),
            target_lang: Lang::En,
            alignment: vec![(0, 0), (1, 0)],
        };
        assert!(matches!(project(&pair, &cfg).status, ProjectionStatus::Failed(FailReason::ManyToOne { .. })));
        pair.alignment = vec![(0, 0)];
        assert_eq!(project(&pair, &cfg).status, ProjectionStatus::Failed(FailReason::UnalignedSource(1)));
        // an extra target word becomes a modifier of its neighbour
        pair.target = Token::from_surfaces("he indeed came");
        pair.alignment = vec![(0, 0), (1, 2)];
        let out = project(&pair, &cfg);
        assert_eq!(out.status, ProjectionStatus::Verified);
        assert_eq!(out.tokens[1].category, c("(S\\NP)/(S\\NP)"));
    }

    #[test]
    fn sentence_alignment() {
        assert_eq!(align_sentences(&[1, 2, 3], &[1, 2, 3], None), vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(align_sentences(&[1, 2], &[1, 2, 3], None), vec![(0, 0), (1, 1)]);
        assert_eq!(align_sentences(&[1, 2], &[1, 2], Some(&[(0, 1), (1, 0)])), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn alignment_files() {
        assert_eq!(parse_alignment_file("0-0 1-1").unwrap(), vec![vec![(0, 0), (1, 1)]]);
        assert!(parse_alignment_file("").unwrap().is_empty());
        assert_eq!(parse_alignment_file("3-1 0-0 3-2").unwrap(), vec![vec![(3, 1), (0, 0), (3, 2)]]);
        let e = parse_alignment_file("0-0\n1-1 -2-3").unwrap_err();
        assert_eq!((e.line, e.column), (2, 5));
        let e = parse_alignment_file("0-0 1x1").unwrap_err();
        assert_eq!((e.line, e.column), (1, 5));
        assert!(parse_alignment_file("1--2").is_err());
    }

    #[test]
    fn edit_distance() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("uhr", "uhr"), 0);
    }
}
