//! CKY parsing of supertagged tokens with combinatory rules and
//! zero-length empty elements.
//!
//! The chart runs over `2n + 1` units: even units are the gaps between
//! tokens (each may host one empty element), odd units are the tokens.
//! Every chart item starts and ends at a filled unit; an unfilled gap
//! between two items is skipped.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use crate::category::{Category, Slash};
use crate::term::Term;
use crate::token::TokenAnnotation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Lexical,
    EmptyLexical,
    ForwardApp,
    BackwardApp,
    ForwardComp,
    BackwardComp,
    /// `X/Y  Y\Z  =>  X\Z`
    CrossedBackwardComp,
}

impl Rule {
    pub fn is_composition(self) -> bool {
        matches!(self, Rule::ForwardComp | Rule::BackwardComp | Rule::CrossedBackwardComp)
    }

    /// Short name used in derivation files.
    pub fn code(self) -> &'static str {
        match self {
            Rule::Lexical => "lex",
            Rule::EmptyLexical => "empty",
            Rule::ForwardApp => "fa",
            Rule::BackwardApp => "ba",
            Rule::ForwardComp => "fc",
            Rule::BackwardComp => "bc",
            Rule::CrossedBackwardComp => "bxc",
        }
    }

    pub fn from_code(code: &str) -> Option<Rule> {
        Some(match code {
            "lex" => Rule::Lexical,
            "empty" => Rule::EmptyLexical,
            "fa" => Rule::ForwardApp,
            "ba" => Rule::BackwardApp,
            "fc" => Rule::ForwardComp,
            "bc" => Rule::BackwardComp,
            "bxc" => Rule::CrossedBackwardComp,
            _ => return None,
        })
    }
}

/// Every binary rule instance licensed for two adjacent categories.
pub fn combine(left: &Category, right: &Category, crossed: bool) -> Vec<(Rule, Category)> {
    let mut out = Vec::new();
    if let Some((x, Slash::Forward, y)) = left.as_functor() {
        if y.unifies(right) {
            out.push((Rule::ForwardApp, x.clone()));
        }
        if let Some((y2, slash, z)) = right.as_functor() {
            if y.unifies(y2) {
                match slash {
                    Slash::Forward => out.push((Rule::ForwardComp, Category::fwd(x.clone(), z.clone()))),
                    Slash::Backward if crossed => {
                        out.push((Rule::CrossedBackwardComp, Category::bwd(x.clone(), z.clone())))
                    }
                    Slash::Backward => {}
                }
            }
        }
    }
    if let Some((x, Slash::Backward, y)) = right.as_functor() {
        if y.unifies(left) {
            out.push((Rule::BackwardApp, x.clone()));
        }
        if let Some((y2, Slash::Backward, z)) = left.as_functor() {
            if y.unifies(y2) {
                out.push((Rule::BackwardComp, Category::bwd(x.clone(), z.clone())));
            }
        }
    }
    out
}

/// An empty element that may be inserted between tokens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmptyElement {
    pub category: Category,
    pub semtag: String,
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lexical {
    Token(TokenAnnotation),
    Empty(EmptyElement),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivNode {
    /// Token index range; empty for inserted elements.
    pub span: (usize, usize),
    pub category: Category,
    pub rule: Rule,
    pub children: Vec<DerivNode>,
    pub lexical: Option<Lexical>,
}

impl DerivNode {
    pub fn leaves(&self) -> Vec<&DerivNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a DerivNode>) {
        if self.children.is_empty() {
            out.push(self);
        }
        for c in &self.children {
            c.collect_leaves(out);
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(|c| c.size()).sum::<usize>()
    }

    pub fn insertions(&self) -> usize {
        self.leaves().iter().filter(|l| l.rule == Rule::EmptyLexical).count()
    }

    /// Same tree ignoring lexical payloads.
    pub fn same_shape(&self, other: &DerivNode) -> bool {
        self.span == other.span
            && self.category == other.category
            && self.rule == other.rule
            && self.children.len() == other.children.len()
            && self.children.iter().zip(&other.children).all(|(a, b)| a.same_shape(b))
    }
}

/// Soundness check: each node's category is its rule's output and spans
/// tile the sentence.
pub fn check(deriv: &DerivNode, crossed: bool) -> bool {
    check_node(deriv, crossed) && deriv.span.0 == 0
}

fn check_node(node: &DerivNode, crossed: bool) -> bool {
    match node.rule {
        Rule::Lexical => {
            node.children.is_empty()
                && node.span.1 == node.span.0 + 1
                && match &node.lexical {
                    Some(Lexical::Token(t)) => t.category == node.category,
                    None => true,
                    Some(Lexical::Empty(_)) => false,
                }
        }
        Rule::EmptyLexical => {
            node.children.is_empty()
                && node.span.0 == node.span.1
                && match &node.lexical {
                    Some(Lexical::Empty(e)) => e.category == node.category,
                    None => true,
                    Some(Lexical::Token(_)) => false,
                }
        }
        rule => {
            let [l, r] = node.children.as_slice() else {
                return false;
            };
            l.span.1 == r.span.0
                && node.span == (l.span.0, r.span.1)
                && combine(&l.category, &r.category, crossed).contains(&(rule, node.category.clone()))
                && check_node(l, crossed)
                && check_node(r, crossed)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseConfig {
    pub goal: Category,
    pub crossed_composition: bool,
    /// Upper bound on inserted empty elements.
    pub max_insertions: Option<usize>,
}

impl Default for ParseConfig {
    fn default() -> Self {
        ParseConfig {
            goal: Category::s(),
            crossed_composition: false,
            max_insertions: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseError {
    EmptyInput,
    /// No derivation reaches the goal; lists the maximal covered token spans
    /// with the categories found there.
    NoParse { covered: Vec<((usize, usize), Vec<Category>)> },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::EmptyInput => f.write_str("nothing to parse"),
            ParseError::NoParse { covered } => {
                f.write_str("no derivation reaches the goal; largest covered spans:")?;
                for ((a, b), cats) in covered {
                    write!(f, " [{},{})", a, b)?;
                    for c in cats {
                        write!(f, " {}", c)?;
                    }
                    f.write_str(";")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for ParseError {}

/// Lexicographic preference: fewer insertions, fewer compositions, then
/// smaller left children (right branching).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Score {
    pub insertions: u16,
    pub compositions: u16,
    pub left_weight: u32,
}

#[derive(Clone, Copy, Debug)]
enum Back {
    Token(usize),
    Empty(usize, usize),
    Pair {
        rule: Rule,
        left: (usize, usize, usize),
        right: (usize, usize, usize),
    },
}

#[derive(Clone, Copy, Debug)]
struct Item {
    cat: u32,
    score: Score,
    leaves: u32,
    back: Back,
}

/// Category interning plus a memo of rule applications.
#[derive(Default)]
struct Table {
    cats: Vec<Category>,
    ids: BTreeMap<Category, u32>,
    rules: BTreeMap<(u32, u32), (usize, usize)>,
    flat: Vec<(Rule, u32)>,
}

impl Table {
    fn intern(&mut self, c: &Category) -> u32 {
        if let Some(id) = self.ids.get(c) {
            return *id;
        }
        let id = self.cats.len() as u32;
        self.cats.push(c.clone());
        self.ids.insert(c.clone(), id);
        id
    }

    /// Range of `flat` holding the results for a pair.
    fn combine(&mut self, l: u32, r: u32, crossed: bool) -> (usize, usize) {
        if let Some(range) = self.rules.get(&(l, r)) {
            return *range;
        }
        let found = combine(&self.cats[l as usize].clone(), &self.cats[r as usize].clone(), crossed);
        let start = self.flat.len();
        for (rule, c) in &found {
            let id = self.intern(c);
            self.flat.push((*rule, id));
        }
        let range = (start, self.flat.len());
        self.rules.insert((l, r), range);
        range
    }
}

/// Reusable parser; caches rule applications across sentences.
pub struct Parser {
    pub config: ParseConfig,
    pub inventory: Vec<EmptyElement>,
    table: RefCell<Table>,
}

/// Result of parsing bare categories: the tree refers to leaves by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Skeleton {
    Token { index: usize, category: Category },
    Empty { gap: usize, entry: usize, category: Category },
    Node { rule: Rule, category: Category, span: (usize, usize), children: [alloc::boxed::Box<Skeleton>; 2] },
}

impl Skeleton {
    pub fn category(&self) -> &Category {
        match self {
            Skeleton::Token { category, .. } | Skeleton::Empty { category, .. } | Skeleton::Node { category, .. } => category,
        }
    }

    pub fn insertions(&self) -> usize {
        match self {
            Skeleton::Token { .. } => 0,
            Skeleton::Empty { .. } => 1,
            Skeleton::Node { children, .. } => children[0].insertions() + children[1].insertions(),
        }
    }
}

impl Parser {
    pub fn new(config: ParseConfig, inventory: Vec<EmptyElement>) -> Parser {
        Parser {
            config,
            inventory,
            table: RefCell::new(Table::default()),
        }
    }

    /// Best derivation over bare categories, with its score.
    pub fn parse_categories(&self, cats: &[Category]) -> Result<(Skeleton, Score), ParseError> {
        let n = cats.len();
        if n == 0 {
            return Err(ParseError::EmptyInput);
        }
        let mut table = self.table.borrow_mut();
        let crossed = self.config.crossed_composition;
        let max_ins = self.config.max_insertions.unwrap_or(usize::MAX).min(u16::MAX as usize) as u16;
        let units = 2 * n + 1;
        let idx = |a: usize, b: usize| a * (units + 1) + b;
        let mut chart: Vec<Vec<Item>> = vec![Vec::new(); (units + 1) * (units + 1)];
        let inv_ids: Vec<u32> = self.inventory.iter().map(|e| table.intern(&e.category)).collect();
        for (i, c) in cats.iter().enumerate() {
            let u = 2 * i + 1;
            let id = table.intern(c);
            chart[idx(u, u + 1)].push(Item {
                cat: id,
                score: Score {
                    insertions: 0,
                    compositions: 0,
                    left_weight: 0,
                },
                leaves: 1,
                back: Back::Token(i),
            });
        }
        if max_ins > 0 {
            for g in 0..=n {
                let u = 2 * g;
                let cell = &mut chart[idx(u, u + 1)];
                for (k, id) in inv_ids.iter().enumerate() {
                    if cell.iter().any(|it| it.cat == *id) {
                        continue;
                    }
                    cell.push(Item {
                        cat: *id,
                        score: Score {
                            insertions: 1,
                            compositions: 0,
                            left_weight: 0,
                        },
                        leaves: 1,
                        back: Back::Empty(g, k),
                    });
                }
            }
        }
        for len in 2..=units {
            for a in 0..=units - len {
                let b = a + len;
                let mut cell: Vec<Item> = Vec::new();
                for m in a + 1..b {
                    let lcell = idx(a, m);
                    if chart[lcell].is_empty() {
                        continue;
                    }
                    let starts: &[usize] = if m % 2 == 0 && m + 1 < b { &[m, m + 1] } else { &[m] };
                    for &r in starts {
                        let rcell = idx(r, b);
                        if chart[rcell].is_empty() {
                            continue;
                        }
                        for (li, l) in chart[lcell].iter().enumerate() {
                            for (ri, rt) in chart[rcell].iter().enumerate() {
                                let ins = l.score.insertions + rt.score.insertions;
                                if ins > max_ins {
                                    continue;
                                }
                                let (from, to) = table.combine(l.cat, rt.cat, crossed);
                                for k in from..to {
                                    let (rule, cat) = table.flat[k];
                                    let score = Score {
                                        insertions: ins,
                                        compositions: l.score.compositions
                                            + rt.score.compositions
                                            + rule.is_composition() as u16,
                                        left_weight: l.score.left_weight + rt.score.left_weight + l.leaves,
                                    };
                                    let item = Item {
                                        cat,
                                        score,
                                        leaves: l.leaves + rt.leaves,
                                        back: Back::Pair {
                                            rule,
                                            left: (a, m, li),
                                            right: (r, b, ri),
                                        },
                                    };
                                    match cell.iter_mut().find(|it| it.cat == cat) {
                                        Some(existing) if existing.score <= score => {}
                                        Some(existing) => *existing = item,
                                        None => cell.push(item),
                                    }
                                }
                            }
                        }
                    }
                }
                chart[idx(a, b)] = cell;
            }
        }
        let goal = &self.config.goal;
        let mut best: Option<(usize, usize, usize, Score)> = None;
        for a in [0, 1] {
            for b in [units - 1, units] {
                if a >= b {
                    continue;
                }
                for (k, it) in chart[idx(a, b)].iter().enumerate() {
                    if table.cats[it.cat as usize].unifies(goal) && best.is_none_or(|(_, _, _, s)| it.score < s) {
                        best = Some((a, b, k, it.score));
                    }
                }
            }
        }
        match best {
            Some((a, b, k, score)) => {
                let tree = build(&chart, &table.cats, &idx, a, b, k, &self.inventory);
                Ok((tree, score))
            }
            None => Err(no_parse(&chart, &table.cats, &idx, units)),
        }
    }

    /// Best derivation for annotated tokens.
    pub fn parse(&self, tokens: &[TokenAnnotation]) -> Result<DerivNode, ParseError> {
        let cats: Vec<Category> = tokens.iter().map(|t| t.category.clone()).collect();
        let (skel, _) = self.parse_categories(&cats)?;
        Ok(self.attach(&skel, tokens))
    }

    fn attach(&self, skel: &Skeleton, tokens: &[TokenAnnotation]) -> DerivNode {
        match skel {
            Skeleton::Token { index, category } => DerivNode {
                span: (*index, index + 1),
                category: category.clone(),
                rule: Rule::Lexical,
                children: Vec::new(),
                lexical: Some(Lexical::Token(tokens[*index].clone())),
            },
            Skeleton::Empty { gap, entry, category } => DerivNode {
                span: (*gap, *gap),
                category: category.clone(),
                rule: Rule::EmptyLexical,
                children: Vec::new(),
                lexical: Some(Lexical::Empty(self.inventory[*entry].clone())),
            },
            Skeleton::Node {
                rule,
                category,
                span,
                children,
            } => DerivNode {
                span: *span,
                category: category.clone(),
                rule: *rule,
                children: children.iter().map(|c| self.attach(c, tokens)).collect(),
                lexical: None,
            },
        }
    }
}

fn build(
    chart: &[Vec<Item>],
    cats: &[Category],
    idx: &impl Fn(usize, usize) -> usize,
    a: usize,
    b: usize,
    k: usize,
    inventory: &[EmptyElement],
) -> Skeleton {
    let item = chart[idx(a, b)][k];
    let category = cats[item.cat as usize].clone();
    match item.back {
        Back::Token(index) => Skeleton::Token { index, category },
        Back::Empty(gap, entry) => Skeleton::Empty { gap, entry, category },
        Back::Pair { rule, left, right } => {
            let l = build(chart, cats, idx, left.0, left.1, left.2, inventory);
            let r = build(chart, cats, idx, right.0, right.1, right.2, inventory);
            Skeleton::Node {
                rule,
                category,
                span: (a / 2, b / 2),
                children: [alloc::boxed::Box::new(l), alloc::boxed::Box::new(r)],
            }
        }
    }
}

fn no_parse(chart: &[Vec<Item>], cats: &[Category], idx: &impl Fn(usize, usize) -> usize, units: usize) -> ParseError {
    // token spans with any item, keeping only the maximal ones
    let mut spans: Vec<((usize, usize), Vec<u32>)> = Vec::new();
    for a in 0..units {
        for b in a + 1..=units {
            let (s, e) = (a / 2, b / 2);
            let cell = &chart[idx(a, b)];
            if s >= e || cell.is_empty() {
                continue;
            }
            let pos = match spans.iter().position(|(k, _)| *k == (s, e)) {
                Some(p) => p,
                None => {
                    spans.push(((s, e), Vec::new()));
                    spans.len() - 1
                }
            };
            for it in cell {
                if !spans[pos].1.contains(&it.cat) {
                    spans[pos].1.push(it.cat);
                }
            }
        }
    }
    let keys: Vec<(usize, usize)> = spans.iter().map(|(k, _)| *k).collect();
    let mut covered: Vec<((usize, usize), Vec<Category>)> = spans
        .into_iter()
        .filter(|((s, e), _)| !keys.iter().any(|(s2, e2)| s2 <= s && e <= e2 && (s2, e2) != (s, e)))
        .map(|(k, ids)| (k, ids.into_iter().map(|i| cats[i as usize].clone()).collect()))
        .collect();
    covered.sort_by_key(|(k, _)| *k);
    ParseError::NoParse { covered }
}

/// Supertags for tokens: surface-specific entries first, then a default
/// category per semtag.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CategoryLexicon {
    pub by_surface: BTreeMap<(String, String), Category>,
    pub by_semtag: BTreeMap<String, Category>,
}

impl CategoryLexicon {
    /// `semtag` may be `*` to match any tag.
    pub fn add_surface(&mut self, surface: &str, semtag: &str, category: Category) {
        self.by_surface.insert((surface.to_lowercase(), semtag.to_string()), category);
    }

    pub fn add_default(&mut self, semtag: &str, category: Category) {
        self.by_semtag.insert(semtag.to_string(), category);
    }

    pub fn lookup(&self, surface: &str, semtag: &str) -> Option<&Category> {
        let lower = surface.to_lowercase();
        self.by_surface
            .get(&(lower.clone(), semtag.to_string()))
            .or_else(|| self.by_surface.get(&(lower, "*".to_string())))
            .or_else(|| self.by_semtag.get(semtag))
    }
}
