//! Reference recognizer for category sequences with at most one inserted
//! empty element, written against its own category type and rule set.

#![allow(dead_code)]

use std::collections::HashMap;

use meaningbank_core::category::{parse_category, Category, Slash};
use meaningbank_core::parser::{Rule, Skeleton};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum OCat {
    Atom(String),
    Fwd(Box<OCat>, Box<OCat>),
    Bwd(Box<OCat>, Box<OCat>),
}

pub fn ocat(c: &Category) -> OCat {
    match c {
        Category::Atomic { atom, feature } => match feature {
            Some(f) => OCat::Atom(format!("{:?}[{}]", atom, f)),
            None => OCat::Atom(format!("{:?}", atom)),
        },
        Category::Functor { result, slash, arg } => {
            let (r, a) = (Box::new(ocat(result)), Box::new(ocat(arg)));
            match slash {
                Slash::Forward => OCat::Fwd(r, a),
                Slash::Backward => OCat::Bwd(r, a),
            }
        }
    }
}

/// Results of every rule for an adjacent pair.
pub fn rules(l: &OCat, r: &OCat, crossed: bool) -> Vec<OCat> {
    let mut out = Vec::new();
    if let OCat::Fwd(x, y) = l {
        if **y == *r {
            out.push((**x).clone());
        }
        if let OCat::Fwd(y2, z) = r {
            if y == y2 {
                out.push(OCat::Fwd(x.clone(), z.clone()));
            }
        }
        if let OCat::Bwd(y2, z) = r {
            if crossed && y == y2 {
                out.push(OCat::Bwd(x.clone(), z.clone()));
            }
        }
    }
    if let OCat::Bwd(x, y) = r {
        if **y == *l {
            out.push((**x).clone());
        }
        if let OCat::Bwd(y2, z) = l {
            if y == y2 {
                out.push(OCat::Bwd(x.clone(), z.clone()));
            }
        }
    }
    out
}

/// The twelve categories of the completeness sweep.
pub fn pool() -> Vec<Category> {
    [
        "NP",
        "N",
        "S",
        "S\\NP",
        "(S\\NP)/NP",
        "NP/N",
        "N/N",
        "(S\\NP)\\(S\\NP)",
        "((S\\NP)\\(S\\NP))/NP",
        "S/S",
        "PP",
        "(S\\NP)/PP",
    ]
    .iter()
    .map(|s| parse_category(s).unwrap())
    .collect()
}

/// Chart over token spans. Each cell keeps `(category id, empties used)`;
/// an empty joins a span at either edge.
pub struct Oracle {
    ids: HashMap<OCat, u32>,
    cats: Vec<OCat>,
    memo: HashMap<(u32, u32), Vec<u32>>,
    crossed: bool,
    goal: u32,
    empties: Vec<u32>,
    /// `chart[i][j]` for the current prefix.
    chart: Vec<Vec<Vec<(u32, u8)>>>,
    len: usize,
}

impl Oracle {
    pub fn new(goal: &Category, empties: &[Category], crossed: bool) -> Oracle {
        let mut o = Oracle {
            ids: HashMap::new(),
            cats: Vec::new(),
            memo: HashMap::new(),
            crossed,
            goal: 0,
            empties: Vec::new(),
            chart: Vec::new(),
            len: 0,
        };
        o.goal = o.intern(ocat(goal));
        o.empties = empties.iter().map(|e| o.intern(ocat(e))).collect();
        o
    }

    fn intern(&mut self, c: OCat) -> u32 {
        if let Some(i) = self.ids.get(&c) {
            return *i;
        }
        let i = self.cats.len() as u32;
        self.cats.push(c.clone());
        self.ids.insert(c, i);
        i
    }

    fn combine(&mut self, l: u32, r: u32) -> Vec<u32> {
        if let Some(v) = self.memo.get(&(l, r)) {
            return v.clone();
        }
        let found = rules(&self.cats[l as usize].clone(), &self.cats[r as usize].clone(), self.crossed);
        let ids: Vec<u32> = found.into_iter().map(|c| self.intern(c)).collect();
        self.memo.insert((l, r), ids.clone());
        ids
    }

    fn add(cell: &mut Vec<(u32, u8)>, item: (u32, u8)) {
        if !cell.contains(&item) {
            cell.push(item);
        }
    }

    /// Extends the current prefix by one token.
    pub fn push(&mut self, c: &Category) {
        let j = self.len + 1;
        let id = self.intern(ocat(c));
        while self.chart.len() < j {
            self.chart.push(Vec::new());
        }
        for row in self.chart.iter_mut() {
            while row.len() <= j {
                row.push(Vec::new());
            }
        }
        for i in (0..j).rev() {
            let mut cell: Vec<(u32, u8)> = Vec::new();
            if i == j - 1 {
                cell.push((id, 0));
            }
            for m in i + 1..j {
                let left = self.chart[i][m].clone();
                let right = self.chart[m][j].clone();
                for &(a, ka) in &left {
                    for &(b, kb) in &right {
                        if ka + kb > 1 {
                            continue;
                        }
                        for c in self.combine(a, b) {
                            Self::add(&mut cell, (c, ka + kb));
                        }
                    }
                }
            }
            // an empty at the left or right edge of the span
            let plain: Vec<u32> = cell.iter().filter(|(_, k)| *k == 0).map(|(c, _)| *c).collect();
            for e in self.empties.clone() {
                for &x in &plain {
                    for c in self.combine(e, x) {
                        Self::add(&mut cell, (c, 1));
                    }
                    for c in self.combine(x, e) {
                        Self::add(&mut cell, (c, 1));
                    }
                }
            }
            self.chart[i][j] = cell;
        }
        self.len = j;
    }

    pub fn pop(&mut self) {
        let j = self.len;
        for row in self.chart.iter_mut() {
            if row.len() > j {
                row[j].clear();
            }
        }
        self.len -= 1;
    }

    /// Fewest empties needed to derive the goal from the current prefix.
    pub fn best(&self) -> Option<usize> {
        if self.len == 0 {
            return None;
        }
        let cell = &self.chart[0][self.len];
        if cell.contains(&(self.goal, 0)) {
            Some(0)
        } else if cell.contains(&(self.goal, 1)) {
            Some(1)
        } else {
            None
        }
    }

    pub fn recognize(&mut self, seq: &[Category]) -> Option<usize> {
        while self.len > 0 {
            self.pop();
        }
        for c in seq {
            self.push(c);
        }
        self.best()
    }
}

/// Checks a parser tree rule by rule against the reference rules. Returns
/// the number of empties on success.
pub fn check_skeleton(
    skel: &Skeleton,
    seq: &[Category],
    goal: &Category,
    empties: &[Category],
    crossed: bool,
) -> Result<usize, String> {
    fn walk(
        s: &Skeleton,
        seq: &[Category],
        empties: &[Category],
        crossed: bool,
        next: &mut usize,
        used: &mut usize,
    ) -> Result<OCat, String> {
        match s {
            Skeleton::Token { index, category } => {
                if *index != *next {
                    return Err(format!("leaf {} out of order, expected {}", index, next));
                }
                *next += 1;
                if seq[*index] != *category {
                    return Err(format!("leaf {} relabelled", index));
                }
                Ok(ocat(category))
            }
            Skeleton::Empty { entry, category, .. } => {
                *used += 1;
                if empties.get(*entry) != Some(category) {
                    return Err("empty element not in inventory".into());
                }
                Ok(ocat(category))
            }
            Skeleton::Node {
                rule, category, children, ..
            } => {
                let l = walk(&children[0], seq, empties, crossed, next, used)?;
                let r = walk(&children[1], seq, empties, crossed, next, used)?;
                let c = ocat(category);
                if !rules(&l, &r, crossed).contains(&c) {
                    return Err(format!("{:?} does not combine to {}", rule, category));
                }
                if matches!(rule, Rule::Lexical | Rule::EmptyLexical) {
                    return Err("lexical rule on an inner node".into());
                }
                Ok(c)
            }
        }
    }
    let mut next = 0;
    let mut used = 0;
    let root = walk(skel, seq, empties, crossed, &mut next, &mut used)?;
    if next != seq.len() {
        return Err(format!("{} of {} tokens covered", next, seq.len()));
    }
    if root != ocat(goal) {
        return Err("root is not the goal".into());
    }
    Ok(used)
}

pub struct SweepReport {
    pub sequences: usize,
    pub parsed: usize,
    pub mismatches: Vec<String>,
}

/// Every sequence over `cats` up to `max_len`, depth first so prefixes share
/// chart columns. `parse` returns the parser's tree and insertion count.
pub fn sweep(
    cats: &[Category],
    max_len: usize,
    goal: &Category,
    empties: &[Category],
    crossed: bool,
    parse: &mut dyn FnMut(&[Category]) -> Option<(Skeleton, usize)>,
) -> SweepReport {
    let mut oracle = Oracle::new(goal, empties, crossed);
    let mut report = SweepReport {
        sequences: 0,
        parsed: 0,
        mismatches: Vec::new(),
    };
    let mut seq = Vec::new();
    fn rec(
        cats: &[Category],
        max_len: usize,
        goal: &Category,
        empties: &[Category],
        crossed: bool,
        oracle: &mut Oracle,
        seq: &mut Vec<Category>,
        report: &mut SweepReport,
        parse: &mut dyn FnMut(&[Category]) -> Option<(Skeleton, usize)>,
    ) {
        for c in cats {
            seq.push(c.clone());
            oracle.push(c);
            let want = oracle.best();
            let got = parse(seq);
            report.sequences += 1;
            let ok = match (&got, want) {
                (Some((skel, k)), Some(w)) => {
                    report.parsed += 1;
                    *k == w && check_skeleton(skel, seq, goal, empties, crossed) == Ok(*k)
                }
                (None, None) => true,
                _ => false,
            };
            if !ok && report.mismatches.len() < 20 {
                let names: Vec<String> = seq.iter().map(|c| c.to_string()).collect();
                report
                    .mismatches
                    .push(format!("{} parser {:?} reference {:?}", names.join(" "), got.map(|g| g.1), want));
            }
            if seq.len() < max_len {
                rec(cats, max_len, goal, empties, crossed, oracle, seq, report, parse);
            }
            oracle.pop();
            seq.pop();
        }
    }
    rec(cats, max_len, goal, empties, crossed, &mut oracle, &mut seq, &mut report, parse);
    report
}
