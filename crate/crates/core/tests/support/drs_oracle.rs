//! Brute-force alpha-equivalence by referent bijection, and random DRSs.

#![allow(dead_code)]
use std::collections::BTreeMap;

use meaningbank_core::drs::{drs_alpha_equal, merge, Condition, Drs, Ref, Sort};
use proptest::prelude::*;

const SORTS: [Sort; 4] = [Sort::Individual, Sort::Event, Sort::State, Sort::Time];
pub const FREE_BASE: u32 = 50;

// Sorted nested representation: the oracle compares these after renaming.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Norm {
    Box(Vec<Ref>, Vec<Norm>),
    P1(String, Ref),
    P2(String, Ref, Ref),
    Role(String, Ref, Ref),
    Before(Ref, Ref),
    Same(Ref, Ref),
    Value(Ref, String),
    Now(Ref),
}

fn norm(d: &Drs<Ref>) -> Norm {
    let mut refs = d.referents.clone();
    refs.sort();
    refs.dedup();
    let mut conds: Vec<Norm> = d
        .conditions
        .iter()
        .map(|c| match c {
            Condition::Pred1(p, a) => Norm::P1(p.clone(), *a),
            Condition::Pred2(p, a, b) => Norm::P2(p.clone(), *a, *b),
            Condition::Role(p, a, b) => Norm::Role(p.clone(), *a, *b),
            Condition::TemporalBefore(a, b) => Norm::Before(*a, *b),
            Condition::TemporalEq(a, b) => Norm::Same(*a, *b),
            Condition::Value(a, v) => Norm::Value(*a, v.clone()),
            Condition::Now(a) => Norm::Now(*a),
            Condition::Not(inner) => norm(inner),
        })
        .collect();
    conds.sort();
    Norm::Box(refs, conds)
}

fn declared_in_order(d: &Drs<Ref>, out: &mut Vec<Ref>) {
    out.extend(d.referents.iter().copied());
    for c in &d.conditions {
        if let Condition::Not(inner) = c {
            declared_in_order(inner, out);
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Brute force: some sort-preserving bijection between declared referents
/// makes the normalized structures identical. Declarations are unique in
/// generated boxes.
pub fn oracle_alpha(a: &Drs<Ref>, b: &Drs<Ref>) -> bool {
    let (mut da, mut db) = (Vec::new(), Vec::new());
    declared_in_order(a, &mut da);
    declared_in_order(b, &mut db);
    if da.len() != db.len() {
        return false;
    }
    let target = norm(b);
    permutations(da.len()).into_iter().any(|p| {
        let ok = p.iter().enumerate().all(|(i, &j)| da[i].sort == db[j].sort);
        if !ok {
            return false;
        }
        let map: BTreeMap<Ref, Ref> = p.iter().enumerate().map(|(i, &j)| (da[i], db[j])).collect();
        norm(&a.rename(&map)) == target
    })
}

fn arb_cond(pool: Vec<Ref>) -> BoxedStrategy<Condition<Ref>> {
    let r = proptest::sample::select(pool);
    let name = proptest::sample::select(vec!["p", "q", "Agent"]).prop_map(String::from);
    prop_oneof![
        (name.clone(), r.clone()).prop_map(|(n, a)| Condition::Pred1(n, a)),
        (name.clone(), r.clone(), r.clone()).prop_map(|(n, a, b)| Condition::Role(n, a, b)),
        (name, r.clone(), r.clone()).prop_map(|(n, a, b)| Condition::Pred2(n, a, b)),
        (r.clone(), r.clone()).prop_map(|(a, b)| Condition::TemporalBefore(a, b)),
        r.clone().prop_map(Condition::Now),
        (r, proptest::sample::select(vec!["1", "2"])).prop_map(|(a, v)| Condition::Value(a, v.to_string())),
    ]
    .boxed()
}

/// A box whose declarations are unique, with at most `max_refs` of them and
/// optional free referents from a separate index range.
pub fn arb_drs(max_refs: usize, free: bool) -> impl Strategy<Value = Drs<Ref>> {
    (
        proptest::collection::vec((0usize..4, 1u32..8), 0..=max_refs),
        0usize..=2,
    )
        .prop_flat_map(move |(decls, nested)| {
            let mut seen = Vec::new();
            for (s, i) in decls {
                let r = Ref::new(SORTS[s], i);
                if !seen.contains(&r) {
                    seen.push(r);
                }
            }
            let split = nested.min(seen.len());
            let inner_refs: Vec<Ref> = seen[seen.len() - split..].to_vec();
            let outer_refs: Vec<Ref> = seen[..seen.len() - split].to_vec();
            let mut outer_pool = outer_refs.clone();
            if free || outer_pool.is_empty() {
                outer_pool.push(Ref::x(FREE_BASE));
                outer_pool.push(Ref::t(FREE_BASE + 1));
            }
            let mut inner_pool = outer_pool.clone();
            inner_pool.extend(inner_refs.iter().copied());
            let outer = proptest::collection::vec(arb_cond(outer_pool), 0..5);
            let inner = proptest::collection::vec(arb_cond(inner_pool), 1..3);
            (outer, inner, Just(outer_refs), Just(inner_refs))
        })
        .prop_map(|(mut conds, inner_conds, outer_refs, inner_refs)| {
            if !inner_refs.is_empty() {
                conds.push(Condition::Not(Drs::new(inner_refs, inner_conds)));
            }
            Drs::new(outer_refs, conds)
        })
}

/// A renamed, reordered copy.
pub fn variant(d: &Drs<Ref>, seed: u64) -> Drs<Ref> {
    let mut decl = Vec::new();
    declared_in_order(d, &mut decl);
    let mut map = BTreeMap::new();
    for (k, r) in decl.iter().enumerate() {
        map.insert(*r, Ref::new(r.sort, 100 + ((k as u64 * 7 + seed) % 13) as u32 + 13 * k as u32));
    }
    let renamed = d.rename(&map);
    shuffle(&renamed, seed)
}

pub fn shuffle(d: &Drs<Ref>, seed: u64) -> Drs<Ref> {
    let mut conds: Vec<Condition<Ref>> = d
        .conditions
        .iter()
        .map(|c| match c {
            Condition::Not(inner) => Condition::Not(shuffle(inner, seed / 3)),
            other => other.clone(),
        })
        .collect();
    let n = conds.len();
    if n > 1 {
        conds.rotate_left((seed as usize) % n);
        if seed % 2 == 0 {
            conds.reverse();
        }
    }
    let mut refs = d.referents.clone();
    refs.reverse();
    Drs::new(refs, conds)
}


/// Runs the algebra properties on `cases` generated DRSs each, with a fixed
/// seed. Returns the first failure.
pub fn check_suite(cases: u32) -> Result<(), String> {
    use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
    let runner = || {
        TestRunner::new_with_rng(
            Config {
                cases,
                failure_persistence: None,
                ..Config::default()
            },
            TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]),
        )
    };

    runner()
        .run(&(arb_drs(6, true), arb_drs(6, true)), |(a, b)| {
            prop_assert_eq!(drs_alpha_equal(&a, &b), oracle_alpha(&a, &b));
            Ok(())
        })
        .map_err(|e| format!("alpha vs bijection oracle: {}", e))?;
    runner()
        .run(&(arb_drs(6, true), any::<u64>(), any::<u64>(), arb_drs(6, true)), |(a, s1, s2, c)| {
            let b = variant(&a, s1);
            let b2 = variant(&b, s2);
            prop_assert!(drs_alpha_equal(&a, &a));
            prop_assert!(drs_alpha_equal(&a, &b) && drs_alpha_equal(&b, &a));
            prop_assert!(drs_alpha_equal(&a, &b2));
            prop_assert_eq!(drs_alpha_equal(&a, &c), drs_alpha_equal(&c, &a));
            if drs_alpha_equal(&b, &c) {
                prop_assert!(drs_alpha_equal(&a, &c));
            }
            Ok(())
        })
        .map_err(|e| format!("equivalence relation: {}", e))?;
    runner()
        .run(&arb_drs(6, true), |a| {
            prop_assert!(drs_alpha_equal(&merge(&Drs::empty(), &a), &a));
            prop_assert!(drs_alpha_equal(&merge(&a, &Drs::empty()), &a));
            Ok(())
        })
        .map_err(|e| format!("merge identity: {}", e))?;
    runner()
        .run(&(arb_drs(3, true), arb_drs(3, true), arb_drs(3, true)), |(a, b, c)| {
            let left = merge(&merge(&a, &b), &c);
            let right = merge(&a, &merge(&b, &c));
            prop_assert!(drs_alpha_equal(&left, &right));
            prop_assert!(oracle_alpha(&left, &right));
            Ok(())
        })
        .map_err(|e| format!("merge associativity: {}", e))?;
    Ok(())
}
