mod support {
    pub mod sentences;
}

use std::collections::BTreeSet;

use meaningbank_core::composer::{compose, derivation_term, ComposeError, Templates};
use meaningbank_core::drs::{drs_alpha_equal, Condition, Drs, Ref};
use meaningbank_core::parser::{DerivNode, Lexical, Rule};
use meaningbank_core::term::category_kind;
use proptest::prelude::*;
use support::sentences::*;

fn mentioned(d: &Drs<Ref>, out: &mut BTreeSet<Ref>) {
    for c in &d.conditions {
        match c {
            Condition::Not(inner) => mentioned(inner, out),
            other => out.extend(other.args().into_iter().copied()),
        }
    }
}

fn all_declared(d: &Drs<Ref>) -> Vec<Ref> {
    let mut out = d.referents.clone();
    for c in &d.conditions {
        if let Condition::Not(inner) = c {
            out.extend(all_declared(inner));
        }
    }
    out
}

fn nodes(d: &DerivNode) -> Vec<&DerivNode> {
    let mut out = vec![d];
    for c in &d.children {
        out.extend(nodes(c));
    }
    out
}

fn he_came() -> Vec<Word> {
    vec![("He", "PRO", Some("male"), "NP"), ("came", "EPS", Some("come"), "S\\NP")]
}

#[test]
fn he_came_without_modifiers() {
    // hand composition: [x e t1 t2: male(x), come(e), Theme(e,x), Time(e,t2), now(t1), t2 < t1]
    let (_, d) = parse(&he_came());
    let got = compose(&d).unwrap();
    let want = Drs::new(
        vec![Ref::x(1), Ref::e(1), Ref::t(1), Ref::t(2)],
        vec![
            Condition::Pred1("male".into(), Ref::x(1)),
            Condition::Pred1("come".into(), Ref::e(1)),
            Condition::Role("Theme".into(), Ref::e(1), Ref::x(1)),
            Condition::Role("Time".into(), Ref::e(1), Ref::t(2)),
            Condition::Now(Ref::t(1)),
            Condition::TemporalBefore(Ref::t(2), Ref::t(1)),
        ],
    );
    assert!(drs_alpha_equal(&got, &want), "{:?}", got);
}

#[test]
fn negated_verb_phrase() {
    let words = vec![
        ("He", "PRO", Some("male"), "NP"),
        ("not", "NOT", None, "(S\\NP)/(S\\NP)"),
        ("sleeps", "ENS", Some("sleep"), "S\\NP"),
    ];
    let (_, d) = parse(&words);
    let got = compose(&d).unwrap();
    assert_eq!(got.referents.len(), 1);
    assert!(got.conditions.iter().any(|c| matches!(c, Condition::Not(inner) if inner.referents.len() == 3)));
}

#[test]
fn kind_mismatch_names_the_span() {
    let (mut toks, _) = parse(&he_came());
    // give the verb a noun's meaning
    toks[1].lexsem = annotate(&[("dog", "CON", Some("dog"), "N")])[0].lexsem.clone();
    let d = parser(false).parse(&toks).unwrap();
    match compose(&d) {
        Err(ComposeError::Kind { span, .. }) => assert_eq!(span, (1, 2)),
        other => panic!("{:?}", other),
    }
}

#[test]
fn templates_cover_shipped_semtags() {
    let t = Templates::builtin();
    for tag in ["PRO", "DEF", "DIS", "PER", "GPE", "CON", "CLO", "IST", "REL", "EPS", "NOT", "NIL"] {
        assert!(t.entries.iter().any(|e| e.semtag == tag), "{}", tag);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, ..ProptestConfig::default() })]

    #[test]
    fn modifier_order_commutes(m1 in modifier(), m2 in modifier()) {
        let mut a = he_came();
        a.extend(m1.clone());
        a.extend(m2.clone());
        let mut b = he_came();
        b.extend(m2);
        b.extend(m1);
        let da = compose(&parse(&a).1).unwrap();
        let db = compose(&parse(&b).1).unwrap();
        prop_assert!(drs_alpha_equal(&da, &db), "{:?}\n{:?}", da, db);
    }

    #[test]
    fn every_referent_is_mentioned(words in sentence()) {
        let (_, d) = parse(&words);
        let drs = compose(&d).unwrap();
        let mut seen = BTreeSet::new();
        mentioned(&drs, &mut seen);
        // bare indefinites are the only exception and the grammar has none
        for r in all_declared(&drs) {
            prop_assert!(seen.contains(&r), "{} unused in {:?}", r, drs);
        }
    }

    #[test]
    fn kinds_follow_categories(words in sentence()) {
        let (_, d) = parse(&words);
        for n in nodes(&d) {
            let t = derivation_term(n).unwrap();
            prop_assert_eq!(t.kind().unwrap(), category_kind(&n.category));
        }
    }

    #[test]
    fn output_is_closed_and_flat(words in sentence()) {
        let (_, d) = parse(&words);
        let drs = compose(&d).unwrap();
        prop_assert!(drs.free_refs().is_empty(), "{:?}", drs);
        let leaves = d.leaves();
        prop_assert!(leaves.iter().all(|l| matches!(l.rule, Rule::Lexical | Rule::EmptyLexical)));
        prop_assert!(leaves.iter().all(|l| matches!(l.lexical, Some(Lexical::Token(_)) | Some(Lexical::Empty(_)))));
    }
}
