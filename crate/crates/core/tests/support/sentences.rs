//! Small random English sentences with hand-assigned lexical entries.

#![allow(dead_code)]

use meaningbank_core::category::parse_category;
use meaningbank_core::composer::{default_inventory, lexical_semantics, RoleLexicon, Templates};
use meaningbank_core::parser::{DerivNode, ParseConfig, Parser};
use meaningbank_core::token::{Token, TokenAnnotation};
use proptest::prelude::*;

pub type Word = (&'static str, &'static str, Option<&'static str>, &'static str);

pub fn annotate(words: &[Word]) -> Vec<TokenAnnotation> {
    let tpl = Templates::builtin();
    let roles = RoleLexicon::default();
    words
        .iter()
        .enumerate()
        .map(|(i, (w, tag, sym, cat))| {
            let category = parse_category(cat).unwrap();
            TokenAnnotation {
                token: Token::bare(i, w),
                semtag: tag.to_string(),
                symbol: sym.map(String::from),
                lexsem: lexical_semantics(tag, &category, *sym, &tpl, &roles).unwrap(),
                category,
            }
        })
        .collect()
}

pub fn parser(crossed: bool) -> Parser {
    Parser::new(
        ParseConfig {
            crossed_composition: crossed,
            ..ParseConfig::default()
        },
        default_inventory(&Templates::builtin()),
    )
}

pub fn parse(words: &[Word]) -> (Vec<TokenAnnotation>, DerivNode) {
    let toks = annotate(words);
    let d = parser(false).parse(&toks).unwrap_or_else(|e| panic!("{:?}: {}", words, e));
    (toks, d)
}

pub fn noun_phrase() -> impl Strategy<Value = Vec<Word>> {
    prop_oneof![
        Just(vec![("Mary", "PER", Some("mary"), "NP")]),
        Just(vec![("Paris", "GPE", Some("paris"), "NP")]),
        Just(vec![("she", "PRO", Some("female"), "NP")]),
        Just(vec![("a", "DIS", None, "NP/N"), ("dog", "CON", Some("dog"), "N")]),
        Just(vec![("the", "DEF", None, "NP/N"), ("house", "CON", Some("house"), "N")]),
        Just(vec![("5~pm", "CLO", Some("17:00"), "N")]),
        Just(vec![("cats", "CON", Some("cat"), "N")]),
    ]
}

pub fn modifier() -> impl Strategy<Value = Vec<Word>> {
    prop_oneof![
        Just(vec![("back", "IST", Some("back"), "(S\\NP)\\(S\\NP)")]),
        Just(vec![("quickly", "IST", Some("quick"), "(S\\NP)\\(S\\NP)")]),
        noun_phrase().prop_map(|np| {
            let mut v = vec![("at", "REL", Some("at"), "((S\\NP)\\(S\\NP))/NP")];
            v.extend(np);
            v
        }),
        noun_phrase().prop_map(|np| {
            let mut v = vec![("in", "REL", Some("in"), "((S\\NP)\\(S\\NP))/NP")];
            v.extend(np);
            v
        }),
    ]
}

pub fn verb_phrase() -> impl Strategy<Value = Vec<Word>> {
    prop_oneof![
        Just(vec![("came", "EPS", Some("come"), "S\\NP")]),
        Just(vec![("sleeps", "ENS", Some("sleep"), "S\\NP")]),
        noun_phrase().prop_map(|np| {
            let mut v = vec![("saw", "EPS", Some("see"), "(S\\NP)/NP")];
            v.extend(np);
            v
        }),
    ]
}

/// Subject, verb phrase and up to two modifiers, in English order.
pub fn sentence() -> impl Strategy<Value = Vec<Word>> {
    (
        prop_oneof![
            Just(vec![("He", "PRO", Some("male"), "NP")]),
            Just(vec![("John", "PER", Some("john"), "NP")]),
            Just(vec![("a", "DIS", None, "NP/N"), ("man", "CON", Some("man"), "N")]),
        ],
        verb_phrase(),
        proptest::collection::vec(modifier(), 0..=2),
    )
        .prop_map(|(s, vp, mods)| {
            let mut out = s;
            out.extend(vp);
            for m in mods {
                out.extend(m);
            }
            out
        })
}
