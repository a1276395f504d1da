//! Synthetic labelled text for training and evaluating the segmenter.
//!
//! Sentences are drawn from small per-language grammars. Each token is
//! written as a string where a space marks a glued multiword and `|` marks
//! a compound boundary; gold character labels follow from that markup.

use meaningbank_core::segmenter::CharLabel;
use meaningbank_core::token::Lang;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Grammar {
    subjects: &'static [&'static str],
    intransitive: &'static [&'static str],
    transitive: &'static [&'static str],
    objects: &'static [&'static str],
    modifiers: &'static [&'static str],
    copula: &'static str,
    adjectives: &'static [&'static str],
}

const EN: Grammar = Grammar {
    subjects: &["He", "She", "John", "Mary", "The dog", "A man", "They", "The boxer", "It", "We"],
    intransitive: &["came", "left", "slept", "arrived", "ran", "waited", "smiled", "did n't|come"],
    transitive: &["saw", "liked", "met", "called", "found", "visited", "did n't|see"],
    objects: &["Mary", "the house", "a dog", "the boxer", "him", "her", "the table", "a wheel", "Paris"],
    modifiers: &[
        "back",
        "quickly",
        "at 5 o'clock",
        "at 2 pm",
        "at 10 am",
        "at 7:30 pm",
        "in Paris",
        "on Monday",
        "at noon",
        "today",
        "at 11 o'clock",
        "in New York",
    ],
    copula: "was",
    adjectives: &["im|possible", "un|happy", "happy", "late", "European", "dis|honest", "tired"],
};

const DE: Grammar = Grammar {
    subjects: &["Er", "Sie", "Hans", "Maria", "Der Hund", "Ein Mann", "Wir", "Es"],
    intransitive: &["kam", "ging", "schlief", "wartete", "lachte", "kam nicht"],
    transitive: &["sah", "traf", "fand", "besuchte", "rief"],
    objects: &["Maria", "das Haus", "einen Hund", "den Boxer", "ihn", "den Tisch", "Berlin"],
    modifiers: &[
        "zurück",
        "schnell",
        "um fünf Uhr",
        "um zwei Uhr",
        "um zehn Uhr",
        "um 5 Uhr",
        "in Berlin",
        "am Montag",
        "heute",
        "in New York",
    ],
    copula: "war",
    adjectives: &["un|möglich", "un|glücklich", "glücklich", "müde", "spät"],
};

fn grammar(lang: Lang) -> &'static Grammar {
    match lang {
        Lang::De => &DE,
        _ => &EN,
    }
}

/// Glued multiwords: clock phrases and city names.
fn glue(phrase: &str) -> Vec<String> {
    const GLUED: &[&str] = &[
        "5 o'clock",
        "11 o'clock",
        "2 pm",
        "10 am",
        "7:30 pm",
        "New York",
        "fünf Uhr",
        "zwei Uhr",
        "zehn Uhr",
        "5 Uhr",
    ];
    let mut out = Vec::new();
    let words: Vec<&str> = phrase.split(' ').collect();
    let mut i = 0;
    while i < words.len() {
        if i + 1 < words.len() {
            let pair = format!("{} {}", words[i], words[i + 1]);
            if GLUED.contains(&pair.as_str()) {
                out.push(pair);
                i += 2;
                continue;
            }
        }
        out.push(words[i].to_string());
        i += 1;
    }
    out
}

fn sentence(g: &Grammar, rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut toks = Vec::new();
    let pick = |rng: &mut ChaCha8Rng, xs: &[&'static str]| *xs.choose(rng).expect("non-empty");
    toks.extend(glue(pick(rng, g.subjects)));
    match rng.random_range(0..3) {
        0 => toks.extend(glue(pick(rng, g.intransitive))),
        1 => {
            toks.extend(glue(pick(rng, g.transitive)));
            toks.extend(glue(pick(rng, g.objects)));
        }
        _ => {
            toks.push(g.copula.to_string());
            toks.push(pick(rng, g.adjectives).to_string());
        }
    }
    for _ in 0..rng.random_range(0..3) {
        toks.extend(glue(pick(rng, g.modifiers)));
    }
    // a contraction token like "n't|come" is a compound of two tokens
    toks = toks
        .into_iter()
        .flat_map(|t| {
            if let Some(rest) = t.strip_prefix("n't|") {
                vec!["n't".to_string(), rest.to_string()]
            } else {
                vec![t]
            }
        })
        .collect();
    match rng.random_range(0..10) {
        0..=6 => toks.push(".".to_string()),
        7 => toks.push("!".to_string()),
        8 => toks.push("?".to_string()),
        _ => {}
    }
    toks
}

/// Renders tokens with gold labels. Punctuation and `n't` attach to the
/// preceding word without a space.
fn render(sentences: &[Vec<String>]) -> (String, Vec<CharLabel>) {
    let mut text = String::new();
    let mut labels = Vec::new();
    let mut push = |c: char, l: CharLabel| {
        text.push(c);
        labels.push(l);
    };
    for (k, sent) in sentences.iter().enumerate() {
        if k > 0 {
            push(' ', CharLabel::O);
        }
        for (i, tok) in sent.iter().enumerate() {
            let attached = matches!(tok.as_str(), "." | "!" | "?" | "," | "n't");
            if i > 0 && !attached {
                push(' ', CharLabel::O);
            }
            let mut next = if i == 0 { CharLabel::S } else { CharLabel::T };
            for c in tok.chars() {
                match c {
                    '|' => next = CharLabel::T,
                    ' ' => push(' ', CharLabel::O),
                    _ => {
                        push(c, next);
                        next = CharLabel::I;
                    }
                }
            }
        }
    }
    (text, labels)
}

/// `n` labelled samples; each holds one or two sentences.
pub fn corpus(lang: Lang, n: usize, seed: u64) -> Vec<(String, Vec<CharLabel>)> {
    let g = grammar(lang);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let count = if rng.random_bool(0.25) { 2 } else { 1 };
            let sents: Vec<Vec<String>> = (0..count).map(|_| sentence(g, &mut rng)).collect();
            render(&sents)
        })
        .collect()
}
