use meaningbank_core::segmenter::{
    labels_to_string, labels_to_tokens, parse_labels, CharLabel, SegmenterModel, TrainConfig,
};
use proptest::prelude::*;

/// Text plus a well-formed labelling: whitespace is `O`, the first label
/// of a token is `S` or `T`, and `I` may continue a token across a gap.
fn labelled() -> impl Strategy<Value = (String, Vec<CharLabel>)> {
    proptest::collection::vec((prop::sample::select(vec!['a', 'B', '7', '.', '\'', ' ', ' ', 'é']), 0..3u8), 0..40)
        .prop_map(|cells| {
            let mut text = String::new();
            let mut labels = Vec::new();
            let mut open = false;
            for (c, choice) in cells {
                text.push(c);
                let l = if c == ' ' {
                    CharLabel::O
                } else if !open {
                    open = true;
                    if labels.iter().all(|l| *l == CharLabel::O) { CharLabel::S } else { CharLabel::T }
                } else {
                    [CharLabel::I, CharLabel::I, CharLabel::T][choice as usize]
                };
                labels.push(l);
            }
            (text, labels)
        })
}

fn small_model() -> SegmenterModel {
    let corpus: Vec<(String, Vec<CharLabel>)> = [
        ("He came back.", "SIOTIIIOTIIIT"),
        ("It is 5 pm.", "SIOTIOTOIIT"),
        ("Go.", "SIT"),
    ]
    .iter()
    .map(|(t, l)| (t.to_string(), parse_labels(l).unwrap()))
    .collect();
    SegmenterModel::train(&corpus, &TrainConfig::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn tokens_and_gaps_rebuild_the_text((text, labels) in labelled()) {
        let chars: Vec<char> = text.chars().collect();
        let toks = labels_to_tokens(&text, &labels).unwrap();
        let mut rebuilt = String::new();
        let mut at = 0;
        for t in &toks {
            prop_assert!(t.char_start < t.char_end);
            prop_assert!(t.char_start >= at);
            for i in at..t.char_start {
                prop_assert_eq!(labels[i], CharLabel::O);
                rebuilt.push(chars[i]);
            }
            let slice: String = chars[t.char_start..t.char_end].iter().collect();
            // surface is the slice with every whitespace run glued
            let pieces: Vec<&str> = slice.split(' ').filter(|p| !p.is_empty()).collect();
            prop_assert_eq!(&t.surface, &pieces.join("~"));
            rebuilt.push_str(&slice);
            at = t.char_end;
        }
        for i in at..chars.len() {
            prop_assert_eq!(labels[i], CharLabel::O);
            rebuilt.push(chars[i]);
        }
        prop_assert_eq!(rebuilt, text);
    }

    #[test]
    fn decode_keeps_length_and_overrides(text in "[a-zA-Z0-9.,' ]{0,30}", picks in proptest::collection::vec((any::<prop::sample::Index>(), 0..4usize), 0..4)) {
        let model = small_model();
        let n = text.chars().count();
        let mut overrides: Vec<(usize, CharLabel)> = Vec::new();
        if n > 0 {
            for (i, l) in picks {
                let i = i.index(n);
                overrides.retain(|o| o.0 != i);
                overrides.push((i, CharLabel::ALL[l]));
            }
        }
        let out = model.decode(&text, &overrides);
        prop_assert_eq!(out.len(), n);
        for (i, l) in overrides {
            prop_assert_eq!(out[i], l);
        }
    }
}

#[test]
fn model_text_round_trip_and_determinism() {
    let a = small_model();
    let b = small_model();
    assert_eq!(a, b);
    assert_eq!(a.to_text(), b.to_text());
    let back = SegmenterModel::from_text(&a.to_text()).unwrap();
    assert_eq!(back, a);
    assert_eq!(back.to_text(), a.to_text());
}

#[test]
fn trained_model_segments_a_short_sentence() {
    let model = small_model();
    assert_eq!(labels_to_string(&model.decode("Go.", &[])), "SIT");
    assert!(model.decode("   ", &[]).iter().all(|l| *l == CharLabel::O));
}

#[test]
fn empty_corpus_is_an_error() {
    assert!(SegmenterModel::train(&[], &TrainConfig::default()).is_err());
}
