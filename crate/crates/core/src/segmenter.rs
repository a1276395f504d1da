//! Character-level S/T/I/O segmentation into sentences and tokens.
//!
//! A linear model scores each character's label from a window of
//! surrounding characters; first-order label transitions are decoded with
//! Viterbi. Multiword tokens are written by labelling the characters after
//! a whitespace gap `I`, compounds by starting a new token (`T`) in the
//! middle of a word.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::token::{Token, GLUE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CharLabel {
    /// Beginning of a sentence.
    S,
    /// Beginning of a word.
    T,
    /// Inside a word.
    I,
    /// Outside any word.
    O,
}

impl CharLabel {
    pub const ALL: [CharLabel; 4] = [CharLabel::S, CharLabel::T, CharLabel::I, CharLabel::O];

    fn index(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        match self {
            CharLabel::S => 'S',
            CharLabel::T => 'T',
            CharLabel::I => 'I',
            CharLabel::O => 'O',
        }
    }

    pub fn from_char(c: char) -> Option<CharLabel> {
        match c {
            'S' => Some(CharLabel::S),
            'T' => Some(CharLabel::T),
            'I' => Some(CharLabel::I),
            'O' => Some(CharLabel::O),
            _ => None,
        }
    }
}

pub fn labels_to_string(labels: &[CharLabel]) -> String {
    labels.iter().map(|l| l.as_char()).collect()
}

pub fn parse_labels(text: &str) -> Result<Vec<CharLabel>, SegmentError> {
    text.chars()
        .enumerate()
        .map(|(i, c)| CharLabel::from_char(c).ok_or(SegmentError::BadLabel { offset: i, found: c }))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SegmentError {
    BadLabel { offset: usize, found: char },
    LengthMismatch { text: usize, labels: usize },
    /// An `I` with no token to continue.
    OrphanInside { offset: usize },
    EmptyCorpus,
    Model { line: usize, message: String },
}

impl fmt::Display for SegmentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentError::BadLabel { offset, found } => write!(f, "invalid label {:?} at offset {}", found, offset),
            SegmentError::LengthMismatch { text, labels } => {
                write!(f, "{} labels for a text of {} characters", labels, text)
            }
            SegmentError::OrphanInside { offset } => write!(f, "label I at offset {} does not continue a token", offset),
            SegmentError::EmptyCorpus => f.write_str("training corpus is empty"),
            SegmentError::Model { line, message } => write!(f, "segmenter model line {}: {}", line, message),
        }
    }
}

impl core::error::Error for SegmentError {}

// ---------------------------------------------------------------------------
// Features

const PAD_LEFT: char = '\u{2}';
const PAD_RIGHT: char = '\u{3}';
const WINDOW: isize = 3;

fn class(c: char) -> char {
    if c == PAD_LEFT || c == PAD_RIGHT {
        'B'
    } else if c.is_whitespace() {
        'W'
    } else if c.is_uppercase() {
        'U'
    } else if c.is_alphabetic() {
        'L'
    } else if c.is_numeric() {
        'D'
    } else if matches!(c, '.' | '!' | '?') {
        'E'
    } else {
        'P'
    }
}

/// Window features for every position of `chars`.
pub fn features(chars: &[char]) -> Vec<Vec<String>> {
    let at = |i: isize| -> char {
        if i < 0 {
            PAD_LEFT
        } else if i as usize >= chars.len() {
            PAD_RIGHT
        } else {
            chars[i as usize]
        }
    };
    (0..chars.len() as isize)
        .map(|i| {
            let mut f = Vec::with_capacity(24);
            f.push("bias".to_string());
            for off in -WINDOW..=WINDOW {
                f.push(format!("u{}{}", off, at(i + off)));
            }
            for off in -WINDOW..WINDOW {
                f.push(format!("b{}{}{}", off, at(i + off), at(i + off + 1)));
            }
            for off in -2..=0 {
                f.push(format!("t{}{}{}{}", off, at(i + off), at(i + off + 1), at(i + off + 2)));
            }
            let classes: String = (-WINDOW..=WINDOW).map(|off| class(at(i + off))).collect();
            f.push(format!("k{}", classes));
            f.push(format!("kl{}", &classes[..4]));
            f.push(format!("kr{}", &classes[3..]));
            // previous non-space character, skipping one gap
            let mut j = i - 1;
            while j >= 0 && at(j).is_whitespace() {
                j -= 1;
            }
            f.push(format!("p{}{}", class(at(j)), at(i)));
            f
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Model

/// Decoder states: the label plus whether a sentence has started.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Lead,
    S,
    T,
    I,
    O,
}

const STATES: [State; 5] = [State::Lead, State::S, State::T, State::I, State::O];

impl State {
    fn label(self) -> CharLabel {
        match self {
            State::Lead | State::O => CharLabel::O,
            State::S => CharLabel::S,
            State::T => CharLabel::T,
            State::I => CharLabel::I,
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Successor state for a label.
    fn next(prev: Option<State>, label: CharLabel) -> Option<State> {
        let started = !matches!(prev, None | Some(State::Lead));
        match (label, started) {
            (CharLabel::S, _) => Some(State::S),
            (CharLabel::O, false) => Some(State::Lead),
            (CharLabel::O, true) => Some(State::O),
            (CharLabel::T, true) => Some(State::T),
            (CharLabel::I, true) => Some(State::I),
            _ => None,
        }
    }
}

/// Whitespace never belongs to a token.
fn whitespace_mask(chars: &[char]) -> Vec<Option<CharLabel>> {
    chars.iter().map(|c| c.is_whitespace().then_some(CharLabel::O)).collect()
}

/// Linear scorer over window features with label transitions.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SegmenterModel {
    pub weights: BTreeMap<String, [i64; 4]>,
    /// Indexed by previous label (`4` = start of text) and current label.
    pub transitions: [[i64; 4]; 5],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { epochs: 8, seed: 7 }
    }
}

impl SegmenterModel {
    fn emission(&self, feats: &[String]) -> [i64; 4] {
        let mut out = [0i64; 4];
        for f in feats {
            if let Some(w) = self.weights.get(f) {
                for k in 0..4 {
                    out[k] += w[k];
                }
            }
        }
        out
    }

    fn transition(&self, prev: Option<CharLabel>, cur: CharLabel) -> i64 {
        self.transitions[prev.map_or(4, |p| p.index())][cur.index()]
    }

    /// Best label sequence; `forced` positions are fixed in advance.
    pub fn decode(&self, text: &str, overrides: &[(usize, CharLabel)]) -> Vec<CharLabel> {
        let chars: Vec<char> = text.chars().collect();
        let feats = features(&chars);
        let mut forced: Vec<Option<CharLabel>> = vec![None; chars.len()];
        for &(i, l) in overrides {
            if i < chars.len() {
                forced[i] = Some(l);
            }
        }
        for (i, w) in whitespace_mask(&chars).into_iter().enumerate() {
            if forced[i].is_none() {
                forced[i] = w;
            }
        }
        self.viterbi(&feats, &forced)
    }

    fn viterbi(&self, feats: &[Vec<String>], forced: &[Option<CharLabel>]) -> Vec<CharLabel> {
        let n = feats.len();
        if n == 0 {
            return Vec::new();
        }
        const NEG: i64 = i64::MIN / 4;
        let mut score = vec![[NEG; 5]; n];
        let mut back = vec![[0usize; 5]; n];
        for i in 0..n {
            let em = self.emission(&feats[i]);
            let labels: &[CharLabel] = match &forced[i] {
                Some(l) => core::slice::from_ref(l),
                None => &CharLabel::ALL,
            };
            for &label in labels {
                let preds: Vec<Option<State>> = if i == 0 { vec![None] } else { STATES.iter().map(|s| Some(*s)).collect() };
                for prev in preds {
                    let base = match prev {
                        None => 0,
                        Some(p) if score[i - 1][p.index()] > NEG => score[i - 1][p.index()],
                        Some(_) => continue,
                    };
                    // forced labels bypass structural constraints
                    let state = match State::next(prev, label) {
                        Some(s) => s,
                        None if forced[i].is_some() => match label {
                            CharLabel::T => State::T,
                            CharLabel::I => State::I,
                            CharLabel::S => State::S,
                            CharLabel::O => State::O,
                        },
                        None => continue,
                    };
                    let s = base + em[label.index()] + self.transition(prev.map(|p| p.label()), label);
                    if s > score[i][state.index()] {
                        score[i][state.index()] = s;
                        back[i][state.index()] = prev.map_or(0, |p| p.index());
                    }
                }
            }
        }
        let mut best = 0;
        for s in 0..5 {
            if score[n - 1][s] > score[n - 1][best] {
                best = s;
            }
        }
        let mut out = vec![CharLabel::O; n];
        let mut cur = best;
        for i in (0..n).rev() {
            out[i] = STATES[cur].label();
            cur = back[i][cur];
        }
        out
    }

    /// Averaged structured perceptron; deterministic for a given seed.
    pub fn train(corpus: &[(String, Vec<CharLabel>)], config: &TrainConfig) -> Result<SegmenterModel, SegmentError> {
        if corpus.is_empty() {
            return Err(SegmentError::EmptyCorpus);
        }
        let mut data = Vec::with_capacity(corpus.len());
        for (text, labels) in corpus {
            let chars: Vec<char> = text.chars().collect();
            if chars.len() != labels.len() {
                return Err(SegmentError::LengthMismatch {
                    text: chars.len(),
                    labels: labels.len(),
                });
            }
            data.push((features(&chars), labels.clone(), whitespace_mask(&chars)));
        }
        let mut model = SegmenterModel::default();
        // running sums of c * update for averaging
        let mut acc = SegmenterModel::default();
        let mut c: i64 = 1;
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for _ in 0..config.epochs.max(1) {
            order.shuffle(&mut rng);
            for &k in &order {
                let (feats, gold, mask) = &data[k];
                let guess = model.viterbi(feats, mask);
                if guess != *gold {
                    for i in 0..gold.len() {
                        let prev_g = if i == 0 { None } else { Some(gold[i - 1]) };
                        let prev_p = if i == 0 { None } else { Some(guess[i - 1]) };
                        if gold[i] != guess[i] {
                            for f in &feats[i] {
                                let w = model.weights.entry(f.clone()).or_insert([0; 4]);
                                w[gold[i].index()] += 1;
                                w[guess[i].index()] -= 1;
                                let a = acc.weights.entry(f.clone()).or_insert([0; 4]);
                                a[gold[i].index()] += c;
                                a[guess[i].index()] -= c;
                            }
                        }
                        if gold[i] != guess[i] || prev_g != prev_p {
                            let pg = prev_g.map_or(4, |p| p.index());
                            let pp = prev_p.map_or(4, |p| p.index());
                            model.transitions[pg][gold[i].index()] += 1;
                            model.transitions[pp][guess[i].index()] -= 1;
                            acc.transitions[pg][gold[i].index()] += c;
                            acc.transitions[pp][guess[i].index()] -= c;
                        }
                    }
                }
                c += 1;
            }
        }
        // averaged weights scaled by c: w * c - acc
        let mut out = SegmenterModel::default();
        for (f, w) in &model.weights {
            let a = acc.weights.get(f).copied().unwrap_or([0; 4]);
            let mut v = [0i64; 4];
            for k in 0..4 {
                v[k] = w[k] * c - a[k];
            }
            if v.iter().any(|x| *x != 0) {
                out.weights.insert(f.clone(), v);
            }
        }
        for p in 0..5 {
            for k in 0..4 {
                out.transitions[p][k] = model.transitions[p][k] * c - acc.transitions[p][k];
            }
        }
        Ok(out)
    }

    /// Plain-text serialization: one `T` line per transition row and one `F`
    /// line per feature, tab separated, feature strings escaped.
    pub fn to_text(&self) -> String {
        let mut out = String::from("segmenter-model 1\n");
        for (p, row) in self.transitions.iter().enumerate() {
            out.push_str(&format!("T\t{}\t{} {} {} {}\n", p, row[0], row[1], row[2], row[3]));
        }
        for (f, w) in &self.weights {
            out.push_str(&format!("F\t{}\t{} {} {} {}\n", escape(f), w[0], w[1], w[2], w[3]));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<SegmenterModel, SegmentError> {
        let mut model = SegmenterModel::default();
        let err = |line: usize, message: &str| SegmentError::Model {
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "segmenter-model 1")) => {}
            _ => return Err(err(1, "missing header")),
        }
        for (n, line) in lines {
            let n = n + 1;
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split('\t');
            let (kind, key, vals) = match (cols.next(), cols.next(), cols.next(), cols.next()) {
                (Some(k), Some(key), Some(v), None) => (k, key, v),
                _ => return Err(err(n, "expected three tab-separated columns")),
            };
            let mut w = [0i64; 4];
            let parts: Vec<&str> = vals.split(' ').collect();
            if parts.len() != 4 {
                return Err(err(n, "expected four weights"));
            }
            for (k, p) in parts.iter().enumerate() {
                w[k] = p.parse().map_err(|_| err(n, "bad weight"))?;
            }
            match kind {
                "T" => {
                    let p: usize = key.parse().map_err(|_| err(n, "bad transition row"))?;
                    if p > 4 {
                        return Err(err(n, "bad transition row"));
                    }
                    model.transitions[p] = w;
                }
                "F" => {
                    model.weights.insert(unescape(key), w);
                }
                _ => return Err(err(n, "unknown record kind")),
            }
        }
        Ok(model)
    }
}

fn escape(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(s: &str) -> String {
    let mut out = String::new();
    let mut it = s.chars();
    while let Some(c) = it.next() {
        if c == '\\' {
            match it.next() {
                Some('t') => out.push('\t'),
                Some('n') => out.push('\n'),
                Some('r') => out.push('\r'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Fraction of positions where two label sequences agree.
pub fn char_accuracy(gold: &[CharLabel], guess: &[CharLabel]) -> f64 {
    if gold.is_empty() {
        return 1.0;
    }
    let same = gold.iter().zip(guess).filter(|(a, b)| a == b).count();
    same as f64 / gold.len() as f64
}

// ---------------------------------------------------------------------------
// Labels to tokens

/// Tokens with the index of the sentence each belongs to.
pub fn labels_to_sentences(text: &str, labels: &[CharLabel]) -> Result<Vec<Vec<Token>>, SegmentError> {
    let (tokens, starts) = segment(text, labels)?;
    let mut out: Vec<Vec<Token>> = Vec::new();
    for (tok, starts_sentence) in tokens.into_iter().zip(starts) {
        if starts_sentence || out.is_empty() {
            out.push(Vec::new());
        }
        let sentence = out.last_mut().expect("pushed above");
        let mut tok = tok;
        tok.id = sentence.len();
        sentence.push(tok);
    }
    Ok(out)
}

pub fn labels_to_tokens(text: &str, labels: &[CharLabel]) -> Result<Vec<Token>, SegmentError> {
    Ok(segment(text, labels)?.0)
}

struct Open {
    start: usize,
    end: usize,
    parts: Vec<(usize, usize)>,
    gap: bool,
    sentence: bool,
}

fn segment(text: &str, labels: &[CharLabel]) -> Result<(Vec<Token>, Vec<bool>), SegmentError> {
    let chars: Vec<char> = text.chars().collect();
    if chars.len() != labels.len() {
        return Err(SegmentError::LengthMismatch {
            text: chars.len(),
            labels: labels.len(),
        });
    }
    let mut spans: Vec<Open> = Vec::new();
    let mut open: Option<Open> = None;
    for (i, label) in labels.iter().enumerate() {
        match label {
            CharLabel::S | CharLabel::T => {
                if let Some(o) = open.take() {
                    spans.push(o);
                }
                open = Some(Open {
                    start: i,
                    end: i + 1,
                    parts: vec![(i, i + 1)],
                    gap: false,
                    sentence: *label == CharLabel::S,
                });
            }
            CharLabel::I => match open.as_mut() {
                Some(o) => {
                    if o.gap {
                        o.parts.push((i, i + 1));
                        o.gap = false;
                    } else if let Some(last) = o.parts.last_mut() {
                        last.1 = i + 1;
                    }
                    o.end = i + 1;
                }
                None => return Err(SegmentError::OrphanInside { offset: i }),
            },
            CharLabel::O => {
                if let Some(o) = open.as_mut() {
                    o.gap = true;
                }
            }
        }
    }
    if let Some(o) = open.take() {
        spans.push(o);
    }
    let slice = |a: usize, b: usize| -> String { chars[a..b].iter().collect() };
    let is_word = |c: char| c.is_alphanumeric();
    let mut tokens = Vec::with_capacity(spans.len());
    let mut starts = Vec::with_capacity(spans.len());
    for (id, o) in spans.iter().enumerate() {
        let pieces: Vec<String> = o.parts.iter().map(|&(a, b)| slice(a, b)).collect();
        let mut surface = String::new();
        for (k, p) in pieces.iter().enumerate() {
            if k > 0 {
                surface.push(GLUE);
            }
            surface.push_str(p);
        }
        // compound parts: a word continues across the token boundary
        let left = o.start > 0 && labels[o.start - 1] != CharLabel::O && is_word(chars[o.start - 1]) && is_word(chars[o.start]);
        let right = o.end < chars.len()
            && labels[o.end] != CharLabel::O
            && is_word(chars[o.end])
            && is_word(chars[o.end - 1]);
        let decomposed_from = if o.parts.len() == 1 && (left || right) {
            let mut a = o.start;
            while a > 0 && labels[a - 1] != CharLabel::O && is_word(chars[a - 1]) {
                a -= 1;
            }
            let mut b = o.end;
            while b < chars.len() && labels[b] != CharLabel::O && is_word(chars[b]) {
                b += 1;
            }
            Some(slice(a, b))
        } else {
            None
        };
        tokens.push(Token {
            id,
            char_start: o.start,
            char_end: o.end,
            surface,
            glue_parts: if pieces.len() > 1 { pieces } else { Vec::new() },
            decomposed_from,
        });
        starts.push(o.sentence);
    }
    Ok((tokens, starts))
}

/// Gold labels for text whose tokens are given as character spans, the
/// inverse of [`labels_to_tokens`]. `glued` spans may contain whitespace.
pub fn spans_to_labels(text: &str, spans: &[(usize, usize, bool)]) -> Vec<CharLabel> {
    let chars: Vec<char> = text.chars().collect();
    let mut labels = vec![CharLabel::O; chars.len()];
    for &(a, b, sentence_start) in spans {
        for i in a..b {
            labels[i] = if chars[i].is_whitespace() { CharLabel::O } else { CharLabel::I };
        }
        if a < b {
            labels[a] = if sentence_start { CharLabel::S } else { CharLabel::T };
        }
    }
    labels
}
