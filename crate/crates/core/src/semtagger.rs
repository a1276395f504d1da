//! Semantic tagset registry and a lexicon-plus-heuristics tagger.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::symbolizer::normalize_clock;
use crate::token::{Lang, Token};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TagInfo {
    pub class: String,
    pub description: String,
    pub symbol_free: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TagSet {
    pub entries: BTreeMap<String, TagInfo>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SemtagError {
    UnknownTag(String),
    DuplicateTag(String),
}

impl fmt::Display for SemtagError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemtagError::UnknownTag(t) => write!(f, "unknown semtag {}", t),
            SemtagError::DuplicateTag(t) => write!(f, "semtag {} defined twice", t),
        }
    }
}

impl core::error::Error for SemtagError {}

// (code, class, symbol-free, description)
const DEFAULT_TAGS: &[(&str, &str, bool, &str)] = &[
    ("PRO", "Anaphoric", false, "anaphoric pronoun"),
    ("DEF", "Anaphoric", true, "definite"),
    ("HAS", "Anaphoric", false, "possessive"),
    ("REF", "Anaphoric", false, "reflexive"),
    ("DST", "Anaphoric", true, "distal demonstrative"),
    ("IST", "Attribute", false, "intersective modifier"),
    ("SST", "Attribute", false, "subsective modifier"),
    ("PRI", "Attribute", false, "privative modifier"),
    ("INT", "Attribute", false, "intensifier"),
    ("EQU", "Attribute", false, "equative"),
    ("MOR", "Attribute", false, "comparative"),
    ("TOP", "Attribute", false, "superlative"),
    ("CON", "Concept", false, "concept"),
    ("ROL", "Concept", false, "role or profession"),
    ("GRP", "Concept", false, "group"),
    ("SUB", "Discourse", true, "subordinating relation"),
    ("COO", "Discourse", true, "coordinating relation"),
    ("APP", "Discourse", true, "apposition"),
    ("BUT", "Discourse", true, "contrast"),
    ("EXS", "Event", false, "untensed event"),
    ("ENS", "Event", false, "present simple event"),
    ("EPS", "Event", false, "past simple event"),
    ("EFS", "Event", false, "future simple event"),
    ("EXG", "Event", false, "progressive event"),
    ("EXT", "Event", false, "perfect event"),
    ("NIL", "Logical", true, "empty semantics or punctuation"),
    ("AND", "Logical", true, "conjunction"),
    ("ALT", "Logical", true, "alternative"),
    ("IMP", "Logical", true, "implication"),
    ("POS", "Modal", true, "possibility modal"),
    ("NEC", "Modal", true, "necessity modal"),
    ("PER", "NamedEntity", false, "person name"),
    ("GPE", "NamedEntity", false, "geo-political entity"),
    ("ORG", "NamedEntity", false, "organization"),
    ("GEO", "NamedEntity", false, "location"),
    ("ART", "NamedEntity", false, "artifact"),
    ("NOT", "Negation", true, "negation trigger"),
    ("DIS", "Quantification", true, "indefinite determiner"),
    ("QUC", "Quantification", false, "concrete quantity"),
    ("QUV", "Quantification", true, "vague quantity"),
    ("REL", "Relation", false, "relation"),
    ("CLO", "Temporal", false, "clock time"),
    ("DOW", "Temporal", false, "day of week"),
    ("MOY", "Temporal", false, "month of year"),
    ("YOC", "Temporal", false, "year of century"),
    ("UNK", "Unclassified", false, "unknown"),
];

/// The built-in tagset.
pub fn default_tagset() -> TagSet {
    let mut entries = BTreeMap::new();
    for (code, class, free, desc) in DEFAULT_TAGS {
        entries.insert(
            code.to_string(),
            TagInfo {
                class: class.to_string(),
                description: desc.to_string(),
                symbol_free: *free,
            },
        );
    }
    TagSet { entries }
}

impl TagSet {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, TagInfo)>) -> Result<TagSet, SemtagError> {
        let mut out = BTreeMap::new();
        for (code, info) in entries {
            if out.insert(code.clone(), info).is_some() {
                return Err(SemtagError::DuplicateTag(code));
            }
        }
        Ok(TagSet { entries: out })
    }

    pub fn get(&self, code: &str) -> Option<&TagInfo> {
        self.entries.get(code)
    }

    pub fn contains(&self, code: &str) -> bool {
        self.entries.contains_key(code)
    }

    /// Unknown tags are treated as carrying a symbol.
    pub fn is_symbol_free(&self, code: &str) -> bool {
        self.entries.get(code).is_some_and(|t| t.symbol_free)
    }

    /// Adds or replaces entries from another tagset.
    pub fn extend(&mut self, other: TagSet) {
        self.entries.extend(other.entries);
    }

    pub fn classes(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.entries.values().map(|t| t.class.as_str()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Counts of tags per (language, lowercased surface).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct TagLexicon {
    counts: BTreeMap<(Lang, String), BTreeMap<String, u32>>,
}

impl TagLexicon {
    pub fn add(&mut self, lang: Lang, surface: &str, tag: &str, count: u32) {
        if count == 0 {
            return;
        }
        *self
            .counts
            .entry((lang, surface.to_lowercase()))
            .or_default()
            .entry(tag.to_string())
            .or_insert(0) += count;
    }

    /// Tags ranked by count descending, ties by tag code.
    pub fn ranked(&self, lang: Lang, surface: &str) -> Vec<(String, u32)> {
        let mut out: Vec<(String, u32)> = self
            .counts
            .get(&(lang, surface.to_lowercase()))
            .map(|m| m.iter().map(|(t, c)| (t.clone(), *c)).collect())
            .unwrap_or_default();
        out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out
    }

    pub fn top(&self, lang: Lang, surface: &str) -> Option<String> {
        self.ranked(lang, surface).into_iter().next().map(|(t, _)| t)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Lang, &str, &str, u32)> {
        self.counts
            .iter()
            .flat_map(|((l, s), m)| m.iter().map(move |(t, c)| (*l, s.as_str(), t.as_str(), *c)))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn merge(&mut self, other: &TagLexicon) {
        for (l, s, t, c) in other.entries() {
            self.add(l, s, t, c);
        }
    }
}

/// Aggregates annotated triples into a lexicon, rejecting unknown tags.
pub fn train_lexicon(annotated: &[(Lang, String, String)], tagset: &TagSet) -> Result<TagLexicon, SemtagError> {
    let mut lex = TagLexicon::default();
    for (lang, surface, tag) in annotated {
        if !tagset.contains(tag) {
            return Err(SemtagError::UnknownTag(tag.clone()));
        }
        lex.add(*lang, surface, tag, 1);
    }
    Ok(lex)
}

fn pronouns(lang: Lang) -> &'static [&'static str] {
    match lang {
        Lang::En => &[
            "i", "me", "my", "myself", "you", "your", "yourself", "he", "him", "his", "himself", "she", "her", "hers",
            "herself", "it", "its", "itself", "we", "us", "our", "they", "them", "their",
        ],
        Lang::De => &["ich", "mich", "mir", "du", "dich", "dir", "er", "ihn", "ihm", "sie", "es", "wir", "uns", "ihr", "euch"],
        Lang::Nl => &["ik", "mij", "me", "jij", "je", "hij", "hem", "zij", "ze", "haar", "het", "wij", "we", "ons"],
        Lang::It => &["io", "me", "tu", "te", "lui", "lei", "egli", "ella", "noi", "voi", "loro"],
    }
}

pub fn is_pronoun(lang: Lang, surface: &str) -> bool {
    let lower = surface.to_lowercase();
    pronouns(lang).contains(&lower.as_str())
}

fn is_punctuation(surface: &str) -> bool {
    !surface.is_empty() && surface.chars().all(|c| !c.is_alphanumeric())
}

/// One semtag per token: override, then the lexicon's top tag, then
/// heuristics (numbers and clock times, pronouns, punctuation,
/// capitalized words inside a sentence, concepts).
pub fn tag(tokens: &[Token], lang: Lang, lexicon: &TagLexicon, overrides: &BTreeMap<usize, String>) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    for (i, tok) in tokens.iter().enumerate() {
        if let Some(t) = overrides.get(&i) {
            out.push(t.clone());
            continue;
        }
        if let Some(t) = lexicon.top(lang, &tok.surface) {
            out.push(t);
            continue;
        }
        let s = tok.surface.as_str();
        let tag = if (!s.is_empty() && s.chars().all(|c| c.is_ascii_digit())) || normalize_clock(s).is_ok() {
            "CLO"
        } else if is_pronoun(lang, s) {
            "PRO"
        } else if is_punctuation(s) {
            "NIL"
        } else if s.starts_with(char::is_uppercase) && !sentence_initial(tokens, i) {
            "PER"
        } else {
            "CON"
        };
        out.push(tag.to_string());
    }
    out
}

fn sentence_initial(tokens: &[Token], i: usize) -> bool {
    i == 0 || matches!(tokens[i - 1].surface.as_str(), "." | "!" | "?")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Token> {
        Token::from_surfaces(s)
    }

    #[test]
    fn tagset_lookups() {
        let ts = default_tagset();
        let not = ts.get("NOT").unwrap();
        assert_eq!(not.class, "Negation");
        assert_eq!(not.description, "negation trigger");
        assert!(!ts.get("CLO").unwrap().symbol_free);
        assert!(ts.get("XYZ").is_none());
        assert_eq!(ts.classes().len(), 13);
    }

    #[test]
    fn heuristics() {
        let lex = TagLexicon::default();
        let tags = tag(&toks("He met Mary at 5~o'clock ."), Lang::En, &lex, &BTreeMap::new());
        assert_eq!(tags, ["PRO", "CON", "PER", "CON", "CLO", "NIL"]);
    }

    #[test]
    fn lexicon_beats_heuristics_and_override_beats_lexicon() {
        let mut lex = TagLexicon::default();
        lex.add(Lang::En, "boxer", "ROL", 1);
        lex.add(Lang::En, "not", "NOT", 1);
        let t = toks("not boxer");
        assert_eq!(tag(&t, Lang::En, &lex, &BTreeMap::new()), ["NOT", "ROL"]);
        let ov: BTreeMap<usize, String> = [(1, "CON".to_string())].into_iter().collect();
        assert_eq!(tag(&t, Lang::En, &lex, &ov), ["NOT", "CON"]);
    }

    #[test]
    fn training_counts() {
        let ts = default_tagset();
        let mut data: Vec<(Lang, String, String)> = Vec::new();
        for _ in 0..3 {
            data.push((Lang::En, "wheel".into(), "CON".into()));
        }
        data.push((Lang::En, "wheel".into(), "ROL".into()));
        let lex = train_lexicon(&data, &ts).unwrap();
        assert_eq!(lex.top(Lang::En, "Wheel").as_deref(), Some("CON"));
        assert_eq!(lex.ranked(Lang::En, "wheel"), [("CON".to_string(), 3), ("ROL".to_string(), 1)]);
        let bad = [(Lang::En, "x".to_string(), "XYZ".to_string())];
        assert_eq!(train_lexicon(&bad, &ts), Err(SemtagError::UnknownTag("XYZ".into())));
    }

    #[test]
    fn ties_break_by_code() {
        let mut lex = TagLexicon::default();
        lex.add(Lang::En, "x", "ROL", 2);
        lex.add(Lang::En, "x", "CON", 2);
        assert_eq!(lex.top(Lang::En, "x").as_deref(), Some("CON"));
    }
}
