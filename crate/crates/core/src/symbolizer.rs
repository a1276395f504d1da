//! Symbolization: mapping tokens to non-logical symbols by a rule cascade.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::semtagger::TagSet;
use crate::token::{Lang, GLUE};

/// What a cascade step does with a token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Producer {
    Override,
    Gazetteer,
    PronounGender,
    ClockTime,
    Number,
    Irregular,
    SuffixLemma,
    LowercaseIdentity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolRule {
    pub priority: u32,
    /// Semtags the rule applies to; `None` matches every tag.
    pub semtags: Option<Vec<String>>,
    pub producer: Producer,
}

/// The cascade: gazetteer, pronoun gender, clock and number literals,
/// irregular forms, suffix lemmatization, lowercase identity.
pub fn default_rules() -> Vec<SymbolRule> {
    let rule = |priority, semtags: Option<&[&str]>, producer| SymbolRule {
        priority,
        semtags: semtags.map(|s| s.iter().map(|t| t.to_string()).collect()),
        producer,
    };
    vec![
        rule(10, None, Producer::Gazetteer),
        rule(20, Some(&["PRO", "REF", "HAS"]), Producer::PronounGender),
        rule(30, Some(&["CLO"]), Producer::ClockTime),
        rule(40, Some(&["QUC", "YOC"]), Producer::Number),
        rule(50, None, Producer::Irregular),
        rule(60, None, Producer::SuffixLemma),
        rule(70, None, Producer::LowercaseIdentity),
    ]
}

/// Semtags whose symbols are literal values copied verbatim across
/// languages.
pub fn is_literal_tag(tag: &str) -> bool {
    matches!(tag, "CLO" | "QUC" | "YOC" | "DOW" | "MOY" | "PER" | "GPE" | "ORG" | "GEO" | "ART")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GazetteerEntry {
    pub symbol: String,
    /// Only applies when the token carries this semtag.
    pub semtag: Option<String>,
}

/// Bare hours without am/pm below this value are read as afternoon hours.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClockPolicy {
    pub pm_below: u32,
}

impl Default for ClockPolicy {
    fn default() -> Self {
        ClockPolicy { pm_below: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SymbolResources {
    pub gazetteer: BTreeMap<(Lang, String), Vec<GazetteerEntry>>,
    pub irregular: BTreeMap<(Lang, String), String>,
    pub pronoun_gender: BTreeMap<(Lang, String), String>,
    pub clock: ClockPolicy,
    pub rules: Vec<SymbolRule>,
}

impl SymbolResources {
    /// Empty tables with the built-in pronoun genders and default cascade.
    pub fn new() -> SymbolResources {
        let mut r = SymbolResources {
            rules: default_rules(),
            ..Default::default()
        };
        for (lang, words, symbol) in PRONOUN_GENDER {
            for w in *words {
                r.pronoun_gender.insert((*lang, w.to_string()), symbol.to_string());
            }
        }
        r
    }

    pub fn add_gazetteer(&mut self, lang: Lang, surface: &str, symbol: &str, semtag: Option<&str>) {
        self.gazetteer.entry((lang, surface.to_lowercase())).or_default().push(GazetteerEntry {
            symbol: symbol.to_string(),
            semtag: semtag.map(String::from),
        });
    }

    pub fn add_irregular(&mut self, lang: Lang, form: &str, lemma: &str) {
        self.irregular.insert((lang, form.to_lowercase()), lemma.to_string());
    }
}

const PRONOUN_GENDER: &[(Lang, &[&str], &str)] = &[
    (Lang::En, &["he", "him", "his", "himself"], "male"),
    (Lang::En, &["she", "her", "hers", "herself"], "female"),
    (Lang::En, &["it", "its", "itself"], "thing"),
    (Lang::En, &["i", "me", "my", "myself", "we", "us", "our"], "speaker"),
    (Lang::En, &["you", "your", "yourself"], "hearer"),
    (Lang::En, &["they", "them", "their"], "person"),
    (Lang::De, &["er", "ihn", "ihm", "sein"], "male"),
    (Lang::De, &["sie", "ihr"], "female"),
    (Lang::De, &["es"], "thing"),
    (Lang::De, &["ich", "mich", "mir", "wir", "uns"], "speaker"),
    (Lang::De, &["du", "dich", "dir"], "hearer"),
    (Lang::Nl, &["hij", "hem", "zijn"], "male"),
    (Lang::Nl, &["zij", "ze", "haar"], "female"),
    (Lang::Nl, &["het"], "thing"),
    (Lang::Nl, &["ik", "mij", "me", "wij", "we", "ons"], "speaker"),
    (Lang::Nl, &["jij", "je"], "hearer"),
    (Lang::It, &["lui", "egli", "suo"], "male"),
    (Lang::It, &["lei", "ella", "sua"], "female"),
    (Lang::It, &["io", "noi"], "speaker"),
    (Lang::It, &["tu", "voi"], "hearer"),
];

/// A symbol together with the cascade step that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbolization {
    pub symbol: String,
    pub producer: Producer,
}

/// Symbol for a token, or `None` for symbol-free semtags.
pub fn symbolize(
    surface: &str,
    semtag: &str,
    lang: Lang,
    tagset: &TagSet,
    resources: &SymbolResources,
    overriding: Option<&str>,
) -> Option<String> {
    symbolize_traced(surface, semtag, lang, tagset, resources, overriding).map(|s| s.symbol)
}

pub fn symbolize_traced(
    surface: &str,
    semtag: &str,
    lang: Lang,
    tagset: &TagSet,
    resources: &SymbolResources,
    overriding: Option<&str>,
) -> Option<Symbolization> {
    if tagset.is_symbol_free(semtag) {
        return None;
    }
    if let Some(o) = overriding {
        return Some(Symbolization {
            symbol: o.to_string(),
            producer: Producer::Override,
        });
    }
    let lower = surface.to_lowercase();
    let mut rules = if resources.rules.is_empty() { default_rules() } else { resources.rules.clone() };
    rules.sort_by_key(|r| r.priority);
    for rule in &rules {
        if let Some(tags) = &rule.semtags {
            if !tags.iter().any(|t| t == semtag) {
                continue;
            }
        }
        let produced = match rule.producer {
            Producer::Override => None,
            Producer::Gazetteer => resources.gazetteer.get(&(lang, lower.clone())).and_then(|entries| {
                entries
                    .iter()
                    .find(|e| e.semtag.as_deref().is_none_or(|t| t == semtag))
                    .map(|e| e.symbol.clone())
            }),
            Producer::PronounGender => resources.pronoun_gender.get(&(lang, lower.clone())).cloned(),
            Producer::ClockTime => normalize_clock_with(surface, resources.clock).ok(),
            Producer::Number => normalize_number(surface),
            Producer::Irregular => resources.irregular.get(&(lang, lower.clone())).cloned(),
            Producer::SuffixLemma => {
                let lemma = lemmatize(&lower, lang);
                (lemma != lower).then_some(lemma)
            }
            Producer::LowercaseIdentity => Some(lower.clone()),
        };
        if let Some(symbol) = produced.filter(|s| !s.is_empty()) {
            return Some(Symbolization {
                symbol: symbol.replace(char::is_whitespace, &GLUE.to_string()),
                producer: rule.producer,
            });
        }
    }
    None
}

fn normalize_number(surface: &str) -> Option<String> {
    let s: String = surface.chars().filter(|c| *c != ',').collect();
    (!s.is_empty() && s.chars().all(|c| c.is_ascii_digit() || c == '.')).then_some(s)
}

// ---------------------------------------------------------------------------
// Clock times

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClockError(pub String);

impl fmt::Display for ClockError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not a clock time: {:?}", self.0)
    }
}

impl core::error::Error for ClockError {}

/// 24-hour `HH:MM` literal for a clock expression, with the default
/// policy for bare hours.
pub fn normalize_clock(surface: &str) -> Result<String, ClockError> {
    normalize_clock_with(surface, ClockPolicy::default())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Meridiem {
    Am,
    Pm,
    OClock,
    None,
}

pub fn normalize_clock_with(surface: &str, policy: ClockPolicy) -> Result<String, ClockError> {
    let err = || ClockError(surface.to_string());
    let lower = surface.to_lowercase().replace(GLUE, " ");
    let lower = lower.trim();
    let digits_end = lower.find(|c: char| !(c.is_ascii_digit() || c == ':' || c == '.')).unwrap_or(lower.len());
    let (time, rest) = lower.split_at(digits_end);
    let suffix = rest.trim();
    let meridiem = match suffix {
        "" => Meridiem::None,
        "am" | "a.m." | "a.m" => Meridiem::Am,
        "pm" | "p.m." | "p.m" => Meridiem::Pm,
        "o'clock" | "o\u{2019}clock" | "oclock" | "uhr" | "h" => Meridiem::OClock,
        _ => return Err(err()),
    };
    let time = time.trim_end_matches('.');
    let (h, m) = match time.split_once([':', '.']) {
        Some((h, m)) => (h, Some(m)),
        None => (time, None),
    };
    if h.is_empty() || h.len() > 2 || !h.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let hour: u32 = h.parse().map_err(|_| err())?;
    let minute: u32 = match m {
        Some(m) if m.len() == 2 && m.chars().all(|c| c.is_ascii_digit()) => m.parse().map_err(|_| err())?,
        Some(_) => return Err(err()),
        None => 0,
    };
    if minute > 59 {
        return Err(err());
    }
    let hour = match meridiem {
        Meridiem::Am | Meridiem::Pm if !(1..=12).contains(&hour) => return Err(err()),
        Meridiem::Am => hour % 12,
        Meridiem::Pm => hour % 12 + 12,
        Meridiem::OClock | Meridiem::None => {
            if hour > 23 {
                return Err(err());
            }
            if (1..policy.pm_below).contains(&hour) && m.is_none() {
                hour + 12
            } else {
                hour
            }
        }
    };
    Ok(format!("{:02}:{:02}", hour, minute))
}

// ---------------------------------------------------------------------------
// Lemmatization

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Restores a final `e` or undoes consonant doubling after stripping
/// `-ed`/`-ing`.
fn repair_stem(stem: &str) -> String {
    let cs: Vec<char> = stem.chars().collect();
    let n = cs.len();
    if n >= 3 && cs[n - 1] == cs[n - 2] && !is_vowel(cs[n - 1]) && !matches!(cs[n - 1], 'l' | 's' | 'z' | 'f') {
        return cs[..n - 1].iter().collect();
    }
    if n >= 2 && matches!(cs[n - 1], 'v' | 'c' | 'z' | 'u') {
        return format!("{}e", stem);
    }
    if n == 3 && !is_vowel(cs[0]) && is_vowel(cs[1]) && !is_vowel(cs[2]) && !matches!(cs[2], 'w' | 'x' | 'y') {
        return format!("{}e", stem);
    }
    stem.to_string()
}

/// Longest-matching suffix rule, applied once.
pub fn lemmatize(surface: &str, lang: Lang) -> String {
    let w = surface.to_lowercase();
    if lang != Lang::En || w.chars().count() <= 3 || !w.chars().all(|c| c.is_alphabetic()) {
        return w;
    }
    let strip = |suffix: &str| &w[..w.len() - suffix.len()];
    if w.ends_with("ies") && w.len() > 4 {
        format!("{}y", strip("ies"))
    } else if w.ends_with("ied") && w.len() > 4 {
        format!("{}y", strip("ied"))
    } else if w.ends_with("sses") || w.ends_with("shes") || w.ends_with("ches") || w.ends_with("xes") {
        strip("es").to_string()
    } else if w.ends_with("ing") && w.len() > 5 {
        repair_stem(strip("ing"))
    } else if w.ends_with("ed") && w.len() > 4 {
        let stem = strip("ed");
        if stem.ends_with('e') {
            stem.to_string()
        } else {
            repair_stem(stem)
        }
    } else if w.ends_with('s') && !w.ends_with("ss") && !w.ends_with("us") && !w.ends_with("is") {
        strip("s").to_string()
    } else {
        w
    }
}
