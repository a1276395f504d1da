//! Document store with per-language layers, a journal of human
//! corrections (BoWs), layer statuses and annotation conflicts.
//!
//! Layout on disk:
//!
//! ```text
//! p00/d3178/en.raw  en.tok  en.semtag  en.sym  en.cat  en.der  en.drs
//! p00/d3178/de.raw  ...     de.align
//! p00/d3178/journal.jsonl
//! ```
//!
//! Layer files hold automatic output. The journal is append-only JSON
//! lines; the effective value of a layer is its automatic value with the
//! latest BoW per position applied.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use meaningbank_core::category::parse_category;
use meaningbank_core::drs::drs_alpha_equal;
use meaningbank_core::projector::parse_alignment_line;
use meaningbank_core::segmenter::{labels_to_sentences, spans_to_labels, CharLabel};
use meaningbank_core::token::{Lang, Token};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::formats;
use crate::models::{ModelSet, Models};
use crate::pipeline::{self, Annotation, Overrides, SentenceOutcome};

// ---------------------------------------------------------------------------
// Identifiers

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DocId {
    pub part: u8,
    pub doc: u32,
}

impl DocId {
    pub fn new(part: u8, doc: u32) -> Result<DocId, BankError> {
        if part > 99 || doc == 0 {
            return Err(BankError::NotFound(format!("no document {:02}/{}", part, doc)));
        }
        Ok(DocId { part, doc })
    }

    pub fn parse(part: &str, doc: &str) -> Result<DocId, BankError> {
        let missing = || BankError::NotFound(format!("no document {}/{}", part, doc));
        if part.len() != 2 {
            return Err(missing());
        }
        DocId::new(part.parse().map_err(|_| missing())?, doc.parse().map_err(|_| missing())?)
    }

    /// Parts whose documents are slated for full manual checking.
    pub fn in_gold_part(self) -> bool {
        matches!(self.part, 0 | 10)
    }

    fn dir(self) -> PathBuf {
        PathBuf::from(format!("p{:02}", self.part)).join(format!("d{}", self.doc))
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}/{}", self.part, self.doc)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Tok,
    Semtag,
    Sym,
    Cat,
    Drs,
    Der,
    Align,
}

impl Layer {
    pub const ALL: [Layer; 7] = [Layer::Tok, Layer::Semtag, Layer::Sym, Layer::Cat, Layer::Drs, Layer::Der, Layer::Align];
    /// Layers that hold pipeline output and can be checked against a rerun.
    pub const ANNOTATED: [Layer; 5] = [Layer::Tok, Layer::Semtag, Layer::Sym, Layer::Cat, Layer::Drs];

    pub fn name(self) -> &'static str {
        match self {
            Layer::Tok => "tok",
            Layer::Semtag => "semtag",
            Layer::Sym => "sym",
            Layer::Cat => "cat",
            Layer::Drs => "drs",
            Layer::Der => "der",
            Layer::Align => "align",
        }
    }

    pub fn parse(s: &str) -> Option<Layer> {
        Layer::ALL.into_iter().find(|l| l.name() == s)
    }

    /// Derivations follow from the other layers and take no BoWs.
    pub fn accepts_bows(self) -> bool {
        self != Layer::Der
    }

    /// Row label in the statistics table.
    pub fn title(self) -> &'static str {
        match self {
            Layer::Tok => "Tokens",
            Layer::Semtag => "Semtags",
            Layer::Sym => "Symbols",
            Layer::Cat => "Categories",
            Layer::Drs => "DRSs",
            Layer::Der => "Derivations",
            Layer::Align => "Alignments",
        }
    }
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Status {
    Gold,
    Silver,
    Bronze,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Gold => "Gold",
            Status::Silver => "Silver",
            Status::Bronze => "Bronze",
        })
    }
}

mod lang_code {
    use meaningbank_core::token::Lang;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(l: &Lang, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(l.code())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Lang, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|e| serde::de::Error::custom(format!("{}", e)))
    }
}

// ---------------------------------------------------------------------------
// Journal records

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bow {
    pub timestamp: u64,
    pub annotator: String,
    #[serde(with = "lang_code")]
    pub lang: Lang,
    pub layer: Layer,
    pub position: usize,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", content = "kept", rename_all = "lowercase")]
pub enum ConflictState {
    Open,
    Resolved(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    pub id: String,
    pub doc: DocId,
    #[serde(with = "lang_code")]
    pub lang: Lang,
    pub layer: Layer,
    pub position: usize,
    pub gold_value: String,
    pub new_value: String,
    pub state: ConflictState,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Record {
    Bow(Bow),
    /// Marks a layer as manually checked, or withdraws the mark.
    Gold {
        timestamp: u64,
        annotator: String,
        #[serde(with = "lang_code")]
        lang: Lang,
        layer: Layer,
        checked: bool,
    },
    Conflict {
        timestamp: u64,
        conflict: Conflict,
    },
    Resolve {
        timestamp: u64,
        annotator: String,
        id: String,
        value: String,
    },
}

#[derive(Debug)]
pub enum BankError {
    NotFound(String),
    InvalidPosition(String),
    InvalidValue(String),
    NotOpen(String),
    Io(std::io::Error),
    Corrupt(String),
}

impl fmt::Display for BankError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BankError::NotFound(m) | BankError::InvalidPosition(m) | BankError::InvalidValue(m) => f.write_str(m),
            BankError::NotOpen(id) => write!(f, "conflict {} is not open", id),
            BankError::Io(e) => write!(f, "{}", e),
            BankError::Corrupt(m) => write!(f, "corrupt bank data: {}", m),
        }
    }
}

impl std::error::Error for BankError {}

impl From<std::io::Error> for BankError {
    fn from(e: std::io::Error) -> Self {
        BankError::Io(e)
    }
}

// ---------------------------------------------------------------------------
// Pure operations

/// Latest BoW per position wins; BoWs are ordered by timestamp, ties by
/// their order in the slice.
pub fn apply_bows(automatic: &[String], bows: &[Bow]) -> Result<Vec<String>, BankError> {
    if let Some(b) = bows.iter().find(|b| b.position >= automatic.len()) {
        return Err(BankError::InvalidPosition(format!(
            "{} position {} is out of range (layer has {} positions)",
            b.layer,
            b.position,
            automatic.len()
        )));
    }
    Ok(apply_in_range(automatic, bows))
}

/// Like [`apply_bows`], ignoring BoWs that no longer fit the layer.
fn apply_in_range(automatic: &[String], bows: &[Bow]) -> Vec<String> {
    let mut sorted: Vec<&Bow> = bows.iter().collect();
    sorted.sort_by_key(|b| b.timestamp);
    let mut out = automatic.to_vec();
    for b in sorted {
        if let Some(slot) = out.get_mut(b.position) {
            *slot = b.value.clone();
        }
    }
    out
}

pub fn status(bows: &[Bow], gold: bool) -> Status {
    if gold {
        Status::Gold
    } else if !bows.is_empty() {
        Status::Silver
    } else {
        Status::Bronze
    }
}

/// One open conflict per position where a gold layer's new value differs
/// from its current value. Ids are left empty for the bank to assign.
pub fn detect_conflicts(
    doc: DocId,
    lang: Lang,
    layer: Layer,
    gold: bool,
    old_effective: &[String],
    new_values: &[String],
) -> Vec<Conflict> {
    if !gold {
        return Vec::new();
    }
    let n = old_effective.len().max(new_values.len());
    (0..n)
        .filter_map(|i| {
            let old = old_effective.get(i).map(String::as_str).unwrap_or("");
            let new = new_values.get(i).map(String::as_str).unwrap_or("");
            let same = if layer == Layer::Drs { same_drs_layer(old, new) } else { old == new };
            (!same).then(|| Conflict {
                id: String::new(),
                doc,
                lang,
                layer,
                position: i,
                gold_value: old.to_string(),
                new_value: new.to_string(),
                state: ConflictState::Open,
            })
        })
        .collect()
}

/// DRS layers compare sentence by sentence up to renaming of referents.
fn same_drs_layer(a: &str, b: &str) -> bool {
    match (formats::read_drs_layer(a), formats::read_drs_layer(b)) {
        (Ok(x), Ok(y)) => {
            x.len() == y.len()
                && x.iter().zip(&y).all(|(p, q)| match (p, q) {
                    (Some(p), Some(q)) => drs_alpha_equal(p, q),
                    (None, None) => true,
                    _ => false,
                })
        }
        _ => a == b,
    }
}

/// Checks a BoW value against its layer's syntax.
pub fn validate_value(layer: Layer, value: &str) -> Result<(), BankError> {
    let bad = |m: String| Err(BankError::InvalidValue(m));
    match layer {
        Layer::Tok => {
            let mut cs = value.chars();
            match (cs.next().and_then(CharLabel::from_char), cs.next()) {
                (Some(_), None) => Ok(()),
                _ => bad(format!("token label must be one of S, T, I, O, found {:?}", value)),
            }
        }
        Layer::Semtag | Layer::Sym => {
            if value.is_empty() || value.chars().any(char::is_whitespace) {
                bad(format!("{} value must be a single non-empty word, found {:?}", layer, value))
            } else {
                Ok(())
            }
        }
        Layer::Cat => parse_category(value).map(|_| ()).or_else(|e| bad(format!("{}", e))),
        Layer::Drs => formats::read_drs_layer(value).map(|_| ()).or_else(|e| bad(format!("{}", e))),
        Layer::Align => parse_alignment_line(value, 1).map(|_| ()).or_else(|e| bad(format!("{}", e))),
        Layer::Der => bad("derivations are computed, not corrected".into()),
    }
}

// ---------------------------------------------------------------------------
// Views

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerView {
    pub doc: DocId,
    #[serde(with = "lang_code")]
    pub lang: Lang,
    pub layer: Layer,
    pub status: Status,
    pub values: Vec<String>,
    /// Token count per sentence for token-valued layers.
    pub sentences: Vec<usize>,
    pub bows: usize,
    pub open_conflicts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentSummary {
    pub doc: DocId,
    pub gold_part: bool,
    pub languages: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageInfo {
    pub lang: String,
    pub raw: String,
    pub statuses: BTreeMap<String, Status>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentDetail {
    pub doc: DocId,
    pub gold_part: bool,
    pub languages: Vec<LanguageInfo>,
}

// ---------------------------------------------------------------------------
// The bank

pub struct Bank {
    root: PathBuf,
    locks: Mutex<HashMap<DocId, Arc<RwLock<()>>>>,
}

fn now_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

fn read_optional(path: &Path) -> Result<Option<String>, BankError> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(Some(s)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Journal contents for one document, replayed.
#[derive(Clone, Debug, Default)]
struct Journal {
    records: Vec<Record>,
}

impl Journal {
    fn bows(&self, lang: Lang, layer: Layer) -> Vec<Bow> {
        self.records
            .iter()
            .filter_map(|r| match r {
                Record::Bow(b) if b.lang == lang && b.layer == layer => Some(b.clone()),
                _ => None,
            })
            .collect()
    }

    fn gold(&self, lang: Lang, layer: Layer) -> bool {
        self.records
            .iter()
            .rev()
            .find_map(|r| match r {
                Record::Gold { lang: l, layer: y, checked, .. } if *l == lang && *y == layer => Some(*checked),
                _ => None,
            })
            .unwrap_or(false)
    }

    fn conflicts(&self) -> Vec<Conflict> {
        let mut out: Vec<Conflict> = Vec::new();
        for r in &self.records {
            match r {
                Record::Conflict { conflict, .. } => out.push(conflict.clone()),
                Record::Resolve { id, value, .. } => {
                    if let Some(c) = out.iter_mut().find(|c| &c.id == id) {
                        c.state = ConflictState::Resolved(value.clone());
                    }
                }
                _ => {}
            }
        }
        out
    }

    fn open_conflicts(&self, lang: Lang, layer: Layer) -> Vec<Conflict> {
        self.conflicts()
            .into_iter()
            .filter(|c| c.lang == lang && c.layer == layer && c.state == ConflictState::Open)
            .collect()
    }
}

impl Bank {
    pub fn open(root: impl Into<PathBuf>) -> Result<Bank, BankError> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Bank {
            root,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn lock(&self, id: DocId) -> Arc<RwLock<()>> {
        self.locks.lock().entry(id).or_default().clone()
    }

    fn doc_dir(&self, id: DocId) -> PathBuf {
        self.root.join(id.dir())
    }

    fn file(&self, id: DocId, lang: Lang, ext: &str) -> PathBuf {
        self.doc_dir(id).join(format!("{}.{}", lang.code(), ext))
    }

    fn exists(&self, id: DocId) -> bool {
        self.doc_dir(id).is_dir()
    }

    fn require(&self, id: DocId) -> Result<(), BankError> {
        if self.exists(id) {
            Ok(())
        } else {
            Err(BankError::NotFound(format!("no document {}", id)))
        }
    }

    fn require_lang(&self, id: DocId, lang: Lang) -> Result<(), BankError> {
        self.require(id)?;
        if self.file(id, lang, "raw").is_file() {
            Ok(())
        } else {
            Err(BankError::NotFound(format!("document {} has no {} text", id, lang)))
        }
    }

    /// Adds or replaces the raw text of one language of a document.
    pub fn put_raw(&self, id: DocId, lang: Lang, text: &str) -> Result<(), BankError> {
        let lock = self.lock(id);
        let _w = lock.write();
        fs::create_dir_all(self.doc_dir(id))?;
        fs::write(self.file(id, lang, "raw"), text)?;
        Ok(())
    }

    /// Stores word alignments (one line per target sentence) for a
    /// non-English language.
    pub fn put_alignment(&self, id: DocId, lang: Lang, lines: &[String]) -> Result<(), BankError> {
        self.require_lang(id, lang)?;
        for (k, l) in lines.iter().enumerate() {
            parse_alignment_line(l, k + 1).map_err(|e| BankError::InvalidValue(e.to_string()))?;
        }
        let lock = self.lock(id);
        let _w = lock.write();
        let mut text = lines.join("\n");
        text.push('\n');
        fs::write(self.file(id, lang, "align"), text)?;
        Ok(())
    }

    pub fn documents(&self, part: Option<u8>) -> Result<Vec<DocId>, BankError> {
        let mut out = Vec::new();
        for p in fs::read_dir(&self.root)? {
            let p = p?;
            let name = p.file_name().to_string_lossy().into_owned();
            let Some(part_no) = name.strip_prefix('p').and_then(|s| (s.len() == 2).then_some(s)).and_then(|s| s.parse::<u8>().ok()) else {
                continue;
            };
            if part.is_some_and(|q| q != part_no) || !p.path().is_dir() {
                continue;
            }
            for d in fs::read_dir(p.path())? {
                let d = d?;
                let dname = d.file_name().to_string_lossy().into_owned();
                if let Some(n) = dname.strip_prefix('d').and_then(|s| s.parse::<u32>().ok()) {
                    if let Ok(id) = DocId::new(part_no, n) {
                        out.push(id);
                    }
                }
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn languages(&self, id: DocId) -> Vec<Lang> {
        Lang::ALL.into_iter().filter(|l| self.file(id, *l, "raw").is_file()).collect()
    }

    pub fn raw(&self, id: DocId, lang: Lang) -> Result<String, BankError> {
        self.require_lang(id, lang)?;
        Ok(fs::read_to_string(self.file(id, lang, "raw"))?)
    }

    pub fn summary(&self, id: DocId) -> DocumentSummary {
        DocumentSummary {
            doc: id,
            gold_part: id.in_gold_part(),
            languages: self.languages(id).iter().map(|l| l.code().to_string()).collect(),
        }
    }

    pub fn detail(&self, id: DocId) -> Result<DocumentDetail, BankError> {
        self.require(id)?;
        let lock = self.lock(id);
        let _r = lock.read();
        let journal = self.journal(id)?;
        let mut languages = Vec::new();
        for lang in self.languages(id) {
            let statuses = Layer::ALL
                .into_iter()
                .filter(|l| l.accepts_bows())
                .map(|l| (l.name().to_string(), status(&journal.bows(lang, l), journal.gold(lang, l))))
                .collect();
            languages.push(LanguageInfo {
                lang: lang.code().to_string(),
                raw: fs::read_to_string(self.file(id, lang, "raw"))?,
                statuses,
            });
        }
        Ok(DocumentDetail {
            doc: id,
            gold_part: id.in_gold_part(),
            languages,
        })
    }

    fn journal(&self, id: DocId) -> Result<Journal, BankError> {
        let path = self.doc_dir(id).join("journal.jsonl");
        let mut records = Vec::new();
        if let Some(text) = read_optional(&path)? {
            for (n, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let r: Record = serde_json::from_str(line)
                    .map_err(|e| BankError::Corrupt(format!("{} line {}: {}", path.display(), n + 1, e)))?;
                records.push(r);
            }
        }
        Ok(Journal { records })
    }

    fn append(&self, id: DocId, records: &[Record]) -> Result<(), BankError> {
        if records.is_empty() {
            return Ok(());
        }
        let mut text = String::new();
        for r in records {
            text.push_str(&serde_json::to_string(r).expect("records serialize"));
            text.push('\n');
        }
        let mut f = OpenOptions::new().create(true).append(true).open(self.doc_dir(id).join("journal.jsonl"))?;
        f.write_all(text.as_bytes())?;
        f.sync_data()?;
        Ok(())
    }

    /// Every journal record of a document, in order.
    pub fn records(&self, id: DocId) -> Result<Vec<Record>, BankError> {
        self.require(id)?;
        let lock = self.lock(id);
        let _r = lock.read();
        Ok(self.journal(id)?.records)
    }

    // -- layer files --------------------------------------------------------

    fn tokens_file(&self, id: DocId, lang: Lang) -> Result<Option<Vec<Vec<Token>>>, BankError> {
        match read_optional(&self.file(id, lang, "tok"))? {
            None => Ok(None),
            Some(t) => formats::read_tokens(&t).map(Some).map_err(|e| BankError::Corrupt(format!("{}.tok: {}", lang, e))),
        }
    }

    /// Automatic values of a layer and the sentence sizes they follow.
    fn automatic(&self, id: DocId, lang: Lang, layer: Layer) -> Result<(Vec<String>, Vec<usize>), BankError> {
        let raw = fs::read_to_string(self.file(id, lang, "raw"))?;
        let sentences = self.tokens_file(id, lang)?;
        let sizes: Vec<usize> = sentences.as_ref().map(|s| s.iter().map(Vec::len).collect()).unwrap_or_default();
        let corrupt = |e: formats::FormatError| BankError::Corrupt(format!("{}.{}: {}", lang, layer, e));
        let values = match layer {
            Layer::Tok => {
                let spans: Vec<(usize, usize, bool)> = sentences
                    .iter()
                    .flatten()
                    .flat_map(|s| s.iter().enumerate().map(|(i, t)| (t.char_start, t.char_end, i == 0)))
                    .collect();
                let labels = if sentences.is_some() {
                    spans_to_labels(&raw, &spans)
                } else {
                    vec![CharLabel::O; raw.chars().count()]
                };
                labels.iter().map(|l| l.as_char().to_string()).collect()
            }
            Layer::Semtag | Layer::Sym | Layer::Cat => match read_optional(&self.file(id, lang, layer.name()))? {
                Some(t) => formats::read_token_values(&t).map_err(corrupt)?,
                None => Vec::new(),
            },
            Layer::Drs => vec![read_optional(&self.file(id, lang, "drs"))?.unwrap_or_default()],
            Layer::Der => read_optional(&self.file(id, lang, "der"))?
                .map(|t| t.lines().map(String::from).collect())
                .unwrap_or_default(),
            Layer::Align => {
                let mut lines: Vec<String> = read_optional(&self.file(id, lang, "align"))?
                    .map(|t| t.lines().map(String::from).collect())
                    .unwrap_or_default();
                lines.resize(sizes.len().max(lines.len()), String::new());
                lines
            }
        };
        Ok((values, sizes))
    }

    /// Effective values: BoWs applied, and gold values kept at positions
    /// with an open conflict.
    fn effective(&self, id: DocId, lang: Lang, layer: Layer, journal: &Journal) -> Result<(Vec<String>, Vec<usize>), BankError> {
        let (auto, sizes) = self.automatic(id, lang, layer)?;
        let mut values = apply_in_range(&auto, &journal.bows(lang, layer));
        for c in journal.open_conflicts(lang, layer) {
            if let Some(slot) = values.get_mut(c.position) {
                *slot = c.gold_value.clone();
            }
        }
        Ok((values, sizes))
    }

    pub fn layer(&self, id: DocId, lang: Lang, layer: Layer) -> Result<LayerView, BankError> {
        self.require_lang(id, lang)?;
        let lock = self.lock(id);
        let _r = lock.read();
        let journal = self.journal(id)?;
        let (values, sizes) = self.effective(id, lang, layer, &journal)?;
        let bows = journal.bows(lang, layer);
        Ok(LayerView {
            doc: id,
            lang,
            layer,
            status: status(&bows, journal.gold(lang, layer)),
            values,
            sentences: if matches!(layer, Layer::Semtag | Layer::Sym | Layer::Cat) { sizes } else { Vec::new() },
            bows: bows.len(),
            open_conflicts: journal.open_conflicts(lang, layer).into_iter().map(|c| c.id).collect(),
        })
    }

    /// Effective tokens, split into sentences.
    pub fn tokens(&self, id: DocId, lang: Lang) -> Result<Vec<Vec<Token>>, BankError> {
        self.require_lang(id, lang)?;
        let lock = self.lock(id);
        let _r = lock.read();
        let journal = self.journal(id)?;
        self.effective_tokens(id, lang, &journal)
    }

    fn effective_tokens(&self, id: DocId, lang: Lang, journal: &Journal) -> Result<Vec<Vec<Token>>, BankError> {
        let raw = fs::read_to_string(self.file(id, lang, "raw"))?;
        let (values, _) = self.effective(id, lang, Layer::Tok, journal)?;
        let labels = labels_of(&values)?;
        labels_to_sentences(&raw, &labels).map_err(|e| BankError::Corrupt(e.to_string()))
    }

    /// Records a BoW and returns the layer's new status.
    pub fn add_bow(&self, id: DocId, lang: Lang, layer: Layer, position: usize, value: &str, annotator: &str) -> Result<Status, BankError> {
        self.require_lang(id, lang)?;
        validate_value(layer, value)?;
        let lock = self.lock(id);
        let _w = lock.write();
        let journal = self.journal(id)?;
        let (current, _) = self.effective(id, lang, layer, &journal)?;
        let bow = Bow {
            timestamp: now_millis(),
            annotator: annotator.to_string(),
            lang,
            layer,
            position,
            value: value.to_string(),
        };
        let updated = apply_bows(&current, std::slice::from_ref(&bow))?;
        if layer == Layer::Tok {
            // the new labelling must still describe tokens of the raw text
            let raw = fs::read_to_string(self.file(id, lang, "raw"))?;
            let labels = labels_of(&updated)?;
            labels_to_sentences(&raw, &labels).map_err(|e| BankError::InvalidValue(e.to_string()))?;
        }
        self.append(id, &[Record::Bow(bow.clone())])?;
        let mut bows = journal.bows(lang, layer);
        bows.push(bow);
        Ok(status(&bows, journal.gold(lang, layer)))
    }

    /// Marks a layer as manually checked (or not) and returns its status.
    pub fn set_gold(&self, id: DocId, lang: Lang, layer: Layer, checked: bool, annotator: &str) -> Result<Status, BankError> {
        self.require_lang(id, lang)?;
        if !layer.accepts_bows() {
            return Err(BankError::InvalidValue(format!("{} layers cannot be checked", layer)));
        }
        let lock = self.lock(id);
        let _w = lock.write();
        self.append(
            id,
            &[Record::Gold {
                timestamp: now_millis(),
                annotator: annotator.to_string(),
                lang,
                layer,
                checked,
            }],
        )?;
        let journal = self.journal(id)?;
        Ok(status(&journal.bows(lang, layer), journal.gold(lang, layer)))
    }

    /// Overrides for a pipeline run: the latest BoW per position.
    fn overrides(&self, lang: Lang, journal: &Journal) -> Result<Overrides, BankError> {
        let latest = |layer: Layer| -> BTreeMap<usize, String> {
            let mut bows = journal.bows(lang, layer);
            bows.sort_by_key(|b| b.timestamp);
            bows.into_iter().map(|b| (b.position, b.value)).collect()
        };
        let mut o = Overrides::default();
        for (p, v) in latest(Layer::Tok) {
            o.tok.push((p, label_of(&v)?));
        }
        o.semtag = latest(Layer::Semtag);
        o.sym = latest(Layer::Sym).into_iter().map(|(p, v)| (p, formats::parse_symbol_value(&v))).collect();
        for (p, v) in latest(Layer::Cat) {
            let c = parse_category(&v).map_err(|e| BankError::Corrupt(e.to_string()))?;
            o.cat.insert(p, c);
        }
        Ok(o)
    }

    /// Annotation of a language as stored, for use as a projection source.
    fn stored_annotation(&self, id: DocId, lang: Lang, journal: &Journal, models: &Models) -> Result<Option<Annotation>, BankError> {
        let sentences = self.effective_tokens(id, lang, journal)?;
        let der = self.automatic(id, lang, Layer::Der)?.0;
        let (drs_text, _) = self.effective(id, lang, Layer::Drs, journal)?;
        let drss = formats::read_drs_layer(&drs_text[0]).map_err(|e| BankError::Corrupt(e.to_string()))?;
        if sentences.is_empty() || der.len() != sentences.len() || drss.len() != sentences.len() {
            return Ok(None);
        }
        let ctx = models.lexical_context();
        let mut outcomes = Vec::new();
        for (line, drs) in der.iter().zip(drss) {
            let derivation = if line == "-" {
                None
            } else {
                Some(formats::read_derivation(line, &ctx).map_err(BankError::Corrupt)?)
            };
            outcomes.push(SentenceOutcome {
                derivation,
                drs,
                error: None,
                projection: None,
            });
        }
        Ok(Some(Annotation {
            labels: Vec::new(),
            sentences,
            semtags: Vec::new(),
            symbols: Vec::new(),
            categories: Vec::new(),
            outcomes,
        }))
    }

    fn write_annotation(&self, id: DocId, lang: Lang, a: &Annotation) -> Result<(), BankError> {
        let sizes = a.sizes();
        let sym: Vec<String> = a.symbols.iter().map(|s| formats::symbol_value(s.as_deref())).collect();
        let cat: Vec<String> = a.categories.iter().map(|c| c.to_string()).collect();
        let der: String = a
            .outcomes
            .iter()
            .map(|o| match &o.derivation {
                Some(d) => format!("{}\n", formats::write_derivation(d)),
                None => "-\n".to_string(),
            })
            .collect();
        fs::write(self.file(id, lang, "tok"), formats::write_tokens(&a.sentences))?;
        fs::write(self.file(id, lang, "semtag"), formats::write_token_values(&sizes, &a.semtags))?;
        fs::write(self.file(id, lang, "sym"), formats::write_token_values(&sizes, &sym))?;
        fs::write(self.file(id, lang, "cat"), formats::write_token_values(&sizes, &cat))?;
        fs::write(self.file(id, lang, "der"), der)?;
        fs::write(self.file(id, lang, "drs"), formats::write_drs_layer(&a.drss()))?;
        Ok(())
    }

    /// Reruns the pipeline for one language of a document, replaces the
    /// automatic layers and returns the conflicts created on gold layers.
    ///
    /// Non-English languages are projected from the stored English
    /// annotation when word alignments are available.
    pub fn reannotate(&self, id: DocId, lang: Lang, models: &ModelSet) -> Result<Vec<Conflict>, BankError> {
        self.require_lang(id, lang)?;
        let lock = self.lock(id);
        let _w = lock.write();
        let journal = self.journal(id)?;
        let raw = fs::read_to_string(self.file(id, lang, "raw"))?;
        let overrides = self.overrides(lang, &journal)?;
        let m = models.get(lang);

        let mut annotation = None;
        if lang != Lang::En && self.file(id, Lang::En, "der").is_file() {
            let (align, _) = self.effective(id, lang, Layer::Align, &journal)?;
            let mut words = BTreeMap::new();
            for (k, line) in align.iter().enumerate() {
                if !line.trim().is_empty() {
                    let pairs = parse_alignment_line(line, k + 1).map_err(|e| BankError::Corrupt(e.to_string()))?;
                    words.insert(k, pairs);
                }
            }
            if !words.is_empty() {
                if let Some(src) = self.stored_annotation(id, Lang::En, &journal, models.get(Lang::En))? {
                    annotation = Some(pipeline::annotate_projected(m, &src, &raw, None, &words, &overrides));
                }
            }
        }
        let annotation = annotation.unwrap_or_else(|| pipeline::annotate(m, &raw, &overrides));

        let had_files = self.file(id, lang, "tok").is_file();
        let mut olds = BTreeMap::new();
        if had_files {
            for layer in Layer::ANNOTATED {
                olds.insert(layer, self.effective(id, lang, layer, &journal)?.0);
            }
        }
        self.write_annotation(id, lang, &annotation)?;

        let mut conflicts = Vec::new();
        let existing = journal.conflicts();
        let mut next = existing.len();
        for (layer, old) in olds {
            let (auto, _) = self.automatic(id, lang, layer)?;
            let new = apply_in_range(&auto, &journal.bows(lang, layer));
            for mut c in detect_conflicts(id, lang, layer, journal.gold(lang, layer), &old, &new) {
                let duplicate = existing.iter().any(|e| {
                    e.state == ConflictState::Open && e.lang == c.lang && e.layer == c.layer && e.position == c.position && e.new_value == c.new_value
                });
                if duplicate {
                    continue;
                }
                c.id = format!("{:02}-{}-{}", id.part, id.doc, next);
                next += 1;
                conflicts.push(c);
            }
        }
        let ts = now_millis();
        let records: Vec<Record> = conflicts
            .iter()
            .map(|c| Record::Conflict {
                timestamp: ts,
                conflict: c.clone(),
            })
            .collect();
        self.append(id, &records)?;
        Ok(conflicts)
    }

    pub fn conflicts(&self, open_only: bool) -> Result<Vec<Conflict>, BankError> {
        let mut out = Vec::new();
        for id in self.documents(None)? {
            let lock = self.lock(id);
            let _r = lock.read();
            out.extend(
                self.journal(id)?
                    .conflicts()
                    .into_iter()
                    .filter(|c| !open_only || c.state == ConflictState::Open),
            );
        }
        Ok(out)
    }

    /// Closes an open conflict; the kept value becomes a BoW.
    pub fn resolve(&self, conflict_id: &str, value: &str, annotator: &str) -> Result<Conflict, BankError> {
        let mut parts = conflict_id.splitn(3, '-');
        let (Some(p), Some(d), Some(_)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(BankError::NotFound(format!("no conflict {}", conflict_id)));
        };
        let id = DocId::parse(p, d).map_err(|_| BankError::NotFound(format!("no conflict {}", conflict_id)))?;
        if !self.exists(id) {
            return Err(BankError::NotFound(format!("no conflict {}", conflict_id)));
        }
        let lock = self.lock(id);
        let _w = lock.write();
        let journal = self.journal(id)?;
        let mut c = journal
            .conflicts()
            .into_iter()
            .find(|c| c.id == conflict_id)
            .ok_or_else(|| BankError::NotFound(format!("no conflict {}", conflict_id)))?;
        if c.state != ConflictState::Open {
            return Err(BankError::NotOpen(conflict_id.to_string()));
        }
        validate_value(c.layer, value)?;
        let ts = now_millis();
        self.append(
            id,
            &[
                Record::Resolve {
                    timestamp: ts,
                    annotator: annotator.to_string(),
                    id: conflict_id.to_string(),
                    value: value.to_string(),
                },
                Record::Bow(Bow {
                    timestamp: ts,
                    annotator: annotator.to_string(),
                    lang: c.lang,
                    layer: c.layer,
                    position: c.position,
                    value: value.to_string(),
                }),
            ],
        )?;
        c.state = ConflictState::Resolved(value.to_string());
        Ok(c)
    }

    /// Document counts per (layer, language, status).
    pub fn stats(&self) -> Result<Vec<StatsRow>, BankError> {
        let mut rows: Vec<StatsRow> = Vec::new();
        for layer in Layer::ANNOTATED {
            for lang in Lang::ALL {
                rows.push(StatsRow {
                    layer,
                    lang,
                    gold: 0,
                    silver: 0,
                    bronze: 0,
                });
            }
        }
        for id in self.documents(None)? {
            let lock = self.lock(id);
            let _r = lock.read();
            let journal = self.journal(id)?;
            for lang in self.languages(id) {
                for row in rows.iter_mut().filter(|r| r.lang == lang) {
                    match status(&journal.bows(lang, row.layer), journal.gold(lang, row.layer)) {
                        Status::Gold => row.gold += 1,
                        Status::Silver => row.silver += 1,
                        Status::Bronze => row.bronze += 1,
                    }
                }
            }
        }
        Ok(rows)
    }
}

fn label_of(v: &str) -> Result<CharLabel, BankError> {
    let mut cs = v.chars();
    match (cs.next().and_then(CharLabel::from_char), cs.next()) {
        (Some(l), None) => Ok(l),
        _ => Err(BankError::Corrupt(format!("bad token label {:?}", v))),
    }
}

fn labels_of(values: &[String]) -> Result<Vec<CharLabel>, BankError> {
    values.iter().map(|v| label_of(v)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatsRow {
    pub layer: Layer,
    #[serde(with = "lang_code")]
    pub lang: Lang,
    pub gold: usize,
    pub silver: usize,
    pub bronze: usize,
}

pub const STATS_HEADER: &str = "Layer\tLang\tGold\tSilver\tBronze";

pub fn stats_tsv(rows: &[StatsRow]) -> String {
    let mut out = format!("{}\n", STATS_HEADER);
    for r in rows {
        out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", r.layer.title(), r.lang, r.gold, r.silver, r.bronze));
    }
    out
}
