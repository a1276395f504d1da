//! The annotation pipeline over whole documents.
//!
//! Each stage reads the previous stage's layer and a set of overrides for
//! its own layer, so a human-edited value at any stage flows downstream.
//! Token-valued layers are flat over the document: sentence boundaries come
//! from the token layer.

use std::collections::BTreeMap;

use meaningbank_core::category::{Atom, Category};
use meaningbank_core::composer::{compose, lexical_semantics};
use meaningbank_core::drs::{Drs, Ref};
use meaningbank_core::parser::DerivNode;
use meaningbank_core::projector::{align_sentences, leaf_annotations, project, ProjectConfig, ProjectionStatus, SentencePair};
use meaningbank_core::segmenter::{labels_to_sentences, CharLabel};
use meaningbank_core::semtagger::tag;
use meaningbank_core::symbolizer::symbolize;
use meaningbank_core::token::{Token, TokenAnnotation};

use crate::models::Models;

/// Human corrections, keyed by the layer's own coordinates: character
/// index for labels, document-wide token index for the rest.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub tok: Vec<(usize, CharLabel)>,
    pub semtag: BTreeMap<usize, String>,
    /// `None` removes the symbol.
    pub sym: BTreeMap<usize, Option<String>>,
    pub cat: BTreeMap<usize, Category>,
}

/// How the semantic layers of one sentence were obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SentenceOutcome {
    pub derivation: Option<DerivNode>,
    pub drs: Option<Drs<Ref>>,
    pub error: Option<String>,
    /// Set when the sentence was projected from another language.
    pub projection: Option<ProjectionStatus>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    pub labels: Vec<CharLabel>,
    pub sentences: Vec<Vec<Token>>,
    pub semtags: Vec<String>,
    pub symbols: Vec<Option<String>>,
    pub categories: Vec<Category>,
    pub outcomes: Vec<SentenceOutcome>,
}

impl Annotation {
    pub fn sizes(&self) -> Vec<usize> {
        self.sentences.iter().map(Vec::len).collect()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn derivations(&self) -> Vec<Option<DerivNode>> {
        self.outcomes.iter().map(|o| o.derivation.clone()).collect()
    }

    pub fn drss(&self) -> Vec<Option<Drs<Ref>>> {
        self.outcomes.iter().map(|o| o.drs.clone()).collect()
    }

    /// First sentence-level failure, if any.
    pub fn failure(&self) -> Option<String> {
        self.outcomes
            .iter()
            .enumerate()
            .find_map(|(k, o)| o.error.as_ref().map(|e| format!("sentence {}: {}", k, e)))
    }
}

/// Document-wide index of the first token of each sentence.
pub fn offsets(sentences: &[Vec<Token>]) -> Vec<usize> {
    let mut out = Vec::with_capacity(sentences.len());
    let mut n = 0;
    for s in sentences {
        out.push(n);
        n += s.len();
    }
    out
}

pub fn segment(models: &Models, text: &str, overrides: &[(usize, CharLabel)]) -> (Vec<CharLabel>, Vec<Vec<Token>>) {
    let labels = models.segmenter.decode(text, overrides);
    let sentences = labels_to_sentences(text, &labels).expect("decoded labels are well-formed");
    (labels, sentences)
}

pub fn semtag(models: &Models, sentences: &[Vec<Token>], overrides: &BTreeMap<usize, String>) -> Vec<String> {
    let mut out = Vec::new();
    for (s, base) in sentences.iter().zip(offsets(sentences)) {
        let local: BTreeMap<usize, String> = overrides
            .range(base..base + s.len())
            .map(|(i, t)| (i - base, t.clone()))
            .collect();
        out.extend(tag(s, models.lang(), &models.lexicon, &local));
    }
    out
}

pub fn symbolize_tokens(
    models: &Models,
    tokens: &[&Token],
    semtags: &[String],
    overrides: &BTreeMap<usize, Option<String>>,
) -> Vec<Option<String>> {
    tokens
        .iter()
        .zip(semtags)
        .enumerate()
        .map(|(i, (t, tag))| match overrides.get(&i) {
            Some(None) => None,
            Some(Some(o)) => symbolize(&t.surface, tag, models.lang(), &models.tagset, &models.resources, Some(o)),
            None => symbolize(&t.surface, tag, models.lang(), &models.tagset, &models.resources, None),
        })
        .collect()
}

/// Category lexicon lookup, falling back to `N`.
pub fn supertag(models: &Models, tokens: &[&Token], semtags: &[String], overrides: &BTreeMap<usize, Category>) -> Vec<Category> {
    tokens
        .iter()
        .zip(semtags)
        .enumerate()
        .map(|(i, (t, tag))| match overrides.get(&i) {
            Some(c) => c.clone(),
            None => models
                .categories
                .lookup(&t.surface, tag)
                .cloned()
                .unwrap_or_else(|| Category::atom(Atom::N)),
        })
        .collect()
}

/// Lexical semantics, parse and composition for one sentence.
pub fn interpret_sentence(
    models: &Models,
    tokens: &[Token],
    semtags: &[String],
    symbols: &[Option<String>],
    categories: &[Category],
) -> Result<(DerivNode, Drs<Ref>), String> {
    let mut annotated = Vec::with_capacity(tokens.len());
    for (i, t) in tokens.iter().enumerate() {
        let lexsem = lexical_semantics(&semtags[i], &categories[i], symbols[i].as_deref(), &models.templates, &models.roles)
            .map_err(|e| format!("token {} ({}): {}", i, t.surface, e))?;
        annotated.push(TokenAnnotation {
            token: t.clone(),
            semtag: semtags[i].clone(),
            symbol: symbols[i].clone(),
            category: categories[i].clone(),
            lexsem,
        });
    }
    let deriv = models.parser().parse(&annotated).map_err(|e| e.to_string())?;
    let drs = compose(&deriv).map_err(|e| e.to_string())?;
    Ok((deriv, drs))
}

fn outcome(r: Result<(DerivNode, Drs<Ref>), String>) -> SentenceOutcome {
    match r {
        Ok((d, drs)) => SentenceOutcome {
            derivation: Some(d),
            drs: Some(drs),
            error: None,
            projection: None,
        },
        Err(e) => SentenceOutcome {
            derivation: None,
            drs: None,
            error: Some(e),
            projection: None,
        },
    }
}

/// Runs every stage from raw text.
pub fn annotate(models: &Models, text: &str, overrides: &Overrides) -> Annotation {
    let (labels, sentences) = segment(models, text, &overrides.tok);
    let flat: Vec<&Token> = sentences.iter().flatten().collect();
    let semtags = semtag(models, &sentences, &overrides.semtag);
    let symbols = symbolize_tokens(models, &flat, &semtags, &overrides.sym);
    let categories = supertag(models, &flat, &semtags, &overrides.cat);
    let mut outcomes = Vec::new();
    for (s, base) in sentences.iter().zip(offsets(&sentences)) {
        let r = base..base + s.len();
        outcomes.push(outcome(interpret_sentence(
            models,
            s,
            &semtags[r.clone()],
            &symbols[r.clone()],
            &categories[r],
        )));
    }
    Annotation {
        labels,
        sentences,
        semtags,
        symbols,
        categories,
        outcomes,
    }
}

/// Annotates a target text by projection from an annotated source.
///
/// `word_alignments` maps a target sentence index to its `(source token,
/// target token)` pairs. Target sentences without an aligned source
/// sentence or without word alignment are annotated monolingually, as are
/// sentences whose projection fails. Target overrides are applied on top of
/// projected values; a sentence with any override is then re-interpreted.
pub fn annotate_projected(
    models: &Models,
    source: &Annotation,
    text: &str,
    sentence_alignment: Option<&[(usize, usize)]>,
    word_alignments: &BTreeMap<usize, Vec<(usize, usize)>>,
    overrides: &Overrides,
) -> Annotation {
    let mut mono = annotate(models, text, overrides);
    let pairs = align_sentences(&source.sentences, &mono.sentences, sentence_alignment);
    let offs = offsets(&mono.sentences);
    let cfg = ProjectConfig {
        tagset: &models.tagset,
        resources: &models.resources,
        inventory: models.inventory.clone(),
        crossed_composition: models.config.crossed_composition,
        verify: true,
    };
    for (si, ti) in pairs {
        let (Some(words), Some(tgt), Some(src_out)) =
            (word_alignments.get(&ti), mono.sentences.get(ti), source.outcomes.get(si))
        else {
            continue;
        };
        let (Some(deriv), Some(drs)) = (&src_out.derivation, &src_out.drs) else {
            continue;
        };
        let pair = SentencePair {
            source: leaf_annotations(deriv),
            derivation: deriv.clone(),
            drs: drs.clone(),
            target: tgt.clone(),
            target_lang: models.lang(),
            alignment: words.clone(),
        };
        let result = project(&pair, &cfg);
        let base = offs[ti];
        if result.tokens.len() != tgt.len() {
            mono.outcomes[ti].projection = Some(result.status);
            continue;
        }
        let mut touched = false;
        for (j, ta) in result.tokens.iter().enumerate() {
            let g = base + j;
            let semtag = overrides.semtag.get(&g).cloned().unwrap_or_else(|| ta.semtag.clone());
            let symbol = match overrides.sym.get(&g) {
                Some(o) => o.clone(),
                None => ta.symbol.clone(),
            };
            let category = overrides.cat.get(&g).cloned().unwrap_or_else(|| ta.category.clone());
            touched |= semtag != ta.semtag || symbol != ta.symbol || category != ta.category;
            mono.semtags[g] = semtag;
            mono.symbols[g] = symbol;
            mono.categories[g] = category;
        }
        let r = base..base + tgt.len();
        let status = result.status.clone();
        mono.outcomes[ti] = if touched {
            let mut o = outcome(interpret_sentence(
                models,
                tgt,
                &mono.semtags[r.clone()],
                &mono.symbols[r.clone()],
                &mono.categories[r],
            ));
            o.projection = Some(status);
            o
        } else {
            let error = match &status {
                ProjectionStatus::Failed(reason) if result.drs.is_none() => Some(reason.to_string()),
                _ => None,
            };
            SentenceOutcome {
                derivation: result.derivation,
                drs: result.drs,
                error,
                projection: Some(status),
            }
        };
    }
    mono
}
