//! Loading the models a pipeline run needs, from shipped data or from the
//! files a [`PipelineConfig`] names.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use meaningbank_core::composer::{RoleLexicon, Templates};
use meaningbank_core::parser::{CategoryLexicon, EmptyElement, ParseConfig, Parser};
use meaningbank_core::segmenter::{SegmenterModel, TrainConfig};
use meaningbank_core::semtagger::{default_tagset, TagLexicon, TagSet};
use meaningbank_core::symbolizer::SymbolResources;
use meaningbank_core::token::Lang;

use crate::config::{ConfigError, PipelineConfig};
use crate::formats;
use crate::synthetic;

pub const SHIPPED_LEXICON: &str = include_str!("../data/lexicon.tsv");
pub const SHIPPED_GAZETTEER: &str = include_str!("../data/gazetteer.tsv");
pub const SHIPPED_IRREGULAR: &str = include_str!("../data/irregular.tsv");
pub const SHIPPED_ROLES: &str = include_str!("../data/roles.tsv");
pub const SHIPPED_CATEGORIES: &str = include_str!("../data/categories.tsv");
pub const SHIPPED_INVENTORY: &str = include_str!("../data/inventory.tsv");
pub const SHIPPED_TEMPLATES: &str = include_str!("../data/templates.tsv");

/// Size and seed of the synthetic corpus the shipped segmenters train on.
pub const SEGMENTER_CORPUS: usize = 200;
pub const SEGMENTER_SEED: u64 = 2017;

#[derive(Clone, Debug)]
pub struct Models {
    pub config: PipelineConfig,
    pub segmenter: Arc<SegmenterModel>,
    pub tagset: TagSet,
    pub lexicon: TagLexicon,
    pub resources: SymbolResources,
    pub templates: Templates,
    pub roles: RoleLexicon,
    pub categories: CategoryLexicon,
    pub inventory: Vec<EmptyElement>,
}

/// Languages without their own synthetic grammar use the English one.
fn segmenter_language(lang: Lang) -> Lang {
    match lang {
        Lang::De => Lang::De,
        _ => Lang::En,
    }
}

/// The shipped segmenter for a language, trained once per process.
pub fn shipped_segmenter(lang: Lang) -> Arc<SegmenterModel> {
    static CACHE: OnceLock<Mutex<BTreeMap<Lang, Arc<SegmenterModel>>>> = OnceLock::new();
    let lang = segmenter_language(lang);
    let mut cache = CACHE.get_or_init(Default::default).lock().expect("segmenter cache");
    cache
        .entry(lang)
        .or_insert_with(|| {
            let corpus = synthetic::corpus(lang, SEGMENTER_CORPUS, SEGMENTER_SEED);
            Arc::new(SegmenterModel::train(&corpus, &TrainConfig::default()).expect("synthetic corpus is well-formed"))
        })
        .clone()
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))
}

fn shipped<T, E: std::fmt::Display>(what: &str, r: Result<T, E>) -> T {
    match r {
        Ok(v) => v,
        Err(e) => panic!("shipped {} is malformed: {}", what, e),
    }
}

impl Models {
    pub fn shipped(lang: Lang) -> Models {
        Models::load(&PipelineConfig::for_language(lang)).expect("shipped models load")
    }

    /// Reads every model the config names, falling back to shipped data.
    pub fn load(config: &PipelineConfig) -> Result<Models, ConfigError> {
        let m = &config.models;
        let model_err = |p: &Path, e: &dyn std::fmt::Display| ConfigError::Model(p.to_path_buf(), e.to_string());

        let segmenter = match &m.segmenter {
            Some(p) => Arc::new(SegmenterModel::from_text(&read(p)?).map_err(|e| model_err(p, &e))?),
            None => shipped_segmenter(config.language),
        };
        let tagset = match &m.tagset {
            Some(p) => formats::read_tagset(&read(p)?).map_err(|e| model_err(p, &e))?,
            None => default_tagset(),
        };
        let lexicon = match &m.lexicon {
            Some(p) => formats::read_tag_lexicon(&read(p)?, &tagset).map_err(|e| model_err(p, &e))?,
            None => shipped("lexicon", formats::read_tag_lexicon(SHIPPED_LEXICON, &tagset)),
        };
        let mut resources = SymbolResources::new();
        match &m.gazetteer {
            Some(p) => formats::read_gazetteer(&read(p)?, &mut resources).map_err(|e| model_err(p, &e))?,
            None => shipped("gazetteer", formats::read_gazetteer(SHIPPED_GAZETTEER, &mut resources)),
        }
        match &m.irregular {
            Some(p) => formats::read_irregular(&read(p)?, &mut resources).map_err(|e| model_err(p, &e))?,
            None => shipped("irregulars", formats::read_irregular(SHIPPED_IRREGULAR, &mut resources)),
        }
        let mut templates = Templates::builtin();
        match &m.templates {
            Some(p) => templates.extend(Templates::parse(&read(p)?).map_err(|e| model_err(p, &e))?),
            None => templates.extend(shipped("templates", Templates::parse(SHIPPED_TEMPLATES))),
        }
        let roles = match &m.roles {
            Some(p) => formats::read_roles(&read(p)?).map_err(|e| model_err(p, &e))?,
            None => shipped("roles", formats::read_roles(SHIPPED_ROLES)),
        };
        let categories = match &m.categories {
            Some(p) => formats::read_categories(&read(p)?).map_err(|e| model_err(p, &e))?,
            None => shipped("categories", formats::read_categories(SHIPPED_CATEGORIES)),
        };
        let inventory = match &m.inventory {
            Some(p) => formats::read_inventory(&read(p)?, &templates).map_err(|e| model_err(p, &e))?,
            None => shipped("inventory", formats::read_inventory(SHIPPED_INVENTORY, &templates)),
        };
        Ok(Models {
            config: config.clone(),
            segmenter,
            tagset,
            lexicon,
            resources,
            templates,
            roles,
            categories,
            inventory,
        })
    }

    pub fn lang(&self) -> Lang {
        self.config.language
    }

    pub fn parser(&self) -> Parser {
        Parser::new(
            ParseConfig {
                goal: self.config.goal.clone(),
                crossed_composition: self.config.crossed_composition,
                max_insertions: self.config.max_insertions,
            },
            self.inventory.clone(),
        )
    }

    pub fn lexical_context(&self) -> formats::LexicalContext<'_> {
        formats::LexicalContext {
            templates: &self.templates,
            roles: &self.roles,
            inventory: &self.inventory,
        }
    }
}

/// Models for every language.
#[derive(Clone, Debug)]
pub struct ModelSet {
    by_lang: BTreeMap<Lang, Models>,
}

impl ModelSet {
    pub fn shipped() -> ModelSet {
        ModelSet {
            by_lang: Lang::ALL.into_iter().map(|l| (l, Models::shipped(l))).collect(),
        }
    }

    pub fn get(&self, lang: Lang) -> &Models {
        &self.by_lang[&lang]
    }

    pub fn get_mut(&mut self, lang: Lang) -> &mut Models {
        self.by_lang.get_mut(&lang).expect("every language has models")
    }

    /// Replaces the models of the language the given models are for.
    pub fn insert(&mut self, models: Models) {
        self.by_lang.insert(models.lang(), models);
    }
}
