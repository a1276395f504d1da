//! Pipeline configuration files.
//!
//! ```toml
//! language = "de"
//! goal = "S"
//! crossed_composition = true
//!
//! [models]
//! segmenter = "models/de.seg"
//! lexicon = "models/lexicon.tsv"
//! ```
//!
//! Every model path is optional; missing entries fall back to the shipped
//! data. Relative paths are resolved against the config file's directory.

use std::fmt;
use std::path::{Path, PathBuf};

use meaningbank_core::category::{parse_category, Category};
use meaningbank_core::token::Lang;
use serde::Deserialize;

#[derive(Clone, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ModelPaths {
    pub segmenter: Option<PathBuf>,
    pub tagset: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub irregular: Option<PathBuf>,
    pub templates: Option<PathBuf>,
    pub roles: Option<PathBuf>,
    pub categories: Option<PathBuf>,
    pub inventory: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    language: String,
    #[serde(default = "default_goal")]
    goal: String,
    #[serde(default)]
    crossed_composition: Option<bool>,
    #[serde(default)]
    max_insertions: Option<usize>,
    #[serde(default)]
    models: ModelPaths,
}

fn default_goal() -> String {
    "S".into()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub language: Lang,
    pub goal: Category,
    pub crossed_composition: bool,
    pub max_insertions: Option<usize>,
    pub models: ModelPaths,
}

#[derive(Debug)]
pub enum ConfigError {
    Io(PathBuf, std::io::Error),
    Syntax(String),
    Invalid(String),
    Model(PathBuf, String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(p, e) => write!(f, "{}: {}", p.display(), e),
            ConfigError::Syntax(m) => write!(f, "config: {}", m),
            ConfigError::Invalid(m) => write!(f, "config: {}", m),
            ConfigError::Model(p, m) => write!(f, "{}: {}", p.display(), m),
        }
    }
}

impl std::error::Error for ConfigError {}

impl PipelineConfig {
    /// Shipped defaults for a language. German turns on crossed composition.
    pub fn for_language(language: Lang) -> PipelineConfig {
        PipelineConfig {
            language,
            goal: Category::s(),
            crossed_composition: language != Lang::En,
            max_insertions: Some(2),
            models: ModelPaths::default(),
        }
    }

    pub fn parse(text: &str, base: &Path) -> Result<PipelineConfig, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let language: Lang = raw.language.parse().map_err(|e| ConfigError::Invalid(format!("{}", e)))?;
        let goal = parse_category(&raw.goal).map_err(|e| ConfigError::Invalid(format!("goal: {}", e)))?;
        let mut models = raw.models;
        for p in [
            &mut models.segmenter,
            &mut models.tagset,
            &mut models.lexicon,
            &mut models.gazetteer,
            &mut models.irregular,
            &mut models.templates,
            &mut models.roles,
            &mut models.categories,
            &mut models.inventory,
        ] {
            if let Some(path) = p.as_mut() {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
        let defaults = PipelineConfig::for_language(language);
        Ok(PipelineConfig {
            language,
            goal,
            crossed_composition: raw.crossed_composition.unwrap_or(defaults.crossed_composition),
            max_insertions: raw.max_insertions.or(defaults.max_insertions),
            models,
        })
    }

    pub fn load(path: &Path) -> Result<PipelineConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e))?;
        PipelineConfig::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_and_defaults() {
        let c = PipelineConfig::parse("language = \"de\"\n[models]\nlexicon = \"lex.tsv\"\n", Path::new("/cfg")).unwrap();
        assert_eq!(c.language, Lang::De);
        assert_eq!(c.goal, Category::s());
        assert!(c.crossed_composition);
        assert_eq!(c.models.lexicon, Some(PathBuf::from("/cfg/lex.tsv")));
        assert!(c.models.segmenter.is_none());
    }

    #[test]
    fn rejects_unknown_keys_and_languages() {
        assert!(PipelineConfig::parse("language = \"fr\"\n", Path::new(".")).is_err());
        assert!(PipelineConfig::parse("language = \"en\"\ncolour = 1\n", Path::new(".")).is_err());
        assert!(PipelineConfig::parse("language = \"en\"\ngoal = \"S\\\\\"\n", Path::new(".")).is_err());
    }
}
