//! Tokens, languages and per-token annotation bundles.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::category::Category;
use crate::term::Term;

/// Marker joining the parts of a multiword token, as in `5~o'clock`.
pub const GLUE: char = '~';

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lang {
    En,
    De,
    It,
    Nl,
}

impl Lang {
    pub const ALL: [Lang; 4] = [Lang::En, Lang::De, Lang::It, Lang::Nl];

    pub fn code(self) -> &'static str {
        match self {
            Lang::En => "en",
            Lang::De => "de",
            Lang::It => "it",
            Lang::Nl => "nl",
        }
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnknownLang(pub String);

impl fmt::Display for UnknownLang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown language code {:?}", self.0)
    }
}

impl core::error::Error for UnknownLang {}

impl FromStr for Lang {
    type Err = UnknownLang;

    fn from_str(s: &str) -> Result<Lang, UnknownLang> {
        match s {
            "en" => Ok(Lang::En),
            "de" => Ok(Lang::De),
            "it" => Ok(Lang::It),
            "nl" => Ok(Lang::Nl),
            other => Err(UnknownLang(other.into())),
        }
    }
}

/// A token with character offsets into its document (end exclusive).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Token {
    pub id: usize,
    pub char_start: usize,
    pub char_end: usize,
    /// Surface form, with glue whitespace replaced by `~`.
    pub surface: String,
    /// Pieces of a multiword token; empty for ordinary tokens.
    pub glue_parts: Vec<String>,
    /// The word a compound part was split from.
    pub decomposed_from: Option<String>,
}

impl Token {
    /// A token without offsets into any document.
    pub fn bare(id: usize, surface: &str) -> Token {
        let parts: Vec<String> = surface.split(GLUE).map(String::from).collect();
        Token {
            id,
            char_start: 0,
            char_end: surface.chars().count(),
            surface: surface.into(),
            glue_parts: if parts.len() > 1 { parts } else { Vec::new() },
            decomposed_from: None,
        }
    }

    /// Builds bare tokens from whitespace-separated surfaces.
    pub fn from_surfaces(text: &str) -> Vec<Token> {
        text.split_whitespace().enumerate().map(|(i, s)| Token::bare(i, s)).collect()
    }
}

/// Everything known about one token: semtag, symbol, supertag and lexical
/// semantics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenAnnotation {
    pub token: Token,
    pub semtag: String,
    pub symbol: Option<String>,
    pub category: Category,
    pub lexsem: Term,
}
