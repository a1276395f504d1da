//! Text formats for layers and resources.
//!
//! Token-indexed layers are TSV files keyed by a document-wide token id,
//! with a blank line between sentences. Resource files are TSV with `#`
//! comment lines. Derivations are one s-expression per sentence.

use std::fmt;

use meaningbank_core::category::{parse_category, Category};
use meaningbank_core::composer::{lexical_semantics, RoleLexicon, Templates};
use meaningbank_core::drs::{from_clausal, to_clausal, Drs, Ref};
use meaningbank_core::parser::{CategoryLexicon, DerivNode, EmptyElement, Lexical, Rule};
use meaningbank_core::semtagger::{TagInfo, TagLexicon, TagSet};
use meaningbank_core::symbolizer::SymbolResources;
use meaningbank_core::token::{Lang, Token, TokenAnnotation, GLUE};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

impl FormatError {
    pub fn new(line: usize, message: impl Into<String>) -> FormatError {
        FormatError {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for FormatError {}

/// Non-empty, non-comment lines split on tabs, with 1-based line numbers.
fn rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(n, l)| {
        let l = l.trim_end_matches('\r');
        if l.trim().is_empty() || l.starts_with('#') {
            None
        } else {
            Some((n + 1, l.split('\t').collect()))
        }
    })
}

fn columns<'a>(line: usize, cols: &[&'a str], want: usize) -> Result<Vec<&'a str>, FormatError> {
    if cols.len() != want {
        return Err(FormatError::new(line, format!("expected {} columns, found {}", want, cols.len())));
    }
    Ok(cols.to_vec())
}

fn number(line: usize, s: &str, what: &str) -> Result<usize, FormatError> {
    s.trim().parse().map_err(|_| FormatError::new(line, format!("bad {}: {:?}", what, s)))
}

fn dash(s: &str) -> Option<&str> {
    if s == "-" {
        None
    } else {
        Some(s)
    }
}

// ---------------------------------------------------------------------------
// Token layer

pub fn write_tokens(sentences: &[Vec<Token>]) -> String {
    let mut out = String::new();
    let mut id = 0;
    for (k, s) in sentences.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        for t in s {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                id,
                t.char_start,
                t.char_end,
                t.surface,
                t.decomposed_from.as_deref().unwrap_or("-")
            ));
            id += 1;
        }
    }
    out
}

/// Sentences of tokens; ids inside each sentence restart at zero.
pub fn read_tokens(text: &str) -> Result<Vec<Vec<Token>>, FormatError> {
    let mut sentences: Vec<Vec<Token>> = Vec::new();
    let mut current: Vec<Token> = Vec::new();
    let mut next_id = 0;
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols = columns(line_no, &line.split('\t').collect::<Vec<_>>(), 5)?;
        let id = number(line_no, cols[0], "token id")?;
        if id != next_id {
            return Err(FormatError::new(line_no, format!("expected token id {}, found {}", next_id, id)));
        }
        next_id += 1;
        let start = number(line_no, cols[1], "start offset")?;
        let end = number(line_no, cols[2], "end offset")?;
        if start >= end {
            return Err(FormatError::new(line_no, "token span is empty"));
        }
        let surface = cols[3].to_string();
        let parts: Vec<String> = surface.split(GLUE).map(String::from).collect();
        current.push(Token {
            id: current.len(),
            char_start: start,
            char_end: end,
            glue_parts: if parts.len() > 1 { parts } else { Vec::new() },
            surface,
            decomposed_from: dash(cols[4]).map(String::from),
        });
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(sentences)
}

// ---------------------------------------------------------------------------
// Token-valued layers: semtag, sym, cat

/// `tokenId<TAB>value` lines, blank line between sentences.
pub fn write_token_values(sizes: &[usize], values: &[String]) -> String {
    let mut out = String::new();
    let mut id = 0;
    for (k, n) in sizes.iter().enumerate() {
        if k > 0 {
            out.push('\n');
        }
        for _ in 0..*n {
            out.push_str(&format!("{}\t{}\n", id, values[id]));
            id += 1;
        }
    }
    out
}

pub fn read_token_values(text: &str) -> Result<Vec<String>, FormatError> {
    let mut out = Vec::new();
    for (n, cols) in rows(text) {
        let cols = columns(n, &cols, 2)?;
        let id = number(n, cols[0], "token id")?;
        if id != out.len() {
            return Err(FormatError::new(n, format!("expected token id {}, found {}", out.len(), id)));
        }
        out.push(cols[1].to_string());
    }
    Ok(out)
}

pub fn symbol_value(symbol: Option<&str>) -> String {
    symbol.unwrap_or("-").to_string()
}

pub fn parse_symbol_value(value: &str) -> Option<String> {
    dash(value).map(String::from)
}

// ---------------------------------------------------------------------------
// DRS layer

/// One clausal block per sentence, each introduced by `% sentence k`.
/// Sentences without a DRS are written as `% sentence k none`.
pub fn write_drs_layer(drss: &[Option<Drs<Ref>>]) -> String {
    let mut out = String::new();
    for (k, d) in drss.iter().enumerate() {
        match d {
            Some(d) => {
                out.push_str(&format!("% sentence {}\n", k));
                out.push_str(&to_clausal(d));
            }
            None => out.push_str(&format!("% sentence {} none\n", k)),
        }
    }
    out
}

pub fn read_drs_layer(text: &str) -> Result<Vec<Option<Drs<Ref>>>, FormatError> {
    let mut out: Vec<Option<Drs<Ref>>> = Vec::new();
    let mut block: Option<(usize, String, bool)> = None;
    let finish = |block: Option<(usize, String, bool)>, out: &mut Vec<Option<Drs<Ref>>>| -> Result<(), FormatError> {
        if let Some((start, body, none)) = block {
            if none {
                out.push(None);
            } else {
                let d = from_clausal(&body).map_err(|e| FormatError::new(start + e.line, e.message))?;
                out.push(Some(d));
            }
        }
        Ok(())
    };
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        if let Some(rest) = line.strip_prefix("% sentence ") {
            finish(block.take(), &mut out)?;
            let mut parts = rest.split_whitespace();
            let k = number(line_no, parts.next().unwrap_or(""), "sentence index")?;
            if k != out.len() {
                return Err(FormatError::new(line_no, format!("expected sentence {}, found {}", out.len(), k)));
            }
            let none = match parts.next() {
                None => false,
                Some("none") => true,
                Some(other) => return Err(FormatError::new(line_no, format!("unexpected {:?}", other))),
            };
            block = Some((line_no, String::new(), none));
        } else if line.trim().is_empty() {
            continue;
        } else {
            match block.as_mut() {
                Some((_, body, false)) => {
                    body.push_str(line);
                    body.push('\n');
                }
                _ => return Err(FormatError::new(line_no, "clause outside a sentence block")),
            }
        }
    }
    finish(block, &mut out)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Derivations

fn atom(s: &str) -> String {
    let plain = !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '"'));
    if plain {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('"', "\"\""))
    }
}

/// One-line s-expression: `(ba S (lex NP He PRO male) ...)`. Leaves are
/// `(lex CAT SURFACE SEMTAG SYMBOL)` with `-` for no symbol, inserted
/// elements `(empty CAT SEMTAG)`. Atoms containing parentheses, quotes or
/// whitespace are double-quoted, with `""` for a literal quote.
pub fn write_derivation(d: &DerivNode) -> String {
    let mut out = String::new();
    write_node(d, &mut out);
    out
}

fn write_node(d: &DerivNode, out: &mut String) {
    let cat = atom(&d.category.to_string());
    match &d.lexical {
        Some(Lexical::Token(t)) => {
            let sym = match &t.symbol {
                None => "-".to_string(),
                Some(s) if s == "-" => "\"-\"".to_string(),
                Some(s) => atom(s),
            };
            out.push_str(&format!("(lex {} {} {} {})", cat, atom(&t.token.surface), atom(&t.semtag), sym));
        }
        Some(Lexical::Empty(e)) => out.push_str(&format!("(empty {} {})", cat, atom(&e.semtag))),
        None => {
            out.push_str(&format!("({} {}", d.rule.code(), cat));
            for c in &d.children {
                out.push(' ');
                write_node(c, out);
            }
            out.push(')');
        }
    }
}

#[derive(Debug, PartialEq)]
enum Sexp {
    Atom { text: String, quoted: bool },
    List(Vec<Sexp>),
}

fn read_sexp(text: &str) -> Result<Sexp, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let e = sexp(&chars, &mut pos)?;
    while pos < chars.len() && chars[pos].is_whitespace() {
        pos += 1;
    }
    if pos != chars.len() {
        return Err(format!("trailing input at column {}", pos + 1));
    }
    Ok(e)
}

fn sexp(c: &[char], pos: &mut usize) -> Result<Sexp, String> {
    while *pos < c.len() && c[*pos].is_whitespace() {
        *pos += 1;
    }
    match c.get(*pos) {
        None => Err("unexpected end of input".into()),
        Some('(') => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                while *pos < c.len() && c[*pos].is_whitespace() {
                    *pos += 1;
                }
                match c.get(*pos) {
                    Some(')') => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    None => return Err("unclosed parenthesis".into()),
                    _ => items.push(sexp(c, pos)?),
                }
            }
        }
        Some(')') => Err(format!("unexpected ')' at column {}", *pos + 1)),
        Some('"') => {
            *pos += 1;
            let mut s = String::new();
            loop {
                match c.get(*pos) {
                    None => return Err("unterminated string".into()),
                    Some('"') if c.get(*pos + 1) == Some(&'"') => {
                        s.push('"');
                        *pos += 2;
                    }
                    Some('"') => {
                        *pos += 1;
                        return Ok(Sexp::Atom { text: s, quoted: true });
                    }
                    Some(ch) => {
                        s.push(*ch);
                        *pos += 1;
                    }
                }
            }
        }
        Some(_) => {
            let start = *pos;
            while *pos < c.len() && !c[*pos].is_whitespace() && !matches!(c[*pos], '(' | ')' | '"') {
                *pos += 1;
            }
            Ok(Sexp::Atom {
                text: c[start..*pos].iter().collect(),
                quoted: false,
            })
        }
    }
}

/// What a reader needs to rebuild lexical semantics for a derivation.
pub struct LexicalContext<'a> {
    pub templates: &'a Templates,
    pub roles: &'a RoleLexicon,
    pub inventory: &'a [EmptyElement],
}

/// Reads a derivation line back, recomputing lexical terms from the
/// templates and re-deriving every inner category from its rule.
pub fn read_derivation(line: &str, ctx: &LexicalContext<'_>) -> Result<DerivNode, String> {
    let e = read_sexp(line)?;
    let mut next = 0;
    build(&e, ctx, &mut next)
}

fn text(e: &Sexp) -> Result<&str, String> {
    match e {
        Sexp::Atom { text, .. } => Ok(text),
        Sexp::List(_) => Err("expected an atom".into()),
    }
}

fn build(e: &Sexp, ctx: &LexicalContext<'_>, next: &mut usize) -> Result<DerivNode, String> {
    let Sexp::List(items) = e else {
        return Err("expected a list".into());
    };
    let head = text(items.first().ok_or("empty list")?)?;
    let cat_text = text(items.get(1).ok_or("missing category")?)?;
    let category = parse_category(cat_text).map_err(|e| format!("{}: {}", cat_text, e))?;
    match head {
        "lex" => {
            if items.len() != 5 {
                return Err("lex needs category, surface, semtag and symbol".into());
            }
            let surface = text(&items[2])?;
            let semtag = text(&items[3])?.to_string();
            let symbol = match &items[4] {
                Sexp::Atom { text, quoted: false } if text == "-" => None,
                other => Some(self::text(other)?.to_string()),
            };
            let lexsem = lexical_semantics(&semtag, &category, symbol.as_deref(), ctx.templates, ctx.roles)
                .map_err(|e| e.to_string())?;
            let index = *next;
            *next += 1;
            Ok(DerivNode {
                span: (index, index + 1),
                category: category.clone(),
                rule: Rule::Lexical,
                children: Vec::new(),
                lexical: Some(Lexical::Token(TokenAnnotation {
                    token: Token::bare(index, surface),
                    semtag,
                    symbol,
                    category,
                    lexsem,
                })),
            })
        }
        "empty" => {
            if items.len() != 3 {
                return Err("empty needs category and semtag".into());
            }
            let semtag = text(&items[2])?;
            let entry = ctx
                .inventory
                .iter()
                .find(|el| el.semtag == semtag && el.category == category)
                .ok_or_else(|| format!("({}, {}) is not in the empty-element inventory", semtag, category))?;
            Ok(DerivNode {
                span: (*next, *next),
                category,
                rule: Rule::EmptyLexical,
                children: Vec::new(),
                lexical: Some(Lexical::Empty(entry.clone())),
            })
        }
        code => {
            let rule = Rule::from_code(code).ok_or_else(|| format!("unknown rule {:?}", code))?;
            if items.len() != 4 || matches!(rule, Rule::Lexical | Rule::EmptyLexical) {
                return Err(format!("{} needs a category and two children", code));
            }
            let start = *next;
            let l = build(&items[2], ctx, next)?;
            let r = build(&items[3], ctx, next)?;
            Ok(DerivNode {
                span: (start, *next),
                category,
                rule,
                children: vec![l, r],
                lexical: None,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Resource files

/// `code, coarseClass, symbolFree (0/1), description`.
pub fn read_tagset(text: &str) -> Result<TagSet, FormatError> {
    let mut entries = Vec::new();
    for (n, cols) in rows(text) {
        let cols = columns(n, &cols, 4)?;
        let symbol_free = match cols[2] {
            "0" => false,
            "1" => true,
            other => return Err(FormatError::new(n, format!("symbolFree must be 0 or 1, found {:?}", other))),
        };
        entries.push((
            cols[0].to_string(),
            TagInfo {
                class: cols[1].to_string(),
                description: cols[3].to_string(),
                symbol_free,
            },
        ));
    }
    TagSet::from_entries(entries).map_err(|e| FormatError::new(0, e.to_string()))
}

pub fn write_tagset(ts: &TagSet) -> String {
    ts.entries
        .iter()
        .map(|(code, i)| format!("{}\t{}\t{}\t{}\n", code, i.class, u8::from(i.symbol_free), i.description))
        .collect()
}

/// `lang, surface, symbol, semtag constraint or -`.
pub fn read_gazetteer(text: &str, into: &mut SymbolResources) -> Result<(), FormatError> {
    for (n, cols) in rows(text) {
        let cols = columns(n, &cols, 4)?;
        into.add_gazetteer(lang(n, cols[0])?, cols[1], cols[2], dash(cols[3]));
    }
    Ok(())
}

/// `lang, form, lemma`.
pub fn read_irregular(text: &str, into: &mut SymbolResources) -> Result<(), FormatError> {
    for (n, cols) in rows(text) {
        let cols = columns(n, &cols, 3)?;
        into.add_irregular(lang(n, cols[0])?, cols[1], cols[2]);
    }
    Ok(())
}

fn lang(line: usize, s: &str) -> Result<Lang, FormatError> {
    s.parse().map_err(|e| FormatError::new(line, format!("{}", e)))
}

/// `lang, surface, semtag, count`.
pub fn read_tag_lexicon(text: &str, tagset: &TagSet) -> Result<TagLexicon, FormatError> {
    let mut lex = TagLexicon::default();
    for (n, cols) in rows(text) {
        let cols = columns(n, &cols, 4)?;
        let lang = lang(n, cols[0])?;
        if !tagset.contains(cols[2]) {
            return Err(FormatError::new(n, format!("unknown semtag {:?}", cols[2])));
        }
        let count = number(n, cols[3], "count")?;
        if count == 0 {
            return Err(FormatError::new(n, "count must be positive"));
        }
        lex.add(lang, cols[1], cols[2], count as u32);
    }
    Ok(lex)
}

pub fn write_tag_lexicon(lex: &TagLexicon) -> String {
    lex.entries().map(|(l, s, t, c)| format!("{}\t{}\t{}\t{}\n", l, s, t, c)).collect()
}

/// `lang, surface, semtag` training triples.
pub fn read_annotated(text: &str) -> Result<Vec<(Lang, String, String)>, FormatError> {
    let mut out = Vec::new();
    for (n, cols) in rows(text) {
        let cols = columns(n, &cols, 3)?;
        out.push((lang(n, cols[0])?, cols[1].to_string(), cols[2].to_string()));
    }
    Ok(out)
}

/// `verb, comma-separated roles`.
pub fn read_roles(text: &str) -> Result<RoleLexicon, FormatError> {
    let mut roles = RoleLexicon::empty();
    for (n, cols) in rows(text) {
        let cols = columns(n, &cols, 2)?;
        let list = cols[1].split(',').map(|r| r.trim().to_string()).collect();
        roles.insert(cols[0], list).map_err(|e| FormatError::new(n, e.to_string()))?;
    }
    Ok(roles)
}

/// `surface, semtag, category`; surface `*` gives the semtag's default,
/// semtag `*` matches any tag.
pub fn read_categories(text: &str) -> Result<CategoryLexicon, FormatError> {
    let mut lex = CategoryLexicon::default();
    for (n, cols) in rows(text) {
        let cols = columns(n, &cols, 3)?;
        let cat = parse_category(cols[2]).map_err(|e| FormatError::new(n, e.to_string()))?;
        if cols[0] == "*" {
            lex.add_default(cols[1], cat);
        } else {
            lex.add_surface(cols[0], cols[1], cat);
        }
    }
    Ok(lex)
}

/// `semtag, category` pairs naming templates usable as empty elements.
pub fn read_inventory(text: &str, templates: &Templates) -> Result<Vec<EmptyElement>, FormatError> {
    let mut keys = Vec::new();
    for (n, cols) in rows(text) {
        let cols = columns(n, &cols, 2)?;
        parse_category(cols[1]).map_err(|e| FormatError::new(n, e.to_string()))?;
        if templates.find(cols[0], &parse_category(cols[1]).expect("checked")).is_none() {
            return Err(FormatError::new(n, format!("no template for ({}, {})", cols[0], cols[1])));
        }
        keys.push((cols[0].to_string(), cols[1].to_string()));
    }
    let borrowed: Vec<(&str, &str)> = keys.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    Ok(templates.empty_inventory(&borrowed))
}

/// Sentence alignment overrides: `srcIdx, tgtIdx`.
pub fn read_sentence_alignment(text: &str) -> Result<Vec<(usize, usize)>, FormatError> {
    let mut out = Vec::new();
    for (n, cols) in rows(text) {
        let cols = columns(n, &cols, 2)?;
        out.push((number(n, cols[0], "source index")?, number(n, cols[1], "target index")?));
    }
    Ok(out)
}

pub fn write_alignment_line(pairs: &[(usize, usize)]) -> String {
    pairs.iter().map(|(i, j)| format!("{}-{}", i, j)).collect::<Vec<_>>().join(" ")
}

/// Category layer values back to categories.
pub fn parse_categories(values: &[String]) -> Result<Vec<Category>, FormatError> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| parse_category(v).map_err(|e| FormatError::new(i + 1, e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_quote_parentheses() {
        assert_eq!(atom("S\\NP"), "S\\NP");
        assert_eq!(atom("(S\\NP)/NP"), "\"(S\\NP)/NP\"");
        assert_eq!(atom("a\"b"), "\"a\"\"b\"");
        let e = read_sexp("(x \"a\"\"b\" \"(c)\")").unwrap();
        assert_eq!(
            e,
            Sexp::List(vec![
                Sexp::Atom { text: "x".into(), quoted: false },
                Sexp::Atom { text: "a\"b".into(), quoted: true },
                Sexp::Atom { text: "(c)".into(), quoted: true },
            ])
        );
    }

    #[test]
    fn token_values_check_ids() {
        assert_eq!(read_token_values("0\tPRO\n1\tEPS\n\n2\tNIL\n").unwrap(), ["PRO", "EPS", "NIL"]);
        assert_eq!(read_token_values("0\tPRO\n2\tEPS\n").unwrap_err().line, 2);
    }

    #[test]
    fn drs_layer_with_missing_sentence() {
        let d = Drs::new(vec![Ref::x(1)], vec![meaningbank_core::drs::Condition::Pred1("male".into(), Ref::x(1))]);
        let text = write_drs_layer(&[Some(d.clone()), None, Some(Drs::empty())]);
        assert_eq!(read_drs_layer(&text).unwrap(), vec![Some(d), None, Some(Drs::empty())]);
    }
}
