//! CCG categories: atoms, slash-directed functors, and their text notation.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    S,
    NP,
    N,
    PP,
}

impl Atom {
    pub fn as_str(self) -> &'static str {
        match self {
            Atom::S => "S",
            Atom::NP => "NP",
            Atom::N => "N",
            Atom::PP => "PP",
        }
    }

    fn from_name(name: &str) -> Option<Atom> {
        match name {
            "S" => Some(Atom::S),
            "NP" => Some(Atom::NP),
            "N" => Some(Atom::N),
            "PP" => Some(Atom::PP),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slash {
    /// `X/Y`: argument to the right.
    Forward,
    /// `X\Y`: argument to the left.
    Backward,
}

impl Slash {
    pub fn flipped(self) -> Slash {
        match self {
            Slash::Forward => Slash::Backward,
            Slash::Backward => Slash::Forward,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Slash::Forward => '/',
            Slash::Backward => '\\',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Atomic {
        atom: Atom,
        /// Opaque feature such as `dcl` in `S[dcl]`.
        feature: Option<String>,
    },
    Functor {
        result: Box<Category>,
        slash: Slash,
        arg: Box<Category>,
    },
}

impl Category {
    pub fn atom(atom: Atom) -> Category {
        Category::Atomic {
            atom,
            feature: None,
        }
    }

    pub fn with_feature(atom: Atom, feature: &str) -> Category {
        Category::Atomic {
            atom,
            feature: Some(feature.to_string()),
        }
    }

    pub fn s() -> Category {
        Category::atom(Atom::S)
    }

    pub fn np() -> Category {
        Category::atom(Atom::NP)
    }

    pub fn n() -> Category {
        Category::atom(Atom::N)
    }

    pub fn fwd(result: Category, arg: Category) -> Category {
        Category::Functor {
            result: Box::new(result),
            slash: Slash::Forward,
            arg: Box::new(arg),
        }
    }

    pub fn bwd(result: Category, arg: Category) -> Category {
        Category::Functor {
            result: Box::new(result),
            slash: Slash::Backward,
            arg: Box::new(arg),
        }
    }

    pub fn functor(result: Category, slash: Slash, arg: Category) -> Category {
        Category::Functor {
            result: Box::new(result),
            slash,
            arg: Box::new(arg),
        }
    }

    pub fn is_functor(&self) -> bool {
        matches!(self, Category::Functor { .. })
    }

    /// Splits a functor into `(result, slash, arg)`.
    pub fn as_functor(&self) -> Option<(&Category, Slash, &Category)> {
        match self {
            Category::Functor { result, slash, arg } => Some((result, *slash, arg)),
            Category::Atomic { .. } => None,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Category::Atomic { .. } => 0,
            Category::Functor { result, arg, .. } => 1 + result.depth().max(arg.depth()),
        }
    }

    /// Structural match used by the combinatory rules. Features only block a
    /// match when both sides carry a feature and the two differ.
    pub fn unifies(&self, other: &Category) -> bool {
        match (self, other) {
            (
                Category::Atomic { atom: a, feature: fa },
                Category::Atomic { atom: b, feature: fb },
            ) => {
                a == b
                    && match (fa, fb) {
                        (Some(x), Some(y)) => x == y,
                        _ => true,
                    }
            }
            (
                Category::Functor {
                    result: r1,
                    slash: s1,
                    arg: a1,
                },
                Category::Functor {
                    result: r2,
                    slash: s2,
                    arg: a2,
                },
            ) => s1 == s2 && r1.unifies(r2) && a1.unifies(a2),
            _ => false,
        }
    }

    /// Equality that ignores slash directions.
    pub fn same_shape(&self, other: &Category) -> bool {
        match (self, other) {
            (Category::Atomic { .. }, Category::Atomic { .. }) => self.unifies(other),
            (
                Category::Functor {
                    result: r1, arg: a1, ..
                },
                Category::Functor {
                    result: r2, arg: a2, ..
                },
            ) => r1.same_shape(r2) && a1.same_shape(a2),
            _ => false,
        }
    }

    /// `X|X` categories: modifiers whose result equals their argument.
    pub fn is_modifier(&self) -> bool {
        match self {
            Category::Functor { result, arg, .. } => result == arg,
            Category::Atomic { .. } => false,
        }
    }

    /// The same category with every feature removed.
    pub fn strip_features(&self) -> Category {
        match self {
            Category::Atomic { atom, .. } => Category::atom(*atom),
            Category::Functor { result, slash, arg } => {
                Category::functor(result.strip_features(), *slash, arg.strip_features())
            }
        }
    }

    pub fn feature_count(&self) -> usize {
        match self {
            Category::Atomic { feature, .. } => usize::from(feature.is_some()),
            Category::Functor { result, arg, .. } => result.feature_count() + arg.feature_count(),
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::Atomic { atom, feature } => {
                f.write_str(atom.as_str())?;
                if let Some(feat) = feature {
                    write!(f, "[{}]", feat)?;
                }
                Ok(())
            }
            Category::Functor { result, slash, arg } => {
                if result.is_functor() {
                    write!(f, "({})", result)?;
                } else {
                    write!(f, "{}", result)?;
                }
                write!(f, "{}", slash.as_char())?;
                if arg.is_functor() {
                    write!(f, "({})", arg)
                } else {
                    write!(f, "{}", arg)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CategoryError {
    Empty,
    UnexpectedChar { offset: usize, found: char },
    UnexpectedEnd { offset: usize },
    UnbalancedParen { offset: usize },
    UnknownAtom { offset: usize, name: String },
}

impl fmt::Display for CategoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CategoryError::Empty => f.write_str("empty category"),
            CategoryError::UnexpectedChar { offset, found } => {
                write!(f, "unexpected character {:?} at offset {}", found, offset)
            }
            CategoryError::UnexpectedEnd { offset } => {
                write!(f, "unexpected end of category at offset {}", offset)
            }
            CategoryError::UnbalancedParen { offset } => {
                write!(f, "unbalanced parenthesis at offset {}", offset)
            }
            CategoryError::UnknownAtom { offset, name } => {
                write!(f, "unknown atomic category {:?} at offset {}", name, offset)
            }
        }
    }
}

impl core::error::Error for CategoryError {}

/// Parses the slash notation. Slashes associate to the left, so `S\NP/NP`
/// reads as `(S\NP)/NP`.
pub fn parse_category(text: &str) -> Result<Category, CategoryError> {
    let chars: alloc::vec::Vec<char> = text.chars().collect();
    if chars.iter().all(|c| c.is_whitespace()) {
        return Err(CategoryError::Empty);
    }
    let mut parser = CatParser { chars, pos: 0 };
    let cat = parser.category()?;
    parser.skip_ws();
    match parser.peek() {
        None => Ok(cat),
        Some(')') => Err(CategoryError::UnbalancedParen { offset: parser.pos }),
        Some(c) => Err(CategoryError::UnexpectedChar {
            offset: parser.pos,
            found: c,
        }),
    }
}

impl FromStr for Category {
    type Err = CategoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_category(s)
    }
}

struct CatParser {
    chars: alloc::vec::Vec<char>,
    pos: usize,
}

impl CatParser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn category(&mut self) -> Result<Category, CategoryError> {
        let mut left = self.primary()?;
        loop {
            self.skip_ws();
            let slash = match self.peek() {
                Some('/') => Slash::Forward,
                Some('\\') => Slash::Backward,
                _ => return Ok(left),
            };
            self.pos += 1;
            let right = self.primary()?;
            left = Category::functor(left, slash, right);
        }
    }

    fn primary(&mut self) -> Result<Category, CategoryError> {
        self.skip_ws();
        match self.peek() {
            None => Err(CategoryError::UnexpectedEnd { offset: self.pos }),
            Some('(') => {
                let open = self.pos;
                self.pos += 1;
                let inner = self.category()?;
                self.skip_ws();
                match self.peek() {
                    Some(')') => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    None => Err(CategoryError::UnbalancedParen { offset: open }),
                    Some(c) => Err(CategoryError::UnexpectedChar {
                        offset: self.pos,
                        found: c,
                    }),
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                let atom = Atom::from_name(&name)
                    .ok_or(CategoryError::UnknownAtom { offset: start, name })?;
                let mut feature = None;
                if self.peek() == Some('[') {
                    let open = self.pos;
                    self.pos += 1;
                    let fstart = self.pos;
                    while self.peek().is_some_and(|c| c.is_ascii_alphanumeric()) {
                        self.pos += 1;
                    }
                    if self.peek() != Some(']') {
                        return Err(CategoryError::UnbalancedParen { offset: open });
                    }
                    feature = Some(self.chars[fstart..self.pos].iter().collect());
                    self.pos += 1;
                }
                Ok(Category::Atomic { atom, feature })
            }
            Some(')') => Err(CategoryError::UnbalancedParen { offset: self.pos }),
            Some(c) => Err(CategoryError::UnexpectedChar {
                offset: self.pos,
                found: c,
            }),
        }
    }
}
