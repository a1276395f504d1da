//! Core of a cross-lingual CCG/DRS annotation pipeline.
//!
//! Everything here is `no_std` with `alloc`: categories, DRSs, λ-terms, and
//! the pipeline stages that operate on them (segmentation, semantic tagging,
//! symbolization, parsing, composition and projection). File formats, IO and
//! the service live in the `meaningbank` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod category;
pub mod composer;
pub mod drs;
pub mod parser;
pub mod projector;
pub mod segmenter;
pub mod semtagger;
pub mod symbolizer;
pub mod term;
pub mod token;

pub use category::{parse_category, Atom, Category, Slash};
pub use drs::{drs_alpha_equal, merge, Condition, Drs, Ref, Sort};
pub use term::{beta_reduce, resolve_presuppositions, Kind, Term};
pub use token::{Lang, Token, TokenAnnotation};
