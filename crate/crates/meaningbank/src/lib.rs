//! Annotation bank, file formats, model loading, CLI support and HTTP
//! service around the `meaningbank-core` pipeline.

pub mod config;
pub mod bank;
pub mod formats;
pub mod models;
pub mod pipeline;
pub mod service;
pub mod synthetic;
