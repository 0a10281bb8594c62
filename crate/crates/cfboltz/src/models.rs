//! Built-in models and specification loading.

use std::path::Path;

use cfboltz_core::{models, CombinatorialSpec};

use crate::parser::{parse_spec, ParseError};

/// What a command operates on.
#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Spec(CombinatorialSpec),
    /// The (1/4, 1/2, 1/4)-bridge model, which has no specification.
    Toy,
}

pub const BUILTIN_NAMES: [&str; 3] = ["binary", "rhv", "toy"];

pub fn builtin(name: &str) -> Option<Model> {
    match name {
        "binary" => Some(Model::Spec(models::binary_trees())),
        "rhv" => Some(Model::Spec(models::rhv())),
        "toy" => Some(Model::Toy),
        _ => None,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
}

pub fn load_spec_file(path: &Path) -> Result<CombinatorialSpec, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    parse_spec(&text).map_err(|source| LoadError::Parse { path: path.display().to_string(), source })
}
