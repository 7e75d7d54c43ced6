use std::path::Path;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// `fs::read_to_string` with the path prefixed onto the error, so a
/// missing file names itself instead of surfacing a bare os error.
pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

/// Everything that can go wrong while loading data, training or applying
/// an algorithm. Variants are grouped so a caller can map them onto exit
/// classes: configuration problems, data problems, runtime problems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{origin}:{line}: {msg}")]
    Parse {
        origin: String,
        line: usize,
        msg: String,
    },

    #[error("taxonomy cycle: {}", cycle.join(" -> "))]
    TaxonomyCycle { cycle: Vec<String> },

    #[error("duplicate sense id `{0}`")]
    DuplicateSense(String),

    #[error("senses of `{lemma}` ({pos}) have ranks {found:?}; expected 1..={expected}")]
    NonContiguousRanks {
        lemma: String,
        pos: String,
        expected: usize,
        found: Vec<u32>,
    },

    #[error("unknown synset id `{0}`")]
    UnknownSynset(String),

    #[error("{origin}:{line}: sense tag `{tag}` not in the inventory")]
    UnknownSenseTag {
        origin: String,
        line: usize,
        tag: String,
    },

    #[error("algorithm `{0}` is not trainable")]
    NotTrainable(String),

    #[error("unknown algorithm spec `{0}`")]
    UnknownAlgorithm(String),

    #[error(
        "decision list was trained with extractor set `{trained}` but applied with `{applied}`"
    )]
    ExtractorMismatch { trained: String, applied: String },

    #[error("sense `{0}` has no documents in the signature collections")]
    EmptySenseCollection(String),

    #[error(
        "topic signatures for `{lemma}` need at least two senses with documents, found {found}"
    )]
    TooFewSenseCollections { lemma: String, found: usize },

    #[error("instance {0} has no gold sense")]
    MissingGold(String),

    #[error("fold count must be at least 2, got {0}")]
    BadFoldCount(usize),

    #[error("cannot assign folds over an empty instance list")]
    NoInstances,

    #[error("missing resource: {0}")]
    MissingResource(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
