//! Word sense disambiguation toolkit.
//!
//! The crate bundles a lexical knowledge base ([`lkb`]), a sense-tagged
//! corpus reader with deterministic cross-validation folds ([`corpus`]),
//! typed feature extraction labelled by knowledge type ([`features`]),
//! a family of disambiguation algorithms behind one pluggable interface
//! ([`disambiguators`]), and an evaluation harness that renders
//! precision/coverage comparison grids ([`eval`]).
//!
//! Every algorithm answers (or abstains on) occurrences of ambiguous
//! lemmas. Scoring follows the strict convention in which precision
//! divides correct answers by *all* test occurrences, so an abstention
//! hurts precision as much as a wrong answer, and coverage is the
//! fraction of occurrences answered at all.

pub mod config;
pub mod corpus;
pub mod disambiguators;
pub mod error;
pub mod eval;
pub mod features;
pub mod fixture;
pub mod lkb;
pub mod model_io;

pub use config::{DensityWindow, Params};
pub use corpus::{make_folds, Corpus, FoldAssignment, Instance, Sentence, TargetSpec, Token};
pub use disambiguators::{AlgorithmSpec, Answer, Context, Disambiguator, Resources};
pub use error::{Error, Result};
pub use eval::{score, Harness, ReportRow, ScoreReport, ScoreRow};
pub use features::{ExtractorSet, Feature, FeatureKind, FeatureVector, KnowledgeType};
pub use lkb::{Lkb, Pos, Sense, SenseId, Synset, SynsetId};
pub use model_io::TrainedModel;
