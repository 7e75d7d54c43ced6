//! Feature extraction over instance contexts, with every feature labeled
//! by the kind of disambiguation knowledge it carries.
//!
//! The knowledge labels form a closed taxonomy (see [`KnowledgeType`]).
//! Extractors here only ever emit collocations (3), topic associations
//! (4c), argument-head relations (4d) and syntactic cues (5); the other
//! categories exist so models and reports can talk about them.
//!
//! The kind-to-label mapping is fixed:
//!
//! | kind                                   | label |
//! |----------------------------------------|-------|
//! | wordform / lemma n-grams               | 3     |
//! | POS n-grams                            | 5     |
//! | small window bag (±2 by default)       | 4d    |
//! | sentence bag, widened document bag     | 4c    |
//! | dependency head / dependent, lexical   | 4d    |
//! | dependency label alone                 | 5     |
//!
//! The small window carries the 4d label because adjacency within a few
//! tokens is a crude stand-in for argument-head structure; the bags are
//! 4c because topic and situation associations cannot be told apart at
//! this level. Both calls are documented here rather than configurable.

use std::collections::BTreeSet;
use std::fmt;

use crate::config::Params;
use crate::corpus::{Corpus, Instance, Sentence};
use crate::error::{Error, Result};

/// Slot filler for n-gram positions that fall outside the sentence.
pub const BOUNDARY: &str = "<b>";

/// The closed taxonomy of knowledge categories. Codes follow the usual
/// numbering: 1 POS, 2 morphology, 3 collocations, 4a-4d semantic
/// associations (taxonomic, situation, topic, argument-head), 5
/// syntactic cues, 6 semantic roles, 7 selectional preferences, 8
/// domain, 9 frequency, 10 pragmatics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KnowledgeType {
    Pos,
    Morphology,
    Collocation,
    TaxonomicAssoc,
    SituationAssoc,
    TopicAssoc,
    ArgHead,
    SyntacticCue,
    SemanticRole,
    SelectionalPref,
    Domain,
    Frequency,
    Pragmatics,
}

impl KnowledgeType {
    pub fn code(&self) -> &'static str {
        match self {
            KnowledgeType::Pos => "1",
            KnowledgeType::Morphology => "2",
            KnowledgeType::Collocation => "3",
            KnowledgeType::TaxonomicAssoc => "4a",
            KnowledgeType::SituationAssoc => "4b",
            KnowledgeType::TopicAssoc => "4c",
            KnowledgeType::ArgHead => "4d",
            KnowledgeType::SyntacticCue => "5",
            KnowledgeType::SemanticRole => "6",
            KnowledgeType::SelectionalPref => "7",
            KnowledgeType::Domain => "8",
            KnowledgeType::Frequency => "9",
            KnowledgeType::Pragmatics => "10",
        }
    }

    pub fn from_code(code: &str) -> Option<KnowledgeType> {
        Some(match code {
            "1" => KnowledgeType::Pos,
            "2" => KnowledgeType::Morphology,
            "3" => KnowledgeType::Collocation,
            "4a" => KnowledgeType::TaxonomicAssoc,
            "4b" => KnowledgeType::SituationAssoc,
            "4c" => KnowledgeType::TopicAssoc,
            "4d" => KnowledgeType::ArgHead,
            "5" => KnowledgeType::SyntacticCue,
            "6" => KnowledgeType::SemanticRole,
            "7" => KnowledgeType::SelectionalPref,
            "8" => KnowledgeType::Domain,
            "9" => KnowledgeType::Frequency,
            "10" => KnowledgeType::Pragmatics,
            _ => return None,
        })
    }
}

impl fmt::Display for KnowledgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Token attribute an n-gram or bag ranges over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Unit {
    Wordform,
    Lemma,
    PosTag,
}

impl Unit {
    fn as_str(&self) -> &'static str {
        match self {
            Unit::Wordform => "wordform",
            Unit::Lemma => "lemma",
            Unit::PosTag => "pos",
        }
    }

    fn parse(s: &str) -> Option<Unit> {
        Some(match s {
            "wordform" => Unit::Wordform,
            "lemma" => Unit::Lemma,
            "pos" => Unit::PosTag,
            _ => return None,
        })
    }
}

/// Template a feature was produced by. Each kind renders to a stable
/// string (`bigram_lemma_-1`, `window4_lemma`, `dep_object_of`, ...)
/// used in model files and the debug TSV, and parses back.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureKind {
    /// n tokens starting at `start` relative to the target; out-of-bounds
    /// slots carry [`BOUNDARY`].
    Ngram { unit: Unit, n: u8, start: i32 },
    /// Bag over `width` tokens centered on the target, truncated at
    /// sentence edges.
    WindowBag { unit: Unit, width: usize },
    /// Bag of content lemmas of the target's sentence.
    SentenceBag,
    /// Bag of content lemmas in a widened window across sentence
    /// boundaries within the document.
    GlobalBag,
    /// The target's governing word, under the given relation label.
    DepHead { label: String },
    /// A word depending on the target, under the given relation label.
    DepDependent { label: String },
    /// The label of the target's head relation, by itself.
    DepHeadLabel,
    /// The label of one dependent relation, by itself.
    DepDependentLabel,
}

impl FeatureKind {
    /// The knowledge label for this kind. Fixed and total; this is the
    /// table in the module docs.
    pub fn ktype(&self) -> KnowledgeType {
        match self {
            FeatureKind::Ngram {
                unit: Unit::PosTag, ..
            } => KnowledgeType::SyntacticCue,
            FeatureKind::Ngram { .. } => KnowledgeType::Collocation,
            FeatureKind::WindowBag { .. } => KnowledgeType::ArgHead,
            FeatureKind::SentenceBag | FeatureKind::GlobalBag => KnowledgeType::TopicAssoc,
            FeatureKind::DepHead { .. } | FeatureKind::DepDependent { .. } => {
                KnowledgeType::ArgHead
            }
            FeatureKind::DepHeadLabel | FeatureKind::DepDependentLabel => {
                KnowledgeType::SyntacticCue
            }
        }
    }

    /// Parse the rendered form. Fixed-name kinds are matched first, so a
    /// relation label that itself looks like one of them cannot round-trip;
    /// real corpus labels (subj, obj, det, ...) are unaffected.
    pub fn parse(s: &str) -> Result<FeatureKind> {
        let bad = || Error::Config(format!("unknown feature kind `{s}`"));
        match s {
            "sentence_bag_lemma" => return Ok(FeatureKind::SentenceBag),
            "global_bag_lemma" => return Ok(FeatureKind::GlobalBag),
            "dep_head_label" => return Ok(FeatureKind::DepHeadLabel),
            "dep_dependent_label" => return Ok(FeatureKind::DepDependentLabel),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("dep_has_") {
            if rest.is_empty() {
                return Err(bad());
            }
            return Ok(FeatureKind::DepDependent {
                label: rest.to_string(),
            });
        }
        if let Some(rest) = s.strip_prefix("dep_") {
            if let Some(label) = rest.strip_suffix("_of") {
                if label.is_empty() {
                    return Err(bad());
                }
                return Ok(FeatureKind::DepHead {
                    label: label.to_string(),
                });
            }
            return Err(bad());
        }
        if let Some(rest) = s
            .strip_prefix("bigram_")
            .or_else(|| s.strip_prefix("trigram_"))
        {
            let n = if s.starts_with("bigram_") { 2 } else { 3 };
            let (unit_str, start_str) = rest.rsplit_once('_').ok_or_else(bad)?;
            let unit = Unit::parse(unit_str).ok_or_else(bad)?;
            let start: i32 = start_str.parse().map_err(|_| bad())?;
            return Ok(FeatureKind::Ngram { unit, n, start });
        }
        if let Some(rest) = s.strip_prefix("window") {
            let (width_str, unit_str) = rest.split_once('_').ok_or_else(bad)?;
            let width: usize = width_str.parse().map_err(|_| bad())?;
            let unit = Unit::parse(unit_str).ok_or_else(bad)?;
            return Ok(FeatureKind::WindowBag { unit, width });
        }
        Err(bad())
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKind::Ngram { unit, n, start } => {
                let gram = if *n == 2 { "bigram" } else { "trigram" };
                write!(f, "{}_{}_{}", gram, unit.as_str(), start)
            }
            FeatureKind::WindowBag { unit, width } => {
                write!(f, "window{}_{}", width, unit.as_str())
            }
            FeatureKind::SentenceBag => f.write_str("sentence_bag_lemma"),
            FeatureKind::GlobalBag => f.write_str("global_bag_lemma"),
            FeatureKind::DepHead { label } => write!(f, "dep_{label}_of"),
            FeatureKind::DepDependent { label } => write!(f, "dep_has_{label}"),
            FeatureKind::DepHeadLabel => f.write_str("dep_head_label"),
            FeatureKind::DepDependentLabel => f.write_str("dep_dependent_label"),
        }
    }
}

/// One extracted feature. Constructed through [`Feature::new`] so the
/// knowledge label always agrees with the kind.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Feature {
    pub kind: FeatureKind,
    pub value: String,
    pub ktype: KnowledgeType,
}

impl Feature {
    pub fn new(kind: FeatureKind, value: impl Into<String>) -> Feature {
        let ktype = kind.ktype();
        Feature {
            kind,
            value: value.into(),
            ktype,
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}", self.kind, self.value)
    }
}

/// Multiset of features extracted for one instance. Duplicates are
/// meaningful for bag features.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FeatureVector {
    features: Vec<Feature>,
}

impl FeatureVector {
    pub fn new() -> FeatureVector {
        FeatureVector::default()
    }

    pub fn push(&mut self, feature: Feature) {
        self.features.push(feature);
    }

    pub fn extend(&mut self, other: FeatureVector) {
        self.features.extend(other.features);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Feature> {
        self.features.iter()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Distinct features, for first-hit matching.
    pub fn as_set(&self) -> BTreeSet<&Feature> {
        self.features.iter().collect()
    }

    pub fn contains(&self, feature: &Feature) -> bool {
        self.features.iter().any(|f| f == feature)
    }

    /// Debug serialization: `kind<TAB>value<TAB>ktype`, one per line, in
    /// extraction order. Stable for golden-file comparison.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for f in &self.features {
            out.push_str(&format!("{}\t{}\t{}\n", f.kind, f.value, f.ktype));
        }
        out
    }
}

impl IntoIterator for FeatureVector {
    type Item = Feature;
    type IntoIter = std::vec::IntoIter<Feature>;

    fn into_iter(self) -> Self::IntoIter {
        self.features.into_iter()
    }
}

impl FromIterator<Feature> for FeatureVector {
    fn from_iter<T: IntoIterator<Item = Feature>>(iter: T) -> Self {
        FeatureVector {
            features: iter.into_iter().collect(),
        }
    }
}

/// Dependency features plus whether the sentence carried a parse at all,
/// so callers can tell "no parse" from "parsed but no relations".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntacticFeatures {
    pub features: FeatureVector,
    pub deps_present: bool,
}

fn unit_value(token: &crate::corpus::Token, unit: Unit, params: &Params) -> String {
    match unit {
        Unit::Wordform => {
            if params.lowercase_wordforms {
                token.wordform.to_lowercase()
            } else {
                token.wordform.clone()
            }
        }
        Unit::Lemma => token.lemma.clone(),
        Unit::PosTag => token.pos.as_str().to_string(),
    }
}

fn slot_value(sentence: &Sentence, pos: i64, unit: Unit, params: &Params) -> String {
    if pos < 0 || pos as usize >= sentence.tokens.len() {
        BOUNDARY.to_string()
    } else {
        unit_value(&sentence.tokens[pos as usize], unit, params)
    }
}

pub(crate) fn is_content(token: &crate::corpus::Token, params: &Params) -> bool {
    token.pos.is_content() && !params.is_stopword(&token.lemma)
}

/// N-grams around the target plus the small window bag.
///
/// The n-gram templates are every bigram and trigram of wordforms,
/// lemmas and POS whose span covers the target (starts -1..0 and -2..0
/// respectively); slots beyond the sentence hold [`BOUNDARY`], so the
/// template count is constant and a bare one-token sentence still yields
/// its boundary-marker features. The bag covers wordforms and lemmas of
/// the `params.window` tokens on each side, truncated at the sentence.
pub fn extract_local(corpus: &Corpus, instance: &Instance, params: &Params) -> FeatureVector {
    let sentence = &corpus.sentences()[instance.sent_idx];
    let t = instance.tok_idx as i64;
    let mut out = FeatureVector::new();

    for unit in [Unit::Wordform, Unit::Lemma, Unit::PosTag] {
        for start in [-1i32, 0] {
            let v0 = slot_value(sentence, t + start as i64, unit, params);
            let v1 = slot_value(sentence, t + start as i64 + 1, unit, params);
            out.push(Feature::new(
                FeatureKind::Ngram { unit, n: 2, start },
                format!("{v0} {v1}"),
            ));
        }
        for start in [-2i32, -1, 0] {
            let vs: Vec<String> = (0..3)
                .map(|i| slot_value(sentence, t + start as i64 + i, unit, params))
                .collect();
            out.push(Feature::new(
                FeatureKind::Ngram { unit, n: 3, start },
                vs.join(" "),
            ));
        }
    }

    let half = params.window as i64;
    let width = 2 * params.window;
    for offset in -half..=half {
        if offset == 0 {
            continue;
        }
        let p = t + offset;
        if p < 0 || p as usize >= sentence.tokens.len() {
            continue;
        }
        let token = &sentence.tokens[p as usize];
        out.push(Feature::new(
            FeatureKind::WindowBag {
                unit: Unit::Wordform,
                width,
            },
            unit_value(token, Unit::Wordform, params),
        ));
        out.push(Feature::new(
            FeatureKind::WindowBag {
                unit: Unit::Lemma,
                width,
            },
            unit_value(token, Unit::Lemma, params),
        ));
    }

    out
}

/// Bag of content lemmas around the target: the whole sentence by
/// default, or ±`global_window` tokens across sentence boundaries within
/// the document when configured. The target token itself is excluded by
/// position, so another occurrence of the same lemma still counts.
pub fn extract_global(corpus: &Corpus, instance: &Instance, params: &Params) -> FeatureVector {
    let mut out = FeatureVector::new();
    match params.global_window {
        None => {
            let sentence = &corpus.sentences()[instance.sent_idx];
            for (idx, token) in sentence.tokens.iter().enumerate() {
                if idx == instance.tok_idx || !is_content(token, params) {
                    continue;
                }
                out.push(Feature::new(FeatureKind::SentenceBag, token.lemma.clone()));
            }
        }
        Some(n) => {
            // Flatten the document's tokens and take ±n around the target.
            let mut flat: Vec<&crate::corpus::Token> = Vec::new();
            let mut target_flat = 0usize;
            for &sent_idx in corpus.doc_sentences(&instance.doc_id) {
                let sentence = &corpus.sentences()[sent_idx];
                for (idx, token) in sentence.tokens.iter().enumerate() {
                    if sent_idx == instance.sent_idx && idx == instance.tok_idx {
                        target_flat = flat.len();
                    }
                    flat.push(token);
                }
            }
            let lo = target_flat.saturating_sub(n);
            let hi = (target_flat + n).min(flat.len().saturating_sub(1));
            for (p, token) in flat.iter().enumerate().take(hi + 1).skip(lo) {
                if p == target_flat || !is_content(token, params) {
                    continue;
                }
                out.push(Feature::new(FeatureKind::GlobalBag, token.lemma.clone()));
            }
        }
    }
    out
}

/// Dependency features of the target: its head (lexicalized and
/// label-only) and its dependents (likewise). Relations without a label
/// fall back to the label `dep`.
pub fn extract_syntactic(
    corpus: &Corpus,
    instance: &Instance,
    _params: &Params,
) -> SyntacticFeatures {
    let sentence = &corpus.sentences()[instance.sent_idx];
    let deps_present = sentence.tokens.iter().any(|t| t.dep_head.is_some());
    let mut features = FeatureVector::new();
    if !deps_present {
        return SyntacticFeatures {
            features,
            deps_present,
        };
    }

    let target = &sentence.tokens[instance.tok_idx];
    if let Some(head_idx) = target.dep_head {
        let label = target.dep_label.as_deref().unwrap_or("dep").to_string();
        features.push(Feature::new(
            FeatureKind::DepHead {
                label: label.clone(),
            },
            sentence.tokens[head_idx].lemma.clone(),
        ));
        features.push(Feature::new(FeatureKind::DepHeadLabel, label));
    }
    for (idx, token) in sentence.tokens.iter().enumerate() {
        if idx == instance.tok_idx || token.dep_head != Some(instance.tok_idx) {
            continue;
        }
        let label = token.dep_label.as_deref().unwrap_or("dep").to_string();
        features.push(Feature::new(
            FeatureKind::DepDependent {
                label: label.clone(),
            },
            token.lemma.clone(),
        ));
        features.push(Feature::new(FeatureKind::DepDependentLabel, label));
    }

    SyntacticFeatures {
        features,
        deps_present,
    }
}

/// Named bundles of extractors that classifiers train and apply with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtractorSet {
    /// N-grams plus the small window bag.
    Local,
    /// Dependency label cues only.
    SyntacticCues,
    /// Lexicalized dependency relations only.
    ArgHead,
    /// Sentence (or widened) bag only.
    Global,
    /// Local plus global.
    Combined,
}

impl ExtractorSet {
    pub const ALL: [ExtractorSet; 5] = [
        ExtractorSet::Local,
        ExtractorSet::SyntacticCues,
        ExtractorSet::ArgHead,
        ExtractorSet::Global,
        ExtractorSet::Combined,
    ];

    pub fn parse(s: &str) -> Result<ExtractorSet> {
        Ok(match s {
            "local" => ExtractorSet::Local,
            "syntactic" => ExtractorSet::SyntacticCues,
            "arghead" => ExtractorSet::ArgHead,
            "global" => ExtractorSet::Global,
            "combined" => ExtractorSet::Combined,
            _ => {
                return Err(Error::Config(format!(
                    "unknown extractor set `{s}` (expected local, syntactic, arghead, global or combined)"
                )))
            }
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ExtractorSet::Local => "local",
            ExtractorSet::SyntacticCues => "syntactic",
            ExtractorSet::ArgHead => "arghead",
            ExtractorSet::Global => "global",
            ExtractorSet::Combined => "combined",
        }
    }

    /// Whether this set reads the dependency columns.
    pub fn requires_dependencies(&self) -> bool {
        matches!(self, ExtractorSet::SyntacticCues | ExtractorSet::ArgHead)
    }

    /// Knowledge categories this set stands for in reports. For the bag
    /// sets this includes the situation label (4b) even though emitted
    /// features all carry 4c, because the two are indistinguishable here.
    pub fn knowledge_types(&self) -> BTreeSet<KnowledgeType> {
        match self {
            ExtractorSet::Local => [
                KnowledgeType::Collocation,
                KnowledgeType::ArgHead,
                KnowledgeType::SyntacticCue,
            ]
            .into(),
            ExtractorSet::SyntacticCues => [KnowledgeType::SyntacticCue].into(),
            ExtractorSet::ArgHead => [KnowledgeType::ArgHead].into(),
            ExtractorSet::Global => {
                [KnowledgeType::SituationAssoc, KnowledgeType::TopicAssoc].into()
            }
            ExtractorSet::Combined => [
                KnowledgeType::Collocation,
                KnowledgeType::SituationAssoc,
                KnowledgeType::TopicAssoc,
                KnowledgeType::ArgHead,
                KnowledgeType::SyntacticCue,
            ]
            .into(),
        }
    }

    /// Run the extractors of this set over one instance.
    pub fn extract(&self, corpus: &Corpus, instance: &Instance, params: &Params) -> FeatureVector {
        match self {
            ExtractorSet::Local => extract_local(corpus, instance, params),
            ExtractorSet::Global => extract_global(corpus, instance, params),
            ExtractorSet::SyntacticCues => extract_syntactic(corpus, instance, params)
                .features
                .into_iter()
                .filter(|f| f.ktype == KnowledgeType::SyntacticCue)
                .collect(),
            ExtractorSet::ArgHead => extract_syntactic(corpus, instance, params)
                .features
                .into_iter()
                .filter(|f| f.ktype == KnowledgeType::ArgHead)
                .collect(),
            ExtractorSet::Combined => {
                let mut out = extract_local(corpus, instance, params);
                out.extend(extract_global(corpus, instance, params));
                out
            }
        }
    }
}

impl fmt::Display for ExtractorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Content lemmas of the instance's sentence, excluding the target
/// token by position. Shared by the gloss-overlap and signature scorers,
/// which treat context as a bag of sentence lemmas.
pub fn sentence_context_lemmas(
    corpus: &Corpus,
    instance: &Instance,
    params: &Params,
) -> Vec<String> {
    let sentence = &corpus.sentences()[instance.sent_idx];
    sentence
        .tokens
        .iter()
        .enumerate()
        .filter(|(idx, token)| *idx != instance.tok_idx && is_content(token, params))
        .map(|(_, token)| token.lemma.clone())
        .collect()
}

/// Content lemmas of a whole sentence, with no exclusions. Used where
/// the context is a document rather than an instance neighborhood.
pub fn content_lemmas(sentence: &Sentence, params: &Params) -> Vec<String> {
    sentence
        .tokens
        .iter()
        .filter(|token| is_content(token, params))
        .map(|token| token.lemma.clone())
        .collect()
}
