//! The disambiguation algorithms behind one pluggable interface.
//!
//! Every algorithm takes an instance and answers with a sense or an
//! abstention. Some train on sense-tagged instances first (most frequent
//! sense, decision lists, semantic classes, selectional preferences);
//! the rest read the knowledge base or pre-built resources directly.
//!
//! Ties anywhere are broken the same way: higher score first, then the
//! lower inventory rank, then the lexicographically smaller sense id.
//! Together with seeded randomness keyed per instance this makes every
//! answer reproducible from (inputs, config, seed).

mod bootstrap;
mod decision_list;
mod density;
mod first_sense;
mod mfs;
mod overlap;
mod random;
mod selpref;
mod semclass;
mod topsig;

pub use bootstrap::{bootstrap_corpus, BootstrapDl};
pub use decision_list::{DecisionListModel, DlClassifier, DlEntry};
pub use density::Density;
pub use first_sense::FirstSense;
pub use mfs::Mfs;
pub use overlap::Overlap;
pub use random::Random;
pub use selpref::{Rel, SelPref};
pub use semclass::{ClassMap, SemClass};
pub use topsig::{chi2, Collections, Signature, TopSig};

use std::collections::BTreeSet;
use std::fmt;

use crate::config::Params;
use crate::corpus::{Corpus, Instance, TargetSpec};
use crate::error::{Error, Result};
use crate::features::{ExtractorSet, KnowledgeType};
use crate::lkb::{Lkb, Sense, SenseId};

/// Everything an algorithm may consult while training or answering.
/// `targets` names the evaluation instances so that algorithms which
/// learn from the whole corpus can hold out the test positions.
#[derive(Clone, Copy)]
pub struct Context<'a> {
    pub lkb: &'a Lkb,
    pub corpus: &'a Corpus,
    pub params: &'a Params,
    pub targets: &'a TargetSpec,
    pub seed: u64,
}

/// Stable identity of one corpus position, carried on answers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct InstanceKey {
    pub doc_id: String,
    pub sent_no: u32,
    pub tok_idx: usize,
}

impl InstanceKey {
    pub fn of(instance: &Instance) -> InstanceKey {
        InstanceKey {
            doc_id: instance.doc_id.clone(),
            sent_no: instance.sent_no,
            tok_idx: instance.tok_idx,
        }
    }
}

/// One algorithm's verdict on one instance. `chosen` absent means the
/// algorithm abstained. `score` is the algorithm's own scale and only
/// comparable within one algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct Answer {
    pub key: InstanceKey,
    pub chosen: Option<SenseId>,
    pub score: f64,
    pub algorithm: String,
}

impl Answer {
    pub fn new(
        algorithm: &str,
        instance: &Instance,
        chosen: Option<SenseId>,
        score: f64,
    ) -> Answer {
        Answer {
            key: InstanceKey::of(instance),
            chosen,
            score,
            algorithm: algorithm.to_string(),
        }
    }

    pub fn abstain(algorithm: &str, instance: &Instance) -> Answer {
        Answer::new(algorithm, instance, None, 0.0)
    }
}

/// The common interface. `train` is a no-op for knowledge-based
/// algorithms; `disambiguate_batch` exists so window-based algorithms
/// can share work across instances, and must agree with per-instance
/// calls.
pub trait Disambiguator: Send + Sync {
    fn name(&self) -> String;

    /// Knowledge categories this algorithm stands for in reports.
    fn knowledge_types(&self) -> BTreeSet<KnowledgeType>;

    fn trainable(&self) -> bool {
        false
    }

    fn train(&mut self, _ctx: &Context, _train: &[Instance]) -> Result<()> {
        Ok(())
    }

    fn disambiguate(&self, ctx: &Context, instance: &Instance) -> Answer;

    fn disambiguate_batch(&self, ctx: &Context, instances: &[Instance]) -> Vec<Answer> {
        instances
            .iter()
            .map(|instance| self.disambiguate(ctx, instance))
            .collect()
    }
}

/// FNV-1a over length-delimited parts, for deterministic per-instance
/// seeding that does not depend on process or platform.
fn fnv1a(parts: &[&[u8]]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    for part in parts {
        for &byte in *part {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(PRIME);
        }
        // Part separator, so ("ab","c") and ("a","bc") differ.
        hash ^= 0xff;
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

/// Seed for one instance's private generator. Mixing the algorithm name
/// keeps different algorithms' choices independent under one run seed.
pub(crate) fn instance_seed(run_seed: u64, algorithm: &str, instance: &Instance) -> u64 {
    run_seed
        ^ fnv1a(&[
            algorithm.as_bytes(),
            instance.doc_id.as_bytes(),
            &instance.sent_no.to_le_bytes(),
            &instance.tok_idx.to_le_bytes(),
            instance.lemma.as_bytes(),
        ])
}

/// Argmax over the instance's candidate senses with the standard
/// tie-break. `score` is consulted once per sense; equal scores fall to
/// the earlier (lower-rank) candidate.
pub(crate) fn best_sense<'a, F>(candidates: &[&'a Sense], mut score: F) -> Option<(&'a Sense, f64)>
where
    F: FnMut(&Sense) -> f64,
{
    let mut best: Option<(&Sense, f64)> = None;
    for sense in candidates {
        let s = score(sense);
        match &best {
            Some((_, top)) if s <= *top => {}
            _ => best = Some((sense, s)),
        }
    }
    best
}

/// Corpus positions that belong to evaluation instances outside the
/// current training fold. Algorithms that learn from every tagged token
/// in the corpus must skip these, or they would train on their own test
/// items.
pub(crate) fn held_out_positions(ctx: &Context, train: &[Instance]) -> BTreeSet<(usize, usize)> {
    let train_positions: BTreeSet<(usize, usize)> =
        train.iter().map(|i| (i.sent_idx, i.tok_idx)).collect();
    ctx.corpus
        .instances(ctx.lkb, ctx.targets)
        .iter()
        .map(|i| (i.sent_idx, i.tok_idx))
        .filter(|p| !train_positions.contains(p))
        .collect()
}

/// Pre-built inputs some algorithms need beyond the LKB and corpus.
#[derive(Default)]
pub struct Resources {
    /// Sense-to-class assignment for the semantic-class algorithm.
    pub class_map: Option<ClassMap>,
    /// Per-sense document collections for topic signatures.
    pub collections: Option<Collections>,
    /// Untagged corpus to auto-tag for bootstrapped training.
    pub raw_corpus: Option<Corpus>,
}

/// Parsed algorithm selector, e.g. `mfs`, `dl:local`, `bootstrap_dl`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgorithmSpec {
    Random,
    FirstSense,
    Mfs,
    Overlap,
    Density,
    DecisionList(ExtractorSet),
    SemClass,
    SelPref,
    TopSig,
    BootstrapDl(ExtractorSet),
}

impl AlgorithmSpec {
    pub const CANONICAL: [&'static str; 10] = [
        "random",
        "first_sense",
        "mfs",
        "overlap",
        "density",
        "dl:<set>",
        "semclass",
        "selpref",
        "topsig",
        "bootstrap_dl[:<set>]",
    ];

    pub fn parse(s: &str) -> Result<AlgorithmSpec> {
        let (head, tail) = match s.split_once(':') {
            Some((head, tail)) => (head, Some(tail)),
            None => (s, None),
        };
        let set = |default: Option<ExtractorSet>| -> Result<ExtractorSet> {
            match (tail, default) {
                (Some(t), _) => ExtractorSet::parse(t),
                (None, Some(d)) => Ok(d),
                (None, None) => Err(Error::Config(format!(
                    "`{head}` needs an extractor set, e.g. `{head}:local`"
                ))),
            }
        };
        let plain = |spec: AlgorithmSpec| -> Result<AlgorithmSpec> {
            match tail {
                Some(_) => Err(Error::Config(format!(
                    "`{head}` does not take an extractor set"
                ))),
                None => Ok(spec),
            }
        };
        match head {
            "random" => plain(AlgorithmSpec::Random),
            "first_sense" => plain(AlgorithmSpec::FirstSense),
            "mfs" => plain(AlgorithmSpec::Mfs),
            "overlap" => plain(AlgorithmSpec::Overlap),
            "density" => plain(AlgorithmSpec::Density),
            "dl" => Ok(AlgorithmSpec::DecisionList(set(None)?)),
            "semclass" => plain(AlgorithmSpec::SemClass),
            "selpref" => plain(AlgorithmSpec::SelPref),
            "topsig" => plain(AlgorithmSpec::TopSig),
            "bootstrap_dl" => Ok(AlgorithmSpec::BootstrapDl(set(Some(
                ExtractorSet::Combined,
            ))?)),
            other => Err(Error::UnknownAlgorithm(other.to_string())),
        }
    }

    /// Whether the evaluation harness should train this algorithm on
    /// corpus folds. The bootstrapped decision list trains on its own
    /// auto-tagged corpus instead, so it does not count.
    pub fn trainable_on_corpus(&self) -> bool {
        matches!(
            self,
            AlgorithmSpec::Mfs
                | AlgorithmSpec::DecisionList(_)
                | AlgorithmSpec::SemClass
                | AlgorithmSpec::SelPref
        )
    }

    /// The knowledge categories this selector stands for, identical to
    /// what the built algorithm declares. Duplicated here so report rows
    /// for algorithms that failed to build still carry them.
    pub fn knowledge_types(&self) -> BTreeSet<KnowledgeType> {
        match self {
            AlgorithmSpec::Random => BTreeSet::new(),
            AlgorithmSpec::FirstSense | AlgorithmSpec::Mfs => [KnowledgeType::Frequency].into(),
            AlgorithmSpec::Overlap => [
                KnowledgeType::TaxonomicAssoc,
                KnowledgeType::SituationAssoc,
                KnowledgeType::TopicAssoc,
                KnowledgeType::ArgHead,
            ]
            .into(),
            AlgorithmSpec::Density => [KnowledgeType::TaxonomicAssoc].into(),
            AlgorithmSpec::DecisionList(set) => set.knowledge_types(),
            AlgorithmSpec::SemClass | AlgorithmSpec::TopSig => {
                [KnowledgeType::SituationAssoc, KnowledgeType::TopicAssoc].into()
            }
            AlgorithmSpec::SelPref => [KnowledgeType::SelectionalPref].into(),
            AlgorithmSpec::BootstrapDl(set) => {
                let mut types = set.knowledge_types();
                types.insert(KnowledgeType::TaxonomicAssoc);
                types.insert(KnowledgeType::SituationAssoc);
                types.insert(KnowledgeType::TopicAssoc);
                types
            }
        }
    }

    /// Whether this algorithm reads the dependency columns.
    pub fn requires_dependencies(&self) -> bool {
        match self {
            AlgorithmSpec::SelPref => true,
            AlgorithmSpec::DecisionList(set) | AlgorithmSpec::BootstrapDl(set) => {
                set.requires_dependencies()
            }
            _ => false,
        }
    }

    /// Construct the algorithm, building whatever resources it needs.
    pub fn build(
        &self,
        lkb: &Lkb,
        params: &Params,
        resources: &Resources,
    ) -> Result<Box<dyn Disambiguator>> {
        Ok(match self {
            AlgorithmSpec::Random => Box::new(Random),
            AlgorithmSpec::FirstSense => Box::new(FirstSense),
            AlgorithmSpec::Mfs => Box::new(Mfs::new()),
            AlgorithmSpec::Overlap => Box::new(Overlap),
            AlgorithmSpec::Density => Box::new(Density),
            AlgorithmSpec::DecisionList(set) => Box::new(DlClassifier::new(*set)),
            AlgorithmSpec::SemClass => {
                let class_map = resources
                    .class_map
                    .as_ref()
                    .ok_or_else(|| Error::MissingResource("sense class file".to_string()))?;
                Box::new(SemClass::new(class_map.clone()))
            }
            AlgorithmSpec::SelPref => Box::new(SelPref::new()),
            AlgorithmSpec::TopSig => {
                let collections = resources
                    .collections
                    .as_ref()
                    .ok_or_else(|| Error::MissingResource("signature collections".to_string()))?;
                Box::new(TopSig::build(collections, lkb, params)?)
            }
            AlgorithmSpec::BootstrapDl(set) => {
                let collections = resources
                    .collections
                    .as_ref()
                    .ok_or_else(|| Error::MissingResource("signature collections".to_string()))?;
                let raw = resources
                    .raw_corpus
                    .as_ref()
                    .ok_or_else(|| Error::MissingResource("raw corpus".to_string()))?;
                Box::new(BootstrapDl::build(collections, raw, *set, lkb, params)?)
            }
        })
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgorithmSpec::Random => f.write_str("random"),
            AlgorithmSpec::FirstSense => f.write_str("first_sense"),
            AlgorithmSpec::Mfs => f.write_str("mfs"),
            AlgorithmSpec::Overlap => f.write_str("overlap"),
            AlgorithmSpec::Density => f.write_str("density"),
            AlgorithmSpec::DecisionList(set) => write!(f, "dl:{set}"),
            AlgorithmSpec::SemClass => f.write_str("semclass"),
            AlgorithmSpec::SelPref => f.write_str("selpref"),
            AlgorithmSpec::TopSig => f.write_str("topsig"),
            AlgorithmSpec::BootstrapDl(set) => write!(f, "bootstrap_dl:{set}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lkb::Pos;

    #[test]
    fn spec_strings_round_trip() {
        for s in [
            "random",
            "first_sense",
            "mfs",
            "overlap",
            "density",
            "dl:local",
            "dl:syntactic",
            "dl:arghead",
            "dl:global",
            "dl:combined",
            "semclass",
            "selpref",
            "topsig",
            "bootstrap_dl:combined",
            "bootstrap_dl:local",
        ] {
            let spec = AlgorithmSpec::parse(s).unwrap();
            assert_eq!(spec.to_string(), s, "via {spec:?}");
        }
        // Bare bootstrap_dl defaults to the combined set.
        assert_eq!(
            AlgorithmSpec::parse("bootstrap_dl").unwrap(),
            AlgorithmSpec::BootstrapDl(ExtractorSet::Combined)
        );
    }

    #[test]
    fn bad_spec_strings_are_rejected() {
        assert!(matches!(
            AlgorithmSpec::parse("lesk"),
            Err(Error::UnknownAlgorithm(_))
        ));
        assert!(matches!(AlgorithmSpec::parse("dl"), Err(Error::Config(_))));
        assert!(matches!(
            AlgorithmSpec::parse("dl:everything"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            AlgorithmSpec::parse("mfs:local"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn instance_seed_separates_algorithms_and_positions() {
        let a = Instance {
            doc_id: "d".into(),
            sent_idx: 0,
            sent_no: 0,
            tok_idx: 1,
            lemma: "bank".into(),
            pos: Pos::Noun,
            gold: None,
        };
        let mut b = a.clone();
        b.tok_idx = 2;
        assert_ne!(
            instance_seed(7, "random", &a),
            instance_seed(7, "random", &b)
        );
        assert_ne!(
            instance_seed(7, "random", &a),
            instance_seed(7, "semclass", &a)
        );
        assert_eq!(
            instance_seed(7, "random", &a),
            instance_seed(7, "random", &a)
        );
        assert_ne!(
            instance_seed(7, "random", &a),
            instance_seed(8, "random", &a)
        );
    }

    #[test]
    fn fnv_separator_distinguishes_part_boundaries() {
        assert_ne!(fnv1a(&[b"ab", b"c"]), fnv1a(&[b"a", b"bc"]));
        assert_ne!(fnv1a(&[b"ab"]), fnv1a(&[b"ab", b""]));
    }
}
