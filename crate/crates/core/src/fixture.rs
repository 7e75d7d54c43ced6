//! Bundled miniature dataset so everything can run end-to-end with no
//! external data: four short documents around three ambiguous nouns
//! (bank, crane, note), a forest taxonomy, glosses, coarse sense
//! classes, per-sense signature collections and an untagged wire feed.
//!
//! The taxonomy is deliberately a forest. Under a single root every
//! sense of a noun reaches the root, so class-based scores degenerate
//! into ties there; separate trees keep the senses distinguishable.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use crate::corpus::Corpus;
use crate::disambiguators::{ClassMap, Collections, Resources};
use crate::error::Result;
use crate::lkb::{Lkb, SenseId};

pub const INVENTORY: &str = include_str!("../fixtures/inventory.tsv");
pub const TAXONOMY: &str = include_str!("../fixtures/taxonomy.tsv");
pub const GLOSSES: &str = include_str!("../fixtures/glosses.tsv");
pub const CORPUS: &str = include_str!("../fixtures/corpus.tsv");
pub const CLASSES: &str = include_str!("../fixtures/classes.tsv");
pub const RAW_CORPUS: &str = include_str!("../fixtures/raw.tsv");

/// Per-sense document collections for the signature builder. Three tiny
/// documents per sense, vocabulary chosen to overlap the wire feed.
const COLLECTION_DOCS: [(&str, [&str; 3]); 7] = [
    (
        "bank.n.1",
        [
            "money teller loan deposit",
            "account money interest credit",
            "loan credit teller account",
        ],
    ),
    (
        "bank.n.2",
        [
            "river mud reed water",
            "shore river flood water",
            "mud reed flood shore",
        ],
    ),
    (
        "crane.n.1",
        [
            "bird nest marsh feather",
            "wing feather marsh water",
            "bird heron nest wing",
        ],
    ),
    (
        "crane.n.2",
        [
            "machine girder steel site",
            "steel beam site tower",
            "machine hoist winch girder",
        ],
    ),
    (
        "note.n.1",
        [
            "melody tone choir song",
            "choir song pitch tune",
            "tune melody music tone",
        ],
    ),
    (
        "note.n.2",
        [
            "letter message paper word",
            "message word page mail",
            "letter mail paper page",
        ],
    ),
    (
        "note.n.3",
        [
            "money cash wallet currency",
            "paper money currency pocket",
            "cash pocket wallet coin",
        ],
    ),
];

/// The whole bundle, parsed and ready for a harness.
pub struct Fixture {
    pub lkb: Lkb,
    pub corpus: Corpus,
    pub resources: Resources,
}

/// Signature collections as an in-memory map.
pub fn collections() -> Collections {
    let mut by_sense: BTreeMap<SenseId, Vec<BTreeSet<String>>> = BTreeMap::new();
    for (sense, docs) in COLLECTION_DOCS {
        by_sense.insert(
            SenseId::new(sense),
            docs.iter()
                .map(|doc| doc.split_whitespace().map(str::to_string).collect())
                .collect(),
        );
    }
    Collections::from_map(by_sense)
}

/// Parse the embedded files. The data is compiled in and covered by
/// tests, so failures here are build defects, not runtime conditions.
pub fn load() -> Fixture {
    let lkb = Lkb::parse(
        INVENTORY,
        TAXONOMY,
        GLOSSES,
        "fixture inventory",
        "fixture taxonomy",
        "fixture glosses",
    )
    .expect("embedded inventory parses");
    let corpus = Corpus::parse(CORPUS, "fixture corpus").expect("embedded corpus parses");
    let class_map = ClassMap::parse(CLASSES, "fixture classes").expect("embedded classes parse");
    let raw_corpus = Corpus::parse(RAW_CORPUS, "fixture raw corpus").expect("embedded feed parses");
    Fixture {
        lkb,
        corpus,
        resources: Resources {
            class_map: Some(class_map),
            collections: Some(collections()),
            raw_corpus: Some(raw_corpus),
        },
    }
}

/// Materialize every bundled file under `dir`, ready for file-based
/// runs: the three knowledge-base files, the two corpora, the class
/// file, and one directory per sense under `collections/`.
pub fn write_to_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (name, text) in [
        ("inventory.tsv", INVENTORY),
        ("taxonomy.tsv", TAXONOMY),
        ("glosses.tsv", GLOSSES),
        ("corpus.tsv", CORPUS),
        ("classes.tsv", CLASSES),
        ("raw.tsv", RAW_CORPUS),
    ] {
        fs::write(dir.join(name), text)?;
    }
    for (sense, docs) in COLLECTION_DOCS {
        let sense_dir = dir.join("collections").join(sense);
        fs::create_dir_all(&sense_dir)?;
        for (i, doc) in docs.iter().enumerate() {
            fs::write(sense_dir.join(format!("doc{i}.txt")), doc)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Params;
    use crate::corpus::{TagPolicy, TargetSpec};
    use crate::disambiguators::AlgorithmSpec;
    use crate::eval::Harness;
    use crate::features::ExtractorSet;
    use crate::lkb::Pos;

    #[test]
    fn the_corpus_is_tagged_cleanly_and_carries_parses() {
        let fixture = load();
        assert!(fixture.corpus.has_dependencies());
        let dir = tempfile::tempdir().unwrap();
        write_to_dir(dir.path()).unwrap();
        let (_, issues) = Corpus::load_validated(
            &dir.path().join("corpus.tsv"),
            &fixture.lkb,
            TagPolicy::Warn,
        )
        .unwrap();
        assert!(issues.is_empty(), "{issues:?}");
    }

    #[test]
    fn instance_counts_support_cross_validation() {
        let fixture = load();
        let instances = fixture
            .corpus
            .instances(&fixture.lkb, &TargetSpec::AllPolysemousNouns);
        let mut per_lemma: BTreeMap<&str, usize> = BTreeMap::new();
        for instance in &instances {
            *per_lemma.entry(instance.lemma.as_str()).or_default() += 1;
        }
        assert_eq!(per_lemma.get("bank"), Some(&10));
        assert_eq!(per_lemma.get("crane"), Some(&8));
        assert_eq!(per_lemma.get("note"), Some(&9));
        assert_eq!(instances.len(), 27);
    }

    #[test]
    fn every_algorithm_runs_on_the_bundle() {
        let fixture = load();
        let params = Params::default();
        let harness = Harness::new(&fixture.lkb, &fixture.corpus, &params, &fixture.resources);
        let specs = [
            AlgorithmSpec::Random,
            AlgorithmSpec::FirstSense,
            AlgorithmSpec::Mfs,
            AlgorithmSpec::Overlap,
            AlgorithmSpec::Density,
            AlgorithmSpec::DecisionList(ExtractorSet::Local),
            AlgorithmSpec::DecisionList(ExtractorSet::SyntacticCues),
            AlgorithmSpec::DecisionList(ExtractorSet::ArgHead),
            AlgorithmSpec::DecisionList(ExtractorSet::Global),
            AlgorithmSpec::DecisionList(ExtractorSet::Combined),
            AlgorithmSpec::SemClass,
            AlgorithmSpec::SelPref,
            AlgorithmSpec::TopSig,
            AlgorithmSpec::BootstrapDl(ExtractorSet::Combined),
        ];
        let report = harness.compare(&specs, &TargetSpec::AllPolysemousNouns, 5, 17);
        for row in &report.rows {
            assert!(
                row.note.is_none(),
                "{} failed: {:?}",
                row.algorithm,
                row.note
            );
            assert!(row.score.precision <= row.score.coverage);
        }
        // Learning anything at all must beat guessing on this data.
        let by_name = |name: &str| {
            report
                .rows
                .iter()
                .find(|r| r.algorithm == name)
                .unwrap()
                .score
                .clone()
        };
        assert!(by_name("dl:combined").precision > by_name("random").precision);
        assert_eq!(by_name("overlap").coverage, 1.0);
        assert_eq!(by_name("mfs").coverage, 1.0);
    }

    #[test]
    fn written_files_load_back_to_the_embedded_data() {
        let fixture = load();
        let dir = tempfile::tempdir().unwrap();
        write_to_dir(dir.path()).unwrap();
        let lkb = Lkb::load(
            &dir.path().join("inventory.tsv"),
            &dir.path().join("taxonomy.tsv"),
            &dir.path().join("glosses.tsv"),
        )
        .unwrap();
        assert_eq!(
            lkb.senses_of("note", &Pos::Noun).len(),
            fixture.lkb.senses_of("note", &Pos::Noun).len()
        );
        let corpus = Corpus::load(&dir.path().join("corpus.tsv")).unwrap();
        assert_eq!(corpus, fixture.corpus);
        let classes = ClassMap::load(&dir.path().join("classes.tsv")).unwrap();
        assert_eq!(Some(&classes), fixture.resources.class_map.as_ref());
        let collections = Collections::load(&dir.path().join("collections")).unwrap();
        assert_eq!(Some(&collections), fixture.resources.collections.as_ref());
        let raw = Corpus::load(&dir.path().join("raw.tsv")).unwrap();
        assert_eq!(Some(&raw), fixture.resources.raw_corpus.as_ref());
    }

    #[test]
    fn the_taxonomy_is_a_forest_with_shared_subtrees_per_domain() {
        let fixture = load();
        let lkb = &fixture.lkb;
        let sense = |id: &str| lkb.sense(&SenseId::new(id)).unwrap();
        // The two bank senses live in different trees.
        let fin: Vec<_> = lkb
            .hypernym_closure(&sense("bank.n.1").synset)
            .unwrap()
            .into_iter()
            .collect();
        let river: Vec<_> = lkb
            .hypernym_closure(&sense("bank.n.2").synset)
            .unwrap()
            .into_iter()
            .collect();
        assert!(fin.iter().all(|s| !river.contains(s)));
    }
}
