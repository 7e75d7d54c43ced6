//! The five subcommands. Each takes fully resolved settings and loaded
//! inputs, does its work, and reports through the process exit code
//! mapped in `main`. No command mutates its input files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use polysense::disambiguators::{
    bootstrap_corpus, Context, Disambiguator, DlClassifier, Mfs, SelPref, SemClass, TopSig,
};
use polysense::{AlgorithmSpec, Error, Harness, Result, TrainedModel};

use crate::config::{Inputs, RunConfig};

/// Report rendering for standard output. The file written by `--out`
/// is always the tab-separated form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Table,
    Tsv,
}

fn dependency_check(algorithm: &AlgorithmSpec, inputs: &Inputs) -> Result<()> {
    if algorithm.requires_dependencies() && !inputs.corpus()?.has_dependencies() {
        return Err(Error::MissingResource(format!(
            "`{algorithm}` needs dependency columns, corpus has none"
        )));
    }
    Ok(())
}

/// Train one algorithm on the full tagged corpus and write its model.
pub fn train(
    config: &RunConfig,
    inputs: &Inputs,
    algorithm: &AlgorithmSpec,
    out: &Path,
) -> Result<()> {
    dependency_check(algorithm, inputs)?;
    let corpus = inputs.corpus()?;
    let instances = corpus.instances(&inputs.lkb, &config.targets);
    if instances.is_empty() {
        return Err(Error::NoInstances);
    }
    let ctx = Context {
        lkb: &inputs.lkb,
        corpus,
        params: &config.params,
        targets: &config.targets,
        seed: config.seed,
    };
    let model = match algorithm {
        AlgorithmSpec::Mfs => {
            let mut m = Mfs::new();
            m.train(&ctx, &instances)?;
            TrainedModel::Mfs(m)
        }
        AlgorithmSpec::DecisionList(set) => {
            let mut m = DlClassifier::new(*set);
            m.train(&ctx, &instances)?;
            TrainedModel::Dl(m)
        }
        AlgorithmSpec::SemClass => {
            let map = inputs
                .resources
                .class_map
                .as_ref()
                .ok_or_else(|| Error::MissingResource("sense class file".to_string()))?;
            let mut m = SemClass::new(map.clone());
            m.train(&ctx, &instances)?;
            TrainedModel::SemClass(m)
        }
        AlgorithmSpec::SelPref => {
            let mut m = SelPref::new();
            m.train(&ctx, &instances)?;
            TrainedModel::SelPref(m)
        }
        other => return Err(Error::NotTrainable(other.to_string())),
    };
    model.save(out)?;
    println!(
        "wrote {} model ({} training instances) to {}",
        model.kind(),
        instances.len(),
        out.display()
    );
    Ok(())
}

/// A saved model may only be applied as the algorithm that trained it;
/// for decision lists the extractor sets must match too.
fn model_as_algorithm(
    model: TrainedModel,
    algorithm: &AlgorithmSpec,
) -> Result<Box<dyn Disambiguator>> {
    match (model, algorithm) {
        (TrainedModel::Mfs(m), AlgorithmSpec::Mfs) => Ok(Box::new(m)),
        (TrainedModel::Dl(m), AlgorithmSpec::DecisionList(set)) => {
            if m.set() != *set {
                return Err(Error::ExtractorMismatch {
                    trained: m.set().as_str().to_string(),
                    applied: set.as_str().to_string(),
                });
            }
            Ok(Box::new(m))
        }
        (TrainedModel::SemClass(m), AlgorithmSpec::SemClass) => Ok(Box::new(m)),
        (TrainedModel::SelPref(m), AlgorithmSpec::SelPref) => Ok(Box::new(m)),
        (model, algorithm) => Err(Error::Config(format!(
            "model file holds a `{}` model, not `{algorithm}`",
            model.kind()
        ))),
    }
}

/// Disambiguate every target occurrence of the corpus, tagged or not,
/// and emit one answer row per occurrence.
pub fn apply(
    config: &RunConfig,
    inputs: &Inputs,
    algorithm: &AlgorithmSpec,
    model_path: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    dependency_check(algorithm, inputs)?;
    let disambiguator: Box<dyn Disambiguator> = if algorithm.trainable_on_corpus() {
        let path = model_path.ok_or_else(|| {
            Error::Config(format!(
                "`{algorithm}` answers from a trained model; pass `--model <FILE>` (see `polysense train`)"
            ))
        })?;
        model_as_algorithm(TrainedModel::load(path)?, algorithm)?
    } else {
        if model_path.is_some() {
            return Err(Error::Config(format!(
                "`{algorithm}` does not take a model file"
            )));
        }
        algorithm.build(&inputs.lkb, &config.params, &inputs.resources)?
    };

    let corpus = inputs.corpus()?;
    let occurrences = corpus.occurrences(&inputs.lkb, &config.targets);
    let ctx = Context {
        lkb: &inputs.lkb,
        corpus,
        params: &config.params,
        targets: &config.targets,
        seed: config.seed,
    };
    let answers = disambiguator.disambiguate_batch(&ctx, &occurrences);

    // Batch answers keep the occurrence order, so the two lists zip.
    let mut text = String::new();
    writeln!(text, "# algorithm\t{algorithm}").unwrap();
    for (occurrence, answer) in occurrences.iter().zip(&answers) {
        writeln!(
            text,
            "{}\t{}\t{}\t{}\t{}\t{}",
            answer.key.doc_id,
            answer.key.sent_no,
            answer.key.tok_idx,
            occurrence.lemma,
            answer.chosen.as_ref().map(|s| s.as_str()).unwrap_or("-"),
            answer.score,
        )
        .unwrap();
    }
    match out {
        Some(path) => {
            fs::write(path, text)?;
            println!("wrote {} answers to {}", answers.len(), path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Cross-validate every configured algorithm and render the score grid.
/// Rows that fail carry their reason in the `note` column; the command
/// still exits 0, since the report itself is the result.
pub fn compare(
    config: &RunConfig,
    inputs: &Inputs,
    format: Format,
    out: Option<&Path>,
) -> Result<()> {
    let harness = Harness::new(
        &inputs.lkb,
        inputs.corpus()?,
        &config.params,
        &inputs.resources,
    );
    let report = harness.compare(&config.algorithms, &config.targets, config.k, config.seed);
    match format {
        Format::Table => print!("{}", report.to_table()),
        Format::Tsv => print!("{}", report.to_tsv()),
    }
    if let Some(path) = out {
        fs::write(path, report.to_tsv())?;
    }
    Ok(())
}

/// Auto-tag a raw corpus with topic signatures and write the result as
/// a regular corpus file, ready to train on.
pub fn bootstrap(config: &RunConfig, inputs: &Inputs, out: &Path) -> Result<()> {
    let collections = inputs
        .resources
        .collections
        .as_ref()
        .ok_or_else(|| Error::MissingResource("signature collections".to_string()))?;
    let raw = inputs
        .resources
        .raw_corpus
        .as_ref()
        .ok_or_else(|| Error::MissingResource("raw corpus".to_string()))?;
    let topsig = TopSig::build(collections, &inputs.lkb, &config.params)?;
    let (tagged_corpus, tagged, total) =
        bootstrap_corpus(&topsig, &inputs.lkb, raw, &config.params);
    tagged_corpus.save(out)?;
    println!("tagged {tagged} of {total} occurrences");
    println!("wrote tagged corpus to {}", out.display());
    Ok(())
}

/// Load every configured input and report what each contains. Purely a
/// format check; nothing is trained or scored.
pub fn validate(config: &RunConfig, inputs: &Inputs) -> Result<()> {
    let lkb = &inputs.lkb;
    let senses = lkb.senses().count();
    let synsets = lkb.synset_ids().count();
    println!("lkb: ok ({senses} senses, {synsets} synsets)");
    if let Some(corpus) = &inputs.corpus {
        let instances = corpus.instances(lkb, &config.targets);
        println!(
            "corpus: ok ({} sentences, {} tagged target instances)",
            corpus.sentences().len(),
            instances.len()
        );
    }
    if let Some(map) = &inputs.resources.class_map {
        let classes: std::collections::BTreeSet<&str> =
            map.iter().map(|(_, class)| class).collect();
        println!(
            "classes: ok ({} senses in {} classes)",
            map.iter().count(),
            classes.len()
        );
    }
    if let Some(collections) = &inputs.resources.collections {
        let docs: usize = collections
            .senses()
            .map(|s| collections.docs(s).map(<[_]>::len).unwrap_or(0))
            .sum();
        println!(
            "collections: ok ({} senses, {docs} documents)",
            collections.senses().count()
        );
    }
    if let Some(raw) = &inputs.resources.raw_corpus {
        println!("raw corpus: ok ({} sentences)", raw.sentences().len());
    }
    Ok(())
}
