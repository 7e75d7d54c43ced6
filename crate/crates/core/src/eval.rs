//! Scoring and the cross-validated comparison harness.
//!
//! The primary metrics divide by ALL evaluation instances: precision is
//! correct/total and coverage is answered/total, so an abstention hurts
//! precision exactly as much as a wrong answer and precision <= coverage
//! always holds. correct/answered is reported too, as a clearly labeled
//! secondary column, because most modern tooling calls that precision.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::config::Params;
use crate::corpus::{make_folds, Corpus, Instance, TargetSpec};
use crate::disambiguators::{AlgorithmSpec, Answer, Context, InstanceKey, Resources};
use crate::error::{Error, Result};
use crate::features::KnowledgeType;
use crate::lkb::{Lkb, SenseId};

/// Metrics for one scored answer set. Counts are authoritative; the
/// ratios are derived from them at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreRow {
    pub precision: f64,
    pub coverage: f64,
    pub precision_answered: f64,
    pub correct: usize,
    pub answered: usize,
    pub total: usize,
}

impl ScoreRow {
    /// Ratios with the 0/0 = 0 convention, so empty answer sets score
    /// zero instead of NaN.
    pub fn from_counts(correct: usize, answered: usize, total: usize) -> ScoreRow {
        debug_assert!(correct <= answered && answered <= total);
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        ScoreRow {
            precision: ratio(correct, total),
            coverage: ratio(answered, total),
            precision_answered: ratio(correct, answered),
            correct,
            answered,
            total,
        }
    }

    pub fn empty() -> ScoreRow {
        ScoreRow::from_counts(0, 0, 0)
    }
}

/// Count one answer set against gold. Every answer's instance must be
/// present in `gold`; instances the algorithm abstained on still count
/// in `total`.
pub fn score(answers: &[Answer], gold: &BTreeMap<InstanceKey, SenseId>) -> Result<ScoreRow> {
    let mut correct = 0usize;
    let mut answered = 0usize;
    for answer in answers {
        let truth = gold.get(&answer.key).ok_or_else(|| {
            Error::MissingGold(format!(
                "{}/{}/{}",
                answer.key.doc_id, answer.key.sent_no, answer.key.tok_idx
            ))
        })?;
        if let Some(chosen) = &answer.chosen {
            answered += 1;
            if chosen == truth {
                correct += 1;
            }
        }
    }
    Ok(ScoreRow::from_counts(correct, answered, answers.len()))
}

/// Render a knowledge-type set as space-joined codes. The four
/// association subtypes collapse to their family code when all of them
/// are present; an empty set renders as `-`.
pub fn format_ktypes(set: &BTreeSet<KnowledgeType>) -> String {
    if set.is_empty() {
        return "-".to_string();
    }
    let family = [
        KnowledgeType::TaxonomicAssoc,
        KnowledgeType::SituationAssoc,
        KnowledgeType::TopicAssoc,
        KnowledgeType::ArgHead,
    ];
    let collapse = family.iter().all(|t| set.contains(t));
    let mut codes: Vec<&str> = Vec::new();
    for ktype in set {
        if collapse && family.contains(ktype) {
            if codes.last() != Some(&"4") {
                codes.push("4");
            }
        } else {
            codes.push(ktype.code());
        }
    }
    codes.join(" ")
}

/// One line of a comparison report. A populated `note` means the
/// algorithm could not run; its metrics are zeroed and `cv` is false.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub algorithm: String,
    pub ktypes: String,
    pub score: ScoreRow,
    pub cv: bool,
    pub note: Option<String>,
}

impl ReportRow {
    fn cells(&self) -> [String; 10] {
        [
            self.algorithm.clone(),
            self.ktypes.clone(),
            format!("{:.4}", self.score.precision),
            format!("{:.4}", self.score.coverage),
            format!("{:.4}", self.score.precision_answered),
            self.score.correct.to_string(),
            self.score.answered.to_string(),
            self.score.total.to_string(),
            if self.cv { "yes" } else { "no" }.to_string(),
            match &self.note {
                Some(reason) => reason.replace(['\t', '\n'], " "),
                None => "-".to_string(),
            },
        ]
    }
}

const COLUMNS: [&str; 10] = [
    "algorithm",
    "ktypes",
    "precision",
    "coverage",
    "precision_answered",
    "correct",
    "answered",
    "total",
    "cv",
    "note",
];

/// A full comparison grid. Row order follows the requested spec order.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreReport {
    pub setting: String,
    pub rows: Vec<ReportRow>,
}

impl ScoreReport {
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# setting\t{}", self.setting).unwrap();
        writeln!(out, "{}", COLUMNS.join("\t")).unwrap();
        for row in &self.rows {
            writeln!(out, "{}", row.cells().join("\t")).unwrap();
        }
        out
    }

    /// Space-aligned rendering for terminals. Numeric columns are
    /// right-aligned.
    pub fn to_table(&self) -> String {
        let rendered: Vec<[String; 10]> = self.rows.iter().map(ReportRow::cells).collect();
        let mut widths: Vec<usize> = COLUMNS.iter().map(|h| h.len()).collect();
        for cells in &rendered {
            for (width, cell) in widths.iter_mut().zip(cells) {
                *width = (*width).max(cell.len());
            }
        }
        let right_aligned = [
            false, false, true, true, true, true, true, true, false, false,
        ];
        let mut out = String::new();
        writeln!(out, "setting: {}", self.setting).unwrap();
        let mut line = String::new();
        for (i, header) in COLUMNS.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            if right_aligned[i] {
                write!(line, "{:>width$}", header, width = widths[i]).unwrap();
            } else {
                write!(line, "{:<width$}", header, width = widths[i]).unwrap();
            }
        }
        writeln!(out, "{}", line.trim_end()).unwrap();
        for cells in &rendered {
            let mut line = String::new();
            for (i, cell) in cells.iter().enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                if right_aligned[i] {
                    write!(line, "{:>width$}", cell, width = widths[i]).unwrap();
                } else {
                    write!(line, "{:<width$}", cell, width = widths[i]).unwrap();
                }
            }
            writeln!(out, "{}", line.trim_end()).unwrap();
        }
        out
    }
}

fn setting_descriptor(targets: &TargetSpec, k: usize, seed: u64) -> String {
    let targets = match targets {
        TargetSpec::AllPolysemousNouns => "all-polysemous-nouns".to_string(),
        TargetSpec::Lemmas(set) => set.iter().cloned().collect::<Vec<_>>().join(","),
    };
    format!("targets={targets} k={k} seed={seed}")
}

/// Shared inputs for evaluation runs. Borrowed so one load serves the
/// whole comparison.
pub struct Harness<'a> {
    pub lkb: &'a Lkb,
    pub corpus: &'a Corpus,
    pub params: &'a Params,
    pub resources: &'a Resources,
}

impl<'a> Harness<'a> {
    pub fn new(
        lkb: &'a Lkb,
        corpus: &'a Corpus,
        params: &'a Params,
        resources: &'a Resources,
    ) -> Harness<'a> {
        Harness {
            lkb,
            corpus,
            params,
            resources,
        }
    }

    /// Evaluate one algorithm over the tagged instances of the targets.
    /// Corpus-trained algorithms run k-fold: for each fold, a fresh model
    /// is trained on the other folds and applied to it, and the pooled
    /// answers are scored once. Everything else gets a single untrained
    /// pass over all instances.
    pub fn run_cv(
        &self,
        spec: &AlgorithmSpec,
        targets: &TargetSpec,
        k: usize,
        seed: u64,
    ) -> Result<ScoreRow> {
        if spec.requires_dependencies() && !self.corpus.has_dependencies() {
            return Err(Error::MissingResource(format!(
                "`{spec}` needs dependency columns, corpus has none"
            )));
        }
        let instances = self.corpus.instances(self.lkb, targets);
        if instances.is_empty() {
            return Err(Error::NoInstances);
        }
        let gold: BTreeMap<InstanceKey, SenseId> = instances
            .iter()
            .map(|i| (InstanceKey::of(i), i.gold.clone().expect("tagged instance")))
            .collect();
        let ctx = Context {
            lkb: self.lkb,
            corpus: self.corpus,
            params: self.params,
            targets,
            seed,
        };
        let mut answers: Vec<Answer> = Vec::with_capacity(instances.len());
        if spec.trainable_on_corpus() {
            let folds = make_folds(&instances, k, seed)?;
            for fold in 0..k {
                let train: Vec<Instance> = folds
                    .train_indices(fold)
                    .into_iter()
                    .map(|i| instances[i].clone())
                    .collect();
                let test: Vec<Instance> = folds
                    .test_indices(fold)
                    .into_iter()
                    .map(|i| instances[i].clone())
                    .collect();
                let mut algorithm = spec.build(self.lkb, self.params, self.resources)?;
                algorithm.train(&ctx, &train)?;
                answers.extend(algorithm.disambiguate_batch(&ctx, &test));
            }
        } else {
            let algorithm = spec.build(self.lkb, self.params, self.resources)?;
            answers.extend(algorithm.disambiguate_batch(&ctx, &instances));
        }
        score(&answers, &gold)
    }

    /// One row per spec, in the given order. All rows share the same
    /// instance list and fold assignment, since both depend only on
    /// (corpus, targets, k, seed). A row that fails carries the reason
    /// and zeroed metrics instead of aborting the report.
    pub fn compare(
        &self,
        specs: &[AlgorithmSpec],
        targets: &TargetSpec,
        k: usize,
        seed: u64,
    ) -> ScoreReport {
        let rows: Vec<ReportRow> = specs
            .par_iter()
            .map(|spec| {
                let ktypes = format_ktypes(&spec.knowledge_types());
                match self.run_cv(spec, targets, k, seed) {
                    Ok(row) => ReportRow {
                        algorithm: spec.to_string(),
                        ktypes,
                        score: row,
                        cv: spec.trainable_on_corpus(),
                        note: None,
                    },
                    Err(err) => ReportRow {
                        algorithm: spec.to_string(),
                        ktypes,
                        score: ScoreRow::empty(),
                        cv: false,
                        note: Some(err.to_string()),
                    },
                }
            })
            .collect();
        ScoreReport {
            setting: setting_descriptor(targets, k, seed),
            rows,
        }
    }
}
