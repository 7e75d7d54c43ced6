//! Sense-tagged corpora: the column file format, disambiguation instances
//! and deterministic cross-validation folds.
//!
//! A corpus file is UTF-8, one token per line:
//!
//! ```text
//! doc_id<TAB>sent_no<TAB>tok_no<TAB>wordform<TAB>lemma<TAB>pos<TAB>sense_or_-<TAB>dep_head_or_-<TAB>dep_label_or_-
//! ```
//!
//! A blank line ends a sentence. `tok_no` is the 0-based position within
//! the sentence and must be contiguous. `dep_head` is a sentence-local
//! token index. `-` marks an absent sense, head or label.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io::Write as IoWrite;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lkb::{Lkb, Pos, SenseId};

/// One corpus token. `dep_head`, if present, points at another token in
/// the same sentence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub wordform: String,
    pub lemma: String,
    pub pos: Pos,
    pub sense: Option<SenseId>,
    pub dep_head: Option<usize>,
    pub dep_label: Option<String>,
}

/// A non-empty sentence together with its document id and the sentence
/// number it carried in the file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    pub doc_id: String,
    pub sent_no: u32,
    pub tokens: Vec<Token>,
}

/// A loaded corpus. Immutable after load; `doc_index` is derived from
/// `sentences` and maps each document to its sentence indices in order.
#[derive(Clone, Debug)]
pub struct Corpus {
    sentences: Vec<Sentence>,
    doc_index: BTreeMap<String, Vec<usize>>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.sentences == other.sentences
    }
}

impl Eq for Corpus {}

/// One test occurrence of a target lemma. `sent_idx` indexes into
/// `Corpus::sentences`; `gold`, when present, is a valid sense of
/// (lemma, pos).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub doc_id: String,
    pub sent_idx: usize,
    pub sent_no: u32,
    pub tok_idx: usize,
    pub lemma: String,
    pub pos: Pos,
    pub gold: Option<SenseId>,
}

/// Which tokens count as disambiguation targets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TargetSpec {
    /// Every noun with at least two inventory senses.
    AllPolysemousNouns,
    /// Tokens whose lemma is in the set and known to the inventory.
    Lemmas(BTreeSet<String>),
}

/// What to do when a corpus sense tag fails validation against the
/// inventory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TagPolicy {
    Error,
    Warn,
}

/// A sense tag that is unknown to the inventory or belongs to a
/// different lemma/pos.
#[derive(Clone, Debug)]
pub struct TagIssue {
    pub line: usize,
    pub doc_id: String,
    pub sent_no: u32,
    pub tok_no: usize,
    pub lemma: String,
    pub tag: String,
    pub reason: String,
}

impl fmt::Display for TagIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}: {}/{}/{} lemma `{}` tag `{}`: {}",
            self.line, self.doc_id, self.sent_no, self.tok_no, self.lemma, self.tag, self.reason
        )
    }
}

impl Corpus {
    pub fn load(path: &Path) -> Result<Corpus> {
        let text = fs::read_to_string(path)?;
        Corpus::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Corpus> {
        parse_tracked(text, origin).map(|(corpus, _)| corpus)
    }

    /// Load and check every sense tag against the inventory. Under
    /// `TagPolicy::Error` the first bad tag aborts the load; under
    /// `TagPolicy::Warn` all issues are returned for the caller to
    /// report.
    pub fn load_validated(
        path: &Path,
        lkb: &Lkb,
        policy: TagPolicy,
    ) -> Result<(Corpus, Vec<TagIssue>)> {
        let origin = path.display().to_string();
        let text = fs::read_to_string(path)?;
        let (corpus, lines) = parse_tracked(&text, &origin)?;
        let issues = corpus.tag_issues(lkb, &lines);
        if policy == TagPolicy::Error {
            if let Some(first) = issues.first() {
                return Err(Error::UnknownSenseTag {
                    origin,
                    line: first.line,
                    tag: first.tag.clone(),
                });
            }
        }
        Ok((corpus, issues))
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Sentence indices of one document, in corpus order.
    pub fn doc_sentences(&self, doc_id: &str) -> &[usize] {
        self.doc_index.get(doc_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &String> {
        self.doc_index.keys()
    }

    /// True when any token carries a dependency head. Feature paths that
    /// need parses are disabled on corpora where this is false.
    pub fn has_dependencies(&self) -> bool {
        self.sentences
            .iter()
            .any(|s| s.tokens.iter().any(|t| t.dep_head.is_some()))
    }

    /// Sense-tagged occurrences of the targets, in document order. Tags
    /// that fail inventory validation are skipped here; `validate_tags`
    /// is the place that reports them.
    pub fn instances(&self, lkb: &Lkb, targets: &TargetSpec) -> Vec<Instance> {
        self.collect_targets(lkb, targets, true)
    }

    /// Every occurrence of the targets, tagged or not. Gold is kept only
    /// when the tag validates.
    pub fn occurrences(&self, lkb: &Lkb, targets: &TargetSpec) -> Vec<Instance> {
        self.collect_targets(lkb, targets, false)
    }

    fn collect_targets(&self, lkb: &Lkb, targets: &TargetSpec, tagged_only: bool) -> Vec<Instance> {
        let mut out = Vec::new();
        for (sent_idx, sentence) in self.sentences.iter().enumerate() {
            for (tok_idx, token) in sentence.tokens.iter().enumerate() {
                let senses = lkb.senses_of(&token.lemma, &token.pos);
                let matches = match targets {
                    TargetSpec::AllPolysemousNouns => token.pos == Pos::Noun && senses.len() >= 2,
                    TargetSpec::Lemmas(set) => set.contains(&token.lemma) && !senses.is_empty(),
                };
                if !matches {
                    continue;
                }
                let gold = token
                    .sense
                    .as_ref()
                    .filter(|tag| senses.iter().any(|s| &s.id == *tag))
                    .cloned();
                if tagged_only && gold.is_none() {
                    continue;
                }
                out.push(Instance {
                    doc_id: sentence.doc_id.clone(),
                    sent_idx,
                    sent_no: sentence.sent_no,
                    tok_idx,
                    lemma: token.lemma.clone(),
                    pos: token.pos.clone(),
                    gold,
                });
            }
        }
        out
    }

    /// All sense tags that are unknown to the inventory or belong to a
    /// different lemma/pos. Issue line numbers are 0 here; `load_validated`
    /// has the file positions and fills them in.
    pub fn validate_tags(&self, lkb: &Lkb) -> Vec<TagIssue> {
        self.tag_issues(lkb, &[])
    }

    fn tag_issues(&self, lkb: &Lkb, lines: &[Vec<usize>]) -> Vec<TagIssue> {
        let mut issues = Vec::new();
        for (sent_idx, sentence) in self.sentences.iter().enumerate() {
            for (tok_idx, token) in sentence.tokens.iter().enumerate() {
                let Some(tag) = &token.sense else { continue };
                let reason = if lkb.sense(tag).is_none() {
                    Some("not in the sense inventory".to_string())
                } else if !lkb
                    .senses_of(&token.lemma, &token.pos)
                    .iter()
                    .any(|s| &s.id == tag)
                {
                    Some(format!(
                        "inventory lists it under a different lemma/pos, not {}/{}",
                        token.lemma, token.pos
                    ))
                } else {
                    None
                };
                if let Some(reason) = reason {
                    let line = lines
                        .get(sent_idx)
                        .and_then(|v| v.get(tok_idx))
                        .copied()
                        .unwrap_or(0);
                    issues.push(TagIssue {
                        line,
                        doc_id: sentence.doc_id.clone(),
                        sent_no: sentence.sent_no,
                        tok_no: tok_idx,
                        lemma: token.lemma.clone(),
                        tag: tag.as_str().to_string(),
                        reason,
                    });
                }
            }
        }
        issues
    }

    /// Serialize in the column format. Loading the output reproduces this
    /// corpus exactly.
    pub fn write_to<W: IoWrite>(&self, w: &mut W) -> Result<()> {
        for (i, sentence) in self.sentences.iter().enumerate() {
            if i > 0 {
                writeln!(w)?;
            }
            for (tok_no, token) in sentence.tokens.iter().enumerate() {
                writeln!(
                    w,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    sentence.doc_id,
                    sentence.sent_no,
                    tok_no,
                    token.wordform,
                    token.lemma,
                    token.pos,
                    token.sense.as_ref().map(SenseId::as_str).unwrap_or("-"),
                    token
                        .dep_head
                        .map(|h| h.to_string())
                        .unwrap_or_else(|| "-".to_string()),
                    token.dep_label.as_deref().unwrap_or("-"),
                )?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        fs::write(path, buf)?;
        Ok(())
    }

    pub fn from_sentences(sentences: Vec<Sentence>) -> Corpus {
        let mut doc_index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (idx, sentence) in sentences.iter().enumerate() {
            doc_index
                .entry(sentence.doc_id.clone())
                .or_default()
                .push(idx);
        }
        Corpus {
            sentences,
            doc_index,
        }
    }
}

fn parse_tracked(text: &str, origin: &str) -> Result<(Corpus, Vec<Vec<usize>>)> {
    let err = |line: usize, msg: String| Error::Parse {
        origin: origin.to_string(),
        line,
        msg,
    };

    let mut sentences: Vec<Sentence> = Vec::new();
    let mut lines_per_sentence: Vec<Vec<usize>> = Vec::new();
    let mut current: Option<(Sentence, Vec<usize>)> = None;

    let mut flush = |current: &mut Option<(Sentence, Vec<usize>)>| -> Result<()> {
        if let Some((sentence, lines)) = current.take() {
            for (tok_idx, token) in sentence.tokens.iter().enumerate() {
                if let Some(head) = token.dep_head {
                    if head == tok_idx {
                        return Err(err(
                            lines[tok_idx],
                            "dependency head points at the token itself".to_string(),
                        ));
                    }
                    if head >= sentence.tokens.len() {
                        return Err(err(
                            lines[tok_idx],
                            format!(
                                "dependency head {} out of range for a {}-token sentence",
                                head,
                                sentence.tokens.len()
                            ),
                        ));
                    }
                }
            }
            sentences.push(sentence);
            lines_per_sentence.push(lines);
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            flush(&mut current)?;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 9 {
            return Err(err(
                lineno,
                format!("expected 9 tab-separated fields, got {}", fields.len()),
            ));
        }
        let doc_id = fields[0];
        let sent_no: u32 = fields[1]
            .parse()
            .map_err(|_| err(lineno, format!("bad sentence number `{}`", fields[1])))?;
        let tok_no: usize = fields[2]
            .parse()
            .map_err(|_| err(lineno, format!("bad token number `{}`", fields[2])))?;
        if fields[3].is_empty() || fields[4].is_empty() || fields[5].is_empty() {
            return Err(err(
                lineno,
                "wordform, lemma and pos must be non-empty".to_string(),
            ));
        }
        let token = Token {
            wordform: fields[3].to_string(),
            lemma: fields[4].to_string(),
            pos: Pos::parse(fields[5]),
            sense: match fields[6] {
                "-" => None,
                tag => Some(SenseId::new(tag)),
            },
            dep_head: match fields[7] {
                "-" => None,
                n => Some(
                    n.parse()
                        .map_err(|_| err(lineno, format!("bad dependency head `{n}`")))?,
                ),
            },
            dep_label: match fields[8] {
                "-" => None,
                label => Some(label.to_string()),
            },
        };

        match &mut current {
            Some((sentence, lines)) => {
                if sentence.doc_id != doc_id || sentence.sent_no != sent_no {
                    return Err(err(
                        lineno,
                        format!(
                            "sentence changed from {}/{} to {}/{} without a blank line",
                            sentence.doc_id, sentence.sent_no, doc_id, sent_no
                        ),
                    ));
                }
                if tok_no != sentence.tokens.len() {
                    return Err(err(
                        lineno,
                        format!(
                            "token number {} out of order, expected {}",
                            tok_no,
                            sentence.tokens.len()
                        ),
                    ));
                }
                sentence.tokens.push(token);
                lines.push(lineno);
            }
            None => {
                if tok_no != 0 {
                    return Err(err(
                        lineno,
                        format!("sentence must start at token 0, got {tok_no}"),
                    ));
                }
                current = Some((
                    Sentence {
                        doc_id: doc_id.to_string(),
                        sent_no,
                        tokens: vec![token],
                    },
                    vec![lineno],
                ));
            }
        }
    }
    flush(&mut current)?;

    Ok((Corpus::from_sentences(sentences), lines_per_sentence))
}

/// Assignment of every instance to one of `k` folds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldAssignment {
    k: usize,
    fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self, instance_idx: usize) -> usize {
        self.fold_of[instance_idx]
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&i| self.fold_of[i] != fold)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.fold_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fold_of.is_empty()
    }
}

/// Deal instances into `k` folds, stratified by lemma so every fold sees
/// each lemma in proportion. Within a stratum the order is shuffled with
/// a seeded generator and the fold counter carries over from stratum to
/// stratum, so sizes stay balanced overall. Deterministic for a fixed
/// (instances, k, seed).
pub fn make_folds(instances: &[Instance], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::BadFoldCount(k));
    }
    if instances.is_empty() {
        return Err(Error::NoInstances);
    }

    let mut strata: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (idx, instance) in instances.iter().enumerate() {
        strata.entry(&instance.lemma).or_default().push(idx);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; instances.len()];
    let mut offset = 0usize;
    for indices in strata.values() {
        let mut shuffled = indices.clone();
        shuffled.shuffle(&mut rng);
        for (i, &instance_idx) in shuffled.iter().enumerate() {
            fold_of[instance_idx] = (offset + i) % k;
        }
        offset = (offset + shuffled.len()) % k;
    }

    Ok(FoldAssignment { k, fold_of })
}
