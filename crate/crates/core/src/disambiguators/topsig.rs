//! Topic signatures: per-sense lists of context lemmas ranked by the
//! chi-square association between lemma presence and sense, built from
//! per-sense document collections.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::config::Params;
use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::features::{sentence_context_lemmas, KnowledgeType};
use crate::lkb::{Lkb, Pos, SenseId};

use super::{best_sense, Answer, Context, Disambiguator};

/// Pre-lemmatized document collections, one per sense. On disk: one
/// directory per sense id, one file per document, whitespace-separated
/// lemmas. Each document is a lemma set; multiplicity inside a document
/// does not matter to a presence/absence statistic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Collections {
    by_sense: BTreeMap<SenseId, Vec<BTreeSet<String>>>,
}

impl Collections {
    pub fn load(dir: &Path) -> Result<Self> {
        let mut by_sense = BTreeMap::new();
        let mut sense_dirs: Vec<_> = std::fs::read_dir(dir)?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .filter(|e| e.path().is_dir())
            .collect();
        sense_dirs.sort_by_key(|e| e.file_name());
        for sense_dir in sense_dirs {
            let sense = SenseId::new(sense_dir.file_name().to_string_lossy().as_ref());
            let mut files: Vec<_> = std::fs::read_dir(sense_dir.path())?
                .collect::<std::io::Result<Vec<_>>>()?
                .into_iter()
                .filter(|e| e.path().is_file())
                .collect();
            files.sort_by_key(|e| e.file_name());
            let mut docs = Vec::with_capacity(files.len());
            for file in files {
                let text = std::fs::read_to_string(file.path())?;
                docs.push(text.split_whitespace().map(str::to_string).collect());
            }
            by_sense.insert(sense, docs);
        }
        Ok(Collections { by_sense })
    }

    pub fn from_map(by_sense: BTreeMap<SenseId, Vec<BTreeSet<String>>>) -> Self {
        Collections { by_sense }
    }

    pub fn senses(&self) -> impl Iterator<Item = &SenseId> {
        self.by_sense.keys()
    }

    pub fn docs(&self, sense: &SenseId) -> Option<&[BTreeSet<String>]> {
        self.by_sense.get(sense).map(|d| d.as_slice())
    }

    pub fn is_empty(&self) -> bool {
        self.by_sense.is_empty()
    }
}

/// Chi-square statistic of the 2x2 table [[a, b], [c, d]] without
/// continuity correction. Tables with a zero row or column margin carry
/// no association and score 0.
pub fn chi2(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let (a, b, c, d) = (a as f64, b as f64, c as f64, d as f64);
    let n = a + b + c + d;
    let margins = (a + b) * (c + d) * (a + c) * (b + d);
    if margins == 0.0 {
        return 0.0;
    }
    n * (a * d - b * c).powi(2) / margins
}

/// One sense's signature: lemmas sorted by weight descending, lemma
/// ascending on ties, truncated to the configured size.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    pub entries: Vec<(String, f64)>,
}

impl Signature {
    pub fn weight(&self, lemma: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(l, _)| l == lemma)
            .map(|(_, w)| *w)
    }
}

/// Signature-based disambiguator. For each candidate sense, the score is
/// the sum of its signature weights over the lemmas present in the
/// instance's sentence; an all-zero score abstains.
pub struct TopSig {
    signatures: BTreeMap<SenseId, Signature>,
}

impl TopSig {
    /// Every sense in the collections must be known to the LKB, have at
    /// least one document, and share its (lemma, pos) with at least one
    /// other collected sense; the contrast set for a sense is the pooled
    /// documents of its (lemma, pos) rivals.
    pub fn build(collections: &Collections, lkb: &Lkb, params: &Params) -> Result<TopSig> {
        let mut groups: BTreeMap<(String, Pos), Vec<&SenseId>> = BTreeMap::new();
        for sense_id in collections.senses() {
            let sense = lkb.sense(sense_id).ok_or_else(|| {
                Error::Config(format!(
                    "collection sense {} is not in the inventory",
                    sense_id
                ))
            })?;
            if collections.docs(sense_id).unwrap().is_empty() {
                return Err(Error::EmptySenseCollection(sense_id.as_str().to_string()));
            }
            groups
                .entry((sense.lemma.clone(), sense.pos.clone()))
                .or_default()
                .push(sense_id);
        }

        let mut signatures = BTreeMap::new();
        for ((lemma, _), sense_ids) in &groups {
            if sense_ids.len() < 2 {
                return Err(Error::TooFewSenseCollections {
                    lemma: lemma.clone(),
                    found: sense_ids.len(),
                });
            }
            for sense_id in sense_ids {
                let own = collections.docs(sense_id).unwrap();
                let rest: Vec<&BTreeSet<String>> = sense_ids
                    .iter()
                    .filter(|other| **other != *sense_id)
                    .flat_map(|other| collections.docs(other).unwrap())
                    .collect();
                signatures.insert(
                    (*sense_id).clone(),
                    signature_for(own, &rest, params.signature_k),
                );
            }
        }
        Ok(TopSig { signatures })
    }

    pub fn from_signatures(signatures: BTreeMap<SenseId, Signature>) -> TopSig {
        TopSig { signatures }
    }

    pub fn signature(&self, sense: &SenseId) -> Option<&Signature> {
        self.signatures.get(sense)
    }

    pub fn signatures(&self) -> impl Iterator<Item = (&SenseId, &Signature)> {
        self.signatures.iter()
    }

    /// The (lemma, pos) pairs covered by at least one signature. These
    /// are the targets the bootstrap tagger knows how to answer.
    pub fn covered(&self, lkb: &Lkb) -> BTreeSet<(String, Pos)> {
        self.signatures
            .keys()
            .filter_map(|id| lkb.sense(id))
            .map(|sense| (sense.lemma.clone(), sense.pos.clone()))
            .collect()
    }
}

/// Signature of one sense against its pooled rivals. For each lemma in
/// any group document, the 2x2 table counts documents by (own vs rival)
/// x (contains vs not); only lemmas over-represented in the sense's own
/// documents qualify.
fn signature_for(own: &[BTreeSet<String>], rest: &[&BTreeSet<String>], k: usize) -> Signature {
    let mut lemmas: BTreeSet<&str> = BTreeSet::new();
    for doc in own {
        lemmas.extend(doc.iter().map(String::as_str));
    }
    for doc in rest {
        lemmas.extend(doc.iter().map(String::as_str));
    }

    let mut entries: Vec<(String, f64)> = Vec::new();
    for lemma in lemmas {
        let a = own.iter().filter(|d| d.contains(lemma)).count();
        let b = rest.iter().filter(|d| d.contains(lemma)).count();
        let c = own.len() - a;
        let d = rest.len() - b;
        if a * (b + d) <= b * (a + c) {
            continue;
        }
        let weight = chi2(a, b, c, d);
        if weight > 0.0 {
            entries.push((lemma.to_string(), weight));
        }
    }
    entries.sort_by(|x, y| {
        y.1.partial_cmp(&x.1)
            .expect("chi2 is finite")
            .then_with(|| x.0.cmp(&y.0))
    });
    entries.truncate(k);
    Signature { entries }
}

impl Disambiguator for TopSig {
    fn name(&self) -> String {
        "topsig".to_string()
    }

    fn knowledge_types(&self) -> BTreeSet<KnowledgeType> {
        [KnowledgeType::SituationAssoc, KnowledgeType::TopicAssoc].into()
    }

    fn disambiguate(&self, ctx: &Context, instance: &Instance) -> Answer {
        let candidates = ctx.lkb.senses_of(&instance.lemma, &instance.pos);
        if candidates.is_empty() {
            return Answer::abstain(&self.name(), instance);
        }
        let present: BTreeSet<String> = sentence_context_lemmas(ctx.corpus, instance, ctx.params)
            .into_iter()
            .collect();
        let scored = best_sense(&candidates, |sense| {
            self.signature(&sense.id)
                .map(|sig| {
                    sig.entries
                        .iter()
                        .filter(|(lemma, _)| present.contains(lemma))
                        .map(|(_, w)| *w)
                        .sum()
                })
                .unwrap_or(0.0)
        });
        match scored {
            Some((sense, score)) if score > 0.0 => {
                Answer::new(&self.name(), instance, Some(sense.id.clone()), score)
            }
            _ => Answer::abstain(&self.name(), instance),
        }
    }
}
