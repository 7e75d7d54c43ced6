//! Bootstrapping: auto-tag a raw corpus with the topic-signature
//! disambiguator, then train decision lists on the result as if it were
//! hand-tagged.

use std::collections::BTreeSet;

use crate::config::Params;
use crate::corpus::{Corpus, Instance, TargetSpec};
use crate::error::Result;
use crate::features::{ExtractorSet, KnowledgeType};
use crate::lkb::Lkb;

use super::topsig::{Collections, TopSig};
use super::{Answer, Context, Disambiguator, DlClassifier};

/// Tag every occurrence of a signature-covered (lemma, pos) in `raw`
/// with the signature disambiguator's answer; abstentions leave the
/// token untagged. Other tokens pass through untouched. Returns the
/// tagged corpus plus (tagged, total) occurrence counts.
pub fn bootstrap_corpus(
    topsig: &TopSig,
    lkb: &Lkb,
    raw: &Corpus,
    params: &Params,
) -> (Corpus, usize, usize) {
    let covered = topsig.covered(lkb);
    let target_lemmas: BTreeSet<String> = covered.iter().map(|(lemma, _)| lemma.clone()).collect();
    let targets = TargetSpec::Lemmas(target_lemmas);
    let ctx = Context {
        lkb,
        corpus: raw,
        params,
        targets: &targets,
        seed: 0,
    };

    let mut sentences = raw.sentences().to_vec();
    let mut tagged = 0usize;
    let mut total = 0usize;
    for (sent_idx, sentence) in sentences.iter_mut().enumerate() {
        for (tok_idx, token) in sentence.tokens.iter_mut().enumerate() {
            if !covered.contains(&(token.lemma.clone(), token.pos.clone())) {
                continue;
            }
            total += 1;
            let occurrence = Instance {
                doc_id: sentence.doc_id.clone(),
                sent_idx,
                sent_no: sentence.sent_no,
                tok_idx,
                lemma: token.lemma.clone(),
                pos: token.pos.clone(),
                gold: None,
            };
            let answer = topsig.disambiguate(&ctx, &occurrence);
            if answer.chosen.is_some() {
                tagged += 1;
            }
            token.sense = answer.chosen;
        }
    }
    (Corpus::from_sentences(sentences), tagged, total)
}

/// Decision lists trained on a signature-bootstrapped corpus instead of
/// a hand-tagged one. Building runs the whole pipeline: signatures from
/// the collections, auto-tagging of the raw corpus, then list training
/// over the auto-tagged instances.
pub struct BootstrapDl {
    set: ExtractorSet,
    classifier: DlClassifier,
    tagged: usize,
    total: usize,
}

impl BootstrapDl {
    pub fn build(
        collections: &Collections,
        raw: &Corpus,
        set: ExtractorSet,
        lkb: &Lkb,
        params: &Params,
    ) -> Result<BootstrapDl> {
        let topsig = TopSig::build(collections, lkb, params)?;
        let (tagged_corpus, tagged, total) = bootstrap_corpus(&topsig, lkb, raw, params);
        let target_lemmas: BTreeSet<String> = topsig
            .covered(lkb)
            .into_iter()
            .map(|(lemma, _)| lemma)
            .collect();
        let targets = TargetSpec::Lemmas(target_lemmas);
        let train_ctx = Context {
            lkb,
            corpus: &tagged_corpus,
            params,
            targets: &targets,
            seed: 0,
        };
        let train = tagged_corpus.instances(lkb, &targets);
        let mut classifier = DlClassifier::new(set);
        classifier.train(&train_ctx, &train)?;
        Ok(BootstrapDl {
            set,
            classifier,
            tagged,
            total,
        })
    }

    pub fn classifier(&self) -> &DlClassifier {
        &self.classifier
    }

    /// (auto-tagged, total) target occurrences seen while bootstrapping.
    pub fn tagging_counts(&self) -> (usize, usize) {
        (self.tagged, self.total)
    }
}

impl Disambiguator for BootstrapDl {
    fn name(&self) -> String {
        format!("bootstrap_dl:{}", self.set.as_str())
    }

    /// The lists themselves carry the extractor set's knowledge, but the
    /// labels came from signatures, so their knowledge types ride along.
    fn knowledge_types(&self) -> BTreeSet<KnowledgeType> {
        let mut types = self.set.knowledge_types();
        types.insert(KnowledgeType::TaxonomicAssoc);
        types.insert(KnowledgeType::SituationAssoc);
        types.insert(KnowledgeType::TopicAssoc);
        types
    }

    fn disambiguate(&self, ctx: &Context, instance: &Instance) -> Answer {
        let mut answer = self.classifier.disambiguate(ctx, instance);
        answer.algorithm = self.name();
        answer
    }
}
