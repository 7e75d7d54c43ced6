//! Gloss overlap: score each sense by how many of its definition words
//! appear around the target.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::Instance;
use crate::features::{sentence_context_lemmas, KnowledgeType};

use super::{best_sense, Answer, Context, Disambiguator};

/// Counts the multiset intersection between a sense's gloss lemmas and
/// the content lemmas of the target's sentence, and answers the argmax.
/// An all-zero tie still answers (the rank-1 sense), so coverage is 1 on
/// known lemmas.
pub struct Overlap;

fn counts(words: impl IntoIterator<Item = String>) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for w in words {
        *out.entry(w).or_default() += 1;
    }
    out
}

fn multiset_intersection(a: &BTreeMap<String, usize>, b: &BTreeMap<String, usize>) -> usize {
    a.iter()
        .map(|(word, &n)| n.min(b.get(word).copied().unwrap_or(0)))
        .sum()
}

impl Disambiguator for Overlap {
    fn name(&self) -> String {
        "overlap".to_string()
    }

    fn knowledge_types(&self) -> BTreeSet<KnowledgeType> {
        [
            KnowledgeType::TaxonomicAssoc,
            KnowledgeType::SituationAssoc,
            KnowledgeType::TopicAssoc,
            KnowledgeType::ArgHead,
        ]
        .into()
    }

    fn disambiguate(&self, ctx: &Context, instance: &Instance) -> Answer {
        let senses = ctx.lkb.senses_of(&instance.lemma, &instance.pos);
        if senses.is_empty() {
            return Answer::abstain(&self.name(), instance);
        }
        let context = counts(sentence_context_lemmas(ctx.corpus, instance, ctx.params));
        let (sense, score) = best_sense(&senses, |s| {
            let gloss = ctx
                .lkb
                .synset(&s.synset)
                .map(|syn| counts(syn.gloss.iter().cloned()))
                .unwrap_or_default();
            multiset_intersection(&gloss, &context) as f64
        })
        .expect("candidate list is non-empty");
        Answer::new(&self.name(), instance, Some(sense.id.clone()), score)
    }
}
