//! Most frequent sense, counted from the training instances.

use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::Instance;
use crate::error::Result;
use crate::features::KnowledgeType;
use crate::lkb::{Pos, SenseId};

use super::{best_sense, Answer, Context, Disambiguator};

/// Majority sense per lemma over the training fold. Lemmas unseen in
/// training fall back to the inventory's rank-1 sense, so the algorithm
/// never abstains on a known lemma. Count ties go to the lower rank.
/// The score is the majority share in training, or 0 for fallbacks.
pub struct Mfs {
    counts: BTreeMap<(String, Pos), BTreeMap<SenseId, usize>>,
}

impl Mfs {
    pub fn new() -> Mfs {
        Mfs {
            counts: BTreeMap::new(),
        }
    }

    pub fn from_counts(counts: BTreeMap<(String, Pos), BTreeMap<SenseId, usize>>) -> Mfs {
        Mfs { counts }
    }

    /// Training counts for one lemma, mostly for inspection in tests.
    pub fn counts_for(&self, lemma: &str, pos: &Pos) -> Option<&BTreeMap<SenseId, usize>> {
        self.counts.get(&(lemma.to_string(), pos.clone()))
    }

    pub fn counts(&self) -> impl Iterator<Item = (&(String, Pos), &BTreeMap<SenseId, usize>)> {
        self.counts.iter()
    }
}

impl Default for Mfs {
    fn default() -> Self {
        Mfs::new()
    }
}

impl Disambiguator for Mfs {
    fn name(&self) -> String {
        "mfs".to_string()
    }

    fn knowledge_types(&self) -> BTreeSet<KnowledgeType> {
        [KnowledgeType::Frequency].into()
    }

    fn trainable(&self) -> bool {
        true
    }

    fn train(&mut self, _ctx: &Context, train: &[Instance]) -> Result<()> {
        self.counts.clear();
        for instance in train {
            let Some(gold) = &instance.gold else { continue };
            *self
                .counts
                .entry((instance.lemma.clone(), instance.pos.clone()))
                .or_default()
                .entry(gold.clone())
                .or_default() += 1;
        }
        Ok(())
    }

    fn disambiguate(&self, ctx: &Context, instance: &Instance) -> Answer {
        let senses = ctx.lkb.senses_of(&instance.lemma, &instance.pos);
        if senses.is_empty() {
            return Answer::abstain(&self.name(), instance);
        }
        match self
            .counts
            .get(&(instance.lemma.clone(), instance.pos.clone()))
        {
            Some(counts) => {
                let total: usize = counts.values().sum();
                let (sense, count) =
                    best_sense(&senses, |s| counts.get(&s.id).copied().unwrap_or(0) as f64)
                        .expect("candidate list is non-empty");
                Answer::new(
                    &self.name(),
                    instance,
                    Some(sense.id.clone()),
                    count / total.max(1) as f64,
                )
            }
            None => Answer::new(&self.name(), instance, Some(senses[0].id.clone()), 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Params;
    use crate::corpus::{Corpus, TargetSpec};
    use crate::lkb::Lkb;

    fn lkb() -> Lkb {
        let inv = "\
bank\tn\tbank.n.1\t1\tA
bank\tn\tbank.n.2\t2\tB
bank\tn\tbank.n.3\t3\tC
";
        Lkb::parse(inv, "", "", "inv", "tax", "gloss").unwrap()
    }

    fn corpus_with(tags: &[&str]) -> Corpus {
        let mut text = String::new();
        for (i, tag) in tags.iter().enumerate() {
            text.push_str(&format!("d\t{i}\t0\tbank\tbank\tn\t{tag}\t-\t-\n\n"));
        }
        Corpus::parse(&text, "doc").unwrap()
    }

    #[test]
    fn majority_wins_and_score_is_its_share() {
        let lkb = lkb();
        let corpus = corpus_with(&["bank.n.2", "bank.n.2", "bank.n.2", "bank.n.1"]);
        let params = Params::default();
        let targets = TargetSpec::AllPolysemousNouns;
        let ctx = Context {
            lkb: &lkb,
            corpus: &corpus,
            params: &params,
            targets: &targets,
            seed: 0,
        };
        let instances = corpus.instances(&lkb, &targets);
        let mut algo = Mfs::new();
        algo.train(&ctx, &instances).unwrap();
        let answer = algo.disambiguate(&ctx, &instances[0]);
        assert_eq!(answer.chosen.unwrap().as_str(), "bank.n.2");
        assert!((answer.score - 0.75).abs() < 1e-12);
    }

    #[test]
    fn count_tie_goes_to_the_lower_rank() {
        let lkb = lkb();
        let corpus = corpus_with(&["bank.n.3", "bank.n.2", "bank.n.2", "bank.n.3"]);
        let params = Params::default();
        let targets = TargetSpec::AllPolysemousNouns;
        let ctx = Context {
            lkb: &lkb,
            corpus: &corpus,
            params: &params,
            targets: &targets,
            seed: 0,
        };
        let instances = corpus.instances(&lkb, &targets);
        let mut algo = Mfs::new();
        algo.train(&ctx, &instances).unwrap();
        let answer = algo.disambiguate(&ctx, &instances[0]);
        assert_eq!(answer.chosen.unwrap().as_str(), "bank.n.2");
    }

    #[test]
    fn unseen_lemma_falls_back_to_rank_one() {
        let lkb = lkb();
        let corpus = corpus_with(&["bank.n.2"]);
        let params = Params::default();
        let targets = TargetSpec::AllPolysemousNouns;
        let ctx = Context {
            lkb: &lkb,
            corpus: &corpus,
            params: &params,
            targets: &targets,
            seed: 0,
        };
        let instances = corpus.instances(&lkb, &targets);
        let algo = Mfs::new(); // untrained: nothing seen
        let answer = algo.disambiguate(&ctx, &instances[0]);
        assert_eq!(answer.chosen.unwrap().as_str(), "bank.n.1");
        assert_eq!(answer.score, 0.0);
    }
}
