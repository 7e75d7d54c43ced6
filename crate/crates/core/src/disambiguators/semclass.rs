//! Coarse-class disambiguation: score each candidate's semantic class by
//! the mutual information of its salient context lemmas, then pick a
//! fine sense inside the winning class at random.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::features::{is_content, sentence_context_lemmas, KnowledgeType};
use crate::lkb::SenseId;

use super::{held_out_positions, instance_seed, Answer, Context, Disambiguator};

/// Sense → coarse class assignment, read from a two-column file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassMap {
    classes: BTreeMap<SenseId, String>,
}

impl ClassMap {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Lines are `sense_id<TAB>class_id`; `#` starts a comment line.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut classes = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 || fields[0].is_empty() || fields[1].is_empty() {
                return Err(Error::Parse {
                    origin: origin.to_string(),
                    line: lineno + 1,
                    msg: "expected sense_id<TAB>class_id".to_string(),
                });
            }
            let sense = SenseId::new(fields[0]);
            if classes.insert(sense, fields[1].to_string()).is_some() {
                return Err(Error::Parse {
                    origin: origin.to_string(),
                    line: lineno + 1,
                    msg: format!("sense {} assigned to two classes", fields[0]),
                });
            }
        }
        Ok(ClassMap { classes })
    }

    pub fn from_map(classes: BTreeMap<SenseId, String>) -> ClassMap {
        ClassMap { classes }
    }

    pub fn class_of(&self, sense: &SenseId) -> Option<&str> {
        self.classes.get(sense).map(|s| s.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SenseId, &str)> {
        self.classes.iter().map(|(s, c)| (s, c.as_str()))
    }
}

/// Per class, the add-smoothed pointwise mutual information
/// ln(P(lemma | class) / P(lemma)) of every lemma seen in the class's
/// contexts. The background P(lemma) comes from the whole corpus, which
/// needs no sense tags; the class-conditional counts come only from
/// tagged anchor occurrences, so evaluation folds can be held out.
pub struct SemClass {
    map: ClassMap,
    weights: BTreeMap<String, BTreeMap<String, f64>>,
}

impl SemClass {
    pub fn new(map: ClassMap) -> Self {
        SemClass {
            map,
            weights: BTreeMap::new(),
        }
    }

    pub fn from_weights(map: ClassMap, weights: BTreeMap<String, BTreeMap<String, f64>>) -> Self {
        SemClass { map, weights }
    }

    pub fn class_map(&self) -> &ClassMap {
        &self.map
    }

    pub fn weights(&self) -> &BTreeMap<String, BTreeMap<String, f64>> {
        &self.weights
    }

    pub fn weight(&self, class: &str, lemma: &str) -> Option<f64> {
        self.weights.get(class).and_then(|w| w.get(lemma)).copied()
    }
}

impl Disambiguator for SemClass {
    fn name(&self) -> String {
        "semclass".to_string()
    }

    fn knowledge_types(&self) -> BTreeSet<KnowledgeType> {
        [KnowledgeType::SituationAssoc, KnowledgeType::TopicAssoc].into()
    }

    fn trainable(&self) -> bool {
        true
    }

    fn train(&mut self, ctx: &Context, train: &[Instance]) -> Result<()> {
        self.weights.clear();

        // Background lemma distribution over the whole corpus.
        let mut background: BTreeMap<&str, usize> = BTreeMap::new();
        let mut background_total = 0usize;
        for sentence in ctx.corpus.sentences() {
            for token in &sentence.tokens {
                if is_content(token, ctx.params) {
                    *background.entry(token.lemma.as_str()).or_insert(0) += 1;
                    background_total += 1;
                }
            }
        }
        let vocabulary = background.len() as f64;

        // Class-conditional context counts from tagged anchors. Anchors
        // sitting on evaluation positions outside the training fold are
        // skipped so test contexts never leak into the model.
        let held_out = held_out_positions(ctx, train);
        let mut per_class: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
        let mut class_totals: BTreeMap<&str, usize> = BTreeMap::new();
        for (sent_idx, sentence) in ctx.corpus.sentences().iter().enumerate() {
            for (tok_idx, token) in sentence.tokens.iter().enumerate() {
                let Some(sense) = &token.sense else { continue };
                if held_out.contains(&(sent_idx, tok_idx)) {
                    continue;
                }
                let Some(class) = self.map.class_of(sense) else {
                    continue;
                };
                for (ctx_idx, ctx_token) in sentence.tokens.iter().enumerate() {
                    if ctx_idx == tok_idx || !is_content(ctx_token, ctx.params) {
                        continue;
                    }
                    *per_class
                        .entry(class)
                        .or_default()
                        .entry(ctx_token.lemma.as_str())
                        .or_insert(0) += 1;
                    *class_totals.entry(class).or_insert(0) += 1;
                }
            }
        }

        let alpha = ctx.params.alpha;
        for (class, lemma_counts) in per_class {
            let class_total = class_totals[class] as f64;
            let mut weights = BTreeMap::new();
            for (lemma, count) in lemma_counts {
                let p_in_class = (count as f64 + alpha) / (class_total + alpha * vocabulary);
                let p_background = (background[lemma] as f64 + alpha)
                    / (background_total as f64 + alpha * vocabulary);
                weights.insert(lemma.to_string(), (p_in_class / p_background).ln());
            }
            self.weights.insert(class.to_string(), weights);
        }
        Ok(())
    }

    fn disambiguate(&self, ctx: &Context, instance: &Instance) -> Answer {
        let senses = ctx.lkb.senses_of(&instance.lemma, &instance.pos);
        // Candidate classes in rank order of their best sense, so a full
        // tie falls back to the rank-1 sense's class.
        let mut candidates: Vec<(&str, Vec<&SenseId>)> = Vec::new();
        for sense in &senses {
            let Some(class) = self.map.class_of(&sense.id) else {
                continue;
            };
            if !self.weights.contains_key(class) {
                continue;
            }
            match candidates.iter_mut().find(|(c, _)| *c == class) {
                Some((_, members)) => members.push(&sense.id),
                None => candidates.push((class, vec![&sense.id])),
            }
        }
        if candidates.is_empty() {
            return Answer::abstain(&self.name(), instance);
        }

        let context = sentence_context_lemmas(ctx.corpus, instance, ctx.params);
        let mut best: Option<(usize, f64)> = None;
        for (idx, (class, _)) in candidates.iter().enumerate() {
            let score: f64 = context
                .iter()
                .filter_map(|lemma| self.weight(class, lemma))
                .sum();
            if best.map(|(_, top)| score > top).unwrap_or(true) {
                best = Some((idx, score));
            }
        }
        let (winner, score) = best.expect("candidates are non-empty");
        let members = &candidates[winner].1;
        let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(ctx.seed, "semclass", instance));
        let chosen = members[rng.random_range(0..members.len())].clone();
        Answer::new(&self.name(), instance, Some(chosen), score)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Params;
    use crate::corpus::{Corpus, TargetSpec};
    use crate::lkb::Lkb;

    const INV: &str = "\
bank\tn\tbank.n.1\t1\tBANK_FIN
bank\tn\tbank.n.2\t2\tBANK_RIVER
bank\tn\tbank.n.3\t3\tBANK_ROW
deposit\tn\tdeposit.n.1\t1\tDEPOSIT
river\tn\triver.n.1\t1\tRIVER
";

    const CLASSES: &str = "\
bank.n.1\tINSTITUTION
bank.n.2\tTERRAIN
bank.n.3\tINSTITUTION
deposit.n.1\tINSTITUTION
river.n.1\tTERRAIN
";

    const TEXT: &str = "\
d\t0\t0\tdeposit\tdeposit\tn\tdeposit.n.1\t-\t-
d\t0\t1\tmoney\tmoney\tn\t-\t-\t-
d\t0\t2\tvault\tvault\tn\t-\t-\t-

d\t1\t0\triver\triver\tn\triver.n.1\t-\t-
d\t1\t1\twater\twater\tn\t-\t-\t-
d\t1\t2\tmud\tmud\tn\t-\t-\t-

d\t2\t0\tbank\tbank\tn\t-\t-\t-
d\t2\t1\tmoney\tmoney\tn\t-\t-\t-
";

    fn setup() -> (Lkb, Corpus, ClassMap) {
        let lkb = Lkb::parse(INV, "", "", "inv", "tax", "gloss").unwrap();
        let corpus = Corpus::parse(TEXT, "doc").unwrap();
        let map = ClassMap::parse(CLASSES, "classes").unwrap();
        (lkb, corpus, map)
    }

    #[test]
    fn class_map_rejects_double_assignment() {
        let err = ClassMap::parse("a.n.1\tX\na.n.1\tY\n", "classes").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn pmi_weights_match_hand_computed_counts() {
        let (lkb, corpus, map) = setup();
        let params = Params::default();
        let targets = TargetSpec::Lemmas([String::from("bank")].into());
        let ctx = Context {
            lkb: &lkb,
            corpus: &corpus,
            params: &params,
            targets: &targets,
            seed: 0,
        };
        let mut model = SemClass::new(map);
        model.train(&ctx, &[]).unwrap();

        // Content lemmas: deposit, money x2, vault, river, water, mud,
        // bank: total 8, vocabulary 7. INSTITUTION contexts: the
        // deposit anchor sees {money, vault}, total 2.
        let alpha = params.alpha;
        let p_in = (1.0 + alpha) / (2.0 + alpha * 7.0);
        let p_bg = (2.0 + alpha) / (8.0 + alpha * 7.0);
        let expected = (p_in / p_bg).ln();
        let got = model.weight("INSTITUTION", "money").unwrap();
        assert!((got - expected).abs() < 1e-12);

        let p_in_mud = (1.0 + alpha) / (2.0 + alpha * 7.0);
        let p_bg_mud = (1.0 + alpha) / (8.0 + alpha * 7.0);
        let expected_mud = (p_in_mud / p_bg_mud).ln();
        let got_mud = model.weight("TERRAIN", "mud").unwrap();
        assert!((got_mud - expected_mud).abs() < 1e-12);

        // Unseen (class, lemma) pairs are not stored.
        assert!(model.weight("INSTITUTION", "mud").is_none());
    }

    fn trained() -> (Lkb, Corpus, SemClass) {
        let (lkb, corpus, map) = setup();
        let params = Params::default();
        let targets = TargetSpec::Lemmas([String::from("bank")].into());
        let ctx = Context {
            lkb: &lkb,
            corpus: &corpus,
            params: &params,
            targets: &targets,
            seed: 0,
        };
        let mut model = SemClass::new(map);
        model.train(&ctx, &[]).unwrap();
        (lkb, corpus, model)
    }

    #[test]
    fn money_context_picks_the_institution_class() {
        let (lkb, corpus, model) = trained();
        let params = Params::default();
        let targets = TargetSpec::Lemmas([String::from("bank")].into());
        let ctx = Context {
            lkb: &lkb,
            corpus: &corpus,
            params: &params,
            targets: &targets,
            seed: 7,
        };
        let probe = &corpus.occurrences(&lkb, &targets)[0];
        let answer = model.disambiguate(&ctx, probe);
        let chosen = answer.chosen.unwrap();
        // Both INSTITUTION senses are eligible; the draw is seeded.
        assert!(chosen.as_str() == "bank.n.1" || chosen.as_str() == "bank.n.3");
        assert!(answer.score > 0.0);
        let again = model.disambiguate(&ctx, probe);
        assert_eq!(again.chosen.unwrap(), chosen);
    }

    #[test]
    fn random_pick_spans_the_winning_class_members() {
        let (lkb, corpus, model) = trained();
        let params = Params::default();
        let targets = TargetSpec::Lemmas([String::from("bank")].into());
        let probe_template = corpus.occurrences(&lkb, &targets)[0].clone();
        let mut seen = BTreeSet::new();
        for seed in 0..64 {
            let ctx = Context {
                lkb: &lkb,
                corpus: &corpus,
                params: &params,
                targets: &targets,
                seed,
            };
            let answer = model.disambiguate(&ctx, &probe_template);
            seen.insert(answer.chosen.unwrap().as_str().to_string());
        }
        assert_eq!(
            seen,
            ["bank.n.1", "bank.n.3"]
                .into_iter()
                .map(String::from)
                .collect()
        );
    }

    #[test]
    fn unmapped_or_unscored_senses_abstain() {
        let (lkb, corpus, map) = setup();
        let params = Params::default();
        let targets = TargetSpec::Lemmas([String::from("bank")].into());
        let ctx = Context {
            lkb: &lkb,
            corpus: &corpus,
            params: &params,
            targets: &targets,
            seed: 0,
        };
        // Untrained model: no class has weights, so nothing is scored.
        let model = SemClass::new(map);
        let probe = &corpus.occurrences(&lkb, &targets)[0];
        assert!(model.disambiguate(&ctx, probe).chosen.is_none());
    }

    #[test]
    fn held_out_anchor_contexts_stay_out_of_the_model() {
        let (lkb, corpus, map) = setup();
        let params = Params::default();
        // Make every tagged token a target, then train on none of them:
        // all anchors are held out and the model ends up empty.
        let targets =
            TargetSpec::Lemmas(["deposit", "river"].into_iter().map(String::from).collect());
        let ctx = Context {
            lkb: &lkb,
            corpus: &corpus,
            params: &params,
            targets: &targets,
            seed: 0,
        };
        let mut model = SemClass::new(map);
        model.train(&ctx, &[]).unwrap();
        assert!(model.weights().is_empty());

        // Training on the deposit instance only admits that anchor.
        let instances = corpus.instances(&lkb, &targets);
        let deposit: Vec<Instance> = instances
            .iter()
            .filter(|i| i.lemma == "deposit")
            .cloned()
            .collect();
        let mut model = SemClass::new(ClassMap::parse(CLASSES, "classes").unwrap());
        model.train(&ctx, &deposit).unwrap();
        assert!(model.weights().contains_key("INSTITUTION"));
        assert!(!model.weights().contains_key("TERRAIN"));
    }
}
