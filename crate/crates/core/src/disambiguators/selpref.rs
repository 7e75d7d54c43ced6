//! Selectional preferences: probability distributions over taxonomy
//! classes for the subject and object slots of each verb, learned from
//! sense-tagged dependencies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::features::KnowledgeType;
use crate::lkb::{Pos, SynsetId};

use super::{best_sense, held_out_positions, Answer, Context, Disambiguator};

/// Grammatical slot of a noun relative to its verb head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rel {
    Subject,
    Object,
}

impl Rel {
    pub fn parse(s: &str) -> Result<Rel> {
        match s {
            "subject" => Ok(Rel::Subject),
            "object" => Ok(Rel::Object),
            other => Err(Error::Config(format!("unknown relation {other}"))),
        }
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Subject => "subject",
            Rel::Object => "object",
        })
    }
}

/// P(class | verb, relation) over the classes seen in training. A tagged
/// noun occurrence spreads one count uniformly over its sense's synset
/// and every hypernym, so generalization strength grows up the taxonomy
/// while each occurrence still contributes exactly one count in total.
pub struct SelPref {
    distributions: BTreeMap<(String, Rel), BTreeMap<SynsetId, f64>>,
}

impl SelPref {
    pub fn new() -> SelPref {
        SelPref {
            distributions: BTreeMap::new(),
        }
    }

    pub fn from_distributions(
        distributions: BTreeMap<(String, Rel), BTreeMap<SynsetId, f64>>,
    ) -> SelPref {
        SelPref { distributions }
    }

    pub fn distributions(
        &self,
    ) -> impl Iterator<Item = (&(String, Rel), &BTreeMap<SynsetId, f64>)> {
        self.distributions.iter()
    }

    pub fn distribution(&self, verb: &str, rel: Rel) -> Option<&BTreeMap<SynsetId, f64>> {
        self.distributions.get(&(verb.to_string(), rel))
    }

    /// The verb governing `instance` through a subject or object arc,
    /// or None when the instance fills neither slot.
    fn governing_verb<'a>(ctx: &Context<'a>, instance: &Instance) -> Option<(&'a str, Rel)> {
        let sentence = &ctx.corpus.sentences()[instance.sent_idx];
        let token = &sentence.tokens[instance.tok_idx];
        let head_idx = token.dep_head?;
        let label = token.dep_label.as_deref()?;
        let rel = if ctx.params.is_subject_label(label) {
            Rel::Subject
        } else if ctx.params.is_object_label(label) {
            Rel::Object
        } else {
            return None;
        };
        let head = &sentence.tokens[head_idx];
        (head.pos == Pos::Verb).then_some((head.lemma.as_str(), rel))
    }
}

impl Default for SelPref {
    fn default() -> Self {
        SelPref::new()
    }
}

impl Disambiguator for SelPref {
    fn name(&self) -> String {
        "selpref".to_string()
    }

    fn knowledge_types(&self) -> BTreeSet<KnowledgeType> {
        [KnowledgeType::SelectionalPref].into()
    }

    fn trainable(&self) -> bool {
        true
    }

    fn train(&mut self, ctx: &Context, train: &[Instance]) -> Result<()> {
        self.distributions.clear();
        let held_out = held_out_positions(ctx, train);

        let mut counts: BTreeMap<(String, Rel), BTreeMap<SynsetId, f64>> = BTreeMap::new();
        for (sent_idx, sentence) in ctx.corpus.sentences().iter().enumerate() {
            for (tok_idx, token) in sentence.tokens.iter().enumerate() {
                if token.pos != Pos::Noun || held_out.contains(&(sent_idx, tok_idx)) {
                    continue;
                }
                let Some(sense_id) = &token.sense else {
                    continue;
                };
                let Some(sense) = ctx.lkb.sense(sense_id) else {
                    continue;
                };
                let (Some(head_idx), Some(label)) = (token.dep_head, token.dep_label.as_deref())
                else {
                    continue;
                };
                let rel = if ctx.params.is_subject_label(label) {
                    Rel::Subject
                } else if ctx.params.is_object_label(label) {
                    Rel::Object
                } else {
                    continue;
                };
                let head = &sentence.tokens[head_idx];
                if head.pos != Pos::Verb {
                    continue;
                }
                let mut classes = ctx.lkb.hypernym_closure(&sense.synset)?;
                classes.insert(sense.synset.clone());
                let share = 1.0 / classes.len() as f64;
                let slot = counts.entry((head.lemma.clone(), rel)).or_default();
                for class in classes {
                    *slot.entry(class).or_insert(0.0) += share;
                }
            }
        }

        let alpha = ctx.params.alpha;
        for (key, class_counts) in counts {
            let total: f64 = class_counts.values().sum();
            let support = class_counts.len() as f64;
            let denom = total + alpha * support;
            let distribution = class_counts
                .into_iter()
                .map(|(class, count)| (class, (count + alpha) / denom))
                .collect();
            self.distributions.insert(key, distribution);
        }
        Ok(())
    }

    fn disambiguate(&self, ctx: &Context, instance: &Instance) -> Answer {
        let Some((verb, rel)) = Self::governing_verb(ctx, instance) else {
            return Answer::abstain(&self.name(), instance);
        };
        let Some(distribution) = self.distribution(verb, rel) else {
            return Answer::abstain(&self.name(), instance);
        };
        let candidates = ctx.lkb.senses_of(&instance.lemma, &instance.pos);
        if candidates.is_empty() {
            return Answer::abstain(&self.name(), instance);
        }
        let scored = best_sense(&candidates, |sense| {
            let mut classes = ctx
                .lkb
                .hypernym_closure(&sense.synset)
                .expect("candidate synsets come from the loaded inventory");
            classes.insert(sense.synset.clone());
            classes
                .iter()
                .filter_map(|class| distribution.get(class))
                .fold(0.0, |acc: f64, p| acc.max(*p))
        });
        match scored {
            Some((sense, score)) => {
                Answer::new(&self.name(), instance, Some(sense.id.clone()), score)
            }
            None => Answer::abstain(&self.name(), instance),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Params;
    use crate::corpus::{Corpus, TargetSpec};
    use crate::lkb::Lkb;

    const INV: &str = "\
man\tn\tman.n.1\t1\tMAN
dog\tn\tdog.n.1\t1\tDOG
child\tn\tchild.n.1\t1\tCHILD_PERSON
child\tn\tchild.n.2\t2\tCHILD_NODE
rock\tn\trock.n.1\t1\tROCK
";

    // A forest, not a single-rooted tree: with one shared root every
    // training count also feeds the root, the root ends up with the
    // maximum probability, and every sense that reaches it ties there.
    // Separate roots keep the preference comparison meaningful.
    const TAX: &str = "\
MAN\tPERSON
CHILD_PERSON\tPERSON
DOG\tANIMAL
CHILD_NODE\tDATUM
ROCK\tSTUFF
";

    const TEXT: &str = "\
d\t0\t0\tman\tman\tn\tman.n.1\t1\tsubj
d\t0\t1\teats\teat\tv\t-\t-\t-

d\t1\t0\tdog\tdog\tn\tdog.n.1\t1\tsubj
d\t1\t1\teats\teat\tv\t-\t-\t-

d\t2\t0\tman\tman\tn\tman.n.1\t1\tsubj
d\t2\t1\tthrows\tthrow\tv\t-\t-\t-
d\t2\t2\trock\trock\tn\trock.n.1\t1\tobj

d\t3\t0\tman\tman\tn\tman.n.1\t1\tsubj
d\t3\t1\teats\teat\tv\t-\t-\t-
";

    fn setup() -> (Lkb, Corpus) {
        let lkb = Lkb::parse(INV, TAX, "", "inv", "tax", "gloss").unwrap();
        let corpus = Corpus::parse(TEXT, "doc").unwrap();
        (lkb, corpus)
    }

    fn train_on(lkb: &Lkb, corpus: &Corpus, params: &Params) -> SelPref {
        let targets = TargetSpec::Lemmas([String::from("child")].into());
        let ctx = Context {
            lkb,
            corpus,
            params,
            targets: &targets,
            seed: 0,
        };
        let mut model = SelPref::new();
        model.train(&ctx, &[]).unwrap();
        model
    }

    #[test]
    fn fractional_counts_match_the_hand_tally() {
        let (lkb, corpus) = setup();
        let params = Params::default();
        let model = train_on(&lkb, &corpus, &params);

        // eat/subject sees man.n.1 twice (classes MAN, PERSON) and
        // dog.n.1 once (classes DOG, ANIMAL), 1/2 per class per
        // occurrence: MAN 1, PERSON 1, DOG 1/2, ANIMAL 1/2. Support 4
        // classes, total 3.
        let dist = model.distribution("eat", Rel::Subject).unwrap();
        let alpha = params.alpha;
        let denom = 3.0 + alpha * 4.0;
        assert!((dist[&SynsetId::new("PERSON")] - (1.0 + alpha) / denom).abs() < 1e-12);
        assert!((dist[&SynsetId::new("MAN")] - (1.0 + alpha) / denom).abs() < 1e-12);
        assert!((dist[&SynsetId::new("DOG")] - (0.5 + alpha) / denom).abs() < 1e-12);
        assert!((dist[&SynsetId::new("ANIMAL")] - (0.5 + alpha) / denom).abs() < 1e-12);
        assert_eq!(dist.len(), 4);

        // throw/object sees only rock.n.1 (classes ROCK, STUFF).
        let dist = model.distribution("throw", Rel::Object).unwrap();
        assert_eq!(dist.len(), 2);
        assert!((dist[&SynsetId::new("ROCK")] - 0.5).abs() < 1e-12);
        assert!(model.distribution("throw", Rel::Subject).is_some());
        assert!(model.distribution("eat", Rel::Object).is_none());
    }

    #[test]
    fn distributions_sum_to_one() {
        let (lkb, corpus) = setup();
        let model = train_on(&lkb, &corpus, &Params::default());
        let mut seen = 0;
        for (_, dist) in model.distributions() {
            let sum: f64 = dist.values().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            seen += 1;
        }
        assert_eq!(seen, 3);
    }

    fn probe(lkb: &Lkb, params: &Params, model: &SelPref, text: &str) -> Answer {
        let probe_corpus = Corpus::parse(text, "probe").unwrap();
        let targets = TargetSpec::AllPolysemousNouns;
        let ctx = Context {
            lkb,
            corpus: &probe_corpus,
            params,
            targets: &targets,
            seed: 0,
        };
        let instance = &probe_corpus.occurrences(lkb, &targets)[0];
        model.disambiguate(&ctx, instance)
    }

    #[test]
    fn verb_preference_picks_the_person_sense() {
        let (lkb, corpus) = setup();
        let params = Params::default();
        let model = train_on(&lkb, &corpus, &params);
        // child.n.1 reaches PERSON, which eat's subject slot has seen;
        // child.n.2 reaches only DATUM, which it has not. The person
        // sense wins on probability, not on a tie-break.
        let answer = probe(
            &lkb,
            &params,
            &model,
            "p\t0\t0\tchild\tchild\tn\t-\t1\tsubj\np\t0\t1\teats\teat\tv\t-\t-\t-\n",
        );
        assert_eq!(answer.chosen.unwrap().as_str(), "child.n.1");
        let expected = (1.0 + params.alpha) / (3.0 + params.alpha * 4.0);
        assert!((answer.score - expected).abs() < 1e-12);
    }

    #[test]
    fn ungoverned_nouns_and_unseen_verbs_abstain() {
        let (lkb, corpus) = setup();
        let params = Params::default();
        let model = train_on(&lkb, &corpus, &params);
        // No dependency arc.
        let bare = probe(&lkb, &params, &model, "p\t0\t0\tchild\tchild\tn\t-\t-\t-\n");
        assert!(bare.chosen.is_none());
        // Subject of a verb never seen in training.
        let unseen = probe(
            &lkb,
            &params,
            &model,
            "p\t0\t0\tchild\tchild\tn\t-\t1\tsubj\np\t0\t1\tsings\tsing\tv\t-\t-\t-\n",
        );
        assert!(unseen.chosen.is_none());
        // Object slot of eat was never trained either.
        let wrong_slot = probe(
            &lkb,
            &params,
            &model,
            "p\t0\t0\tchild\tchild\tn\t-\t1\tobj\np\t0\t1\teats\teat\tv\t-\t-\t-\n",
        );
        assert!(wrong_slot.chosen.is_none());
    }

    #[test]
    fn held_out_occurrences_do_not_train() {
        let (lkb, corpus) = setup();
        let params = Params::default();
        // Every man/dog/rock occurrence becomes a target instance; with
        // an empty training fold they are all held out.
        let targets = TargetSpec::Lemmas(
            ["man", "dog", "rock"]
                .into_iter()
                .map(String::from)
                .collect(),
        );
        let ctx = Context {
            lkb: &lkb,
            corpus: &corpus,
            params: &params,
            targets: &targets,
            seed: 0,
        };
        let mut model = SelPref::new();
        model.train(&ctx, &[]).unwrap();
        assert_eq!(model.distributions().count(), 0);

        // Training on just the dog instance admits only that anchor.
        let instances = corpus.instances(&lkb, &targets);
        let dog: Vec<Instance> = instances
            .iter()
            .filter(|i| i.lemma == "dog")
            .cloned()
            .collect();
        let mut model = SelPref::new();
        model.train(&ctx, &dog).unwrap();
        let dist = model.distribution("eat", Rel::Subject).unwrap();
        assert!(dist.contains_key(&SynsetId::new("DOG")));
        assert!(!dist.contains_key(&SynsetId::new("PERSON")));
        assert!(model.distribution("throw", Rel::Object).is_none());
    }
}
