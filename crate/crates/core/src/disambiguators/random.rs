//! Uniform random choice among the candidate senses: the floor any real
//! algorithm has to beat.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Instance;
use crate::features::KnowledgeType;

use super::{instance_seed, Answer, Context, Disambiguator};

/// Picks uniformly among the instance's senses, seeded per instance so
/// that a run is reproducible while instances stay independent of each
/// other and of evaluation order. Never abstains on a known lemma.
/// The reported score is the uniform probability 1/n.
pub struct Random;

impl Disambiguator for Random {
    fn name(&self) -> String {
        "random".to_string()
    }

    fn knowledge_types(&self) -> BTreeSet<KnowledgeType> {
        BTreeSet::new()
    }

    fn disambiguate(&self, ctx: &Context, instance: &Instance) -> Answer {
        let senses = ctx.lkb.senses_of(&instance.lemma, &instance.pos);
        if senses.is_empty() {
            return Answer::abstain(&self.name(), instance);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(instance_seed(ctx.seed, "random", instance));
        let pick = rng.random_range(0..senses.len());
        Answer::new(
            &self.name(),
            instance,
            Some(senses[pick].id.clone()),
            1.0 / senses.len() as f64,
        )
    }
}
