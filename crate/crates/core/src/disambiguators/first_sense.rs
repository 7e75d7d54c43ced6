//! The dictionary's first sense, read straight off the inventory ranks.

use std::collections::BTreeSet;

use crate::corpus::Instance;
use crate::features::KnowledgeType;

use super::{Answer, Context, Disambiguator};

/// Answers the rank-1 sense of the lemma. The ranks encode frequency,
/// so this needs no training and never abstains on a known lemma.
pub struct FirstSense;

impl Disambiguator for FirstSense {
    fn name(&self) -> String {
        "first_sense".to_string()
    }

    fn knowledge_types(&self) -> BTreeSet<KnowledgeType> {
        [KnowledgeType::Frequency].into()
    }

    fn disambiguate(&self, ctx: &Context, instance: &Instance) -> Answer {
        match ctx.lkb.first_sense(&instance.lemma, &instance.pos) {
            Some(sense) => Answer::new(&self.name(), instance, Some(sense.id.clone()), 1.0),
            None => Answer::abstain(&self.name(), instance),
        }
    }
}
