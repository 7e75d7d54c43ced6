//! Decision lists: ordered feature rules scored by smoothed log-odds,
//! one list per (lemma, pos), first applicable entry wins.

use std::collections::{BTreeMap, BTreeSet};

use crate::config::Params;
use crate::corpus::Instance;
use crate::error::Result;
use crate::features::{ExtractorSet, FeatureKind, FeatureVector, KnowledgeType};
use crate::lkb::{Pos, SenseId};

use super::{Answer, Context, Disambiguator};

/// One rule: when the feature (kind, value) appears in an instance's
/// vector, answer `sense` with confidence `weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct DlEntry {
    pub kind: FeatureKind,
    pub value: String,
    pub sense: SenseId,
    pub weight: f64,
}

/// Trained list for one (lemma, pos). Entries are sorted by weight
/// descending; ties fall back to candidate rank, then feature kind and
/// value, so retraining reproduces the file byte for byte.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionListModel {
    pub lemma: String,
    pub pos: Pos,
    pub entries: Vec<DlEntry>,
    pub default: Option<SenseId>,
}

impl DecisionListModel {
    /// Train from already-extracted vectors. `candidates` must list the
    /// sense inventory for the lemma in rank order; it supplies n for
    /// the smoothing denominator and the tie-break order. Features are
    /// counted once per instance regardless of multiplicity. With fewer
    /// than two candidates the one-vs-rest odds are undefined and the
    /// list stays empty.
    pub fn from_labeled_vectors(
        lemma: &str,
        pos: &Pos,
        labeled: &[(FeatureVector, SenseId)],
        candidates: &[SenseId],
        params: &Params,
    ) -> Self {
        let mut entries = Vec::new();
        if candidates.len() >= 2 {
            let rank_of: BTreeMap<&SenseId, usize> =
                candidates.iter().enumerate().map(|(i, s)| (s, i)).collect();
            let mut per_sense: BTreeMap<(&FeatureKind, &str), BTreeMap<&SenseId, usize>> =
                BTreeMap::new();
            let mut totals: BTreeMap<(&FeatureKind, &str), usize> = BTreeMap::new();
            for (vector, sense) in labeled {
                for feature in vector.as_set() {
                    let key = (&feature.kind, feature.value.as_str());
                    *per_sense.entry(key).or_default().entry(sense).or_insert(0) += 1;
                    *totals.entry(key).or_insert(0) += 1;
                }
            }

            let alpha = params.alpha;
            let n = candidates.len() as f64;
            for ((kind, value), by_sense) in &per_sense {
                let total = totals[&(*kind, *value)];
                for sense in candidates {
                    let with = by_sense.get(sense).copied().unwrap_or(0);
                    let against = total - with;
                    let weight =
                        ((with as f64 + alpha) / (against as f64 + alpha * (n - 1.0))).ln();
                    if weight > params.theta {
                        entries.push(DlEntry {
                            kind: (*kind).clone(),
                            value: value.to_string(),
                            sense: sense.clone(),
                            weight,
                        });
                    }
                }
            }
            entries.sort_by(|a, b| {
                b.weight
                    .partial_cmp(&a.weight)
                    .expect("weights are finite")
                    .then_with(|| rank_of[&a.sense].cmp(&rank_of[&b.sense]))
                    .then_with(|| a.kind.to_string().cmp(&b.kind.to_string()))
                    .then_with(|| a.value.cmp(&b.value))
            });
        }

        let default = if params.dl_default {
            majority_sense(labeled.iter().map(|(_, s)| s), candidates)
        } else {
            None
        };

        DecisionListModel {
            lemma: lemma.to_string(),
            pos: pos.clone(),
            entries,
            default,
        }
    }

    /// First entry present in the vector decides; otherwise the default
    /// (at weight 0) if one was trained.
    pub fn apply(&self, vector: &FeatureVector) -> Option<(SenseId, f64)> {
        let present: BTreeSet<(&FeatureKind, &str)> =
            vector.iter().map(|f| (&f.kind, f.value.as_str())).collect();
        for entry in &self.entries {
            if present.contains(&(&entry.kind, entry.value.as_str())) {
                return Some((entry.sense.clone(), entry.weight));
            }
        }
        self.default.clone().map(|sense| (sense, 0.0))
    }
}

/// Most frequent sense among `labels`; ties go to the earlier candidate.
/// None when no label is a known candidate.
fn majority_sense<'a>(
    labels: impl Iterator<Item = &'a SenseId>,
    candidates: &[SenseId],
) -> Option<SenseId> {
    let mut counts: BTreeMap<&SenseId, usize> = BTreeMap::new();
    for sense in labels {
        *counts.entry(sense).or_insert(0) += 1;
    }
    let mut best: Option<(&SenseId, usize)> = None;
    for sense in candidates {
        let count = counts.get(sense).copied().unwrap_or(0);
        if count > 0 && best.map(|(_, top)| count > top).unwrap_or(true) {
            best = Some((sense, count));
        }
    }
    best.map(|(sense, _)| sense.clone())
}

/// A decision list per target lemma, all sharing one extractor set.
pub struct DlClassifier {
    set: ExtractorSet,
    models: BTreeMap<(String, Pos), DecisionListModel>,
}

impl DlClassifier {
    pub fn new(set: ExtractorSet) -> Self {
        DlClassifier {
            set,
            models: BTreeMap::new(),
        }
    }

    pub fn from_models(set: ExtractorSet, models: Vec<DecisionListModel>) -> Self {
        let mut classifier = DlClassifier::new(set);
        for model in models {
            classifier
                .models
                .insert((model.lemma.clone(), model.pos.clone()), model);
        }
        classifier
    }

    pub fn set(&self) -> ExtractorSet {
        self.set
    }

    pub fn models(&self) -> impl Iterator<Item = &DecisionListModel> {
        self.models.values()
    }

    pub fn model_for(&self, lemma: &str, pos: &Pos) -> Option<&DecisionListModel> {
        self.models.get(&(lemma.to_string(), pos.clone()))
    }
}

impl Disambiguator for DlClassifier {
    fn name(&self) -> String {
        format!("dl:{}", self.set.as_str())
    }

    fn knowledge_types(&self) -> BTreeSet<KnowledgeType> {
        self.set.knowledge_types()
    }

    fn trainable(&self) -> bool {
        true
    }

    fn train(&mut self, ctx: &Context, train: &[Instance]) -> Result<()> {
        self.models.clear();
        let mut groups: BTreeMap<(String, Pos), Vec<&Instance>> = BTreeMap::new();
        for instance in train {
            groups
                .entry((instance.lemma.clone(), instance.pos.clone()))
                .or_default()
                .push(instance);
        }
        for ((lemma, pos), instances) in groups {
            let candidates: Vec<SenseId> = ctx
                .lkb
                .senses_of(&lemma, &pos)
                .iter()
                .map(|s| s.id.clone())
                .collect();
            if candidates.is_empty() {
                continue;
            }
            let labeled: Vec<(FeatureVector, SenseId)> = instances
                .iter()
                .filter_map(|i| {
                    i.gold
                        .clone()
                        .map(|gold| (self.set.extract(ctx.corpus, i, ctx.params), gold))
                })
                .collect();
            let model = DecisionListModel::from_labeled_vectors(
                &lemma,
                &pos,
                &labeled,
                &candidates,
                ctx.params,
            );
            self.models.insert((lemma, pos), model);
        }
        Ok(())
    }

    fn disambiguate(&self, ctx: &Context, instance: &Instance) -> Answer {
        let candidates = ctx.lkb.senses_of(&instance.lemma, &instance.pos);
        if candidates.is_empty() {
            return Answer::abstain(&self.name(), instance);
        }
        if candidates.len() == 1 {
            return Answer::new(&self.name(), instance, Some(candidates[0].id.clone()), 0.0);
        }
        let Some(model) = self.model_for(&instance.lemma, &instance.pos) else {
            return Answer::abstain(&self.name(), instance);
        };
        let vector = self.set.extract(ctx.corpus, instance, ctx.params);
        match model.apply(&vector) {
            Some((sense, weight)) => Answer::new(&self.name(), instance, Some(sense), weight),
            None => Answer::abstain(&self.name(), instance),
        }
    }
}
