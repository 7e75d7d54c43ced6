//! Taxonomy-based disambiguation: find the tightest subtree that covers
//! senses of several window words at once, and let it fix those senses.

use std::collections::{BTreeMap, BTreeSet};

use crate::config::DensityWindow;
use crate::corpus::Instance;
use crate::error::Result;
use crate::features::KnowledgeType;
use crate::lkb::{Lkb, Pos, Sense, SenseId, SynsetId};

use super::{Answer, Context, Disambiguator};

/// For a candidate subtree root covering `m` candidate senses, the score
/// is (Σ_{i=0..m-1} nhyp^i) / descendants(root), with nhyp the
/// taxonomy's mean branching factor. A root only qualifies while it
/// covers senses of at least two distinct unresolved window words: the
/// point is shared semantic class, and without that floor every sense's
/// own synset would win with a degenerate perfect score. The best root
/// fixes every word it covers; the rest of the window is retried without
/// them, and words never covered abstain. Windows with fewer than two
/// known nouns abstain entirely.
pub struct Density;

/// Geometric series 1 + nhyp + ... + nhyp^(m-1), summed iteratively so
/// nhyp = 1 needs no special case.
fn geometric_sum(nhyp: f64, m: usize) -> f64 {
    let mut acc = 0.0;
    let mut term = 1.0;
    for _ in 0..m {
        acc += term;
        term *= nhyp;
    }
    acc
}

/// One window word: its position and its candidate senses with their
/// subsumer sets (own synset plus the full hypernym closure).
struct WindowWord<'a> {
    position: (usize, usize),
    senses: Vec<&'a Sense>,
    subsumers: Vec<BTreeSet<SynsetId>>,
}

fn window_words<'a>(
    lkb: &'a Lkb,
    corpus: &crate::corpus::Corpus,
    sentence_indices: &[usize],
) -> Result<Vec<WindowWord<'a>>> {
    let mut words = Vec::new();
    for &sent_idx in sentence_indices {
        let sentence = &corpus.sentences()[sent_idx];
        for (tok_idx, token) in sentence.tokens.iter().enumerate() {
            if token.pos != Pos::Noun {
                continue;
            }
            let senses = lkb.senses_of(&token.lemma, &Pos::Noun);
            if senses.is_empty() {
                continue;
            }
            let mut subsumers = Vec::with_capacity(senses.len());
            for sense in &senses {
                let mut set = lkb.hypernym_closure(&sense.synset)?;
                set.insert(sense.synset.clone());
                subsumers.push(set);
            }
            words.push(WindowWord {
                position: (sent_idx, tok_idx),
                senses,
                subsumers,
            });
        }
    }
    Ok(words)
}

/// Answers for one window: (sent_idx, tok_idx) to (sense, density).
type Resolution = BTreeMap<(usize, usize), (SenseId, f64)>;

/// Resolve one window.
fn resolve(lkb: &Lkb, words: &[WindowWord]) -> Result<Resolution> {
    let mut resolved = BTreeMap::new();
    if words.len() < 2 {
        return Ok(resolved);
    }
    let nhyp = lkb.mean_branching();
    let mut remaining: BTreeSet<usize> = (0..words.len()).collect();

    loop {
        // Which senses and which words each potential root covers now.
        let mut senses_under: BTreeMap<&SynsetId, BTreeSet<&SenseId>> = BTreeMap::new();
        let mut words_under: BTreeMap<&SynsetId, BTreeSet<usize>> = BTreeMap::new();
        for &w in &remaining {
            let word = &words[w];
            for (sense, subs) in word.senses.iter().zip(&word.subsumers) {
                for root in subs {
                    senses_under.entry(root).or_default().insert(&sense.id);
                    words_under.entry(root).or_default().insert(w);
                }
            }
        }

        // Ascending key order makes the smaller synset id win ties.
        let mut best: Option<(&SynsetId, f64)> = None;
        for (root, covered) in &words_under {
            if covered.len() < 2 {
                continue;
            }
            let m = senses_under[root].len();
            let density = geometric_sum(nhyp, m) / lkb.descendants(root)? as f64;
            if best.map(|(_, top)| density > top).unwrap_or(true) {
                best = Some((root, density));
            }
        }
        let Some((winner, density)) = best else { break };

        let fixed: Vec<usize> = remaining
            .iter()
            .copied()
            .filter(|&w| words[w].subsumers.iter().any(|s| s.contains(winner)))
            .collect();
        for w in fixed {
            let word = &words[w];
            // Rank order of `senses` makes the first covered sense the
            // lowest-rank one.
            let sense = word
                .senses
                .iter()
                .zip(&word.subsumers)
                .find(|(_, subs)| subs.contains(winner))
                .map(|(sense, _)| sense)
                .expect("word was covered by the winner");
            resolved.insert(word.position, (sense.id.clone(), density));
            remaining.remove(&w);
        }
        if remaining.len() < 2 {
            break;
        }
    }

    Ok(resolved)
}

impl Density {
    fn window_of(ctx: &Context, instance: &Instance) -> Vec<usize> {
        match ctx.params.density_window {
            DensityWindow::Sentence => vec![instance.sent_idx],
            DensityWindow::Document => ctx.corpus.doc_sentences(&instance.doc_id).to_vec(),
        }
    }

    fn answers_for_window(&self, ctx: &Context, sentence_indices: &[usize]) -> Resolution {
        // Closure and descendant lookups only fail on unknown synsets,
        // which loading the inventory has already ruled out.
        let words = window_words(ctx.lkb, ctx.corpus, sentence_indices)
            .expect("window synsets come from the loaded inventory");
        resolve(ctx.lkb, &words).expect("window synsets come from the loaded inventory")
    }
}

impl Disambiguator for Density {
    fn name(&self) -> String {
        "density".to_string()
    }

    fn knowledge_types(&self) -> BTreeSet<KnowledgeType> {
        [KnowledgeType::TaxonomicAssoc].into()
    }

    fn disambiguate(&self, ctx: &Context, instance: &Instance) -> Answer {
        if instance.pos != Pos::Noun {
            return Answer::abstain(&self.name(), instance);
        }
        let window = Self::window_of(ctx, instance);
        let answers = self.answers_for_window(ctx, &window);
        match answers.get(&(instance.sent_idx, instance.tok_idx)) {
            Some((sense, density)) => {
                Answer::new(&self.name(), instance, Some(sense.clone()), *density)
            }
            None => Answer::abstain(&self.name(), instance),
        }
    }

    fn disambiguate_batch(&self, ctx: &Context, instances: &[Instance]) -> Vec<Answer> {
        // Resolve each distinct window once; instances sharing a window
        // share the outcome, identical to one-at-a-time calls.
        let mut window_cache: BTreeMap<Vec<usize>, Resolution> = BTreeMap::new();
        instances
            .iter()
            .map(|instance| {
                if instance.pos != Pos::Noun {
                    return Answer::abstain(&self.name(), instance);
                }
                let window = Self::window_of(ctx, instance);
                let answers = window_cache
                    .entry(window)
                    .or_insert_with_key(|w| self.answers_for_window(ctx, w));
                match answers.get(&(instance.sent_idx, instance.tok_idx)) {
                    Some((sense, density)) => {
                        Answer::new(&self.name(), instance, Some(sense.clone()), *density)
                    }
                    None => Answer::abstain(&self.name(), instance),
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Params;
    use crate::corpus::{Corpus, TargetSpec};

    const INV: &str = "\
crane\tn\tcrane.n.1\t1\tCRANE_BIRD
crane\tn\tcrane.n.2\t2\tCRANE_MACHINE
heron\tn\theron.n.1\t1\tHERON
girder\tn\tgirder.n.1\t1\tGIRDER
bass\tn\tbass.n.1\t1\tBASS_FISH
bass\tn\tbass.n.2\t2\tBASS_SOUND
perch\tn\tperch.n.1\t1\tPERCH_FISH
widget\tn\twidget.n.1\t1\tWIDGET
";

    const TAX: &str = "\
CRANE_BIRD\tBIRD
HERON\tBIRD
CRANE_MACHINE\tMACHINE
GIRDER\tMACHINE
BIRD\tANIMAL
BASS_FISH\tFISH
PERCH_FISH\tFISH
FISH\tANIMAL
ANIMAL\tENTITY
MACHINE\tENTITY
BASS_SOUND\tSOUND
SOUND\tENTITY
";

    // A deep single-child chain under the root keeps the branching
    // factor near one and the root's subtree large, the shape real
    // taxonomies have. 12 base edges + 30 chain edges over 6 + 29
    // branching synsets: nhyp = 42/35 = 1.2, descendants(ENTITY) = 43.
    fn taxonomy() -> String {
        let mut tax = String::from(TAX);
        let mut parent = "ENTITY".to_string();
        for i in 0..30 {
            let node = format!("ZPAD_{i:02}");
            tax.push_str(&format!("{node}\t{parent}\n"));
            parent = node;
        }
        tax
    }

    fn lkb() -> Lkb {
        Lkb::parse(INV, &taxonomy(), "", "inv", "tax", "gloss").unwrap()
    }

    fn answers(text: &str, params: &Params) -> Vec<Answer> {
        let lkb = lkb();
        let corpus = Corpus::parse(text, "doc").unwrap();
        let targets = TargetSpec::AllPolysemousNouns;
        let ctx = Context {
            lkb: &lkb,
            corpus: &corpus,
            params,
            targets: &targets,
            seed: 0,
        };
        let instances = corpus.instances(&lkb, &targets);
        let batch = Density.disambiguate_batch(&ctx, &instances);
        let single: Vec<Answer> = instances
            .iter()
            .map(|i| Density.disambiguate(&ctx, i))
            .collect();
        assert_eq!(batch, single, "batch and single calls must agree");
        batch
    }

    #[test]
    fn shared_parent_fixes_the_sense() {
        let text = "\
d\t0\t0\tcrane\tcrane\tn\tcrane.n.1\t-\t-
d\t0\t1\theron\theron\tn\t-\t-\t-
";
        let got = answers(text, &Params::default());
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].chosen.as_ref().unwrap().as_str(), "crane.n.1");
        // BIRD covers crane.n.1 and heron.n.1: m = 2, 3 descendants.
        assert!((got[0].score - (1.0 + 1.2) / 3.0).abs() < 1e-9);
    }

    #[test]
    fn machine_context_flips_the_choice() {
        let text = "\
d\t0\t0\tcrane\tcrane\tn\tcrane.n.2\t-\t-
d\t0\t1\tgirder\tgirder\tn\t-\t-\t-
";
        let got = answers(text, &Params::default());
        assert_eq!(got[0].chosen.as_ref().unwrap().as_str(), "crane.n.2");
    }

    #[test]
    fn lone_noun_abstains() {
        let got = answers(
            "d\t0\t0\tcrane\tcrane\tn\tcrane.n.1\t-\t-\n",
            &Params::default(),
        );
        assert_eq!(got.len(), 1);
        assert!(got[0].chosen.is_none());
    }

    #[test]
    fn a_shared_root_still_resolves_distant_words() {
        // The only subtree covering both words is ENTITY itself, with
        // senses {bass.n.1, bass.n.2, girder.n.1} under it. The covered
        // word takes its lowest-rank sense.
        let text = "\
d\t0\t0\tbass\tbass\tn\tbass.n.1\t-\t-
d\t0\t1\tgirder\tgirder\tn\t-\t-\t-
";
        let got = answers(text, &Params::default());
        assert_eq!(got[0].chosen.as_ref().unwrap().as_str(), "bass.n.1");
        let lkb = lkb();
        let entity_desc = lkb.descendants(&SynsetId::new("ENTITY")).unwrap() as f64;
        assert_eq!(entity_desc, 43.0);
        let expected = (1.0 + 1.2 + 1.2 * 1.2) / entity_desc;
        assert!((got[0].score - expected).abs() < 1e-9);
    }

    #[test]
    fn words_with_no_shared_subtree_abstain() {
        // widget's synset is outside the taxonomy, so no root covers
        // both words and neither gets an answer.
        let text = "\
d\t0\t0\tbass\tbass\tn\tbass.n.1\t-\t-
d\t0\t1\twidget\twidget\tn\t-\t-\t-
";
        let got = answers(text, &Params::default());
        assert_eq!(got.len(), 1);
        assert!(got[0].chosen.is_none());
    }

    #[test]
    fn resolution_repeats_on_the_remaining_words() {
        // First pass: FISH covers bass+perch tightly; second pass: the
        // two machine words resolve under MACHINE.
        let text = "\
d\t0\t0\tbass\tbass\tn\tbass.n.1\t-\t-
d\t0\t1\tperch\tperch\tn\t-\t-\t-
d\t0\t2\tcrane\tcrane\tn\tcrane.n.2\t-\t-
d\t0\t3\tgirder\tgirder\tn\t-\t-\t-
";
        let got = answers(text, &Params::default());
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].chosen.as_ref().unwrap().as_str(), "bass.n.1");
        assert_eq!(got[1].chosen.as_ref().unwrap().as_str(), "crane.n.2");
    }

    #[test]
    fn document_window_joins_sentences() {
        let text = "\
d\t0\t0\tcrane\tcrane\tn\tcrane.n.1\t-\t-

d\t1\t0\theron\theron\tn\t-\t-\t-
";
        let sentence_scope = answers(text, &Params::default());
        assert!(sentence_scope[0].chosen.is_none());

        let mut params = Params::default();
        params.density_window = DensityWindow::Document;
        let doc_scope = answers(text, &params);
        assert_eq!(doc_scope[0].chosen.as_ref().unwrap().as_str(), "crane.n.1");
    }

    #[test]
    fn density_ties_go_to_the_smaller_synset_id() {
        let inv = "\
alpha\tn\talpha.n.1\t1\tA1
alpha\tn\talpha.n.2\t2\tB1
beta\tn\tbeta.n.1\t1\tA2
beta\tn\tbeta.n.2\t2\tB2
";
        let tax = "A1\tPA\nA2\tPA\nB1\tPB\nB2\tPB\n";
        let lkb = Lkb::parse(inv, tax, "", "inv", "tax", "gloss").unwrap();
        let corpus = Corpus::parse(
            "d\t0\t0\talpha\talpha\tn\talpha.n.1\t-\t-\nd\t0\t1\tbeta\tbeta\tn\t-\t-\t-\n",
            "doc",
        )
        .unwrap();
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
        // PA and PB both cover two senses of two words with equal
        // descendant counts; PA sorts first.
        let got = Density.disambiguate(&ctx, &instances[0]);
        assert_eq!(got.chosen.unwrap().as_str(), "alpha.n.1");
    }

    #[test]
    fn geometric_sum_handles_unit_branching() {
        assert_eq!(geometric_sum(1.0, 4), 4.0);
        assert_eq!(geometric_sum(2.0, 3), 7.0);
        assert_eq!(geometric_sum(0.0, 3), 1.0);
        assert_eq!(geometric_sum(2.0, 0), 0.0);
    }
}
