//! Input synthesis for the benchmarks. The generator grows a knowledge
//! base and a tagged corpus from a seed, sized by document count; every
//! shape knob is fixed here so that timings compare code, not data.
//!
//! The shape imitates the real setting at small scale: a three-level
//! taxonomy, a dozen polysemous target nouns with skewed sense
//! frequencies, filler context with occasional capitalization, and a
//! verb per sentence that governs some of the targets.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polysense::{Corpus, Lkb};

const TARGETS: usize = 12;
const ROOTS: usize = 5;
const MIDS: usize = 25;
const VOCAB: usize = 300;
const VERBS: usize = 20;

/// Rendered input files, ready for the parsers or for a tempdir.
pub struct Inputs {
    pub inventory: String,
    pub taxonomy: String,
    pub glosses: String,
    pub corpus: String,
}

fn gloss_line(out: &mut String, synset: &str, rng: &mut ChaCha8Rng) {
    write!(out, "{synset}").unwrap();
    for _ in 0..rng.random_range(4..=8usize) {
        write!(out, "\tw{:03}", rng.random_range(0..VOCAB)).unwrap();
    }
    out.push('\n');
}

impl Inputs {
    pub fn generate(docs: usize, seed: u64) -> Inputs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        // Senses per target, drawn once; rank 1 is made the most
        // frequent below so the corpus distribution matches the ranks.
        let senses: Vec<usize> = (0..TARGETS).map(|_| rng.random_range(2..=5usize)).collect();

        let mut inventory = String::new();
        let mut taxonomy = String::new();
        let mut glosses = String::new();
        for mid in 0..MIDS {
            writeln!(taxonomy, "C{mid:02}\tTOP{}", rng.random_range(0..ROOTS)).unwrap();
        }
        for (t, &k) in senses.iter().enumerate() {
            for r in 1..=k {
                writeln!(inventory, "t{t:02}\tn\tt{t:02}.n.{r}\t{r}\tS{t:02}R{r}").unwrap();
                writeln!(taxonomy, "S{t:02}R{r}\tC{:02}", rng.random_range(0..MIDS)).unwrap();
                gloss_line(&mut glosses, &format!("S{t:02}R{r}"), &mut rng);
            }
        }
        for root in 0..ROOTS {
            gloss_line(&mut glosses, &format!("TOP{root}"), &mut rng);
        }
        for mid in 0..MIDS {
            gloss_line(&mut glosses, &format!("C{mid:02}"), &mut rng);
        }

        let mut corpus = String::new();
        for d in 0..docs {
            for s in 0..rng.random_range(6..=12usize) {
                let len = rng.random_range(8..=18usize);
                let verb_at = rng.random_range(0..len);
                let verb = rng.random_range(0..VERBS);
                for tok in 0..len {
                    if tok == verb_at {
                        writeln!(corpus, "doc{d:03}\t{s}\t{tok}\tv{verb:02}s\tv{verb:02}\tv\t-\t-\t-")
                            .unwrap();
                    } else if rng.random_bool(0.15) {
                        let t = rng.random_range(0..TARGETS);
                        // Linear skew: rank r drawn with weight k+1-r.
                        let k = senses[t];
                        let mut pick = rng.random_range(0..k * (k + 1) / 2);
                        let mut r = 1;
                        while pick >= k + 1 - r {
                            pick -= k + 1 - r;
                            r += 1;
                        }
                        let (head, label) = if rng.random_bool(0.6) {
                            (verb_at.to_string(), if rng.random_bool(0.5) { "nsubj" } else { "dobj" })
                        } else {
                            ("-".to_string(), "-")
                        };
                        writeln!(
                            corpus,
                            "doc{d:03}\t{s}\t{tok}\tt{t:02}\tt{t:02}\tn\tt{t:02}.n.{r}\t{head}\t{label}"
                        )
                        .unwrap();
                    } else {
                        let w = rng.random_range(0..VOCAB);
                        let form = if rng.random_bool(0.1) {
                            format!("W{w:03}")
                        } else {
                            format!("w{w:03}")
                        };
                        writeln!(corpus, "doc{d:03}\t{s}\t{tok}\t{form}\tw{w:03}\tx\t-\t-\t-").unwrap();
                    }
                }
                corpus.push('\n');
            }
        }

        Inputs {
            inventory,
            taxonomy,
            glosses,
            corpus,
        }
    }

    pub fn load(&self) -> (Lkb, Corpus) {
        let lkb = Lkb::parse(
            &self.inventory,
            &self.taxonomy,
            &self.glosses,
            "inventory",
            "taxonomy",
            "glosses",
        )
        .expect("generated knowledge base parses");
        let corpus = Corpus::parse(&self.corpus, "corpus").expect("generated corpus parses");
        (lkb, corpus)
    }
}
