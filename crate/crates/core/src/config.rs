use std::collections::BTreeSet;

/// Scope of the co-occurrence window used by conceptual density.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityWindow {
    /// Nouns of the target's sentence (the default).
    Sentence,
    /// All nouns of the target's document.
    Document,
}

impl DensityWindow {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sentence" => Some(DensityWindow::Sentence),
            "document" => Some(DensityWindow::Document),
            _ => None,
        }
    }
}

/// Tunable knobs shared by the feature extractors and the algorithms.
///
/// The defaults are the documented baseline; every knob is surfaced in the
/// CLI configuration so experiment records stay reproducible.
#[derive(Clone, Debug)]
pub struct Params {
    /// Additive smoothing used by decision-list weights, class salience
    /// and selectional-preference estimates.
    pub alpha: f64,
    /// Decision-list entries must have weight strictly greater than this.
    pub theta: f64,
    /// Lemmas kept per sense in a topic signature.
    pub signature_k: usize,
    /// Half-width of the local context window (2 means +/-2 tokens).
    pub window: usize,
    /// Widen the global bag to +/-N tokens across sentence boundaries.
    /// `None` keeps the default sentence-only bag.
    pub global_window: Option<usize>,
    /// Window scope for conceptual density.
    pub density_window: DensityWindow,
    /// Lemmas excluded from bag features and gloss-overlap contexts.
    pub stopwords: BTreeSet<String>,
    /// Lowercase wordforms before they enter feature values.
    pub lowercase_wordforms: bool,
    /// Give decision lists a majority-sense default entry so they never
    /// abstain. Off by default: abstentions are part of the measurement.
    pub dl_default: bool,
    /// Dependency labels treated as subject relations.
    pub subject_labels: BTreeSet<String>,
    /// Dependency labels treated as object relations.
    pub object_labels: BTreeSet<String>,
}

impl Default for Params {
    fn default() -> Self {
        let set = |labels: &[&str]| labels.iter().map(|s| s.to_string()).collect();
        Params {
            alpha: 0.1,
            theta: 0.0,
            signature_k: 100,
            window: 2,
            global_window: None,
            density_window: DensityWindow::Sentence,
            stopwords: BTreeSet::new(),
            lowercase_wordforms: true,
            dl_default: false,
            subject_labels: set(&["subj", "subject", "nsubj"]),
            object_labels: set(&["obj", "object", "dobj"]),
        }
    }
}

impl Params {
    pub fn is_stopword(&self, lemma: &str) -> bool {
        self.stopwords.contains(lemma)
    }

    pub fn is_subject_label(&self, label: &str) -> bool {
        self.subject_labels.contains(&label.to_ascii_lowercase())
    }

    pub fn is_object_label(&self, label: &str) -> bool {
        self.object_labels.contains(&label.to_ascii_lowercase())
    }
}
