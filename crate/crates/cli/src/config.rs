//! Run configuration: a TOML file plus command-line overrides.
//!
//! The file is the reproducible experiment record; flags patch single
//! values on top and always win. Unknown keys anywhere in the file are
//! rejected so a typo cannot silently fall back to a default.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use serde::Deserialize;

use polysense::config::DensityWindow;
use polysense::corpus::{TagPolicy, TargetSpec};
use polysense::disambiguators::ClassMap;
use polysense::{fixture, AlgorithmSpec, Corpus, Error, Lkb, Params, Resources, Result};

/// Grid run when no algorithms are configured: every algorithm once,
/// decision lists with both the narrow and the full extractor set.
const DEFAULT_ALGORITHMS: [&str; 11] = [
    "random",
    "first_sense",
    "mfs",
    "overlap",
    "density",
    "dl:local",
    "dl:combined",
    "semclass",
    "selpref",
    "topsig",
    "bootstrap_dl:combined",
];

const TARGETS_ALL: &str = "all-polysemous-nouns";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    paths: PathsSection,
    #[serde(default)]
    run: RunSection,
    #[serde(default)]
    params: ParamsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathsSection {
    inventory: Option<PathBuf>,
    taxonomy: Option<PathBuf>,
    glosses: Option<PathBuf>,
    corpus: Option<PathBuf>,
    classes: Option<PathBuf>,
    collections: Option<PathBuf>,
    raw_corpus: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    algorithms: Option<Vec<String>>,
    targets: Option<TargetsField>,
    k: Option<usize>,
    seed: Option<u64>,
    tag_policy: Option<String>,
}

/// `targets = "all-polysemous-nouns"` or `targets = ["bank", "crane"]`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TargetsField {
    Flag(String),
    Lemmas(Vec<String>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsSection {
    alpha: Option<f64>,
    theta: Option<f64>,
    signature_k: Option<usize>,
    window: Option<usize>,
    global_window: Option<usize>,
    density_window: Option<String>,
    stopwords: Option<Vec<String>>,
    lowercase_wordforms: Option<bool>,
    dl_default: Option<bool>,
    subject_labels: Option<Vec<String>>,
    object_labels: Option<Vec<String>>,
}

/// Command-line values that can override the file. Collected by clap in
/// `main`; kept as a plain struct here so resolution is testable.
#[derive(Debug, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub fixture: bool,
    pub inventory: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub glosses: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub classes: Option<PathBuf>,
    pub collections: Option<PathBuf>,
    pub raw_corpus: Option<PathBuf>,
    pub algorithms: Option<Vec<String>>,
    pub targets: Option<String>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub tag_policy: Option<String>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug)]
pub struct RunConfig {
    pub fixture: bool,
    pub inventory: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub glosses: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub classes: Option<PathBuf>,
    pub collections: Option<PathBuf>,
    pub raw_corpus: Option<PathBuf>,
    pub algorithms: Vec<AlgorithmSpec>,
    pub targets: TargetSpec,
    pub k: usize,
    pub seed: u64,
    pub tag_policy: TagPolicy,
    pub params: Params,
}

/// The loaded inputs a command works on. `corpus` stays `None` when no
/// corpus is configured; commands that need one check first.
pub struct Inputs {
    pub lkb: Lkb,
    pub corpus: Option<Corpus>,
    pub resources: Resources,
}

fn missing_path(what: &str, flag: &str) -> Error {
    Error::Config(format!(
        "no {what} configured; set `paths.{what}` in the config file, pass `--{flag}`, or use `--fixture`"
    ))
}

fn parse_targets_flag(s: &str) -> Result<TargetSpec> {
    if s == TARGETS_ALL {
        return Ok(TargetSpec::AllPolysemousNouns);
    }
    let lemmas: Vec<String> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect();
    lemma_targets(lemmas)
}

fn lemma_targets(lemmas: Vec<String>) -> Result<TargetSpec> {
    if lemmas.iter().any(|l| l.is_empty()) {
        return Err(Error::Config("empty lemma in target list".to_string()));
    }
    let set: BTreeSet<String> = lemmas.into_iter().collect();
    if set.is_empty() {
        return Err(Error::Config(format!(
            "target list is empty; list lemmas or use `{TARGETS_ALL}`"
        )));
    }
    Ok(TargetSpec::Lemmas(set))
}

fn parse_tag_policy(s: &str) -> Result<TagPolicy> {
    match s {
        "error" => Ok(TagPolicy::Error),
        "warn" => Ok(TagPolicy::Warn),
        other => Err(Error::Config(format!(
            "tag_policy must be `error` or `warn`, got `{other}`"
        ))),
    }
}

fn label_set(labels: Vec<String>) -> BTreeSet<String> {
    labels.into_iter().map(|l| l.to_ascii_lowercase()).collect()
}

fn apply_params(base: &mut Params, section: ParamsSection) -> Result<()> {
    if let Some(alpha) = section.alpha {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!(
                "alpha must be a positive number, got {alpha}"
            )));
        }
        base.alpha = alpha;
    }
    if let Some(theta) = section.theta {
        if !theta.is_finite() {
            return Err(Error::Config("theta must be finite".to_string()));
        }
        base.theta = theta;
    }
    if let Some(k) = section.signature_k {
        if k == 0 {
            return Err(Error::Config("signature_k must be at least 1".to_string()));
        }
        base.signature_k = k;
    }
    if let Some(w) = section.window {
        if w == 0 {
            return Err(Error::Config("window must be at least 1".to_string()));
        }
        base.window = w;
    }
    if section.global_window.is_some() {
        base.global_window = section.global_window;
    }
    if let Some(name) = section.density_window {
        base.density_window = DensityWindow::parse(&name).ok_or_else(|| {
            Error::Config(format!(
                "density_window must be `sentence` or `document`, got `{name}`"
            ))
        })?;
    }
    if let Some(words) = section.stopwords {
        base.stopwords = words.into_iter().collect();
    }
    if let Some(flag) = section.lowercase_wordforms {
        base.lowercase_wordforms = flag;
    }
    if let Some(flag) = section.dl_default {
        base.dl_default = flag;
    }
    if let Some(labels) = section.subject_labels {
        base.subject_labels = label_set(labels);
    }
    if let Some(labels) = section.object_labels {
        base.object_labels = label_set(labels);
    }
    Ok(())
}

impl RunConfig {
    /// Merge defaults, the config file (if any) and the flag overrides,
    /// in that order. Pure settings work only; nothing is loaded yet.
    pub fn resolve(over: Overrides) -> Result<RunConfig> {
        let file = match &over.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Error::Config(format!("cannot read config file {}: {e}", path.display()))
                })?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };

        let mut params = Params::default();
        apply_params(&mut params, file.params)?;

        let algorithms: Vec<AlgorithmSpec> = over
            .algorithms
            .or(file.run.algorithms)
            .unwrap_or_else(|| DEFAULT_ALGORITHMS.iter().map(|s| s.to_string()).collect())
            .iter()
            .map(|s| AlgorithmSpec::parse(s))
            .collect::<Result<_>>()?;
        if algorithms.is_empty() {
            return Err(Error::Config("algorithm list is empty".to_string()));
        }

        let targets = match (over.targets, file.run.targets) {
            (Some(flag), _) => parse_targets_flag(&flag)?,
            (None, Some(TargetsField::Flag(flag))) => {
                if flag == TARGETS_ALL {
                    TargetSpec::AllPolysemousNouns
                } else {
                    return Err(Error::Config(format!(
                        "targets must be `{TARGETS_ALL}` or a lemma list, got `{flag}`"
                    )));
                }
            }
            (None, Some(TargetsField::Lemmas(lemmas))) => lemma_targets(lemmas)?,
            (None, None) => TargetSpec::AllPolysemousNouns,
        };

        let tag_policy = match over.tag_policy.or(file.run.tag_policy) {
            Some(name) => parse_tag_policy(&name)?,
            None => TagPolicy::Error,
        };

        // --fixture replaces the whole path section; flag paths conflict
        // with it at the clap level, config-file paths are just ignored.
        let paths = if over.fixture {
            PathsSection::default()
        } else {
            PathsSection {
                inventory: over.inventory.or(file.paths.inventory),
                taxonomy: over.taxonomy.or(file.paths.taxonomy),
                glosses: over.glosses.or(file.paths.glosses),
                corpus: over.corpus.or(file.paths.corpus),
                classes: over.classes.or(file.paths.classes),
                collections: over.collections.or(file.paths.collections),
                raw_corpus: over.raw_corpus.or(file.paths.raw_corpus),
            }
        };

        Ok(RunConfig {
            fixture: over.fixture,
            inventory: paths.inventory,
            taxonomy: paths.taxonomy,
            glosses: paths.glosses,
            corpus: paths.corpus,
            classes: paths.classes,
            collections: paths.collections,
            raw_corpus: paths.raw_corpus,
            algorithms,
            targets,
            k: over.k.or(file.run.k).unwrap_or(10),
            seed: over.seed.or(file.run.seed).unwrap_or(1),
            tag_policy,
            params,
        })
    }

    /// Path presence checks, run before anything is loaded so a missing
    /// path fails fast as a configuration error.
    pub fn require_lkb(&self) -> Result<()> {
        if self.fixture {
            return Ok(());
        }
        for (path, what, flag) in [
            (&self.inventory, "inventory", "inventory"),
            (&self.taxonomy, "taxonomy", "taxonomy"),
            (&self.glosses, "glosses", "glosses"),
        ] {
            if path.is_none() {
                return Err(missing_path(what, flag));
            }
        }
        Ok(())
    }

    pub fn require_corpus(&self) -> Result<()> {
        if self.fixture || self.corpus.is_some() {
            Ok(())
        } else {
            Err(missing_path("corpus", "corpus"))
        }
    }

    pub fn require_collections(&self) -> Result<()> {
        if self.fixture || self.collections.is_some() {
            Ok(())
        } else {
            Err(missing_path("collections", "collections"))
        }
    }

    pub fn require_raw_corpus(&self) -> Result<()> {
        if self.fixture || self.raw_corpus.is_some() {
            Ok(())
        } else {
            Err(missing_path("raw_corpus", "raw-corpus"))
        }
    }

    /// Load everything the configuration points at. Tag issues under the
    /// `warn` policy go to standard error; under `error` the first one
    /// aborts the load.
    pub fn load_inputs(&self) -> Result<Inputs> {
        if self.fixture {
            let bundle = fixture::load();
            return Ok(Inputs {
                lkb: bundle.lkb,
                corpus: Some(bundle.corpus),
                resources: bundle.resources,
            });
        }
        let lkb = Lkb::load(
            self.inventory
                .as_deref()
                .ok_or_else(|| missing_path("inventory", "inventory"))?,
            self.taxonomy
                .as_deref()
                .ok_or_else(|| missing_path("taxonomy", "taxonomy"))?,
            self.glosses
                .as_deref()
                .ok_or_else(|| missing_path("glosses", "glosses"))?,
        )?;
        let corpus = match &self.corpus {
            Some(path) => {
                let (corpus, issues) = Corpus::load_validated(path, &lkb, self.tag_policy)?;
                for issue in &issues {
                    eprintln!("warning: {}: {issue}", path.display());
                }
                Some(corpus)
            }
            None => None,
        };
        let class_map = match &self.classes {
            Some(path) => Some(ClassMap::load(path)?),
            None => None,
        };
        let collections = match &self.collections {
            Some(path) => Some(polysense::disambiguators::Collections::load(path)?),
            None => None,
        };
        let raw_corpus = match &self.raw_corpus {
            Some(path) => Some(Corpus::load(path)?),
            None => None,
        };
        Ok(Inputs {
            lkb,
            corpus,
            resources: Resources {
                class_map,
                collections,
                raw_corpus,
            },
        })
    }
}

impl Inputs {
    /// The tagged corpus; `require_corpus` ran earlier, so absence here
    /// is the same configuration error, just repeated for safety.
    pub fn corpus(&self) -> Result<&Corpus> {
        self.corpus
            .as_ref()
            .ok_or_else(|| missing_path("corpus", "corpus"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(over: Overrides) -> RunConfig {
        RunConfig::resolve(over).unwrap()
    }

    #[test]
    fn defaults_cover_a_full_grid() {
        let config = resolve(Overrides::default());
        assert_eq!(config.algorithms.len(), DEFAULT_ALGORITHMS.len());
        assert_eq!(config.targets, TargetSpec::AllPolysemousNouns);
        assert_eq!(config.k, 10);
        assert_eq!(config.seed, 1);
        assert_eq!(config.tag_policy, TagPolicy::Error);
    }

    #[test]
    fn flags_beat_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "[run]\nseed = 3\nk = 4\nalgorithms = [\"mfs\"]\n\n[params]\nalpha = 0.5\n",
        )
        .unwrap();
        let config = resolve(Overrides {
            config: Some(path),
            seed: Some(9),
            ..Overrides::default()
        });
        assert_eq!(config.seed, 9);
        assert_eq!(config.k, 4);
        assert_eq!(config.algorithms, vec![AlgorithmSpec::Mfs]);
        assert_eq!(config.params.alpha, 0.5);
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "[run]\nfolds = 3\n").unwrap();
        let err = RunConfig::resolve(Overrides {
            config: Some(path),
            ..Overrides::default()
        })
        .unwrap_err();
        assert!(err.to_string().contains("folds"), "{err}");
    }

    #[test]
    fn targets_accept_the_flag_or_a_lemma_list() {
        let all = parse_targets_flag("all-polysemous-nouns").unwrap();
        assert_eq!(all, TargetSpec::AllPolysemousNouns);
        let some = parse_targets_flag("bank, crane").unwrap();
        let TargetSpec::Lemmas(set) = some else {
            panic!("expected lemmas")
        };
        assert_eq!(set.len(), 2);
        assert!(parse_targets_flag("").is_err());
    }

    #[test]
    fn bad_knob_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        for (body, needle) in [
            ("[params]\nalpha = 0.0\n", "alpha"),
            ("[params]\nwindow = 0\n", "window"),
            ("[params]\ndensity_window = \"page\"\n", "density_window"),
            ("[run]\ntag_policy = \"strict\"\n", "tag_policy"),
            ("[run]\nalgorithms = []\n", "empty"),
        ] {
            let path = dir.path().join("bad.toml");
            fs::write(&path, body).unwrap();
            let err = RunConfig::resolve(Overrides {
                config: Some(path.clone()),
                ..Overrides::default()
            })
            .unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{body}");
            assert!(err.to_string().contains(needle), "{body} -> {err}");
        }
    }

    #[test]
    fn missing_paths_fail_before_any_load() {
        let config = resolve(Overrides::default());
        assert!(config.require_lkb().is_err());
        assert!(config.require_corpus().is_err());
        let fixture_config = resolve(Overrides {
            fixture: true,
            ..Overrides::default()
        });
        assert!(fixture_config.require_lkb().is_ok());
        assert!(fixture_config.require_corpus().is_ok());
        assert!(fixture_config.require_collections().is_ok());
        assert!(fixture_config.require_raw_corpus().is_ok());
    }

    #[test]
    fn the_fixture_flag_loads_every_resource() {
        let config = resolve(Overrides {
            fixture: true,
            ..Overrides::default()
        });
        let inputs = config.load_inputs().unwrap();
        assert!(inputs.corpus.is_some());
        assert!(inputs.resources.class_map.is_some());
        assert!(inputs.resources.collections.is_some());
        assert!(inputs.resources.raw_corpus.is_some());
    }
}
