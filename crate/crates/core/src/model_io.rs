//! Plain-text persistence for trained models.
//!
//! Every file starts with `#model<TAB>kind<TAB>version`. Rows are tab
//! separated and sorted (decision-list entries keep their semantic list
//! order instead), so retraining diffs cleanly. Floats are written with
//! the shortest representation that parses back to the identical value,
//! making save/load lossless.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::disambiguators::{
    ClassMap, DecisionListModel, DlClassifier, DlEntry, Mfs, Rel, SelPref, SemClass,
};
use crate::error::{Error, Result};
use crate::features::{ExtractorSet, FeatureKind};
use crate::lkb::{Pos, SenseId, SynsetId};

const VERSION: &str = "1";

/// A model that can leave and re-enter the process. The variants are
/// exactly the algorithms that train on a corpus.
pub enum TrainedModel {
    Mfs(Mfs),
    Dl(DlClassifier),
    SemClass(SemClass),
    SelPref(SelPref),
}

impl TrainedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            TrainedModel::Mfs(_) => "mfs",
            TrainedModel::Dl(_) => "dl",
            TrainedModel::SemClass(_) => "semclass",
            TrainedModel::SelPref(_) => "selpref",
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "#model\t{}\t{VERSION}", self.kind()).unwrap();
        match self {
            TrainedModel::Mfs(model) => {
                for ((lemma, pos), senses) in model.counts() {
                    for (sense, count) in senses {
                        writeln!(out, "{lemma}\t{}\t{sense}\t{count}", pos.as_str()).unwrap();
                    }
                }
            }
            TrainedModel::Dl(classifier) => {
                writeln!(out, "#set\t{}", classifier.set().as_str()).unwrap();
                for model in classifier.models() {
                    writeln!(out, "#list\t{}\t{}", model.lemma, model.pos.as_str()).unwrap();
                    if let Some(default) = &model.default {
                        writeln!(out, "#default\t{default}").unwrap();
                    }
                    for entry in &model.entries {
                        writeln!(
                            out,
                            "{}\t{}\t{}\t{}",
                            entry.kind, entry.value, entry.sense, entry.weight
                        )
                        .unwrap();
                    }
                }
            }
            TrainedModel::SemClass(model) => {
                for (sense, class) in model.class_map().iter() {
                    writeln!(out, "#class\t{sense}\t{class}").unwrap();
                }
                for (class, lemmas) in model.weights() {
                    for (lemma, weight) in lemmas {
                        writeln!(out, "{class}\t{lemma}\t{weight}").unwrap();
                    }
                }
            }
            TrainedModel::SelPref(model) => {
                for ((verb, rel), classes) in model.distributions() {
                    for (class, probability) in classes {
                        writeln!(out, "{verb}\t{rel}\t{class}\t{probability}").unwrap();
                    }
                }
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }

    pub fn load(path: &Path) -> Result<TrainedModel> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<TrainedModel> {
        let bad = |line: usize, msg: &str| Error::Parse {
            origin: origin.to_string(),
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let Some((_, header)) = lines.next() else {
            return Err(bad(1, "empty model file"));
        };
        let fields: Vec<&str> = header.split('\t').collect();
        if fields.len() != 3 || fields[0] != "#model" {
            return Err(bad(1, "expected #model<TAB>kind<TAB>version header"));
        }
        if fields[2] != VERSION {
            return Err(bad(1, &format!("unsupported model version {}", fields[2])));
        }
        let body = lines;
        match fields[1] {
            "mfs" => parse_mfs(body, origin),
            "dl" => parse_dl(body, origin),
            "semclass" => parse_semclass(body, origin),
            "selpref" => parse_selpref(body, origin),
            other => Err(bad(1, &format!("unknown model kind {other}"))),
        }
    }
}

type Body<'a> = std::iter::Enumerate<std::str::Lines<'a>>;

fn parse_err(origin: &str, line: usize, msg: String) -> Error {
    Error::Parse {
        origin: origin.to_string(),
        line: line + 1,
        msg,
    }
}

fn parse_f64(origin: &str, lineno: usize, s: &str) -> Result<f64> {
    let value: f64 = s
        .parse()
        .map_err(|_| parse_err(origin, lineno, format!("bad number {s}")))?;
    if !value.is_finite() {
        return Err(parse_err(origin, lineno, format!("non-finite number {s}")));
    }
    Ok(value)
}

fn parse_mfs(body: Body, origin: &str) -> Result<TrainedModel> {
    let mut counts: BTreeMap<(String, Pos), BTreeMap<SenseId, usize>> = BTreeMap::new();
    for (lineno, line) in body {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                origin,
                lineno,
                "expected lemma<TAB>pos<TAB>sense<TAB>count".to_string(),
            ));
        }
        let count: usize = fields[3]
            .parse()
            .map_err(|_| parse_err(origin, lineno, format!("bad count {}", fields[3])))?;
        counts
            .entry((fields[0].to_string(), Pos::parse(fields[1])))
            .or_default()
            .insert(SenseId::new(fields[2]), count);
    }
    Ok(TrainedModel::Mfs(Mfs::from_counts(counts)))
}

fn parse_dl(body: Body, origin: &str) -> Result<TrainedModel> {
    let mut set: Option<ExtractorSet> = None;
    let mut models: Vec<DecisionListModel> = Vec::new();
    let mut current: Option<DecisionListModel> = None;
    for (lineno, line) in body {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields[0] {
            "#set" => {
                if fields.len() != 2 || set.is_some() {
                    return Err(parse_err(origin, lineno, "bad #set line".to_string()));
                }
                set = Some(ExtractorSet::parse(fields[1]).map_err(|_| {
                    parse_err(
                        origin,
                        lineno,
                        format!("unknown extractor set {}", fields[1]),
                    )
                })?);
            }
            "#list" => {
                if fields.len() != 3 {
                    return Err(parse_err(
                        origin,
                        lineno,
                        "expected #list<TAB>lemma<TAB>pos".to_string(),
                    ));
                }
                if let Some(done) = current.take() {
                    models.push(done);
                }
                current = Some(DecisionListModel {
                    lemma: fields[1].to_string(),
                    pos: Pos::parse(fields[2]),
                    entries: Vec::new(),
                    default: None,
                });
            }
            "#default" => {
                let model = current.as_mut().ok_or_else(|| {
                    parse_err(
                        origin,
                        lineno,
                        "#default outside a #list section".to_string(),
                    )
                })?;
                if fields.len() != 2 {
                    return Err(parse_err(origin, lineno, "bad #default line".to_string()));
                }
                model.default = Some(SenseId::new(fields[1]));
            }
            _ => {
                let model = current.as_mut().ok_or_else(|| {
                    parse_err(origin, lineno, "entry outside a #list section".to_string())
                })?;
                if fields.len() != 4 {
                    return Err(parse_err(
                        origin,
                        lineno,
                        "expected kind<TAB>value<TAB>sense<TAB>weight".to_string(),
                    ));
                }
                let kind = FeatureKind::parse(fields[0]).map_err(|_| {
                    parse_err(
                        origin,
                        lineno,
                        format!("unknown feature kind {}", fields[0]),
                    )
                })?;
                model.entries.push(DlEntry {
                    kind,
                    value: fields[1].to_string(),
                    sense: SenseId::new(fields[2]),
                    weight: parse_f64(origin, lineno, fields[3])?,
                });
            }
        }
    }
    if let Some(done) = current.take() {
        models.push(done);
    }
    let set = set.ok_or_else(|| parse_err(origin, 0, "missing #set line".to_string()))?;
    Ok(TrainedModel::Dl(DlClassifier::from_models(set, models)))
}

fn parse_semclass(body: Body, origin: &str) -> Result<TrainedModel> {
    let mut classes: BTreeMap<SenseId, String> = BTreeMap::new();
    let mut weights: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for (lineno, line) in body {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields[0] == "#class" {
            if fields.len() != 3 {
                return Err(parse_err(
                    origin,
                    lineno,
                    "expected #class<TAB>sense<TAB>class".to_string(),
                ));
            }
            if classes
                .insert(SenseId::new(fields[1]), fields[2].to_string())
                .is_some()
            {
                return Err(parse_err(
                    origin,
                    lineno,
                    format!("sense {} assigned to two classes", fields[1]),
                ));
            }
        } else {
            if fields.len() != 3 {
                return Err(parse_err(
                    origin,
                    lineno,
                    "expected class<TAB>lemma<TAB>weight".to_string(),
                ));
            }
            weights
                .entry(fields[0].to_string())
                .or_default()
                .insert(fields[1].to_string(), parse_f64(origin, lineno, fields[2])?);
        }
    }
    Ok(TrainedModel::SemClass(SemClass::from_weights(
        ClassMap::from_map(classes),
        weights,
    )))
}

fn parse_selpref(body: Body, origin: &str) -> Result<TrainedModel> {
    let mut distributions: BTreeMap<(String, Rel), BTreeMap<SynsetId, f64>> = BTreeMap::new();
    for (lineno, line) in body {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(
                origin,
                lineno,
                "expected verb<TAB>relation<TAB>class<TAB>probability".to_string(),
            ));
        }
        let rel = Rel::parse(fields[1])
            .map_err(|_| parse_err(origin, lineno, format!("unknown relation {}", fields[1])))?;
        distributions
            .entry((fields[0].to_string(), rel))
            .or_default()
            .insert(
                SynsetId::new(fields[2]),
                parse_f64(origin, lineno, fields[3])?,
            );
    }
    Ok(TrainedModel::SelPref(SelPref::from_distributions(
        distributions,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Params;
    use crate::corpus::{Corpus, TargetSpec};
    use crate::disambiguators::{Context, Disambiguator};
    use crate::features::FeatureVector;
    use crate::lkb::Lkb;

    fn expect_kind<'a>(model: &'a TrainedModel, kind: &str) -> &'a TrainedModel {
        assert_eq!(model.kind(), kind);
        model
    }

    #[test]
    fn mfs_counts_survive_the_round_trip() {
        let mut counts: BTreeMap<(String, Pos), BTreeMap<SenseId, usize>> = BTreeMap::new();
        counts
            .entry(("bank".into(), Pos::Noun))
            .or_default()
            .extend([(SenseId::new("bank.n.1"), 7), (SenseId::new("bank.n.2"), 2)]);
        let text = TrainedModel::Mfs(Mfs::from_counts(counts.clone())).to_text();
        let loaded = TrainedModel::parse(&text, "t").unwrap();
        match expect_kind(&loaded, "mfs") {
            TrainedModel::Mfs(model) => {
                let got: BTreeMap<_, _> = model
                    .counts()
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                assert_eq!(got, counts);
            }
            _ => unreachable!(),
        }
    }

    fn trained_dl() -> DlClassifier {
        let inv = "bank\tn\tbank.n.1\t1\tA\nbank\tn\tbank.n.2\t2\tB\n";
        let lkb = Lkb::parse(inv, "", "", "i", "t", "g").unwrap();
        let text = "\
d\t0\t0\tsavings\tsavings\tn\t-\t-\t-
d\t0\t1\tbank\tbank\tn\tbank.n.1\t-\t-

d\t1\t0\tmuddy\tmuddy\tn\t-\t-\t-
d\t1\t1\tbank\tbank\tn\tbank.n.2\t-\t-
";
        let corpus = Corpus::parse(text, "doc").unwrap();
        let mut params = Params::default();
        params.dl_default = true;
        let targets = TargetSpec::AllPolysemousNouns;
        let ctx = Context {
            lkb: &lkb,
            corpus: &corpus,
            params: &params,
            targets: &targets,
            seed: 0,
        };
        let train = corpus.instances(&lkb, &targets);
        let mut classifier = DlClassifier::new(ExtractorSet::Local);
        classifier.train(&ctx, &train).unwrap();
        classifier
    }

    #[test]
    fn dl_lists_round_trip_in_order_and_bit_exact() {
        let classifier = trained_dl();
        let text = TrainedModel::Dl(classifier).to_text();
        let loaded = TrainedModel::parse(&text, "t").unwrap();
        let TrainedModel::Dl(reloaded) = loaded else {
            unreachable!()
        };
        assert_eq!(reloaded.set(), ExtractorSet::Local);

        let original = trained_dl();
        let old: Vec<&DecisionListModel> = original.models().collect();
        let new: Vec<&DecisionListModel> = reloaded.models().collect();
        assert_eq!(old.len(), new.len());
        for (a, b) in old.iter().zip(&new) {
            assert_eq!(a, b);
            for (x, y) in a.entries.iter().zip(&b.entries) {
                assert!(x.weight.to_bits() == y.weight.to_bits());
            }
        }
        // Saving the reloaded model reproduces the bytes.
        assert_eq!(TrainedModel::Dl(reloaded).to_text(), text);
    }

    #[test]
    fn dl_entries_keep_untrained_weights_exactly() {
        let awkward = (5.1f64 / 0.1).ln();
        let model = DecisionListModel {
            lemma: "bank".into(),
            pos: Pos::Noun,
            entries: vec![DlEntry {
                kind: FeatureKind::SentenceBag,
                value: "money".into(),
                sense: SenseId::new("bank.n.1"),
                weight: awkward,
            }],
            default: None,
        };
        let text = TrainedModel::Dl(DlClassifier::from_models(ExtractorSet::Global, vec![model]))
            .to_text();
        let TrainedModel::Dl(loaded) = TrainedModel::parse(&text, "t").unwrap() else {
            unreachable!()
        };
        let entry = &loaded.models().next().unwrap().entries[0];
        assert_eq!(entry.weight.to_bits(), awkward.to_bits());
    }

    #[test]
    fn semclass_weights_and_classes_round_trip() {
        let map = ClassMap::parse("a.n.1\tX\na.n.2\tY\n", "c").unwrap();
        let mut weights: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        weights
            .entry("X".into())
            .or_default()
            .insert("money".into(), 0.123456789012345);
        let text =
            TrainedModel::SemClass(SemClass::from_weights(map.clone(), weights.clone())).to_text();
        let TrainedModel::SemClass(loaded) = TrainedModel::parse(&text, "t").unwrap() else {
            unreachable!()
        };
        assert_eq!(loaded.class_map(), &map);
        assert_eq!(loaded.weights(), &weights);
    }

    #[test]
    fn selpref_distributions_round_trip() {
        let mut dist: BTreeMap<(String, Rel), BTreeMap<SynsetId, f64>> = BTreeMap::new();
        dist.entry(("eat".into(), Rel::Subject))
            .or_default()
            .extend([
                (SynsetId::new("PERSON"), 0.55),
                (SynsetId::new("ANIMAL"), 0.45),
            ]);
        dist.entry(("throw".into(), Rel::Object))
            .or_default()
            .insert(SynsetId::new("ROCK"), 1.0);
        let text = TrainedModel::SelPref(SelPref::from_distributions(dist.clone())).to_text();
        let TrainedModel::SelPref(loaded) = TrainedModel::parse(&text, "t").unwrap() else {
            unreachable!()
        };
        let got: BTreeMap<_, _> = loaded
            .distributions()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        assert_eq!(got, dist);
    }

    #[test]
    fn loaded_dl_answers_like_the_original() {
        let classifier = trained_dl();
        let mut probe = FeatureVector::new();
        probe.push(crate::features::Feature::new(
            FeatureKind::Ngram {
                unit: crate::features::Unit::Lemma,
                n: 2,
                start: -1,
            },
            "savings bank",
        ));
        let direct = classifier
            .model_for("bank", &Pos::Noun)
            .unwrap()
            .apply(&probe)
            .unwrap();
        let text = TrainedModel::Dl(classifier).to_text();
        let TrainedModel::Dl(loaded) = TrainedModel::parse(&text, "t").unwrap() else {
            unreachable!()
        };
        let replayed = loaded
            .model_for("bank", &Pos::Noun)
            .unwrap()
            .apply(&probe)
            .unwrap();
        assert_eq!(direct, replayed);
    }

    #[test]
    fn malformed_headers_are_rejected() {
        assert!(matches!(
            TrainedModel::parse("", "t"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            TrainedModel::parse("#model\tmfs\t9\n", "t"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            TrainedModel::parse("#model\tsvm\t1\n", "t"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            TrainedModel::parse("not a model\n", "t"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn dl_files_need_a_set_and_sections() {
        let no_set = "#model\tdl\t1\n#list\tbank\tn\n";
        assert!(TrainedModel::parse(no_set, "t").is_err());
        let stray_entry = "#model\tdl\t1\n#set\tlocal\nsentence_bag_lemma\tx\ts.n.1\t1.0\n";
        assert!(TrainedModel::parse(stray_entry, "t").is_err());
        let fine = "#model\tdl\t1\n#set\tlocal\n";
        let TrainedModel::Dl(empty) = TrainedModel::parse(fine, "t").unwrap() else {
            unreachable!()
        };
        assert_eq!(empty.set(), ExtractorSet::Local);
        assert_eq!(empty.models().count(), 0);
    }

    #[test]
    fn files_save_and_load_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.tsv");
        let model = TrainedModel::Mfs(Mfs::from_counts(BTreeMap::new()));
        model.save(&path).unwrap();
        let loaded = TrainedModel::load(&path).unwrap();
        assert_eq!(loaded.kind(), "mfs");
    }
}
