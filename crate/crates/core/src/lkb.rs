//! Lexical knowledge base: sense inventory, hypernym taxonomy and glosses.
//!
//! The three inputs are plain tab-separated files:
//!
//! * inventory: `lemma<TAB>pos<TAB>sense_id<TAB>rank<TAB>synset_id`, one
//!   sense per line, lines starting with `#` ignored;
//! * taxonomy: `synset_id<TAB>hypernym_synset_id`, one edge per line;
//! * glosses: `synset_id<TAB>space-separated lemmas` (already lemmatized,
//!   lowercased and stopword-free).
//!
//! Loading validates everything up front: rank sequences must be contiguous
//! per (lemma, pos), sense ids unique, and the hypernym relation acyclic.
//! After a successful load the structure is immutable, so queries can run
//! concurrently without further checks.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::RwLock;

use crate::error::{Error, Result};

/// Opaque identifier of one word sense, unique across the inventory.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SenseId(String);

impl SenseId {
    pub fn new(id: impl Into<String>) -> Self {
        SenseId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SenseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Opaque identifier of a synset (taxonomy node).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SynsetId(String);

impl SynsetId {
    pub fn new(id: impl Into<String>) -> Self {
        SynsetId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Part-of-speech tag. The inventory only admits the four content
/// categories; corpus tokens may carry anything, preserved verbatim in
/// `Other` so POS-valued features stay faithful to the data.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Other(String),
}

impl Pos {
    pub fn parse(tag: &str) -> Pos {
        match tag.to_ascii_lowercase().as_str() {
            "n" | "noun" => Pos::Noun,
            "v" | "verb" => Pos::Verb,
            "a" | "adj" => Pos::Adj,
            "r" | "adv" => Pos::Adv,
            _ => Pos::Other(tag.to_string()),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            Pos::Noun => "n",
            Pos::Verb => "v",
            Pos::Adj => "a",
            Pos::Adv => "r",
            Pos::Other(tag) => tag,
        }
    }

    /// Noun, verb, adjective or adverb.
    pub fn is_content(&self) -> bool {
        !matches!(self, Pos::Other(_))
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One sense of a lemma. `rank` is the frequency-based position in the
/// inventory's ordering, 1 being the most frequent sense.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sense {
    pub id: SenseId,
    pub lemma: String,
    pub pos: Pos,
    pub rank: u32,
    pub synset: SynsetId,
}

/// A taxonomy node: member senses, gloss lemmas and hypernym links.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Synset {
    pub members: BTreeSet<SenseId>,
    pub gloss: Vec<String>,
    pub hypernyms: BTreeSet<SynsetId>,
}

/// The loaded knowledge base. Immutable after construction.
#[derive(Debug)]
pub struct Lkb {
    senses: BTreeMap<SenseId, Sense>,
    by_lemma_pos: BTreeMap<(String, Pos), Vec<SenseId>>,
    synsets: BTreeMap<SynsetId, Synset>,
    hyponyms: BTreeMap<SynsetId, Vec<SynsetId>>,
    mean_branching: f64,
    descendant_cache: RwLock<HashMap<SynsetId, usize>>,
}

impl Lkb {
    /// Load and validate the knowledge base from the three column files.
    pub fn load(inventory: &Path, taxonomy: &Path, glosses: &Path) -> Result<Lkb> {
        let inv = fs::read_to_string(inventory)?;
        let tax = fs::read_to_string(taxonomy)?;
        let glo = fs::read_to_string(glosses)?;
        Lkb::parse(
            &inv,
            &tax,
            &glo,
            &inventory.display().to_string(),
            &taxonomy.display().to_string(),
            &glosses.display().to_string(),
        )
    }

    /// Parse the knowledge base from in-memory file contents. The origin
    /// labels name the inputs in error messages.
    pub fn parse(
        inventory: &str,
        taxonomy: &str,
        glosses: &str,
        inv_origin: &str,
        tax_origin: &str,
        gloss_origin: &str,
    ) -> Result<Lkb> {
        let mut senses: BTreeMap<SenseId, Sense> = BTreeMap::new();
        let mut synsets: BTreeMap<SynsetId, Synset> = BTreeMap::new();

        for (idx, line) in inventory.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 5 {
                return Err(parse_err(
                    inv_origin,
                    lineno,
                    format!("expected 5 tab-separated fields, got {}", fields.len()),
                ));
            }
            let lemma = fields[0].trim();
            if lemma.is_empty() {
                return Err(parse_err(inv_origin, lineno, "empty lemma".into()));
            }
            let pos = Pos::parse(fields[1]);
            if !pos.is_content() {
                return Err(parse_err(
                    inv_origin,
                    lineno,
                    format!("inventory pos must be one of n/v/a/r, got `{}`", fields[1]),
                ));
            }
            let id = fields[2].trim();
            if id.is_empty() {
                return Err(parse_err(inv_origin, lineno, "empty sense id".into()));
            }
            let rank: u32 = fields[3]
                .parse()
                .map_err(|_| parse_err(inv_origin, lineno, format!("bad rank `{}`", fields[3])))?;
            if rank == 0 {
                return Err(parse_err(inv_origin, lineno, "rank must be >= 1".into()));
            }
            let synset = SynsetId::new(fields[4].trim());
            if synset.as_str().is_empty() {
                return Err(parse_err(inv_origin, lineno, "empty synset id".into()));
            }

            let sense = Sense {
                id: SenseId::new(id),
                lemma: lemma.to_string(),
                pos,
                rank,
                synset: synset.clone(),
            };
            if senses.contains_key(&sense.id) {
                return Err(Error::DuplicateSense(id.to_string()));
            }
            synsets
                .entry(synset)
                .or_default()
                .members
                .insert(sense.id.clone());
            senses.insert(sense.id.clone(), sense);
        }

        for (idx, line) in taxonomy.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(parse_err(
                    tax_origin,
                    lineno,
                    format!("expected 2 tab-separated fields, got {}", fields.len()),
                ));
            }
            let child = SynsetId::new(fields[0].trim());
            let parent = SynsetId::new(fields[1].trim());
            if child.as_str().is_empty() || parent.as_str().is_empty() {
                return Err(parse_err(tax_origin, lineno, "empty synset id".into()));
            }
            synsets.entry(parent.clone()).or_default();
            synsets.entry(child).or_default().hypernyms.insert(parent);
        }

        for (idx, line) in glosses.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (id_part, gloss_part) = match line.split_once('\t') {
                Some((id, rest)) => (id, rest),
                None => (line, ""),
            };
            let id = SynsetId::new(id_part.trim());
            if id.as_str().is_empty() {
                return Err(parse_err(gloss_origin, lineno, "empty synset id".into()));
            }
            let entry = synsets.entry(id.clone()).or_default();
            if !entry.gloss.is_empty() {
                return Err(parse_err(
                    gloss_origin,
                    lineno,
                    format!("duplicate gloss for synset `{id}`"),
                ));
            }
            entry.gloss = gloss_part.split_whitespace().map(str::to_string).collect();
        }

        // Rank sequences must be exactly 1..=n per (lemma, pos).
        let mut by_lemma_pos: BTreeMap<(String, Pos), Vec<SenseId>> = BTreeMap::new();
        for sense in senses.values() {
            by_lemma_pos
                .entry((sense.lemma.clone(), sense.pos.clone()))
                .or_default()
                .push(sense.id.clone());
        }
        for ((lemma, pos), ids) in by_lemma_pos.iter_mut() {
            ids.sort_by_key(|id| senses[id].rank);
            let ranks: Vec<u32> = ids.iter().map(|id| senses[id].rank).collect();
            let contiguous = ranks.iter().enumerate().all(|(i, &r)| r as usize == i + 1);
            if !contiguous {
                return Err(Error::NonContiguousRanks {
                    lemma: lemma.clone(),
                    pos: pos.as_str().to_string(),
                    expected: ranks.len(),
                    found: ranks,
                });
            }
        }

        check_acyclic(&synsets)?;

        let mut hyponyms: BTreeMap<SynsetId, Vec<SynsetId>> = BTreeMap::new();
        let mut edges = 0usize;
        for (id, synset) in &synsets {
            for parent in &synset.hypernyms {
                hyponyms.entry(parent.clone()).or_default().push(id.clone());
                edges += 1;
            }
        }
        for children in hyponyms.values_mut() {
            children.sort();
        }
        let non_leaf = hyponyms.len();
        let mean_branching = if non_leaf == 0 {
            0.0
        } else {
            edges as f64 / non_leaf as f64
        };

        Ok(Lkb {
            senses,
            by_lemma_pos,
            synsets,
            hyponyms,
            mean_branching,
            descendant_cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn sense(&self, id: &SenseId) -> Option<&Sense> {
        self.senses.get(id)
    }

    pub fn synset(&self, id: &SynsetId) -> Option<&Synset> {
        self.synsets.get(id)
    }

    pub fn senses(&self) -> impl Iterator<Item = &Sense> {
        self.senses.values()
    }

    pub fn synset_ids(&self) -> impl Iterator<Item = &SynsetId> {
        self.synsets.keys()
    }

    /// All senses of (lemma, pos), most frequent first. Empty when the
    /// lemma is unknown.
    pub fn senses_of(&self, lemma: &str, pos: &Pos) -> Vec<&Sense> {
        match self.by_lemma_pos.get(&(lemma.to_string(), pos.clone())) {
            Some(ids) => ids.iter().map(|id| &self.senses[id]).collect(),
            None => Vec::new(),
        }
    }

    /// The rank-1 sense of (lemma, pos), if the lemma is known.
    pub fn first_sense(&self, lemma: &str, pos: &Pos) -> Option<&Sense> {
        self.senses_of(lemma, pos).into_iter().next()
    }

    pub fn is_polysemous(&self, lemma: &str, pos: &Pos) -> bool {
        self.by_lemma_pos
            .get(&(lemma.to_string(), pos.clone()))
            .map(|ids| ids.len() > 1)
            .unwrap_or(false)
    }

    /// Mean number of direct hyponyms per non-leaf synset, fixed at load.
    pub fn mean_branching(&self) -> f64 {
        self.mean_branching
    }

    /// Every synset reachable from `s` along hypernym edges, excluding
    /// `s` itself.
    pub fn hypernym_closure(&self, s: &SynsetId) -> Result<BTreeSet<SynsetId>> {
        if !self.synsets.contains_key(s) {
            return Err(Error::UnknownSynset(s.as_str().to_string()));
        }
        let mut seen: BTreeSet<SynsetId> = BTreeSet::new();
        let mut queue: VecDeque<&SynsetId> = VecDeque::new();
        queue.push_back(s);
        while let Some(node) = queue.pop_front() {
            for parent in &self.synsets[node].hypernyms {
                if seen.insert(parent.clone()) {
                    queue.push_back(parent);
                }
            }
        }
        Ok(seen)
    }

    /// Number of synsets in the subtree rooted at `s`, counting `s` and
    /// counting each node once even when several hyponym paths reach it.
    pub fn descendants(&self, s: &SynsetId) -> Result<usize> {
        if !self.synsets.contains_key(s) {
            return Err(Error::UnknownSynset(s.as_str().to_string()));
        }
        if let Some(&count) = self.descendant_cache.read().unwrap().get(s) {
            return Ok(count);
        }
        let mut seen: BTreeSet<&SynsetId> = BTreeSet::new();
        let mut queue: VecDeque<&SynsetId> = VecDeque::new();
        seen.insert(s);
        queue.push_back(s);
        while let Some(node) = queue.pop_front() {
            if let Some(children) = self.hyponyms.get(node) {
                for child in children {
                    if seen.insert(child) {
                        queue.push_back(child);
                    }
                }
            }
        }
        let count = seen.len();
        self.descendant_cache
            .write()
            .unwrap()
            .insert(s.clone(), count);
        Ok(count)
    }
}

fn parse_err(origin: &str, line: usize, msg: String) -> Error {
    Error::Parse {
        origin: origin.to_string(),
        line,
        msg,
    }
}

/// Kahn's algorithm over hypernym edges; on failure, walks the leftover
/// nodes to report one concrete cycle.
fn check_acyclic(synsets: &BTreeMap<SynsetId, Synset>) -> Result<()> {
    let mut out_degree: BTreeMap<&SynsetId, usize> = BTreeMap::new();
    let mut incoming: BTreeMap<&SynsetId, Vec<&SynsetId>> = BTreeMap::new();
    for (id, synset) in synsets {
        out_degree.entry(id).or_insert(0);
        for parent in &synset.hypernyms {
            *out_degree.entry(id).or_insert(0) += 1;
            incoming.entry(parent).or_default().push(id);
        }
    }

    let mut queue: VecDeque<&SynsetId> = out_degree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&id, _)| id)
        .collect();
    let mut resolved = 0usize;
    while let Some(node) = queue.pop_front() {
        resolved += 1;
        if let Some(children) = incoming.get(node) {
            for &child in children {
                let d = out_degree.get_mut(child).unwrap();
                *d -= 1;
                if *d == 0 {
                    queue.push_back(child);
                }
            }
        }
    }
    if resolved == synsets.len() {
        return Ok(());
    }

    // Some nodes never resolved; follow hypernym edges among them until a
    // node repeats.
    let stuck: BTreeSet<&SynsetId> = out_degree
        .iter()
        .filter(|(_, &d)| d > 0)
        .map(|(&id, _)| id)
        .collect();
    let start = *stuck.iter().next().expect("cycle exists");
    let mut path: Vec<&SynsetId> = vec![start];
    let mut seen: BTreeMap<&SynsetId, usize> = BTreeMap::new();
    seen.insert(start, 0);
    let mut current = start;
    loop {
        let next = synsets[current]
            .hypernyms
            .iter()
            .find(|p| stuck.contains(p))
            .expect("stuck node keeps an edge into the stuck set");
        if let Some(&at) = seen.get(next) {
            let mut cycle: Vec<String> = path[at..]
                .iter()
                .map(|id| id.as_str().to_string())
                .collect();
            cycle.push(next.as_str().to_string());
            return Err(Error::TaxonomyCycle { cycle });
        }
        seen.insert(next, path.len());
        path.push(next);
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INV: &str = "\
bank\tn\tbank.n.1\t1\tBANK_FIN
bank\tn\tbank.n.2\t2\tBANK_RIVER
crane\tn\tcrane.n.1\t1\tCRANE_BIRD
crane\tn\tcrane.n.2\t2\tCRANE_MACHINE
# comment line
run\tv\trun.v.1\t1\tRUN_MOVE
";

    const TAX: &str = "\
BANK_FIN\tINSTITUTION
BANK_RIVER\tLOCATION
CRANE_BIRD\tBIRD
CRANE_MACHINE\tMACHINE
BIRD\tANIMAL
ANIMAL\tENTITY
MACHINE\tARTIFACT
ARTIFACT\tENTITY
INSTITUTION\tENTITY
LOCATION\tENTITY
";

    const GLOSS: &str = "\
BANK_FIN\tinstitution money deposit
BANK_RIVER\tland river water
CRANE_BIRD\tbird long neck
";

    fn small() -> Lkb {
        Lkb::parse(INV, TAX, GLOSS, "inv", "tax", "gloss").unwrap()
    }

    #[test]
    fn senses_come_back_in_rank_order() {
        let lkb = small();
        let senses = lkb.senses_of("bank", &Pos::Noun);
        let ranks: Vec<u32> = senses.iter().map(|s| s.rank).collect();
        assert_eq!(ranks, vec![1, 2]);
        assert_eq!(senses[0].id.as_str(), "bank.n.1");
        assert_eq!(
            lkb.first_sense("bank", &Pos::Noun).unwrap().id.as_str(),
            "bank.n.1"
        );
        assert!(lkb.senses_of("bank", &Pos::Verb).is_empty());
        assert!(lkb.senses_of("unknown", &Pos::Noun).is_empty());
        assert!(lkb.is_polysemous("bank", &Pos::Noun));
        assert!(!lkb.is_polysemous("run", &Pos::Verb));
    }

    #[test]
    fn closure_excludes_self_and_follows_all_paths() {
        let lkb = small();
        let closure = lkb.hypernym_closure(&SynsetId::new("CRANE_BIRD")).unwrap();
        let want: BTreeSet<SynsetId> = ["BIRD", "ANIMAL", "ENTITY"]
            .iter()
            .map(|s| SynsetId::new(*s))
            .collect();
        assert_eq!(closure, want);
        assert!(lkb
            .hypernym_closure(&SynsetId::new("ENTITY"))
            .unwrap()
            .is_empty());
        assert!(lkb.hypernym_closure(&SynsetId::new("NOPE")).is_err());
    }

    #[test]
    fn descendant_counts_include_the_root() {
        let lkb = small();
        let one = |id: &str| lkb.descendants(&SynsetId::new(id)).unwrap();
        assert_eq!(one("CRANE_BIRD"), 1);
        assert_eq!(one("BIRD"), 2);
        assert_eq!(one("ANIMAL"), 3);
        // ENTITY dominates everything except RUN_MOVE, which has no edge.
        assert_eq!(one("ENTITY"), lkb.synset_ids().count() - 1);
        // Second call hits the cache and must agree.
        assert_eq!(one("ANIMAL"), 3);
    }

    #[test]
    fn diamond_counts_each_node_once() {
        let tax = "B\tTOP\nC\tTOP\nD\tB\nD\tC\n";
        let lkb = Lkb::parse("", tax, "", "inv", "tax", "gloss").unwrap();
        assert_eq!(lkb.descendants(&SynsetId::new("TOP")).unwrap(), 4);
        let closure = lkb.hypernym_closure(&SynsetId::new("D")).unwrap();
        assert_eq!(closure.len(), 3);
    }

    #[test]
    fn mean_branching_is_edges_over_non_leaves() {
        // TOP has two children, B has one: (2 + 1) / 2 non-leaf nodes.
        let tax = "B\tTOP\nC\tTOP\nD\tB\n";
        let lkb = Lkb::parse("", tax, "", "inv", "tax", "gloss").unwrap();
        assert!((lkb.mean_branching() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cycles_are_rejected_with_a_concrete_path() {
        let tax = "A\tB\nB\tC\nC\tA\nX\tA\n";
        let err = Lkb::parse("", tax, "", "inv", "tax", "gloss").unwrap_err();
        match err {
            Error::TaxonomyCycle { cycle } => {
                assert!(cycle.len() >= 2);
                assert_eq!(cycle.first(), cycle.last());
                for pair in cycle.windows(2) {
                    assert!(["A", "B", "C"].contains(&pair[0].as_str()));
                }
            }
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let err = Lkb::parse("", "A\tA\n", "", "inv", "tax", "gloss").unwrap_err();
        assert!(matches!(err, Error::TaxonomyCycle { .. }));
    }

    #[test]
    fn duplicate_sense_ids_are_rejected() {
        let inv = "a\tn\ts1\t1\tX\nb\tn\ts1\t1\tY\n";
        let err = Lkb::parse(inv, "", "", "inv", "tax", "gloss").unwrap_err();
        assert!(matches!(err, Error::DuplicateSense(id) if id == "s1"));
    }

    #[test]
    fn rank_gaps_and_repeats_are_rejected() {
        for inv in [
            "a\tn\ts1\t1\tX\na\tn\ts2\t3\tY\n",
            "a\tn\ts1\t2\tX\n",
            "a\tn\ts1\t1\tX\na\tn\ts2\t1\tY\n",
        ] {
            let err = Lkb::parse(inv, "", "", "inv", "tax", "gloss").unwrap_err();
            assert!(
                matches!(err, Error::NonContiguousRanks { .. }),
                "input {inv:?} gave {err:?}"
            );
        }
        // Same surface form under different pos tags ranks independently.
        let inv = "a\tn\ts1\t1\tX\na\tv\ts2\t1\tY\n";
        assert!(Lkb::parse(inv, "", "", "inv", "tax", "gloss").is_ok());
    }

    #[test]
    fn malformed_lines_name_origin_and_line() {
        let inv = "a\tn\ts1\t1\tX\na\tn\tonly-three\t9\n";
        let err = Lkb::parse(inv, "", "", "senses.tsv", "tax", "gloss").unwrap_err();
        match err {
            Error::Parse { origin, line, .. } => {
                assert_eq!(origin, "senses.tsv");
                assert_eq!(line, 2);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let err = Lkb::parse("a\tx\ts1\t1\tX\n", "", "", "inv", "tax", "gloss").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = Lkb::parse("a\tn\ts1\tzero\tX\n", "", "", "inv", "tax", "gloss").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn duplicate_gloss_is_rejected() {
        let gloss = "X\ta b\nX\tc\n";
        let err = Lkb::parse("", "", gloss, "inv", "tax", "gloss").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn gloss_without_text_is_empty_not_an_error() {
        let lkb = small();
        // BANK_FIN has a gloss, INSTITUTION does not.
        assert_eq!(
            lkb.synset(&SynsetId::new("BANK_FIN")).unwrap().gloss,
            vec!["institution", "money", "deposit"]
        );
        assert!(lkb
            .synset(&SynsetId::new("INSTITUTION"))
            .unwrap()
            .gloss
            .is_empty());
    }

    #[test]
    fn pos_parse_round_trips_canonical_tags() {
        for (tag, want) in [
            ("n", Pos::Noun),
            ("NOUN", Pos::Noun),
            ("v", Pos::Verb),
            ("a", Pos::Adj),
            ("adj", Pos::Adj),
            ("r", Pos::Adv),
            ("adv", Pos::Adv),
        ] {
            assert_eq!(Pos::parse(tag), want);
        }
        assert_eq!(Pos::parse("DT"), Pos::Other("DT".into()));
        assert_eq!(Pos::parse("DT").as_str(), "DT");
        assert!(!Pos::parse("DT").is_content());
    }
}
