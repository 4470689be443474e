//! Input data model: tuple corpora, seed specifications, case-count series.
//!
//! A tuple corpus is the three-dimensional observation set of
//! `{word, location, time}: count` records aggregated from news articles,
//! together with word/location indices and a discrete time horizon. All
//! types here are immutable after construction and safe to share across
//! threads.
//!
//! File formats:
//! - corpus: JSONL, one object per record with keys `word`, `country`,
//!   `state`, `t`, `count`; an optional first line `{"_header":true,"T":n}`
//!   extends the horizon past the last observed time point.
//! - seed spec: a JSON object mapping topic name to an array of seed words.
//! - case counts: CSV with header `time_index,value`; extra columns (such
//!   as a calendar date) are ignored.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Index of a word in a [`Vocabulary`].
pub type WordId = usize;
/// Index of a (country, state) pair in a [`LocationSet`].
pub type LocationId = usize;
/// Discrete time point in `[0, T)`.
pub type TimeIndex = usize;

/// Ordered set of unique lowercase words with id lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, WordId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from an iterator, keeping first-appearance order.
    pub fn from_words<I: IntoIterator<Item = S>, S: Into<String>>(words: I) -> Self {
        let mut v = Self::new();
        for w in words {
            v.intern(&w.into());
        }
        v
    }

    /// Return the id for `word`, inserting it if unseen.
    pub fn intern(&mut self, word: &str) -> WordId {
        if let Some(&id) = self.index.get(word) {
            return id;
        }
        let id = self.words.len();
        self.words.push(word.to_string());
        self.index.insert(word.to_string(), id);
        id
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Ordered set of (country, state) location names with id lookup.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LocationSet {
    names: Vec<(String, String)>,
    index: HashMap<(String, String), LocationId>,
}

impl LocationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, String)>>(pairs: I) -> Self {
        let mut l = Self::new();
        for (c, s) in pairs {
            l.intern(&c, &s);
        }
        l
    }

    pub fn intern(&mut self, country: &str, state: &str) -> LocationId {
        let key = (country.to_string(), state.to_string());
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.names.len();
        self.names.push(key.clone());
        self.index.insert(key, id);
        id
    }

    pub fn id(&self, country: &str, state: &str) -> Option<LocationId> {
        self.index
            .get(&(country.to_string(), state.to_string()))
            .copied()
    }

    pub fn name(&self, id: LocationId) -> (&str, &str) {
        let (c, s) = &self.names[id];
        (c, s)
    }

    pub fn names(&self) -> &[(String, String)] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// One aggregated `{word, location, time}: count` observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TupleRecord {
    pub word_id: WordId,
    pub location_id: LocationId,
    pub time_index: TimeIndex,
    /// Number of articles mentioning the word at this location and time.
    pub count: u32,
}

/// Fully indexed tuple corpus over `[0, T)` discrete time points.
#[derive(Debug, Clone)]
pub struct TupleCorpus {
    vocabulary: Vocabulary,
    locations: LocationSet,
    time_horizon: usize,
    records: Vec<TupleRecord>,
    /// Record indices grouped by location id; a partition of `records`.
    per_location: Vec<Vec<usize>>,
}

impl TupleCorpus {
    /// Assemble a corpus from parts, validating index ranges and the
    /// no-duplicate-triple rule.
    pub fn new(
        vocabulary: Vocabulary,
        locations: LocationSet,
        time_horizon: usize,
        records: Vec<TupleRecord>,
    ) -> Result<Self> {
        let mut seen = HashMap::new();
        for (i, r) in records.iter().enumerate() {
            if r.count == 0 {
                return Err(Error::Data(format!("record {i}: count must be >= 1")));
            }
            if r.word_id >= vocabulary.len() {
                return Err(Error::Data(format!(
                    "record {i}: word id {} out of range (V={})",
                    r.word_id,
                    vocabulary.len()
                )));
            }
            if r.location_id >= locations.len() {
                return Err(Error::Data(format!(
                    "record {i}: location id {} out of range (L={})",
                    r.location_id,
                    locations.len()
                )));
            }
            if r.time_index >= time_horizon {
                return Err(Error::Data(format!(
                    "record {i}: time index {} out of range (T={time_horizon})",
                    r.time_index
                )));
            }
            if let Some(prev) = seen.insert((r.word_id, r.location_id, r.time_index), i) {
                return Err(Error::Data(format!(
                    "duplicate (word, location, time) triple at records {prev} and {i}; counts must be pre-aggregated"
                )));
            }
        }
        let mut per_location = vec![Vec::new(); locations.len()];
        for (i, r) in records.iter().enumerate() {
            per_location[r.location_id].push(i);
        }
        Ok(Self {
            vocabulary,
            locations,
            time_horizon,
            records,
            per_location,
        })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn locations(&self) -> &LocationSet {
        &self.locations
    }

    /// T, the number of discrete time points.
    pub fn time_horizon(&self) -> usize {
        self.time_horizon
    }

    pub fn records(&self) -> &[TupleRecord] {
        &self.records
    }

    /// Record indices belonging to location `l`.
    pub fn records_at(&self, l: LocationId) -> &[usize] {
        &self.per_location[l]
    }

    /// Total article-mention count, which is also the number of unit
    /// tokens the sampler expands this corpus into.
    pub fn token_total(&self) -> u64 {
        self.records.iter().map(|r| u64::from(r.count)).sum()
    }

    /// Restrict the corpus to records with `time_index <= t_max`.
    ///
    /// The vocabulary and location set are rebuilt from the retained
    /// records, so the result depends only on data up to `t_max`; this is
    /// what makes per-horizon re-inference leak-free.
    pub fn truncate(&self, t_max: TimeIndex) -> Result<Self> {
        let mut vocabulary = Vocabulary::new();
        let mut locations = LocationSet::new();
        let mut records = Vec::new();
        for r in &self.records {
            if r.time_index > t_max {
                continue;
            }
            let (c, s) = self.locations.name(r.location_id);
            records.push(TupleRecord {
                word_id: vocabulary.intern(self.vocabulary.word(r.word_id)),
                location_id: locations.intern(c, s),
                time_index: r.time_index,
                count: r.count,
            });
        }
        Self::new(vocabulary, locations, t_max + 1, records)
    }

    /// Stable fingerprint used as a cache key; not persisted.
    pub fn fingerprint(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.time_horizon.hash(&mut h);
        for w in self.vocabulary.words() {
            w.hash(&mut h);
        }
        for (c, s) in self.locations.names() {
            c.hash(&mut h);
            s.hash(&mut h);
        }
        for r in &self.records {
            (r.word_id, r.location_id, r.time_index, r.count).hash(&mut h);
        }
        h.finish()
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct RawRecord {
    word: String,
    country: String,
    state: String,
    t: usize,
    count: u32,
}

#[derive(Debug, Deserialize)]
struct RawHeader {
    #[serde(rename = "_header")]
    _header: bool,
    #[serde(rename = "T")]
    t: usize,
}

/// Load a tuple corpus from JSONL.
///
/// T is one past the largest observed time index unless the optional
/// header declares a larger horizon (covering trailing news-silent time
/// points). Duplicate `(word, location, t)` triples are rejected: corpus
/// files are expected to arrive pre-aggregated.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<TupleCorpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut vocabulary = Vocabulary::new();
    let mut locations = LocationSet::new();
    let mut records: Vec<TupleRecord> = Vec::new();
    let mut header_t: Option<usize> = None;
    let mut max_t: Option<usize> = None;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        if lineno == 1 {
            if let Ok(h) = serde_json::from_str::<RawHeader>(&line) {
                header_t = Some(h.t);
                continue;
            }
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            message: e.to_string(),
        })?;
        if raw.count == 0 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                message: "count must be >= 1".into(),
            });
        }
        let word_id = vocabulary.intern(&raw.word);
        let location_id = locations.intern(&raw.country, &raw.state);
        max_t = Some(max_t.map_or(raw.t, |m: usize| m.max(raw.t)));
        records.push(TupleRecord {
            word_id,
            location_id,
            time_index: raw.t,
            count: raw.count,
        });
    }

    let time_horizon = match (header_t, max_t) {
        (Some(ht), Some(mt)) => {
            if mt >= ht {
                return Err(Error::Data(format!(
                    "record time index {mt} out of range: header declares T={ht}"
                )));
            }
            ht
        }
        (Some(ht), None) => ht,
        (None, Some(mt)) => mt + 1,
        (None, None) => 0,
    };

    TupleCorpus::new(vocabulary, locations, time_horizon, records).map_err(|e| match e {
        Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Write a corpus as canonical JSONL (header line first, then records in
/// stored order). `load_corpus` round-trips this exactly.
pub fn save_corpus(corpus: &TupleCorpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let header = serde_json::json!({"_header": true, "T": corpus.time_horizon()});
    writeln!(w, "{header}").map_err(|e| Error::io(path, e))?;
    for r in corpus.records() {
        let (country, state) = corpus.locations().name(r.location_id);
        let raw = RawRecord {
            word: corpus.vocabulary().word(r.word_id).to_string(),
            country: country.to_string(),
            state: state.to_string(),
            t: r.time_index,
            count: r.count,
        };
        let line = serde_json::to_string(&raw).map_err(|e| Error::Data(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One named topic with its seed-word list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedTopic {
    pub name: String,
    pub words: Vec<String>,
}

/// Per-topic seed-word sets supplying prior supervision.
///
/// Seed words are stored as raw strings; resolution against a vocabulary
/// happens where a corpus is at hand, so a truncated corpus resolves its
/// own view of the seeds. Words absent from a vocabulary are retained (a
/// ghost seed slot with zero occurrences contributes nothing to the
/// priors) rather than rejected, because real seed lists include rare
/// terms that may not appear in a short corpus prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedSpec {
    topics: Vec<SeedTopic>,
}

impl SeedSpec {
    /// Validate topic structure: K >= 1, no empty seed set, no word in
    /// two topics.
    pub fn new(topics: Vec<SeedTopic>) -> Result<Self> {
        if topics.is_empty() {
            return Err(Error::Data("seed spec must define at least one topic".into()));
        }
        let mut owner: HashMap<&str, &str> = HashMap::new();
        for topic in &topics {
            if topic.words.is_empty() {
                return Err(Error::Data(format!(
                    "topic {:?} has an empty seed set",
                    topic.name
                )));
            }
            for w in &topic.words {
                if let Some(prev) = owner.insert(w.as_str(), topic.name.as_str()) {
                    return Err(Error::Data(format!(
                        "seed word {w:?} claimed by two topics ({prev:?} and {:?})",
                        topic.name
                    )));
                }
            }
        }
        Ok(Self { topics })
    }

    pub fn topics(&self) -> &[SeedTopic] {
        &self.topics
    }

    /// K, the number of topics.
    pub fn num_topics(&self) -> usize {
        self.topics.len()
    }

    /// Per-topic resolved ids; `None` marks a seed word absent from the
    /// vocabulary (kept as an inert slot).
    pub fn resolve(&self, vocab: &Vocabulary) -> Vec<Vec<Option<WordId>>> {
        self.topics
            .iter()
            .map(|t| t.words.iter().map(|w| vocab.id(w)).collect())
            .collect()
    }

    /// Seed words not present in `vocab`, as (topic name, word) pairs.
    pub fn unresolved_words<'a>(&'a self, vocab: &Vocabulary) -> Vec<(&'a str, &'a str)> {
        let mut out = Vec::new();
        for t in &self.topics {
            for w in &t.words {
                if vocab.id(w).is_none() {
                    out.push((t.name.as_str(), w.as_str()));
                }
            }
        }
        out
    }
}

/// Load a seed spec from a JSON object `{topic name: [seed words]}`.
/// Topic order follows the file. `vocab` is used only to validate and
/// report unresolved words; they are kept, not rejected.
pub fn load_seed_spec(path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<SeedSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let map: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?;
    let mut topics = Vec::new();
    for (name, value) in map {
        let words: Vec<String> =
            serde_json::from_value(value).map_err(|e| Error::Data(format!(
                "topic {name:?}: expected an array of seed words: {e}"
            )))?;
        topics.push(SeedTopic { name, words });
    }
    let spec = SeedSpec::new(topics)?;
    // Resolution is a validation pass here; unresolved words are legal.
    let _ = spec.resolve(vocab);
    Ok(spec)
}

/// Write a seed spec as the JSON object format read by `load_seed_spec`.
pub fn save_seed_spec(spec: &SeedSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut map = serde_json::Map::new();
    for t in spec.topics() {
        map.insert(
            t.name.clone(),
            serde_json::Value::from(t.words.clone()),
        );
    }
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(map))
        .map_err(|e| Error::Data(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reporting granularity of an official case-count series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Weekly,
    Monthly,
}

impl std::str::FromStr for Granularity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "weekly" | "week" => Ok(Granularity::Weekly),
            "monthly" | "month" => Ok(Granularity::Monthly),
            other => Err(Error::Config(format!(
                "unknown granularity {other:?} (expected weekly or monthly)"
            ))),
        }
    }
}

/// Official case counts for one disease, indexed by time point.
///
/// Calendar dates are mapped to integer time indices upstream; the core
/// is granularity-agnostic and the label is carried only for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseCountSeries {
    pub disease: String,
    pub granularity: Granularity,
    values: Vec<f64>,
}

impl CaseCountSeries {
    pub fn new(disease: impl Into<String>, granularity: Granularity, values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Data(format!(
                "case counts must be finite and non-negative, got {v}"
            )));
        }
        Ok(Self {
            disease: disease.into(),
            granularity,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Load a case-count series from CSV with header `time_index,value`.
/// Rows must cover `0..n` contiguously (in any order); other columns are
/// ignored.
pub fn load_case_counts(
    path: impl AsRef<Path>,
    disease: impl Into<String>,
    granularity: Granularity,
) -> Result<CaseCountSeries> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Data(format!(
        "{}: {e}",
        path.display()
    )))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?
        .clone();
    let t_col = headers
        .iter()
        .position(|h| h.trim() == "time_index")
        .ok_or_else(|| Error::Data(format!("{}: missing time_index column", path.display())))?;
    let v_col = headers
        .iter()
        .position(|h| h.trim() == "value")
        .ok_or_else(|| Error::Data(format!("{}: missing value column", path.display())))?;

    let mut rows: Vec<(usize, f64)> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?;
        let parse = |col: usize, what: &str| -> Result<&str> {
            rec.get(col).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: format!("missing {what} field"),
            })
        };
        let t: usize = parse(t_col, "time_index")?
            .trim()
            .parse()
            .map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: format!("bad time_index: {e}"),
            })?;
        let v: f64 = parse(v_col, "value")?.trim().parse().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: format!("bad value: {e}"),
        })?;
        rows.push((t, v));
    }
    rows.sort_by_key(|(t, _)| *t);
    let mut values = Vec::with_capacity(rows.len());
    for (expected, (t, v)) in rows.into_iter().enumerate() {
        if t != expected {
            return Err(Error::Data(format!(
                "{}: time indices must cover 0..n contiguously (missing or duplicate index {expected})",
                path.display()
            )));
        }
        values.push(v);
    }
    CaseCountSeries::new(disease, granularity, values)
}

/// Write a series in the CSV schema read by `load_case_counts`.
pub fn save_case_counts(values: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Data(format!(
        "{}: {e}",
        path.display()
    )))?;
    w.write_record(["time_index", "value"])
        .map_err(|e| Error::Data(e.to_string()))?;
    for (t, v) in values.iter().enumerate() {
        w.write_record([t.to_string(), v.to_string()])
            .map_err(|e| Error::Data(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Lowercase, strip punctuation, drop stop words. Tokens are maximal
/// alphanumeric runs in document order. No lemmatization is performed:
/// inflected forms stay distinct.
pub fn tokenize_simple<S: AsRef<str>>(text: &str, stopwords: &[S]) -> Vec<String> {
    let lower = text.to_lowercase();
    lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .filter(|t| !stopwords.iter().any(|s| s.as_ref() == *t))
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    #[test]
    fn loads_single_record_line() {
        let f = write_lines(&[
            r#"{"word":"salmonella","country":"United States","state":"Kansas","t":39,"count":9}"#,
        ]);
        let corpus = load_corpus(f.path()).unwrap();
        assert_eq!(corpus.records().len(), 1);
        let r = corpus.records()[0];
        assert_eq!(r.count, 9);
        assert_eq!(r.time_index, 39);
        assert_eq!(corpus.vocabulary().word(r.word_id), "salmonella");
        assert_eq!(
            corpus.locations().name(r.location_id),
            ("United States", "Kansas")
        );
        assert_eq!(corpus.time_horizon(), 40);
    }

    #[test]
    fn empty_corpus_with_header() {
        let f = write_lines(&[r#"{"_header":true,"T":10}"#]);
        let corpus = load_corpus(f.path()).unwrap();
        assert_eq!(corpus.records().len(), 0);
        assert_eq!(corpus.time_horizon(), 10);
        assert_eq!(corpus.vocabulary().len(), 0);
    }

    #[test]
    fn duplicate_triple_rejected() {
        let f = write_lines(&[
            r#"{"word":"flu","country":"China","state":"Beijing","t":1,"count":2}"#,
            r#"{"word":"flu","country":"China","state":"Beijing","t":1,"count":3}"#,
        ]);
        let err = load_corpus(f.path()).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn header_shorter_than_data_is_out_of_range() {
        let f = write_lines(&[
            r#"{"_header":true,"T":3}"#,
            r#"{"word":"flu","country":"China","state":"Beijing","t":5,"count":1}"#,
        ]);
        let err = load_corpus(f.path()).unwrap_err();
        assert!(err.to_string().contains("out of range"), "{err}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let f = write_lines(&[
            r#"{"word":"flu","country":"China","state":"Beijing","t":1,"count":2}"#,
            r#"{"word": 12}"#,
        ]);
        match load_corpus(f.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn corpus_roundtrip_preserves_records() {
        let f = write_lines(&[
            r#"{"word":"dengue","country":"India","state":"Delhi","t":0,"count":4}"#,
            r#"{"word":"fever","country":"India","state":"Delhi","t":2,"count":1}"#,
            r#"{"word":"dengue","country":"India","state":"Goa","t":1,"count":2}"#,
        ]);
        let corpus = load_corpus(f.path()).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        save_corpus(&corpus, out.path()).unwrap();
        let again = load_corpus(out.path()).unwrap();
        assert_eq!(corpus.records(), again.records());
        assert_eq!(corpus.time_horizon(), again.time_horizon());
        assert_eq!(corpus.vocabulary(), again.vocabulary());
    }

    #[test]
    fn truncate_rebuilds_indices_from_prefix_only() {
        let f = write_lines(&[
            r#"{"word":"late","country":"X","state":"B","t":5,"count":1}"#,
            r#"{"word":"early","country":"X","state":"A","t":0,"count":2}"#,
        ]);
        let corpus = load_corpus(f.path()).unwrap();
        let cut = corpus.truncate(2).unwrap();
        assert_eq!(cut.time_horizon(), 3);
        assert_eq!(cut.vocabulary().words(), &["early".to_string()]);
        assert_eq!(cut.locations().len(), 1);
        assert_eq!(cut.records().len(), 1);
    }

    #[test]
    fn per_location_partitions_records() {
        let f = write_lines(&[
            r#"{"word":"a","country":"X","state":"A","t":0,"count":1}"#,
            r#"{"word":"b","country":"X","state":"B","t":1,"count":1}"#,
            r#"{"word":"a","country":"X","state":"B","t":0,"count":2}"#,
        ]);
        let corpus = load_corpus(f.path()).unwrap();
        let total: usize = (0..corpus.locations().len())
            .map(|l| corpus.records_at(l).len())
            .sum();
        assert_eq!(total, corpus.records().len());
        let mut seen = vec![false; corpus.records().len()];
        for l in 0..corpus.locations().len() {
            for &i in corpus.records_at(l) {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn whooping_cough_seed_list_loads() {
        let words = [
            "child", "school", "cough", "pertussis", "whoop", "whooping", "infant", "student",
            "contagious", "booster", "cold", "coughing", "nose", "respiratory", "mild", "tdap",
            "immunize", "runny", "tetanus", "breathe",
        ];
        let json = format!(
            r#"{{"whooping cough": [{}]}}"#,
            words.iter().map(|w| format!("{w:?}")).collect::<Vec<_>>().join(",")
        );
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(json.as_bytes()).unwrap();
        let vocab = Vocabulary::from_words(words);
        let spec = load_seed_spec(f.path(), &vocab).unwrap();
        assert_eq!(spec.num_topics(), 1);
        assert_eq!(spec.topics()[0].words.len(), 20);
        assert!(spec.unresolved_words(&vocab).is_empty());
    }

    #[test]
    fn single_seed_topic_is_valid() {
        let spec = SeedSpec::new(vec![SeedTopic {
            name: "flu".into(),
            words: vec!["influenza".into()],
        }])
        .unwrap();
        assert_eq!(spec.num_topics(), 1);
    }

    #[test]
    fn missing_seed_word_is_flagged_not_rejected() {
        let vocab = Vocabulary::from_words(["bird", "avian", "market", "poultry", "farm"]);
        let spec = SeedSpec::new(vec![SeedTopic {
            name: "h7n9".into(),
            words: vec!["bird".into(), "h5n1".into()],
        }])
        .unwrap();
        let resolved = spec.resolve(&vocab);
        assert_eq!(resolved[0][0], Some(0));
        assert_eq!(resolved[0][1], None);
        assert_eq!(spec.unresolved_words(&vocab), vec![("h7n9", "h5n1")]);
    }

    #[test]
    fn seed_word_in_two_topics_rejected() {
        let err = SeedSpec::new(vec![
            SeedTopic { name: "a".into(), words: vec!["fever".into()] },
            SeedTopic { name: "b".into(), words: vec!["fever".into()] },
        ])
        .unwrap_err();
        assert!(err.to_string().contains("two topics"), "{err}");
    }

    #[test]
    fn empty_topic_rejected() {
        let err = SeedSpec::new(vec![SeedTopic { name: "a".into(), words: vec![] }]).unwrap_err();
        assert!(err.to_string().contains("empty"), "{err}");
    }

    #[test]
    fn tokenize_lowercases_and_filters() {
        assert_eq!(
            tokenize_simple("Salmonella in Kansas", &["in"]),
            vec!["salmonella", "kansas"]
        );
    }

    #[test]
    fn tokenize_empty_input() {
        assert_eq!(tokenize_simple("", &[] as &[&str]), Vec::<String>::new());
    }

    #[test]
    fn tokenize_does_not_merge_inflections() {
        assert_eq!(
            tokenize_simple("Traveled, traveling!", &[] as &[&str]),
            vec!["traveled", "traveling"]
        );
    }

    #[test]
    fn case_counts_roundtrip_and_validation() {
        let out = tempfile::NamedTempFile::new().unwrap();
        save_case_counts(&[3.0, 0.0, 12.5], out.path()).unwrap();
        let series = load_case_counts(out.path(), "dengue", Granularity::Monthly).unwrap();
        assert_eq!(series.values(), &[3.0, 0.0, 12.5]);
        assert!(CaseCountSeries::new("x", Granularity::Weekly, vec![-1.0]).is_err());
    }
}
