//! Corpus ingestion, vocabulary building, binarization, and the artificial
//! dataset generator.
//!
//! Documents are reduced to set-of-words presence bitsets of length `m`; the
//! negated half of the literal space is materialized at encode time, not in
//! storage.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Packed presence bits for one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitset {
    words: Vec<u64>,
    len: usize,
}

impl Bitset {
    pub fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut set = Self::new(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                set.set(i, true);
            }
        }
        set
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len);
        let (w, b) = (i / 64, i % 64);
        if value {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = vec![0u8; self.len.div_ceil(8)];
        for i in self.ones() {
            bytes[i / 8] |= 1 << (i % 8);
        }
        bytes
    }

    fn from_bytes(bytes: &[u8], len: usize) -> Result<Self> {
        if bytes.len() != len.div_ceil(8) {
            return Err(Error::BadFile("bitset byte count mismatch".into()));
        }
        let mut set = Self::new(len);
        for i in 0..len {
            if bytes[i / 8] >> (i % 8) & 1 == 1 {
                set.set(i, true);
            }
        }
        Ok(set)
    }
}

/// Token-to-feature-id mapping, ordered by descending corpus frequency with
/// alphabetical tie-break.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds the top-`max_size` vocabulary from a token stream.
    pub fn build<I, S>(tokens: I, max_size: usize) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for t in tokens {
            let t = t.as_ref();
            if !t.is_empty() {
                *counts.entry(t.to_string()).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_size);
        let tokens: Vec<String> = ranked.into_iter().map(|(t, _)| t).collect();
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(Self { tokens, index })
    }

    /// Vocabulary size `m`.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn feature_id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Frozen tokenization: lowercase, keep alphanumeric characters, split on
/// whitespace.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|chunk| {
            let token: String = chunk
                .chars()
                .filter(|c| c.is_alphanumeric())
                .flat_map(char::to_lowercase)
                .collect();
            (!token.is_empty()).then_some(token)
        })
        .collect()
}

/// Set-of-words presence bitset: bit `f` is set iff token `f` occurs at
/// least once; out-of-vocabulary tokens are ignored.
pub fn binarize<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Bitset {
    let mut bits = Bitset::new(vocab.len());
    for t in tokens {
        if let Some(f) = vocab.feature_id(t.as_ref()) {
            bits.set(f as usize, true);
        }
    }
    bits
}

/// Which half of a dataset pair a table belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    Train,
    Test,
}

/// Binarized labeled examples.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    examples: Vec<Bitset>,
    labels: Vec<u32>,
    vocab_size: usize,
    classes: u32,
    split: Split,
    /// Generator seed when synthetic, 0 for ingested data.
    seed: u64,
}

impl LabeledDataset {
    pub fn new(
        examples: Vec<Bitset>,
        labels: Vec<u32>,
        vocab_size: usize,
        classes: u32,
        split: Split,
        seed: u64,
    ) -> Result<Self> {
        if examples.len() != labels.len() {
            return Err(Error::invalid("labels", "count differs from examples"));
        }
        if classes == 0 {
            return Err(Error::invalid("classes", "must be >= 1"));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::invalid(
                "labels",
                format!("label {bad} >= classes {classes}"),
            ));
        }
        if let Some(e) = examples.iter().find(|e| e.len() != vocab_size) {
            return Err(Error::invalid(
                "examples",
                format!("bitset length {} != vocab size {vocab_size}", e.len()),
            ));
        }
        Ok(Self {
            examples,
            labels,
            vocab_size,
            classes,
            split,
            seed,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn classes(&self) -> u32 {
        self.classes
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn example(&self, i: usize) -> (&Bitset, u32) {
        (&self.examples[i], self.labels[i])
    }

    pub fn examples(&self) -> impl Iterator<Item = (&Bitset, u32)> {
        self.examples.iter().zip(self.labels.iter().copied())
    }

    /// Fraction of examples carrying the given label.
    pub fn label_rate(&self, label: u32) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.labels.iter().filter(|&&l| l == label).count() as f64 / self.len() as f64
    }

    /// Writes the binary cache: magic, version, split, header
    /// `(m, classes, count, seed)`, then one `(label, packed bits)` record
    /// per example. All integers little-endian.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&[CACHE_VERSION, split_tag(self.split)])?;
        w.write_all(&(self.vocab_size as u32).to_le_bytes())?;
        w.write_all(&self.classes.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for (bits, label) in self.examples() {
            w.write_all(&label.to_le_bytes())?;
            w.write_all(&bits.to_bytes())?;
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::BadFile("not a dataset cache".into()));
        }
        let mut head = [0u8; 2];
        r.read_exact(&mut head)?;
        if head[0] != CACHE_VERSION {
            return Err(Error::BadFile(format!("unsupported version {}", head[0])));
        }
        let split = match head[1] {
            0 => Split::Train,
            1 => Split::Test,
            t => return Err(Error::BadFile(format!("unknown split tag {t}"))),
        };
        let vocab_size = read_u32(&mut r)? as usize;
        let classes = read_u32(&mut r)?;
        let count = read_u64(&mut r)? as usize;
        let seed = read_u64(&mut r)?;
        let row_bytes = vocab_size.div_ceil(8);
        let mut examples = Vec::with_capacity(count);
        let mut labels = Vec::with_capacity(count);
        let mut row = vec![0u8; row_bytes];
        for _ in 0..count {
            labels.push(read_u32(&mut r)?);
            r.read_exact(&mut row)?;
            examples.push(Bitset::from_bytes(&row, vocab_size)?);
        }
        Self::new(examples, labels, vocab_size, classes, split, seed)
    }

    pub fn write_cache_file<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_cache(std::io::BufWriter::new(file))
    }

    pub fn read_cache_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_cache(BufReader::new(file))
    }
}

const CACHE_MAGIC: &[u8; 4] = b"TMDS";
const CACHE_VERSION: u8 = 1;

fn split_tag(split: Split) -> u8 {
    match split {
        Split::Train => 0,
        Split::Test => 1,
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

/// Parameters of the synthetic benchmark generator.
///
/// Class `c` owns the feature block
/// `[c * unique_per_class, (c+1) * unique_per_class)`. A clean example sets
/// exactly its own block; owned bits then flip independently with probability
/// `noise` and non-owned bits with probability `noise * background_rate`.
/// With `background_rate = 1` the flip law is uniform; lower values make the
/// background sparse, which mimics bag-of-words text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtificialSpec {
    pub num_features: usize,
    pub train_n: usize,
    pub test_n: usize,
    pub noise: f64,
    /// Scales the flip probability of non-owned features.
    pub background_rate: f64,
    pub unique_per_class: usize,
    pub classes: u32,
    pub seed: u64,
}

impl Default for ArtificialSpec {
    fn default() -> Self {
        Self {
            num_features: 20,
            train_n: 5000,
            test_n: 5000,
            noise: 0.25,
            background_rate: 1.0,
            unique_per_class: 5,
            classes: 2,
            seed: 42,
        }
    }
}

impl ArtificialSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes == 0 {
            return Err(Error::invalid("classes", "must be >= 1"));
        }
        if self.unique_per_class == 0 {
            return Err(Error::invalid("unique_per_class", "must be >= 1"));
        }
        if self.unique_per_class * self.classes as usize > self.num_features {
            return Err(Error::invalid(
                "unique_per_class",
                format!(
                    "unique_per_class * classes must be <= num_features \
                     ({} * {} > {})",
                    self.unique_per_class, self.classes, self.num_features
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::invalid(
                "noise",
                format!("must be in [0, 1], got {}", self.noise),
            ));
        }
        if !(0.0..=1.0).contains(&(self.noise * self.background_rate)) {
            return Err(Error::invalid(
                "background_rate",
                format!(
                    "noise * background_rate must be in [0, 1], got {}",
                    self.noise * self.background_rate
                ),
            ));
        }
        Ok(())
    }

    /// One-row CSV (plus header) echoing every generator parameter.
    pub fn to_csv(&self) -> String {
        format!(
            "num_features,train_n,test_n,noise,background_rate,unique_per_class,classes,seed\n\
             {},{},{},{},{},{},{},{}\n",
            self.num_features,
            self.train_n,
            self.test_n,
            self.noise,
            self.background_rate,
            self.unique_per_class,
            self.classes,
            self.seed
        )
    }
}

/// Generates a (train, test) pair from the spec; deterministic under the
/// spec's seed. Labels cycle through the classes so both splits are balanced.
pub fn gen_artificial(spec: &ArtificialSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let background_flip = spec.noise * spec.background_rate;
    let mut gen_split = |n: usize, split: Split| -> Result<LabeledDataset> {
        let mut examples = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let label = (i % spec.classes as usize) as u32;
            let block = label as usize * spec.unique_per_class;
            let mut bits = Bitset::new(spec.num_features);
            for f in 0..spec.num_features {
                let proto = f >= block && f < block + spec.unique_per_class;
                let p_flip = if proto { spec.noise } else { background_flip };
                let flip = rng.random::<f64>() < p_flip;
                bits.set(f, proto ^ flip);
            }
            examples.push(bits);
            labels.push(label);
        }
        LabeledDataset::new(
            examples,
            labels,
            spec.num_features,
            spec.classes,
            split,
            spec.seed,
        )
    };
    let train = gen_split(spec.train_n, Split::Train)?;
    let test = gen_split(spec.test_n, Split::Test)?;
    Ok((train, test))
}

/// Streams a labeled text file: one document per line,
/// `label<TAB>text`, LF or CRLF endings. Returns token lists and labels.
pub fn load_labeled_text<P: AsRef<Path>>(path: P) -> Result<(Vec<Vec<String>>, Vec<u32>)> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        let (label_str, text) = line.split_once('\t').ok_or_else(|| Error::MalformedLine {
            line: line_no,
            reason: "expected `label<TAB>text`".into(),
        })?;
        let label: u32 = label_str.parse().map_err(|_| Error::MalformedLine {
            line: line_no,
            reason: format!("bad label `{label_str}`"),
        })?;
        labels.push(label);
        docs.push(tokenize(text));
    }
    Ok((docs, labels))
}

/// Loads an unlabeled corpus: one document per line.
pub fn load_text_corpus<P: AsRef<Path>>(path: P) -> Result<Vec<Vec<String>>> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut docs = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        let tokens = tokenize(line);
        if !tokens.is_empty() {
            docs.push(tokens);
        }
    }
    Ok(docs)
}

/// Binarizes token documents into a labeled dataset over `vocab`.
pub fn binarize_documents(
    docs: &[Vec<String>],
    labels: &[u32],
    vocab: &Vocabulary,
    split: Split,
) -> Result<LabeledDataset> {
    let examples: Vec<Bitset> = docs.iter().map(|d| binarize(d, vocab)).collect();
    let classes = labels.iter().copied().max().map_or(1, |l| l + 1);
    LabeledDataset::new(examples, labels.to_vec(), vocab.len(), classes, split, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocab_orders_by_frequency() {
        let v = Vocabulary::build("a a b".split_whitespace(), 10).unwrap();
        assert_eq!(v.tokens(), &["a".to_string(), "b".to_string()]);
        assert_eq!(v.feature_id("a"), Some(0));
        assert_eq!(v.feature_id("b"), Some(1));
    }

    #[test]
    fn vocab_truncates() {
        let v = Vocabulary::build("a a b".split_whitespace(), 1).unwrap();
        assert_eq!(v.tokens(), &["a".to_string()]);
        assert_eq!(v.feature_id("b"), None);
    }

    #[test]
    fn vocab_breaks_ties_alphabetically() {
        let v = Vocabulary::build("b a".split_whitespace(), 10).unwrap();
        assert_eq!(v.tokens(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn vocab_rejects_empty_corpus() {
        let empty: Vec<&str> = vec![];
        assert!(matches!(
            Vocabulary::build(empty, 10),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn vocab_bijection() {
        let v = Vocabulary::build("x y z y z z".split_whitespace(), 10).unwrap();
        for (i, t) in v.tokens().iter().enumerate() {
            assert_eq!(v.feature_id(t), Some(i as u32));
            assert_eq!(v.token(i as u32), Some(t.as_str()));
        }
    }

    #[test]
    fn binarize_membership() {
        let v = Vocabulary::build("a a b".split_whitespace(), 10).unwrap();
        let bits = binarize(&["a", "a", "c"], &v);
        assert_eq!(bits.to_bools(), vec![true, false]);
    }

    #[test]
    fn binarize_empty_and_full() {
        let v = Vocabulary::build("a b".split_whitespace(), 10).unwrap();
        let none: [&str; 0] = [];
        assert_eq!(binarize(&none, &v).count_ones(), 0);
        assert_eq!(binarize(&["b", "a"], &v).count_ones(), 2);
    }

    #[test]
    fn tokenize_lowercases_and_strips_punctuation() {
        assert_eq!(
            tokenize("Good, movie! 10/10 -- loved it."),
            vec!["good", "movie", "1010", "loved", "it"]
        );
    }

    #[test]
    fn artificial_noise_zero_sets_exact_blocks() {
        let spec = ArtificialSpec {
            num_features: 10,
            train_n: 20,
            test_n: 10,
            noise: 0.0,
            background_rate: 1.0,
            unique_per_class: 3,
            classes: 2,
            seed: 1,
        };
        let (train, _) = gen_artificial(&spec).unwrap();
        for (bits, label) in train.examples() {
            let expected: Vec<usize> = if label == 0 { vec![0, 1, 2] } else { vec![3, 4, 5] };
            assert_eq!(bits.ones().collect::<Vec<_>>(), expected);
        }
    }

    #[test]
    fn artificial_noise_is_flip_rate() {
        let spec = ArtificialSpec {
            num_features: 40,
            train_n: 2000,
            test_n: 0,
            noise: 0.5,
            background_rate: 1.0,
            unique_per_class: 10,
            classes: 2,
            seed: 9,
        };
        let (train, _) = gen_artificial(&spec).unwrap();
        let mut flipped = 0usize;
        for (bits, label) in train.examples() {
            let block = label as usize * 10;
            for f in 0..40 {
                let proto = f >= block && f < block + 10;
                if bits.get(f) != proto {
                    flipped += 1;
                }
            }
        }
        let rate = flipped as f64 / (2000.0 * 40.0);
        assert!(
            (rate - 0.5).abs() < 0.02,
            "flip rate {rate} not near noise 0.5"
        );
    }

    #[test]
    fn artificial_is_deterministic() {
        let spec = ArtificialSpec::default();
        let a = gen_artificial(&spec).unwrap();
        let b = gen_artificial(&spec).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn artificial_rejects_infeasible_spec() {
        let spec = ArtificialSpec {
            num_features: 5,
            unique_per_class: 3,
            classes: 2,
            ..ArtificialSpec::default()
        };
        match gen_artificial(&spec) {
            Err(Error::InvalidParam { name, reason }) => {
                assert_eq!(name, "unique_per_class");
                assert!(reason.contains("<= num_features"), "reason: {reason}");
            }
            other => panic!("expected InvalidParam, got {other:?}"),
        }
        let spec = ArtificialSpec {
            noise: 1.5,
            ..ArtificialSpec::default()
        };
        assert!(gen_artificial(&spec).is_err());
    }

    #[test]
    fn cache_round_trip() {
        let spec = ArtificialSpec {
            num_features: 13,
            train_n: 37,
            test_n: 5,
            ..ArtificialSpec::default()
        };
        let (train, _) = gen_artificial(&spec).unwrap();
        let mut buf = Vec::new();
        train.write_cache(&mut buf).unwrap();
        let back = LabeledDataset::read_cache(&buf[..]).unwrap();
        assert_eq!(back, train);
    }

    #[test]
    fn cache_rejects_garbage() {
        assert!(LabeledDataset::read_cache(&b"NOPE"[..]).is_err());
    }

    #[test]
    fn labeled_text_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("docs.tsv");
        std::fs::write(&path, "1\tgood movie\r\n0\tbad plot\n").unwrap();
        let (docs, labels) = load_labeled_text(&path).unwrap();
        assert_eq!(labels, vec![1, 0]);
        assert_eq!(docs[0], vec!["good", "movie"]);
        assert_eq!(docs[1], vec!["bad", "plot"]);
    }

    #[test]
    fn labeled_text_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.tsv");
        std::fs::write(&path, "").unwrap();
        let (docs, labels) = load_labeled_text(&path).unwrap();
        assert!(docs.is_empty());
        assert!(labels.is_empty());
    }

    #[test]
    fn labeled_text_reports_malformed_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tsv");
        std::fs::write(&path, "1\tfine\nnot-a-label here\n").unwrap();
        match load_labeled_text(&path) {
            Err(Error::MalformedLine { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected MalformedLine, got {other:?}"),
        }
    }

    #[test]
    fn noise_free_data_is_separable_by_block_rule() {
        let spec = ArtificialSpec {
            noise: 0.0,
            train_n: 100,
            test_n: 100,
            ..ArtificialSpec::default()
        };
        let (_, test) = gen_artificial(&spec).unwrap();
        // Depth-0 oracle: predict the class whose owned block is fully set.
        for (bits, label) in test.examples() {
            let predicted = (0..spec.classes)
                .find(|&c| {
                    let block = c as usize * spec.unique_per_class;
                    (block..block + spec.unique_per_class).all(|f| bits.get(f))
                })
                .unwrap();
            assert_eq!(predicted, label);
        }
    }
}
