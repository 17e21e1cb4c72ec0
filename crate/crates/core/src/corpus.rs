//! Corpus, gold-label and word-embedding readers.
//!
//! A corpus file holds one document per line with tokens separated by any
//! run of whitespace. Tokens are taken verbatim: no case folding, no
//! punctuation stripping. Blank lines are kept as zero-length documents so
//! that line `i` of a gold label file always describes document `i`.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Bijection between token strings and contiguous ids `0..V`, assigned in
/// first-occurrence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    word_to_id: HashMap<String, usize>,
    id_to_word: Vec<String>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vocabulary from words in order; repeats keep their first id.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut vocab = Self::new();
        for w in words {
            vocab.intern(w.as_ref());
        }
        vocab
    }

    /// Returns the id of `word`, inserting it if unseen.
    pub fn intern(&mut self, word: &str) -> usize {
        if let Some(&id) = self.word_to_id.get(word) {
            return id;
        }
        let id = self.id_to_word.len();
        self.word_to_id.insert(word.to_owned(), id);
        self.id_to_word.push(word.to_owned());
        id
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.word_to_id.get(word).copied()
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.id_to_word.get(id).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.id_to_word
    }

    pub fn len(&self) -> usize {
        self.id_to_word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_word.is_empty()
    }
}

/// Tokenized documents as word-id sequences over a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    docs: Vec<Vec<usize>>,
    vocab: Vocabulary,
    total_tokens: usize,
}

impl Corpus {
    /// Tokenizes `text`, one document per line.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut vocab = Vocabulary::new();
        let docs: Vec<Vec<usize>> = text
            .lines()
            .map(|line| line.split_whitespace().map(|tok| vocab.intern(tok)).collect())
            .collect();
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self::assemble(docs, vocab))
    }

    /// Wraps pre-tokenized documents. Every id must be below `vocab.len()`.
    pub fn from_docs(docs: Vec<Vec<usize>>, vocab: Vocabulary) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let v = vocab.len();
        if let Some(bad) = docs.iter().flatten().find(|&&w| w >= v) {
            return Err(Error::InvalidParams(format!(
                "word id {bad} outside vocabulary of size {v}"
            )));
        }
        Ok(Self::assemble(docs, vocab))
    }

    fn assemble(docs: Vec<Vec<usize>>, vocab: Vocabulary) -> Self {
        let total_tokens = docs.iter().map(Vec::len).sum();
        Self { docs, vocab, total_tokens }
    }

    pub fn docs(&self) -> &[Vec<usize>] {
        &self.docs
    }

    pub fn doc(&self, d: usize) -> &[usize] {
        &self.docs[d]
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn total_tokens(&self) -> usize {
        self.total_tokens
    }

    /// Corpus frequency of each word id.
    pub fn word_frequencies(&self) -> Vec<usize> {
        let mut freq = vec![0; self.vocab.len()];
        for &w in self.docs.iter().flatten() {
            freq[w] += 1;
        }
        freq
    }

    /// Writes the documents back as text through the vocabulary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for doc in &self.docs {
            let words: Vec<&str> = doc.iter().map(|&w| self.vocab.id_to_word[w].as_str()).collect();
            out.push_str(&words.join(" "));
            out.push('\n');
        }
        out
    }
}

/// A corpus tokenized against a fixed vocabulary; out-of-vocabulary tokens
/// are dropped and counted per document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappedCorpus {
    pub docs: Vec<Vec<usize>>,
    pub oov_per_doc: Vec<usize>,
    pub tokens_per_doc: Vec<usize>,
}

impl MappedCorpus {
    pub fn from_text(text: &str, vocab: &Vocabulary) -> Result<Self> {
        let mut docs = Vec::new();
        let mut oov_per_doc = Vec::new();
        let mut tokens_per_doc = Vec::new();
        for line in text.lines() {
            let mut doc = Vec::new();
            let mut seen = 0;
            for tok in line.split_whitespace() {
                seen += 1;
                if let Some(id) = vocab.id(tok) {
                    doc.push(id);
                }
            }
            oov_per_doc.push(seen - doc.len());
            tokens_per_doc.push(seen);
            docs.push(doc);
        }
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(Self { docs, oov_per_doc, tokens_per_doc })
    }

    pub fn from_corpus(corpus: &Corpus, vocab: &Vocabulary) -> Result<Self> {
        Self::from_text(&corpus.to_text(), vocab)
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn oov_tokens(&self) -> usize {
        self.oov_per_doc.iter().sum()
    }

    pub fn total_tokens(&self) -> usize {
        self.tokens_per_doc.iter().sum()
    }
}

/// One class label per document, ids assigned in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldLabels {
    pub labels: Vec<usize>,
    pub label_names: Vec<String>,
}

impl GoldLabels {
    pub fn from_text(text: &str, num_docs: usize) -> Result<Self> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() != num_docs {
            return Err(Error::LabelAlignment { expected: num_docs, found: lines.len() });
        }
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut label_names = Vec::new();
        let mut labels = Vec::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            let name = line.trim();
            if name.is_empty() {
                return Err(Error::BlankLabel { line: i + 1 });
            }
            let next = label_names.len();
            let id = *ids.entry(name).or_insert_with(|| {
                label_names.push(name.to_owned());
                next
            });
            labels.push(id);
        }
        Ok(Self { labels, label_names })
    }

    pub fn from_ids(labels: Vec<usize>) -> Self {
        let n = labels.iter().max().map_or(0, |&m| m + 1);
        Self { labels, label_names: (0..n).map(|i| i.to_string()).collect() }
    }

    pub fn num_labels(&self) -> usize {
        self.label_names.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Dense vectors for the vocabulary words found in an embedding file.
#[derive(Debug, Clone, PartialEq)]
pub struct WordEmbeddings<F> {
    vectors: Vec<Option<Vec<F>>>,
    dim: usize,
}

impl<F: Real> WordEmbeddings<F> {
    /// Parses word2vec-style text: `word v1 .. vE` per line, optionally
    /// preceded by a `count dim` header line.
    pub fn from_text(text: &str, vocab: &Vocabulary) -> Result<Self> {
        let mut vectors: Vec<Option<Vec<F>>> = vec![None; vocab.len()];
        let mut dim = None;
        for (i, line) in text.lines().enumerate() {
            let mut toks = line.split_whitespace();
            let Some(word) = toks.next() else { continue };
            let rest: Vec<&str> = toks.collect();
            if i == 0 && rest.len() == 1 && word.parse::<u64>().is_ok() && rest[0].parse::<u64>().is_ok() {
                continue;
            }
            let expected = *dim.get_or_insert(rest.len());
            if rest.len() != expected || expected == 0 {
                return Err(Error::EmbeddingDimension { line: i + 1, expected, found: rest.len() });
            }
            let Some(id) = vocab.id(word) else { continue };
            if vectors[id].is_some() {
                continue;
            }
            let vec = rest
                .iter()
                .map(|t| {
                    t.parse::<F>().map_err(|_| Error::Format {
                        path: Default::default(),
                        line: i + 1,
                        message: format!("'{t}' is not a number"),
                    })
                })
                .collect::<Result<Vec<F>>>()?;
            vectors[id] = Some(vec);
        }
        if vectors.iter().all(Option::is_none) {
            return Err(Error::NoEmbeddingCoverage);
        }
        Ok(Self { vectors, dim: dim.unwrap_or(0) })
    }

    /// Builds from explicit per-word vectors (index = word id).
    pub fn from_vectors(vectors: Vec<Option<Vec<F>>>) -> Result<Self> {
        let dim = vectors.iter().flatten().map(Vec::len).next().ok_or(Error::NoEmbeddingCoverage)?;
        for (w, v) in vectors.iter().enumerate() {
            if let Some(v) = v {
                if v.len() != dim {
                    return Err(Error::EmbeddingDimension { line: w + 1, expected: dim, found: v.len() });
                }
            }
        }
        Ok(Self { vectors, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self, word: usize) -> Option<&[F]> {
        self.vectors.get(word).and_then(|v| v.as_deref())
    }

    pub fn num_covered(&self) -> usize {
        self.vectors.iter().filter(|v| v.is_some()).count()
    }

    /// Vocabulary ids that have no vector.
    pub fn uncovered(&self) -> Vec<usize> {
        (0..self.vectors.len()).filter(|&w| self.vectors[w].is_none()).collect()
    }

    pub fn vocab_size(&self) -> usize {
        self.vectors.len()
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    Corpus::from_text(&read(path.as_ref())?)
}

pub fn load_labels(path: impl AsRef<Path>, corpus: &Corpus) -> Result<GoldLabels> {
    load_labels_for(path, corpus.num_docs())
}

/// Reads a gold file that must have exactly `num_docs` lines.
pub fn load_labels_for(path: impl AsRef<Path>, num_docs: usize) -> Result<GoldLabels> {
    GoldLabels::from_text(&read(path.as_ref())?, num_docs)
}

pub fn load_embeddings<F: Real>(path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<WordEmbeddings<F>> {
    let path = path.as_ref();
    WordEmbeddings::from_text(&read(path)?, vocab).map_err(|e| match e {
        Error::Format { line, message, .. } => Error::Format { path: path.to_owned(), line, message },
        other => other,
    })
}

pub fn load_mapped(path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<MappedCorpus> {
    MappedCorpus::from_text(&read(path.as_ref())?, vocab)
}
