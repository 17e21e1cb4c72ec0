//! Topic coherence, clustering and classification scores.
//!
//! Labels are dense ids (`0..n`). Scores are `f64` whatever the model's
//! scalar type.

use std::collections::{BTreeMap, HashMap};

use ndarray::Array2;

use crate::corpus::{Corpus, GoldLabels};
use crate::error::{Error, Result};
use crate::sampling::{top_words, RngStream, TrainedModel};
use crate::scalar::Real;

pub const DEFAULT_NEIGHBORS: usize = 5;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;
pub const DEFAULT_SPLIT_SEED: u64 = 0;
pub const DEFAULT_COHERENCE_WORDS: usize = 10;

/// Named scores plus an optional finer breakdown (per topic or per class).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub metrics: BTreeMap<String, f64>,
    pub details: Vec<(String, f64)>,
}

impl EvalReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }
}

/// Most probable topic per row; ties go to the smaller topic id.
pub fn argmax_assign<F: Real>(theta: &Array2<F>) -> Vec<usize> {
    theta
        .outer_iter()
        .map(|row| (0..row.len()).fold(0, |best, k| if row[k] > row[best] { k } else { best }))
        .collect()
}

fn check_lengths(pred: &[usize], gold: &[usize]) -> Result<()> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch { left: pred.len(), right: gold.len() });
    }
    if pred.is_empty() {
        return Err(Error::InvalidParams("cannot score an empty labelling".into()));
    }
    Ok(())
}

/// Sparse contingency table plus both marginals.
struct Contingency {
    joint: BTreeMap<(usize, usize), usize>,
    rows: BTreeMap<usize, usize>,
    cols: BTreeMap<usize, usize>,
    n: usize,
}

impl Contingency {
    fn new(pred: &[usize], gold: &[usize]) -> Self {
        let mut joint = BTreeMap::new();
        let mut rows = BTreeMap::new();
        let mut cols = BTreeMap::new();
        for (&p, &g) in pred.iter().zip(gold) {
            *joint.entry((p, g)).or_insert(0) += 1;
            *rows.entry(p).or_insert(0) += 1;
            *cols.entry(g).or_insert(0) += 1;
        }
        Self { joint, rows, cols, n: pred.len() }
    }
}

fn entropy(counts: &BTreeMap<usize, usize>, n: usize) -> f64 {
    let n = n as f64;
    -counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// Fraction of items that fall in their cluster's majority class.
pub fn purity(pred: &[usize], gold: &[usize]) -> Result<f64> {
    check_lengths(pred, gold)?;
    let table = Contingency::new(pred, gold);
    let mut best: BTreeMap<usize, usize> = BTreeMap::new();
    for (&(p, _), &c) in &table.joint {
        let b = best.entry(p).or_insert(0);
        *b = (*b).max(c);
    }
    Ok(best.values().sum::<usize>() as f64 / table.n as f64)
}

/// `2·I(pred; gold) / (H(pred) + H(gold))`, natural logs. Two one-block
/// partitions score 1; exactly one one-block partition scores 0.
pub fn nmi(pred: &[usize], gold: &[usize]) -> Result<f64> {
    check_lengths(pred, gold)?;
    let t = Contingency::new(pred, gold);
    let hp = entropy(&t.rows, t.n);
    let hg = entropy(&t.cols, t.n);
    if t.rows.len() == 1 && t.cols.len() == 1 {
        return Ok(1.0);
    }
    if t.rows.len() == 1 || t.cols.len() == 1 {
        return Ok(0.0);
    }
    let n = t.n as f64;
    let mut mi = 0.0;
    for (&(p, g), &c) in &t.joint {
        let c = c as f64;
        mi += c / n * (c * n / (t.rows[&p] as f64 * t.cols[&g] as f64)).ln();
    }
    Ok((2.0 * mi / (hp + hg)).clamp(0.0, 1.0))
}

/// Purity and NMI of the argmax clustering of `theta`.
pub fn clustering_eval<F: Real>(theta: &Array2<F>, gold: &GoldLabels) -> Result<EvalReport> {
    let pred = argmax_assign(theta);
    let mut report = EvalReport::default();
    report.metrics.insert("Purity".into(), purity(&pred, &gold.labels)?);
    report.metrics.insert("NMI".into(), nmi(&pred, &gold.labels)?);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScores {
    pub class: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-class precision/recall/F1 for every class that occurs in `gold`,
/// in class-id order, and their unweighted means.
pub fn macro_prf(pred: &[usize], gold: &[usize]) -> Result<(f64, f64, f64, Vec<ClassScores>)> {
    check_lengths(pred, gold)?;
    let mut classes: Vec<usize> = gold.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let scores: Vec<ClassScores> = classes
        .iter()
        .map(|&c| {
            let tp = pred.iter().zip(gold).filter(|&(&p, &g)| p == c && g == c).count() as f64;
            let predicted = pred.iter().filter(|&&p| p == c).count() as f64;
            let actual = gold.iter().filter(|&&g| g == c).count() as f64;
            let precision = if predicted > 0.0 { tp / predicted } else { 0.0 };
            let recall = tp / actual;
            let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
            ClassScores { class: c, precision, recall, f1 }
        })
        .collect();
    let n = scores.len() as f64;
    let mean = |f: fn(&ClassScores) -> f64| scores.iter().map(f).sum::<f64>() / n;
    Ok((mean(|s| s.precision), mean(|s| s.recall), mean(|s| s.f1), scores))
}

/// Stratified split: each class contributes `round(frac·n)` items, clamped
/// so that both sides get at least one. Returns sorted (train, test) indices.
pub fn stratified_split(gold: &GoldLabels, train_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::InvalidParams(format!("train fraction must be in (0, 1), got {train_frac}")));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); gold.num_labels()];
    for (i, &l) in gold.labels.iter().enumerate() {
        by_class[l].push(i);
    }
    let mut rng = RngStream::new(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (l, mut members) in by_class.into_iter().enumerate() {
        let n = members.len();
        if n < 2 {
            return Err(Error::Stratify { label: gold.label_names[l].clone(), count: n });
        }
        for i in (1..n).rev() {
            members.swap(i, rng.below(i + 1));
        }
        let cut = ((train_frac * n as f64).round() as usize).clamp(1, n - 1);
        train.extend_from_slice(&members[..cut]);
        test.extend_from_slice(&members[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

fn cosine<F: Real>(a: ndarray::ArrayView1<F>, b: ndarray::ArrayView1<F>) -> f64 {
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b.iter()) {
        let (x, y) = (x.as_f64(), y.as_f64());
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na.sqrt() * nb.sqrt())
    }
}

/// k-nearest-neighbour classification on theta rows, scored with macro
/// precision, recall and F1 on a stratified held-out split.
///
/// Neighbours are ranked by cosine similarity (ties to the smaller document
/// index); the vote is a plain count (ties to the smaller label id).
pub fn classify_eval<F: Real>(
    theta: &Array2<F>,
    gold: &GoldLabels,
    split_seed: u64,
    train_frac: f64,
    k_neighbors: usize,
) -> Result<EvalReport> {
    if theta.nrows() != gold.len() {
        return Err(Error::LengthMismatch { left: theta.nrows(), right: gold.len() });
    }
    if k_neighbors < 1 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    let (train, test) = stratified_split(gold, train_frac, split_seed)?;
    let mut pred = Vec::with_capacity(test.len());
    let mut sims: Vec<(f64, usize)> = Vec::with_capacity(train.len());
    for &i in &test {
        sims.clear();
        sims.extend(train.iter().map(|&j| (cosine(theta.row(i), theta.row(j)), j)));
        sims.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; gold.num_labels()];
        for &(_, j) in sims.iter().take(k_neighbors) {
            votes[gold.labels[j]] += 1;
        }
        let best = (0..votes.len()).fold(0, |best, l| if votes[l] > votes[best] { l } else { best });
        pred.push(best);
    }
    let truth: Vec<usize> = test.iter().map(|&i| gold.labels[i]).collect();
    let (p, r, f, per_class) = macro_prf(&pred, &truth)?;
    let mut report = EvalReport::default();
    report.metrics.insert("Precision".into(), p);
    report.metrics.insert("Recall".into(), r);
    report.metrics.insert("F1".into(), f);
    for s in per_class {
        let name = &gold.label_names[s.class];
        report.details.push((format!("{name} precision"), s.precision));
        report.details.push((format!("{name} recall"), s.recall));
        report.details.push((format!("{name} f1"), s.f1));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coherence {
    /// Mean over topics that had at least one scored pair.
    pub score: f64,
    /// `None` when every pair of the topic was skipped.
    pub per_topic: Vec<Option<f64>>,
    /// Pairs (topic, word, word) dropped because a word never occurs in the
    /// reference corpus.
    pub skipped: Vec<(usize, String, String)>,
}

/// PMI of two words from document frequencies, with +1 on the joint count:
/// `ln((C(a,b)+1)·D / (C(a)·C(b)))`.
pub fn pmi(joint: usize, df_a: usize, df_b: usize, num_docs: usize) -> f64 {
    ((joint as f64 + 1.0) * num_docs as f64 / (df_a as f64 * df_b as f64)).ln()
}

/// Mean pairwise PMI of each topic's `t` top words against `reference`.
pub fn pmi_coherence<F: Real>(model: &TrainedModel<F>, reference: &Corpus, t: usize) -> Result<Coherence> {
    pmi_coherence_of(&top_words(&model.phi, &model.vocab, t), reference, t)
}

/// As [`pmi_coherence`], for topics given directly as ranked word lists.
pub fn pmi_coherence_of(topics: &[Vec<String>], reference: &Corpus, t: usize) -> Result<Coherence> {
    if t < 2 {
        return Err(Error::InvalidParams(format!("coherence needs at least 2 top words, got {t}")));
    }
    let d = reference.num_docs();
    // documents containing each word, sorted
    let mut postings: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, doc) in reference.docs().iter().enumerate() {
        for &w in doc {
            let list = postings.entry(w).or_default();
            if list.last() != Some(&i) {
                list.push(i);
            }
        }
    }
    let empty = Vec::new();
    let docs_of = |word: &str| reference.vocab().id(word).and_then(|id| postings.get(&id)).unwrap_or(&empty);
    let mut per_topic = Vec::with_capacity(topics.len());
    let mut skipped = Vec::new();
    for (k, words) in topics.iter().enumerate() {
        let words = &words[..t.min(words.len())];
        let (mut sum, mut n) = (0.0, 0usize);
        for i in 0..words.len() {
            for j in (i + 1)..words.len() {
                let (a, b) = (docs_of(&words[i]), docs_of(&words[j]));
                if a.is_empty() || b.is_empty() {
                    skipped.push((k, words[i].clone(), words[j].clone()));
                    continue;
                }
                sum += pmi(intersection_size(a, b), a.len(), b.len(), d);
                n += 1;
            }
        }
        per_topic.push((n > 0).then(|| sum / n as f64));
    }
    let scored: Vec<f64> = per_topic.iter().flatten().copied().collect();
    if scored.is_empty() {
        return Err(Error::InvalidParams("no top-word pair occurs in the reference corpus".into()));
    }
    let score = scored.iter().sum::<f64>() / scored.len() as f64;
    Ok(Coherence { score, per_topic, skipped })
}

fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}
