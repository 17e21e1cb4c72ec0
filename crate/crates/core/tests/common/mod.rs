#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shorttopic::dmm::DmmState;
use shorttopic::{CountState, Corpus, ModelParams, Vocabulary, WordEmbeddings};
use statrs::function::gamma::ln_gamma;

pub fn vocab(n: usize) -> Vocabulary {
    Vocabulary::from_words((0..n).map(|i| format!("w{i}")))
}

/// `num_docs` documents of 1..=max_len tokens drawn uniformly from `v` words.
pub fn random_corpus(num_docs: usize, v: usize, max_len: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs = (0..num_docs)
        .map(|_| {
            let n = rng.gen_range(1..=max_len);
            (0..n).map(|_| rng.gen_range(0..v)).collect()
        })
        .collect();
    Corpus::from_docs(docs, vocab(v)).unwrap()
}

/// Documents generated from `k` topics with disjoint vocabularies of
/// `words_per_topic` words. Document `d` belongs to topic `d % k`; the
/// returned labels are those topics.
pub fn planted_corpus(num_docs: usize, len: usize, k: usize, words_per_topic: usize, seed: u64) -> (Corpus, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = Vocabulary::from_words((0..k).flat_map(|t| (0..words_per_topic).map(move |i| format!("t{t}w{i}"))));
    let labels: Vec<usize> = (0..num_docs).map(|d| d % k).collect();
    let docs = labels
        .iter()
        .map(|&t| (0..len).map(|_| t * words_per_topic + rng.gen_range(0..words_per_topic)).collect())
        .collect();
    (Corpus::from_docs(docs, vocab).unwrap(), labels)
}

/// Word vectors pointing at each word's topic axis plus a little noise, so
/// words of the same planted topic are near-parallel and others orthogonal.
pub fn planted_embeddings(k: usize, words_per_topic: usize, noise: f64, seed: u64) -> WordEmbeddings<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = (0..k * words_per_topic)
        .map(|w| {
            let mut v: Vec<f64> = (0..k).map(|_| rng.gen_range(-noise..noise)).collect();
            v[w / words_per_topic] += 1.0;
            Some(v)
        })
        .collect();
    WordEmbeddings::from_vectors(vectors).unwrap()
}

pub fn random_embeddings(v: usize, dim: usize, seed: u64) -> WordEmbeddings<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = (0..v).map(|_| Some((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())).collect();
    WordEmbeddings::from_vectors(vectors).unwrap()
}

// ---- exact Dirichlet-multinomial marginals --------------------------------

fn ln_dm(counts: &[usize], prior: f64) -> f64 {
    let n: usize = counts.iter().sum();
    let dim = counts.len() as f64;
    ln_gamma(dim * prior) - ln_gamma(dim * prior + n as f64)
        + counts.iter().map(|&c| ln_gamma(c as f64 + prior) - ln_gamma(prior)).sum::<f64>()
}

/// ln p(w, z) for LDA with θ and φ integrated out; `z[d][i]` is the topic of
/// token `i` of document `d`.
pub fn lda_ln_joint(docs: &[Vec<usize>], z: &[Vec<usize>], k: usize, v: usize, alpha: f64, beta: f64) -> f64 {
    let mut lp = 0.0;
    let mut topic_word = vec![vec![0usize; v]; k];
    for (doc, zd) in docs.iter().zip(z) {
        let mut dk = vec![0usize; k];
        for (&w, &t) in doc.iter().zip(zd) {
            dk[t] += 1;
            topic_word[t][w] += 1;
        }
        lp += ln_dm(&dk, alpha);
    }
    lp + topic_word.iter().map(|row| ln_dm(row, beta)).sum::<f64>()
}

/// ln p(w, z) for DMM; `z[d]` is document `d`'s topic.
pub fn dmm_ln_joint(docs: &[Vec<usize>], z: &[usize], k: usize, v: usize, alpha: f64, beta: f64) -> f64 {
    let mut m = vec![0usize; k];
    let mut topic_word = vec![vec![0usize; v]; k];
    for (doc, &t) in docs.iter().zip(z) {
        m[t] += 1;
        for &w in doc {
            topic_word[t][w] += 1;
        }
    }
    // the mixture weights are one Dirichlet-multinomial over documents; the
    // multinomial coefficient is absent because assignments are labelled
    ln_dm(&m, alpha) + topic_word.iter().map(|row| ln_dm(row, beta)).sum::<f64>()
}

/// Every assignment of `n` units to `k` topics.
pub fn all_assignments(n: usize, k: usize) -> Vec<Vec<usize>> {
    let total = k.pow(n as u32);
    (0..total)
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let t = code % k;
                    code /= k;
                    t
                })
                .collect()
        })
        .collect()
}

pub fn normalize(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter().map(|x| x / s).collect()
}

/// LDA counts for `z` with token (`d`, `i`) left out.
pub fn lda_counts_without(docs: &[Vec<usize>], z: &[Vec<usize>], k: usize, v: usize, skip: (usize, usize)) -> CountState<f64> {
    let mut c = CountState::zeros(docs.len(), k, v);
    for (d, (doc, zd)) in docs.iter().zip(z).enumerate() {
        for (i, (&w, &t)) in doc.iter().zip(zd).enumerate() {
            if (d, i) == skip {
                continue;
            }
            c.doc_topic[[d, t]] += 1.0;
            c.topic_word[[t, w]] += 1.0;
            c.topic_totals[t] += 1.0;
            c.doc_totals[d] += 1.0;
        }
    }
    c.assignments = z.to_vec();
    c
}

/// DMM counts for `z` with document `skip` left out.
pub fn dmm_state_without(docs: &[Vec<usize>], z: &[usize], k: usize, v: usize, skip: usize) -> DmmState<f64> {
    let mut s = DmmState::zeros(docs.len(), k, v);
    for (d, (doc, &t)) in docs.iter().zip(z).enumerate() {
        s.assignments[d] = t;
        if d == skip {
            continue;
        }
        s.topic_docs[t] += 1.0;
        for &w in doc {
            s.topic_word[[t, w]] += 1.0;
        }
        s.topic_totals[t] += doc.len() as f64;
    }
    s
}

pub fn params(k: usize, alpha: f64, beta: f64) -> ModelParams<f64> {
    ModelParams::new(k).with_priors(alpha, beta)
}

// ---- brute-force metrics ---------------------------------------------------

fn distinct(v: &[usize]) -> Vec<usize> {
    let mut d = v.to_vec();
    d.sort_unstable();
    d.dedup();
    d
}

/// Dense contingency table indexed by the sorted distinct labels.
fn table(pred: &[usize], gold: &[usize]) -> (Vec<usize>, Vec<usize>, Vec<Vec<usize>>) {
    let rows = distinct(pred);
    let cols = distinct(gold);
    let t = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| pred.iter().zip(gold).filter(|&(&p, &g)| p == r && g == c).count()).collect())
        .collect();
    (rows, cols, t)
}

pub fn brute_purity(pred: &[usize], gold: &[usize]) -> f64 {
    let (_, _, t) = table(pred, gold);
    t.iter().map(|row| *row.iter().max().unwrap()).sum::<usize>() as f64 / pred.len() as f64
}

pub fn brute_nmi(pred: &[usize], gold: &[usize]) -> f64 {
    let (rows, cols, t) = table(pred, gold);
    if rows.len() == 1 && cols.len() == 1 {
        return 1.0;
    }
    if rows.len() == 1 || cols.len() == 1 {
        return 0.0;
    }
    let n = pred.len() as f64;
    let pr: Vec<f64> = t.iter().map(|r| r.iter().sum::<usize>() as f64 / n).collect();
    let pc: Vec<f64> = (0..cols.len()).map(|j| t.iter().map(|r| r[j]).sum::<usize>() as f64 / n).collect();
    let h = |p: &[f64]| -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>();
    let mut mi = 0.0;
    for i in 0..rows.len() {
        for j in 0..cols.len() {
            let pij = t[i][j] as f64 / n;
            if pij > 0.0 {
                mi += pij * (pij / (pr[i] * pc[j])).ln();
            }
        }
    }
    2.0 * mi / (h(&pr) + h(&pc))
}

/// Macro precision, recall and F1 over the classes present in `gold`.
pub fn brute_macro_prf(pred: &[usize], gold: &[usize]) -> (f64, f64, f64) {
    let mut per: BTreeMap<usize, (f64, f64, f64)> = BTreeMap::new();
    for c in distinct(gold) {
        let mut tp = 0;
        let mut fp = 0;
        let mut fneg = 0;
        for (&p, &g) in pred.iter().zip(gold) {
            match (p == c, g == c) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fneg += 1,
                _ => {}
            }
        }
        let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let r = tp as f64 / (tp + fneg) as f64;
        let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        per.insert(c, (p, r, f));
    }
    let n = per.len() as f64;
    (
        per.values().map(|x| x.0).sum::<f64>() / n,
        per.values().map(|x| x.1).sum::<f64>() / n,
        per.values().map(|x| x.2).sum::<f64>() / n,
    )
}
