//! Word Network Topic Model.
//!
//! Each word gets a pseudo-document listing its window co-occurrents. LDA
//! runs on those pseudo-documents, so a pseudo-document's topic mixture is
//! read as p(k|w). Topic–word distributions come back by Bayes inversion
//! with corpus word frequencies, and a real document's topics are the mean
//! p(k|w) over its tokens.

use ndarray::Array2;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::lda::LdaSampler;
use crate::sampling::{estimate_theta, ModelKind, ModelParams, RngStream, TrainedModel, DEFAULT_WNTM_WINDOW};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordNetwork {
    /// `pseudo_docs[w]`: co-occurrents of `w`, with multiplicity.
    pub pseudo_docs: Vec<Vec<usize>>,
}

impl WordNetwork {
    pub fn num_edges(&self) -> usize {
        self.pseudo_docs.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// For every position pair `i < j` with `j − i < window`, appends token `j`
/// to token `i`'s pseudo-document and vice versa.
pub fn build_word_network(corpus: &Corpus, window: usize) -> WordNetwork {
    let mut pseudo_docs = vec![Vec::new(); corpus.vocab_size()];
    for doc in corpus.docs() {
        for i in 0..doc.len() {
            for j in (i + 1)..doc.len().min(i.saturating_add(window)) {
                pseudo_docs[doc[i]].push(doc[j]);
                pseudo_docs[doc[j]].push(doc[i]);
            }
        }
    }
    WordNetwork { pseudo_docs }
}

/// Mean of p(·|w) over each document's tokens; empty documents get 1/K.
pub fn wntm_doc_topics<F: Real>(topics_given_word: &Array2<F>, docs: &[Vec<usize>]) -> Array2<F> {
    let k = topics_given_word.ncols();
    let mut theta = Array2::from_elem((docs.len(), k), F::one() / F::of_usize(k));
    for (d, doc) in docs.iter().enumerate() {
        if doc.is_empty() {
            continue;
        }
        let mut row = theta.row_mut(d);
        row.fill(F::zero());
        for &w in doc {
            row += &topics_given_word.row(w);
        }
        let n = F::of_usize(doc.len());
        row.mapv_inplace(|x| x / n);
    }
    theta
}

/// φ_kw ∝ p(k|w)·freq(w), normalized over w.
pub(crate) fn invert_to_phi<F: Real>(topics_given_word: &Array2<F>, word_freq: &[usize]) -> Array2<F> {
    let mut phi = topics_given_word.t().to_owned();
    for (mut col, &f) in phi.columns_mut().into_iter().zip(word_freq) {
        let f = F::of_usize(f);
        col.mapv_inplace(|p| p * f);
    }
    for mut row in phi.outer_iter_mut() {
        let total: F = row.iter().copied().sum();
        row.mapv_inplace(|x| x / total);
    }
    phi
}

pub fn wntm_train<F: Real>(corpus: &Corpus, params: &ModelParams<F>) -> Result<TrainedModel<F>> {
    wntm_train_observed(corpus, params, |_, _| {})
}

/// The observer sees the LDA chain running over the pseudo-documents.
pub fn wntm_train_observed<F: Real>(
    corpus: &Corpus,
    params: &ModelParams<F>,
    mut observer: impl FnMut(usize, &LdaSampler<'_, F>),
) -> Result<TrainedModel<F>> {
    params.validate()?;
    let window = params.extras.window.unwrap_or(DEFAULT_WNTM_WINDOW);
    let network = build_word_network(corpus, window);
    if network.num_edges() == 0 {
        return Err(Error::NoCooccurrence);
    }
    let mut rng = RngStream::new(params.seed);
    let mut sampler = LdaSampler::new(&network.pseudo_docs, corpus.vocab_size(), params, &mut rng);
    for it in 0..params.iterations {
        sampler.sweep(&mut rng);
        observer(it, &sampler);
    }
    let counts = sampler.counts();
    let topics_given_word = estimate_theta(&counts.doc_topic, &counts.doc_totals, params.alpha);
    let phi = invert_to_phi(&topics_given_word, &corpus.word_frequencies());
    let theta = wntm_doc_topics(&topics_given_word, corpus.docs());
    let assignments = corpus
        .docs()
        .iter()
        .map(|doc| {
            doc.iter()
                .map(|&w| {
                    let row = topics_given_word.row(w);
                    (0..row.len()).fold(0, |best, k| if row[k] > row[best] { k } else { best })
                })
                .collect()
        })
        .collect();
    let mut params = params.clone();
    params.extras.window = Some(window);
    Ok(TrainedModel {
        kind: ModelKind::Wntm,
        params,
        theta,
        phi,
        vocab: corpus.vocab().clone(),
        assignments,
        topic_weights: None,
        corpus: None,
    })
}
