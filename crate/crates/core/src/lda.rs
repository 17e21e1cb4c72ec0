//! Collapsed Gibbs LDA, the long-text baseline.

use ndarray::Array2;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::sampling::{
    check_counts, draw, point_estimates, CountState, CountViolation, ModelKind, ModelParams, RngStream, TrainedModel,
};
use crate::scalar::{ln_rising, Real};

/// `(n_dk + α)(n_kw + β)/(n_k + Vβ)` for every topic, written into `out`.
/// Returns the sum of the weights.
#[inline]
pub(crate) fn token_weights<F: Real>(
    doc_row: &[F],
    topic_word: &Array2<F>,
    topic_totals: &[F],
    w: usize,
    alpha: F,
    beta: F,
    out: &mut Vec<F>,
) -> F {
    let vbeta = F::of_usize(topic_word.ncols()) * beta;
    out.clear();
    let mut total = F::zero();
    for (k, (&n_dk, &n_k)) in doc_row.iter().zip(topic_totals).enumerate() {
        let weight = (n_dk + alpha) * (topic_word[[k, w]] + beta) / (n_k + vbeta);
        total += weight;
        out.push(weight);
    }
    total
}

/// Unnormalized full conditional of a token of word `w` in document `d`,
/// given counts from which that token has already been removed.
pub fn lda_conditional<F: Real>(counts: &CountState<F>, d: usize, w: usize, params: &ModelParams<F>) -> Vec<F> {
    let mut out = Vec::with_capacity(counts.num_topics());
    let row = counts.doc_topic.row(d).to_vec();
    token_weights(&row, &counts.topic_word, &counts.topic_totals, w, params.alpha, params.beta, &mut out);
    out
}

/// Log of the collapsed joint `p(w, z)` with θ and φ integrated out.
pub fn lda_log_joint<F: Real>(counts: &CountState<F>, params: &ModelParams<F>) -> F {
    let n = |x: F| x.to_usize().unwrap_or(0);
    let k = F::of_usize(counts.num_topics());
    let v = F::of_usize(counts.vocab_size());
    let mut lp = F::zero();
    for (row, &n_d) in counts.doc_topic.outer_iter().zip(&counts.doc_totals) {
        lp += row.iter().map(|&c| ln_rising(params.alpha, n(c))).sum::<F>();
        lp -= ln_rising(k * params.alpha, n(n_d));
    }
    for (row, &n_k) in counts.topic_word.outer_iter().zip(&counts.topic_totals) {
        lp += row.iter().map(|&c| ln_rising(params.beta, n(c))).sum::<F>();
        lp -= ln_rising(v * params.beta, n(n_k));
    }
    lp
}

/// Gibbs chain over token topics. Also runs WNTM's word-network pseudo-documents.
#[derive(Debug, Clone)]
pub struct LdaSampler<'a, F> {
    docs: &'a [Vec<usize>],
    counts: CountState<F>,
    alpha: F,
    beta: F,
    weights: Vec<F>,
}

impl<'a, F: Real> LdaSampler<'a, F> {
    /// Assigns every token a uniformly random topic.
    pub fn new(docs: &'a [Vec<usize>], vocab_size: usize, params: &ModelParams<F>, rng: &mut RngStream) -> Self {
        let k = params.topics;
        let mut counts = CountState::zeros(docs.len(), k, vocab_size);
        for (d, doc) in docs.iter().enumerate() {
            counts.doc_totals[d] = F::of_usize(doc.len());
            let zs: Vec<usize> = doc
                .iter()
                .map(|&w| {
                    let z = rng.below(k);
                    counts.add_token(d, w, z);
                    z
                })
                .collect();
            counts.assignments[d] = zs;
        }
        Self { docs, counts, alpha: params.alpha, beta: params.beta, weights: Vec::with_capacity(k) }
    }

    /// One pass over all tokens in document-then-position order.
    pub fn sweep(&mut self, rng: &mut RngStream) {
        let c = &mut self.counts;
        for (d, doc) in self.docs.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = c.assignments[d][i];
                c.remove_token(d, w, old);
                let row = c.doc_topic.row(d);
                let total = token_weights(
                    row.as_slice().expect("row-major counts"),
                    &c.topic_word,
                    &c.topic_totals,
                    w,
                    self.alpha,
                    self.beta,
                    &mut self.weights,
                );
                let new = draw(&self.weights, total, rng);
                c.add_token(d, w, new);
                c.assignments[d][i] = new;
            }
        }
    }

    pub fn counts(&self) -> &CountState<F> {
        &self.counts
    }

    pub fn check(&self) -> Result<(), CountViolation> {
        check_counts(&self.counts)
    }

    #[cfg(test)]
    pub(crate) fn with_counts(mut self, counts: CountState<F>) -> Self {
        self.counts = counts;
        self
    }

    pub(crate) fn into_counts(self) -> CountState<F> {
        self.counts
    }
}

pub fn lda_train<F: Real>(corpus: &Corpus, params: &ModelParams<F>) -> Result<TrainedModel<F>> {
    lda_train_observed(corpus, params, |_, _| {})
}

/// Like [`lda_train`], calling `observer(sweep, sampler)` after every sweep.
pub fn lda_train_observed<F: Real>(
    corpus: &Corpus,
    params: &ModelParams<F>,
    mut observer: impl FnMut(usize, &LdaSampler<'_, F>),
) -> Result<TrainedModel<F>> {
    params.validate()?;
    if corpus.total_tokens() == 0 {
        return Err(Error::NoTokens);
    }
    let mut rng = RngStream::new(params.seed);
    let mut sampler = LdaSampler::new(corpus.docs(), corpus.vocab_size(), params, &mut rng);
    for it in 0..params.iterations {
        sampler.sweep(&mut rng);
        observer(it, &sampler);
    }
    let counts = sampler.into_counts();
    let (theta, phi) = point_estimates(&counts, params);
    Ok(TrainedModel {
        kind: ModelKind::Lda,
        params: params.clone(),
        theta,
        phi,
        vocab: corpus.vocab().clone(),
        assignments: counts.assignments,
        topic_weights: None,
        corpus: None,
    })
}
