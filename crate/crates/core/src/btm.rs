//! Biterm Topic Model: one topic per unordered co-occurring word pair.

use ndarray::Array2;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::sampling::{
    check_counts, draw, estimate_phi, CountState, CountViolation, ModelKind, ModelParams, RngStream, TrainedModel,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Biterm {
    pub w1: usize,
    pub w2: usize,
    pub source_doc: usize,
}

impl Biterm {
    /// Orders the pair so that `w1 <= w2`.
    pub fn new(a: usize, b: usize, source_doc: usize) -> Self {
        Self { w1: a.min(b), w2: a.max(b), source_doc }
    }
}

/// Biterms of one document: every position pair `i < j` with `j − i < window`.
/// `None` treats the whole document as one window.
pub fn doc_biterms(doc: &[usize], window: Option<usize>, source_doc: usize) -> Vec<Biterm> {
    let window = window.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    for i in 0..doc.len() {
        for j in (i + 1)..doc.len() {
            if j - i >= window {
                break;
            }
            out.push(Biterm::new(doc[i], doc[j], source_doc));
        }
    }
    out
}

/// Biterms of every document, in document order.
pub fn extract_biterms(corpus: &Corpus, window: Option<usize>) -> Vec<Biterm> {
    corpus.docs().iter().enumerate().flat_map(|(d, doc)| doc_biterms(doc, window, d)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BtmState<F> {
    /// nb_k: biterms per topic.
    pub topic_biterms: Vec<F>,
    /// n_kw: word slots per topic, two per biterm.
    pub topic_word: Array2<F>,
    /// z_b
    pub assignments: Vec<usize>,
}

impl<F: Real> BtmState<F> {
    pub fn zeros(num_topics: usize, vocab_size: usize) -> Self {
        Self {
            topic_biterms: vec![F::zero(); num_topics],
            topic_word: Array2::zeros((num_topics, vocab_size)),
            assignments: Vec::new(),
        }
    }

    pub fn num_topics(&self) -> usize {
        self.topic_biterms.len()
    }

    fn add(&mut self, b: &Biterm, k: usize) {
        self.topic_biterms[k] += F::one();
        self.topic_word[[k, b.w1]] += F::one();
        self.topic_word[[k, b.w2]] += F::one();
    }

    fn remove(&mut self, b: &Biterm, k: usize) {
        self.topic_biterms[k] -= F::one();
        self.topic_word[[k, b.w1]] -= F::one();
        self.topic_word[[k, b.w2]] -= F::one();
    }
}

#[inline]
fn btm_weights_into<F: Real>(state: &BtmState<F>, b: &Biterm, alpha: F, beta: F, out: &mut Vec<F>) -> F {
    let vbeta = F::of_usize(state.topic_word.ncols()) * beta;
    out.clear();
    let mut total = F::zero();
    for k in 0..state.num_topics() {
        let nb = state.topic_biterms[k];
        let denom = F::lit(2.0) * nb + vbeta;
        // pair product first so the weight is exactly symmetric in (w1, w2)
        let pair = (state.topic_word[[k, b.w1]] + beta) * (state.topic_word[[k, b.w2]] + beta);
        let weight = (nb + alpha) * pair / (denom * denom);
        total += weight;
        out.push(weight);
    }
    total
}

/// `(nb_k + α)(n_kw1 + β)(n_kw2 + β)/(2·nb_k + Vβ)²` for a biterm removed
/// from `state`.
pub fn btm_conditional<F: Real>(state: &BtmState<F>, b: &Biterm, params: &ModelParams<F>) -> Vec<F> {
    let mut out = Vec::with_capacity(state.num_topics());
    btm_weights_into(state, b, params.alpha, params.beta, &mut out);
    out
}

/// P(k|d) as the mean of the biterm posteriors P(k|b) ∝ θ_k φ_kw1 φ_kw2.
/// Single-token documents use P(k|d) ∝ θ_k φ_kw; empty ones get 1/K.
pub fn btm_doc_topics<F: Real>(
    topic_weights: &[F],
    phi: &Array2<F>,
    docs: &[Vec<usize>],
    window: Option<usize>,
) -> Array2<F> {
    let k = topic_weights.len();
    let uniform = F::one() / F::of_usize(k);
    let mut theta = Array2::from_elem((docs.len(), k), uniform);
    let mut post = vec![F::zero(); k];
    for (d, doc) in docs.iter().enumerate() {
        let mut row = theta.row_mut(d);
        match doc.len() {
            0 => {}
            1 => {
                for t in 0..k {
                    post[t] = topic_weights[t] * phi[[t, doc[0]]];
                }
                let total: F = post.iter().copied().sum();
                for t in 0..k {
                    row[t] = post[t] / total;
                }
            }
            _ => {
                let biterms = doc_biterms(doc, window, d);
                row.fill(F::zero());
                for b in &biterms {
                    for t in 0..k {
                        post[t] = topic_weights[t] * phi[[t, b.w1]] * phi[[t, b.w2]];
                    }
                    let total: F = post.iter().copied().sum();
                    for t in 0..k {
                        row[t] += post[t] / total;
                    }
                }
                let n = F::of_usize(biterms.len());
                row.mapv_inplace(|x| x / n);
            }
        }
    }
    theta
}

#[derive(Debug, Clone)]
pub struct BtmSampler<F> {
    biterms: Vec<Biterm>,
    num_docs: usize,
    state: BtmState<F>,
    alpha: F,
    beta: F,
    weights: Vec<F>,
}

impl<F: Real> BtmSampler<F> {
    pub fn new(biterms: Vec<Biterm>, num_docs: usize, vocab_size: usize, params: &ModelParams<F>, rng: &mut RngStream) -> Self {
        let k = params.topics;
        let mut state = BtmState::zeros(k, vocab_size);
        state.assignments = biterms
            .iter()
            .map(|b| {
                let z = rng.below(k);
                state.add(b, z);
                z
            })
            .collect();
        Self { biterms, num_docs, state, alpha: params.alpha, beta: params.beta, weights: Vec::with_capacity(k) }
    }

    pub fn sweep(&mut self, rng: &mut RngStream) {
        for (i, b) in self.biterms.iter().enumerate() {
            let old = self.state.assignments[i];
            self.state.remove(b, old);
            let total = btm_weights_into(&self.state, b, self.alpha, self.beta, &mut self.weights);
            let new = draw(&self.weights, total, rng);
            self.state.add(b, new);
            self.state.assignments[i] = new;
        }
    }

    pub fn state(&self) -> &BtmState<F> {
        &self.state
    }

    pub fn biterms(&self) -> &[Biterm] {
        &self.biterms
    }

    /// Snapshot with biterms as the document-side unit and n_k = 2·nb_k.
    pub fn count_state(&self) -> CountState<F> {
        let k = self.state.num_topics();
        let mut c = CountState::zeros(self.num_docs, k, self.state.topic_word.ncols());
        for (b, &z) in self.biterms.iter().zip(&self.state.assignments) {
            c.doc_topic[[b.source_doc, z]] += F::one();
            c.doc_totals[b.source_doc] += F::one();
            c.assignments[b.source_doc].push(z);
        }
        c.topic_word = self.state.topic_word.clone();
        c.topic_totals = self.state.topic_biterms.iter().map(|&nb| F::lit(2.0) * nb).collect();
        c
    }

    /// Count invariants plus Σ_w n_kw = 2·nb_k and Σ_k nb_k = |B|.
    pub fn check(&self) -> Result<(), CountViolation> {
        check_counts(&self.count_state())?;
        let total: F = self.state.topic_biterms.iter().copied().sum();
        if total != F::of_usize(self.biterms.len()) {
            return Err(CountViolation::Model(format!("Σ nb_k = {total}, |B| = {}", self.biterms.len())));
        }
        Ok(())
    }

    /// Global topic proportions θ_k = (nb_k + α)/(|B| + Kα).
    pub fn topic_weights(&self) -> Vec<F> {
        let k = F::of_usize(self.state.num_topics());
        let nb = F::of_usize(self.biterms.len());
        self.state.topic_biterms.iter().map(|&x| (x + self.alpha) / (nb + k * self.alpha)).collect()
    }

    /// φ_kw = (n_kw + β)/(2·nb_k + Vβ).
    pub fn phi(&self) -> Array2<F> {
        let totals: Vec<F> = self.state.topic_biterms.iter().map(|&nb| F::lit(2.0) * nb).collect();
        estimate_phi(&self.state.topic_word, &totals, self.beta)
    }
}

pub fn btm_train<F: Real>(corpus: &Corpus, params: &ModelParams<F>) -> Result<TrainedModel<F>> {
    btm_train_observed(corpus, params, |_, _| {})
}

pub fn btm_train_observed<F: Real>(
    corpus: &Corpus,
    params: &ModelParams<F>,
    mut observer: impl FnMut(usize, &BtmSampler<F>),
) -> Result<TrainedModel<F>> {
    params.validate()?;
    let window = params.extras.window;
    let biterms = extract_biterms(corpus, window);
    if biterms.is_empty() && !corpus.docs().iter().any(|d| d.len() == 1) {
        return Err(Error::NoBiterms);
    }
    let mut rng = RngStream::new(params.seed);
    let mut sampler = BtmSampler::new(biterms, corpus.num_docs(), corpus.vocab_size(), params, &mut rng);
    for it in 0..params.iterations {
        sampler.sweep(&mut rng);
        observer(it, &sampler);
    }
    let topic_weights = sampler.topic_weights();
    let phi = sampler.phi();
    let theta = btm_doc_topics(&topic_weights, &phi, corpus.docs(), window);
    let assignments = sampler.count_state().assignments;
    Ok(TrainedModel {
        kind: ModelKind::Btm,
        params: params.clone(),
        theta,
        phi,
        vocab: corpus.vocab().clone(),
        assignments,
        topic_weights: Some(topic_weights),
        corpus: None,
    })
}
