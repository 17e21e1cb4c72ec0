//! Pseudo-document Topic Model (self-aggregation).
//!
//! Every short text belongs to one of P latent pseudo-documents. Token
//! topics are drawn against the pseudo-document's topic counts rather than
//! the short text's own, which pools co-occurrence evidence across texts.

use ndarray::Array2;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::lda::token_weights;
use crate::sampling::{
    check_counts, draw, estimate_phi, CountState, CountViolation, ModelKind, ModelParams, RngStream, TrainedModel,
};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct PtmState<F> {
    /// l_d
    pub pseudo_assignments: Vec<usize>,
    /// m_p: short texts per pseudo-document.
    pub pseudo_docs: Vec<F>,
    /// n_pk
    pub pseudo_topic: Array2<F>,
    /// n_p
    pub pseudo_totals: Vec<F>,
    /// c_dk: each short text's own token-topic counts.
    pub doc_topic: Array2<F>,
    pub topic_word: Array2<F>,
    pub topic_totals: Vec<F>,
    /// Per-token topics.
    pub assignments: Vec<Vec<usize>>,
}

impl<F: Real> PtmState<F> {
    pub fn zeros(num_docs: usize, num_pseudo: usize, num_topics: usize, vocab_size: usize) -> Self {
        Self {
            pseudo_assignments: vec![0; num_docs],
            pseudo_docs: vec![F::zero(); num_pseudo],
            pseudo_topic: Array2::zeros((num_pseudo, num_topics)),
            pseudo_totals: vec![F::zero(); num_pseudo],
            doc_topic: Array2::zeros((num_docs, num_topics)),
            topic_word: Array2::zeros((num_topics, vocab_size)),
            topic_totals: vec![F::zero(); num_topics],
            assignments: vec![Vec::new(); num_docs],
        }
    }

    pub fn num_pseudo(&self) -> usize {
        self.pseudo_docs.len()
    }

    pub fn num_topics(&self) -> usize {
        self.topic_totals.len()
    }

    fn attach(&mut self, d: usize, p: usize, sign: F) {
        self.pseudo_docs[p] += sign;
        let mut n = F::zero();
        for k in 0..self.num_topics() {
            let c = self.doc_topic[[d, k]];
            self.pseudo_topic[[p, k]] += sign * c;
            n += c;
        }
        self.pseudo_totals[p] += sign * n;
    }
}

/// `ln(m_p+λ) + Σ_k Σ_{j<c_dk} ln(n_pk+α+j) − Σ_{i<|d|} ln(n_p+Kα+i)`,
/// with the document already detached from the pseudo-document side.
fn pseudo_log_weights_into<F: Real>(state: &PtmState<F>, d: usize, doc_len: usize, alpha: F, lambda: F, out: &mut Vec<F>) {
    let k_alpha = F::of_usize(state.num_topics()) * alpha;
    out.clear();
    for p in 0..state.num_pseudo() {
        let mut lw = (state.pseudo_docs[p] + lambda).ln();
        for k in 0..state.num_topics() {
            let c = state.doc_topic[[d, k]].to_usize().unwrap_or(0);
            let base = state.pseudo_topic[[p, k]] + alpha;
            for j in 0..c {
                lw += (base + F::of_usize(j)).ln();
            }
        }
        let denom = state.pseudo_totals[p] + k_alpha;
        for i in 0..doc_len {
            lw -= (denom + F::of_usize(i)).ln();
        }
        out.push(lw);
    }
}

/// Unnormalized weights over pseudo-documents for a short text whose token
/// topics are `doc_topics`, given a state from which the text is detached.
///
/// `weight[p] = (m_p + λ) · Π_i (n_p,z_i + α + inc_i)/(n_p + Kα + i)`, where
/// `inc_i` counts earlier tokens of the text with the same topic.
pub fn ptm_doc_conditional<F: Real>(state: &PtmState<F>, doc_topics: &[usize], params: &ModelParams<F>) -> Vec<F> {
    let k_alpha = F::of_usize(state.num_topics()) * params.alpha;
    let lambda = params.extras.lambda;
    (0..state.num_pseudo())
        .map(|p| {
            let mut seen = vec![0usize; state.num_topics()];
            let mut lw = (state.pseudo_docs[p] + lambda).ln();
            for (i, &z) in doc_topics.iter().enumerate() {
                lw += (state.pseudo_topic[[p, z]] + params.alpha + F::of_usize(seen[z])).ln();
                lw -= (state.pseudo_totals[p] + k_alpha + F::of_usize(i)).ln();
                seen[z] += 1;
            }
            lw.exp()
        })
        .collect()
}

/// LDA's token conditional with pseudo-document `p` in the document role.
pub fn ptm_word_conditional<F: Real>(state: &PtmState<F>, p: usize, w: usize, params: &ModelParams<F>) -> Vec<F> {
    let row = state.pseudo_topic.row(p).to_vec();
    let mut out = Vec::with_capacity(state.num_topics());
    token_weights(&row, &state.topic_word, &state.topic_totals, w, params.alpha, params.beta, &mut out);
    out
}

pub fn default_pseudo_docs(num_docs: usize) -> usize {
    num_docs.div_ceil(10).max(1)
}

#[derive(Debug, Clone)]
pub struct PtmSampler<'a, F> {
    docs: &'a [Vec<usize>],
    state: PtmState<F>,
    alpha: F,
    beta: F,
    lambda: F,
    weights: Vec<F>,
    scratch: Vec<F>,
    resample_pseudo: bool,
}

impl<'a, F: Real> PtmSampler<'a, F> {
    /// Uniform random pseudo-document per text and topic per token.
    pub fn new(
        docs: &'a [Vec<usize>],
        vocab_size: usize,
        num_pseudo: usize,
        params: &ModelParams<F>,
        rng: &mut RngStream,
    ) -> Self {
        let k = params.topics;
        let mut state = PtmState::zeros(docs.len(), num_pseudo, k, vocab_size);
        for (d, doc) in docs.iter().enumerate() {
            let p = rng.below(num_pseudo);
            state.pseudo_assignments[d] = p;
            for &w in doc {
                let z = rng.below(k);
                state.assignments[d].push(z);
                state.doc_topic[[d, z]] += F::one();
                state.topic_word[[z, w]] += F::one();
                state.topic_totals[z] += F::one();
            }
            state.attach(d, p, F::one());
        }
        Self {
            docs,
            state,
            alpha: params.alpha,
            beta: params.beta,
            lambda: params.extras.lambda,
            weights: Vec::with_capacity(k.max(num_pseudo)),
            scratch: Vec::with_capacity(num_pseudo),
            resample_pseudo: true,
        }
    }

    /// Freezes pseudo-document membership; sweeps then only move token topics.
    pub fn fix_pseudo_assignments(&mut self) {
        self.resample_pseudo = false;
    }

    /// Resamples every l_d, then every token topic.
    pub fn sweep(&mut self, rng: &mut RngStream) {
        if self.resample_pseudo {
            for (d, doc) in self.docs.iter().enumerate() {
                let old = self.state.pseudo_assignments[d];
                self.state.attach(d, old, -F::one());
                pseudo_log_weights_into(&self.state, d, doc.len(), self.alpha, self.lambda, &mut self.weights);
                let new = crate::sampling::draw_log(&self.weights, &mut self.scratch, rng);
                self.state.pseudo_assignments[d] = new;
                self.state.attach(d, new, F::one());
            }
        }
        let s = &mut self.state;
        for (d, doc) in self.docs.iter().enumerate() {
            let p = s.pseudo_assignments[d];
            for (i, &w) in doc.iter().enumerate() {
                let old = s.assignments[d][i];
                s.pseudo_topic[[p, old]] -= F::one();
                s.doc_topic[[d, old]] -= F::one();
                s.topic_word[[old, w]] -= F::one();
                s.topic_totals[old] -= F::one();
                let row = s.pseudo_topic.row(p);
                let total = token_weights(
                    row.as_slice().expect("row-major counts"),
                    &s.topic_word,
                    &s.topic_totals,
                    w,
                    self.alpha,
                    self.beta,
                    &mut self.weights,
                );
                let new = draw(&self.weights, total, rng);
                s.pseudo_topic[[p, new]] += F::one();
                s.doc_topic[[d, new]] += F::one();
                s.topic_word[[new, w]] += F::one();
                s.topic_totals[new] += F::one();
                s.assignments[d][i] = new;
            }
        }
    }

    pub fn state(&self) -> &PtmState<F> {
        &self.state
    }

    /// Short-text side as a [`CountState`]: c_dk, |d| and the word counts.
    pub fn count_state(&self) -> CountState<F> {
        let s = &self.state;
        CountState {
            doc_topic: s.doc_topic.clone(),
            topic_word: s.topic_word.clone(),
            topic_totals: s.topic_totals.clone(),
            doc_totals: self.docs.iter().map(|d| F::of_usize(d.len())).collect(),
            assignments: s.assignments.clone(),
            integral: true,
        }
    }

    /// Count invariants plus Σ_p m_p = D, Σ_k n_pk = n_p, and n_pk equal to
    /// the sum of its members' c_dk.
    pub fn check(&self) -> Result<(), CountViolation> {
        check_counts(&self.count_state())?;
        let s = &self.state;
        let total: F = s.pseudo_docs.iter().copied().sum();
        if total != F::of_usize(self.docs.len()) {
            return Err(CountViolation::Model(format!("Σ m_p = {total}, D = {}", self.docs.len())));
        }
        let mut members = vec![0usize; s.num_pseudo()];
        let mut expected = Array2::<F>::zeros(s.pseudo_topic.raw_dim());
        for (d, &p) in s.pseudo_assignments.iter().enumerate() {
            members[p] += 1;
            let mut row = expected.row_mut(p);
            row += &s.doc_topic.row(d);
        }
        for p in 0..s.num_pseudo() {
            if s.pseudo_docs[p] != F::of_usize(members[p]) {
                return Err(CountViolation::Model(format!("m_{p} = {} but {} texts point to it", s.pseudo_docs[p], members[p])));
            }
            let row_sum: F = s.pseudo_topic.row(p).iter().copied().sum();
            if row_sum != s.pseudo_totals[p] {
                return Err(CountViolation::Model(format!("pseudo-doc {p}: n_p = {} but Σ_k n_pk = {row_sum}", s.pseudo_totals[p])));
            }
            if s.pseudo_topic.row(p) != expected.row(p) {
                return Err(CountViolation::Model(format!("pseudo-doc {p}: n_pk disagrees with its members' counts")));
            }
        }
        Ok(())
    }

    /// θ_dk = (c_dk + α·ψ_{l_d,k})/(|d| + α) with ψ_p the smoothed topic
    /// distribution of the text's pseudo-document.
    pub fn theta(&self) -> Array2<F> {
        let s = &self.state;
        let k_alpha = F::of_usize(s.num_topics()) * self.alpha;
        let mut theta = s.doc_topic.clone();
        for (d, mut row) in theta.outer_iter_mut().enumerate() {
            let p = s.pseudo_assignments[d];
            let n = F::of_usize(self.docs[d].len());
            for k in 0..row.len() {
                let psi = (s.pseudo_topic[[p, k]] + self.alpha) / (s.pseudo_totals[p] + k_alpha);
                row[k] = (row[k] + self.alpha * psi) / (n + self.alpha);
            }
        }
        theta
    }
}

pub fn ptm_train<F: Real>(corpus: &Corpus, params: &ModelParams<F>) -> Result<TrainedModel<F>> {
    ptm_train_observed(corpus, params, |_, _| {})
}

pub fn ptm_train_observed<F: Real>(
    corpus: &Corpus,
    params: &ModelParams<F>,
    mut observer: impl FnMut(usize, &PtmSampler<'_, F>),
) -> Result<TrainedModel<F>> {
    params.validate()?;
    if corpus.total_tokens() == 0 {
        return Err(Error::NoTokens);
    }
    let num_pseudo = params.extras.pseudo_docs.unwrap_or_else(|| default_pseudo_docs(corpus.num_docs()));
    let mut params = params.clone();
    params.extras.pseudo_docs = Some(num_pseudo);
    let mut rng = RngStream::new(params.seed);
    let mut sampler = PtmSampler::new(corpus.docs(), corpus.vocab_size(), num_pseudo, &params, &mut rng);
    for it in 0..params.iterations {
        sampler.sweep(&mut rng);
        observer(it, &sampler);
    }
    let theta = sampler.theta();
    let s = sampler.state;
    Ok(TrainedModel {
        kind: ModelKind::Ptm,
        phi: estimate_phi(&s.topic_word, &s.topic_totals, params.beta),
        params,
        theta,
        vocab: corpus.vocab().clone(),
        assignments: s.assignments,
        topic_weights: None,
        corpus: None,
    })
}
