//! Dirichlet Multinomial Mixture: one topic per document.

use ndarray::Array2;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::gpudmm::PromotionUrn;
use crate::sampling::{
    check_counts, draw, estimate_phi, CountState, CountViolation, ModelKind, ModelParams, RngStream, TrainedModel,
};
use crate::scalar::Real;

/// Cluster-level counts. In GPU-DMM `topic_word` and `topic_totals` hold the
/// promoted (real-valued) counts.
#[derive(Debug, Clone, PartialEq)]
pub struct DmmState<F> {
    /// m_k: documents per topic.
    pub topic_docs: Vec<F>,
    /// n_kw
    pub topic_word: Array2<F>,
    /// n_k
    pub topic_totals: Vec<F>,
    /// z_d
    pub assignments: Vec<usize>,
}

impl<F: Real> DmmState<F> {
    pub fn zeros(num_docs: usize, num_topics: usize, vocab_size: usize) -> Self {
        Self {
            topic_docs: vec![F::zero(); num_topics],
            topic_word: Array2::zeros((num_topics, vocab_size)),
            topic_totals: vec![F::zero(); num_topics],
            assignments: vec![0; num_docs],
        }
    }

    pub fn num_topics(&self) -> usize {
        self.topic_docs.len()
    }
}

/// Distinct words of `doc` with their counts, ordered by word id.
pub(crate) fn bag_of_words(doc: &[usize]) -> Vec<(usize, usize)> {
    let mut sorted = doc.to_vec();
    sorted.sort_unstable();
    let mut bag: Vec<(usize, usize)> = Vec::new();
    for w in sorted {
        match bag.last_mut() {
            Some((last, c)) if *last == w => *c += 1,
            _ => bag.push((w, 1)),
        }
    }
    bag
}

/// Log conditional weights for a document removed from `state`:
/// `ln(m_k+α) + Σ_w Σ_{j<c_w} ln(n_kw+β+j) − Σ_{i<|d|} ln(n_k+Vβ+i)`.
pub(crate) fn dmm_log_weights_into<F: Real>(
    state: &DmmState<F>,
    bag: &[(usize, usize)],
    doc_len: usize,
    alpha: F,
    beta: F,
    out: &mut Vec<F>,
) {
    let vbeta = F::of_usize(state.topic_word.ncols()) * beta;
    out.clear();
    for k in 0..state.num_topics() {
        let mut lw = (state.topic_docs[k] + alpha).ln();
        for &(w, c) in bag {
            let base = state.topic_word[[k, w]] + beta;
            for j in 0..c {
                lw += (base + F::of_usize(j)).ln();
            }
        }
        let denom = state.topic_totals[k] + vbeta;
        for i in 0..doc_len {
            lw -= (denom + F::of_usize(i)).ln();
        }
        out.push(lw);
    }
}

pub fn dmm_log_weights<F: Real>(state: &DmmState<F>, doc: &[usize], params: &ModelParams<F>) -> Vec<F> {
    let mut out = Vec::with_capacity(state.num_topics());
    dmm_log_weights_into(state, &bag_of_words(doc), doc.len(), params.alpha, params.beta, &mut out);
    out
}

/// Unnormalized conditional over topics for a document removed from `state`.
/// Documents longer than one token are evaluated in log space.
pub fn dmm_conditional<F: Real>(state: &DmmState<F>, doc: &[usize], params: &ModelParams<F>) -> Vec<F> {
    if doc.len() <= 1 {
        let vbeta = F::of_usize(state.topic_word.ncols()) * params.beta;
        return (0..state.num_topics())
            .map(|k| {
                let prior = state.topic_docs[k] + params.alpha;
                match doc.first() {
                    Some(&w) => prior * (state.topic_word[[k, w]] + params.beta) / (state.topic_totals[k] + vbeta),
                    None => prior,
                }
            })
            .collect();
    }
    dmm_log_weights(state, doc, params).into_iter().map(F::exp).collect()
}

/// Document-level Gibbs chain shared by DMM and GPU-DMM.
#[derive(Debug, Clone)]
pub struct DmmSampler<'a, F> {
    docs: &'a [Vec<usize>],
    bags: Vec<Vec<(usize, usize)>>,
    state: DmmState<F>,
    posteriors: Array2<F>,
    urn: Option<PromotionUrn<F>>,
    alpha: F,
    beta: F,
    log_w: Vec<F>,
    scratch: Vec<F>,
}

impl<'a, F: Real> DmmSampler<'a, F> {
    pub(crate) fn with_urn(
        docs: &'a [Vec<usize>],
        vocab_size: usize,
        params: &ModelParams<F>,
        urn: Option<PromotionUrn<F>>,
        rng: &mut RngStream,
    ) -> Self {
        let k = params.topics;
        let uniform = F::one() / F::of_usize(k);
        let mut sampler = Self {
            docs,
            bags: docs.iter().map(|d| bag_of_words(d)).collect(),
            state: DmmState::zeros(docs.len(), k, vocab_size),
            posteriors: Array2::from_elem((docs.len(), k), uniform),
            urn,
            alpha: params.alpha,
            beta: params.beta,
            log_w: Vec::with_capacity(k),
            scratch: Vec::with_capacity(k),
        };
        for d in 0..docs.len() {
            let z = rng.below(k);
            sampler.state.assignments[d] = z;
            sampler.join(d, z);
        }
        sampler
    }

    /// Plain DMM: every document starts in a uniformly random topic.
    pub fn new(docs: &'a [Vec<usize>], vocab_size: usize, params: &ModelParams<F>, rng: &mut RngStream) -> Self {
        Self::with_urn(docs, vocab_size, params, None, rng)
    }

    fn join(&mut self, d: usize, k: usize) {
        let doc: &'a [usize] = &self.docs[d];
        self.state.topic_docs[k] += F::one();
        match &mut self.urn {
            Some(urn) => urn.add(&mut self.state, doc, d, k),
            None => {
                for &w in doc {
                    self.state.topic_word[[k, w]] += F::one();
                }
                self.state.topic_totals[k] += F::of_usize(doc.len());
            }
        }
    }

    fn leave(&mut self, d: usize, k: usize) {
        let doc: &'a [usize] = &self.docs[d];
        self.state.topic_docs[k] -= F::one();
        match &mut self.urn {
            Some(urn) => urn.remove(&mut self.state, doc, d, k),
            None => {
                for &w in doc {
                    self.state.topic_word[[k, w]] -= F::one();
                }
                self.state.topic_totals[k] -= F::of_usize(doc.len());
            }
        }
    }

    /// Resamples every document's topic once, in document order.
    pub fn sweep(&mut self, rng: &mut RngStream) {
        for d in 0..self.docs.len() {
            let old = self.state.assignments[d];
            self.leave(d, old);
            dmm_log_weights_into(&self.state, &self.bags[d], self.docs[d].len(), self.alpha, self.beta, &mut self.log_w);
            let max = self.log_w.iter().copied().fold(F::neg_infinity(), F::max);
            self.scratch.clear();
            self.scratch.extend(self.log_w.iter().map(|&lw| (lw - max).exp()));
            let total: F = self.scratch.iter().copied().sum();
            for (p, &s) in self.posteriors.row_mut(d).iter_mut().zip(&self.scratch) {
                // keep θ strictly positive when a topic's weight underflows
                *p = (s / total).max(F::min_positive_value());
            }
            let new = draw(&self.scratch, total, rng);
            self.state.assignments[d] = new;
            self.join(d, new);
        }
    }

    pub fn state(&self) -> &DmmState<F> {
        &self.state
    }

    /// Normalized conditional of each document from the latest sweep.
    pub fn posteriors(&self) -> &Array2<F> {
        &self.posteriors
    }

    pub fn urn(&self) -> Option<&PromotionUrn<F>> {
        self.urn.as_ref()
    }

    /// Count snapshot with each document's tokens all on its topic.
    pub fn count_state(&self) -> CountState<F> {
        let k = self.state.num_topics();
        let mut c = CountState::zeros(self.docs.len(), k, self.state.topic_word.ncols());
        for (d, doc) in self.docs.iter().enumerate() {
            let z = self.state.assignments[d];
            c.doc_topic[[d, z]] = F::of_usize(doc.len());
            c.doc_totals[d] = F::of_usize(doc.len());
            c.assignments[d] = vec![z];
        }
        c.topic_word = self.state.topic_word.clone();
        c.topic_totals = self.state.topic_totals.clone();
        c.integral = self.urn.is_none();
        c
    }

    /// Count invariants plus Σ_k m_k = D and m_k = |{d : z_d = k}|.
    pub fn check(&self) -> Result<(), CountViolation> {
        check_counts(&self.count_state())?;
        let mut tally = vec![0usize; self.state.num_topics()];
        for &z in &self.state.assignments {
            tally[z] += 1;
        }
        for (k, (&m, &t)) in self.state.topic_docs.iter().zip(&tally).enumerate() {
            if m != F::of_usize(t) {
                return Err(CountViolation::Model(format!("m_{k} = {m} but {t} documents carry topic {k}")));
            }
        }
        let total: F = self.state.topic_docs.iter().copied().sum();
        if total != F::of_usize(self.docs.len()) {
            return Err(CountViolation::Model(format!("Σ m_k = {total}, D = {}", self.docs.len())));
        }
        if let Some(urn) = &self.urn {
            urn.check(&self.state)?;
        }
        Ok(())
    }

    pub(crate) fn into_model(self, kind: ModelKind, corpus: &Corpus, params: &ModelParams<F>) -> TrainedModel<F> {
        let k = F::of_usize(params.topics);
        let d = F::of_usize(self.docs.len());
        let topic_weights =
            self.state.topic_docs.iter().map(|&m| (m + params.alpha) / (d + k * params.alpha)).collect();
        TrainedModel {
            kind,
            params: params.clone(),
            theta: self.posteriors,
            phi: estimate_phi(&self.state.topic_word, &self.state.topic_totals, params.beta),
            vocab: corpus.vocab().clone(),
            assignments: self.state.assignments.iter().map(|&z| vec![z]).collect(),
            topic_weights: Some(topic_weights),
            corpus: None,
        }
    }
}

pub fn dmm_train<F: Real>(corpus: &Corpus, params: &ModelParams<F>) -> Result<TrainedModel<F>> {
    dmm_train_observed(corpus, params, |_, _| {})
}

pub fn dmm_train_observed<F: Real>(
    corpus: &Corpus,
    params: &ModelParams<F>,
    mut observer: impl FnMut(usize, &DmmSampler<'_, F>),
) -> Result<TrainedModel<F>> {
    params.validate()?;
    if corpus.total_tokens() == 0 {
        return Err(Error::NoTokens);
    }
    let mut rng = RngStream::new(params.seed);
    let mut sampler = DmmSampler::new(corpus.docs(), corpus.vocab_size(), params, &mut rng);
    for it in 0..params.iterations {
        sampler.sweep(&mut rng);
        observer(it, &sampler);
    }
    Ok(sampler.into_model(ModelKind::Dmm, corpus, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::is_row_stochastic;
    use ndarray::array;
    use proptest::prelude::*;

    fn state_2x2(m: [f64; 2], n_kw: Array2<f64>, n_k: [f64; 2]) -> DmmState<f64> {
        DmmState { topic_docs: m.to_vec(), topic_word: n_kw, topic_totals: n_k.to_vec(), assignments: vec![] }
    }

    #[test]
    fn empty_doc_weight_is_the_prior() {
        let s = state_2x2([2.0, 2.0], array![[1.0, 1.0], [2.0, 0.0]], [2.0, 2.0]);
        let p = ModelParams::new(2);
        let w = dmm_conditional(&s, &[], &p);
        assert_eq!(w[0], w[1]);
        assert!((w[0] - 2.1).abs() < 1e-12);
    }

    #[test]
    fn one_word_doc_arithmetic() {
        let s = state_2x2([1.0, 0.0], array![[2.0, 1.0], [0.0, 0.0]], [3.0, 0.0]);
        let p = ModelParams::new(2).with_priors(1.0, 1.0);
        let w = dmm_conditional(&s, &[0], &p);
        assert!((w[0] - 1.2).abs() < 1e-12, "{w:?}");
        assert!((w[1] - 0.5).abs() < 1e-12, "{w:?}");
    }

    #[test]
    fn repeated_word_uses_rising_product() {
        let s = state_2x2([1.0, 2.0], array![[2.0, 1.0], [0.0, 3.0]], [3.0, 3.0]);
        let p = ModelParams::new(2).with_priors(0.5, 0.25);
        let w = dmm_conditional(&s, &[0, 0], &p);
        let vb = 2.0 * 0.25;
        let expect0 = 1.5 * (2.25 * 3.25) / ((3.0 + vb) * (4.0 + vb));
        let expect1 = 2.5 * (0.25 * 1.25) / ((3.0 + vb) * (4.0 + vb));
        assert!((w[0] - expect0).abs() < 1e-12);
        assert!((w[1] - expect1).abs() < 1e-12);
    }

    #[test]
    fn identical_docs_single_topic() {
        let corpus = Corpus::from_text("a b b\na b b\na b b\n").unwrap();
        let p = ModelParams::new(1).with_priors(0.1, 0.5).with_iterations(3);
        let m: TrainedModel<f64> = dmm_train(&corpus, &p).unwrap();
        assert!(m.assignments.iter().all(|z| z == &vec![0]));
        // counts a:3, b:6 → (3+0.5)/(9+1), (6+0.5)/(9+1)
        assert!((m.phi[[0, 0]] - 0.35).abs() < 1e-12);
        assert!((m.phi[[0, 1]] - 0.65).abs() < 1e-12);
        assert_eq!(m.theta, array![[1.0], [1.0], [1.0]]);
    }

    #[test]
    fn deterministic_and_consistent() {
        let corpus = Corpus::from_text("a b\nc d e\n\na a c\nd e\nb\n").unwrap();
        let p = ModelParams::new(3).with_iterations(20).with_seed(4);
        let a: TrainedModel<f64> = dmm_train_observed(&corpus, &p, |_, s| assert_eq!(s.check(), Ok(()))).unwrap();
        let b: TrainedModel<f64> = dmm_train(&corpus, &p).unwrap();
        assert_eq!(a, b);
        assert!(is_row_stochastic(&a.theta, 1e-9));
        assert!(is_row_stochastic(&a.phi, 1e-9));
        let tw = a.topic_weights.as_ref().unwrap();
        assert!((tw.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bag_counts_words() {
        assert_eq!(bag_of_words(&[3, 1, 3, 3]), vec![(1, 1), (3, 3)]);
        assert!(bag_of_words(&[]).is_empty());
    }

    fn direct_product(s: &DmmState<f64>, doc: &[usize], p: &ModelParams<f64>) -> Vec<f64> {
        let vb = s.topic_word.ncols() as f64 * p.beta;
        (0..s.num_topics())
            .map(|k| {
                let mut num = s.topic_docs[k] + p.alpha;
                let mut seen = std::collections::HashMap::new();
                for &w in doc {
                    let j = seen.entry(w).or_insert(0usize);
                    num *= s.topic_word[[k, w]] + p.beta + *j as f64;
                    *j += 1;
                }
                let den: f64 = (0..doc.len()).map(|i| s.topic_totals[k] + vb + i as f64).product();
                num / den
            })
            .collect()
    }

    proptest! {
        #[test]
        fn log_space_matches_direct_product(
            doc in prop::collection::vec(0usize..4, 0..=5),
            counts in prop::collection::vec(0u32..6, 8),
            m in prop::collection::vec(0u32..5, 2),
            alpha in 0.05f64..2.0,
            beta in 0.01f64..1.0,
        ) {
            let n_kw = Array2::from_shape_fn((2, 4), |(k, w)| counts[k * 4 + w] as f64);
            let n_k: Vec<f64> = n_kw.outer_iter().map(|r| r.sum()).collect();
            let s = DmmState { topic_docs: m.iter().map(|&x| x as f64).collect(), topic_word: n_kw, topic_totals: n_k, assignments: vec![] };
            let p = ModelParams::new(2).with_priors(alpha, beta);
            let got = dmm_conditional(&s, &doc, &p);
            let want = direct_product(&s, &doc, &p);
            for (g, w) in got.iter().zip(&want) {
                prop_assert!((g - w).abs() <= 1e-9, "{} vs {}", g, w);
            }
        }
    }
}
