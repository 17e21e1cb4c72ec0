//! GPU-DMM: DMM whose counts pass through a generalized Pólya urn built from
//! word-embedding similarity.
//!
//! When a document joins topic k, each of its tokens w adds 1 to ñ_kw and μ
//! to ñ_kw' for every neighbour w' of w. Promotions are tracked as integer
//! multiples of μ next to the integer base counts, and ñ = base + μ·units is
//! recomputed after every change. Removing a document therefore undoes its
//! additions exactly, and an empty table reproduces plain DMM bit for bit.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::corpus::{Corpus, WordEmbeddings};
use crate::dmm::{DmmSampler, DmmState};
use crate::error::{Error, Result};
use crate::sampling::{totals_agree, CountViolation, ModelKind, ModelParams, RngStream, TrainedModel};
use crate::scalar::Real;

/// Symmetric neighbour lists of words whose embeddings have cosine > ε.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityTable<F> {
    neighbors: Vec<Vec<(usize, F)>>,
    pub epsilon: F,
    pub mu: F,
}

impl<F: Real> SimilarityTable<F> {
    /// A table with no pairs: the urn degenerates to plain DMM.
    pub fn empty(vocab_size: usize, epsilon: F, mu: F) -> Self {
        Self { neighbors: vec![Vec::new(); vocab_size], epsilon, mu }
    }

    /// Neighbours of `w` and the promotion weight each receives.
    pub fn neighbors(&self, w: usize) -> &[(usize, F)] {
        &self.neighbors[w]
    }

    pub fn vocab_size(&self) -> usize {
        self.neighbors.len()
    }

    pub fn num_pairs(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.iter().all(Vec::is_empty)
    }
}

pub fn cosine<F: Real>(a: &[F], b: &[F]) -> F {
    let dot: F = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
    let na: F = a.iter().map(|&x| x * x).sum::<F>().sqrt();
    let nb: F = b.iter().map(|&x| x * x).sum::<F>().sqrt();
    if na == F::zero() || nb == F::zero() {
        return F::zero();
    }
    (dot / (na * nb)).max(-F::one()).min(F::one())
}

/// Pairs every two covered words with cosine similarity above `epsilon`.
/// An `epsilon` of 1 or more yields an empty table.
pub fn build_similarity_table<F: Real>(emb: &WordEmbeddings<F>, epsilon: F, mu: F) -> Result<SimilarityTable<F>> {
    if !(epsilon > F::zero()) {
        return Err(Error::InvalidParams(format!("epsilon must be > 0, got {epsilon}")));
    }
    if !(mu > F::zero()) || !mu.is_finite() {
        return Err(Error::InvalidParams(format!("mu must be > 0, got {mu}")));
    }
    if emb.num_covered() == 0 {
        return Err(Error::NoEmbeddingCoverage);
    }
    let v = emb.vocab_size();
    let covered: Vec<(usize, &[F])> = (0..v).filter_map(|w| emb.vector(w).map(|x| (w, x))).collect();
    let mut table = SimilarityTable::empty(v, epsilon, mu);
    for (i, &(a, va)) in covered.iter().enumerate() {
        for &(b, vb) in &covered[i + 1..] {
            if cosine(va, vb) > epsilon {
                table.neighbors[a].push((b, mu));
                table.neighbors[b].push((a, mu));
            }
        }
    }
    Ok(table)
}

/// Promotion units contributed by one document: `(word, multiplicity)`,
/// each unit worth μ.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PromotionRecord(pub Vec<(usize, usize)>);

/// Urn bookkeeping for [`DmmSampler`].
#[derive(Debug, Clone)]
pub struct PromotionUrn<F> {
    mu: F,
    base: Array2<F>,
    base_totals: Vec<F>,
    units: Array2<F>,
    unit_totals: Vec<F>,
    records: Vec<PromotionRecord>,
}

impl<F: Real> PromotionUrn<F> {
    pub(crate) fn new(docs: &[Vec<usize>], num_topics: usize, table: &SimilarityTable<F>) -> Self {
        let v = table.vocab_size();
        let records = docs
            .iter()
            .map(|doc| {
                let mut acc: BTreeMap<usize, usize> = BTreeMap::new();
                for &w in doc {
                    for &(n, _) in table.neighbors(w) {
                        *acc.entry(n).or_default() += 1;
                    }
                }
                PromotionRecord(acc.into_iter().collect())
            })
            .collect();
        Self {
            mu: table.mu,
            base: Array2::zeros((num_topics, v)),
            base_totals: vec![F::zero(); num_topics],
            units: Array2::zeros((num_topics, v)),
            unit_totals: vec![F::zero(); num_topics],
            records,
        }
    }

    pub fn record(&self, d: usize) -> &PromotionRecord {
        &self.records[d]
    }

    #[inline]
    fn refresh(&self, state: &mut DmmState<F>, k: usize, w: usize) {
        state.topic_word[[k, w]] = self.base[[k, w]] + self.mu * self.units[[k, w]];
    }

    fn apply(&mut self, state: &mut DmmState<F>, doc: &[usize], d: usize, k: usize, sign: F) {
        for &w in doc {
            self.base[[k, w]] += sign;
            self.refresh(state, k, w);
        }
        self.base_totals[k] += sign * F::of_usize(doc.len());
        let record = std::mem::take(&mut self.records[d]);
        for &(w, m) in &record.0 {
            let amount = sign * F::of_usize(m);
            self.units[[k, w]] += amount;
            self.unit_totals[k] += amount;
            self.refresh(state, k, w);
        }
        self.records[d] = record;
        state.topic_totals[k] = self.base_totals[k] + self.mu * self.unit_totals[k];
    }

    pub(crate) fn add(&mut self, state: &mut DmmState<F>, doc: &[usize], d: usize, k: usize) {
        self.apply(state, doc, d, k, F::one());
    }

    pub(crate) fn remove(&mut self, state: &mut DmmState<F>, doc: &[usize], d: usize, k: usize) {
        self.apply(state, doc, d, k, -F::one());
    }

    /// ñ_k = Σ_w ñ_kw (within rounding) and the base/unit tallies are consistent.
    pub(crate) fn check(&self, state: &DmmState<F>) -> Result<(), CountViolation> {
        for k in 0..self.base_totals.len() {
            let base: F = self.base.row(k).iter().copied().sum();
            let units: F = self.units.row(k).iter().copied().sum();
            if base != self.base_totals[k] || units != self.unit_totals[k] {
                return Err(CountViolation::Model(format!("topic {k}: urn tallies disagree with their totals")));
            }
            let promoted: F = state.topic_word.row(k).iter().copied().sum();
            if !totals_agree(state.topic_totals[k], promoted, false) {
                return Err(CountViolation::TopicTotal {
                    topic: k,
                    total: state.topic_totals[k].as_f64(),
                    row_sum: promoted.as_f64(),
                });
            }
        }
        Ok(())
    }
}

pub fn gpudmm_train<F: Real>(corpus: &Corpus, emb: &WordEmbeddings<F>, params: &ModelParams<F>) -> Result<TrainedModel<F>> {
    gpudmm_train_observed(corpus, emb, params, |_, _| {})
}

pub fn gpudmm_train_observed<F: Real>(
    corpus: &Corpus,
    emb: &WordEmbeddings<F>,
    params: &ModelParams<F>,
    observer: impl FnMut(usize, &DmmSampler<'_, F>),
) -> Result<TrainedModel<F>> {
    params.validate()?;
    if emb.vocab_size() != corpus.vocab_size() {
        return Err(Error::InvalidParams("embeddings were not loaded against this corpus vocabulary".into()));
    }
    let table = build_similarity_table(emb, params.extras.epsilon, params.extras.mu)?;
    gpudmm_train_with_table(corpus, &table, params, observer)
}

/// GPU-DMM training with a prebuilt similarity table.
pub fn gpudmm_train_with_table<F: Real>(
    corpus: &Corpus,
    table: &SimilarityTable<F>,
    params: &ModelParams<F>,
    mut observer: impl FnMut(usize, &DmmSampler<'_, F>),
) -> Result<TrainedModel<F>> {
    params.validate()?;
    if corpus.total_tokens() == 0 {
        return Err(Error::NoTokens);
    }
    if table.vocab_size() != corpus.vocab_size() {
        return Err(Error::InvalidParams("similarity table does not match the corpus vocabulary".into()));
    }
    let mut rng = RngStream::new(params.seed);
    let urn = PromotionUrn::new(corpus.docs(), params.topics, table);
    let mut sampler = DmmSampler::with_urn(corpus.docs(), corpus.vocab_size(), params, Some(urn), &mut rng);
    for it in 0..params.iterations {
        sampler.sweep(&mut rng);
        observer(it, &sampler);
    }
    Ok(sampler.into_model(ModelKind::GpuDmm, corpus, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;
    use crate::dmm::dmm_train;
    use crate::sampling::is_row_stochastic;
    use proptest::prelude::*;

    fn emb(vectors: Vec<Option<Vec<f64>>>) -> WordEmbeddings<f64> {
        WordEmbeddings::from_vectors(vectors).unwrap()
    }

    #[test]
    fn identical_vectors_pair_orthogonal_do_not() {
        let e = emb(vec![Some(vec![1.0, 0.0]), Some(vec![2.0, 0.0]), Some(vec![0.0, 1.0])]);
        let t = build_similarity_table(&e, 0.7, 0.1).unwrap();
        assert_eq!(t.neighbors(0), &[(1, 0.1)]);
        assert_eq!(t.neighbors(1), &[(0, 0.1)]);
        assert!(t.neighbors(2).is_empty());
        assert_eq!(t.num_pairs(), 1);
    }

    #[test]
    fn uncovered_words_have_no_neighbours() {
        let e = emb(vec![Some(vec![1.0, 0.0]), None, Some(vec![1.0, 0.1])]);
        let t = build_similarity_table(&e, 0.5, 0.1).unwrap();
        assert!(t.neighbors(1).is_empty());
        assert_eq!(t.num_pairs(), 1);
    }

    #[test]
    fn epsilon_of_one_gives_empty_table() {
        let e = emb(vec![Some(vec![1.0, 0.0]), Some(vec![1.0, 0.0])]);
        assert!(build_similarity_table(&e, 1.0, 0.1).unwrap().is_empty());
    }

    #[test]
    fn single_doc_promotion_bookkeeping() {
        let vocab = Vocabulary::from_words(["a", "b"]);
        let corpus = Corpus::from_docs(vec![vec![0]], vocab).unwrap();
        let e = emb(vec![Some(vec![1.0, 0.0]), Some(vec![1.0, 0.0])]);
        let t = build_similarity_table(&e, 0.5, 0.1).unwrap();
        let p = ModelParams::new(1).with_iterations(1);
        let mut rng = RngStream::new(0);
        let urn = PromotionUrn::new(corpus.docs(), 1, &t);
        let s = DmmSampler::with_urn(corpus.docs(), 2, &p, Some(urn), &mut rng);
        let st = s.state();
        assert_eq!(st.topic_word.row(0).to_vec(), vec![1.0, 0.1]);
        assert!((st.topic_totals[0] - 1.1).abs() < 1e-12);
        assert_eq!(s.urn().unwrap().record(0), &PromotionRecord(vec![(1, 1)]));
    }

    #[test]
    fn empty_table_reproduces_dmm_bitwise() {
        let corpus = Corpus::from_text("a b c\nc d\nd e a\nb b\n\ne\n").unwrap();
        let p = ModelParams::new(3).with_iterations(15).with_seed(8);
        let table = SimilarityTable::empty(corpus.vocab_size(), 0.5, 0.1);
        let g: TrainedModel<f64> = gpudmm_train_with_table(&corpus, &table, &p, |_, _| {}).unwrap();
        let d: TrainedModel<f64> = dmm_train(&corpus, &p).unwrap();
        assert_eq!(g.theta, d.theta);
        assert_eq!(g.phi, d.phi);
        assert_eq!(g.assignments, d.assignments);
    }

    #[test]
    fn sweeps_keep_promoted_totals_consistent() {
        let corpus = Corpus::from_text("a b c\nc d\nd e a\nb b\n\ne\n").unwrap();
        let e = emb(vec![
            Some(vec![1.0, 0.1]),
            Some(vec![0.9, 0.2]),
            Some(vec![0.1, 1.0]),
            Some(vec![0.2, 0.9]),
            None,
        ]);
        let p = ModelParams::new(2).with_iterations(20).with_seed(1);
        let m = gpudmm_train_observed(&corpus, &e, &p, |_, s| assert_eq!(s.check(), Ok(()))).unwrap();
        assert!(is_row_stochastic(&m.theta, 1e-9));
        assert!(is_row_stochastic(&m.phi, 1e-9));
        assert_eq!(m.kind, ModelKind::GpuDmm);
    }

    proptest! {
        #[test]
        fn table_is_symmetric_without_self_pairs(
            raw in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 2..10),
            eps in 0.05f64..0.95,
        ) {
            let e = emb(raw.into_iter().map(Some).collect());
            let t = build_similarity_table(&e, eps, 0.1).unwrap();
            for w in 0..t.vocab_size() {
                for &(n, mu) in t.neighbors(w) {
                    prop_assert!(n != w);
                    prop_assert_eq!(mu, 0.1);
                    prop_assert!(t.neighbors(n).iter().any(|&(b, _)| b == w));
                    prop_assert!(cosine(e.vector(w).unwrap(), e.vector(n).unwrap()) > eps);
                }
            }
        }

        #[test]
        fn add_then_remove_restores_counts(
            docs in prop::collection::vec(prop::collection::vec(0usize..5, 0..5), 1..5),
            pick in 0usize..5,
            k in 0usize..2,
        ) {
            let e = emb((0..5).map(|w| Some(vec![1.0, w as f64 * 0.3])).collect());
            let t = build_similarity_table(&e, 0.8, 0.37).unwrap();
            let mut urn = PromotionUrn::new(&docs, 2, &t);
            let mut state = DmmState::zeros(docs.len(), 2, 5);
            for (d, doc) in docs.iter().enumerate() {
                urn.add(&mut state, doc, d, d % 2);
            }
            let before = state.clone();
            let d = pick % docs.len();
            urn.add(&mut state, &docs[d], d, k);
            urn.remove(&mut state, &docs[d], d, k);
            prop_assert_eq!(&state, &before);
            prop_assert!(urn.check(&state).is_ok());
        }
    }
}
