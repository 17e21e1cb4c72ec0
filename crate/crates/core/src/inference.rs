//! Fold-in: topic proportions for unseen documents under a frozen phi.

use ndarray::Array2;

use crate::btm::btm_doc_topics;
use crate::corpus::MappedCorpus;
use crate::dmm::bag_of_words;
use crate::error::{Error, Result};
use crate::sampling::{draw, normalize_log, ModelKind, RngStream, TrainedModel};
use crate::scalar::Real;

pub const DEFAULT_FOLD_IN_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct FoldIn<F> {
    /// New documents × K, row-stochastic.
    pub theta: Array2<F>,
    /// Per-token topics for token-level models, the argmax topic for
    /// document-level ones, nothing for BTM.
    pub assignments: Vec<Vec<usize>>,
    pub oov_per_doc: Vec<usize>,
    pub tokens_per_doc: Vec<usize>,
}

impl<F> FoldIn<F> {
    pub fn oov_tokens(&self) -> usize {
        self.oov_per_doc.iter().sum()
    }

    pub fn total_tokens(&self) -> usize {
        self.tokens_per_doc.iter().sum()
    }

    /// Share of a document's tokens that were out of vocabulary, in [0, 1].
    /// Empty lines report 0.
    pub fn oov_fraction(&self, d: usize) -> f64 {
        match self.tokens_per_doc[d] {
            0 => 0.0,
            n => self.oov_per_doc[d] as f64 / n as f64,
        }
    }
}

/// Estimates theta for `corpus` (already mapped onto `model.vocab`). The model
/// is only read.
pub fn fold_in<F: Real>(model: &TrainedModel<F>, corpus: &MappedCorpus, iterations: usize, seed: u64) -> Result<FoldIn<F>> {
    if iterations < 1 {
        return Err(Error::InvalidParams("fold-in iterations must be at least 1".into()));
    }
    if corpus.docs.iter().all(Vec::is_empty) {
        return Err(Error::VocabularyMismatch);
    }
    let k = model.num_topics();
    if k == 0 || model.phi.ncols() != model.vocab.len() {
        return Err(Error::InvalidModel(format!(
            "phi is {}×{} but the vocabulary has {} words",
            model.phi.nrows(),
            model.phi.ncols(),
            model.vocab.len()
        )));
    }
    let (theta, assignments) = match model.kind {
        ModelKind::Lda | ModelKind::Wntm | ModelKind::Ptm => token_fold_in(model, &corpus.docs, iterations, seed),
        ModelKind::Dmm | ModelKind::GpuDmm => {
            let weights = mixture_weights(model)?;
            doc_fold_in(weights, &model.phi, &corpus.docs)
        }
        ModelKind::Btm => {
            let weights = mixture_weights(model)?;
            let theta = btm_doc_topics(weights, &model.phi, &corpus.docs, model.params.extras.window);
            (theta, vec![Vec::new(); corpus.docs.len()])
        }
    };
    Ok(FoldIn {
        theta,
        assignments,
        oov_per_doc: corpus.oov_per_doc.clone(),
        tokens_per_doc: corpus.tokens_per_doc.clone(),
    })
}

fn mixture_weights<F: Real>(model: &TrainedModel<F>) -> Result<&[F]> {
    match &model.topic_weights {
        Some(w) if w.len() == model.num_topics() => Ok(w),
        Some(w) => Err(Error::InvalidModel(format!("{} topic weights for {} topics", w.len(), model.num_topics()))),
        None => Err(Error::InvalidModel(format!("{} model has no topic weights", model.kind))),
    }
}

/// Gibbs over new-document topics with weight[k] = (n_dk + α)·φ_kw.
fn token_fold_in<F: Real>(
    model: &TrainedModel<F>,
    docs: &[Vec<usize>],
    iterations: usize,
    seed: u64,
) -> (Array2<F>, Vec<Vec<usize>>) {
    let k = model.num_topics();
    let alpha = model.params.alpha;
    let phi = &model.phi;
    let mut rng = RngStream::new(seed);
    let mut doc_topic = Array2::<F>::zeros((docs.len(), k));
    let mut assignments: Vec<Vec<usize>> = docs
        .iter()
        .enumerate()
        .map(|(d, doc)| {
            doc.iter()
                .map(|_| {
                    let z = rng.below(k);
                    doc_topic[[d, z]] += F::one();
                    z
                })
                .collect()
        })
        .collect();
    let mut weights = vec![F::zero(); k];
    for _ in 0..iterations {
        for (d, doc) in docs.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = assignments[d][i];
                doc_topic[[d, old]] -= F::one();
                let mut total = F::zero();
                for t in 0..k {
                    weights[t] = (doc_topic[[d, t]] + alpha) * phi[[t, w]];
                    total += weights[t];
                }
                let new = draw(&weights, total, &mut rng);
                doc_topic[[d, new]] += F::one();
                assignments[d][i] = new;
            }
        }
    }
    let k_alpha = F::of_usize(k) * alpha;
    for (d, mut row) in doc_topic.outer_iter_mut().enumerate() {
        let denom = F::of_usize(docs[d].len()) + k_alpha;
        row.mapv_inplace(|n| (n + alpha) / denom);
    }
    (doc_topic, assignments)
}

/// p(k|d) ∝ θ̂_k · Π_w φ_kw^{n_dw}, in log space.
fn doc_fold_in<F: Real>(weights: &[F], phi: &Array2<F>, docs: &[Vec<usize>]) -> (Array2<F>, Vec<Vec<usize>>) {
    let k = weights.len();
    let mut theta = Array2::from_elem((docs.len(), k), F::one() / F::of_usize(k));
    let mut assignments = Vec::with_capacity(docs.len());
    let mut log_w = vec![F::zero(); k];
    for (d, doc) in docs.iter().enumerate() {
        if doc.is_empty() {
            assignments.push(Vec::new());
            continue;
        }
        let bag = bag_of_words(doc);
        for t in 0..k {
            log_w[t] = weights[t].ln();
            for &(w, c) in &bag {
                log_w[t] += F::of_usize(c) * phi[[t, w]].ln();
            }
        }
        let post = normalize_log(&log_w);
        let mut row = theta.row_mut(d);
        for t in 0..k {
            row[t] = post[t].max(F::min_positive_value());
        }
        let best = (0..k).fold(0, |best, t| if row[t] > row[best] { t } else { best });
        assignments.push(vec![best]);
    }
    (theta, assignments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::sampling::{is_row_stochastic, ModelParams};
    use ndarray::array;

    fn train(kind: ModelKind, corpus: &Corpus, k: usize) -> TrainedModel<f64> {
        let p = ModelParams::new(k).with_iterations(30).with_seed(4);
        crate::train(kind, corpus, &p, None).unwrap()
    }

    fn corpus() -> Corpus {
        Corpus::from_text("a b c a\nb c\nd e f\ne f d d\na c\nf e\n").unwrap()
    }

    #[test]
    fn single_topic_rows_are_one() {
        let c = corpus();
        for kind in [ModelKind::Lda, ModelKind::Dmm, ModelKind::Btm, ModelKind::Wntm, ModelKind::Ptm] {
            let m = train(kind, &c, 1);
            let new = MappedCorpus::from_text("a b\nzzz\ne\n", &m.vocab).unwrap();
            let f = fold_in(&m, &new, 5, 0).unwrap();
            assert_eq!(f.theta, array![[1.0], [1.0], [1.0]], "{kind}");
        }
    }

    #[test]
    fn oov_doc_gets_uniform_row() {
        let c = corpus();
        let m = train(ModelKind::Lda, &c, 3);
        let new = MappedCorpus::from_text("a b\nqq rr\n", &m.vocab).unwrap();
        let f = fold_in(&m, &new, 10, 1).unwrap();
        assert_eq!(f.oov_fraction(1), 1.0);
        assert_eq!(f.oov_fraction(0), 0.0);
        for t in 0..3 {
            assert_eq!(f.theta[[1, t]], 1.0 / 3.0);
        }
    }

    #[test]
    fn disjoint_vocabulary_is_an_error() {
        let m = train(ModelKind::Dmm, &corpus(), 2);
        let new = MappedCorpus::from_text("x y\nz\n", &m.vocab).unwrap();
        assert!(matches!(fold_in(&m, &new, 10, 0), Err(Error::VocabularyMismatch)));
    }

    #[test]
    fn model_untouched_and_rows_normalized() {
        let c = corpus();
        for kind in [ModelKind::Lda, ModelKind::Dmm, ModelKind::Btm, ModelKind::Wntm, ModelKind::Ptm] {
            let m = train(kind, &c, 3);
            let before = m.clone();
            let new = MappedCorpus::from_text("a b c\nf\n\ne d a\n", &m.vocab).unwrap();
            let f = fold_in(&m, &new, 20, 7).unwrap();
            assert_eq!(m, before);
            assert!(is_row_stochastic(&f.theta, 1e-9), "{kind}");
            assert!(f.theta.iter().all(|&x| x > 0.0));
            assert_eq!(f, fold_in(&m, &new, 20, 7).unwrap());
        }
    }

    #[test]
    fn doc_level_picks_matching_topic() {
        let phi = array![[0.5, 0.5, 0.0001], [0.0001, 0.0001, 0.9998]];
        let (theta, z) = doc_fold_in(&[0.5, 0.5], &phi, &[vec![0, 1], vec![2, 2]]);
        assert_eq!(z, vec![vec![0], vec![1]]);
        assert!(theta[[0, 0]] > 0.99 && theta[[1, 1]] > 0.99);
    }

    #[test]
    fn missing_weights_rejected() {
        let mut m = train(ModelKind::Btm, &corpus(), 2);
        m.topic_weights = None;
        let new = MappedCorpus::from_text("a b\n", &m.vocab).unwrap();
        assert!(matches!(fold_in(&m, &new, 1, 0), Err(Error::InvalidModel(_))));
    }
}
