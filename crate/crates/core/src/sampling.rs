//! Machinery shared by every collapsed Gibbs sampler.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ndarray::Array2;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Seeded pseudo-random stream backed by ChaCha20 (RFC 7539 block function,
/// seeded through `rand_core`'s `seed_from_u64`).
///
/// Uniform variates are `(next_u64 >> 11) · 2⁻⁵³`, so a given seed yields the
/// same sequence on every platform.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` from a single uniform draw. `n` must be > 0.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }
}

/// Draws index `i` with probability `weights[i] / Σ weights`, consuming
/// exactly one uniform draw.
pub fn sample_discrete<F: Real>(weights: &[F], rng: &mut RngStream) -> Result<usize> {
    let mut total = F::zero();
    for (i, &w) in weights.iter().enumerate() {
        if w.is_nan() || w < F::zero() {
            return Err(Error::InvalidWeights(format!("weight {i} is {w}")));
        }
        total += w;
    }
    if total <= F::zero() {
        return Err(Error::InvalidWeights("all weights are zero".into()));
    }
    if !total.is_finite() {
        return Err(Error::InvalidWeights("weights sum to infinity".into()));
    }
    Ok(draw(weights, total, rng))
}

/// Unchecked categorical draw for weights known to be finite and positive.
#[inline]
pub(crate) fn draw<F: Real>(weights: &[F], total: F, rng: &mut RngStream) -> usize {
    let target = F::lit(rng.uniform()) * total;
    let mut acc = F::zero();
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > F::zero() {
            last_positive = i;
        }
        acc += w;
        if target < acc {
            return i;
        }
    }
    // rounding can leave target == total
    last_positive
}

/// Draws from weights given in log space.
#[inline]
pub(crate) fn draw_log<F: Real>(log_weights: &[F], scratch: &mut Vec<F>, rng: &mut RngStream) -> usize {
    let max = log_weights.iter().copied().fold(F::neg_infinity(), F::max);
    scratch.clear();
    scratch.extend(log_weights.iter().map(|&lw| (lw - max).exp()));
    let total: F = scratch.iter().copied().sum();
    draw(scratch, total, rng)
}

/// Normalizes log weights into a probability vector.
pub(crate) fn normalize_log<F: Real>(log_weights: &[F]) -> Vec<F> {
    let max = log_weights.iter().copied().fold(F::neg_infinity(), F::max);
    let mut out: Vec<F> = log_weights.iter().map(|&lw| (lw - max).exp()).collect();
    normalize_in_place(&mut out);
    out
}

pub(crate) fn normalize_in_place<F: Real>(v: &mut [F]) {
    let total: F = v.iter().copied().sum();
    for x in v.iter_mut() {
        *x /= total;
    }
}

/// Collapsed-Gibbs sufficient statistics.
///
/// Counts are stored as reals; for every model except GPU-DMM they hold
/// exact integers and `integral` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct CountState<F> {
    /// n_dk, D × K
    pub doc_topic: Array2<F>,
    /// n_kw, K × V
    pub topic_word: Array2<F>,
    /// n_k
    pub topic_totals: Vec<F>,
    /// n_d
    pub doc_totals: Vec<F>,
    /// Topic of every sampling unit, grouped by document.
    pub assignments: Vec<Vec<usize>>,
    pub integral: bool,
}

impl<F: Real> CountState<F> {
    pub fn zeros(num_docs: usize, num_topics: usize, vocab_size: usize) -> Self {
        Self {
            doc_topic: Array2::zeros((num_docs, num_topics)),
            topic_word: Array2::zeros((num_topics, vocab_size)),
            topic_totals: vec![F::zero(); num_topics],
            doc_totals: vec![F::zero(); num_docs],
            assignments: vec![Vec::new(); num_docs],
            integral: true,
        }
    }

    pub fn num_topics(&self) -> usize {
        self.topic_totals.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.topic_word.ncols()
    }

    #[inline]
    pub(crate) fn add_token(&mut self, d: usize, w: usize, k: usize) {
        self.doc_topic[[d, k]] += F::one();
        self.topic_word[[k, w]] += F::one();
        self.topic_totals[k] += F::one();
    }

    #[inline]
    pub(crate) fn remove_token(&mut self, d: usize, w: usize, k: usize) {
        self.doc_topic[[d, k]] -= F::one();
        self.topic_word[[k, w]] -= F::one();
        self.topic_totals[k] -= F::one();
    }

    /// Applies a topic relabelling: new topic `perm[k]` takes old topic `k`.
    pub fn permute_topics(&self, perm: &[usize]) -> Self {
        let mut out = self.clone();
        for (old, &new) in perm.iter().enumerate() {
            out.doc_topic.column_mut(new).assign(&self.doc_topic.column(old));
            out.topic_word.row_mut(new).assign(&self.topic_word.row(old));
            out.topic_totals[new] = self.topic_totals[old];
        }
        for zs in &mut out.assignments {
            for z in zs.iter_mut() {
                *z = perm[*z];
            }
        }
        out
    }
}

/// The first count invariant that fails.
#[derive(Debug, Clone, PartialEq)]
pub enum CountViolation {
    Negative { what: &'static str, row: usize, col: usize, value: f64 },
    NonIntegral { what: &'static str, row: usize, col: usize, value: f64 },
    TopicTotal { topic: usize, total: f64, row_sum: f64 },
    DocTotal { doc: usize, total: f64, row_sum: f64 },
    Model(String),
}

impl fmt::Display for CountViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Negative { what, row, col, value } => write!(f, "{what}[{row}][{col}] is negative ({value})"),
            Self::NonIntegral { what, row, col, value } => write!(f, "{what}[{row}][{col}] is not integral ({value})"),
            Self::TopicTotal { topic, total, row_sum } => {
                write!(f, "topic {topic}: n_k = {total} but words sum to {row_sum}")
            }
            Self::DocTotal { doc, total, row_sum } => {
                write!(f, "doc {doc}: n_d = {total} but topics sum to {row_sum}")
            }
            Self::Model(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CountViolation {}

fn check_entry<F: Real>(what: &'static str, row: usize, col: usize, v: F, integral: bool) -> Result<(), CountViolation> {
    let value = v.as_f64();
    if v.is_nan() || v < F::zero() {
        return Err(CountViolation::Negative { what, row, col, value });
    }
    if integral && v.fract() != F::zero() {
        return Err(CountViolation::NonIntegral { what, row, col, value });
    }
    Ok(())
}

/// Real-valued totals may drift from their row sums by rounding only.
pub(crate) fn totals_agree<F: Real>(total: F, row_sum: F, integral: bool) -> bool {
    if integral {
        total == row_sum
    } else {
        (total - row_sum).abs().as_f64() <= 1e-9 * total.abs().as_f64().max(1.0)
    }
}

/// Verifies non-negativity, Σ_w n_kw = n_k and Σ_k n_dk = n_d.
pub fn check_counts<F: Real>(counts: &CountState<F>) -> Result<(), CountViolation> {
    let integral = counts.integral;
    for ((r, c), &v) in counts.doc_topic.indexed_iter() {
        check_entry("n_dk", r, c, v, integral)?;
    }
    for ((r, c), &v) in counts.topic_word.indexed_iter() {
        check_entry("n_kw", r, c, v, integral)?;
    }
    for (k, &v) in counts.topic_totals.iter().enumerate() {
        check_entry("n_k", k, 0, v, integral)?;
    }
    for (d, &v) in counts.doc_totals.iter().enumerate() {
        check_entry("n_d", d, 0, v, integral)?;
    }
    for (k, row) in counts.topic_word.outer_iter().enumerate() {
        let row_sum: F = row.iter().copied().sum();
        let total = counts.topic_totals[k];
        if !totals_agree(total, row_sum, integral) {
            return Err(CountViolation::TopicTotal { topic: k, total: total.as_f64(), row_sum: row_sum.as_f64() });
        }
    }
    for (d, row) in counts.doc_topic.outer_iter().enumerate() {
        let row_sum: F = row.iter().copied().sum();
        let total = counts.doc_totals[d];
        if !totals_agree(total, row_sum, integral) {
            return Err(CountViolation::DocTotal { doc: d, total: total.as_f64(), row_sum: row_sum.as_f64() });
        }
    }
    Ok(())
}

/// The implemented topic models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Lda,
    Dmm,
    Btm,
    Wntm,
    Ptm,
    GpuDmm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [Self::Lda, Self::Dmm, Self::Btm, Self::Wntm, Self::Ptm, Self::GpuDmm];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lda => "LDA",
            Self::Dmm => "DMM",
            Self::Btm => "BTM",
            Self::Wntm => "WNTM",
            Self::Ptm => "PTM",
            Self::GpuDmm => "GPUDMM",
        }
    }

    /// Models that give each document a single topic.
    pub fn is_doc_level(self) -> bool {
        matches!(self, Self::Dmm | Self::GpuDmm)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown model '{s}'")))
    }
}

pub const DEFAULT_TOPICS: usize = 20;
pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_TOP_WORDS: usize = 20;
pub const DEFAULT_WNTM_WINDOW: usize = 10;
pub const DEFAULT_LAMBDA: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 0.5;
pub const DEFAULT_MU: f64 = 0.1;

/// Settings that only some models read.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelExtras<F> {
    /// Co-occurrence window W (BTM, WNTM). `None` means model default.
    pub window: Option<usize>,
    /// Pseudo-document count P (PTM). `None` means ⌈D/10⌉.
    pub pseudo_docs: Option<usize>,
    /// Pseudo-document Dirichlet prior λ (PTM).
    pub lambda: F,
    /// Cosine threshold ε (GPU-DMM).
    pub epsilon: F,
    /// Promotion weight μ (GPU-DMM).
    pub mu: F,
    /// Embedding file the model was trained with (GPU-DMM), for the record.
    pub vectors: Option<PathBuf>,
}

impl<F: Real> Default for ModelExtras<F> {
    fn default() -> Self {
        Self {
            window: None,
            pseudo_docs: None,
            lambda: F::lit(DEFAULT_LAMBDA),
            epsilon: F::lit(DEFAULT_EPSILON),
            mu: F::lit(DEFAULT_MU),
            vectors: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    pub topics: usize,
    pub alpha: F,
    pub beta: F,
    pub iterations: usize,
    pub top_words: usize,
    pub seed: u64,
    pub extras: ModelExtras<F>,
}

impl<F: Real> Default for ModelParams<F> {
    fn default() -> Self {
        Self {
            topics: DEFAULT_TOPICS,
            alpha: F::lit(DEFAULT_ALPHA),
            beta: F::lit(DEFAULT_BETA),
            iterations: DEFAULT_ITERATIONS,
            top_words: DEFAULT_TOP_WORDS,
            seed: 0,
            extras: ModelExtras::default(),
        }
    }
}

impl<F: Real> ModelParams<F> {
    pub fn new(topics: usize) -> Self {
        Self { topics, ..Self::default() }
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_priors(mut self, alpha: F, beta: F) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: F| x > F::zero() && x.is_finite();
        if self.topics < 1 {
            return Err(Error::InvalidParams("number of topics must be at least 1".into()));
        }
        if !positive(self.alpha) {
            return Err(Error::InvalidParams(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !positive(self.beta) {
            return Err(Error::InvalidParams(format!("beta must be > 0, got {}", self.beta)));
        }
        if self.iterations < 1 {
            return Err(Error::InvalidParams("iterations must be at least 1".into()));
        }
        if self.top_words < 1 {
            return Err(Error::InvalidParams("top words must be at least 1".into()));
        }
        if let Some(w) = self.extras.window {
            if w < 2 {
                return Err(Error::InvalidParams(format!("window must be at least 2, got {w}")));
            }
        }
        if self.extras.pseudo_docs == Some(0) {
            return Err(Error::InvalidParams("number of pseudo-documents must be at least 1".into()));
        }
        if !positive(self.extras.lambda) {
            return Err(Error::InvalidParams(format!("lambda must be > 0, got {}", self.extras.lambda)));
        }
        if !positive(self.extras.mu) {
            return Err(Error::InvalidParams(format!("mu must be > 0, got {}", self.extras.mu)));
        }
        if !(self.extras.epsilon > F::zero()) || self.extras.epsilon.is_nan() {
            return Err(Error::InvalidParams(format!("epsilon must be > 0, got {}", self.extras.epsilon)));
        }
        Ok(())
    }
}

/// A trained topic model: point estimates plus what inference needs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel<F> {
    pub kind: ModelKind,
    pub params: ModelParams<F>,
    /// D × K, row-stochastic.
    pub theta: Array2<F>,
    /// K × V, row-stochastic.
    pub phi: Array2<F>,
    pub vocab: Vocabulary,
    /// Final topic of every sampling unit, one list per document.
    pub assignments: Vec<Vec<usize>>,
    /// Corpus-level topic proportions (DMM, GPU-DMM, BTM); fold-in needs them.
    pub topic_weights: Option<Vec<F>>,
    /// Training corpus location, from which the vocabulary can be rebuilt.
    pub corpus: Option<PathBuf>,
}

impl<F: Real> TrainedModel<F> {
    pub fn num_topics(&self) -> usize {
        self.phi.nrows()
    }

    pub fn top_words(&self, t: usize) -> Vec<Vec<String>> {
        top_words(&self.phi, &self.vocab, t)
    }
}

/// Smoothed posterior means from the final counts:
/// θ_dk = (n_dk + α)/(n_d + Kα), φ_kw = (n_kw + β)/(n_k + Vβ).
pub fn point_estimates<F: Real>(counts: &CountState<F>, params: &ModelParams<F>) -> (Array2<F>, Array2<F>) {
    let theta = estimate_theta(&counts.doc_topic, &counts.doc_totals, params.alpha);
    let phi = estimate_phi(&counts.topic_word, &counts.topic_totals, params.beta);
    (theta, phi)
}

pub(crate) fn estimate_theta<F: Real>(doc_topic: &Array2<F>, doc_totals: &[F], alpha: F) -> Array2<F> {
    let k = F::of_usize(doc_topic.ncols());
    let mut theta = doc_topic.mapv(|n| n + alpha);
    for (mut row, &n_d) in theta.outer_iter_mut().zip(doc_totals) {
        let denom = n_d + k * alpha;
        row.mapv_inplace(|x| x / denom);
    }
    theta
}

pub(crate) fn estimate_phi<F: Real>(topic_word: &Array2<F>, topic_totals: &[F], beta: F) -> Array2<F> {
    let v = F::of_usize(topic_word.ncols());
    let mut phi = topic_word.mapv(|n| n + beta);
    for (mut row, &n_k) in phi.outer_iter_mut().zip(topic_totals) {
        let denom = n_k + v * beta;
        row.mapv_inplace(|x| x / denom);
    }
    phi
}

/// Word ids of the `t` most probable words per topic; ties go to the smaller id.
pub fn top_word_ids<F: Real>(phi: &Array2<F>, t: usize) -> Vec<Vec<usize>> {
    phi.outer_iter()
        .map(|row| {
            let mut ids: Vec<usize> = (0..row.len()).collect();
            ids.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
            ids.truncate(t);
            ids
        })
        .collect()
}

pub fn top_words<F: Real>(phi: &Array2<F>, vocab: &Vocabulary, t: usize) -> Vec<Vec<String>> {
    top_word_ids(phi, t)
        .into_iter()
        .map(|ids| ids.into_iter().map(|w| vocab.word(w).unwrap_or("<unk>").to_owned()).collect())
        .collect()
}

/// Every row of `m` sums to 1 within `tol` and every entry is positive.
pub fn is_row_stochastic<F: Real>(m: &Array2<F>, tol: f64) -> bool {
    m.outer_iter().all(|row| {
        let sum: F = row.iter().copied().sum();
        (sum.as_f64() - 1.0).abs() <= tol && row.iter().all(|&x| x > F::zero())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn degenerate_weights_always_pick_the_mass() {
        let mut rng = RngStream::new(7);
        for _ in 0..100 {
            assert_eq!(sample_discrete(&[0.0, 1.0, 0.0], &mut rng).unwrap(), 1);
        }
    }

    #[test]
    fn same_seed_same_draws() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        let xs: Vec<usize> = (0..64).map(|_| sample_discrete(&[1.0, 1.0], &mut a).unwrap()).collect();
        let ys: Vec<usize> = (0..64).map(|_| sample_discrete(&[1.0, 1.0], &mut b).unwrap()).collect();
        assert_eq!(xs, ys);
        assert!(xs.contains(&0) && xs.contains(&1));
    }

    #[test]
    fn frequency_matches_probability() {
        let mut rng = RngStream::new(3);
        let n = 100_000;
        let hits = (0..n).filter(|_| sample_discrete(&[2.0, 6.0], &mut rng).unwrap() == 1).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.75).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn one_uniform_per_draw() {
        let mut a = RngStream::new(9);
        let mut b = RngStream::new(9);
        sample_discrete(&[1.0_f64, 2.0, 3.0], &mut a).unwrap();
        b.uniform();
        assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
    }

    #[test]
    fn rejects_bad_weights() {
        let mut rng = RngStream::new(0);
        assert!(sample_discrete(&[0.0_f64, 0.0], &mut rng).is_err());
        assert!(sample_discrete(&[1.0, -0.5], &mut rng).is_err());
        assert!(sample_discrete(&[1.0, f64::NAN], &mut rng).is_err());
        assert!(sample_discrete::<f64>(&[], &mut rng).is_err());
    }

    #[test]
    fn chacha_reference_stream_is_stable() {
        // First outputs for seed 0; a change here breaks reproducibility of saved runs.
        let mut rng = RngStream::new(0);
        let bits: Vec<u64> = (0..3).map(|_| rng.uniform().to_bits()).collect();
        assert_eq!(bits, [0x3f98f37b5a07d7c0, 0x3fef6cb04fcddfa4, 0x3feb8b6d4d203081]);
    }

    fn counts_2x2() -> CountState<f64> {
        let mut c = CountState::zeros(1, 2, 2);
        c.doc_topic = array![[1.0, 3.0]];
        c.doc_totals = vec![4.0];
        c.topic_word = array![[1.0, 0.0], [2.0, 1.0]];
        c.topic_totals = vec![1.0, 3.0];
        c
    }

    #[test]
    fn theta_estimate() {
        let c = counts_2x2();
        let p = ModelParams::new(2).with_priors(0.5, 1.0);
        let (theta, _) = point_estimates(&c, &p);
        assert!((theta[[0, 0]] - 0.3).abs() < 1e-15);
        assert!((theta[[0, 1]] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn phi_estimate() {
        let phi = estimate_phi(&array![[2.0, 0.0]], &[2.0], 1.0);
        assert_eq!(phi, array![[0.75, 0.25]]);
    }

    #[test]
    fn zero_counts_give_uniform_estimates() {
        let c = CountState::<f64>::zeros(2, 4, 5);
        let (theta, phi) = point_estimates(&c, &ModelParams::new(4));
        assert!(theta.iter().all(|&x| (x - 0.25).abs() < 1e-15));
        assert!(phi.iter().all(|&x| (x - 0.2).abs() < 1e-15));
    }

    #[test]
    fn check_counts_accepts_consistent_state() {
        assert_eq!(check_counts(&counts_2x2()), Ok(()));
    }

    #[test]
    fn check_counts_names_the_topic() {
        let mut c = counts_2x2();
        c.topic_totals[0] -= 1.0;
        assert!(matches!(check_counts(&c), Err(CountViolation::TopicTotal { topic: 0, .. })));
    }

    #[test]
    fn check_counts_flags_negatives() {
        let mut c = counts_2x2();
        c.topic_word[[1, 1]] = -1.0;
        assert!(matches!(check_counts(&c), Err(CountViolation::Negative { what: "n_kw", .. })));
    }

    #[test]
    fn check_counts_doc_side() {
        let mut c = counts_2x2();
        c.doc_totals[0] = 5.0;
        assert!(matches!(check_counts(&c), Err(CountViolation::DocTotal { doc: 0, .. })));
    }

    #[test]
    fn top_words_order_and_ties() {
        let v = Vocabulary::from_words(["w0", "w1", "w2"]);
        assert_eq!(top_words(&array![[0.7, 0.2, 0.1]], &v, 2), vec![vec!["w0", "w1"]]);
        let u = 1.0 / 3.0;
        assert_eq!(top_words(&array![[u, u, u]], &v, 2), vec![vec!["w0", "w1"]]);
        assert_eq!(top_words(&array![[0.1, 0.2, 0.7]], &v, 10)[0].len(), 3);
        assert_eq!(top_word_ids(&array![[0.1, 0.2, 0.7]], 10), vec![vec![2, 1, 0]]);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::<f64>::default().validate().is_ok());
        assert!(ModelParams::<f64>::new(0).validate().is_err());
        assert!(ModelParams::<f64>::new(2).with_priors(0.0, 0.1).validate().is_err());
        assert!(ModelParams::<f64>::new(2).with_iterations(0).validate().is_err());
    }

    #[test]
    fn model_kind_parses_case_insensitively() {
        assert_eq!("gpudmm".parse::<ModelKind>().unwrap(), ModelKind::GpuDmm);
        assert!("SATM".parse::<ModelKind>().is_err());
    }

    proptest! {
        #[test]
        fn estimates_are_row_stochastic(
            raw in prop::collection::vec(0u32..20, 12),
            alpha in 0.01f64..2.0,
            beta in 0.001f64..1.0,
        ) {
            // 3 docs, 2 topics, 2 words, derived consistently from raw
            let mut c = CountState::<f64>::zeros(3, 2, 2);
            for d in 0..3 {
                for k in 0..2 {
                    c.doc_topic[[d, k]] = raw[d * 2 + k] as f64;
                }
                c.doc_totals[d] = c.doc_topic.row(d).sum();
            }
            for k in 0..2 {
                for w in 0..2 {
                    c.topic_word[[k, w]] = raw[6 + k * 2 + w] as f64;
                }
                c.topic_totals[k] = c.topic_word.row(k).sum();
            }
            let (theta, phi) = point_estimates(&c, &ModelParams::new(2).with_priors(alpha, beta));
            prop_assert!(is_row_stochastic(&theta, 1e-9));
            prop_assert!(is_row_stochastic(&phi, 1e-9));
        }

        #[test]
        fn draws_land_on_positive_weights(ws in prop::collection::vec(0.0f64..5.0, 1..8), seed: u64) {
            prop_assume!(ws.iter().any(|&w| w > 0.0));
            let mut rng = RngStream::new(seed);
            let i = sample_discrete(&ws, &mut rng).unwrap();
            prop_assert!(ws[i] > 0.0);
        }
    }
}
