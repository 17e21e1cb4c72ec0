//! Topic models for short texts.
//!
//! Six collapsed Gibbs samplers (LDA, DMM, BTM, WNTM, PTM, GPU-DMM) share
//! one corpus representation, a seeded RNG and a common [`TrainedModel`]
//! output. On top sit fold-in inference for unseen documents, evaluation
//! (PMI coherence, purity/NMI, kNN classification), a plain-text model
//! format and the `shorttopic` command-line tool.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common case.
//!
//! ```
//! use shorttopic::{train, Corpus, ModelKind, ModelParamsF64};
//!
//! let corpus = Corpus::from_text("apple banana\nbanana cherry\ncar bus\nbus train\n").unwrap();
//! let params = ModelParamsF64::new(2).with_iterations(50).with_seed(1);
//! let model = train(ModelKind::Dmm, &corpus, &params, None).unwrap();
//! assert_eq!(model.theta.nrows(), 4);
//! ```

pub mod btm;
pub mod cli;
pub mod corpus;
pub mod dmm;
pub mod error;
pub mod eval;
pub mod gpudmm;
pub mod inference;
pub mod lda;
pub mod persist;
pub mod ptm;
pub mod sampling;
pub mod scalar;
pub mod wntm;

pub use corpus::{Corpus, GoldLabels, MappedCorpus, Vocabulary, WordEmbeddings};
pub use error::{Error, Result};
pub use inference::{fold_in, FoldIn};
pub use sampling::{CountState, ModelKind, ModelParams, RngStream, TrainedModel};
pub use scalar::Real;

pub type TrainedModelF64 = TrainedModel<f64>;
pub type TrainedModelF32 = TrainedModel<f32>;
pub type ModelParamsF64 = ModelParams<f64>;
pub type ModelParamsF32 = ModelParams<f32>;
pub type CountStateF64 = CountState<f64>;
pub type CountStateF32 = CountState<f32>;
pub type WordEmbeddingsF64 = WordEmbeddings<f64>;
pub type WordEmbeddingsF32 = WordEmbeddings<f32>;
pub type FoldInF64 = FoldIn<f64>;
pub type FoldInF32 = FoldIn<f32>;

/// Trains any of the six models. GPU-DMM needs `embeddings`; the others
/// ignore it.
pub fn train<F: Real>(
    kind: ModelKind,
    corpus: &Corpus,
    params: &ModelParams<F>,
    embeddings: Option<&WordEmbeddings<F>>,
) -> Result<TrainedModel<F>> {
    match kind {
        ModelKind::Lda => lda::lda_train(corpus, params),
        ModelKind::Dmm => dmm::dmm_train(corpus, params),
        ModelKind::Btm => btm::btm_train(corpus, params),
        ModelKind::Wntm => wntm::wntm_train(corpus, params),
        ModelKind::Ptm => ptm::ptm_train(corpus, params),
        ModelKind::GpuDmm => match embeddings {
            Some(emb) => gpudmm::gpudmm_train(corpus, emb, params),
            None => Err(Error::InvalidParams("GPUDMM needs word embeddings".into())),
        },
    }
}
