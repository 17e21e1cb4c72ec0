mod common;

use common::planted_corpus;
use shorttopic::eval::argmax_assign;
use shorttopic::{fold_in, train, MappedCorpus, ModelKind, ModelParams, ModelParamsF32, ModelParamsF64};

#[test]
fn fold_in_on_training_corpus_agrees_with_training() {
    let (corpus, _) = planted_corpus(120, 8, 3, 20, 11);
    for seed in 0..5 {
        let p = ModelParamsF64::new(3).with_iterations(200).with_seed(seed);
        let model = train(ModelKind::Lda, &corpus, &p, None).unwrap();
        let phi_before = model.phi.clone();
        let mapped = MappedCorpus::from_corpus(&corpus, &model.vocab).unwrap();
        let f = fold_in(&model, &mapped, 100, seed).unwrap();
        assert_eq!(model.phi, phi_before);
        let a = argmax_assign(&model.theta);
        let b = argmax_assign(&f.theta);
        let agree = a.iter().zip(&b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64;
        assert!(agree >= 0.9, "seed {seed}: agreement {agree}");
    }
}

#[test]
fn doc_level_fold_in_recovers_clusters() {
    let (corpus, _) = planted_corpus(90, 6, 3, 15, 12);
    for kind in [ModelKind::Dmm, ModelKind::Btm, ModelKind::Ptm, ModelKind::Wntm] {
        let p = ModelParamsF64::new(3).with_iterations(100).with_seed(1);
        let model = train(kind, &corpus, &p, None).unwrap();
        let mapped = MappedCorpus::from_corpus(&corpus, &model.vocab).unwrap();
        let f = fold_in(&model, &mapped, 50, 1).unwrap();
        let a = argmax_assign(&model.theta);
        let b = argmax_assign(&f.theta);
        let agree = a.iter().zip(&b).filter(|(x, y)| x == y).count();
        assert!(agree * 10 >= a.len() * 9, "{kind}: {agree}/{}", a.len());
    }
}

#[test]
fn single_precision_models_train_and_fold_in() {
    let (corpus, _) = planted_corpus(60, 6, 3, 10, 13);
    for kind in [ModelKind::Lda, ModelKind::Dmm, ModelKind::Btm, ModelKind::Wntm, ModelKind::Ptm] {
        let p: ModelParamsF32 = ModelParams::new(3).with_iterations(30).with_seed(2);
        let model = train(kind, &corpus, &p, None).unwrap();
        for row in model.theta.outer_iter().chain(model.phi.outer_iter()) {
            assert!((row.sum() - 1.0).abs() < 1e-4, "{kind}");
        }
        let mapped = MappedCorpus::from_text("t0w1 t0w2\nt2w3\n", &model.vocab).unwrap();
        let f = fold_in(&model, &mapped, 10, 0).unwrap();
        assert_eq!(f.theta.nrows(), 2);
    }
}
