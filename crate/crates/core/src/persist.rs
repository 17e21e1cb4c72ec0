//! Plain-text model files and metric reports.
//!
//! A model called `name` is stored as five files in one directory:
//!
//! | file                     | contents                                         |
//! |--------------------------|--------------------------------------------------|
//! | `name.theta`             | one line per document, K numbers                 |
//! | `name.phi`               | one line per topic, V numbers                    |
//! | `name.topWords`          | `Topic k: w1 w2 ...`                             |
//! | `name.topicAssignments`  | topic ids per document (one per doc for DMM/GPUDMM) |
//! | `name.paras`             | `key=value` settings                             |
//!
//! Numbers are written in the shortest form that parses back to the same
//! value, so write → read → write reproduces the files byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use crate::corpus::{load_corpus, Vocabulary};
use crate::error::{Error, Result};
use crate::eval::{Coherence, EvalReport};
use crate::sampling::{ModelKind, ModelParams, TrainedModel};
use crate::scalar::Real;

pub const SUFFIXES: [&str; 5] = ["theta", "phi", "topWords", "topicAssignments", "paras"];

pub fn artifact_path(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}.{suffix}"))
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn join<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for (i, x) in items.into_iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{x}");
    }
    out
}

pub fn format_matrix<F: Real>(m: &Array2<F>) -> String {
    let mut out = String::new();
    for row in m.outer_iter() {
        out.push_str(&join(row.iter()));
        out.push('\n');
    }
    out
}

pub fn write_matrix<F: Real>(path: &Path, m: &Array2<F>) -> Result<()> {
    write_file(path, &format_matrix(m))
}

/// Parses a whitespace-separated matrix. Every row must have the same
/// length, and `cols` when given.
pub fn parse_matrix<F: Real>(text: &str, path: &Path, cols: Option<usize>) -> Result<Array2<F>> {
    let what = path.display().to_string();
    let mut data = Vec::new();
    let mut width = cols;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let start = data.len();
        for tok in line.split_whitespace() {
            let x: F = tok.parse().map_err(|_| Error::Format {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("'{tok}' is not a number"),
            })?;
            data.push(x);
        }
        let found = data.len() - start;
        match width {
            Some(w) if w != found => {
                return Err(Error::RaggedRow { what, row: i, expected: w, found });
            }
            None => width = Some(found),
            _ => {}
        }
        rows += 1;
    }
    let width = width.unwrap_or(0);
    if rows == 0 || width == 0 {
        return Err(Error::Format { path: path.to_path_buf(), line: 1, message: "empty matrix".into() });
    }
    Ok(Array2::from_shape_vec((rows, width), data).expect("shape checked row by row"))
}

/// Reads a row-stochastic matrix file such as a `.theta`.
pub fn read_matrix<F: Real>(path: &Path) -> Result<Array2<F>> {
    let mut m = parse_matrix(&read_file(path)?, path, None)?;
    check_stochastic(&mut m, &path.display().to_string())?;
    Ok(m)
}

/// Rows must sum to 1. Tiny drift left by decimal printing is renormalized;
/// anything from 1e-6 (or the type's precision floor) up is an error.
fn check_stochastic<F: Real>(m: &mut Array2<F>, what: &str) -> Result<()> {
    let eps = F::epsilon().as_f64() * m.ncols() as f64;
    let exact = eps.max(1e-9);
    let repairable = (10.0 * eps).max(1e-6);
    for (r, mut row) in m.outer_iter_mut().enumerate() {
        let sum: F = row.iter().copied().sum();
        let dev = (sum.as_f64() - 1.0).abs();
        if row.iter().any(|x| *x < F::zero() || !x.is_finite()) || !(dev < repairable) {
            return Err(Error::RowSum { what: what.into(), row: r, sum: sum.as_f64() });
        }
        if dev > exact {
            row.mapv_inplace(|x| x / sum);
        }
    }
    Ok(())
}

pub fn format_top_words(top: &[Vec<String>]) -> String {
    let mut out = String::new();
    for (k, words) in top.iter().enumerate() {
        let _ = writeln!(out, "Topic {k}: {}", join(words));
    }
    out
}

pub fn format_assignments(a: &[Vec<usize>]) -> String {
    let mut out = String::new();
    for doc in a {
        out.push_str(&join(doc));
        out.push('\n');
    }
    out
}

fn parse_assignments(text: &str, path: &Path, k: usize) -> Result<Vec<Vec<usize>>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            line.split_whitespace()
                .map(|tok| match tok.parse::<usize>() {
                    Ok(z) if z < k => Ok(z),
                    _ => Err(Error::Format {
                        path: path.to_path_buf(),
                        line: i + 1,
                        message: format!("'{tok}' is not a topic id below {k}"),
                    }),
                })
                .collect()
        })
        .collect()
}

/// `key=value` lines describing how the model was trained.
pub fn format_paras<F: Real>(model: &TrainedModel<F>) -> String {
    let p = &model.params;
    let x = &p.extras;
    let mut out = String::new();
    let _ = writeln!(out, "model={}", model.kind);
    let _ = writeln!(out, "K={}", p.topics);
    let _ = writeln!(out, "alpha={}", p.alpha);
    let _ = writeln!(out, "beta={}", p.beta);
    let _ = writeln!(out, "niters={}", p.iterations);
    let _ = writeln!(out, "twords={}", p.top_words);
    let _ = writeln!(out, "seed={}", p.seed);
    match model.kind {
        ModelKind::Btm | ModelKind::Wntm => match x.window {
            Some(w) => {
                let _ = writeln!(out, "window={w}");
            }
            None => out.push_str("window=doc\n"),
        },
        ModelKind::Ptm => {
            if let Some(n) = x.pseudo_docs {
                let _ = writeln!(out, "P={n}");
            }
            let _ = writeln!(out, "lambda={}", x.lambda);
        }
        ModelKind::GpuDmm => {
            let _ = writeln!(out, "epsilon={}", x.epsilon);
            let _ = writeln!(out, "mu={}", x.mu);
            if let Some(v) = &x.vectors {
                let _ = writeln!(out, "vectors={}", v.display());
            }
        }
        ModelKind::Lda | ModelKind::Dmm => {}
    }
    if let Some(w) = &model.topic_weights {
        let _ = writeln!(out, "topic_weights={}", join(w));
    }
    if let Some(c) = &model.corpus {
        let _ = writeln!(out, "corpus={}", c.display());
    }
    out
}

/// Settings read back from a `.paras` file.
#[derive(Debug, Clone, PartialEq)]
pub struct Paras<F> {
    pub kind: ModelKind,
    pub params: ModelParams<F>,
    pub topic_weights: Option<Vec<F>>,
    pub corpus: Option<PathBuf>,
}

pub fn parse_paras<F: Real>(text: &str, path: &Path) -> Result<Paras<F>> {
    let err = |line: usize, message: String| Error::Format { path: path.to_path_buf(), line, message };
    let mut kind = None;
    let mut params = ModelParams::<F>::default();
    let mut seen = [false; 6];
    let mut topic_weights = None;
    let mut corpus = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| err(line_no, format!("expected key=value, got '{line}'")))?;
        let bad = |_| err(line_no, format!("bad value '{value}' for {key}"));
        let real = |v: &str| v.parse::<F>().map_err(|_| err(line_no, format!("bad value '{v}' for {key}")));
        match key {
            "model" => {
                kind = Some(value.parse::<ModelKind>().map_err(|_| err(line_no, format!("unknown model '{value}'")))?);
                seen[0] = true;
            }
            "K" => {
                params.topics = value.parse().map_err(bad)?;
                seen[1] = true;
            }
            "alpha" => {
                params.alpha = real(value)?;
                seen[2] = true;
            }
            "beta" => {
                params.beta = real(value)?;
                seen[3] = true;
            }
            "niters" => {
                params.iterations = value.parse().map_err(bad)?;
                seen[4] = true;
            }
            "seed" => {
                params.seed = value.parse().map_err(bad)?;
                seen[5] = true;
            }
            "twords" => params.top_words = value.parse().map_err(bad)?,
            "window" if value == "doc" => params.extras.window = None,
            "window" => params.extras.window = Some(value.parse().map_err(bad)?),
            "P" => params.extras.pseudo_docs = Some(value.parse().map_err(bad)?),
            "lambda" => params.extras.lambda = real(value)?,
            "epsilon" => params.extras.epsilon = real(value)?,
            "mu" => params.extras.mu = real(value)?,
            "vectors" => params.extras.vectors = Some(PathBuf::from(value)),
            "topic_weights" => topic_weights = Some(value.split_whitespace().map(real).collect::<Result<Vec<F>>>()?),
            "corpus" => corpus = Some(PathBuf::from(value)),
            _ => {}
        }
    }
    const REQUIRED: [&str; 6] = ["model", "K", "alpha", "beta", "niters", "seed"];
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(err(0, format!("missing key '{}'", REQUIRED[i])));
    }
    Ok(Paras { kind: kind.expect("checked above"), params, topic_weights, corpus })
}

/// Writes the five model files and returns their paths.
pub fn write_model<F: Real>(model: &TrainedModel<F>, dir: &Path, name: &str) -> Result<Vec<PathBuf>> {
    let bodies = [
        format_matrix(&model.theta),
        format_matrix(&model.phi),
        format_top_words(&model.top_words(model.params.top_words)),
        format_assignments(&model.assignments),
        format_paras(model),
    ];
    let mut paths = Vec::with_capacity(5);
    for (suffix, body) in SUFFIXES.iter().zip(bodies) {
        let path = artifact_path(dir, name, suffix);
        write_file(&path, &body)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Reads a model written by [`write_model`]. `vocab` must be the training
/// vocabulary (phi needs one column per word). A missing
/// `.topicAssignments` file leaves `assignments` empty.
pub fn read_model<F: Real>(dir: &Path, name: &str, vocab: &Vocabulary) -> Result<TrainedModel<F>> {
    let paras_path = artifact_path(dir, name, "paras");
    let paras: Paras<F> = parse_paras(&read_file(&paras_path)?, &paras_path)?;
    let k = paras.params.topics;
    let theta_path = artifact_path(dir, name, "theta");
    let mut theta = parse_matrix::<F>(&read_file(&theta_path)?, &theta_path, Some(k))?;
    check_stochastic(&mut theta, &theta_path.display().to_string())?;
    let phi_path = artifact_path(dir, name, "phi");
    let mut phi = parse_matrix::<F>(&read_file(&phi_path)?, &phi_path, Some(vocab.len()))?;
    if phi.nrows() != k {
        return Err(Error::InvalidModel(format!("{} has {} topics, paras say {k}", phi_path.display(), phi.nrows())));
    }
    check_stochastic(&mut phi, &phi_path.display().to_string())?;
    if let Some(w) = &paras.topic_weights {
        if w.len() != k {
            return Err(Error::InvalidModel(format!("{} topic weights for {k} topics", w.len())));
        }
    }
    let assign_path = artifact_path(dir, name, "topicAssignments");
    let assignments = match fs::read_to_string(&assign_path) {
        Ok(text) => parse_assignments(&text, &assign_path, k)?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(Error::io(assign_path, e)),
    };
    Ok(TrainedModel {
        kind: paras.kind,
        params: paras.params,
        theta,
        phi,
        vocab: vocab.clone(),
        assignments,
        topic_weights: paras.topic_weights,
        corpus: paras.corpus,
    })
}

/// Reads a model whose `.paras` records its training corpus, rebuilding the
/// vocabulary from that corpus.
pub fn read_model_with_corpus<F: Real>(dir: &Path, name: &str) -> Result<TrainedModel<F>> {
    let paras_path = artifact_path(dir, name, "paras");
    let paras: Paras<F> = parse_paras(&read_file(&paras_path)?, &paras_path)?;
    let corpus_path = paras.corpus.ok_or_else(|| {
        Error::InvalidModel(format!("{} does not record the training corpus", paras_path.display()))
    })?;
    let corpus = load_corpus(&corpus_path)?;
    read_model(dir, name, corpus.vocab())
}

/// `Purity: v` / `NMI: v`.
pub fn format_clustering(report: &EvalReport) -> String {
    let mut out = String::new();
    for key in ["Purity", "NMI"] {
        if let Some(v) = report.get(key) {
            let _ = writeln!(out, "{key}: {v}");
        }
    }
    out
}

/// `Precision`, `Recall`, `F1` lines, then the per-class breakdown.
pub fn format_classification(report: &EvalReport) -> String {
    let mut out = String::new();
    for key in ["Precision", "Recall", "F1"] {
        if let Some(v) = report.get(key) {
            let _ = writeln!(out, "{key}: {v}");
        }
    }
    for (name, v) in &report.details {
        let _ = writeln!(out, "{name}: {v}");
    }
    out
}

/// `PMI: v`, one `Topic k: v` line per topic (`NA` if every pair was
/// skipped), then any skipped pairs.
pub fn format_coherence(c: &Coherence) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "PMI: {}", c.score);
    for (k, s) in c.per_topic.iter().enumerate() {
        match s {
            Some(v) => {
                let _ = writeln!(out, "Topic {k}: {v}");
            }
            None => {
                let _ = writeln!(out, "Topic {k}: NA");
            }
        }
    }
    for (k, a, b) in &c.skipped {
        let _ = writeln!(out, "skipped topic {k}: {a} {b}");
    }
    out
}

pub fn write_report(path: &Path, body: &str) -> Result<()> {
    write_file(path, body)
}
