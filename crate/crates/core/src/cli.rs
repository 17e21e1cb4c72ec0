//! The `shorttopic` command line: `train`, `infer` and `eval`.
//!
//! Flags are single-dash words followed by a value (`-ntopics 20`). Exit
//! codes: 0 success, 1 usage error, 2 data error, 3 I/O error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::corpus::{load_corpus, load_embeddings, load_labels_for, load_mapped};
use crate::error::Error;
use crate::eval::{
    classify_eval, clustering_eval, pmi_coherence, DEFAULT_COHERENCE_WORDS, DEFAULT_NEIGHBORS, DEFAULT_SPLIT_SEED,
    DEFAULT_TRAIN_FRACTION,
};
use crate::inference::{fold_in, DEFAULT_FOLD_IN_ITERATIONS};
use crate::persist::{
    artifact_path, format_classification, format_clustering, format_coherence, read_matrix, read_model_with_corpus,
    write_matrix, write_model, write_report,
};
use crate::sampling::{
    ModelKind, ModelParams, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_EPSILON, DEFAULT_ITERATIONS, DEFAULT_LAMBDA,
    DEFAULT_MU, DEFAULT_TOPICS, DEFAULT_TOP_WORDS, DEFAULT_WNTM_WINDOW,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const DEFAULT_NAME: &str = "model";

pub fn help() -> String {
    format!(
        "\
Usage: shorttopic <train|infer|eval> [-flag value ...]

train: fit a topic model and write NAME.theta, NAME.phi, NAME.topWords,
NAME.topicAssignments and NAME.paras
  -model M        LDA, DMM, BTM, WNTM, PTM or GPUDMM (required)
  -corpus FILE    training corpus, one document per line (required)
  -ntopics K      number of topics (default {DEFAULT_TOPICS})
  -alpha A        document/mixture Dirichlet prior (default {DEFAULT_ALPHA})
  -beta B         topic-word Dirichlet prior (default {DEFAULT_BETA})
  -niters N       Gibbs sweeps (default {DEFAULT_ITERATIONS})
  -twords T       words listed per topic in NAME.topWords (default {DEFAULT_TOP_WORDS})
  -seed S         random seed (default 0)
  -name NAME      output file prefix (default {DEFAULT_NAME})
  -dir DIR        output directory (default: the corpus file's directory)
  -window W       BTM, WNTM: co-occurrence window (default: whole document for BTM, {DEFAULT_WNTM_WINDOW} for WNTM)
  -P N            PTM: number of pseudo-documents (default: ceil(documents/10))
  -lambda L       PTM: pseudo-document prior (default {DEFAULT_LAMBDA})
  -vectors FILE   GPUDMM: word vectors in word2vec text format (required for GPUDMM)
  -epsilon E      GPUDMM: cosine threshold for similar words (default {DEFAULT_EPSILON})
  -mu M           GPUDMM: promotion weight (default {DEFAULT_MU})

infer: topic proportions for unseen documents; writes NAME.inf.theta
  -name NAME      trained model prefix (required)
  -corpus FILE    new documents, one per line (required)
  -dir DIR        directory holding the model (default .)
  -model M        if given, must match the trained model
  -niters N       fold-in sweeps (default {DEFAULT_FOLD_IN_ITERATIONS})
  -seed S         random seed (default 0)

eval: score a theta file; writes THETA.PurityNMI, THETA.ClassPRF or THETA.PMI
  -task T         coherence, clustering or classification (required)
  -prob FILE      a .theta file (required)
  -label FILE     gold labels, one per line (required for clustering, classification)
  -t N            coherence: top words per topic (default {DEFAULT_COHERENCE_WORDS})
  -ref FILE       coherence: reference corpus (default: the training corpus)
  -k N            classification: neighbours (default {DEFAULT_NEIGHBORS})
  -trainfrac F    classification: training share of each class (default {DEFAULT_TRAIN_FRACTION})
  -splitseed S    classification: split seed (default {DEFAULT_SPLIT_SEED})
"
    )
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

struct Flags {
    values: BTreeMap<String, String>,
}

impl Flags {
    fn parse(args: &[String], allowed: &[&str]) -> Outcome<Self> {
        let mut values = BTreeMap::new();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            let Some(name) = arg.strip_prefix('-').filter(|n| !n.is_empty() && !n.starts_with('-')) else {
                return usage(format!("expected a flag, got '{arg}'"));
            };
            if !allowed.contains(&name) {
                return usage(format!("unknown flag -{name}"));
            }
            let Some(value) = it.next() else {
                return usage(format!("flag -{name} needs a value"));
            };
            if values.insert(name.to_string(), value.clone()).is_some() {
                return usage(format!("flag -{name} given twice"));
            }
        }
        Ok(Self { values })
    }

    fn has(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    fn str(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(String::as_str)
    }

    fn required(&self, name: &str) -> Outcome<&str> {
        match self.str(name) {
            Some(v) => Ok(v),
            None => usage(format!("missing required flag -{name}")),
        }
    }

    fn get<T: FromStr>(&self, name: &str) -> Outcome<Option<T>> {
        match self.str(name) {
            None => Ok(None),
            Some(v) => match v.parse() {
                Ok(x) => Ok(Some(x)),
                Err(_) => usage(format!("bad value '{v}' for -{name}")),
            },
        }
    }

    fn get_or<T: FromStr>(&self, name: &str, default: T) -> Outcome<T> {
        Ok(self.get(name)?.unwrap_or(default))
    }

    /// Usage error if any of `names` is present; `why` names the reason.
    fn forbid(&self, names: &[&str], why: &str) -> Outcome<()> {
        match names.iter().find(|n| self.has(n)) {
            Some(n) => usage(format!("-{n} {why}")),
            None => Ok(()),
        }
    }
}

fn absolute(path: &Path) -> PathBuf {
    std::fs::canonicalize(path).unwrap_or_else(|_| path.to_path_buf())
}

const TRAIN_FLAGS: &[&str] = &[
    "model", "corpus", "ntopics", "alpha", "beta", "niters", "twords", "name", "seed", "dir", "window", "P", "lambda",
    "vectors", "epsilon", "mu",
];

fn train(flags: &Flags, out: &mut dyn Write) -> Outcome<()> {
    let kind: ModelKind = match flags.required("model")?.parse() {
        Ok(k) => k,
        Err(_) => return usage(format!("unknown model '{}'", flags.required("model")?)),
    };
    let corpus_path = PathBuf::from(flags.required("corpus")?);
    let window_models = [ModelKind::Btm, ModelKind::Wntm];
    if !window_models.contains(&kind) {
        flags.forbid(&["window"], "only applies to BTM and WNTM")?;
    }
    if kind != ModelKind::Ptm {
        flags.forbid(&["P", "lambda"], "only applies to PTM")?;
    }
    if kind != ModelKind::GpuDmm {
        flags.forbid(&["vectors", "epsilon", "mu"], "only applies to GPUDMM")?;
    } else if !flags.has("vectors") {
        return usage("GPUDMM needs -vectors");
    }
    let mut params = ModelParams::<f64>::new(flags.get_or("ntopics", DEFAULT_TOPICS)?);
    params.alpha = flags.get_or("alpha", DEFAULT_ALPHA)?;
    params.beta = flags.get_or("beta", DEFAULT_BETA)?;
    params.iterations = flags.get_or("niters", DEFAULT_ITERATIONS)?;
    params.top_words = flags.get_or("twords", DEFAULT_TOP_WORDS)?;
    params.seed = flags.get_or("seed", 0)?;
    params.extras.window = flags.get("window")?;
    params.extras.pseudo_docs = flags.get("P")?;
    params.extras.lambda = flags.get_or("lambda", DEFAULT_LAMBDA)?;
    params.extras.epsilon = flags.get_or("epsilon", DEFAULT_EPSILON)?;
    params.extras.mu = flags.get_or("mu", DEFAULT_MU)?;
    params.extras.vectors = flags.str("vectors").map(|v| absolute(Path::new(v)));
    if let Err(Error::InvalidParams(msg)) = params.validate() {
        return usage(msg);
    }
    let name = flags.str("name").unwrap_or(DEFAULT_NAME);
    let dir = match flags.str("dir") {
        Some(d) => PathBuf::from(d),
        None => corpus_path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let dir = if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir };

    let corpus = load_corpus(&corpus_path)?;
    let embeddings = match &params.extras.vectors {
        Some(v) => Some(load_embeddings::<f64>(v, corpus.vocab())?),
        None => None,
    };
    let mut model = crate::train(kind, &corpus, &params, embeddings.as_ref())?;
    model.corpus = Some(absolute(&corpus_path));
    let paths = write_model(&model, &dir, name)?;
    for p in paths {
        let _ = writeln!(out, "wrote {}", p.display());
    }
    Ok(())
}

const INFER_FLAGS: &[&str] = &["model", "dir", "name", "corpus", "niters", "seed"];

fn infer(flags: &Flags, out: &mut dyn Write, err: &mut dyn Write) -> Outcome<()> {
    let name = flags.required("name")?;
    let corpus_path = flags.required("corpus")?;
    let expected: Option<ModelKind> = match flags.str("model") {
        Some(m) => match m.parse() {
            Ok(k) => Some(k),
            Err(_) => return usage(format!("unknown model '{m}'")),
        },
        None => None,
    };
    let iterations = flags.get_or("niters", DEFAULT_FOLD_IN_ITERATIONS)?;
    if iterations < 1 {
        return usage("-niters must be at least 1");
    }
    let seed = flags.get_or("seed", 0u64)?;
    let dir = PathBuf::from(flags.str("dir").unwrap_or("."));

    let model = read_model_with_corpus::<f64>(&dir, name)?;
    if let Some(k) = expected {
        if k != model.kind {
            return usage(format!("-model {k} but {name} is a {} model", model.kind));
        }
    }
    let mapped = load_mapped(corpus_path, &model.vocab)?;
    let result = fold_in(&model, &mapped, iterations, seed)?;
    if result.oov_tokens() > 0 {
        let _ = writeln!(
            err,
            "warning: {} of {} tokens are not in the model vocabulary and were dropped",
            result.oov_tokens(),
            result.total_tokens()
        );
        for d in 0..mapped.num_docs() {
            if mapped.docs[d].is_empty() && mapped.tokens_per_doc[d] > 0 {
                let _ = writeln!(err, "warning: document {d} is entirely out of vocabulary (100%); uniform topics");
            }
        }
    }
    let path = artifact_path(&dir, name, "inf.theta");
    write_matrix(&path, &result.theta)?;
    let _ = writeln!(out, "wrote {}", path.display());
    Ok(())
}

const EVAL_FLAGS: &[&str] = &["task", "prob", "label", "t", "ref", "k", "trainfrac", "splitseed"];

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn eval(flags: &Flags, out: &mut dyn Write) -> Outcome<()> {
    let task = flags.required("task")?;
    let prob = PathBuf::from(flags.required("prob")?);
    let class_only = ["k", "trainfrac", "splitseed"];
    let coherence_only = ["t", "ref"];
    match task {
        "clustering" => {
            flags.forbid(&class_only, "only applies to -task classification")?;
            flags.forbid(&coherence_only, "only applies to -task coherence")?;
            let label = flags.required("label")?;
            let theta = read_matrix::<f64>(&prob)?;
            let gold = load_labels_for(label, theta.nrows())?;
            let report = clustering_eval(&theta, &gold)?;
            let body = format_clustering(&report);
            write_report(&with_suffix(&prob, "PurityNMI"), &body)?;
            let _ = out.write_all(body.as_bytes());
        }
        "classification" => {
            flags.forbid(&coherence_only, "only applies to -task coherence")?;
            let label = flags.required("label")?;
            let k = flags.get_or("k", DEFAULT_NEIGHBORS)?;
            let frac = flags.get_or("trainfrac", DEFAULT_TRAIN_FRACTION)?;
            let seed = flags.get_or("splitseed", DEFAULT_SPLIT_SEED)?;
            if k < 1 {
                return usage("-k must be at least 1");
            }
            if !(frac > 0.0 && frac < 1.0) {
                return usage("-trainfrac must be between 0 and 1");
            }
            let theta = read_matrix::<f64>(&prob)?;
            let gold = load_labels_for(label, theta.nrows())?;
            let report = classify_eval(&theta, &gold, seed, frac, k)?;
            let body = format_classification(&report);
            write_report(&with_suffix(&prob, "ClassPRF"), &body)?;
            let _ = out.write_all(body.as_bytes());
        }
        "coherence" => {
            flags.forbid(&class_only, "only applies to -task classification")?;
            flags.forbid(&["label"], "is not used by -task coherence")?;
            let t = flags.get_or("t", DEFAULT_COHERENCE_WORDS)?;
            if t < 2 {
                return usage("-t must be at least 2");
            }
            let file = prob.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
            let Some(name) = file.strip_suffix(".theta") else {
                return usage(format!("-prob must name a .theta file written by train, got {}", prob.display()));
            };
            let dir = prob.parent().map(Path::to_path_buf).unwrap_or_default();
            let dir = if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir };
            let model = read_model_with_corpus::<f64>(&dir, name)?;
            let reference = match flags.str("ref") {
                Some(r) => load_corpus(r)?,
                None => load_corpus(model.corpus.as_ref().expect("read_model_with_corpus checks this"))?,
            };
            let coherence = pmi_coherence(&model, &reference, t)?;
            let body = format_coherence(&coherence);
            write_report(&with_suffix(&prob, "PMI"), &body)?;
            let _ = out.write_all(body.as_bytes());
        }
        other => return usage(format!("unknown task '{other}'")),
    }
    Ok(())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::InvalidParams(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

/// Runs one command. `args` excludes the program name.
pub fn run_with(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some((cmd, rest)) = args.split_first() else {
        let _ = write!(err, "{}", help());
        return EXIT_USAGE;
    };
    let wants_help = |a: &String| matches!(a.as_str(), "-help" | "--help" | "-h");
    if wants_help(cmd) || rest.iter().any(wants_help) {
        let _ = write!(out, "{}", help());
        return EXIT_OK;
    }
    let result = match cmd.as_str() {
        "train" => Flags::parse(rest, TRAIN_FLAGS).and_then(|f| train(&f, out)),
        "infer" => Flags::parse(rest, INFER_FLAGS).and_then(|f| infer(&f, out, err)),
        "eval" => Flags::parse(rest, EVAL_FLAGS).and_then(|f| eval(&f, out)),
        other => usage(format!("unknown command '{other}'")),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}\nRun 'shorttopic --help' for the list of flags.");
            EXIT_USAGE
        }
        Err(Failure::Run(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(args: &[String]) -> i32 {
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    fn run_quiet(s: &str) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(&args(s), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_lists_every_flag_with_default() {
        let (code, out, _) = run_quiet("--help");
        assert_eq!(code, 0);
        for f in TRAIN_FLAGS.iter().chain(INFER_FLAGS).chain(EVAL_FLAGS) {
            assert!(out.contains(&format!("  -{f} ")), "-{f}");
        }
        for line in out.lines().filter(|l| l.trim_start().starts_with('-')) {
            assert!(line.contains("default") || line.contains("required") || line.contains("must match"), "{line}");
        }
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_quiet("").0, EXIT_USAGE);
        assert_eq!(run_quiet("fit -model LDA").0, EXIT_USAGE);
        assert_eq!(run_quiet("train -model LDA").0, EXIT_USAGE);
        assert_eq!(run_quiet("train -model XYZ -corpus c.txt").0, EXIT_USAGE);
        assert_eq!(run_quiet("train -model LDA -corpus c.txt -bogus 1").0, EXIT_USAGE);
        assert_eq!(run_quiet("train -model LDA -corpus c.txt -ntopics").0, EXIT_USAGE);
        assert_eq!(run_quiet("train -model LDA -corpus c.txt -ntopics x").0, EXIT_USAGE);
        assert_eq!(run_quiet("train -model LDA -corpus c.txt -vectors v.txt").0, EXIT_USAGE);
        assert_eq!(run_quiet("train -model GPUDMM -corpus c.txt").0, EXIT_USAGE);
        assert_eq!(run_quiet("train -model DMM -corpus c.txt -window 3").0, EXIT_USAGE);
        assert_eq!(run_quiet("train -model LDA -corpus c.txt -alpha -1").0, EXIT_USAGE);
        assert_eq!(run_quiet("eval -task clustering -prob x.theta -k 3 -label l").0, EXIT_USAGE);
        assert_eq!(run_quiet("eval -task nothing -prob x.theta").0, EXIT_USAGE);
    }

    #[test]
    fn missing_corpus_is_io_error() {
        let (code, _, err) = run_quiet("train -model LDA -corpus /nonexistent/c.txt");
        assert_eq!(code, EXIT_IO);
        assert!(err.contains("/nonexistent/c.txt"));
    }
}
