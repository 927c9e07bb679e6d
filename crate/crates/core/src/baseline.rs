//! One-vs-rest linear support-vector classifier.
//!
//! Each binary problem minimizes
//!
//! ```text
//! P(w, b) = ½(‖w‖² + b²) + C · Σᵢ max(0, 1 − yᵢ(w·xᵢ + b))
//! ```
//!
//! by dual coordinate descent over the hinge-loss dual (the liblinear
//! L1-loss scheme). The bias is carried as a constant feature of value 1, so
//! it is regularized together with `w`, as in liblinear and LinearSVC.
//!
//! Coordinates are visited in an order reshuffled every epoch from a
//! ChaCha8 stream keyed by `(seed, class rank)`. Training stops once the
//! largest `|Δαᵢ|` of an epoch drops below `tol`, or after `max_epochs`.
//! Dual ascent does not guarantee a monotone primal, so the solver keeps the
//! best primal iterate seen at any epoch end and returns that one; the trace
//! of its objective is non-increasing by construction.

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::corpus::OrdinalClass;

pub const MODEL_MAGIC: &str = "LPI-OVR-SVM";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub c: f64,
    pub max_epochs: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig { c: 1.0, max_epochs: 1000, tol: 1e-4, seed: 0 }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<(), SvmError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(SvmError::BadConfig(format!("c must be positive, got {}", self.c)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(SvmError::BadConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_epochs == 0 {
            return Err(SvmError::BadConfig("max_epochs must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("no training examples")]
    EmptyInput,
    #[error("need at least two distinct classes, all labels are {0}")]
    SingleClass(OrdinalClass),
    #[error("expected feature dimension {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("{features} feature vectors but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("model version {found} is newer than supported version {supported}")]
    VersionTooNew { found: u32, supported: u32 },
    #[error("model file is truncated")]
    Truncated,
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Invalid(#[from] SvmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    classes: Vec<OrdinalClass>,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
    config: SvmConfig,
    feature_dim: usize,
}

impl SvmModel {
    /// Builds a model from explicit parameters. Classes are stored in rank
    /// order; weights and biases follow them.
    pub fn new(
        classes: Vec<OrdinalClass>,
        weights: Vec<Vec<f64>>,
        biases: Vec<f64>,
        config: SvmConfig,
    ) -> Result<Self, SvmError> {
        if classes.len() < 2 {
            return Err(SvmError::InvalidModel("need at least two classes".into()));
        }
        if weights.len() != classes.len() || biases.len() != classes.len() {
            return Err(SvmError::InvalidModel("classes, weights and biases differ in length".into()));
        }
        let feature_dim = weights[0].len();
        if let Some(w) = weights.iter().find(|w| w.len() != feature_dim) {
            return Err(SvmError::DimMismatch { expected: feature_dim, found: w.len() });
        }
        let mut order: Vec<usize> = (0..classes.len()).collect();
        order.sort_by_key(|&i| classes[i].rank());
        if order.windows(2).any(|p| classes[p[0]] == classes[p[1]]) {
            return Err(SvmError::InvalidModel("duplicate class".into()));
        }
        Ok(SvmModel {
            classes: order.iter().map(|&i| classes[i]).collect(),
            weights: order.iter().map(|&i| weights[i].clone()).collect(),
            biases: order.iter().map(|&i| biases[i]).collect(),
            config,
            feature_dim,
        })
    }

    pub fn classes(&self) -> &[OrdinalClass] {
        &self.classes
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn config(&self) -> &SvmConfig {
        &self.config
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Per-class decision scores `wₖ·x + bₖ`, in class order.
    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>, SvmError> {
        if x.len() != self.feature_dim {
            return Err(SvmError::DimMismatch { expected: self.feature_dim, found: x.len() });
        }
        Ok(self.weights.iter().zip(&self.biases).map(|(w, b)| dot(w, x) + b).collect())
    }

    /// Argmax class; ties go to the lowest rank (most potent class).
    pub fn predict(&self, x: &[f64]) -> Result<(OrdinalClass, Vec<f64>), SvmError> {
        let scores = self.scores(x)?;
        let mut best = 0;
        for (k, s) in scores.iter().enumerate() {
            if *s > scores[best] {
                best = k;
            }
        }
        Ok((self.classes[best], scores))
    }
}

/// Objective trace of one binary sub-problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryTrace {
    pub class: OrdinalClass,
    /// Primal objective of the retained iterate after each epoch.
    pub objectives: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryFit {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub objectives: Vec<f64>,
    pub epochs: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Regularized primal objective with the bias included in the penalty.
pub fn primal_objective<T: AsRef<[f64]>>(w: &[f64], b: f64, xs: &[T], ys: &[f64], c: f64) -> f64 {
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (1.0 - y * (dot(w, x.as_ref()) + b)).max(0.0))
        .sum();
    0.5 * (dot(w, w) + b * b) + c * hinge
}

/// A subgradient of [`primal_objective`]; at points where no margin equals
/// exactly 1 it is the gradient.
pub fn primal_subgradient<T: AsRef<[f64]>>(w: &[f64], b: f64, xs: &[T], ys: &[f64], c: f64) -> (Vec<f64>, f64) {
    let mut gw = w.to_vec();
    let mut gb = b;
    for (x, &y) in xs.iter().zip(ys) {
        let x = x.as_ref();
        if y * (dot(w, x) + b) < 1.0 {
            for (g, xi) in gw.iter_mut().zip(x) {
                *g -= c * y * xi;
            }
            gb -= c * y;
        }
    }
    (gw, gb)
}

/// Fits one binary problem with labels `ys ∈ {−1, +1}`.
pub fn train_binary<T: AsRef<[f64]>>(xs: &[T], ys: &[f64], cfg: &SvmConfig, stream: u64) -> BinaryFit {
    let n = xs.len();
    let dim = xs.first().map_or(0, |x| x.as_ref().len());
    let q_diag: Vec<f64> = xs.iter().map(|x| dot(x.as_ref(), x.as_ref()) + 1.0).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; dim];
    let mut b = 0.0;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut order: Vec<usize> = (0..n).collect();

    let mut best_w = w.clone();
    let mut best_b = b;
    let mut best_obj = primal_objective(&w, b, xs, ys, cfg.c);
    let mut objectives = Vec::new();
    let mut converged = false;
    let mut epochs = 0;

    while epochs < cfg.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        let mut max_delta: f64 = 0.0;
        for &i in &order {
            let x = xs[i].as_ref();
            let y = ys[i];
            let g = y * (dot(&w, x) + b) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == cfg.c {
                g.max(0.0)
            } else {
                g
            };
            if pg == 0.0 {
                continue;
            }
            let old = alpha[i];
            alpha[i] = (old - g / q_diag[i]).clamp(0.0, cfg.c);
            let step = (alpha[i] - old) * y;
            if step != 0.0 {
                for (wj, xj) in w.iter_mut().zip(x) {
                    *wj += step * xj;
                }
                b += step;
            }
            max_delta = max_delta.max((alpha[i] - old).abs());
        }
        let obj = primal_objective(&w, b, xs, ys, cfg.c);
        if obj <= best_obj {
            best_obj = obj;
            best_w.clone_from(&w);
            best_b = b;
        }
        objectives.push(best_obj);
        if max_delta < cfg.tol {
            converged = true;
            break;
        }
    }
    BinaryFit { weights: best_w, bias: best_b, objectives, epochs, converged }
}

fn check_inputs<T: AsRef<[f64]>>(features: &[T], labels: &[OrdinalClass]) -> Result<Vec<OrdinalClass>, SvmError> {
    if features.len() != labels.len() {
        return Err(SvmError::LengthMismatch { features: features.len(), labels: labels.len() });
    }
    if features.is_empty() {
        return Err(SvmError::EmptyInput);
    }
    let dim = features[0].as_ref().len();
    if let Some(x) = features.iter().find(|x| x.as_ref().len() != dim) {
        return Err(SvmError::DimMismatch { expected: dim, found: x.as_ref().len() });
    }
    let mut classes = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(SvmError::SingleClass(classes[0]));
    }
    Ok(classes)
}

/// Trains one binary problem per class present in `labels` and returns the
/// model together with each problem's objective trace.
pub fn train_ovr_svm_traced<T: AsRef<[f64]>>(
    features: &[T],
    labels: &[OrdinalClass],
    cfg: &SvmConfig,
) -> Result<(SvmModel, Vec<BinaryTrace>), SvmError> {
    cfg.validate()?;
    let classes = check_inputs(features, labels)?;
    let mut weights = Vec::with_capacity(classes.len());
    let mut biases = Vec::with_capacity(classes.len());
    let mut traces = Vec::with_capacity(classes.len());
    for &class in &classes {
        let ys: Vec<f64> = labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
        let fit = train_binary(features, &ys, cfg, class.rank() as u64);
        traces.push(BinaryTrace { class, objectives: fit.objectives, epochs: fit.epochs, converged: fit.converged });
        weights.push(fit.weights);
        biases.push(fit.bias);
    }
    let feature_dim = features[0].as_ref().len();
    Ok((SvmModel { classes, weights, biases, config: *cfg, feature_dim }, traces))
}

pub fn train_ovr_svm<T: AsRef<[f64]>>(features: &[T], labels: &[OrdinalClass], cfg: &SvmConfig) -> Result<SvmModel, SvmError> {
    train_ovr_svm_traced(features, labels, cfg).map(|(m, _)| m)
}

/// Mean held-out accuracy over `folds` folds. Fold membership comes from a
/// seeded shuffle of the indices; folds that would train on a single class
/// are skipped.
pub fn cross_validated_accuracy<T: AsRef<[f64]>>(
    features: &[T],
    labels: &[OrdinalClass],
    folds: usize,
    cfg: &SvmConfig,
) -> Result<f64, SvmError> {
    check_inputs(features, labels)?;
    let folds = folds.clamp(2, features.len());
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(u64::MAX);
    order.shuffle(&mut rng);
    let mut correct = 0usize;
    let mut total = 0usize;
    for f in 0..folds {
        let (mut train_x, mut train_y, mut test) = (Vec::new(), Vec::new(), Vec::new());
        for (pos, &i) in order.iter().enumerate() {
            if pos % folds == f {
                test.push(i);
            } else {
                train_x.push(features[i].as_ref());
                train_y.push(labels[i]);
            }
        }
        let model = match train_ovr_svm(&train_x, &train_y, cfg) {
            Ok(m) => m,
            Err(SvmError::SingleClass(_)) => continue,
            Err(e) => return Err(e),
        };
        for i in test {
            total += 1;
            if model.predict(features[i].as_ref())?.0 == labels[i] {
                correct += 1;
            }
        }
    }
    Ok(if total == 0 { 0.0 } else { correct as f64 / total as f64 })
}

fn join_floats(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join("\t")
}

/// Decimal text format:
///
/// ```text
/// LPI-OVR-SVM
/// version<TAB>1
/// config<TAB>c<TAB>max_epochs<TAB>tol<TAB>seed
/// dims<TAB>n_classes<TAB>feature_dim
/// class<TAB>A<TAB>bias<TAB>w1<TAB>...<TAB>wd      (one line per class)
/// end
/// ```
///
/// Floats use Rust's shortest round-trip representation.
pub fn save_model<W: Write>(model: &SvmModel, mut sink: W) -> std::io::Result<()> {
    writeln!(sink, "{MODEL_MAGIC}")?;
    writeln!(sink, "version\t{MODEL_VERSION}")?;
    let c = &model.config;
    writeln!(sink, "config\t{}\t{}\t{}\t{}", c.c, c.max_epochs, c.tol, c.seed)?;
    writeln!(sink, "dims\t{}\t{}", model.classes.len(), model.feature_dim)?;
    for ((class, w), b) in model.classes.iter().zip(&model.weights).zip(&model.biases) {
        if w.is_empty() {
            writeln!(sink, "class\t{}\t{b}", class.letter())?;
        } else {
            writeln!(sink, "class\t{}\t{b}\t{}", class.letter(), join_floats(w))?;
        }
    }
    writeln!(sink, "end")?;
    sink.flush()
}

fn field<'a, T: std::str::FromStr>(fields: &mut impl Iterator<Item = &'a str>, what: &str) -> Result<T, ModelIoError> {
    let text = fields.next().ok_or(ModelIoError::Truncated)?;
    text.parse().map_err(|_| ModelIoError::Malformed(format!("bad {what} `{text}`")))
}

pub fn load_model<R: BufRead>(source: R) -> Result<SvmModel, ModelIoError> {
    let mut lines = source.lines();
    let mut next_line = || -> Result<String, ModelIoError> { lines.next().ok_or(ModelIoError::Truncated)?.map_err(Into::into) };

    if next_line().map_err(|_| ModelIoError::BadMagic)?.trim_end() != MODEL_MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    let line = next_line()?;
    let mut f = line.split('\t');
    if f.next() != Some("version") {
        return Err(ModelIoError::Malformed("missing version line".into()));
    }
    let version: u32 = field(&mut f, "version")?;
    if version > MODEL_VERSION {
        return Err(ModelIoError::VersionTooNew { found: version, supported: MODEL_VERSION });
    }

    let line = next_line()?;
    let mut f = line.split('\t');
    if f.next() != Some("config") {
        return Err(ModelIoError::Malformed("missing config line".into()));
    }
    let config = SvmConfig {
        c: field(&mut f, "c")?,
        max_epochs: field(&mut f, "max_epochs")?,
        tol: field(&mut f, "tol")?,
        seed: field(&mut f, "seed")?,
    };

    let line = next_line()?;
    let mut f = line.split('\t');
    if f.next() != Some("dims") {
        return Err(ModelIoError::Malformed("missing dims line".into()));
    }
    let n_classes: usize = field(&mut f, "class count")?;
    let feature_dim: usize = field(&mut f, "feature dimension")?;

    let (mut classes, mut weights, mut biases) = (Vec::new(), Vec::new(), Vec::new());
    for _ in 0..n_classes {
        let line = next_line()?;
        let mut f = line.split('\t');
        if f.next() != Some("class") {
            return Err(ModelIoError::Truncated);
        }
        let letter: String = field(&mut f, "class")?;
        classes.push(letter.parse::<OrdinalClass>().map_err(|_| ModelIoError::Malformed(format!("bad class `{letter}`")))?);
        biases.push(field(&mut f, "bias")?);
        let w = f
            .map(|t| t.parse::<f64>().map_err(|_| ModelIoError::Malformed(format!("bad weight `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if w.len() < feature_dim {
            return Err(ModelIoError::Truncated);
        }
        if w.len() > feature_dim {
            return Err(ModelIoError::Malformed(format!("{} weights, expected {feature_dim}", w.len())));
        }
        weights.push(w);
    }
    if next_line()?.trim_end() != "end" {
        return Err(ModelIoError::Truncated);
    }
    let model = SvmModel::new(classes, weights, biases, config)?;
    if model.feature_dim != feature_dim {
        return Err(ModelIoError::Malformed("feature dimension mismatch".into()));
    }
    Ok(model)
}
