//! Eleven binary classifiers over raw pixel vectors, behind one
//! train/predict contract.
//!
//! Every model predicts a label in `{0, 1}` plus a real score. For
//! probabilistic kinds the score is the class-1 probability (label 1 iff
//! score > 0.5); for margin kinds it is a signed margin (label 1 iff
//! score > 0).

mod adaboost;
mod centroid;
mod features;
mod gnb;
pub mod gpc;
mod knn;
mod mlp;
mod persist;
mod qda;
mod sgd;
pub mod svm;
pub mod tree;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use adaboost::{AdaBoostModel, AdaBoostParams, Stump};
pub use centroid::{CentroidModel, CentroidParams};
pub use features::Features;
pub use gnb::{GnbModel, GnbParams};
pub use gpc::{GpcModel, GpcParams};
pub use knn::{KnnModel, KnnParams};
pub use mlp::{MlpModel, MlpParams};
pub use persist::{load_model, model_from_bytes, model_to_bytes, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use qda::{QdaModel, QdaParams};
pub use sgd::{SgdModel, SgdParams};
pub use svm::{SvmModel, SvmParams};
pub use tree::{DtcParams, ForestModel, RfParams, Tree, TreeNode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassifierKind {
    Svm,
    Knn,
    Gpc,
    Gnb,
    Mlp,
    Sgd,
    AdaBoost,
    Dtc,
    Rf,
    Qda,
    NearestCentroid,
}

impl ClassifierKind {
    /// Report row order.
    pub const ALL: [ClassifierKind; 11] = [
        ClassifierKind::Svm,
        ClassifierKind::Knn,
        ClassifierKind::Gpc,
        ClassifierKind::Gnb,
        ClassifierKind::Mlp,
        ClassifierKind::Sgd,
        ClassifierKind::AdaBoost,
        ClassifierKind::Dtc,
        ClassifierKind::Rf,
        ClassifierKind::Qda,
        ClassifierKind::NearestCentroid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "SVM",
            ClassifierKind::Knn => "k-NN",
            ClassifierKind::Gpc => "GPC",
            ClassifierKind::Gnb => "GNB",
            ClassifierKind::Mlp => "MLP",
            ClassifierKind::Sgd => "SGD",
            ClassifierKind::AdaBoost => "AdaBoost",
            ClassifierKind::Dtc => "DTC",
            ClassifierKind::Rf => "RF",
            ClassifierKind::Qda => "QDA",
            ClassifierKind::NearestCentroid => "NearestCentroid",
        }
    }

    /// Lower-case identifier used on the command line and in CSV files.
    pub fn key(self) -> &'static str {
        match self {
            ClassifierKind::Svm => "svm",
            ClassifierKind::Knn => "knn",
            ClassifierKind::Gpc => "gpc",
            ClassifierKind::Gnb => "gnb",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::Sgd => "sgd",
            ClassifierKind::AdaBoost => "adaboost",
            ClassifierKind::Dtc => "dtc",
            ClassifierKind::Rf => "rf",
            ClassifierKind::Qda => "qda",
            ClassifierKind::NearestCentroid => "nearest_centroid",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let lower = s.to_ascii_lowercase().replace('-', "_");
        match lower.as_str() {
            "centroid" | "nc" => return Some(ClassifierKind::NearestCentroid),
            "k_nn" => return Some(ClassifierKind::Knn),
            _ => {}
        }
        Self::ALL.into_iter().find(|k| k.key() == lower || k.name().to_ascii_lowercase() == lower)
    }

    pub fn score_kind(self) -> ScoreKind {
        match self {
            ClassifierKind::Svm | ClassifierKind::Sgd | ClassifierKind::NearestCentroid => {
                ScoreKind::Margin
            }
            _ => ScoreKind::Probability,
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScoreKind {
    Probability,
    Margin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: u8,
    pub score: f64,
}

impl Prediction {
    pub fn from_probability(p: f64) -> Self {
        Prediction { label: u8::from(p > 0.5), score: p }
    }

    pub fn from_margin(m: f64) -> Self {
        Prediction { label: u8::from(m > 0.0), score: m }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Hyperparameters {
    Svm(SvmParams),
    Knn(KnnParams),
    Gpc(GpcParams),
    Gnb(GnbParams),
    Mlp(MlpParams),
    Sgd(SgdParams),
    AdaBoost(AdaBoostParams),
    Dtc(DtcParams),
    Rf(RfParams),
    Qda(QdaParams),
    NearestCentroid(CentroidParams),
}

impl Hyperparameters {
    pub fn default_for(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Svm => Hyperparameters::Svm(SvmParams::default()),
            ClassifierKind::Knn => Hyperparameters::Knn(KnnParams::default()),
            ClassifierKind::Gpc => Hyperparameters::Gpc(GpcParams::default()),
            ClassifierKind::Gnb => Hyperparameters::Gnb(GnbParams::default()),
            ClassifierKind::Mlp => Hyperparameters::Mlp(MlpParams::default()),
            ClassifierKind::Sgd => Hyperparameters::Sgd(SgdParams::default()),
            ClassifierKind::AdaBoost => Hyperparameters::AdaBoost(AdaBoostParams::default()),
            ClassifierKind::Dtc => Hyperparameters::Dtc(DtcParams::default()),
            ClassifierKind::Rf => Hyperparameters::Rf(RfParams::default()),
            ClassifierKind::Qda => Hyperparameters::Qda(QdaParams::default()),
            ClassifierKind::NearestCentroid => {
                Hyperparameters::NearestCentroid(CentroidParams::default())
            }
        }
    }

    pub fn kind(&self) -> ClassifierKind {
        match self {
            Hyperparameters::Svm(_) => ClassifierKind::Svm,
            Hyperparameters::Knn(_) => ClassifierKind::Knn,
            Hyperparameters::Gpc(_) => ClassifierKind::Gpc,
            Hyperparameters::Gnb(_) => ClassifierKind::Gnb,
            Hyperparameters::Mlp(_) => ClassifierKind::Mlp,
            Hyperparameters::Sgd(_) => ClassifierKind::Sgd,
            Hyperparameters::AdaBoost(_) => ClassifierKind::AdaBoost,
            Hyperparameters::Dtc(_) => ClassifierKind::Dtc,
            Hyperparameters::Rf(_) => ClassifierKind::Rf,
            Hyperparameters::Qda(_) => ClassifierKind::Qda,
            Hyperparameters::NearestCentroid(_) => ClassifierKind::NearestCentroid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        match self {
            Hyperparameters::Svm(p) => {
                if !(p.gamma > 0.0 && p.c > 0.0 && p.tol > 0.0) || p.max_steps == 0 {
                    return bad("svm needs gamma > 0, C > 0, tol > 0, max_steps >= 1");
                }
            }
            Hyperparameters::Knn(p) => {
                if p.k == 0 || p.k % 2 == 0 {
                    return bad("knn needs odd k >= 1");
                }
            }
            Hyperparameters::Gpc(p) => {
                if p.restarts == 0 || p.max_iterations == 0 || !(p.newton_tol > 0.0) {
                    return bad("gpc needs restarts >= 1, max_iterations >= 1, newton_tol > 0");
                }
            }
            Hyperparameters::Gnb(p) => {
                if !(p.var_smoothing >= 0.0) {
                    return bad("gnb var_smoothing must be non-negative");
                }
            }
            Hyperparameters::Mlp(p) => {
                if p.hidden == 0 || p.epochs == 0 || !(p.learning_rate > 0.0) {
                    return bad("mlp needs hidden >= 1, epochs >= 1, learning_rate > 0");
                }
            }
            Hyperparameters::Sgd(p) => {
                if p.epochs == 0 || !(p.eta0 > 0.0) || !(p.alpha >= 0.0) {
                    return bad("sgd needs epochs >= 1, eta0 > 0, alpha >= 0");
                }
            }
            Hyperparameters::AdaBoost(p) => {
                if p.rounds == 0 {
                    return bad("adaboost needs rounds >= 1");
                }
            }
            Hyperparameters::Dtc(p) => {
                if p.max_depth == Some(0) {
                    return bad("dtc max_depth must be >= 1 when set");
                }
            }
            Hyperparameters::Rf(p) => {
                if p.trees == 0 || p.max_features == 0 {
                    return bad("rf needs trees >= 1 and max_features >= 1");
                }
            }
            Hyperparameters::Qda(p) => {
                if !(0.0..=1.0).contains(&p.shrinkage) {
                    return bad("qda shrinkage must lie in [0, 1]");
                }
            }
            Hyperparameters::NearestCentroid(_) => {}
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub hyperparameters: Hyperparameters,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierSpec { hyperparameters: Hyperparameters::default_for(kind), seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn kind(&self) -> ClassifierKind {
        self.hyperparameters.kind()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingInfo {
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum FittedModel {
    Svm(SvmModel),
    Knn(KnnModel),
    Gpc(GpcModel),
    Gnb(GnbModel),
    Mlp(MlpModel),
    Sgd(SgdModel),
    AdaBoost(AdaBoostModel),
    Dtc(Tree),
    Rf(ForestModel),
    Qda(QdaModel),
    NearestCentroid(CentroidModel),
}

/// A fitted classifier. Immutable; predictions are deterministic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub fitted: FittedModel,
    pub info: TrainingInfo,
}

impl TrainedModel {
    pub fn predict(&self, x: &[f64]) -> Prediction {
        match &self.fitted {
            FittedModel::Svm(m) => Prediction::from_margin(m.decision(x)),
            FittedModel::Knn(m) => Prediction::from_probability(m.vote_fraction(x)),
            FittedModel::Gpc(m) => Prediction::from_probability(m.probability(x)),
            FittedModel::Gnb(m) => Prediction::from_probability(m.probability(x)),
            FittedModel::Mlp(m) => Prediction::from_probability(m.probability(x)),
            FittedModel::Sgd(m) => Prediction::from_margin(m.decision(x)),
            FittedModel::AdaBoost(m) => Prediction::from_probability(m.vote_fraction(x)),
            FittedModel::Dtc(t) => Prediction::from_probability(t.probability(x)),
            FittedModel::Rf(f) => Prediction::from_probability(f.vote_fraction(x)),
            FittedModel::Qda(m) => Prediction::from_probability(m.probability(x)),
            FittedModel::NearestCentroid(m) => Prediction::from_margin(m.margin(x)),
        }
    }
}

/// Anything that maps a feature vector to a prediction.
pub trait Predictor: Send + Sync {
    fn predict(&self, x: &[f64]) -> Prediction;
}

impl Predictor for TrainedModel {
    fn predict(&self, x: &[f64]) -> Prediction {
        TrainedModel::predict(self, x)
    }
}

/// Anything that can be fitted on labeled features.
pub trait Learner: Sync {
    type Model: Predictor;

    fn fit(&self, x: &Features, y: &[u8]) -> Result<Self::Model>;
}

impl Learner for ClassifierSpec {
    type Model = TrainedModel;

    fn fit(&self, x: &Features, y: &[u8]) -> Result<TrainedModel> {
        train(self, x, y)
    }
}

fn check_training_data(x: &Features, y: &[u8]) -> Result<()> {
    if x.n() != y.len() {
        return Err(Error::Training(format!("{} rows but {} labels", x.n(), y.len())));
    }
    if x.n() < 2 {
        return Err(Error::Training("need at least two samples".into()));
    }
    if let Some(bad) = y.iter().find(|&&l| l > 1) {
        return Err(Error::Training(format!("label {bad} is not binary")));
    }
    if !y.contains(&0) || !y.contains(&1) {
        return Err(Error::Training("training set contains a single class".into()));
    }
    if x.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::Training("features must be finite".into()));
    }
    Ok(())
}

/// Fits the classifier described by `spec`.
pub fn train(spec: &ClassifierSpec, x: &Features, y: &[u8]) -> Result<TrainedModel> {
    spec.hyperparameters.validate()?;
    check_training_data(x, y)?;
    let seed = spec.seed;
    let (fitted, info) = match &spec.hyperparameters {
        Hyperparameters::Svm(p) => {
            let (m, info) = svm::fit(x, y, p);
            (FittedModel::Svm(m), info)
        }
        Hyperparameters::Knn(p) => (FittedModel::Knn(KnnModel::fit(x, y, p)), TrainingInfo::closed_form()),
        Hyperparameters::Gpc(p) => {
            let (m, info) = gpc::fit(x, y, p, seed)?;
            (FittedModel::Gpc(m), info)
        }
        Hyperparameters::Gnb(p) => (FittedModel::Gnb(GnbModel::fit(x, y, p)), TrainingInfo::closed_form()),
        Hyperparameters::Mlp(p) => {
            let (m, info) = mlp::fit(x, y, p, seed);
            (FittedModel::Mlp(m), info)
        }
        Hyperparameters::Sgd(p) => {
            let (m, info) = sgd::fit(x, y, p, seed);
            (FittedModel::Sgd(m), info)
        }
        Hyperparameters::AdaBoost(p) => {
            let (m, info) = adaboost::fit(x, y, p, seed)?;
            (FittedModel::AdaBoost(m), info)
        }
        Hyperparameters::Dtc(p) => {
            let t = tree::fit_tree(x, y, p, seed);
            let info = TrainingInfo { iterations: t.nodes.len(), converged: true, objective: 0.0 };
            (FittedModel::Dtc(t), info)
        }
        Hyperparameters::Rf(p) => {
            let f = tree::fit_forest(x, y, p, seed);
            let info = TrainingInfo { iterations: f.trees.len(), converged: true, objective: 0.0 };
            (FittedModel::Rf(f), info)
        }
        Hyperparameters::Qda(p) => (FittedModel::Qda(QdaModel::fit(x, y, p)), TrainingInfo::closed_form()),
        Hyperparameters::NearestCentroid(_) => {
            (FittedModel::NearestCentroid(CentroidModel::fit(x, y)), TrainingInfo::closed_form())
        }
    };
    Ok(TrainedModel { spec: spec.clone(), fitted, info })
}

impl TrainingInfo {
    fn closed_form() -> Self {
        TrainingInfo { iterations: 1, converged: true, objective: 0.0 }
    }
}

/// Euclidean squared distance.
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_parse_from_keys_and_names() {
        for kind in ClassifierKind::ALL {
            assert_eq!(ClassifierKind::parse(kind.key()), Some(kind));
            assert_eq!(ClassifierKind::parse(kind.name()), Some(kind));
        }
        assert_eq!(ClassifierKind::parse("centroid"), Some(ClassifierKind::NearestCentroid));
        assert_eq!(ClassifierKind::parse("bogus"), None);
    }

    #[test]
    fn hyperparameters_are_validated() {
        let mut spec = ClassifierSpec::new(ClassifierKind::Knn);
        spec.hyperparameters = Hyperparameters::Knn(KnnParams { k: 4 });
        let x = Features::new(2, 1, vec![0.0, 1.0]);
        assert!(matches!(train(&spec, &x, &[0, 1]), Err(Error::Config(_))));
        spec.hyperparameters = Hyperparameters::Svm(SvmParams { gamma: 0.0, ..SvmParams::default() });
        assert!(train(&spec, &x, &[0, 1]).is_err());
    }

    #[test]
    fn single_class_training_is_rejected() {
        let x = Features::new(3, 2, vec![0.0; 6]);
        for kind in ClassifierKind::ALL {
            let r = train(&ClassifierSpec::new(kind), &x, &[1, 1, 1]);
            assert!(matches!(r, Err(Error::Training(_))), "{kind}");
        }
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
    }
}
