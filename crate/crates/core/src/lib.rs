//! Training small neural classifiers under logical constraints on their local
//! feature importances.
//!
//! A constraint such as `I[gender] < 0` is turned into a differentiable
//! penalty `lambda * (1 - Phi)`, where `Phi` is the fuzzy truth degree of the
//! formula averaged over a batch, and added to the cross-entropy risk. The
//! importances come from layer-wise relevance propagation recorded on the same
//! autodiff tape as the forward pass, so the penalty's gradient reaches every
//! weight.
//!
//! ```
//! use ctfi::constraints::ConstraintSet;
//! use ctfi::data::{Dataset, Feature, FeatureKind};
//! use ctfi::model::{train, MlpConfig, MlpParams};
//!
//! let features = vec![
//!     Feature::new("x", FeatureKind::Continuous),
//!     Feature::new("s", FeatureKind::Boolean),
//! ];
//! let x = vec![1.0, 1.0, -1.0, 0.0, 0.8, 0.0, -0.7, 1.0];
//! let data = Dataset::new(features, x, vec![1, 0, 1, 0]).unwrap();
//!
//! let config = MlpConfig { hidden_units: 4, ..MlpConfig::german(2, 7) };
//! let set = ConstraintSet::parse(&["I[s] < 0"], &data.feature_names(), 0.1).unwrap();
//! let trained = train(MlpParams::init(&config).unwrap(), &data, &config, Some(&set), None).unwrap();
//! assert_eq!(trained.history.len(), config.epochs);
//! ```

pub mod autodiff;
pub mod constraints;
pub mod data;
pub mod experiment;
pub mod fairness;
pub mod importance;
pub mod model;

use autodiff::NumericalError;
use constraints::ConstraintError;
use data::DataError;
use fairness::UndefinedMetric;
use importance::ImportanceError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Numerical(#[from] NumericalError),
    #[error(transparent)]
    Metric(#[from] UndefinedMetric),
}

impl From<ImportanceError> for Error {
    fn from(e: ImportanceError) -> Self {
        match e {
            ImportanceError::Numerical(n) => Error::Numerical(n),
            other => Error::Config(other.to_string()),
        }
    }
}

impl Error {
    /// Process exit status: 2 configuration, 3 data, 4 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Constraint(_) => 2,
            Error::Data(_) => 3,
            Error::Numerical(_) | Error::Metric(_) => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/autodiff.md")]
    mod autodiff {}
    #[doc = include_str!("../../../book/src/importance.md")]
    mod importance {}
    #[doc = include_str!("../../../book/src/constraints.md")]
    mod constraints {}
    #[doc = include_str!("../../../book/src/fairness.md")]
    mod fairness {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
