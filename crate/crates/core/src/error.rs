use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("feature `{0}` already exists")]
    DuplicateFeature(String),
    #[error("invalid feature: {0}")]
    InvalidFeature(String),
    #[error("column `{name}` has {got} values, expected {expected}")]
    LengthMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("row {row}, column `{column}`: value does not conform to the column kind")]
    KindViolation { row: usize, column: String },
    #[error("feature `{0}` has a different kind than expected")]
    KindMismatch(String),
    #[error("dataset is not labeled")]
    Unlabeled,
    #[error("invalid learner specification: {0}")]
    InvalidSpec(String),
    #[error("target `{0}` has fewer than two classes")]
    SingleClass(String),
    #[error("learner has no input features")]
    NoFeatures,
    #[error("the linear classifier cannot fit a continuous target")]
    LinearRegression,
    #[error("target `{0}` is continuous; accuracy needs a nominal target")]
    NotClassification(String),
    #[error("need at least {needed} rows, have {have}")]
    TooFewRows { needed: usize, have: usize },
    #[error("invalid matching: {0}")]
    Matching(String),
    #[error("stratification failed: class `{class}` has {count} examples for {folds} folds")]
    Stratification {
        class: String,
        count: usize,
        folds: usize,
    },
    #[error("duplicate approximations of `{0}` have different kinds")]
    MixedDuplicateKinds(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("paired samples differ in length ({0} vs {1})")]
    PairLength(usize, usize),
}
