use thiserror::Error;

use crate::arith::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("duplicate coordinate label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown coordinate {0:?}")]
    UnknownCoordinate(String),
    #[error("point has no value for coordinate {0:?}")]
    MissingCoordinate(String),
    #[error("constraint is identically false: {0}")]
    IdenticallyFalse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error("vertex set is empty")]
    Empty,
    #[error("vertex {index} has {got} coordinates, space has {expected}")]
    WrongLength { index: usize, got: usize, expected: usize },
    #[error("{coordinates} coordinates exceeds the facet-enumeration cap of {cap}")]
    DimensionOverflow { coordinates: usize, cap: usize },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("unknown scenario {0:?} (expected one of fig3, bivariate, trivariate, pairwise3, beta)")]
    Unknown(String),
    #[error("scenario {name:?} is not supported: {reason}")]
    NotConvex { name: String, reason: String },
    #[error("scenario {name:?}: {reason}")]
    Invalid { name: String, reason: String },
    #[error("parameter {name} = {value} is outside [0, 1]")]
    ParameterOutOfRange { name: &'static str, value: Rational },
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("{0:?} is not a coordinate of the hull's space")]
    UnknownTarget(String),
    #[error("no facet or equality of the hull involves {0:?}")]
    TargetUnconstrained(String),
    #[error("scenario {0:?} has no causal target")]
    NoTarget(String),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DataError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("validation failed for {what}: value {value}, slack {slack}")]
    Validation {
        what: String,
        value: Box<Rational>,
        slack: Box<Rational>,
    },
    #[error("table {0} is required but missing")]
    MissingTable(&'static str),
    #[error("arm weights are required to derive {0}")]
    MissingArmWeights(&'static str),
    #[error("unknown dataset {0:?} (expected lipid or vitamin-a, or a path)")]
    UnknownDataset(String),
    #[error("no observed table supplies coordinate {0:?}")]
    UnsupportedCoordinate(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle and closed form disagree on the {side} endpoint: oracle {oracle}, closed form {closed_form}")]
    Mismatch {
        side: &'static str,
        oracle: String,
        closed_form: String,
    },
    #[error("oracle infeasibility ({oracle_infeasible}) disagrees with closed-form rejection ({closed_form_rejects})")]
    FeasibilityMismatch {
        oracle_infeasible: bool,
        closed_form_rejects: bool,
    },
    #[error("scenario has no causal target")]
    NoTarget,
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Data(#[from] DataError),
}
