//! Error type shared by all modules.

use crate::field_poly::Field;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the library.
///
/// Errors split into two families that callers (notably the CLI) treat
/// differently: *precondition violations* (bad inputs: mismatched fields,
/// non-invertible matrices, weights of the wrong shape, …) and *budget
/// exhaustion* (a degree cap or search budget was hit before an answer was
/// certified). [`Error::is_budget`] distinguishes them.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("field mismatch: {0} vs {1}")]
    FieldMismatch(Field, Field),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("scalar is not invertible")]
    NotInvertible,
    #[error("degree cap {cap} exceeded: intermediate degree would reach {needed}")]
    DegreeCapExceeded { cap: u32, needed: u32 },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("{0:?} is not a permutation of 1..={1}")]
    NotAPermutation(Vec<usize>, usize),
    #[error("elementary generator at index {index} may not involve x{index}")]
    ElementaryInvolvesOwnVariable { index: usize },
    #[error("variable index {0} out of range 1..={1}")]
    VariableOutOfRange(usize, usize),
    #[error("expected a word fixing the origin, found constant term in component {component}")]
    NonzeroConstantTerm { component: usize },
    #[error("weight must be strictly positive in every coordinate")]
    NonPositiveWeight,
    #[error("weight {0} is not sorted non-increasing")]
    WeightNotSorted(String),
    #[error("{0}")]
    UnsupportedWeightShape(String),
    #[error("word does not fix the valuation: inequality a{index} >= {rhs} fails at the given weight")]
    NotInStabilizer { index: usize, rhs: String },
    #[error("elements do not form a group closed under composition: {0}")]
    NotAGroup(String),
    #[error("field characteristic {p} divides the group order {order}")]
    CharacteristicDividesOrder { p: u64, order: usize },
    #[error("search budget exhausted: {0}")]
    SearchBudgetExceeded(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Precondition(String),
}

impl Error {
    /// True when the error reports an exhausted computational budget rather
    /// than an invalid input. The CLI maps budget errors to exit code 3 and
    /// everything else to exit code 2.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            Error::DegreeCapExceeded { .. } | Error::SearchBudgetExceeded(_)
        )
    }

    /// Shorthand for a one-off precondition failure.
    pub fn precondition(msg: impl Into<String>) -> Error {
        Error::Precondition(msg.into())
    }

    /// Shorthand for a parse failure at a byte offset within `src`,
    /// translated to line/column (both 1-based).
    pub fn parse_at(src: &str, offset: usize, message: impl Into<String>) -> Error {
        let clamped = offset.min(src.len());
        let prefix = &src[..clamped];
        let line = prefix.matches('\n').count() + 1;
        let column = clamped - prefix.rfind('\n').map_or(0, |i| i + 1) + 1;
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
