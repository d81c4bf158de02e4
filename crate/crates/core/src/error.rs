use thiserror::Error;

/// Which half of a product ratio failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductSide {
    Numerator,
    Denominator,
}

impl std::fmt::Display for ProductSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProductSide::Numerator => f.write_str("numerator"),
            ProductSide::Denominator => f.write_str("denominator"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QkError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain: {0}")]
    OutOfDomain(String),

    #[error("q-derivative is singular at x = 0")]
    SingularPoint,

    #[error("no convergence after {terms} terms")]
    NonConvergent { terms: usize },

    #[error("series diverges: terms grew for {window} consecutive steps (after {terms} terms)")]
    Divergent { terms: usize, window: usize },

    #[error("factor {index} of the infinite product vanishes{}", side.map(|s| format!(" ({s})")).unwrap_or_default())]
    ZeroFactor {
        index: usize,
        side: Option<ProductSide>,
    },

    #[error("pole: factor {index} of the reciprocal product vanishes")]
    Pole { index: usize },

    #[error("non-finite term encountered at index {index}")]
    NonFinite { index: i64 },

    #[error("unknown identity or suite '{0}'")]
    UnknownIdentity(String),
}

impl QkError {
    /// True for failures of the numerical evaluation itself, as opposed to
    /// violated preconditions.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            QkError::NonConvergent { .. }
                | QkError::Divergent { .. }
                | QkError::ZeroFactor { .. }
                | QkError::Pole { .. }
                | QkError::NonFinite { .. }
        )
    }

    pub(crate) fn with_side(self, side: ProductSide) -> Self {
        match self {
            QkError::ZeroFactor { index, .. } => QkError::ZeroFactor {
                index,
                side: Some(side),
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, QkError>;

pub(crate) fn invalid(msg: impl Into<String>) -> QkError {
    QkError::InvalidParameter(msg.into())
}
