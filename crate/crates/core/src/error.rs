//! Crate-wide error and validation-report types.

use thiserror::Error;

/// A single validation failure, naming the offending field and the
/// constraint it breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub constraint: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Violation { field: field.into(), constraint: constraint.into() }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument does not hold.
    #[error("domain violation for {name}: {detail}")]
    Domain { name: String, detail: String },

    /// The requested quantity is not defined in this parameter regime.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// Subset enumeration would be too expensive.
    #[error("support size {support} exceeds enumeration cap {cap}")]
    SupportTooLarge { support: usize, cap: usize },

    /// A conditional probability was requested on a zero-mass cell.
    #[error("zero-mass cell ({subgroup}, {x1}): posterior undefined")]
    ZeroMassCell { subgroup: String, x1: String },

    /// An input distribution failed admissibility or type validation.
    #[error("inadmissible input: {}", format_violations(.0))]
    Invalid(Vec<Violation>),

    /// A frontier chain handed to the Minkowski merge is not concave.
    #[error("non-concave chain: {0}")]
    NonConcaveChain(String),
}

impl Error {
    pub fn domain(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Domain { name: name.into(), detail: detail.into() }
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
