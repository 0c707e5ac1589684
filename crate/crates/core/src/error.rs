use crate::report::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised when a structure cannot even be represented, or when an
/// operation's precondition does not hold.
///
/// Axiom failures of well-formed structures are not errors: they are reported
/// as violations in a [`ValidationReport`].
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("unknown {kind} id {id:?} in {context}")]
    UnknownId {
        kind: String,
        id: String,
        context: String,
    },
    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: String, id: String },
    #[error("table {map} has more than one entry for {key}")]
    DuplicateEntry { map: String, key: String },
    #[error("table {map} is not total: no entry for {missing}")]
    NotTotal { map: String, missing: String },
    #[error("table {map} has an entry outside its domain: {entry}")]
    OffDomain { map: String, entry: String },
    #[error("points {p:?} and {q:?} lie in different fibres")]
    NotSameFiber { p: String, q: String },
    #[error("integrity failure: {0}")]
    Integrity(String),
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{subject} failed validation ({} violations)", .report.violations.len())]
    Invalid {
        subject: String,
        report: ValidationReport,
    },
    #[error("enumeration refused: {what} is {actual}, bound is {bound}")]
    BoundExceeded {
        what: String,
        actual: usize,
        bound: usize,
    },
    #[error("unsatisfiable generator bounds: {0}")]
    Unsatisfiable(String),
}

impl Error {
    pub(crate) fn invalid(subject: impl Into<String>, report: ValidationReport) -> Self {
        Error::Invalid {
            subject: subject.into(),
            report,
        }
    }
}
