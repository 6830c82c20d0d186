use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("undeclared symbol `{0}`")]
    UndeclaredSymbol(String),

    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),

    #[error("invalid symbol name `{0}`")]
    InvalidSymbolName(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("symbol `{0}` is numeric and cannot be used as an atom")]
    NumericAtom(String),

    #[error("symbol `{0}` is not numeric and cannot appear in a linear comparison")]
    NonNumericComparison(String),

    #[error("symbol `{0}` has an infinite domain: not enumerable")]
    NotEnumerable(String),

    #[error("domain mismatch for `{symbol}`: {detail}")]
    DomainMismatch { symbol: String, detail: String },

    #[error("no value assigned to `{0}`")]
    MissingAssignment(String),

    #[error("value {value} is outside the domain of `{symbol}`")]
    ValueOutOfDomain { symbol: String, value: f64 },

    #[error("atom `{0}` has no probability")]
    MissingProbability(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("atomic belief has no density")]
    AtomicBelief,

    #[error("normalizing constant is not finite and positive (Z = {0})")]
    NonFiniteNormalizer(f64),

    #[error("quadrature over {dims} dimensions is rejected (max {max}); use Monte Carlo")]
    QuadratureDimension { dims: usize, max: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("simple function sets overlap at carrier point {0}")]
    OverlappingSets(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("gradient undefined: functional value is zero")]
    ZeroFunctional,

    #[error("MAP over an infinite interpretation space requires a Dirac belief")]
    InfiniteMapSpace,

    #[error("preset `{preset}`: {detail}")]
    PresetMismatch { preset: String, detail: String },

    #[error("line {line}: {message}")]
    ModelFile { line: usize, message: String },
}

impl Error {
    pub(crate) fn syntax(src: &str, offset: usize, message: impl Into<String>) -> Self {
        let (line, column) = line_col(src, offset);
        Error::Syntax {
            offset,
            line,
            column,
            message: message.into(),
        }
    }

    /// Whether the error comes from a numerical guard rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFiniteNormalizer(_) | Error::ZeroFunctional)
    }
}

pub(crate) fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let upto = &src[..offset.min(src.len())];
    let line = upto.matches('\n').count() + 1;
    let column = upto
        .rfind('\n')
        .map_or(upto.len(), |nl| upto.len() - nl - 1)
        + 1;
    (line, column)
}
