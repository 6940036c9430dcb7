use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs are individually valid but describe an unphysical system.
    #[error("unphysical input: {0}")]
    Unphysical(String),

    #[error("singular element: {0}")]
    SingularElement(String),

    #[error("resonance divergence: {0}")]
    ResonanceDivergence(String),

    #[error("wavelength {wavelength_nm} nm is outside the band (band edge {band_edge_nm} nm)")]
    OutsideBand { wavelength_nm: f64, band_edge_nm: f64 },

    /// Two sampled objects do not share a grid, or a grid is malformed.
    #[error("shape error: {0}")]
    Shape(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("divergent bunching: {0}")]
    DivergentBunching(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("{what} = {value} is outside [{min}, {max}]")]
    Range {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("ambiguous edge: 10% crossing at {first_low_ns} ns, 90% crossing at {first_high_ns:?} ns")]
    AmbiguousEdge {
        first_low_ns: f64,
        first_high_ns: Option<f64>,
    },

    #[error("no feature found: {0}")]
    NoFeature(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Invalid configuration; `field` names the offending key.
    #[error("invalid config field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("unknown CSV schema with header `{0}`")]
    Schema(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Unphysical(_) => "unphysical",
            Error::SingularElement(_) => "singular_element",
            Error::ResonanceDivergence(_) => "resonance_divergence",
            Error::OutsideBand { .. } => "outside_band",
            Error::Shape(_) => "shape",
            Error::Data(_) => "data",
            Error::DivergentBunching(_) => "divergent_bunching",
            Error::Numerical(_) => "numerical",
            Error::Range { .. } => "range",
            Error::AmbiguousEdge { .. } => "ambiguous_edge",
            Error::NoFeature(_) => "no_feature",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::Validation { .. } => "validation",
            Error::Schema(_) => "schema",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
