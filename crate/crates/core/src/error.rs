use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no closed-form root for {0}")]
    NoClosedFormRoot(&'static str),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("grid point {x} lies inside the excluded neighborhood of discontinuity point {site}")]
    DiscontinuityPoint { x: f64, site: f64 },

    #[error(
        "quadrature did not converge: achieved error bound {achieved:e}, requested {requested:e}"
    )]
    QuadratureFailure { achieved: f64, requested: f64 },

    #[error("refine mesh near origin: cell ]{lo}, {hi}] carries mass {mass:e} but admits no nonzero tag")]
    RefineMeshNearOrigin { lo: f64, hi: f64, mass: f64 },

    #[error(
        "outside Comparison-Lemma regime: |f_k(u) - 1| = {deviation} >= 1 at component k = {k}"
    )]
    OutsideComparisonRegime { k: usize, deviation: f64 },

    #[error(
        "row n = {n} is not centered: component k = {k} has mean {mean:e}; use the general verdict"
    )]
    NotCentered { n: u64, k: usize, mean: f64 },

    #[error("no row for n = {0} in explicit array")]
    MissingRow(u64),

    #[error("schema violation at {pointer}: {message}")]
    Schema { pointer: String, message: String },

    #[error("nothing to plot")]
    NothingToPlot,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
