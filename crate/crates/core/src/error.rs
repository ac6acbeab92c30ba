use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Pauli support must be non-empty")]
    EmptySupport,
    #[error("checks act on exactly two sites, got {0}")]
    NotTwoSite(usize),
    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("invalid tableau: {0}")]
    InvalidTableau(String),
    #[error("L must be even (got {0})")]
    OddSize(usize),
    #[error("L must be at least {min} (got {got})")]
    SizeTooSmall { got: usize, min: usize },
    #[error("probability {name} = {value} outside [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("sites must be distinct")]
    SameSite,
    #[error("need at least {need} sites, got {got}")]
    TooFewSites { need: usize, got: usize },
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("empty parameter grid")]
    EmptyGrid,
    #[error("fit: {0}")]
    Fit(String),
    #[error("collapse: {0}")]
    Collapse(String),
    #[error("dense oracle: {0}")]
    Oracle(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("image: {0}")]
    Image(String),
}

pub type Result<T> = std::result::Result<T, Error>;
