use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("resolvent root-finder did not converge at x = {x}, eps = {eps} (last bracket [{lo}, {hi}])")]
    Resolvent { x: f64, eps: f64, lo: f64, hi: f64 },

    #[error("adaptive quadrature on [{a}, {b}] missed relative tolerance {tol}")]
    Quadrature { a: f64, b: f64, tol: f64 },

    #[error("value {value} at node {node} lies outside the domain of the entropy function")]
    Domain { node: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("hypothesis {hypothesis} violated: {detail}")]
    Validation { hypothesis: String, detail: String },

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("{stage} stage failed at t = {time}: {detail}")]
    Stage {
        stage: &'static str,
        time: f64,
        detail: String,
        history: Vec<f64>,
    },

    #[error("config line {line}: {msg}")]
    ConfigLine { line: usize, msg: String },

    #[error("config: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
